//! Text formats: Gauss codes, moves and trace files.
//!
//! Gauss code grammar:
//!
//! ```text
//! diagram   := component ("/" component)*
//! component := "-" | token (" " token)*
//! token     := "w" | ("O" | "U") integer ("+" | "-")
//! ```
//!
//! Move syntax: `KIND c<i> p<j>[,p<k>...] [c<i'> p<j'>...] [sign:+|-] [variant:<tag>]`
//! with 1-based components and 0-based positions.
//!
//! Trace file: `INIT <code>`, then `MOVE <move>` lines, each optionally
//! followed by `DIAG <code>`. Lines starting with `#` and blank lines are skipped.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::diagram::{ChordId, Event, GaussDiagram, Pos, Role, Sign, Violation, WenId};
use crate::moves::{Move, MoveKind};
use crate::trace::{Trace, TraceStep};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    SignMismatch(u32),
    RoleViolation(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::SignMismatch(c) => write!(f, "sign mismatch for chord {c}"),
            ParseErrorKind::RoleViolation(m) => write!(f, "role violation: {m}"),
        }
    }
}

/// A parse failure at a 1-based line and column.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn syntax(column: usize, msg: impl Into<String>) -> Self {
        ParseError {
            line: 1,
            column,
            kind: ParseErrorKind::Syntax(msg.into()),
        }
    }

    fn at_line(mut self, line: usize, column_offset: usize) -> Self {
        self.line = line;
        self.column += column_offset;
        self
    }
}

/// Whitespace-separated tokens of `s` with their 1-based columns.
fn tokens(s: &str, base: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in s.char_indices() {
        if ch.is_whitespace() {
            if let Some(st) = start.take() {
                out.push((base + st, &s[st..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push((base + st, &s[st..]));
    }
    out
}

struct Lenient {
    diagram: GaussDiagram,
    columns: BTreeMap<Pos, usize>,
}

fn parse_lenient(text: &str) -> Result<Lenient, ParseError> {
    let mut components = Vec::new();
    let mut columns = BTreeMap::new();
    let mut signs: BTreeMap<ChordId, (Sign, usize)> = BTreeMap::new();
    let mut next_wen = 1;
    let mut offset = 0;
    for (c, part) in text.split('/').enumerate() {
        let toks = tokens(part, offset + 1);
        offset += part.len() + 1;
        if toks.is_empty() {
            return Err(ParseError::syntax(
                offset - part.len(),
                "empty component (write `-` for a circle without events)",
            ));
        }
        let mut comp = Vec::new();
        if toks.len() == 1 && toks[0].1 == "-" {
            components.push(comp);
            continue;
        }
        for (col, tok) in toks {
            if tok == "w" {
                columns.insert(Pos::new(c, comp.len()), col);
                comp.push(Event::Wen(WenId(next_wen)));
                next_wen += 1;
                continue;
            }
            let role = match tok.as_bytes()[0] {
                b'O' => Role::Tail,
                b'U' => Role::Head,
                _ => return Err(ParseError::syntax(col, format!("unexpected token `{tok}`"))),
            };
            let sign = match tok.as_bytes()[tok.len() - 1] {
                b'+' => Sign::Positive,
                b'-' => Sign::Negative,
                _ => {
                    return Err(ParseError::syntax(
                        col,
                        format!("token `{tok}` must end in `+` or `-`"),
                    ))
                }
            };
            let digits = &tok[1..tok.len() - 1];
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(ParseError::syntax(
                    col,
                    format!("token `{tok}` needs a chord number"),
                ));
            }
            let id: u32 = digits
                .parse()
                .map_err(|_| ParseError::syntax(col, format!("chord number `{digits}` too large")))?;
            let ch = ChordId(id);
            match signs.get(&ch) {
                Some(&(s, _)) if s != sign => {
                    return Err(ParseError {
                        line: 1,
                        column: col,
                        kind: ParseErrorKind::SignMismatch(id),
                    })
                }
                Some(_) => {}
                None => {
                    signs.insert(ch, (sign, col));
                }
            }
            columns.insert(Pos::new(c, comp.len()), col);
            comp.push(Event::End(ch, role));
        }
        components.push(comp);
    }
    let signs = signs.into_iter().map(|(c, (s, _))| (c, s)).collect();
    Ok(Lenient {
        diagram: GaussDiagram::from_parts_unchecked(components, signs),
        columns,
    })
}

/// Parses without the role checks, so `validate` can list every violation.
pub fn parse_unchecked(text: &str) -> Result<GaussDiagram, ParseError> {
    Ok(parse_lenient(text)?.diagram)
}

pub fn parse(text: &str) -> Result<GaussDiagram, ParseError> {
    let Lenient { diagram, columns } = parse_lenient(text)?;
    if let Err(violations) = diagram.validate() {
        let v = &violations[0];
        let column = match v {
            Violation::DuplicateRole { at, .. } | Violation::DuplicateWen { at, .. } => {
                columns.get(at).copied().unwrap_or(1)
            }
            Violation::MissingRole { chord, role } => {
                let other = match role {
                    Role::Tail => Role::Head,
                    Role::Head => Role::Tail,
                };
                diagram
                    .locate(*chord, other)
                    .and_then(|p| columns.get(&p).copied())
                    .unwrap_or(1)
            }
            _ => 1,
        };
        return Err(ParseError {
            line: 1,
            column,
            kind: ParseErrorKind::RoleViolation(v.to_string()),
        });
    }
    Ok(diagram)
}

/// Stored order, chords numbered by first encounter.
pub fn serialize(d: &GaussDiagram) -> String {
    let mut labels: BTreeMap<ChordId, u32> = BTreeMap::new();
    let parts: Vec<String> = d
        .components()
        .iter()
        .map(|comp| {
            if comp.is_empty() {
                return "-".to_string();
            }
            let toks: Vec<String> = comp
                .iter()
                .map(|e| match *e {
                    Event::Wen(_) => "w".to_string(),
                    Event::End(ch, role) => {
                        let next = labels.len() as u32 + 1;
                        let l = *labels.entry(ch).or_insert(next);
                        let r = if role == Role::Tail { 'O' } else { 'U' };
                        format!("{r}{l}{}", d.sign(ch))
                    }
                })
                .collect();
            toks.join(" ")
        })
        .collect();
    parts.join(" / ")
}

fn format_sites(sites: &[Pos]) -> String {
    let mut out: Vec<String> = Vec::new();
    let mut i = 0;
    while i < sites.len() {
        let c = sites[i].component;
        let mut ps = vec![format!("p{}", sites[i].index)];
        let mut j = i + 1;
        while j < sites.len() && sites[j].component == c {
            ps.push(format!("p{}", sites[j].index));
            j += 1;
        }
        out.push(format!("c{} {}", c + 1, ps.join(",")));
        i = j;
    }
    out.join(" ")
}

pub fn format_move(m: &Move) -> String {
    let kind = m.kind().name();
    match *m {
        Move::R1Add { at, sign, head_first } => {
            let variant = if head_first { " variant:hf" } else { "" };
            format!("{kind} {} sign:{sign}{variant}", format_sites(&[at]))
        }
        Move::R2Add {
            tails,
            heads,
            sign,
            parallel,
            heads_first,
        } => {
            let v = match (parallel, heads_first) {
                (true, false) => "par",
                (false, false) => "anti",
                (true, true) => "par-hf",
                (false, true) => "anti-hf",
            };
            format!("{kind} {} sign:{sign} variant:{v}", format_sites(&[tails, heads]))
        }
        Move::R2Del { tails, heads } => format!("{kind} {}", format_sites(&[tails, heads])),
        Move::R3 { top, middle, bottom } => {
            format!("{kind} {}", format_sites(&[top, middle, bottom]))
        }
        Move::R1Del { at }
        | Move::R8 { at }
        | Move::W1 { at }
        | Move::W2 { at }
        | Move::W4Add { at }
        | Move::W4Del { at } => format!("{kind} {}", format_sites(&[at])),
        Move::Mirror => kind.to_string(),
        Move::MirrorComponent { component } => format!("{kind} c{}", component + 1),
    }
}

fn parse_index(tok: &str, prefix: char, col: usize) -> Result<usize, ParseError> {
    tok.strip_prefix(prefix)
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| ParseError::syntax(col, format!("expected `{prefix}<number>`, found `{tok}`")))
}

/// Parses one move. Pair moves accept either the pair start alone or
/// both positions of the pair; only the first is kept.
pub fn parse_move(text: &str) -> Result<Move, ParseError> {
    let toks = tokens(text, 1);
    let Some(&(kcol, ktok)) = toks.first() else {
        return Err(ParseError::syntax(1, "empty move"));
    };
    let kind: MoveKind = ktok
        .parse()
        .map_err(|e: String| ParseError::syntax(kcol, e))?;
    // Groups of (component, positions).
    let mut groups: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    let mut sign = None;
    let mut variant = None;
    for &(col, tok) in &toks[1..] {
        if let Some(s) = tok.strip_prefix("sign:") {
            sign = Some(match s {
                "+" => Sign::Positive,
                "-" => Sign::Negative,
                _ => return Err(ParseError::syntax(col, format!("bad sign `{s}`"))),
            });
        } else if let Some(v) = tok.strip_prefix("variant:") {
            variant = Some((v.to_string(), col));
        } else if tok.starts_with('c') {
            let c = parse_index(tok, 'c', col)?;
            if c == 0 {
                return Err(ParseError::syntax(col, "components are numbered from 1"));
            }
            groups.push((c - 1, Vec::new(), col));
        } else if tok.starts_with('p') {
            let Some(g) = groups.last_mut() else {
                return Err(ParseError::syntax(col, "position before any component"));
            };
            for piece in tok.split(',') {
                g.1.push(parse_index(piece, 'p', col)?);
            }
        } else {
            return Err(ParseError::syntax(col, format!("unexpected token `{tok}`")));
        }
    }
    let end = text.len() + 1;
    for g in &groups {
        if g.1.is_empty() && kind != MoveKind::MirrorComponent {
            return Err(ParseError::syntax(g.2, "component without positions"));
        }
    }
    let sites: Vec<Pos> = groups
        .iter()
        .flat_map(|(c, ps, _)| ps.iter().map(move |&p| Pos::new(*c, p)))
        .collect();
    let need_sign = || sign.ok_or_else(|| ParseError::syntax(end, format!("{kind} needs `sign:+` or `sign:-`")));
    let count = |n: usize| -> Result<(), ParseError> {
        if sites.len() == n {
            Ok(())
        } else {
            Err(ParseError::syntax(
                end,
                format!("{kind} takes {n} position(s), found {}", sites.len()),
            ))
        }
    };
    let single_or_pair = || -> Result<Pos, ParseError> {
        match sites.len() {
            1 => Ok(sites[0]),
            2 if sites[0].component == sites[1].component
                && (sites[1].index == sites[0].index + 1 || sites[1].index == 0) =>
            {
                Ok(sites[0])
            }
            _ => Err(ParseError::syntax(
                end,
                format!("{kind} takes one position or one adjacent pair"),
            )),
        }
    };
    let bad_variant = |v: &str, col: usize| ParseError::syntax(col, format!("unknown variant `{v}` for {kind}"));
    Ok(match kind {
        MoveKind::R1Add => {
            count(1)?;
            let head_first = match &variant {
                None => false,
                Some((v, col)) => match v.as_str() {
                    "tf" => false,
                    "hf" => true,
                    _ => return Err(bad_variant(v, *col)),
                },
            };
            Move::R1Add {
                at: sites[0],
                sign: need_sign()?,
                head_first,
            }
        }
        MoveKind::R2Add => {
            count(2)?;
            let (parallel, heads_first) = match &variant {
                None => (true, false),
                Some((v, col)) => match v.as_str() {
                    "par" => (true, false),
                    "anti" => (false, false),
                    "par-hf" => (true, true),
                    "anti-hf" => (false, true),
                    _ => return Err(bad_variant(v, *col)),
                },
            };
            Move::R2Add {
                tails: sites[0],
                heads: sites[1],
                sign: need_sign()?,
                parallel,
                heads_first,
            }
        }
        MoveKind::R2Del => {
            count(2)?;
            Move::R2Del {
                tails: sites[0],
                heads: sites[1],
            }
        }
        MoveKind::R3 => {
            count(3)?;
            Move::R3 {
                top: sites[0],
                middle: sites[1],
                bottom: sites[2],
            }
        }
        MoveKind::W4Add => {
            count(1)?;
            Move::W4Add { at: sites[0] }
        }
        MoveKind::R1Del => Move::R1Del { at: single_or_pair()? },
        MoveKind::R8 => Move::R8 { at: single_or_pair()? },
        MoveKind::W1 => Move::W1 { at: single_or_pair()? },
        MoveKind::W2 => Move::W2 { at: single_or_pair()? },
        MoveKind::W4Del => Move::W4Del { at: single_or_pair()? },
        MoveKind::Mirror => {
            count(0)?;
            if !groups.is_empty() {
                return Err(ParseError::syntax(end, "Mirror takes no site"));
            }
            Move::Mirror
        }
        MoveKind::MirrorComponent => {
            if groups.len() != 1 || !sites.is_empty() {
                return Err(ParseError::syntax(end, "MirrorComponent takes exactly `c<i>`"));
            }
            Move::MirrorComponent {
                component: groups[0].0,
            }
        }
    })
}

/// Trace file text. Checkpoints are written where present.
pub fn format_trace(t: &Trace) -> String {
    let mut out = format!("INIT {}\n", serialize(&t.initial));
    for s in &t.steps {
        out.push_str(&format!("MOVE {}\n", format_move(&s.mv)));
        if let Some(d) = &s.checkpoint {
            out.push_str(&format!("DIAG {}\n", serialize(d)));
        }
    }
    out
}

pub fn parse_trace(text: &str) -> Result<Trace, ParseError> {
    let mut initial: Option<GaussDiagram> = None;
    let mut steps: Vec<TraceStep> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim_start();
        let indent = raw.len() - trimmed.len();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
        let offset = indent + key.len() + 1;
        match key {
            "INIT" => {
                if initial.is_some() {
                    return Err(ParseError::syntax(1, "second INIT line").at_line(line, indent));
                }
                initial = Some(parse(rest).map_err(|e| e.at_line(line, offset))?);
            }
            "MOVE" => {
                if initial.is_none() {
                    return Err(ParseError::syntax(1, "MOVE before INIT").at_line(line, indent));
                }
                let mv = parse_move(rest).map_err(|e| e.at_line(line, offset))?;
                steps.push(TraceStep { mv, checkpoint: None });
            }
            "DIAG" => {
                let d = parse(rest).map_err(|e| e.at_line(line, offset))?;
                match steps.last_mut() {
                    Some(s) if s.checkpoint.is_none() => s.checkpoint = Some(d),
                    _ => {
                        return Err(ParseError::syntax(1, "DIAG must follow a MOVE line")
                            .at_line(line, indent))
                    }
                }
            }
            _ => {
                return Err(ParseError::syntax(1, format!("unknown line kind `{key}`"))
                    .at_line(line, indent))
            }
        }
    }
    let initial = initial.ok_or_else(|| ParseError::syntax(1, "missing INIT line"))?;
    Ok(Trace { initial, steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_chord() {
        let d = parse("O1+ U1+").unwrap();
        assert_eq!(d.num_chords(), 1);
        assert_eq!(d.sign(ChordId(1)), Sign::Positive);
        assert_eq!(d.component(0)[0], Event::End(ChordId(1), Role::Tail));
        assert_eq!(serialize(&d), "O1+ U1+");
    }

    #[test]
    fn error_kinds_are_distinct() {
        let e = parse("O1+ U1-").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::SignMismatch(1));
        assert_eq!(e.column, 5);
        assert!(e.to_string().contains("sign mismatch for chord 1"));

        let e = parse("O1+ O1+").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::RoleViolation(_)));
        assert_eq!(e.column, 5);

        let e = parse("O1+ X1+").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
        assert_eq!(e.column, 5);

        assert!(matches!(parse("O1+").unwrap_err().kind, ParseErrorKind::RoleViolation(_)));
        assert!(matches!(parse("").unwrap_err().kind, ParseErrorKind::Syntax(_)));
        assert!(matches!(parse("O1 U1").unwrap_err().kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn unchecked_keeps_bad_roles() {
        let d = parse_unchecked("O1+ O1+").unwrap();
        assert!(d.validate().is_err());
    }

    #[test]
    fn links_and_empty_components() {
        let d = parse("w O1+ U2- / -/ U1+ O2-").unwrap();
        assert_eq!(d.num_components(), 3);
        assert_eq!(d.len_of(1), 0);
        assert_eq!(serialize(&d), "w O1+ U2- / - / U1+ O2-");
    }

    #[test]
    fn renumbering_by_first_encounter() {
        assert_eq!(serialize(&parse("U7- O3+ O7- U3+").unwrap()), "U1- O2+ O1- U2+");
    }

    #[test]
    fn move_specs_round_trip() {
        let specs = [
            "R1Add c1 p0 sign:+",
            "R1Add c2 p3 sign:- variant:hf",
            "R1Del c1 p2",
            "R2Add c1 p0 c2 p1 sign:+ variant:anti",
            "R2Add c1 p0,p0 sign:- variant:par-hf",
            "R2Del c1 p0,p4",
            "R3 c1 p0 c2 p0 c3 p0",
            "R3 c1 p0,p3,p6",
            "R8 c1 p4",
            "W1 c1 p0",
            "W2 c2 p1",
            "W4Add c1 p5",
            "W4Del c1 p3",
            "Mirror",
            "MirrorComponent c2",
        ];
        for s in specs {
            let m = parse_move(s).unwrap();
            assert_eq!(format_move(&m), s);
        }
        assert_eq!(
            parse_move("R8 c1 p3,p4").unwrap(),
            Move::R8 { at: Pos::new(0, 3) }
        );
        assert!(parse_move("R8 c1 p3,p5").is_err());
        assert!(parse_move("R1Add c1 p0").is_err());
        assert!(parse_move("R3 c1 p0").is_err());
        assert!(parse_move("R8 c0 p0").is_err());
        assert!(parse_move("Frob c1 p0").is_err());
    }

    #[test]
    fn trace_files() {
        let text = "# example\nINIT w O1+ U1+\nMOVE W2 c1 p0\nDIAG O1- w U1-\n\nMOVE W1 c1 p1\n";
        let t = parse_trace(text).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.steps[0].checkpoint.is_some());
        assert!(t.steps[1].checkpoint.is_none());
        let again = parse_trace(&format_trace(&t)).unwrap();
        assert_eq!(again.len(), 2);
        assert!(again.verify().is_ok());

        let e = parse_trace("INIT O1+ U1+\nMOVE R8 c1\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_trace("INIT O1+ U1-\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 10));
        assert!(parse_trace("MOVE R8 c1 p0\n").is_err());
        assert!(parse_trace("INIT -\nDIAG -\n").is_err());
    }
}
