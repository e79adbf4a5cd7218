//! Reader and writer for a subset of the HOA v1 automaton format.
//!
//! Supported: explicit states, state-based acceptance marks, explicit edge
//! labels written as boolean expressions over AP indices, a single start
//! state and a Rabin acceptance condition written as a disjunction of
//! `Fin(a) & Inf(b)` terms. One item (header, `State:` line or edge) per line.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::dra::{Dra, DraError, RabinPair, MAX_DRA_PROPOSITIONS};

#[derive(Debug, Error)]
pub enum HoaError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("state {state} has several successors on letter {letter}")]
    NonDeterministic { state: usize, letter: u32 },
    #[error("state {state} has no successor on letter {letter}")]
    Incomplete { state: usize, letter: u32 },
    #[error("acceptance condition is not a Rabin condition: {0}")]
    NonRabin(String),
    #[error("line {line}: transition-based acceptance is not supported")]
    TransitionAcceptance { line: usize },
    #[error("invalid automaton: {0}")]
    Invalid(#[from] DraError),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn parse_err(line: usize, message: impl Into<String>) -> HoaError {
    HoaError::Parse { line, message: message.into() }
}

/// Writes the automaton in the supported HOA subset. States appear in id
/// order and every edge is a full minterm, so the output is canonical.
pub fn export_hoa(dra: &Dra) -> String {
    let mut out = String::new();
    let n_ap = dra.ap().len();
    let pairs = dra.pairs();
    out.push_str("HOA: v1\n");
    writeln!(out, "States: {}", dra.num_states()).unwrap();
    writeln!(out, "Start: {}", dra.initial()).unwrap();
    write!(out, "AP: {}", n_ap).unwrap();
    for p in dra.ap() {
        write!(out, " \"{}\"", p).unwrap();
    }
    out.push('\n');
    writeln!(out, "acc-name: Rabin {}", pairs.len()).unwrap();
    let terms: Vec<String> = (0..pairs.len())
        .map(|i| format!("Fin({}) & Inf({})", 2 * i, 2 * i + 1))
        .collect();
    let condition = if terms.len() == 1 {
        terms[0].clone()
    } else {
        terms.iter().map(|t| format!("({t})")).collect::<Vec<_>>().join(" | ")
    };
    writeln!(out, "Acceptance: {} {}", 2 * pairs.len(), condition).unwrap();
    out.push_str("properties: trans-labels explicit-labels state-acc deterministic complete\n");
    out.push_str("--BODY--\n");
    for q in 0..dra.num_states() {
        let mut marks = Vec::new();
        for (i, pair) in pairs.iter().enumerate() {
            if pair.avoid.contains(&q) {
                marks.push(2 * i);
            }
            if pair.recur.contains(&q) {
                marks.push(2 * i + 1);
            }
        }
        if marks.is_empty() {
            writeln!(out, "State: {q}").unwrap();
        } else {
            let marks: Vec<String> = marks.iter().map(|m| m.to_string()).collect();
            writeln!(out, "State: {q} {{{}}}", marks.join(" ")).unwrap();
        }
        for letter in 0..dra.num_letters() as u32 {
            let target = dra.step(q, crate::label::LabelSet(letter));
            writeln!(out, "[{}] {target}", minterm(letter, n_ap)).unwrap();
        }
    }
    out.push_str("--END--\n");
    out
}

fn minterm(letter: u32, n_ap: usize) -> String {
    if n_ap == 0 {
        return "t".into();
    }
    (0..n_ap)
        .map(|i| if letter & (1 << i) != 0 { i.to_string() } else { format!("!{i}") })
        .collect::<Vec<_>>()
        .join("&")
}

pub fn import_dra(path: impl AsRef<Path>) -> Result<Dra, HoaError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| HoaError::Io { path: path.display().to_string(), source })?;
    parse_hoa(&text)
}

#[derive(Debug, Clone)]
enum Label {
    True,
    False,
    Ap(usize),
    Not(Box<Label>),
    And(Box<Label>, Box<Label>),
    Or(Box<Label>, Box<Label>),
}

impl Label {
    fn eval(&self, letter: u32) -> bool {
        match self {
            Label::True => true,
            Label::False => false,
            Label::Ap(i) => letter & (1 << i) != 0,
            Label::Not(a) => !a.eval(letter),
            Label::And(a, b) => a.eval(letter) && b.eval(letter),
            Label::Or(a, b) => a.eval(letter) || b.eval(letter),
        }
    }

    fn max_ap(&self) -> Option<usize> {
        match self {
            Label::True | Label::False => None,
            Label::Ap(i) => Some(*i),
            Label::Not(a) => a.max_ap(),
            Label::And(a, b) | Label::Or(a, b) => a.max_ap().max(b.max_ap()),
        }
    }
}

struct LabelParser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl LabelParser {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn or(&mut self) -> Result<Label, HoaError> {
        let mut lhs = self.and()?;
        while self.peek() == Some('|') {
            self.pos += 1;
            lhs = Label::Or(Box::new(lhs), Box::new(self.and()?));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Label, HoaError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some('&') {
            self.pos += 1;
            lhs = Label::And(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Label, HoaError> {
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                Ok(Label::Not(Box::new(self.unary()?)))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.or()?;
                if self.peek() != Some(')') {
                    return Err(parse_err(self.line, "expected `)` in label"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('t') => {
                self.pos += 1;
                Ok(Label::True)
            }
            Some('f') => {
                self.pos += 1;
                Ok(Label::False)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let s: String = self.chars[start..self.pos].iter().collect();
                s.parse()
                    .map(Label::Ap)
                    .map_err(|_| parse_err(self.line, format!("bad AP index `{s}`")))
            }
            Some(c) => Err(parse_err(self.line, format!("unexpected `{c}` in label"))),
            None => Err(parse_err(self.line, "unterminated label")),
        }
    }
}

fn parse_label(text: &str, line: usize) -> Result<Label, HoaError> {
    let mut p = LabelParser { chars: text.chars().collect(), pos: 0, line };
    let label = p.or()?;
    if p.peek().is_some() {
        return Err(parse_err(line, format!("trailing input in label `{text}`")));
    }
    Ok(label)
}

fn parse_usize(s: &str, line: usize, what: &str) -> Result<usize, HoaError> {
    s.parse().map_err(|_| parse_err(line, format!("expected {what}, found `{s}`")))
}

/// Splits a header value into whitespace-separated tokens, keeping quoted
/// strings intact (without their quotes).
fn header_tokens(value: &str, line: usize) -> Result<Vec<String>, HoaError> {
    let mut out = Vec::new();
    let mut chars = value.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    Some('"') => break,
                    Some('\\') => s.extend(chars.next()),
                    Some(ch) => s.push(ch),
                    None => return Err(parse_err(line, "unterminated string")),
                }
            }
            out.push(s);
        } else {
            let mut s = String::new();
            while let Some(&ch) = chars.peek() {
                if ch.is_whitespace() {
                    break;
                }
                s.push(ch);
                chars.next();
            }
            out.push(s);
        }
    }
    Ok(out)
}

/// Parses the acceptance formula into `(fin, inf)` set pairs.
fn parse_rabin(condition: &str) -> Result<Vec<(Option<usize>, usize)>, HoaError> {
    let non_rabin = || HoaError::NonRabin(condition.trim().to_string());
    let mut pairs = Vec::new();
    for disjunct in condition.split('|') {
        let term = disjunct.trim();
        let term = term
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .unwrap_or(term);
        let mut fin = None;
        let mut inf = None;
        for atom in term.split('&') {
            let atom = atom.trim();
            let (slot, rest) = if let Some(r) = atom.strip_prefix("Fin(") {
                (&mut fin, r)
            } else if let Some(r) = atom.strip_prefix("Inf(") {
                (&mut inf, r)
            } else {
                return Err(non_rabin());
            };
            let id = rest
                .strip_suffix(')')
                .and_then(|s| s.trim().parse::<usize>().ok())
                .ok_or_else(non_rabin)?;
            if slot.replace(id).is_some() {
                return Err(non_rabin());
            }
        }
        match inf {
            Some(i) => pairs.push((fin, i)),
            None => return Err(non_rabin()),
        }
    }
    Ok(pairs)
}

/// Parses an automaton from HOA text.
pub fn parse_hoa(text: &str) -> Result<Dra, HoaError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut n_states = None;
    let mut start = None;
    let mut ap: Option<Vec<String>> = None;
    let mut acceptance = None;
    let mut seen_version = false;
    let mut body_line = 0;
    for (no, line) in lines.by_ref() {
        if line.is_empty() {
            continue;
        }
        if line == "--BODY--" {
            body_line = no;
            break;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| parse_err(no, format!("expected a header item, found `{line}`")))?;
        let value = value.trim();
        match key.trim() {
            "HOA" => {
                if value != "v1" {
                    return Err(parse_err(no, format!("unsupported version `{value}`")));
                }
                seen_version = true;
            }
            _ if !seen_version => return Err(parse_err(no, "file must start with `HOA: v1`")),
            "States" => n_states = Some(parse_usize(value, no, "a state count")?),
            "Start" => {
                if start.is_some() {
                    return Err(parse_err(no, "several start states"));
                }
                if value.contains('&') {
                    return Err(parse_err(no, "alternating start states are not supported"));
                }
                start = Some(parse_usize(value, no, "a start state")?);
            }
            "AP" => {
                let tokens = header_tokens(value, no)?;
                let (count, names) = tokens
                    .split_first()
                    .ok_or_else(|| parse_err(no, "missing AP count"))?;
                let count = parse_usize(count, no, "an AP count")?;
                if names.len() != count {
                    return Err(parse_err(
                        no,
                        format!("AP count {count} does not match {} names", names.len()),
                    ));
                }
                if count > MAX_DRA_PROPOSITIONS {
                    return Err(DraError::TooManyPropositions(count).into());
                }
                ap = Some(names.to_vec());
            }
            "Acceptance" => {
                let (count, condition) = value
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| HoaError::NonRabin(value.to_string()))?;
                let count = parse_usize(count, no, "an acceptance set count")?;
                acceptance = Some((count, parse_rabin(condition)?));
            }
            "properties" => {
                let props = header_tokens(value, no)?;
                if props.iter().any(|p| p == "trans-acc") {
                    return Err(HoaError::TransitionAcceptance { line: no });
                }
            }
            _ => {}
        }
    }
    if !seen_version {
        return Err(parse_err(1, "file must start with `HOA: v1`"));
    }
    if body_line == 0 {
        return Err(parse_err(text.lines().count(), "missing `--BODY--`"));
    }
    let n_states = n_states.ok_or_else(|| parse_err(body_line, "missing `States:` header"))?;
    let start = start.ok_or_else(|| parse_err(body_line, "missing `Start:` header"))?;
    let ap = ap.unwrap_or_default();
    let (n_sets, rabin) =
        acceptance.ok_or_else(|| parse_err(body_line, "missing `Acceptance:` header"))?;
    if rabin.iter().any(|(f, i)| *i >= n_sets || f.is_some_and(|f| f >= n_sets)) {
        return Err(HoaError::NonRabin(format!("set index exceeds declared count {n_sets}")));
    }

    let letters = 1u32 << ap.len();
    let mut targets: Vec<Vec<Option<usize>>> = vec![vec![None; letters as usize]; n_states];
    let mut marks: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n_states];
    let mut current: Option<usize> = None;
    let mut declared = vec![false; n_states];
    let mut ended = false;
    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        if ended {
            return Err(parse_err(no, "content after `--END--`"));
        }
        if line == "--END--" {
            ended = true;
            continue;
        }
        if let Some(rest) = line.strip_prefix("State:") {
            let rest = rest.trim();
            let (id_text, tail) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
            let id = parse_usize(id_text, no, "a state id")?;
            if id >= n_states {
                return Err(parse_err(no, format!("state {id} out of range")));
            }
            if std::mem::replace(&mut declared[id], true) {
                return Err(parse_err(no, format!("state {id} declared twice")));
            }
            let mut tail = tail.trim();
            if tail.starts_with('"') {
                let close = tail[1..]
                    .find('"')
                    .ok_or_else(|| parse_err(no, "unterminated state name"))?;
                tail = tail[close + 2..].trim();
            }
            if let Some(inner) = tail.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
                for m in inner.split_whitespace() {
                    let m = parse_usize(m, no, "an acceptance set")?;
                    if m >= n_sets {
                        return Err(parse_err(no, format!("acceptance set {m} not declared")));
                    }
                    marks[id].insert(m);
                }
            } else if !tail.is_empty() {
                return Err(parse_err(no, format!("unexpected `{tail}` after state id")));
            }
            current = Some(id);
            continue;
        }
        let state = current.ok_or_else(|| parse_err(no, "edge before any `State:`"))?;
        let body = line
            .strip_prefix('[')
            .ok_or_else(|| parse_err(no, "implicit edge labels are not supported"))?;
        let (label_text, rest) = body
            .split_once(']')
            .ok_or_else(|| parse_err(no, "unterminated edge label"))?;
        let rest = rest.trim();
        if rest.contains('{') {
            return Err(HoaError::TransitionAcceptance { line: no });
        }
        if rest.contains('&') {
            return Err(parse_err(no, "alternating edges are not supported"));
        }
        let target = parse_usize(rest, no, "a target state")?;
        if target >= n_states {
            return Err(parse_err(no, format!("target {target} out of range")));
        }
        let label = parse_label(label_text, no)?;
        if label.max_ap().is_some_and(|i| i >= ap.len()) {
            return Err(parse_err(no, "label references an undeclared AP"));
        }
        for letter in 0..letters {
            if label.eval(letter) {
                let slot = &mut targets[state][letter as usize];
                if slot.is_some() {
                    return Err(HoaError::NonDeterministic { state, letter });
                }
                *slot = Some(target);
            }
        }
    }
    if !ended {
        return Err(parse_err(text.lines().count(), "missing `--END--`"));
    }

    let mut delta = Vec::with_capacity(n_states * letters as usize);
    for (state, row) in targets.iter().enumerate() {
        for (letter, t) in row.iter().enumerate() {
            delta.push(t.ok_or(HoaError::Incomplete { state, letter: letter as u32 })?);
        }
    }
    let mut set_members: HashMap<usize, BTreeSet<usize>> = HashMap::new();
    for (q, ms) in marks.iter().enumerate() {
        for &m in ms {
            set_members.entry(m).or_default().insert(q);
        }
    }
    let pairs = rabin
        .iter()
        .map(|&(fin, inf)| RabinPair {
            avoid: fin.and_then(|f| set_members.get(&f).cloned()).unwrap_or_default(),
            recur: set_members.get(&inf).cloned().unwrap_or_default(),
        })
        .collect();
    Ok(Dra::new(ap, n_states, start, delta, pairs)?)
}
