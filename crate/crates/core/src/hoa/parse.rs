use super::{Acceptance, AcceptanceKind, Guard, HoaError, Order, ParityAutomaton, Polarity, Transition};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Header(String),
    Ident(String),
    Int(u64),
    Str(String),
    Body,
    End,
    Punct(char),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> HoaError {
    HoaError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, HoaError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };

    while i < chars.len() {
        let c = chars[i];
        let (sl, sc) = (line, col);
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            // comments nest in HOA
            let mut depth = 0usize;
            loop {
                if i >= chars.len() {
                    return Err(syntax(sl, sc, "unterminated comment"));
                }
                if chars[i] == '/' && chars.get(i + 1) == Some(&'*') {
                    depth += 1;
                    advance(&mut i, &mut line, &mut col, '/');
                    advance(&mut i, &mut line, &mut col, '*');
                } else if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    depth -= 1;
                    advance(&mut i, &mut line, &mut col, '*');
                    advance(&mut i, &mut line, &mut col, '/');
                    if depth == 0 {
                        break;
                    }
                } else {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            continue;
        }
        if c == '"' {
            advance(&mut i, &mut line, &mut col, c);
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err(syntax(sl, sc, "unterminated string")),
                    Some('"') => {
                        advance(&mut i, &mut line, &mut col, '"');
                        break;
                    }
                    Some('\\') => {
                        advance(&mut i, &mut line, &mut col, '\\');
                        let esc = *chars.get(i).ok_or_else(|| syntax(sl, sc, "unterminated string"))?;
                        s.push(esc);
                        advance(&mut i, &mut line, &mut col, esc);
                    }
                    Some(&ch) => {
                        s.push(ch);
                        advance(&mut i, &mut line, &mut col, ch);
                    }
                }
            }
            out.push(Spanned {
                tok: Tok::Str(s),
                line: sl,
                column: sc,
            });
            continue;
        }
        if c == '-' {
            let rest: String = chars[i..chars.len().min(i + 8)].iter().collect();
            let (tok, len) = if rest.starts_with("--BODY--") {
                (Tok::Body, 8)
            } else if rest.starts_with("--END--") {
                (Tok::End, 7)
            } else if rest.starts_with("--ABORT--") {
                return Err(syntax(sl, sc, "automaton aborted"));
            } else {
                return Err(syntax(sl, sc, "unexpected '-'"));
            };
            for _ in 0..len {
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            out.push(Spanned {
                tok,
                line: sl,
                column: sc,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut n: u64 = 0;
            while let Some(d) = chars.get(i).and_then(|d| d.to_digit(10)) {
                n = n
                    .checked_mul(10)
                    .and_then(|n| n.checked_add(u64::from(d)))
                    .ok_or_else(|| syntax(sl, sc, "integer overflow"))?;
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            out.push(Spanned {
                tok: Tok::Int(n),
                line: sl,
                column: sc,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&ch) = chars.get(i) {
                if ch.is_ascii_alphanumeric() || ch == '_' || ch == '-' {
                    s.push(ch);
                    advance(&mut i, &mut line, &mut col, ch);
                } else {
                    break;
                }
            }
            if chars.get(i) == Some(&':') {
                advance(&mut i, &mut line, &mut col, ':');
                out.push(Spanned {
                    tok: Tok::Header(s),
                    line: sl,
                    column: sc,
                });
            } else {
                out.push(Spanned {
                    tok: Tok::Ident(s),
                    line: sl,
                    column: sc,
                });
            }
            continue;
        }
        if "[]{}()!&|@".contains(c) {
            advance(&mut i, &mut line, &mut col, c);
            out.push(Spanned {
                tok: Tok::Punct(c),
                line: sl,
                column: sc,
            });
            continue;
        }
        return Err(syntax(sl, sc, format!("unexpected character {c:?}")));
    }
    Ok(out)
}

/// Acceptance formula over mark sets.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum AccFormula {
    True,
    False,
    Inf(u64),
    Fin(u64),
    And(Vec<AccFormula>),
    Or(Vec<AccFormula>),
}

impl AccFormula {
    /// Flattens nested conjunctions/disjunctions and sorts operands, so that
    /// formulas equal up to associativity and commutativity compare equal.
    fn canonical(self) -> AccFormula {
        fn collect(f: AccFormula, conj: bool, out: &mut Vec<AccFormula>) {
            match f {
                AccFormula::And(xs) if conj => xs.into_iter().for_each(|x| collect(x, conj, out)),
                AccFormula::Or(xs) if !conj => xs.into_iter().for_each(|x| collect(x, conj, out)),
                other => out.push(other.canonical()),
            }
        }
        match self {
            AccFormula::And(xs) => {
                let mut out = Vec::new();
                xs.into_iter().for_each(|x| collect(x, true, &mut out));
                out.sort();
                if out.len() == 1 {
                    out.pop().unwrap()
                } else {
                    AccFormula::And(out)
                }
            }
            AccFormula::Or(xs) => {
                let mut out = Vec::new();
                xs.into_iter().for_each(|x| collect(x, false, &mut out));
                out.sort();
                if out.len() == 1 {
                    out.pop().unwrap()
                } else {
                    AccFormula::Or(out)
                }
            }
            other => other,
        }
    }
}

/// The formula HOA associates with `parity <order> <polarity> <n>`.
fn parity_formula(order: Order, polarity: Polarity, n: u64) -> AccFormula {
    if n == 0 {
        return if polarity == Polarity::Even {
            AccFormula::True
        } else {
            AccFormula::False
        };
    }
    let colors: Vec<u64> = match order {
        Order::Min => (0..n).collect(),
        Order::Max => (0..n).rev().collect(),
    };
    let accepting = |c: u64| c.is_multiple_of(2) == (polarity == Polarity::Even);
    let mut formula: Option<AccFormula> = None;
    for &c in colors.iter().rev() {
        let atom = if accepting(c) {
            AccFormula::Inf(c)
        } else {
            AccFormula::Fin(c)
        };
        formula = Some(match formula {
            None => atom,
            Some(inner) if accepting(c) => AccFormula::Or(vec![atom, inner]),
            Some(inner) => AccFormula::And(vec![atom, inner]),
        });
    }
    formula.unwrap()
}

/// Header-declared acceptance before transitions are read.
#[derive(Clone, Copy, Debug)]
enum Declared {
    Buchi,
    CoBuchi,
    Parity(Order, Polarity, u64),
    All,
    None,
}

fn recognize(formula: &AccFormula, sets: u64) -> Option<Declared> {
    let f = formula.clone().canonical();
    match (&f, sets) {
        (AccFormula::True, 0) => return Some(Declared::All),
        (AccFormula::False, 0) => return Some(Declared::None),
        (AccFormula::Inf(0), 1) => return Some(Declared::Buchi),
        (AccFormula::Fin(0), 1) => return Some(Declared::CoBuchi),
        _ => {}
    }
    for order in [Order::Min, Order::Max] {
        for polarity in [Polarity::Even, Polarity::Odd] {
            if parity_formula(order, polarity, sets).canonical() == f {
                return Some(Declared::Parity(order, polarity, sets));
            }
        }
    }
    None
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|s| (s.line, s.column)).unwrap_or(self.eof)
    }

    fn err(&self, msg: impl Into<String>) -> HoaError {
        let (l, c) = self.here();
        syntax(l, c, msg)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn int(&mut self) -> Result<u64, HoaError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.err("expected integer")),
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<(), HoaError> {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{c}'")))
        }
    }

    fn at_header_or_body(&self) -> bool {
        matches!(self.peek(), None | Some(Tok::Header(_)) | Some(Tok::Body))
    }

    // acceptance formula: disjunction of conjunctions of atoms
    fn acc_or(&mut self) -> Result<AccFormula, HoaError> {
        let mut xs = vec![self.acc_and()?];
        while self.peek() == Some(&Tok::Punct('|')) {
            self.pos += 1;
            xs.push(self.acc_and()?);
        }
        Ok(if xs.len() == 1 {
            xs.pop().unwrap()
        } else {
            AccFormula::Or(xs)
        })
    }

    fn acc_and(&mut self) -> Result<AccFormula, HoaError> {
        let mut xs = vec![self.acc_atom()?];
        while self.peek() == Some(&Tok::Punct('&')) {
            self.pos += 1;
            xs.push(self.acc_atom()?);
        }
        Ok(if xs.len() == 1 {
            xs.pop().unwrap()
        } else {
            AccFormula::And(xs)
        })
    }

    fn acc_atom(&mut self) -> Result<AccFormula, HoaError> {
        match self.next() {
            Some(Tok::Ident(s)) if s == "t" => Ok(AccFormula::True),
            Some(Tok::Ident(s)) if s == "f" => Ok(AccFormula::False),
            Some(Tok::Ident(s)) if s == "Inf" || s == "Fin" => {
                self.expect_punct('(')?;
                if self.peek() == Some(&Tok::Punct('!')) {
                    return Err(HoaError::UnsupportedAcceptance("complemented acceptance sets".into()));
                }
                let k = self.int()?;
                self.expect_punct(')')?;
                Ok(if s == "Inf" {
                    AccFormula::Inf(k)
                } else {
                    AccFormula::Fin(k)
                })
            }
            Some(Tok::Punct('(')) => {
                let f = self.acc_or()?;
                self.expect_punct(')')?;
                Ok(f)
            }
            _ => {
                self.pos -= 1;
                Err(self.err("malformed acceptance formula"))
            }
        }
    }

    // label expressions
    fn label_or(&mut self, aps: usize) -> Result<Guard, HoaError> {
        let mut g = self.label_and(aps)?;
        while self.peek() == Some(&Tok::Punct('|')) {
            self.pos += 1;
            g = g.or(&self.label_and(aps)?);
        }
        Ok(g)
    }

    fn label_and(&mut self, aps: usize) -> Result<Guard, HoaError> {
        let mut g = self.label_not(aps)?;
        while self.peek() == Some(&Tok::Punct('&')) {
            self.pos += 1;
            g = g.and(&self.label_not(aps)?);
        }
        Ok(g)
    }

    fn label_not(&mut self, aps: usize) -> Result<Guard, HoaError> {
        match self.next() {
            Some(Tok::Punct('!')) => Ok(self.label_not(aps)?.not()),
            Some(Tok::Punct('(')) => {
                let g = self.label_or(aps)?;
                self.expect_punct(')')?;
                Ok(g)
            }
            Some(Tok::Ident(s)) if s == "t" => Ok(Guard::tt()),
            Some(Tok::Ident(s)) if s == "f" => Ok(Guard::ff()),
            Some(Tok::Int(k)) => {
                let k = k as usize;
                if k >= aps {
                    return Err(HoaError::UndeclaredAp {
                        index: k,
                        declared: aps,
                    });
                }
                Ok(Guard::literal(k, true))
            }
            Some(Tok::Punct('@')) => {
                self.pos -= 1;
                Err(self.err("aliases are not supported"))
            }
            _ => {
                self.pos -= 1;
                Err(self.err("malformed label expression"))
            }
        }
    }

    fn acc_sig(&mut self) -> Result<Option<Vec<u64>>, HoaError> {
        if self.peek() != Some(&Tok::Punct('{')) {
            return Ok(None);
        }
        self.pos += 1;
        let mut marks = Vec::new();
        while let Some(Tok::Int(k)) = self.peek() {
            marks.push(*k);
            self.pos += 1;
        }
        self.expect_punct('}')?;
        Ok(Some(marks))
    }
}

struct RawEdge {
    guard: Guard,
    target: usize,
    marks: Vec<u64>,
}

/// Parses an extended-HOA automaton with a `controllable-AP:` header.
///
/// Edges that carry no color in a parity automaton are given an explicit one:
/// for `min` parity they take color `n` (above every declared color); for `max`
/// parity all colors shift up by two and uncolored edges take color 1.
/// Maps the marks of one edge to its priority.
type ColorMap = Box<dyn Fn(&[u64]) -> Result<u32, String>>;

pub fn parse_ehoa(text: &str) -> Result<ParityAutomaton, HoaError> {
    let toks = lex(text)?;
    let eof = toks.last().map(|s| (s.line, s.column + 1)).unwrap_or((1, 1));
    let mut p = Parser { toks, pos: 0, eof };

    match p.next() {
        Some(Tok::Header(h)) if h == "HOA" => {}
        _ => {
            p.pos = 0;
            return Err(p.err("expected 'HOA:' header"));
        }
    }
    match p.next() {
        Some(Tok::Ident(v)) if v == "v1" => {}
        _ => {
            p.pos -= 1;
            return Err(p.err("expected version v1"));
        }
    }

    let mut num_states: Option<usize> = None;
    let mut start: Option<usize> = None;
    let mut aps: Option<Vec<String>> = None;
    let mut controllable: Option<Vec<usize>> = None;
    let mut acc_formula: Option<(u64, AccFormula)> = None;
    let mut acc_name: Option<(String, Vec<Tok>)> = None;
    let mut name = None;

    loop {
        let header = match p.peek() {
            Some(Tok::Body) => {
                p.pos += 1;
                break;
            }
            Some(Tok::Header(h)) => h.clone(),
            _ => return Err(p.err("expected header or --BODY--")),
        };
        p.pos += 1;
        match header.as_str() {
            "States" => num_states = Some(p.int()? as usize),
            "Start" => {
                if start.is_some() {
                    return Err(p.err("multiple initial states are not supported"));
                }
                start = Some(p.int()? as usize);
                if p.peek() == Some(&Tok::Punct('&')) {
                    return Err(p.err("alternating initial states are not supported"));
                }
            }
            "AP" => {
                let n = p.int()? as usize;
                if n > 64 {
                    return Err(p.err("at most 64 APs are supported"));
                }
                let mut names = Vec::with_capacity(n);
                for _ in 0..n {
                    match p.next() {
                        Some(Tok::Str(s)) => names.push(s),
                        _ => {
                            p.pos -= 1;
                            return Err(p.err("expected AP name string"));
                        }
                    }
                }
                aps = Some(names);
            }
            "controllable-AP" => {
                let mut cs = Vec::new();
                while let Some(Tok::Int(k)) = p.peek() {
                    cs.push(*k as usize);
                    p.pos += 1;
                }
                controllable = Some(cs);
            }
            "Acceptance" => {
                let n = p.int()?;
                let f = p.acc_or()?;
                acc_formula = Some((n, f));
            }
            "acc-name" => {
                let id = match p.next() {
                    Some(Tok::Ident(s)) => s,
                    _ => {
                        p.pos -= 1;
                        return Err(p.err("expected acceptance name"));
                    }
                };
                let mut params = Vec::new();
                while matches!(p.peek(), Some(Tok::Ident(_)) | Some(Tok::Int(_))) {
                    params.push(p.next().unwrap());
                }
                acc_name = Some((id, params));
            }
            "name" => {
                if let Some(Tok::Str(s)) = p.peek() {
                    name = Some(s.clone());
                    p.pos += 1;
                }
            }
            _ => {
                // tool:, properties:, and unknown headers are skipped
                while !p.at_header_or_body() {
                    p.pos += 1;
                }
            }
        }
    }

    let start = start.ok_or(HoaError::MissingStart)?;
    let aps = aps.unwrap_or_default();
    let controllable = controllable.unwrap_or_default();
    for &c in &controllable {
        if c >= aps.len() {
            return Err(HoaError::UndeclaredAp {
                index: c,
                declared: aps.len(),
            });
        }
    }
    let (sets, formula) =
        acc_formula.ok_or_else(|| HoaError::UnsupportedAcceptance("missing Acceptance header".into()))?;

    let declared = match &acc_name {
        Some((id, params)) => {
            let from_name = declared_from_name(id, params)?;
            if recognize(&formula, sets).is_none() {
                return Err(HoaError::UnsupportedAcceptance(format!(
                    "acc-name {id} does not match the acceptance formula"
                )));
            }
            from_name
        }
        None => recognize(&formula, sets).ok_or_else(|| {
            HoaError::UnsupportedAcceptance(format!(
                "acceptance formula with {sets} sets is not Büchi, co-Büchi or parity"
            ))
        })?,
    };

    // body
    let mut edges: Vec<Option<Vec<RawEdge>>> = Vec::new();
    loop {
        match p.next() {
            Some(Tok::End) => break,
            Some(Tok::Header(h)) if h == "State" => {}
            None => return Err(p.err("missing --END--")),
            _ => {
                p.pos -= 1;
                return Err(p.err("expected 'State:' or --END--"));
            }
        }
        if p.peek() == Some(&Tok::Punct('[')) {
            return Err(p.err("state labels are not supported"));
        }
        let q = p.int()? as usize;
        if let Some(Tok::Str(_)) = p.peek() {
            p.pos += 1;
        }
        let state_marks = p.acc_sig()?;
        if edges.len() <= q {
            edges.resize_with(q + 1, || None);
        }
        if edges[q].is_some() {
            return Err(p.err(format!("state {q} defined twice")));
        }
        let mut out = Vec::new();
        while p.peek() == Some(&Tok::Punct('[')) {
            p.pos += 1;
            let guard = p.label_or(aps.len())?;
            p.expect_punct(']')?;
            let target = p.int()? as usize;
            if p.peek() == Some(&Tok::Punct('&')) {
                return Err(p.err("alternating transitions are not supported"));
            }
            let edge_marks = p.acc_sig()?;
            let marks = match (edge_marks, &state_marks) {
                (Some(m), _) => m,
                (None, Some(m)) => m.clone(),
                (None, None) => Vec::new(),
            };
            if let Some(&m) = marks.iter().find(|&&m| m >= sets.max(1)) {
                return Err(p.err(format!("acceptance set {m} not declared")));
            }
            out.push(RawEdge { guard, target, marks });
        }
        if matches!(p.peek(), Some(Tok::Int(_))) {
            return Err(p.err("implicit labels are not supported"));
        }
        edges[q] = Some(out);
    }

    let n = num_states.unwrap_or(edges.len()).max(edges.len());
    if start >= n {
        return Err(HoaError::Invalid(format!("start state {start} out of range")));
    }
    edges.resize_with(n, || None);

    let any_uncolored = edges.iter().flatten().flatten().any(|e| e.marks.is_empty());
    let (acceptance, color_of): (Acceptance, ColorMap) = match declared {
        Declared::Buchi => (
            Acceptance {
                kind: AcceptanceKind::Buchi,
                colors: 2,
            },
            Box::new(|m: &[u64]| Ok(if m.contains(&0) { 0 } else { 1 })),
        ),
        Declared::CoBuchi => (
            Acceptance {
                kind: AcceptanceKind::CoBuchi,
                colors: 2,
            },
            Box::new(|m: &[u64]| Ok(if m.contains(&0) { 0 } else { 1 })),
        ),
        Declared::All => (Acceptance::min_even(1), Box::new(|_: &[u64]| Ok(0))),
        Declared::None => (Acceptance::min_even(2), Box::new(|_: &[u64]| Ok(1))),
        Declared::Parity(order, polarity, sets) => {
            let kind = AcceptanceKind::Parity(order, polarity);
            let single = |m: &[u64]| -> Result<Option<u32>, String> {
                match m {
                    [] => Ok(None),
                    [c] => Ok(Some(*c as u32)),
                    _ => Err("parity transitions carry at most one color".to_string()),
                }
            };
            match order {
                Order::Min => (
                    Acceptance {
                        kind,
                        colors: sets as u32 + u32::from(any_uncolored),
                    },
                    Box::new(move |m: &[u64]| Ok(single(m)?.unwrap_or(sets as u32))),
                ),
                Order::Max if any_uncolored => (
                    Acceptance {
                        kind,
                        colors: sets as u32 + 2,
                    },
                    Box::new(move |m: &[u64]| Ok(single(m)?.map_or(1, |c| c + 2))),
                ),
                Order::Max => (
                    Acceptance {
                        kind,
                        colors: (sets as u32).max(1),
                    },
                    Box::new(move |m: &[u64]| Ok(single(m)?.unwrap_or(0))),
                ),
            }
        }
    };

    let mut transitions = Vec::with_capacity(n);
    for (q, raw) in edges.into_iter().enumerate() {
        let mut ts = Vec::new();
        for e in raw.unwrap_or_default() {
            if e.target >= n {
                return Err(HoaError::Invalid(format!(
                    "state {q} has a transition to unknown state {}",
                    e.target
                )));
            }
            let priority = color_of(&e.marks).map_err(HoaError::Invalid)?;
            if e.guard.is_false() {
                continue;
            }
            ts.push(Transition {
                guard: e.guard,
                target: e.target,
                priority,
            });
        }
        transitions.push(ts);
    }

    let mut aut = ParityAutomaton {
        name,
        initial: start,
        aps,
        controllable,
        transitions,
        acceptance,
        normalized: false,
    };
    aut.validate()?;
    aut.normalized = aut.acceptance.kind == Acceptance::MIN_EVEN
        && aut.num_aps() <= super::EXPANSION_AP_CAP
        && aut.is_deterministic_and_complete();
    Ok(aut)
}

fn declared_from_name(id: &str, params: &[Tok]) -> Result<Declared, HoaError> {
    match id {
        "Buchi" => Ok(Declared::Buchi),
        "co-Buchi" => Ok(Declared::CoBuchi),
        "all" => Ok(Declared::All),
        "none" => Ok(Declared::None),
        "parity" => {
            let bad = || HoaError::UnsupportedAcceptance("malformed parity acc-name".into());
            let order = match params.first() {
                Some(Tok::Ident(s)) if s == "min" => Order::Min,
                Some(Tok::Ident(s)) if s == "max" => Order::Max,
                _ => return Err(bad()),
            };
            let polarity = match params.get(1) {
                Some(Tok::Ident(s)) if s == "even" => Polarity::Even,
                Some(Tok::Ident(s)) if s == "odd" => Polarity::Odd,
                _ => return Err(bad()),
            };
            let n = match params.get(2) {
                Some(Tok::Int(n)) => *n,
                _ => return Err(bad()),
            };
            Ok(Declared::Parity(order, polarity, n))
        }
        other => Err(HoaError::UnsupportedAcceptance(other.to_string())),
    }
}
