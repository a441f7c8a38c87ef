use std::fmt::Write;

use super::{var_of, AigCircuit, AigerError, AndGate, Latch, Lit};

fn syntax(line: usize, message: impl Into<String>) -> AigerError {
    AigerError::Syntax {
        line,
        message: message.into(),
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str), AigerError> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok((i + 1, l.trim_end_matches('\r')))
            }
            None => Err(syntax(
                self.last + 1,
                format!("unexpected end of file, expected {what}"),
            )),
        }
    }
}

fn numbers(line: usize, text: &str, count: usize, what: &str) -> Result<Vec<u32>, AigerError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != count {
        return Err(syntax(
            line,
            format!("{what} line needs {count} fields, found {}", fields.len()),
        ));
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<u32>()
                .map_err(|_| syntax(line, format!("invalid number {f:?}")))
        })
        .collect()
}

/// Parses ASCII AIGER (`aag`). Latches must reset to 0; AND gates are reordered
/// topologically.
pub fn parse_aag(text: &str) -> Result<AigCircuit, AigerError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (ln, header) = lines.next("header")?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    match fields.first() {
        Some(&"aag") => {}
        Some(&"aig") => return Err(AigerError::BinaryUnsupported),
        _ => return Err(syntax(ln, "expected 'aag' header")),
    }
    if fields.len() < 6 {
        return Err(syntax(ln, "header needs 'aag M I L O A'"));
    }
    let nums: Vec<u32> = fields[1..]
        .iter()
        .map(|f| {
            f.parse::<u32>()
                .map_err(|_| syntax(ln, format!("invalid number {f:?}")))
        })
        .collect::<Result<_, _>>()?;
    if nums[5..].iter().any(|&n| n != 0) {
        return Err(syntax(ln, "bad/constraint/justice/fairness sections are not supported"));
    }
    let (max_var, ni, nl, no, na) = (nums[0], nums[1], nums[2], nums[3], nums[4]);
    if u64::from(ni) + u64::from(nl) + u64::from(na) > u64::from(max_var) {
        return Err(syntax(ln, "M is smaller than I + L + A"));
    }

    let max_lit = 2 * max_var + 1;
    let check = |_line: usize, lit: Lit| -> Result<Lit, AigerError> {
        if lit > max_lit {
            Err(AigerError::LiteralOutOfRange { lit, max_var })
        } else {
            Ok(lit)
        }
    };
    // 0 = undefined, 1 = input, 2 = latch, 3 = and
    let mut defined = vec![0u8; max_var as usize + 1];
    let mut define = |line: usize, lit: Lit, kind: u8| -> Result<(), AigerError> {
        if lit < 2 || lit & 1 == 1 {
            return Err(syntax(line, format!("{lit} cannot be defined (constant or negated)")));
        }
        let v = var_of(lit) as usize;
        if defined[v] != 0 {
            return Err(syntax(line, format!("variable {v} defined twice")));
        }
        defined[v] = kind;
        Ok(())
    };

    let mut c = AigCircuit {
        max_var,
        ..Default::default()
    };
    for _ in 0..ni {
        let (l, t) = lines.next("input")?;
        let lit = check(l, numbers(l, t, 1, "input")?[0])?;
        define(l, lit, 1)?;
        c.inputs.push(lit);
    }
    for _ in 0..nl {
        let (l, t) = lines.next("latch")?;
        let n = t.split_whitespace().count();
        let v = numbers(l, t, n.clamp(2, 3), "latch")?;
        let lit = check(l, v[0])?;
        let next = check(l, v[1])?;
        if v.len() == 3 && v[2] != 0 {
            return Err(syntax(l, "only zero-initialised latches are supported"));
        }
        define(l, lit, 2)?;
        c.latches.push(Latch { lit, next });
    }
    let mut output_lines = Vec::new();
    for _ in 0..no {
        let (l, t) = lines.next("output")?;
        let lit = check(l, numbers(l, t, 1, "output")?[0])?;
        c.outputs.push(lit);
        output_lines.push(l);
    }
    let mut gates = Vec::with_capacity(na as usize);
    let mut gate_lines = Vec::with_capacity(na as usize);
    for _ in 0..na {
        let (l, t) = lines.next("and gate")?;
        let v = numbers(l, t, 3, "and")?;
        let g = AndGate {
            lhs: check(l, v[0])?,
            rhs0: check(l, v[1])?,
            rhs1: check(l, v[2])?,
        };
        define(l, g.lhs, 3)?;
        gates.push(g);
        gate_lines.push(l);
    }

    let used_ok = |lit: Lit| lit < 2 || defined[var_of(lit) as usize] != 0;
    for (l, latch) in c.latches.iter().enumerate() {
        if !used_ok(latch.next) {
            return Err(syntax(0, format!("latch {l} uses undefined literal {}", latch.next)));
        }
    }
    for (&o, &l) in c.outputs.iter().zip(&output_lines) {
        if !used_ok(o) {
            return Err(syntax(l, format!("output uses undefined literal {o}")));
        }
    }
    for (g, &l) in gates.iter().zip(&gate_lines) {
        if !used_ok(g.rhs0) || !used_ok(g.rhs1) {
            return Err(syntax(l, "and gate uses undefined literal"));
        }
    }
    c.ands = topological(gates, max_var)?;

    c.input_names = vec![None; c.inputs.len()];
    c.latch_names = vec![None; c.latches.len()];
    c.output_names = vec![None; c.outputs.len()];
    let mut in_comments = false;
    while let Ok((l, t)) = lines.next("symbol") {
        if in_comments {
            c.comments.push(t.to_string());
            continue;
        }
        if t == "c" {
            in_comments = true;
            continue;
        }
        if t.is_empty() {
            continue;
        }
        let (head, name) = t.split_once(' ').ok_or_else(|| syntax(l, "malformed symbol line"))?;
        let kind = head.chars().next().unwrap();
        let idx: usize = head[1..]
            .parse()
            .map_err(|_| syntax(l, format!("malformed symbol index {head:?}")))?;
        let table = match kind {
            'i' => &mut c.input_names,
            'l' => &mut c.latch_names,
            'o' => &mut c.output_names,
            _ => return Err(syntax(l, format!("unknown symbol kind {kind:?}"))),
        };
        let slot = table
            .get_mut(idx)
            .ok_or_else(|| syntax(l, format!("symbol index {idx} out of range")))?;
        *slot = Some(name.to_string());
    }
    Ok(c)
}

/// Orders gates so every gate follows the gates defining its operands.
fn topological(gates: Vec<AndGate>, max_var: u32) -> Result<Vec<AndGate>, AigerError> {
    let mut gate_of = vec![usize::MAX; max_var as usize + 1];
    for (i, g) in gates.iter().enumerate() {
        gate_of[var_of(g.lhs) as usize] = i;
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut mark = vec![0u8; gates.len()];
    let mut order = Vec::with_capacity(gates.len());
    for root in 0..gates.len() {
        if mark[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0u8)];
        mark[root] = 1;
        while let Some(&mut (g, ref mut child)) = stack.last_mut() {
            if *child < 2 {
                let operand = if *child == 0 { gates[g].rhs0 } else { gates[g].rhs1 };
                *child += 1;
                let dep = gate_of[var_of(operand) as usize];
                if dep == usize::MAX {
                    continue;
                }
                match mark[dep] {
                    0 => {
                        mark[dep] = 1;
                        stack.push((dep, 0));
                    }
                    1 => return Err(AigerError::CombinationalCycle(var_of(gates[dep].lhs))),
                    _ => {}
                }
            } else {
                mark[g] = 2;
                order.push(gates[g]);
                stack.pop();
            }
        }
    }
    Ok(order)
}

/// Prints ASCII AIGER. The symbol section is omitted when no names are set.
pub fn print_aag(c: &AigCircuit) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "aag {} {} {} {} {}",
        c.max_var,
        c.inputs.len(),
        c.latches.len(),
        c.outputs.len(),
        c.ands.len()
    );
    for i in &c.inputs {
        let _ = writeln!(s, "{i}");
    }
    for l in &c.latches {
        let _ = writeln!(s, "{} {}", l.lit, l.next);
    }
    for o in &c.outputs {
        let _ = writeln!(s, "{o}");
    }
    for g in &c.ands {
        let _ = writeln!(s, "{} {} {}", g.lhs, g.rhs0, g.rhs1);
    }
    for (prefix, names) in [('i', &c.input_names), ('l', &c.latch_names), ('o', &c.output_names)] {
        for (k, name) in names.iter().enumerate() {
            if let Some(name) = name {
                let _ = writeln!(s, "{prefix}{k} {name}");
            }
        }
    }
    if !c.comments.is_empty() {
        s.push_str("c\n");
        for line in &c.comments {
            let _ = writeln!(s, "{line}");
        }
    }
    s
}
