use std::fmt::Write;

use super::{AcceptanceKind, Order, ParityAutomaton, Polarity};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn parity_formula_text(order: Order, polarity: Polarity, n: u32) -> String {
    if n == 0 {
        return if polarity == Polarity::Even {
            "t".into()
        } else {
            "f".into()
        };
    }
    let colors: Vec<u32> = match order {
        Order::Min => (0..n).collect(),
        Order::Max => (0..n).rev().collect(),
    };
    let accepting = |c: u32| c.is_multiple_of(2) == (polarity == Polarity::Even);
    let mut text = String::new();
    for (i, &c) in colors.iter().enumerate().rev() {
        let atom = if accepting(c) {
            format!("Inf({c})")
        } else {
            format!("Fin({c})")
        };
        text = if i + 1 == colors.len() {
            atom
        } else if accepting(c) {
            format!("{atom} | ({text})")
        } else {
            format!("{atom} & ({text})")
        };
    }
    text
}

/// Prints the automaton as extended HOA with explicit transition labels and
/// transition-based acceptance.
pub fn print_ehoa(aut: &ParityAutomaton) -> String {
    let mut s = String::new();
    s.push_str("HOA: v1\n");
    if let Some(name) = &aut.name {
        let _ = writeln!(s, "name: {}", quote(name));
    }
    let _ = writeln!(s, "States: {}", aut.num_states());
    let _ = writeln!(s, "Start: {}", aut.initial);
    s.push_str(&format!("AP: {}", aut.aps.len()));
    for ap in &aut.aps {
        s.push(' ');
        s.push_str(&quote(ap));
    }
    s.push('\n');
    s.push_str("controllable-AP:");
    for c in &aut.controllable {
        let _ = write!(s, " {c}");
    }
    s.push('\n');
    let colors = aut.acceptance.colors;
    match aut.acceptance.kind {
        AcceptanceKind::Buchi => s.push_str("acc-name: Buchi\nAcceptance: 1 Inf(0)\n"),
        AcceptanceKind::CoBuchi => s.push_str("acc-name: co-Buchi\nAcceptance: 1 Fin(0)\n"),
        AcceptanceKind::Parity(order, polarity) => {
            let o = if order == Order::Min { "min" } else { "max" };
            let p = if polarity == Polarity::Even { "even" } else { "odd" };
            let _ = writeln!(s, "acc-name: parity {o} {p} {colors}");
            let _ = writeln!(
                s,
                "Acceptance: {colors} {}",
                parity_formula_text(order, polarity, colors)
            );
        }
    }
    s.push_str("properties: trans-labels explicit-labels trans-acc\n");
    s.push_str("--BODY--\n");
    let marked = |p: u32| match aut.acceptance.kind {
        AcceptanceKind::Buchi | AcceptanceKind::CoBuchi => {
            if p == 0 {
                " {0}".to_string()
            } else {
                String::new()
            }
        }
        AcceptanceKind::Parity(..) => format!(" {{{p}}}"),
    };
    for (q, edges) in aut.transitions.iter().enumerate() {
        let _ = writeln!(s, "State: {q}");
        for t in edges {
            let _ = writeln!(s, "[{}] {}{}", t.guard, t.target, marked(t.priority));
        }
    }
    s.push_str("--END--\n");
    s
}
