use std::collections::HashMap;

use super::{negate, AigCircuit, AndGate, Latch, Lit, FALSE, TRUE};

/// Incremental AIG construction with structural hashing and constant folding.
///
/// Variables are allocated in creation order, so gates are emitted in
/// topological order by construction.
#[derive(Debug, Default)]
pub struct AigBuilder {
    next_var: u32,
    inputs: Vec<(Lit, Option<String>)>,
    latches: Vec<(Lit, Option<Lit>, Option<String>)>,
    outputs: Vec<(Lit, Option<String>)>,
    ands: Vec<AndGate>,
    strash: HashMap<(Lit, Lit), Lit>,
}

impl AigBuilder {
    pub fn new() -> Self {
        AigBuilder {
            next_var: 1,
            ..Default::default()
        }
    }

    fn fresh(&mut self) -> Lit {
        let lit = self.next_var * 2;
        self.next_var += 1;
        lit
    }

    pub fn input(&mut self, name: Option<String>) -> Lit {
        let lit = self.fresh();
        self.inputs.push((lit, name));
        lit
    }

    /// Declares a latch; its next-state function is set later with `set_next`.
    pub fn latch(&mut self, name: Option<String>) -> Lit {
        let lit = self.fresh();
        self.latches.push((lit, None, name));
        lit
    }

    pub fn set_next(&mut self, latch: Lit, next: Lit) {
        let slot = self
            .latches
            .iter_mut()
            .find(|(l, _, _)| *l == latch)
            .expect("set_next on an undeclared latch");
        slot.1 = Some(next);
    }

    pub fn output(&mut self, lit: Lit, name: Option<String>) {
        self.outputs.push((lit, name));
    }

    pub fn and(&mut self, a: Lit, b: Lit) -> Lit {
        if a == FALSE || b == FALSE || a == negate(b) {
            return FALSE;
        }
        if a == TRUE || a == b {
            return b;
        }
        if b == TRUE {
            return a;
        }
        let key = (a.min(b), a.max(b));
        if let Some(&lit) = self.strash.get(&key) {
            return lit;
        }
        let lhs = self.fresh();
        self.ands.push(AndGate {
            lhs,
            rhs0: key.1,
            rhs1: key.0,
        });
        self.strash.insert(key, lhs);
        lhs
    }

    pub fn or(&mut self, a: Lit, b: Lit) -> Lit {
        let n = self.and(negate(a), negate(b));
        negate(n)
    }

    /// `sel ? hi : lo`
    pub fn mux(&mut self, sel: Lit, hi: Lit, lo: Lit) -> Lit {
        if hi == lo {
            return hi;
        }
        if hi == TRUE && lo == FALSE {
            return sel;
        }
        if hi == FALSE && lo == TRUE {
            return negate(sel);
        }
        let t = self.and(sel, hi);
        let e = self.and(negate(sel), lo);
        self.or(t, e)
    }

    pub fn num_ands(&self) -> usize {
        self.ands.len()
    }

    pub fn finish(self) -> AigCircuit {
        let (inputs, input_names) = self.inputs.into_iter().unzip();
        let mut latches = Vec::new();
        let mut latch_names = Vec::new();
        for (lit, next, name) in self.latches {
            latches.push(Latch {
                lit,
                next: next.unwrap_or(FALSE),
            });
            latch_names.push(name);
        }
        let (outputs, output_names) = self.outputs.into_iter().unzip();
        AigCircuit {
            max_var: self.next_var - 1,
            inputs,
            latches,
            outputs,
            ands: self.ands,
            input_names,
            latch_names,
            output_names,
            comments: Vec::new(),
        }
    }
}
