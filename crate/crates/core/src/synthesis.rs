//! From winning strategies to Mealy machines to AIGER controllers.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::aiger::{AigBuilder, AigCircuit, Lit, FALSE, TRUE};
use crate::arena::{GameArena, Player, Provenance};
use crate::solver::Solution;

/// Cap on latch bits plus input bits for explicit Shannon expansion.
pub const MAX_EXPANSION_VARS: usize = 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthesisError {
    #[error("specification is unrealizable")]
    Unrealizable,
    #[error("controller needs {0} state and input bits; explicit expansion is capped at {MAX_EXPANSION_VARS}")]
    TooLarge(usize),
    #[error("arena does not come from a specification: {0}")]
    NotASpecArena(String),
}

/// Names for the controller's inputs (uncontrollable) and outputs (controllable).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IoNames {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

/// A finite-state strategy. State 0 is initial. Valuations are bit vectors
/// where bit k is the k-th input (or output) signal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MealyMachine {
    pub names: IoNames,
    /// `update[s][i]`: successor state on input valuation `i`.
    pub update: Vec<Vec<usize>>,
    /// `output[s][i]`: output valuation emitted on input valuation `i`.
    pub output: Vec<Vec<u64>>,
}

impl MealyMachine {
    pub fn num_states(&self) -> usize {
        self.update.len()
    }

    pub fn input_bits(&self) -> usize {
        self.names.inputs.len()
    }

    pub fn output_bits(&self) -> usize {
        self.names.outputs.len()
    }

    /// Output valuations along the run on `inputs` from state 0.
    pub fn run(&self, inputs: &[u64]) -> Vec<u64> {
        let mut s = 0;
        inputs
            .iter()
            .map(|&i| {
                let i = i as usize;
                let o = self.output[s][i];
                s = self.update[s][i];
                o
            })
            .collect()
    }

    /// States reachable from state 0.
    pub fn reachable(&self) -> Vec<usize> {
        let mut seen = vec![false; self.num_states()];
        let mut order = vec![0];
        seen[0] = true;
        let mut k = 0;
        while k < order.len() {
            let s = order[k];
            k += 1;
            for &t in &self.update[s] {
                if !seen[t] {
                    seen[t] = true;
                    order.push(t);
                }
            }
        }
        order
    }
}

/// Follows unary relay vertices until a round-start vertex is reached.
fn round_start(arena: &GameArena, mut v: usize) -> Result<usize, SynthesisError> {
    for _ in 0..=arena.len() {
        match arena.backmap[v] {
            Provenance::State(_) | Provenance::LatchState(_) => return Ok(v),
            Provenance::Edge { .. } => v = arena.successors(v)[0],
            other => return Err(SynthesisError::NotASpecArena(format!("strategy leads to {other:?}"))),
        }
    }
    Err(SynthesisError::NotASpecArena("relay cycle".into()))
}

/// Reads Eve's positional strategy off a specification arena as a Mealy machine
/// over the round-start vertices reachable under it.
pub fn strategy_to_mealy(
    arena: &GameArena,
    solution: &Solution,
    names: IoNames,
) -> Result<MealyMachine, SynthesisError> {
    if solution.winner[arena.initial] != Player::Eve {
        return Err(SynthesisError::Unrealizable);
    }
    if names.inputs.len() != arena.input_bits || names.outputs.len() != arena.output_bits {
        return Err(SynthesisError::NotASpecArena(
            "signal names do not match valuation widths".into(),
        ));
    }
    let inputs = 1usize << arena.input_bits;
    let mut id: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    id.insert(arena.initial, 0);
    queue.push_back(arena.initial);
    let mut update = Vec::new();
    let mut output = Vec::new();
    while let Some(adam) = queue.pop_front() {
        let choices = arena.successors(adam);
        if choices.len() != inputs {
            return Err(SynthesisError::NotASpecArena(format!(
                "round vertex {adam} has {} successors, expected {inputs}",
                choices.len()
            )));
        }
        let mut up = Vec::with_capacity(inputs);
        let mut out = Vec::with_capacity(inputs);
        for &eve in choices {
            let pick = solution.eve_strategy[eve]
                .ok_or_else(|| SynthesisError::NotASpecArena(format!("no Eve strategy at vertex {eve}")))?;
            let k = arena.successors(eve).iter().position(|&w| w == pick).unwrap();
            out.push(arena.labels[eve][k]);
            let next = round_start(arena, pick)?;
            let fresh = id.len();
            let s = *id.entry(next).or_insert_with(|| {
                queue.push_back(next);
                fresh
            });
            up.push(s);
        }
        update.push(up);
        output.push(out);
    }
    Ok(MealyMachine { names, update, output })
}

fn state_bits(states: usize) -> usize {
    if states <= 1 {
        0
    } else {
        (usize::BITS - (states - 1).leading_zeros()) as usize
    }
}

struct Expander {
    builder: AigBuilder,
    memo: HashMap<Vec<bool>, Lit>,
}

impl Expander {
    /// Builds `table` (indexed by the bits of `vars`, bit 0 lowest) by recursive
    /// Shannon expansion on the most significant variable.
    fn expand(&mut self, table: &[bool], vars: &[Lit]) -> Lit {
        if table.iter().all(|&b| !b) {
            return FALSE;
        }
        if table.iter().all(|&b| b) {
            return TRUE;
        }
        if let Some(&lit) = self.memo.get(table) {
            return lit;
        }
        let half = table.len() / 2;
        let top = vars[vars.len() - 1];
        let rest = &vars[..vars.len() - 1];
        let lo = self.expand(&table[..half], rest);
        let hi = self.expand(&table[half..], rest);
        let lit = self.builder.mux(top, hi, lo);
        self.memo.insert(table.to_vec(), lit);
        lit
    }
}

/// Encodes the machine as an AIGER circuit: states in natural binary on
/// latches (state 0 = all latches 0), each output and next-state bit built by
/// Shannon expansion over (state bits, input bits) with structural hashing.
pub fn mealy_to_aiger(machine: &MealyMachine) -> Result<AigCircuit, SynthesisError> {
    let ni = machine.input_bits();
    let k = state_bits(machine.num_states());
    if k + ni > MAX_EXPANSION_VARS {
        return Err(SynthesisError::TooLarge(k + ni));
    }
    let mut builder = AigBuilder::new();
    let inputs: Vec<Lit> = machine
        .names
        .inputs
        .iter()
        .map(|n| builder.input(Some(n.clone())))
        .collect();
    let latches: Vec<Lit> = (0..k).map(|_| builder.latch(None)).collect();
    let vars: Vec<Lit> = inputs.iter().chain(&latches).copied().collect();
    let mut ex = Expander {
        builder,
        memo: HashMap::new(),
    };

    let rows = 1usize << ni;
    let size = rows << k;
    // unreachable encodings keep all-zero rows
    let table = |f: &dyn Fn(usize, usize) -> bool| -> Vec<bool> {
        (0..size)
            .map(|idx| {
                let (s, i) = (idx / rows, idx % rows);
                s < machine.num_states() && f(s, i)
            })
            .collect()
    };

    let mut outs = Vec::with_capacity(machine.output_bits());
    for bit in 0..machine.output_bits() {
        let t = table(&|s, i| machine.output[s][i] >> bit & 1 == 1);
        outs.push(ex.expand(&t, &vars));
    }
    let mut nexts = Vec::with_capacity(k);
    for bit in 0..k {
        let t = table(&|s, i| machine.update[s][i] >> bit & 1 == 1);
        nexts.push(ex.expand(&t, &vars));
    }
    let mut builder = ex.builder;
    for (&l, &n) in latches.iter().zip(&nexts) {
        builder.set_next(l, n);
    }
    for (lit, name) in outs.into_iter().zip(&machine.names.outputs) {
        builder.output(lit, Some(name.clone()));
    }
    Ok(builder.finish())
}

/// Number of AND gates.
pub fn gate_count(circ: &AigCircuit) -> usize {
    circ.ands.len()
}

/// Quality points of a circuit of `size` gates against a reference of `reference`
/// gates: 2 at equal size, one point more or less per factor of ten, never negative.
pub fn quality_score(size: u64, reference: u64) -> f64 {
    let ratio = (size as f64 + 1.0) / (reference as f64 + 1.0);
    (2.0 - ratio.log10()).max(0.0)
}
