//! ASCII AIGER circuits: parsing, printing, simulation and safety-spec classification.

mod builder;
mod parse;

pub use builder::AigBuilder;
pub use parse::{parse_aag, print_aag};

use thiserror::Error;

/// An AIGER literal: `2 * var + negated`. Literals 0 and 1 are the constants.
pub type Lit = u32;

pub const FALSE: Lit = 0;
pub const TRUE: Lit = 1;

pub fn var_of(lit: Lit) -> u32 {
    lit >> 1
}

pub fn is_negated(lit: Lit) -> bool {
    lit & 1 == 1
}

pub fn negate(lit: Lit) -> Lit {
    lit ^ 1
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AigerError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("binary AIGER is not supported; convert to ASCII 'aag' first")]
    BinaryUnsupported,
    #[error("literal {lit} exceeds maximum variable index {max_var}")]
    LiteralOutOfRange { lit: Lit, max_var: u32 },
    #[error("combinational cycle through variable {0}")]
    CombinationalCycle(u32),
    #[error("expected {expected} values for {what}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("a safety specification needs exactly one output, found {0}")]
    OutputCount(usize),
    #[error("input {0} has no symbol name")]
    UnnamedInput(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Latch {
    pub lit: Lit,
    pub next: Lit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AndGate {
    pub lhs: Lit,
    pub rhs0: Lit,
    pub rhs1: Lit,
}

/// An and-inverter graph with latches initialised to 0.
///
/// `ands` is kept in topological order, so a single forward pass evaluates it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AigCircuit {
    pub max_var: u32,
    pub inputs: Vec<Lit>,
    pub latches: Vec<Latch>,
    pub outputs: Vec<Lit>,
    pub ands: Vec<AndGate>,
    pub input_names: Vec<Option<String>>,
    pub latch_names: Vec<Option<String>>,
    pub output_names: Vec<Option<String>>,
    pub comments: Vec<String>,
}

impl AigCircuit {
    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_latches(&self) -> usize {
        self.latches.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn input_name(&self, i: usize) -> Option<&str> {
        self.input_names.get(i).and_then(|n| n.as_deref())
    }

    pub fn output_name(&self, i: usize) -> Option<&str> {
        self.output_names.get(i).and_then(|n| n.as_deref())
    }

    pub fn has_symbols(&self) -> bool {
        self.input_names
            .iter()
            .chain(&self.latch_names)
            .chain(&self.output_names)
            .any(Option::is_some)
    }

    /// Evaluates outputs and next-state bits for one step.
    pub fn simulate(&self, latch_state: &[bool], inputs: &[bool]) -> Result<(Vec<bool>, Vec<bool>), AigerError> {
        let mut sim = Simulator::new(self);
        sim.step(latch_state, inputs)?;
        Ok((sim.outputs(), sim.next_state()))
    }

    /// Runs the circuit from the all-zero latch state over an input sequence,
    /// returning the outputs of every step.
    pub fn run(&self, inputs: &[Vec<bool>]) -> Result<Vec<Vec<bool>>, AigerError> {
        let mut sim = Simulator::new(self);
        let mut state = vec![false; self.num_latches()];
        let mut trace = Vec::with_capacity(inputs.len());
        for step in inputs {
            sim.step(&state, step)?;
            trace.push(sim.outputs());
            state = sim.next_state();
        }
        Ok(trace)
    }
}

/// Reusable evaluation buffer for repeated simulation of one circuit.
pub struct Simulator<'a> {
    circ: &'a AigCircuit,
    values: Vec<bool>,
}

impl<'a> Simulator<'a> {
    pub fn new(circ: &'a AigCircuit) -> Self {
        Simulator {
            circ,
            values: vec![false; circ.max_var as usize + 1],
        }
    }

    pub fn lit(&self, lit: Lit) -> bool {
        self.values[var_of(lit) as usize] ^ is_negated(lit)
    }

    pub fn step(&mut self, latch_state: &[bool], inputs: &[bool]) -> Result<(), AigerError> {
        let c = self.circ;
        if latch_state.len() != c.latches.len() {
            return Err(AigerError::LengthMismatch {
                what: "latches",
                expected: c.latches.len(),
                got: latch_state.len(),
            });
        }
        if inputs.len() != c.inputs.len() {
            return Err(AigerError::LengthMismatch {
                what: "inputs",
                expected: c.inputs.len(),
                got: inputs.len(),
            });
        }
        self.values[0] = false;
        for (&lit, &v) in c.inputs.iter().zip(inputs) {
            self.values[var_of(lit) as usize] = v;
        }
        for (l, &v) in c.latches.iter().zip(latch_state) {
            self.values[var_of(l.lit) as usize] = v;
        }
        for g in &c.ands {
            let v = self.lit(g.rhs0) && self.lit(g.rhs1);
            self.values[var_of(g.lhs) as usize] = v;
        }
        Ok(())
    }

    pub fn outputs(&self) -> Vec<bool> {
        self.circ.outputs.iter().map(|&o| self.lit(o)).collect()
    }

    pub fn next_state(&self) -> Vec<bool> {
        self.circ.latches.iter().map(|l| self.lit(l.next)).collect()
    }
}

/// A circuit read as a safety game: the single output is the bad signal, and
/// inputs named `controllable_*` belong to the system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SafetySpec {
    pub circuit: AigCircuit,
    pub controllable: Vec<usize>,
    pub uncontrollable: Vec<usize>,
    pub bad: usize,
}

pub const CONTROLLABLE_PREFIX: &str = "controllable_";

pub fn classify_safety_spec(circuit: AigCircuit) -> Result<SafetySpec, AigerError> {
    if circuit.num_outputs() != 1 {
        return Err(AigerError::OutputCount(circuit.num_outputs()));
    }
    let mut controllable = Vec::new();
    let mut uncontrollable = Vec::new();
    for i in 0..circuit.num_inputs() {
        let name = circuit.input_name(i).ok_or(AigerError::UnnamedInput(i))?;
        if name.starts_with(CONTROLLABLE_PREFIX) {
            controllable.push(i);
        } else {
            uncontrollable.push(i);
        }
    }
    if controllable.is_empty() && circuit.num_inputs() > 0 {
        log::warn!("safety specification has no controllable inputs");
    }
    Ok(SafetySpec {
        circuit,
        controllable,
        uncontrollable,
        bad: 0,
    })
}

impl SafetySpec {
    pub fn controllable_names(&self) -> Vec<String> {
        self.controllable
            .iter()
            .map(|&i| self.circuit.input_name(i).unwrap_or_default().to_string())
            .collect()
    }

    pub fn uncontrollable_names(&self) -> Vec<String> {
        self.uncontrollable
            .iter()
            .map(|&i| self.circuit.input_name(i).unwrap_or_default().to_string())
            .collect()
    }

    /// Assembles the full input vector from separate uncontrollable and
    /// controllable valuations (bit `k` = k-th input of that class).
    pub fn input_vector(&self, uncontrollable: u64, controllable: u64) -> Vec<bool> {
        let mut v = vec![false; self.circuit.num_inputs()];
        for (k, &i) in self.uncontrollable.iter().enumerate() {
            v[i] = uncontrollable >> k & 1 == 1;
        }
        for (k, &i) in self.controllable.iter().enumerate() {
            v[i] = controllable >> k & 1 == 1;
        }
        v
    }
}
