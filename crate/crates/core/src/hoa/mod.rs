//! Deterministic parity, Büchi and co-Büchi automata in extended HOA form.
//!
//! Acceptance is always transition-based internally. State-based marks found in
//! input files are stamped onto every outgoing edge of the marked state.
//!
//! Priority encoding per acceptance kind:
//! - Büchi and co-Büchi: priority 0 means "carries mark 0", priority 1 means unmarked.
//! - Parity: the priority is the color. Edges without a color are assigned an
//!   explicit color at parse time that preserves the language (see `parse`).

mod guard;
mod parse;
mod print;

pub use guard::{Cube, Guard};
pub use parse::parse_ehoa;
pub use print::print_ehoa;

use thiserror::Error;

/// Largest AP count for which valuations are expanded explicitly.
pub const EXPANSION_AP_CAP: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HoaError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported acceptance: {0}")]
    UnsupportedAcceptance(String),
    #[error("guard references AP {index} but only {declared} APs are declared")]
    UndeclaredAp { index: usize, declared: usize },
    #[error("missing Start header")]
    MissingStart,
    #[error("nondeterministic input: state {state} has overlapping guards")]
    Nondeterministic { state: usize },
    #[error("automaton has {0} APs; explicit expansion is capped at {EXPANSION_AP_CAP}")]
    TooManyAps(usize),
    #[error("invalid automaton: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    Even,
    Odd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AcceptanceKind {
    Buchi,
    CoBuchi,
    Parity(Order, Polarity),
}

/// Acceptance descriptor. `colors` bounds every transition priority from above.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Acceptance {
    pub kind: AcceptanceKind,
    pub colors: u32,
}

impl Acceptance {
    pub const MIN_EVEN: AcceptanceKind = AcceptanceKind::Parity(Order::Min, Polarity::Even);

    pub fn min_even(colors: u32) -> Acceptance {
        Acceptance {
            kind: Self::MIN_EVEN,
            colors,
        }
    }

    /// Decides acceptance of a run from the set of priorities it sees infinitely often.
    /// An empty set means the run is finite (blocked) and is rejected.
    pub fn accepts_recurring(&self, recurring: &[u32]) -> bool {
        if recurring.is_empty() {
            return false;
        }
        match self.kind {
            AcceptanceKind::Buchi => recurring.contains(&0),
            AcceptanceKind::CoBuchi => !recurring.contains(&0),
            AcceptanceKind::Parity(order, polarity) => {
                let key = match order {
                    Order::Min => *recurring.iter().min().unwrap(),
                    Order::Max => *recurring.iter().max().unwrap(),
                };
                let even = key % 2 == 0;
                even == (polarity == Polarity::Even)
            }
        }
    }

    /// A priority that makes any run looping on it alone rejecting.
    pub fn rejecting_priority(&self) -> u32 {
        match self.kind {
            AcceptanceKind::Buchi => 1,
            AcceptanceKind::CoBuchi => 0,
            AcceptanceKind::Parity(_, Polarity::Even) => 1,
            AcceptanceKind::Parity(_, Polarity::Odd) => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub guard: Guard,
    pub target: usize,
    pub priority: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityAutomaton {
    pub name: Option<String>,
    pub initial: usize,
    pub aps: Vec<String>,
    /// Indices into `aps` of the output (system-controlled) propositions.
    pub controllable: Vec<usize>,
    /// Outgoing transitions, indexed by source state.
    pub transitions: Vec<Vec<Transition>>,
    pub acceptance: Acceptance,
    pub normalized: bool,
}

impl ParityAutomaton {
    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn num_aps(&self) -> usize {
        self.aps.len()
    }

    pub fn is_controllable(&self, ap: usize) -> bool {
        self.controllable.contains(&ap)
    }

    /// Indices of the environment-controlled propositions, ascending.
    pub fn uncontrollable(&self) -> Vec<usize> {
        (0..self.aps.len()).filter(|ap| !self.is_controllable(*ap)).collect()
    }

    /// Checks the structural invariants: valid targets, priorities below `colors`,
    /// controllable indices in range, guards over declared APs.
    pub fn validate(&self) -> Result<(), HoaError> {
        let n = self.num_states();
        if n == 0 || self.initial >= n {
            return Err(HoaError::Invalid(format!(
                "initial state {} out of range for {} states",
                self.initial, n
            )));
        }
        if self.aps.len() > 64 {
            return Err(HoaError::Invalid("more than 64 APs".into()));
        }
        let mut seen = self.controllable.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.controllable.len() {
            return Err(HoaError::Invalid("duplicate controllable AP".into()));
        }
        if let Some(&c) = self.controllable.iter().find(|&&c| c >= self.aps.len()) {
            return Err(HoaError::UndeclaredAp {
                index: c,
                declared: self.aps.len(),
            });
        }
        for (q, edges) in self.transitions.iter().enumerate() {
            for t in edges {
                if t.target >= n {
                    return Err(HoaError::Invalid(format!(
                        "state {q} has a transition to unknown state {}",
                        t.target
                    )));
                }
                if t.priority >= self.acceptance.colors {
                    return Err(HoaError::Invalid(format!(
                        "priority {} exceeds {} colors",
                        t.priority, self.acceptance.colors
                    )));
                }
                if let Some(ap) = t.guard.max_ap() {
                    if ap >= self.aps.len() {
                        return Err(HoaError::UndeclaredAp {
                            index: ap,
                            declared: self.aps.len(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// The transition taken from `state` on the full valuation `val`.
    pub fn step(&self, state: usize, val: u64) -> Option<(usize, u32)> {
        self.transitions[state]
            .iter()
            .find(|t| t.guard.eval(val))
            .map(|t| (t.target, t.priority))
    }

    fn check_expansion_cap(&self) -> Result<(), HoaError> {
        if self.aps.len() > EXPANSION_AP_CAP {
            Err(HoaError::TooManyAps(self.aps.len()))
        } else {
            Ok(())
        }
    }

    /// Returns whether some valuation is unmatched, after checking determinism.
    fn scan_determinism(&self) -> Result<bool, HoaError> {
        self.check_expansion_cap()?;
        let mut incomplete = false;
        for (q, edges) in self.transitions.iter().enumerate() {
            for val in 0..1u64 << self.aps.len() {
                let mut hit: Option<(usize, u32)> = None;
                for t in edges.iter().filter(|t| t.guard.eval(val)) {
                    match hit {
                        None => hit = Some((t.target, t.priority)),
                        Some(prev) if prev != (t.target, t.priority) => {
                            return Err(HoaError::Nondeterministic { state: q })
                        }
                        Some(_) => {}
                    }
                }
                incomplete |= hit.is_none();
            }
        }
        Ok(incomplete)
    }

    pub fn is_deterministic_and_complete(&self) -> bool {
        matches!(self.scan_determinism(), Ok(false))
    }

    /// Routes every unmatched (state, valuation) pair to a fresh rejecting sink.
    pub fn complete(&self) -> Result<ParityAutomaton, HoaError> {
        if !self.scan_determinism()? {
            return Ok(self.clone());
        }
        let mut out = self.clone();
        let sink = out.transitions.len();
        let reject = out.acceptance.rejecting_priority();
        for edges in out.transitions.iter_mut() {
            let covered = edges.iter().fold(Guard::ff(), |acc, t| acc.or(&t.guard));
            let missing = covered.not();
            if !missing.is_false() {
                edges.push(Transition {
                    guard: missing,
                    target: sink,
                    priority: reject,
                });
            }
        }
        out.transitions.push(vec![Transition {
            guard: Guard::tt(),
            target: sink,
            priority: reject,
        }]);
        out.acceptance.colors = out.acceptance.colors.max(reject + 1);
        Ok(out)
    }

    /// Converts to min-even transition priorities and completes the automaton.
    pub fn normalize_acceptance(&self) -> Result<ParityAutomaton, HoaError> {
        let colors = self.acceptance.colors;
        let (map, new_colors): (Box<dyn Fn(u32) -> u32>, u32) = match self.acceptance.kind {
            AcceptanceKind::Buchi => (Box::new(|p| p), 2),
            AcceptanceKind::CoBuchi => (Box::new(|p| p + 1), 3),
            AcceptanceKind::Parity(Order::Min, Polarity::Even) => (Box::new(|p| p), colors),
            AcceptanceKind::Parity(Order::Min, Polarity::Odd) => (Box::new(|p| p + 1), colors + 1),
            AcceptanceKind::Parity(Order::Max, polarity) => {
                // Shift odd polarity to even first, then reverse the order around
                // the smallest even bound on the largest priority.
                let shift = u32::from(polarity == Polarity::Odd);
                let top = colors + shift - 1;
                let bound = top + top % 2;
                (Box::new(move |p| bound - (p + shift)), bound + 1)
            }
        };
        let mut out = self.clone();
        for edges in out.transitions.iter_mut() {
            for t in edges.iter_mut() {
                t.priority = map(t.priority);
            }
        }
        out.acceptance = Acceptance::min_even(new_colors.max(1));
        let mut out = out.complete()?;
        out.normalized = true;
        Ok(out)
    }

    /// Runs the automaton on the lasso word `prefix · cycle^ω` (valuations as bit
    /// vectors) and evaluates the acceptance descriptor on the recurring priorities.
    pub fn accepts_lasso(&self, prefix: &[u64], cycle: &[u64]) -> bool {
        assert!(!cycle.is_empty(), "lasso cycle must be non-empty");
        let mut q = self.initial;
        for &a in prefix {
            match self.step(q, a) {
                Some((next, _)) => q = next,
                None => return false,
            }
        }
        // Iterate the cycle until the state at a cycle boundary repeats.
        let mut boundary_states = vec![q];
        let mut per_round: Vec<Vec<u32>> = Vec::new();
        loop {
            let mut prios = Vec::with_capacity(cycle.len());
            for &a in cycle {
                match self.step(q, a) {
                    Some((next, p)) => {
                        prios.push(p);
                        q = next;
                    }
                    None => return false,
                }
            }
            per_round.push(prios);
            if let Some(pos) = boundary_states.iter().position(|&s| s == q) {
                let recurring: Vec<u32> = per_round[pos..].iter().flatten().copied().collect();
                return self.acceptance.accepts_recurring(&recurring);
            }
            boundary_states.push(q);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_state(guards: &[(Guard, u32)], kind: AcceptanceKind, colors: u32) -> ParityAutomaton {
        ParityAutomaton {
            name: None,
            initial: 0,
            aps: vec!["a".into()],
            controllable: vec![],
            transitions: vec![guards
                .iter()
                .map(|(g, p)| Transition {
                    guard: g.clone(),
                    target: 0,
                    priority: *p,
                })
                .collect()],
            acceptance: Acceptance { kind, colors },
            normalized: false,
        }
    }

    #[test]
    fn complete_adds_sink_for_missing_valuation() {
        let aut = one_state(&[(Guard::literal(0, true), 0)], Acceptance::MIN_EVEN, 1);
        let done = aut.complete().unwrap();
        assert_eq!(done.num_states(), 2);
        assert_eq!(done.step(0, 0), Some((1, 1)));
        assert_eq!(done.step(1, 1), Some((1, 1)));
        assert!(done.is_deterministic_and_complete());
    }

    #[test]
    fn complete_is_identity_on_complete_input() {
        let aut = one_state(&[(Guard::tt(), 0)], Acceptance::MIN_EVEN, 1);
        assert_eq!(aut.complete().unwrap(), aut);
    }

    #[test]
    fn overlapping_guards_are_nondeterministic() {
        let mut aut = one_state(
            &[(Guard::tt(), 0), (Guard::literal(0, true), 0)],
            Acceptance::MIN_EVEN,
            1,
        );
        aut.transitions[0][1].priority = 0;
        aut.aps = vec!["a".into()];
        // Same target, same priority: semantically deterministic.
        assert!(aut.complete().is_ok());
        aut.acceptance.colors = 2;
        aut.transitions[0][1].priority = 1;
        assert_eq!(aut.complete(), Err(HoaError::Nondeterministic { state: 0 }));
    }

    #[test]
    fn buchi_normalizes_to_zero_one() {
        let aut = one_state(
            &[(Guard::literal(0, true), 0), (Guard::literal(0, false), 1)],
            AcceptanceKind::Buchi,
            2,
        );
        let norm = aut.normalize_acceptance().unwrap();
        assert!(norm.normalized);
        assert_eq!(norm.acceptance, Acceptance::min_even(2));
        assert_eq!(norm.step(0, 1), Some((0, 0)));
        assert_eq!(norm.step(0, 0), Some((0, 1)));
    }

    #[test]
    fn max_even_reverses_priorities() {
        let aut = one_state(
            &[(Guard::tt(), 0)],
            AcceptanceKind::Parity(Order::Max, Polarity::Even),
            3,
        );
        let mut three = aut.clone();
        three.aps = vec!["a".into(), "b".into()];
        three.transitions[0] = vec![
            Transition {
                guard: Guard::literal(0, false),
                target: 0,
                priority: 0,
            },
            Transition {
                guard: Guard::literal(0, true).and(&Guard::literal(1, false)),
                target: 0,
                priority: 1,
            },
            Transition {
                guard: Guard::literal(0, true).and(&Guard::literal(1, true)),
                target: 0,
                priority: 2,
            },
        ];
        let norm = three.normalize_acceptance().unwrap();
        let prios: Vec<u32> = norm.transitions[0].iter().map(|t| t.priority).collect();
        assert_eq!(prios, vec![2, 1, 0]);
        assert_eq!(norm.acceptance.colors, 3);
    }

    #[test]
    fn min_even_normalization_is_identity_when_complete() {
        let aut = one_state(&[(Guard::tt(), 2)], Acceptance::MIN_EVEN, 3);
        let norm = aut.normalize_acceptance().unwrap();
        assert_eq!(norm.transitions, aut.transitions);
    }

    #[test]
    fn lasso_evaluation() {
        let aut = one_state(
            &[(Guard::literal(0, true), 0), (Guard::literal(0, false), 1)],
            AcceptanceKind::Buchi,
            2,
        );
        assert!(aut.accepts_lasso(&[], &[1]));
        assert!(!aut.accepts_lasso(&[1, 1], &[0]));
        assert!(aut.accepts_lasso(&[0], &[0, 1]));
    }
}
