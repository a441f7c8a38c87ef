//! End-to-end flows: load a specification, decide realizability, synthesize and
//! verify a controller.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::aiger::{classify_safety_spec, parse_aag, AigCircuit, AigerError, SafetySpec};
use crate::arena::{arena_from_parity_automaton, arena_from_safety_spec, ArenaError, GameArena, Player, Provenance};
use crate::hoa::{parse_ehoa, HoaError, ParityAutomaton};
use crate::solver::{solve_parity_dfi, solve_parity_zielonka, solve_safety, Solution};
use crate::synthesis::{gate_count, mealy_to_aiger, strategy_to_mealy, IoNames, SynthesisError};
use crate::verify::{verify_parity_controller, verify_safety_controller, Verdict, VerifyError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot tell the specification format of {0} (expected .ehoa/.hoa or .aag)")]
    UnknownFormat(String),
    #[error(transparent)]
    Hoa(#[from] HoaError),
    #[error(transparent)]
    Aiger(#[from] AigerError),
    #[error(transparent)]
    Arena(#[from] ArenaError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("the fixpoint solver only handles safety specifications")]
    FixpointOnParity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolverChoice {
    #[default]
    Zielonka,
    Dfi,
    /// Safety fixpoint; safety specifications only.
    Fixpoint,
}

impl FromStr for SolverChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zielonka" => Ok(SolverChoice::Zielonka),
            "dfi" => Ok(SolverChoice::Dfi),
            "fixpoint" => Ok(SolverChoice::Fixpoint),
            other => Err(format!("unknown solver {other:?} (zielonka|dfi|fixpoint)")),
        }
    }
}

impl fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverChoice::Zielonka => "zielonka",
            SolverChoice::Dfi => "dfi",
            SolverChoice::Fixpoint => "fixpoint",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Ehoa,
    Aag,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ehoa" | "hoa" => Ok(Format::Ehoa),
            "aag" => Ok(Format::Aag),
            other => Err(format!("unknown format {other:?} (ehoa|aag)")),
        }
    }
}

/// A specification of either track. Parity automata are kept normalized.
#[derive(Clone, Debug)]
pub enum Spec {
    Parity(ParityAutomaton),
    Safety(SafetySpec),
}

impl Spec {
    pub fn parse(text: &str, format: Format) -> Result<Spec, PipelineError> {
        Ok(match format {
            Format::Ehoa => Spec::Parity(parse_ehoa(text)?.normalize_acceptance()?),
            Format::Aag => Spec::Safety(classify_safety_spec(parse_aag(text)?)?),
        })
    }

    /// Guesses the format from the extension, falling back to the first line.
    pub fn detect_format(path: &Path, text: &str) -> Result<Format, PipelineError> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("ehoa" | "hoa") => return Ok(Format::Ehoa),
            Some("aag") => return Ok(Format::Aag),
            _ => {}
        }
        let head = text.trim_start();
        if head.starts_with("HOA:") {
            Ok(Format::Ehoa)
        } else if head.starts_with("aag") || head.starts_with("aig") {
            Ok(Format::Aag)
        } else {
            Err(PipelineError::UnknownFormat(path.display().to_string()))
        }
    }

    pub fn load(path: &Path, format: Option<Format>) -> Result<Spec, PipelineError> {
        let text = read(path)?;
        let format = match format {
            Some(f) => f,
            None => Spec::detect_format(path, &text)?,
        };
        Spec::parse(&text, format)
    }

    /// Names of the controller's inputs and outputs.
    pub fn io_names(&self) -> IoNames {
        match self {
            Spec::Parity(a) => IoNames {
                inputs: a.uncontrollable().iter().map(|&i| a.aps[i].clone()).collect(),
                outputs: a.controllable.iter().map(|&i| a.aps[i].clone()).collect(),
            },
            Spec::Safety(s) => IoNames {
                inputs: s.uncontrollable_names(),
                outputs: s.controllable_names(),
            },
        }
    }

    pub fn arena(&self) -> Result<GameArena, PipelineError> {
        Ok(match self {
            Spec::Parity(a) => arena_from_parity_automaton(a)?,
            Spec::Safety(s) => arena_from_safety_spec(s)?,
        })
    }
}

pub fn read(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Solves a specification arena with the chosen algorithm.
pub fn solve_arena(arena: &GameArena, solver: SolverChoice) -> Result<Solution, PipelineError> {
    Ok(match solver {
        SolverChoice::Zielonka => solve_parity_zielonka(arena),
        SolverChoice::Dfi => solve_parity_dfi(arena),
        SolverChoice::Fixpoint => {
            if arena.backmap.iter().any(|p| matches!(p, Provenance::State(_))) {
                return Err(PipelineError::FixpointOnParity);
            }
            let unsafe_set: Vec<bool> = arena.backmap.iter().map(|p| *p == Provenance::Sink).collect();
            solve_safety(arena, &unsafe_set)
        }
    })
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub realizable: bool,
    pub arena_vertices: usize,
    /// Present in synthesis mode for realizable specifications.
    pub controller: Option<AigCircuit>,
    pub mealy_states: Option<usize>,
}

impl Outcome {
    pub fn gates(&self) -> Option<usize> {
        self.controller.as_ref().map(gate_count)
    }
}

pub fn realizability(spec: &Spec, solver: SolverChoice) -> Result<Outcome, PipelineError> {
    let arena = spec.arena()?;
    let sol = solve_arena(&arena, solver)?;
    Ok(Outcome {
        realizable: sol.winner[arena.initial] == Player::Eve,
        arena_vertices: arena.len(),
        controller: None,
        mealy_states: None,
    })
}

pub fn synthesize(spec: &Spec, solver: SolverChoice) -> Result<Outcome, PipelineError> {
    let arena = spec.arena()?;
    let sol = solve_arena(&arena, solver)?;
    let realizable = sol.winner[arena.initial] == Player::Eve;
    if !realizable {
        return Ok(Outcome {
            realizable,
            arena_vertices: arena.len(),
            controller: None,
            mealy_states: None,
        });
    }
    let machine = strategy_to_mealy(&arena, &sol, spec.io_names())?;
    let controller = mealy_to_aiger(&machine)?;
    Ok(Outcome {
        realizable,
        arena_vertices: arena.len(),
        controller: Some(controller),
        mealy_states: Some(machine.num_states()),
    })
}

pub fn verify(spec: &Spec, controller: &AigCircuit) -> Result<Verdict, PipelineError> {
    Ok(match spec {
        Spec::Parity(a) => verify_parity_controller(a, controller)?,
        Spec::Safety(s) => verify_safety_controller(s, controller)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    const CANCEL: &str = "aag 3 2 0 1 1\n2\n4\n6\n6 2 5\ni0 u0\ni1 controllable_c0\n";

    #[test]
    fn cancel_spec_end_to_end() {
        let spec = Spec::parse(CANCEL, Format::Aag).unwrap();
        for solver in [SolverChoice::Zielonka, SolverChoice::Dfi, SolverChoice::Fixpoint] {
            let out = synthesize(&spec, solver).unwrap();
            assert!(out.realizable);
            let ctrl = out.controller.unwrap();
            assert_eq!(verify(&spec, &ctrl).unwrap(), Verdict::Pass);
            // on u0 = 1 the controller raises c0
            assert_eq!(ctrl.run(&[vec![true]]).unwrap(), vec![vec![true]]);
        }
    }

    #[test]
    fn unrealizable_safety() {
        let spec = Spec::parse("aag 2 2 0 1 0\n2\n4\n2\ni0 u0\ni1 controllable_c0\n", Format::Aag).unwrap();
        let out = synthesize(&spec, SolverChoice::Zielonka).unwrap();
        assert!(!out.realizable && out.controller.is_none());
    }

    #[test]
    fn fixpoint_rejects_parity() {
        let spec = Spec::Parity(gen::echo_automaton(1).normalize_acceptance().unwrap());
        assert!(matches!(
            realizability(&spec, SolverChoice::Fixpoint),
            Err(PipelineError::FixpointOnParity)
        ));
    }

    #[test]
    fn structured_parity_instances() {
        let cases = [
            (gen::echo_automaton(2), true),
            (gen::delayed_echo_automaton(), true),
            (gen::prophecy_automaton(), false),
            (gen::request_grant_automaton(), true),
        ];
        for (aut, expect) in cases {
            let spec = Spec::Parity(aut.normalize_acceptance().unwrap());
            for solver in [SolverChoice::Zielonka, SolverChoice::Dfi] {
                let out = synthesize(&spec, solver).unwrap();
                assert_eq!(out.realizable, expect);
                if let Some(c) = &out.controller {
                    assert_eq!(verify(&spec, c).unwrap(), Verdict::Pass);
                }
            }
        }
    }

    #[test]
    fn structured_safety_instances() {
        let cases = [
            (gen::echo_spec(2), true),
            (gen::delay_spec(3), true),
            (gen::token_ring_spec(5, 2), true),
            (gen::counter_spec(3, false), true),
            (gen::counter_spec(1, true), false),
            (gen::doomed_spec(2), false),
        ];
        for (s, expect) in cases {
            let spec = Spec::Safety(s);
            let out = synthesize(&spec, SolverChoice::Zielonka).unwrap();
            assert_eq!(out.realizable, expect);
            if let Some(c) = &out.controller {
                assert_eq!(verify(&spec, c).unwrap(), Verdict::Pass);
            }
        }
    }
}
