//! Explicit two-player game arenas built from parity automata and safety specifications.
//!
//! Priorities follow the min-even convention everywhere: Eve wins a play iff the
//! smallest priority seen infinitely often is even.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write;

use thiserror::Error;

use crate::aiger::{SafetySpec, Simulator};
use crate::hoa::{ParityAutomaton, EXPANSION_AP_CAP};

pub const MAX_SAFETY_LATCHES: usize = 20;
pub const MAX_SAFETY_INPUTS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Eve,
    Adam,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Eve => Player::Adam,
            Player::Adam => Player::Eve,
        }
    }

    /// The player who wins when `priority` is the least recurring one.
    pub fn of_priority(priority: u32) -> Player {
        if priority.is_multiple_of(2) {
            Player::Eve
        } else {
            Player::Adam
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArenaError {
    #[error("automaton must be normalized (min-even, deterministic, complete)")]
    NotNormalized,
    #[error("{what} count {got} exceeds the explicit-expansion cap of {cap}")]
    CapExceeded { what: &'static str, got: usize, cap: usize },
    #[error("arena is not total: vertex {0} has no successor")]
    NotTotal(usize),
    #[error("malformed arena: {0}")]
    Malformed(String),
}

/// Where an arena vertex came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Adam picks the next uncontrollable valuation in this automaton state.
    State(usize),
    /// Eve answers the uncontrollable valuation `input` in automaton state `state`.
    StateInput {
        state: usize,
        input: u64,
    },
    /// Unary vertex carrying a transition priority towards automaton state `target`.
    Edge {
        priority: u32,
        target: usize,
    },
    LatchState(u64),
    LatchInput {
        latches: u64,
        input: u64,
    },
    Sink,
    /// Vertex of a generated or hand-built arena.
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub owner: Player,
    pub priority: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameArena {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Vec<usize>>,
    pub initial: usize,
    pub backmap: Vec<Provenance>,
    /// For Eve choice vertices: the controllable valuation realising each edge.
    pub labels: Vec<Vec<u64>>,
    /// Number of uncontrollable / controllable bits in valuations (0 for plain arenas).
    pub input_bits: usize,
    pub output_bits: usize,
}

impl GameArena {
    /// Builds a plain arena; every vertex must have at least one successor.
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Vec<usize>>, initial: usize) -> Result<GameArena, ArenaError> {
        let n = vertices.len();
        if edges.len() != n {
            return Err(ArenaError::Malformed(format!(
                "{} vertices but {} adjacency lists",
                n,
                edges.len()
            )));
        }
        if n == 0 || initial >= n {
            return Err(ArenaError::Malformed("initial vertex out of range".into()));
        }
        let arena = GameArena {
            backmap: vec![Provenance::Plain; n],
            labels: vec![Vec::new(); n],
            vertices,
            edges,
            initial,
            input_bits: 0,
            output_bits: 0,
        };
        arena.check_total()?;
        Ok(arena)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn owner(&self, v: usize) -> Player {
        self.vertices[v].owner
    }

    pub fn priority(&self, v: usize) -> u32 {
        self.vertices[v].priority
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.edges[v]
    }

    pub fn max_priority(&self) -> u32 {
        self.vertices.iter().map(|v| v.priority).max().unwrap_or(0)
    }

    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.len()];
        for (v, succ) in self.edges.iter().enumerate() {
            for &w in succ {
                preds[w].push(v);
            }
        }
        preds
    }

    pub fn check_total(&self) -> Result<(), ArenaError> {
        for (v, succ) in self.edges.iter().enumerate() {
            if succ.is_empty() {
                return Err(ArenaError::NotTotal(v));
            }
            if let Some(&w) = succ.iter().find(|&&w| w >= self.len()) {
                return Err(ArenaError::Malformed(format!("edge {v} -> {w} out of range")));
            }
        }
        Ok(())
    }

    /// Vertices tagged as the losing sink.
    pub fn sinks(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&v| self.backmap[v] == Provenance::Sink)
            .collect()
    }

    /// PGSolver text: `parity N;` then `id priority owner succ,succ "name";`.
    /// Owner 0 is Eve (even), 1 is Adam (odd).
    pub fn to_pgsolver(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "parity {};", self.len().saturating_sub(1));
        if self.initial != 0 {
            let _ = writeln!(s, "start {};", self.initial);
        }
        for (v, vert) in self.vertices.iter().enumerate() {
            let succ: Vec<String> = self.edges[v].iter().map(|w| w.to_string()).collect();
            let _ = writeln!(
                s,
                "{} {} {} {} \"{}\";",
                v,
                vert.priority,
                vert.owner.index(),
                succ.join(","),
                describe(&self.backmap[v])
            );
        }
        s
    }

    /// Reads the PGSolver format written by `to_pgsolver`. Priorities are read as
    /// min-even, matching the solvers' convention.
    pub fn from_pgsolver(text: &str) -> Result<GameArena, ArenaError> {
        let mut rows: Vec<(usize, Vertex, Vec<usize>)> = Vec::new();
        let mut initial = 0;
        for raw in text.split(';') {
            let stmt = raw.trim();
            if stmt.is_empty() {
                continue;
            }
            let mut parts = stmt.split_whitespace();
            let head = parts.next().unwrap();
            if head == "parity" {
                continue;
            }
            if head == "start" {
                initial = parse_usize(parts.next(), "start vertex")?;
                continue;
            }
            let id: usize = parse_usize(Some(head), "vertex id")?;
            let priority = parse_usize(parts.next(), "priority")? as u32;
            let owner = match parts.next() {
                Some("0") => Player::Eve,
                Some("1") => Player::Adam,
                other => return Err(ArenaError::Malformed(format!("bad owner {other:?}"))),
            };
            let succ = parts
                .next()
                .ok_or_else(|| ArenaError::Malformed(format!("vertex {id} has no successors")))?
                .split(',')
                .map(|w| parse_usize(Some(w), "successor"))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push((id, Vertex { owner, priority }, succ));
        }
        rows.sort_by_key(|r| r.0);
        if rows.iter().enumerate().any(|(i, r)| r.0 != i) {
            return Err(ArenaError::Malformed("vertex ids must be 0..n-1".into()));
        }
        let (vertices, edges) = rows.into_iter().map(|(_, v, e)| (v, e)).unzip();
        GameArena::new(vertices, edges, initial)
    }
}

fn parse_usize(s: Option<&str>, what: &str) -> Result<usize, ArenaError> {
    s.and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| ArenaError::Malformed(format!("expected {what}")))
}

fn describe(p: &Provenance) -> String {
    match p {
        Provenance::State(q) => format!("q{q}"),
        Provenance::StateInput { state, input } => format!("q{state}/i{input}"),
        Provenance::Edge { priority, target } => format!("p{priority}->q{target}"),
        Provenance::LatchState(s) => format!("l{s}"),
        Provenance::LatchInput { latches, input } => format!("l{latches}/i{input}"),
        Provenance::Sink => "sink".into(),
        Provenance::Plain => String::new(),
    }
}

/// Spreads the bits of `packed` onto the AP positions in `positions`.
pub fn scatter(packed: u64, positions: &[usize]) -> u64 {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &ap)| acc | ((packed >> k & 1) << ap))
}

/// Builds the round-based game of a normalized parity automaton.
///
/// Adam vertices are automaton states; Eve vertices are (state, uncontrollable
/// valuation) pairs. Each Eve choice leads to a unary vertex carrying the
/// transition priority, which then leads to the Adam vertex of the successor
/// state. Adam and Eve vertices take the largest transition priority, so the
/// least priority recurring on any play is the least recurring transition priority.
pub fn arena_from_parity_automaton(aut: &ParityAutomaton) -> Result<GameArena, ArenaError> {
    if !aut.normalized {
        return Err(ArenaError::NotNormalized);
    }
    if aut.num_aps() > EXPANSION_AP_CAP {
        return Err(ArenaError::CapExceeded {
            what: "AP",
            got: aut.num_aps(),
            cap: EXPANSION_AP_CAP,
        });
    }
    let inputs = aut.uncontrollable();
    let outputs = aut.controllable.clone();
    let neutral = aut.transitions.iter().flatten().map(|t| t.priority).max().unwrap_or(0);

    let nq = aut.num_states();
    let mut vertices = Vec::new();
    let mut backmap = Vec::new();
    for q in 0..nq {
        vertices.push(Vertex {
            owner: Player::Adam,
            priority: neutral,
        });
        backmap.push(Provenance::State(q));
    }
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); nq];
    let mut labels: Vec<Vec<u64>> = vec![Vec::new(); nq];
    let mut relay: HashMap<(u32, usize), usize> = HashMap::new();

    for q in 0..nq {
        for i in 0..1u64 << inputs.len() {
            let eve = vertices.len();
            vertices.push(Vertex {
                owner: Player::Eve,
                priority: neutral,
            });
            backmap.push(Provenance::StateInput { state: q, input: i });
            edges.push(Vec::new());
            labels.push(Vec::new());
            edges[q].push(eve);
            let ival = scatter(i, &inputs);
            for o in 0..1u64 << outputs.len() {
                let val = ival | scatter(o, &outputs);
                let (target, priority) = aut.step(q, val).ok_or(ArenaError::NotNormalized)?;
                let mid = *relay.entry((priority, target)).or_insert_with(|| {
                    vertices.push(Vertex {
                        owner: Player::Eve,
                        priority,
                    });
                    backmap.push(Provenance::Edge { priority, target });
                    edges.push(vec![target]);
                    labels.push(Vec::new());
                    vertices.len() - 1
                });
                if !edges[eve].contains(&mid) {
                    edges[eve].push(mid);
                    labels[eve].push(o);
                }
            }
        }
    }

    let arena = GameArena {
        vertices,
        edges,
        initial: aut.initial,
        backmap,
        labels,
        input_bits: inputs.len(),
        output_bits: outputs.len(),
    };
    arena.check_total()?;
    Ok(arena)
}

/// Builds the safety game of an AIGER specification by forward exploration
/// from the all-zero latch state. Raising `bad` leads to a single losing sink.
pub fn arena_from_safety_spec(spec: &SafetySpec) -> Result<GameArena, ArenaError> {
    let circ = &spec.circuit;
    for (what, got, cap) in [
        ("latch", circ.num_latches(), MAX_SAFETY_LATCHES),
        ("uncontrollable input", spec.uncontrollable.len(), MAX_SAFETY_INPUTS),
        ("controllable input", spec.controllable.len(), MAX_SAFETY_INPUTS),
    ] {
        if got > cap {
            return Err(ArenaError::CapExceeded { what, got, cap });
        }
    }
    let nl = circ.num_latches();
    let nu = spec.uncontrollable.len();
    let nc = spec.controllable.len();

    let mut vertices = Vec::new();
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut labels: Vec<Vec<u64>> = Vec::new();
    let mut backmap = Vec::new();
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut sink: Option<usize> = None;

    let add = |vertices: &mut Vec<Vertex>,
               edges: &mut Vec<Vec<usize>>,
               labels: &mut Vec<Vec<u64>>,
               backmap: &mut Vec<Provenance>,
               owner: Player,
               priority: u32,
               tag: Provenance| {
        vertices.push(Vertex { owner, priority });
        edges.push(Vec::new());
        labels.push(Vec::new());
        backmap.push(tag);
        vertices.len() - 1
    };

    let root = add(
        &mut vertices,
        &mut edges,
        &mut labels,
        &mut backmap,
        Player::Adam,
        0,
        Provenance::LatchState(0),
    );
    index.insert(0, root);
    queue.push_back(0u64);

    let mut sim = Simulator::new(circ);
    let unpack = |s: u64| (0..nl).map(|k| s >> k & 1 == 1).collect::<Vec<bool>>();
    let pack = |bits: &[bool]| {
        bits.iter()
            .enumerate()
            .fold(0u64, |acc, (k, &b)| acc | (u64::from(b) << k))
    };

    while let Some(state) = queue.pop_front() {
        let adam = index[&state];
        let latch_bits = unpack(state);
        for i in 0..1u64 << nu {
            let eve = add(
                &mut vertices,
                &mut edges,
                &mut labels,
                &mut backmap,
                Player::Eve,
                0,
                Provenance::LatchInput {
                    latches: state,
                    input: i,
                },
            );
            edges[adam].push(eve);
            for o in 0..1u64 << nc {
                let input = spec.input_vector(i, o);
                sim.step(&latch_bits, &input)
                    .expect("vector lengths follow the circuit");
                let target = if sim.lit(circ.outputs[spec.bad]) {
                    *sink.get_or_insert_with(|| {
                        let s = add(
                            &mut vertices,
                            &mut edges,
                            &mut labels,
                            &mut backmap,
                            Player::Adam,
                            1,
                            Provenance::Sink,
                        );
                        edges[s].push(s);
                        s
                    })
                } else {
                    let next = pack(&sim.next_state());
                    *index.entry(next).or_insert_with(|| {
                        queue.push_back(next);
                        add(
                            &mut vertices,
                            &mut edges,
                            &mut labels,
                            &mut backmap,
                            Player::Adam,
                            0,
                            Provenance::LatchState(next),
                        )
                    })
                };
                if !edges[eve].contains(&target) {
                    edges[eve].push(target);
                    labels[eve].push(o);
                }
            }
        }
    }

    let arena = GameArena {
        vertices,
        edges,
        initial: root,
        backmap,
        labels,
        input_bits: nu,
        output_bits: nc,
    };
    arena.check_total()?;
    Ok(arena)
}
