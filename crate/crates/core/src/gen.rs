//! Seeded generators for arenas, automata, circuits, and the desk benchmark suite.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aiger::{print_aag, AigBuilder, AigCircuit, Lit, SafetySpec, CONTROLLABLE_PREFIX, FALSE, TRUE};
use crate::arena::{GameArena, Player, Vertex};
use crate::hoa::{print_ehoa, Acceptance, AcceptanceKind, Cube, Guard, Order, ParityAutomaton, Polarity, Transition};

pub const SEED_ENV: &str = "OMEGA_SYNTH_SEED";

/// Seed from `OMEGA_SYNTH_SEED`, falling back to `default`.
pub fn seed_from_env(default: u64) -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(default)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArenaFamily {
    Random,
    Ladder,
    Clique,
}

impl FromStr for ArenaFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(ArenaFamily::Random),
            "ladder" => Ok(ArenaFamily::Ladder),
            "clique" => Ok(ArenaFamily::Clique),
            other => Err(format!("unknown arena family {other:?} (random|ladder|clique)")),
        }
    }
}

impl fmt::Display for ArenaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArenaFamily::Random => "random",
            ArenaFamily::Ladder => "ladder",
            ArenaFamily::Clique => "clique",
        })
    }
}

/// Uniform random arena: out-degrees in `1..=max_degree`, owners and
/// priorities (`0..=max_priority`) uniform.
pub fn random_arena(rng: &mut impl Rng, n: usize, max_priority: u32, max_degree: usize) -> GameArena {
    let n = n.max(1);
    let vertices = (0..n)
        .map(|_| Vertex {
            owner: if rng.gen() { Player::Eve } else { Player::Adam },
            priority: rng.gen_range(0..=max_priority),
        })
        .collect();
    let all: Vec<usize> = (0..n).collect();
    let edges = (0..n)
        .map(|_| {
            let deg = rng.gen_range(1..=max_degree.max(1)).min(n);
            let mut succ: Vec<usize> = all.choose_multiple(rng, deg).copied().collect();
            succ.sort_unstable();
            succ
        })
        .collect();
    GameArena::new(vertices, edges, 0).expect("every vertex has a successor")
}

/// Reproducible arena of the given family with `n` vertices and priorities in `0..=d`.
pub fn generate_arena(family: ArenaFamily, seed: u64, n: usize, d: u32) -> GameArena {
    let n = n.max(1);
    let d = d.max(1);
    let mut r = rng(seed);
    match family {
        ArenaFamily::Random => random_arena(&mut r, n, d, 3),
        ArenaFamily::Ladder => ladder(n, d),
        ArenaFamily::Clique => {
            let vertices = (0..n)
                .map(|v| Vertex {
                    owner: if v % 2 == 0 { Player::Eve } else { Player::Adam },
                    priority: r.gen_range(0..=d),
                })
                .collect();
            let edges = (0..n)
                .map(|v| {
                    if n == 1 {
                        vec![0]
                    } else {
                        (0..n).filter(|&w| w != v).collect()
                    }
                })
                .collect();
            GameArena::new(vertices, edges, 0).expect("clique is total")
        }
    }
}

/// Two interleaved chains: rung `k` holds an Eve and an Adam vertex, each
/// moving forward along its own rail or across to the other one. Priorities
/// decrease along the ladder so later rungs dominate, and the last rung loops
/// back to the first.
fn ladder(n: usize, d: u32) -> GameArena {
    let mut vertices = Vec::with_capacity(n);
    let mut edges = Vec::with_capacity(n);
    for v in 0..n {
        let rung = (v / 2) as u32;
        let owner = if v % 2 == 0 { Player::Eve } else { Player::Adam };
        let base = d.saturating_sub(rung % (d + 1));
        // keep the two rails on opposite parities
        let priority = if base.is_multiple_of(2) == (owner == Player::Eve) {
            base
        } else if base > 0 {
            base - 1
        } else {
            base + 1
        };
        vertices.push(Vertex { owner, priority });
        let mut succ = vec![(v + 2) % n, (v + 1) % n];
        if v % 2 == 1 {
            succ.push(v - 1);
        }
        succ.sort_unstable();
        succ.dedup();
        edges.push(succ);
    }
    GameArena::new(vertices, edges, 0).expect("ladder is total")
}

/// Random cube over `num_aps` propositions with each AP fixed with probability 1/2.
pub fn random_cube(rng: &mut impl Rng, num_aps: usize) -> Cube {
    let mut c = Cube::TRUE;
    for ap in 0..num_aps {
        if rng.gen_bool(0.5) {
            c = c.intersect(&Cube::literal(ap, rng.gen())).expect("distinct APs");
        }
    }
    c
}

pub fn random_guard(rng: &mut impl Rng, num_aps: usize) -> Guard {
    let k = rng.gen_range(0..=3);
    Guard::from_cubes((0..k).map(|_| random_cube(rng, num_aps)))
}

/// Splits the valuation space into at most `leaves` disjoint cubes by a random
/// decision tree; the cubes cover every valuation.
pub fn random_partition(rng: &mut impl Rng, num_aps: usize, leaves: usize) -> Vec<Cube> {
    let mut parts = vec![Cube::TRUE];
    while parts.len() < leaves {
        let splittable: Vec<usize> = (0..parts.len())
            .filter(|&k| parts[k].care.count_ones() < num_aps as u32)
            .collect();
        let Some(&k) = splittable.choose(rng) else { break };
        let free: Vec<usize> = (0..num_aps).filter(|&ap| parts[k].care >> ap & 1 == 0).collect();
        let ap = *free.choose(rng).unwrap();
        let c = parts.swap_remove(k);
        parts.push(c.intersect(&Cube::literal(ap, true)).unwrap());
        parts.push(c.intersect(&Cube::literal(ap, false)).unwrap());
    }
    parts
}

fn random_acceptance(rng: &mut impl Rng) -> Acceptance {
    match rng.gen_range(0..6) {
        0 => Acceptance {
            kind: AcceptanceKind::Buchi,
            colors: 2,
        },
        1 => Acceptance {
            kind: AcceptanceKind::CoBuchi,
            colors: 2,
        },
        k => {
            let order = if k < 4 { Order::Min } else { Order::Max };
            let polarity = if k % 2 == 0 { Polarity::Even } else { Polarity::Odd };
            Acceptance {
                kind: AcceptanceKind::Parity(order, polarity),
                colors: rng.gen_range(1..=5),
            }
        }
    }
}

fn random_priority(rng: &mut impl Rng, acc: &Acceptance) -> u32 {
    match acc.kind {
        AcceptanceKind::Buchi | AcceptanceKind::CoBuchi => rng.gen_range(0..2),
        AcceptanceKind::Parity(..) => rng.gen_range(0..acc.colors),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AutomatonShape {
    pub states: usize,
    pub aps: usize,
    pub controllable: usize,
    /// Upper bound on outgoing transitions per state.
    pub branching: usize,
    /// Probability of dropping a transition (the automaton becomes incomplete).
    pub drop: f64,
}

/// Random deterministic automaton of any supported acceptance flavor. Guards of a
/// state are disjoint cubes from a random decision tree, so determinism holds by
/// construction; dropped transitions leave it incomplete.
pub fn random_automaton(rng: &mut impl Rng, shape: AutomatonShape) -> ParityAutomaton {
    let states = shape.states.max(1);
    let acceptance = random_acceptance(rng);
    let mut aps_idx: Vec<usize> = (0..shape.aps).collect();
    aps_idx.shuffle(rng);
    let mut controllable: Vec<usize> = aps_idx[..shape.controllable.min(shape.aps)].to_vec();
    controllable.sort_unstable();
    let transitions = (0..states)
        .map(|_| {
            let leaves = rng.gen_range(1..=shape.branching.max(1));
            let mut ts = Vec::new();
            for cube in random_partition(rng, shape.aps, leaves) {
                if rng.gen_bool(shape.drop) {
                    continue;
                }
                ts.push(Transition {
                    guard: Guard::from_cubes([cube]),
                    target: rng.gen_range(0..states),
                    priority: random_priority(rng, &acceptance),
                });
            }
            ts
        })
        .collect();
    ParityAutomaton {
        name: None,
        initial: 0,
        aps: (0..shape.aps).map(|k| format!("p{k}")).collect(),
        controllable,
        transitions,
        acceptance,
        normalized: false,
    }
}

/// Small automaton as used by the normalization and round-trip checks:
/// at most 4 states and 3 APs.
pub fn small_automaton(rng: &mut impl Rng) -> ParityAutomaton {
    let aps = rng.gen_range(0..=3);
    let shape = AutomatonShape {
        states: rng.gen_range(1..=4),
        aps,
        controllable: rng.gen_range(0..=aps),
        branching: 4,
        drop: 0.15,
    };
    random_automaton(rng, shape)
}

/// Random circuit with named inputs/latches/outputs and `ands` gates over
/// earlier signals.
pub fn random_circuit(
    rng: &mut impl Rng,
    inputs: &[String],
    latches: usize,
    outputs: usize,
    ands: usize,
) -> AigCircuit {
    let mut b = AigBuilder::new();
    let mut pool: Vec<Lit> = inputs.iter().map(|n| b.input(Some(n.clone()))).collect();
    let ls: Vec<Lit> = (0..latches).map(|k| b.latch(Some(format!("l{k}")))).collect();
    pool.extend(&ls);
    let pick = |rng: &mut dyn rand::RngCore, pool: &[Lit]| -> Lit {
        if pool.is_empty() {
            FALSE ^ u32::from(rng.gen_bool(0.5))
        } else {
            pool[rng.gen_range(0..pool.len())] ^ u32::from(rng.gen_bool(0.5))
        }
    };
    for _ in 0..ands {
        let x = pick(rng, &pool);
        let y = pick(rng, &pool);
        let g = b.and(x, y);
        if g > 1 && !pool.contains(&(g & !1)) {
            pool.push(g & !1);
        }
    }
    for &l in &ls {
        let next = pick(rng, &pool);
        b.set_next(l, next);
    }
    for k in 0..outputs {
        let o = pick(rng, &pool);
        b.output(o, Some(format!("o{k}")));
    }
    b.finish()
}

/// Random safety specification with `nu` uncontrollable and `nc` controllable inputs.
pub fn random_safety_spec(rng: &mut impl Rng, nu: usize, nc: usize, latches: usize, ands: usize) -> SafetySpec {
    let mut names: Vec<String> = (0..nu).map(|k| format!("u{k}")).collect();
    names.extend((0..nc).map(|k| format!("{CONTROLLABLE_PREFIX}c{k}")));
    let mut c = random_circuit(rng, &names, latches, 1, ands);
    c.output_names = vec![Some("bad".into())];
    crate::aiger::classify_safety_spec(c).expect("single named output")
}

fn named_inputs(b: &mut AigBuilder, nu: usize, nc: usize) -> (Vec<Lit>, Vec<Lit>) {
    let u = (0..nu).map(|k| b.input(Some(format!("u{k}")))).collect();
    let c = (0..nc)
        .map(|k| b.input(Some(format!("{CONTROLLABLE_PREFIX}c{k}"))))
        .collect();
    (u, c)
}

fn finish_spec(mut b: AigBuilder, bad: Lit) -> SafetySpec {
    b.output(bad, Some("bad".into()));
    crate::aiger::classify_safety_spec(b.finish()).expect("single named output")
}

fn xor(b: &mut AigBuilder, x: Lit, y: Lit) -> Lit {
    let both = b.and(x, y);
    let neither = b.and(x ^ 1, y ^ 1);
    b.and(both ^ 1, neither ^ 1)
}

/// Each controllable `c_k` must echo `u_k` in the same step: bad = OR_k (c_k xor u_k).
/// Every output bit is constrained.
pub fn echo_spec(width: usize) -> SafetySpec {
    let mut b = AigBuilder::new();
    let (u, c) = named_inputs(&mut b, width, width);
    let mut bad = FALSE;
    for k in 0..width {
        let diff = xor(&mut b, u[k], c[k]);
        bad = b.or(bad, diff);
    }
    finish_spec(b, bad)
}

/// `c0` must equal `u0` from `depth` steps earlier (0 before that); a shift
/// register of `depth` latches holds the history.
pub fn delay_spec(depth: usize) -> SafetySpec {
    let mut b = AigBuilder::new();
    let (u, c) = named_inputs(&mut b, 1, 1);
    let regs: Vec<Lit> = (0..depth).map(|k| b.latch(Some(format!("r{k}")))).collect();
    let mut prev = u[0];
    for &r in &regs {
        b.set_next(r, prev);
        prev = r;
    }
    let bad = xor(&mut b, c[0], prev);
    finish_spec(b, bad)
}

/// A token circulates through `len` one-hot latches; whenever it sits at position
/// `watch` and `u0` is high, `c0` must be high.
pub fn token_ring_spec(len: usize, watch: usize) -> SafetySpec {
    let len = len.max(1);
    let mut b = AigBuilder::new();
    let (u, c) = named_inputs(&mut b, 1, 1);
    let ring: Vec<Lit> = (0..len).map(|k| b.latch(Some(format!("t{k}")))).collect();
    let mut any = FALSE;
    for &t in &ring {
        any = b.or(any, t);
    }
    // empty ring (reset) or token leaving the last slot re-enters slot 0
    let enter = b.or(any ^ 1, ring[len - 1]);
    b.set_next(ring[0], enter);
    for k in 1..len {
        b.set_next(ring[k], ring[k - 1]);
    }
    let w = ring[watch % len];
    let need = b.and(w, u[0]);
    let bad = b.and(need, c[0] ^ 1);
    finish_spec(b, bad)
}

/// Saturating counter of `bits` latches incremented when `u0` is high and cleared
/// when `c0` is high; bad when it reaches its maximum. With `grab` set, raising
/// `c0` while `u0` is high is also bad, which makes the spec unrealizable for
/// `bits` = 1.
pub fn counter_spec(bits: usize, grab: bool) -> SafetySpec {
    let mut b = AigBuilder::new();
    let (u, c) = named_inputs(&mut b, 1, 1);
    let ls: Vec<Lit> = (0..bits).map(|k| b.latch(Some(format!("n{k}")))).collect();
    let mut carry = u[0];
    for &l in &ls {
        let sum = xor(&mut b, l, carry);
        let keep = b.and(sum, c[0] ^ 1);
        b.set_next(l, keep);
        carry = b.and(l, carry);
    }
    let mut full = TRUE;
    for &l in &ls {
        full = b.and(full, l);
    }
    let bad = if grab {
        let clash = b.and(u[0], c[0]);
        b.or(full, clash)
    } else {
        full
    };
    finish_spec(b, bad)
}

/// Bad as soon as `u0` rises: no controller can prevent it.
pub fn doomed_spec(extra_latches: usize) -> SafetySpec {
    let mut b = AigBuilder::new();
    let (u, c) = named_inputs(&mut b, 1, 1);
    let mut prev = c[0];
    for k in 0..extra_latches {
        let l = b.latch(Some(format!("d{k}")));
        b.set_next(l, prev);
        prev = l;
    }
    let noise = b.and(prev, u[0]);
    let bad = b.or(u[0], noise);
    finish_spec(b, bad)
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|k| format!("{prefix}{k}")).collect()
}

/// Min-even automaton from explicit per-state (guard, target, priority) lists
/// over APs `i0..`, `o0..` with the `o` block controllable.
fn io_automaton(ni: usize, no: usize, transitions: Vec<Vec<Transition>>) -> ParityAutomaton {
    let mut aps = names("i", ni);
    aps.extend(names("o", no));
    let colors = transitions.iter().flatten().map(|t| t.priority + 1).max().unwrap_or(1);
    ParityAutomaton {
        name: None,
        initial: 0,
        aps,
        controllable: (ni..ni + no).collect(),
        transitions,
        acceptance: Acceptance::min_even(colors),
        normalized: false,
    }
}

/// Guard "o_k == i_k for all k" and its complement.
fn echo_guards(width: usize) -> (Guard, Guard) {
    let mut eq = Guard::tt();
    for k in 0..width {
        let same = Guard::literal(k, true)
            .and(&Guard::literal(width + k, true))
            .or(&Guard::literal(k, false).and(&Guard::literal(width + k, false)));
        eq = eq.and(&same);
    }
    let neq = eq.not();
    (eq, neq)
}

/// Every output `o_k` must equal input `i_k`; a mismatch falls into a rejecting sink.
pub fn echo_automaton(width: usize) -> ParityAutomaton {
    let (eq, neq) = echo_guards(width);
    io_automaton(
        width,
        width,
        vec![
            vec![
                Transition {
                    guard: eq,
                    target: 0,
                    priority: 0,
                },
                Transition {
                    guard: neq,
                    target: 1,
                    priority: 1,
                },
            ],
            vec![Transition {
                guard: Guard::tt(),
                target: 1,
                priority: 1,
            }],
        ],
    )
}

/// `o0` must equal the previous value of `i0` (0 initially).
pub fn delayed_echo_automaton() -> ParityAutomaton {
    // states: 0 = last input low, 1 = last input high, 2 = sink
    let lit = |ap, pos| Guard::literal(ap, pos);
    let step = |expect: bool| {
        let ok = lit(1, expect);
        vec![
            Transition {
                guard: ok.and(&lit(0, false)),
                target: 0,
                priority: 0,
            },
            Transition {
                guard: ok.and(&lit(0, true)),
                target: 1,
                priority: 0,
            },
            Transition {
                guard: lit(1, !expect),
                target: 2,
                priority: 1,
            },
        ]
    };
    io_automaton(
        1,
        1,
        vec![
            step(false),
            step(true),
            vec![Transition {
                guard: Guard::tt(),
                target: 2,
                priority: 1,
            }],
        ],
    )
}

/// `o0` must predict the next value of `i0`: unrealizable.
pub fn prophecy_automaton() -> ParityAutomaton {
    // states: 0 = start, 1 = predicted low, 2 = predicted high, 3 = sink
    let lit = |ap, pos| Guard::literal(ap, pos);
    let guess = |ok_in: Option<bool>| {
        let base = match ok_in {
            None => Guard::tt(),
            Some(v) => lit(0, v),
        };
        let mut ts = vec![
            Transition {
                guard: base.and(&lit(1, false)),
                target: 1,
                priority: 0,
            },
            Transition {
                guard: base.and(&lit(1, true)),
                target: 2,
                priority: 0,
            },
        ];
        if let Some(v) = ok_in {
            ts.push(Transition {
                guard: lit(0, !v),
                target: 3,
                priority: 1,
            });
        }
        ts
    };
    io_automaton(
        1,
        1,
        vec![
            guess(None),
            guess(Some(false)),
            guess(Some(true)),
            vec![Transition {
                guard: Guard::tt(),
                target: 3,
                priority: 1,
            }],
        ],
    )
}

/// Büchi-style request/grant: every request `i0` must eventually be answered by `o0`.
pub fn request_grant_automaton() -> ParityAutomaton {
    // state 0 = idle, 1 = pending; priority 0 marks "nothing pending" steps
    let lit = |ap, pos| Guard::literal(ap, pos);
    let idle = vec![
        Transition {
            guard: lit(0, true).and(&lit(1, false)),
            target: 1,
            priority: 1,
        },
        Transition {
            guard: lit(0, false).or(&lit(1, true)),
            target: 0,
            priority: 0,
        },
    ];
    let pending = vec![
        Transition {
            guard: lit(1, true),
            target: 0,
            priority: 0,
        },
        Transition {
            guard: lit(1, false),
            target: 1,
            priority: 1,
        },
    ];
    io_automaton(1, 1, vec![idle, pending])
}

/// Instance kind of the desk suite.
#[derive(Clone, Debug)]
pub enum Instance {
    Safety(SafetySpec),
    Parity(ParityAutomaton),
}

/// A named desk-suite instance; `constrained_output` names an output bit whose
/// negation must break any correct controller.
#[derive(Clone, Debug)]
pub struct SuiteEntry {
    pub name: String,
    pub instance: Instance,
    pub constrained_output: Option<usize>,
}

impl SuiteEntry {
    pub fn file_name(&self) -> String {
        match self.instance {
            Instance::Safety(_) => format!("{}.aag", self.name),
            Instance::Parity(_) => format!("{}.ehoa", self.name),
        }
    }

    pub fn text(&self) -> String {
        match &self.instance {
            Instance::Safety(s) => print_aag(&s.circuit),
            Instance::Parity(a) => print_ehoa(a),
        }
    }
}

/// Structured families whose output bits are all semantically constrained.
pub fn mutation_families() -> Vec<SuiteEntry> {
    let mut out = Vec::new();
    let mut push = |name: String, instance: Instance, bit: usize| {
        out.push(SuiteEntry {
            name,
            instance,
            constrained_output: Some(bit),
        })
    };
    for w in 1..=4 {
        for bit in 0..w {
            push(format!("echo_w{w}_b{bit}"), Instance::Safety(echo_spec(w)), bit);
        }
    }
    for d in 1..=6 {
        push(format!("delay_d{d}"), Instance::Safety(delay_spec(d)), 0);
    }
    for w in 1..=3 {
        for bit in 0..w {
            push(
                format!("echo_aut_w{w}_b{bit}"),
                Instance::Parity(echo_automaton(w)),
                bit,
            );
        }
    }
    push("delayed_echo".into(), Instance::Parity(delayed_echo_automaton()), 0);
    out
}

/// The desk suite: at least 50 safety specs (at most 20 latches) and at least 50
/// parity automata (at most 8 APs, at most 64 states), seeded.
pub fn desk_suite(seed: u64) -> Vec<SuiteEntry> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    let mut add = |name: String, instance: Instance| {
        out.push(SuiteEntry {
            name,
            instance,
            constrained_output: None,
        })
    };

    // safety
    for w in 1..=4 {
        add(format!("s_echo_{w}"), Instance::Safety(echo_spec(w)));
    }
    for d in 1..=8 {
        add(format!("s_delay_{d}"), Instance::Safety(delay_spec(d)));
    }
    for (len, watch) in [(3, 1), (5, 2), (8, 7), (12, 4), (16, 0), (20, 13)] {
        add(
            format!("s_ring_{len}_{watch}"),
            Instance::Safety(token_ring_spec(len, watch)),
        );
    }
    for bits in 1..=6 {
        add(format!("s_counter_{bits}"), Instance::Safety(counter_spec(bits, false)));
        add(
            format!("s_counter_grab_{bits}"),
            Instance::Safety(counter_spec(bits, true)),
        );
    }
    for extra in [0, 3, 6] {
        add(format!("s_doomed_{extra}"), Instance::Safety(doomed_spec(extra)));
    }
    for k in 0..24 {
        let nu = r.gen_range(1..=3);
        let nc = r.gen_range(1..=3);
        let nl = r.gen_range(0..=8);
        let na = r.gen_range(2..=24);
        add(
            format!("s_random_{k:02}"),
            Instance::Safety(random_safety_spec(&mut r, nu, nc, nl, na)),
        );
    }

    // parity
    for w in 1..=4 {
        add(format!("p_echo_{w}"), Instance::Parity(echo_automaton(w)));
    }
    add("p_delayed_echo".into(), Instance::Parity(delayed_echo_automaton()));
    add("p_prophecy".into(), Instance::Parity(prophecy_automaton()));
    add("p_request_grant".into(), Instance::Parity(request_grant_automaton()));
    for k in 0..45 {
        let aps = r.gen_range(1..=8);
        let states = if k < 15 {
            r.gen_range(1..=8)
        } else {
            r.gen_range(8..=64)
        };
        let shape = AutomatonShape {
            states,
            aps,
            controllable: r.gen_range(0..=aps),
            branching: 6,
            drop: 0.05,
        };
        let mut a = random_automaton(&mut r, shape);
        a.name = Some(format!("p_random_{k:02}"));
        add(format!("p_random_{k:02}"), Instance::Parity(a));
    }
    out
}

/// Writes the desk suite into `dir` (created if missing) and returns the entries.
pub fn write_suite(dir: &Path, seed: u64) -> std::io::Result<Vec<SuiteEntry>> {
    std::fs::create_dir_all(dir)?;
    let suite = desk_suite(seed);
    for e in &suite {
        std::fs::write(dir.join(e.file_name()), e.text())?;
    }
    Ok(suite)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::brute_force_solve;

    #[test]
    fn single_random_vertex_loops() {
        let a = generate_arena(ArenaFamily::Random, 3, 1, 4);
        assert_eq!(a.edges, vec![vec![0]]);
    }

    #[test]
    fn same_seed_same_arena() {
        for fam in [ArenaFamily::Random, ArenaFamily::Ladder, ArenaFamily::Clique] {
            assert_eq!(generate_arena(fam, 11, 9, 5), generate_arena(fam, 11, 9, 5));
        }
    }

    #[test]
    fn ladder_is_solvable_by_brute_force() {
        let a = generate_arena(ArenaFamily::Ladder, 0, 4, 3);
        assert_eq!(brute_force_solve(&a).unwrap().len(), 4);
    }

    #[test]
    fn partitions_are_disjoint_and_cover() {
        let mut r = rng(5);
        for _ in 0..200 {
            let aps = r.gen_range(0..=5);
            let parts = random_partition(&mut r, aps, 7);
            for val in 0..1u64 << aps {
                assert_eq!(parts.iter().filter(|c| c.matches(val)).count(), 1);
            }
        }
    }

    #[test]
    fn random_automata_are_deterministic() {
        let mut r = rng(9);
        for _ in 0..200 {
            let a = small_automaton(&mut r);
            a.validate().unwrap();
            assert!(a.complete().is_ok());
        }
    }

    #[test]
    fn suite_meets_size_bounds() {
        let suite = desk_suite(1);
        let safety: Vec<_> = suite
            .iter()
            .filter_map(|e| match &e.instance {
                Instance::Safety(s) => Some(s),
                _ => None,
            })
            .collect();
        let parity: Vec<_> = suite
            .iter()
            .filter_map(|e| match &e.instance {
                Instance::Parity(a) => Some(a),
                _ => None,
            })
            .collect();
        assert!(safety.len() >= 50 && parity.len() >= 50);
        assert!(safety.iter().all(|s| s.circuit.num_latches() <= 20));
        assert!(parity.iter().all(|a| a.num_aps() <= 8 && a.num_states() <= 64));
    }
}
