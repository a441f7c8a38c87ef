//! Explicit-state model checking of controllers against their specifications.
//!
//! The checker shares no code with the game solvers: it only simulates circuits
//! and steps automata.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::aiger::{AigBuilder, AigCircuit, Lit, SafetySpec, Simulator, CONTROLLABLE_PREFIX};
use crate::arena::scatter;
use crate::hoa::ParityAutomaton;

/// Joint latch states are packed into a `u64`.
pub const MAX_JOINT_LATCHES: usize = 64;
pub const MAX_INPUT_BITS: usize = 16;
/// Bound on explored closed-loop (safety) or product (parity) states.
pub const MAX_PRODUCT_STATES: usize = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("signal name mismatch: {0}")]
    NameMismatch(String),
    #[error("controller output {0} would read a signal it drives")]
    CombinationalCycle(String),
    #[error("{what} {got} exceeds the model-checking cap of {cap}")]
    CapExceeded { what: &'static str, got: usize, cap: usize },
    #[error("automaton must be normalized before verification")]
    NotNormalized,
    #[error("witness failed to replay: {0}")]
    WitnessReplay(String),
}

/// Counterexample: the uncontrollable valuations applied step by step.
/// Bit k of a valuation is the k-th uncontrollable input (or AP).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Safety { inputs: Vec<u64> },
    Parity { prefix: Vec<u64>, cycle: Vec<u64> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(Witness),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

fn named_inputs(c: &AigCircuit, role: &str) -> Result<Vec<String>, VerifyError> {
    (0..c.num_inputs())
        .map(|i| {
            c.input_name(i)
                .map(str::to_string)
                .ok_or_else(|| VerifyError::NameMismatch(format!("{role} input {i} is unnamed")))
        })
        .collect()
}

fn named_outputs(c: &AigCircuit, role: &str) -> Result<Vec<String>, VerifyError> {
    (0..c.num_outputs())
        .map(|i| {
            c.output_name(i)
                .map(str::to_string)
                .ok_or_else(|| VerifyError::NameMismatch(format!("{role} output {i} is unnamed")))
        })
        .collect()
}

/// Index of each name of `want` inside `have`, requiring a bijection.
fn match_names(want: &[String], have: &[String], what: &str) -> Result<Vec<usize>, VerifyError> {
    if want.len() != have.len() {
        return Err(VerifyError::NameMismatch(format!(
            "expected {} {what}, controller has {}",
            want.len(),
            have.len()
        )));
    }
    want.iter()
        .map(|w| {
            have.iter()
                .position(|h| h == w)
                .ok_or_else(|| VerifyError::NameMismatch(format!("controller lacks {what} {w:?}")))
        })
        .collect()
}

/// Closes the loop: the spec's controllable inputs are driven by the controller.
///
/// The result's inputs are the spec's uncontrollable inputs (in spec order), its
/// latches are the spec latches followed by the controller latches, and its single
/// output is the bad signal.
pub fn compose(spec: &SafetySpec, controller: &AigCircuit) -> Result<AigCircuit, VerifyError> {
    let ctrl_in = named_inputs(controller, "controller")?;
    let ctrl_out = named_outputs(controller, "controller")?;
    let unc = spec.uncontrollable_names();
    let con = spec.controllable_names();
    for name in &ctrl_in {
        if con.contains(name) || name.starts_with(CONTROLLABLE_PREFIX) {
            return Err(VerifyError::CombinationalCycle(name.clone()));
        }
        if !unc.contains(name) {
            return Err(VerifyError::NameMismatch(format!(
                "controller input {name:?} is not a spec input"
            )));
        }
    }
    let out_of = match_names(&con, &ctrl_out, "output")?;

    let mut b = AigBuilder::new();
    let unc_lits: Vec<Lit> = unc.iter().map(|n| b.input(Some(n.clone()))).collect();
    let spec_latches: Vec<Lit> = spec.circuit.latch_names.iter().map(|n| b.latch(n.clone())).collect();
    let ctrl_latches: Vec<Lit> = (0..controller.num_latches()).map(|_| b.latch(None)).collect();

    let mut cmap: HashMap<u32, Lit> = HashMap::new();
    for (k, &lit) in controller.inputs.iter().enumerate() {
        let pos = unc.iter().position(|n| *n == ctrl_in[k]).unwrap();
        cmap.insert(lit >> 1, unc_lits[pos]);
    }
    for (l, &new) in controller.latches.iter().zip(&ctrl_latches) {
        cmap.insert(l.lit >> 1, new);
    }
    let tr = |map: &HashMap<u32, Lit>, lit: Lit| -> Lit {
        if lit < 2 {
            lit
        } else {
            map[&(lit >> 1)] ^ (lit & 1)
        }
    };
    for g in &controller.ands {
        let lhs = b.and(tr(&cmap, g.rhs0), tr(&cmap, g.rhs1));
        cmap.insert(g.lhs >> 1, lhs);
    }

    let mut smap: HashMap<u32, Lit> = HashMap::new();
    for (k, &i) in spec.uncontrollable.iter().enumerate() {
        smap.insert(spec.circuit.inputs[i] >> 1, unc_lits[k]);
    }
    for (k, &i) in spec.controllable.iter().enumerate() {
        let driver = tr(&cmap, controller.outputs[out_of[k]]);
        smap.insert(spec.circuit.inputs[i] >> 1, driver);
    }
    for (l, &new) in spec.circuit.latches.iter().zip(&spec_latches) {
        smap.insert(l.lit >> 1, new);
    }
    for g in &spec.circuit.ands {
        let lhs = b.and(tr(&smap, g.rhs0), tr(&smap, g.rhs1));
        smap.insert(g.lhs >> 1, lhs);
    }
    for (l, &new) in spec.circuit.latches.iter().zip(&spec_latches) {
        b.set_next(new, tr(&smap, l.next));
    }
    for (l, &new) in controller.latches.iter().zip(&ctrl_latches) {
        b.set_next(new, tr(&cmap, l.next));
    }
    b.output(tr(&smap, spec.circuit.outputs[spec.bad]), Some("bad".into()));
    Ok(b.finish())
}

fn bits(v: u64, n: usize) -> Vec<bool> {
    (0..n).map(|k| v >> k & 1 == 1).collect()
}

fn pack(b: &[bool]) -> u64 {
    b.iter().enumerate().fold(0, |acc, (k, &x)| acc | (u64::from(x) << k))
}

/// Breadth-first reachability over the closed loop; fails with a shortest
/// input sequence that raises bad.
pub fn verify_safety_controller(spec: &SafetySpec, controller: &AigCircuit) -> Result<Verdict, VerifyError> {
    let closed = compose(spec, controller)?;
    let nl = closed.num_latches();
    let ni = closed.num_inputs();
    if nl > MAX_JOINT_LATCHES {
        return Err(VerifyError::CapExceeded {
            what: "joint latch count",
            got: nl,
            cap: MAX_JOINT_LATCHES,
        });
    }
    if ni > MAX_INPUT_BITS {
        return Err(VerifyError::CapExceeded {
            what: "uncontrollable input count",
            got: ni,
            cap: MAX_INPUT_BITS,
        });
    }
    let mut sim = Simulator::new(&closed);
    // state -> (parent state, input used to reach it)
    let mut parent: HashMap<u64, Option<(u64, u64)>> = HashMap::new();
    let mut queue = VecDeque::new();
    parent.insert(0, None);
    queue.push_back(0u64);
    while let Some(state) = queue.pop_front() {
        let latch = bits(state, nl);
        for i in 0..1u64 << ni {
            sim.step(&latch, &bits(i, ni)).expect("sizes follow the circuit");
            if sim.lit(closed.outputs[0]) {
                let mut inputs = vec![i];
                let mut cur = state;
                while let Some((prev, inp)) = parent[&cur] {
                    inputs.push(inp);
                    cur = prev;
                }
                inputs.reverse();
                replay_safety(&closed, &inputs)?;
                return Ok(Verdict::Fail(Witness::Safety { inputs }));
            }
            let next = pack(&sim.next_state());
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(next) {
                e.insert(Some((state, i)));
                queue.push_back(next);
                if parent.len() > MAX_PRODUCT_STATES {
                    return Err(VerifyError::CapExceeded {
                        what: "reachable state count",
                        got: parent.len(),
                        cap: MAX_PRODUCT_STATES,
                    });
                }
            }
        }
    }
    Ok(Verdict::Pass)
}

/// Checks that the witness raises bad exactly at its last step.
fn replay_safety(closed: &AigCircuit, inputs: &[u64]) -> Result<(), VerifyError> {
    let steps: Vec<Vec<bool>> = inputs.iter().map(|&i| bits(i, closed.num_inputs())).collect();
    let trace = closed
        .run(&steps)
        .map_err(|e| VerifyError::WitnessReplay(e.to_string()))?;
    match trace.last() {
        Some(last) if last[0] => Ok(()),
        _ => Err(VerifyError::WitnessReplay(
            "bad not raised at the end of the witness".into(),
        )),
    }
}

/// Re-runs a safety witness on the closed loop of spec and controller.
pub fn replay_safety_witness(spec: &SafetySpec, controller: &AigCircuit, inputs: &[u64]) -> Result<bool, VerifyError> {
    replay_safety(&compose(spec, controller)?, inputs).map(|_| true)
}

struct ParityProduct<'a> {
    aut: &'a ParityAutomaton,
    ctrl: &'a AigCircuit,
    /// controller input k reads uncontrollable bit `ctrl_in_bit[k]`
    ctrl_in_bit: Vec<usize>,
    /// controllable AP index driven by each controller output
    out_ap: Vec<usize>,
    unc_aps: Vec<usize>,
}

impl ParityProduct<'_> {
    /// One closed-loop step: (next latch state, next automaton state, priority).
    fn step(&self, sim: &mut Simulator<'_>, latch: u64, q: usize, input: u64) -> Option<(u64, usize, u32)> {
        let nl = self.ctrl.num_latches();
        let ins: Vec<bool> = self.ctrl_in_bit.iter().map(|&b| input >> b & 1 == 1).collect();
        sim.step(&bits(latch, nl), &ins).expect("sizes follow the circuit");
        let outs = sim.outputs();
        let mut val = scatter(input, &self.unc_aps);
        for (k, &o) in outs.iter().enumerate() {
            if o {
                val |= 1 << self.out_ap[k];
            }
        }
        let (q2, p) = self.aut.step(q, val)?;
        Some((pack(&sim.next_state()), q2, p))
    }
}

/// Product of controller and automaton; passes iff every reachable cycle has an
/// even minimum priority.
pub fn verify_parity_controller(aut: &ParityAutomaton, controller: &AigCircuit) -> Result<Verdict, VerifyError> {
    if !aut.normalized {
        return Err(VerifyError::NotNormalized);
    }
    let unc_aps = aut.uncontrollable();
    let unc_names: Vec<String> = unc_aps.iter().map(|&a| aut.aps[a].clone()).collect();
    let con_names: Vec<String> = aut.controllable.iter().map(|&a| aut.aps[a].clone()).collect();
    let ctrl_in = named_inputs(controller, "controller")?;
    let ctrl_out = named_outputs(controller, "controller")?;
    for name in &ctrl_in {
        if con_names.contains(name) {
            return Err(VerifyError::CombinationalCycle(name.clone()));
        }
    }
    let in_pos = match_names(&ctrl_in, &unc_names, "input")?;
    let out_pos = match_names(&ctrl_out, &con_names, "output")?;
    if unc_aps.len() > MAX_INPUT_BITS {
        return Err(VerifyError::CapExceeded {
            what: "uncontrollable AP count",
            got: unc_aps.len(),
            cap: MAX_INPUT_BITS,
        });
    }
    if controller.num_latches() > MAX_JOINT_LATCHES {
        return Err(VerifyError::CapExceeded {
            what: "controller latch count",
            got: controller.num_latches(),
            cap: MAX_JOINT_LATCHES,
        });
    }
    let product = ParityProduct {
        aut,
        ctrl: controller,
        ctrl_in_bit: in_pos,
        out_ap: out_pos.iter().map(|&k| aut.controllable[k]).collect(),
        unc_aps,
    };

    // explore
    let mut sim = Simulator::new(controller);
    let mut id: HashMap<(u64, usize), usize> = HashMap::new();
    let mut nodes: Vec<(u64, usize)> = Vec::new();
    let mut parent: Vec<Option<(usize, u64)>> = Vec::new();
    let mut edges: Vec<Vec<(usize, u32, u64)>> = Vec::new();
    id.insert((0, aut.initial), 0);
    nodes.push((0, aut.initial));
    parent.push(None);
    edges.push(Vec::new());
    let mut k = 0;
    while k < nodes.len() {
        let (latch, q) = nodes[k];
        for i in 0..1u64 << product.unc_aps.len() {
            let (l2, q2, p) = product.step(&mut sim, latch, q, i).ok_or(VerifyError::NotNormalized)?;
            let fresh = nodes.len();
            let t = *id.entry((l2, q2)).or_insert(fresh);
            if t == fresh {
                if fresh >= MAX_PRODUCT_STATES {
                    return Err(VerifyError::CapExceeded {
                        what: "product state count",
                        got: fresh + 1,
                        cap: MAX_PRODUCT_STATES,
                    });
                }
                nodes.push((l2, q2));
                parent.push(Some((k, i)));
                edges.push(Vec::new());
            }
            edges[k].push((t, p, i));
        }
        k += 1;
    }

    let Some((u, (v, prio, input))) = odd_cycle(&edges) else {
        return Ok(Verdict::Pass);
    };
    // cycle: u -(input)-> v, then back from v to u using edges of priority >= prio
    let back = path_within(&edges, v, u, prio).expect("u and v share a component");
    let mut cycle = vec![input];
    cycle.extend(back);
    let mut prefix = Vec::new();
    let mut cur = u;
    while let Some((p, i)) = parent[cur] {
        prefix.push(i);
        cur = p;
    }
    prefix.reverse();
    replay_parity(&product, &prefix, &cycle)?;
    Ok(Verdict::Fail(Witness::Parity { prefix, cycle }))
}

/// Re-runs a parity witness and checks it closes a cycle with odd minimum priority.
fn replay_parity(product: &ParityProduct<'_>, prefix: &[u64], cycle: &[u64]) -> Result<(), VerifyError> {
    let mut sim = Simulator::new(product.ctrl);
    let mut state = (0u64, product.aut.initial);
    let fail = |m: &str| VerifyError::WitnessReplay(m.to_string());
    for &i in prefix {
        let (l, q, _) = product
            .step(&mut sim, state.0, state.1, i)
            .ok_or_else(|| fail("automaton blocked"))?;
        state = (l, q);
    }
    let start = state;
    let mut min = u32::MAX;
    for &i in cycle {
        let (l, q, p) = product
            .step(&mut sim, state.0, state.1, i)
            .ok_or_else(|| fail("automaton blocked"))?;
        min = min.min(p);
        state = (l, q);
    }
    if state != start {
        return Err(fail("cycle does not return to its start"));
    }
    if min % 2 == 0 {
        return Err(fail("cycle has an even minimum priority"));
    }
    Ok(())
}

/// Public replay entry point for parity witnesses.
pub fn replay_parity_witness(
    aut: &ParityAutomaton,
    controller: &AigCircuit,
    prefix: &[u64],
    cycle: &[u64],
) -> Result<(), VerifyError> {
    let unc_aps = aut.uncontrollable();
    let unc_names: Vec<String> = unc_aps.iter().map(|&a| aut.aps[a].clone()).collect();
    let con_names: Vec<String> = aut.controllable.iter().map(|&a| aut.aps[a].clone()).collect();
    let in_pos = match_names(&named_inputs(controller, "controller")?, &unc_names, "input")?;
    let out_pos = match_names(&named_outputs(controller, "controller")?, &con_names, "output")?;
    let product = ParityProduct {
        aut,
        ctrl: controller,
        ctrl_in_bit: in_pos,
        out_ap: out_pos.iter().map(|&k| aut.controllable[k]).collect(),
        unc_aps,
    };
    replay_parity(&product, prefix, cycle)
}

/// Recursive SCC decomposition. Returns an edge (u -> v) of odd priority that is
/// minimal within a cycle whose other edges all have priority at least as large.
#[allow(clippy::type_complexity)]
fn odd_cycle(edges: &[Vec<(usize, u32, u64)>]) -> Option<(usize, (usize, u32, u64))> {
    let n = edges.len();
    let mut work: Vec<(Vec<usize>, u32)> = vec![((0..n).collect(), 0)];
    let mut member = vec![usize::MAX; n];
    let mut tag = 0usize;
    while let Some((nodes, floor)) = work.pop() {
        tag += 1;
        for &v in &nodes {
            member[v] = tag;
        }
        let allowed = |u: usize, e: &(usize, u32, u64)| -> bool {
            let _ = u;
            member[e.0] == tag && e.1 >= floor
        };
        for scc in tarjan(&nodes, edges, &allowed) {
            // internal edges of this SCC
            let inside: std::collections::HashSet<usize> = scc.iter().copied().collect();
            let mut best: Option<(usize, (usize, u32, u64))> = None;
            for &u in &scc {
                for e in &edges[u] {
                    if allowed(u, e) && inside.contains(&e.0) && best.as_ref().is_none_or(|b| e.1 < b.1 .1) {
                        best = Some((u, *e));
                    }
                }
            }
            let Some((u, e)) = best else { continue };
            if e.1 % 2 == 1 {
                return Some((u, e));
            }
            work.push((scc, e.1 + 1));
        }
    }
    None
}

/// Product edge: (target, priority, input valuation).
type Edge = (usize, u32, u64);

/// Iterative Tarjan over `nodes`, following only edges accepted by `allowed`.
fn tarjan(nodes: &[usize], edges: &[Vec<Edge>], allowed: &dyn Fn(usize, &Edge) -> bool) -> Vec<Vec<usize>> {
    let mut index: HashMap<usize, usize> = HashMap::new();
    let mut low: HashMap<usize, usize> = HashMap::new();
    let mut on_stack: std::collections::HashSet<usize> = Default::default();
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    for &root in nodes {
        if index.contains_key(&root) {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index.insert(root, counter);
        low.insert(root, counter);
        counter += 1;
        stack.push(root);
        on_stack.insert(root);
        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            if *ei < edges[v].len() {
                let e = edges[v][*ei];
                *ei += 1;
                if !allowed(v, &e) {
                    continue;
                }
                let w = e.0;
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(w) {
                    e.insert(counter);
                    low.insert(w, counter);
                    counter += 1;
                    stack.push(w);
                    on_stack.insert(w);
                    call.push((w, 0));
                } else if on_stack.contains(&w) {
                    let lw = index[&w];
                    let lv = low.get_mut(&v).unwrap();
                    *lv = (*lv).min(lw);
                }
            } else {
                call.pop();
                if let Some(&(p, _)) = call.last() {
                    let lv = low[&v];
                    let lp = low.get_mut(&p).unwrap();
                    *lp = (*lp).min(lv);
                }
                if low[&v] == index[&v] {
                    let mut scc = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack.remove(&w);
                        scc.push(w);
                        if w == v {
                            break;
                        }
                    }
                    out.push(scc);
                }
            }
        }
    }
    out
}

/// Shortest path from `from` to `to` using edges of priority at least `floor`;
/// returns the input labels.
fn path_within(edges: &[Vec<(usize, u32, u64)>], from: usize, to: usize, floor: u32) -> Option<Vec<u64>> {
    if from == to {
        return Some(Vec::new());
    }
    let mut prev: HashMap<usize, (usize, u64)> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        for &(w, p, i) in &edges[v] {
            if p < floor || w == from || prev.contains_key(&w) {
                continue;
            }
            prev.insert(w, (v, i));
            if w == to {
                let mut labels = Vec::new();
                let mut cur = to;
                while cur != from {
                    let (pv, inp) = prev[&cur];
                    labels.push(inp);
                    cur = pv;
                }
                labels.reverse();
                return Some(labels);
            }
            queue.push_back(w);
        }
    }
    None
}
