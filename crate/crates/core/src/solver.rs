//! Game solvers: attractors, the safety fixpoint, recursive (Zielonka) and
//! distraction fixpoint iteration parity solvers, and a brute-force oracle.
//!
//! All solvers use min-even priorities. Strategy extraction breaks ties by the
//! lowest successor index.

use std::collections::VecDeque;

use thiserror::Error;

use crate::arena::{GameArena, Player};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("brute force is capped at {max_vertices} vertices and out-degree {max_degree}")]
    CapExceeded { max_vertices: usize, max_degree: usize },
    #[error("no strategy entry for vertex {0} reached by the play")]
    MissingStrategy(usize),
}

pub const BRUTE_FORCE_MAX_VERTICES: usize = 12;
pub const BRUTE_FORCE_MAX_DEGREE: usize = 4;

/// Winning regions and positional strategies.
///
/// `eve_strategy[v]` is set for Eve-owned vertices won by Eve, and symmetrically
/// for Adam.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub winner: Vec<Player>,
    pub eve_strategy: Vec<Option<usize>>,
    pub adam_strategy: Vec<Option<usize>>,
}

impl Solution {
    pub fn region(&self, player: Player) -> Vec<usize> {
        (0..self.winner.len()).filter(|&v| self.winner[v] == player).collect()
    }

    pub fn strategy(&self, player: Player) -> &[Option<usize>] {
        match player {
            Player::Eve => &self.eve_strategy,
            Player::Adam => &self.adam_strategy,
        }
    }

    /// Checks that strategies are defined exactly on owned winning vertices,
    /// point to real successors, and stay in the owner's region.
    pub fn check(&self, arena: &GameArena) -> Result<(), String> {
        if self.winner.len() != arena.len() {
            return Err("winner map is not total".into());
        }
        for v in 0..arena.len() {
            let owner = arena.owner(v);
            let entry = self.strategy(owner)[v];
            let other = self.strategy(owner.opponent())[v];
            if other.is_some() {
                return Err(format!("vertex {v} has a strategy entry for its non-owner"));
            }
            match (self.winner[v] == owner, entry) {
                (true, Some(w)) => {
                    if !arena.successors(v).contains(&w) {
                        return Err(format!("strategy at {v} picks non-successor {w}"));
                    }
                    if self.winner[w] != owner {
                        return Err(format!("strategy at {v} leaves the winning region"));
                    }
                }
                (true, None) => return Err(format!("owned winning vertex {v} lacks a strategy")),
                (false, Some(_)) => return Err(format!("losing vertex {v} has a strategy")),
                (false, None) => {
                    // an opponent-won vertex must not let its owner escape
                    if arena.successors(v).iter().any(|&w| self.winner[w] == owner) {
                        return Err(format!("owner of {v} could escape the opponent's region"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Attractor computation restricted to a subgame, recording for each attracted
/// vertex of `player` a successor of smaller rank.
struct Attractor<'a> {
    arena: &'a GameArena,
    preds: &'a [Vec<usize>],
}

impl<'a> Attractor<'a> {
    /// Returns the attractor and writes strategy choices for attracted
    /// `player` vertices outside `target` into `strategy`.
    fn compute(&self, player: Player, alive: &[bool], target: &[bool], strategy: &mut [Option<usize>]) -> Vec<bool> {
        let n = self.arena.len();
        let mut inside = vec![false; n];
        let mut rank = vec![usize::MAX; n];
        let mut remaining: Vec<usize> = vec![0; n];
        let mut queue = VecDeque::new();
        for v in 0..n {
            if alive[v] && target[v] {
                inside[v] = true;
                rank[v] = 0;
                queue.push_back(v);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &u in &self.preds[v] {
                if !alive[u] || inside[u] {
                    continue;
                }
                let attracted = if self.arena.owner(u) == player {
                    true
                } else {
                    if remaining[u] == 0 {
                        remaining[u] = self.arena.successors(u).iter().filter(|&&w| alive[w]).count() + 1;
                    }
                    remaining[u] -= 1;
                    remaining[u] == 1
                };
                if attracted {
                    inside[u] = true;
                    rank[u] = rank[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        for v in 0..n {
            if inside[v] && !target[v] && self.arena.owner(v) == player {
                strategy[v] = self
                    .arena
                    .successors(v)
                    .iter()
                    .copied()
                    .find(|&w| alive[w] && rank[w] < rank[v]);
                debug_assert!(strategy[v].is_some());
            }
        }
        inside
    }
}

/// Least set containing `target` into which `player` can force the play.
pub fn attractor(arena: &GameArena, player: Player, target: &[bool]) -> Vec<bool> {
    let preds = arena.predecessors();
    let alive = vec![true; arena.len()];
    let mut scratch = vec![None; arena.len()];
    Attractor { arena, preds: &preds }.compute(player, &alive, target, &mut scratch)
}

fn split_strategies(arena: &GameArena, winner: &[Player], strat: &[Option<usize>]) -> Solution {
    let mut eve = vec![None; arena.len()];
    let mut adam = vec![None; arena.len()];
    for v in 0..arena.len() {
        let owner = arena.owner(v);
        if winner[v] == owner {
            let slot = if owner == Player::Eve { &mut eve } else { &mut adam };
            slot[v] = strat[v];
        }
    }
    Solution {
        winner: winner.to_vec(),
        eve_strategy: eve,
        adam_strategy: adam,
    }
}

/// Adam wins exactly the vertices from which Adam can force a visit to `unsafe_set`.
pub fn solve_safety(arena: &GameArena, unsafe_set: &[bool]) -> Solution {
    let preds = arena.predecessors();
    let alive = vec![true; arena.len()];
    let mut strat = vec![None; arena.len()];
    let lost = Attractor { arena, preds: &preds }.compute(Player::Adam, &alive, unsafe_set, &mut strat);
    let winner: Vec<Player> = lost
        .iter()
        .map(|&l| if l { Player::Adam } else { Player::Eve })
        .collect();
    for v in 0..arena.len() {
        let succ = arena.successors(v);
        match (arena.owner(v), winner[v]) {
            (Player::Eve, Player::Eve) => {
                strat[v] = succ.iter().copied().find(|&w| !lost[w]);
            }
            // already unsafe: stay in the losing region when possible
            (Player::Adam, Player::Adam) if unsafe_set[v] => {
                strat[v] = succ.iter().copied().find(|&w| lost[w]).or(Some(succ[0]));
            }
            _ => {}
        }
    }
    split_strategies(arena, &winner, &strat)
}

/// Recursive parity game solving (Zielonka), min-even convention.
pub fn solve_parity_zielonka(arena: &GameArena) -> Solution {
    let preds = arena.predecessors();
    let mut solver = Zielonka {
        attr: Attractor { arena, preds: &preds },
        strat: vec![None; arena.len()],
    };
    let all = vec![true; arena.len()];
    let [eve, _] = solver.solve(all);
    let winner: Vec<Player> = eve
        .iter()
        .map(|&e| if e { Player::Eve } else { Player::Adam })
        .collect();
    split_strategies(arena, &winner, &solver.strat)
}

struct Zielonka<'a> {
    attr: Attractor<'a>,
    strat: Vec<Option<usize>>,
}

impl Zielonka<'_> {
    /// Returns [Eve region, Adam region] of the subgame `alive`.
    fn solve(&mut self, mut alive: Vec<bool>) -> [Vec<bool>; 2] {
        let arena = self.attr.arena;
        let n = arena.len();
        let mut won = [vec![false; n], vec![false; n]];
        loop {
            let Some(p) = (0..n).filter(|&v| alive[v]).map(|v| arena.priority(v)).min() else {
                return won;
            };
            let alpha = Player::of_priority(p);
            let top: Vec<bool> = (0..n).map(|v| alive[v] && arena.priority(v) == p).collect();
            let a = self.attr.compute(alpha, &alive, &top, &mut self.strat);
            let rest: Vec<bool> = (0..n).map(|v| alive[v] && !a[v]).collect();
            let sub = self.solve(rest);
            let opp = alpha.opponent();
            if !sub[opp.index()].iter().any(|&b| b) {
                for v in 0..n {
                    if !alive[v] {
                        continue;
                    }
                    won[alpha.index()][v] = true;
                    if top[v] && arena.owner(v) == alpha {
                        self.strat[v] = arena.successors(v).iter().copied().find(|&w| alive[w]);
                    }
                }
                return won;
            }
            let b = self.attr.compute(opp, &alive, &sub[opp.index()], &mut self.strat);
            for v in 0..n {
                if b[v] {
                    won[opp.index()][v] = true;
                    alive[v] = false;
                }
            }
        }
    }
}

/// Distraction fixpoint iteration, min-even convention.
///
/// Every vertex is assumed won by the parity of its own priority unless it is
/// marked as a distraction. Priorities are swept from least significant (largest)
/// to most significant (smallest), vertices in ascending index order; a vertex of
/// priority p becomes a distraction when its owner's one-step choice under the
/// current assignment disagrees with the parity of p. New distractions at p reset
/// all distractions of larger priority and restart the sweep. The iteration ends
/// on a sweep with no change.
///
/// The final assignment yields the winning regions but not directly a winning
/// strategy, so strategies are extracted afterwards by [`extract_strategy`].
pub fn solve_parity_dfi(arena: &GameArena) -> Solution {
    let n = arena.len();
    let winner = dfi_winners(arena, &vec![true; n]);
    let preds = arena.predecessors();
    let attr = Attractor { arena, preds: &preds };
    let mut strat = vec![None; n];
    for player in [Player::Eve, Player::Adam] {
        let region: Vec<bool> = winner.iter().map(|&w| w == player).collect();
        extract_strategy(&attr, player, region, &mut strat);
    }
    split_strategies(arena, &winner, &strat)
}

/// Distraction fixpoint iteration on the subgame `alive`; entries outside it are
/// meaningless.
fn dfi_winners(arena: &GameArena, alive: &[bool]) -> Vec<Player> {
    let n = arena.len();
    let mut levels: Vec<u32> = (0..n).filter(|&v| alive[v]).map(|v| arena.priority(v)).collect();
    levels.sort_unstable_by(|a, b| b.cmp(a));
    levels.dedup();
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); levels.len()];
    for v in (0..n).filter(|&v| alive[v]) {
        let idx = levels.iter().position(|&p| p == arena.priority(v)).unwrap();
        by_level[idx].push(v);
    }

    let mut distraction = vec![false; n];
    let current = |distraction: &[bool], v: usize| {
        let own = Player::of_priority(arena.priority(v));
        if distraction[v] {
            own.opponent()
        } else {
            own
        }
    };
    let onestep = |distraction: &[bool], v: usize| {
        let owner = arena.owner(v);
        if arena
            .successors(v)
            .iter()
            .any(|&w| alive[w] && current(distraction, w) == owner)
        {
            owner
        } else {
            owner.opponent()
        }
    };

    let mut level = 0;
    while level < levels.len() {
        let parity = Player::of_priority(levels[level]);
        let fresh: Vec<usize> = by_level[level]
            .iter()
            .copied()
            .filter(|&v| !distraction[v] && onestep(&distraction, v) != parity)
            .collect();
        if fresh.is_empty() {
            level += 1;
            continue;
        }
        for v in fresh {
            distraction[v] = true;
        }
        for lower in &by_level[..level] {
            for &v in lower {
                distraction[v] = false;
            }
        }
        level = 0;
    }
    (0..n).map(|v| current(&distraction, v)).collect()
}

/// Writes a winning strategy for `player` on `alive`, a subgame won by `player`
/// from every vertex.
///
/// The smallest priority p is peeled off as in the recursive algorithm. If p
/// favours `player`, its attractor is won by visiting p infinitely often or by
/// leaving it for good. Otherwise, the opponent's attractor of p is removed, the
/// remaining subgame is solved by distraction fixpoint iteration, and the region
/// `player` wins there is handled recursively and then attracted to. Either way
/// the rest is a trap for `player` that is still won everywhere.
fn extract_strategy(attr: &Attractor<'_>, player: Player, mut alive: Vec<bool>, strat: &mut [Option<usize>]) {
    let arena = attr.arena;
    let n = arena.len();
    while let Some(p) = (0..n).filter(|&v| alive[v]).map(|v| arena.priority(v)).min() {
        let top: Vec<bool> = (0..n).map(|v| alive[v] && arena.priority(v) == p).collect();
        let taken = if Player::of_priority(p) == player {
            for v in (0..n).filter(|&v| top[v] && arena.owner(v) == player) {
                strat[v] = arena.successors(v).iter().copied().find(|&w| alive[w]);
            }
            attr.compute(player, &alive, &top, strat)
        } else {
            let mut scratch = vec![None; n];
            let b = attr.compute(player.opponent(), &alive, &top, &mut scratch);
            let rest: Vec<bool> = (0..n).map(|v| alive[v] && !b[v]).collect();
            let won = dfi_winners(arena, &rest);
            let sub: Vec<bool> = (0..n).map(|v| rest[v] && won[v] == player).collect();
            assert!(
                sub.iter().any(|&x| x),
                "region handed to strategy extraction is not won everywhere"
            );
            extract_strategy(attr, player, sub.clone(), strat);
            attr.compute(player, &alive, &sub, strat)
        };
        for v in 0..n {
            alive[v] &= !taken[v];
        }
    }
}

/// Winner of every vertex by exhaustive enumeration of positional strategy pairs.
///
/// Eve wins `v` iff some Eve strategy makes every Adam strategy produce a play
/// from `v` whose cycle has an even minimum priority.
pub fn brute_force_solve(arena: &GameArena) -> Result<Vec<Player>, SolverError> {
    let n = arena.len();
    if n > BRUTE_FORCE_MAX_VERTICES || arena.edges.iter().any(|e| e.len() > BRUTE_FORCE_MAX_DEGREE) {
        return Err(SolverError::CapExceeded {
            max_vertices: BRUTE_FORCE_MAX_VERTICES,
            max_degree: BRUTE_FORCE_MAX_DEGREE,
        });
    }
    let eve: Vec<usize> = (0..n).filter(|&v| arena.owner(v) == Player::Eve).collect();
    let adam: Vec<usize> = (0..n).filter(|&v| arena.owner(v) == Player::Adam).collect();
    let all = (1u32 << n) - 1;
    let mut eve_wins = 0u32;
    let mut succ = vec![0usize; n];
    let mut sigma = vec![0usize; eve.len()];
    loop {
        for (k, &v) in eve.iter().enumerate() {
            succ[v] = arena.edges[v][sigma[k]];
        }
        let mut survives = all;
        let mut tau = vec![0usize; adam.len()];
        loop {
            for (k, &v) in adam.iter().enumerate() {
                succ[v] = arena.edges[v][tau[k]];
            }
            survives &= even_cycle_mask(arena, &succ);
            if survives & !eve_wins == 0 || !advance(&mut tau, &adam, arena) {
                break;
            }
        }
        eve_wins |= survives;
        if eve_wins == all || !advance(&mut sigma, &eve, arena) {
            break;
        }
    }
    Ok((0..n)
        .map(|v| {
            if eve_wins >> v & 1 == 1 {
                Player::Eve
            } else {
                Player::Adam
            }
        })
        .collect())
}

/// Mixed-radix increment over strategy choices; false on wrap-around.
fn advance(choice: &mut [usize], owners: &[usize], arena: &GameArena) -> bool {
    for (k, &v) in owners.iter().enumerate() {
        choice[k] += 1;
        if choice[k] < arena.edges[v].len() {
            return true;
        }
        choice[k] = 0;
    }
    false
}

/// Bit v set iff the lasso from v in the functional graph `succ` has an even
/// minimum cycle priority.
fn even_cycle_mask(arena: &GameArena, succ: &[usize]) -> u32 {
    let n = succ.len();
    let mut mask = 0u32;
    for v in 0..n {
        // n steps are enough to land on the cycle
        let mut x = v;
        for _ in 0..n {
            x = succ[x];
        }
        let mut min = arena.priority(x);
        let mut y = succ[x];
        while y != x {
            min = min.min(arena.priority(y));
            y = succ[y];
        }
        if min.is_multiple_of(2) {
            mask |= 1 << v;
        }
    }
    mask
}

/// The unique play induced by two positional strategies, as (prefix, cycle).
///
/// Vertices with a single successor need no strategy entry.
pub fn play(
    arena: &GameArena,
    eve_strategy: &[Option<usize>],
    adam_strategy: &[Option<usize>],
    from: usize,
) -> Result<(Vec<usize>, Vec<usize>), SolverError> {
    let mut seen = vec![usize::MAX; arena.len()];
    let mut path = Vec::new();
    let mut v = from;
    while seen[v] == usize::MAX {
        seen[v] = path.len();
        path.push(v);
        let entry = match arena.owner(v) {
            Player::Eve => eve_strategy.get(v).copied().flatten(),
            Player::Adam => adam_strategy.get(v).copied().flatten(),
        };
        v = match (entry, arena.successors(v)) {
            (Some(w), _) => w,
            (None, [only]) => *only,
            (None, _) => return Err(SolverError::MissingStrategy(v)),
        };
    }
    let cycle = path.split_off(seen[v]);
    Ok((path, cycle))
}
