//! Zielonka-style recursive solver for finite parity games, plus a
//! strategy-enumeration oracle for cross-checking on small games.
//!
//! Winning conditions: an infinite play is won by Defender exactly when
//! the highest rank occurring infinitely often is even; a complete play is
//! won by the opponent of the owner of its last position. Defender plays
//! even ranks. Dead-ends are handled natively: each recursion level first
//! attracts towards the dead-ends of one owner before the usual
//! highest-rank decomposition, so no sink vertices are introduced.

use crate::game::{Owner, ParityGame};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// The partition of positions into winning regions, with positional
/// strategies restricted to each owner's region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WinningRegions {
    pub defender_set: BTreeSet<usize>,
    pub attacker_set: BTreeSet<usize>,
    pub defender_strategy: BTreeMap<usize, usize>,
    pub attacker_strategy: BTreeMap<usize, usize>,
}

impl WinningRegions {
    fn empty() -> Self {
        WinningRegions {
            defender_set: BTreeSet::new(),
            attacker_set: BTreeSet::new(),
            defender_strategy: BTreeMap::new(),
            attacker_strategy: BTreeMap::new(),
        }
    }

    pub fn set_of(&self, player: Owner) -> &BTreeSet<usize> {
        match player {
            Owner::Defender => &self.defender_set,
            Owner::Attacker => &self.attacker_set,
        }
    }

    fn set_mut(&mut self, player: Owner) -> &mut BTreeSet<usize> {
        match player {
            Owner::Defender => &mut self.defender_set,
            Owner::Attacker => &mut self.attacker_set,
        }
    }

    pub fn strategy_of(&self, player: Owner) -> &BTreeMap<usize, usize> {
        match player {
            Owner::Defender => &self.defender_strategy,
            Owner::Attacker => &self.attacker_strategy,
        }
    }

    fn strategy_mut(&mut self, player: Owner) -> &mut BTreeMap<usize, usize> {
        match player {
            Owner::Defender => &mut self.defender_strategy,
            Owner::Attacker => &mut self.attacker_strategy,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("game too large for exhaustive solving: {positions} positions (limit {limit})")]
    TooLarge { positions: usize, limit: usize },
    #[error("strategy space too large for exhaustive solving: about 2^{bits} strategies")]
    TooManyStrategies { bits: u32 },
}

fn rank_player(rank: u32) -> Owner {
    if rank % 2 == 0 {
        Owner::Defender
    } else {
        Owner::Attacker
    }
}

struct Ctx<'a> {
    g: &'a ParityGame,
    preds: Vec<Vec<usize>>,
}

impl<'a> Ctx<'a> {
    fn new(g: &'a ParityGame) -> Ctx<'a> {
        let mut preds = vec![Vec::new(); g.len()];
        for (v, succs) in g.succ.iter().enumerate() {
            for &w in succs {
                preds[w].push(v);
            }
        }
        Ctx { g, preds }
    }

    fn alive_succ_count(&self, alive: &[bool], v: usize) -> usize {
        self.g.succ[v].iter().filter(|&&w| alive[w]).count()
    }

    /// Attractor of `player` towards `seed` within the `alive` subgame.
    /// Opponent-owned vertices without alive successors are attracted
    /// unconditionally (their owner cannot move). Returns the attractor
    /// and the attracting player's strategy on its non-seed part.
    fn attractor(
        &self,
        player: Owner,
        alive: &[bool],
        seed: &[bool],
    ) -> (Vec<bool>, BTreeMap<usize, usize>) {
        let n = self.g.len();
        let mut inset = vec![false; n];
        let mut strategy = BTreeMap::new();
        let mut counts = vec![0usize; n];
        let mut queue: Vec<usize> = Vec::new();
        for v in 0..n {
            if !alive[v] {
                continue;
            }
            counts[v] = self.alive_succ_count(alive, v);
            if seed[v] || (self.g.owners[v] != player && counts[v] == 0) {
                inset[v] = true;
                queue.push(v);
            }
        }
        while let Some(w) = queue.pop() {
            for &v in &self.preds[w] {
                if !alive[v] || inset[v] {
                    continue;
                }
                if self.g.owners[v] == player {
                    inset[v] = true;
                    strategy.insert(v, w);
                    queue.push(v);
                } else {
                    counts[v] -= 1;
                    if counts[v] == 0 {
                        inset[v] = true;
                        queue.push(v);
                    }
                }
            }
        }
        (inset, strategy)
    }

    fn solve_rec(&self, alive: Vec<bool>) -> WinningRegions {
        let live: Vec<usize> = (0..self.g.len()).filter(|&v| alive[v]).collect();
        if live.is_empty() {
            return WinningRegions::empty();
        }

        // Dead-end prepass: the owner of a dead-end loses it.
        for player in [Owner::Attacker, Owner::Defender] {
            let opponent = player.opponent();
            let mut seed = vec![false; self.g.len()];
            let mut any = false;
            for &v in &live {
                if self.g.owners[v] == opponent && self.alive_succ_count(&alive, v) == 0 {
                    seed[v] = true;
                    any = true;
                }
            }
            if any {
                let (attr, strat) = self.attractor(player, &alive, &seed);
                let rest: Vec<bool> = alive
                    .iter()
                    .enumerate()
                    .map(|(v, &a)| a && !attr[v])
                    .collect();
                let mut regions = self.solve_rec(rest);
                for &v in &live {
                    if attr[v] {
                        regions.set_mut(player).insert(v);
                    }
                }
                regions.strategy_mut(player).extend(strat);
                return regions;
            }
        }

        // Classic decomposition on the highest rank. Every alive vertex
        // now has an alive successor, and neither recursion below can
        // create new dead-ends.
        let top = live.iter().map(|&v| self.g.ranks[v]).max().unwrap();
        let player = rank_player(top);
        let opponent = player.opponent();

        let mut seed = vec![false; self.g.len()];
        for &v in &live {
            if self.g.ranks[v] == top {
                seed[v] = true;
            }
        }
        let (attr, attr_strat) = self.attractor(player, &alive, &seed);
        let rest: Vec<bool> = alive
            .iter()
            .enumerate()
            .map(|(v, &a)| a && !attr[v])
            .collect();
        let sub = self.solve_rec(rest);

        if sub.set_of(opponent).is_empty() {
            let mut regions = sub;
            for &v in &live {
                regions.set_mut(player).insert(v);
            }
            regions.strategy_mut(player).extend(attr_strat);
            // top-rank vertices of the winner may move anywhere alive
            for &v in &live {
                if seed[v] && self.g.owners[v] == player {
                    let w = self.g.succ[v].iter().copied().find(|&w| alive[w]).unwrap();
                    regions.strategy_mut(player).entry(v).or_insert(w);
                }
            }
            regions
        } else {
            let mut opp_seed = vec![false; self.g.len()];
            for &v in sub.set_of(opponent) {
                opp_seed[v] = true;
            }
            let (opp_attr, opp_strat) = self.attractor(opponent, &alive, &opp_seed);
            let rest2: Vec<bool> = alive
                .iter()
                .enumerate()
                .map(|(v, &a)| a && !opp_attr[v])
                .collect();
            let mut regions = self.solve_rec(rest2);
            for &v in &live {
                if opp_attr[v] {
                    regions.set_mut(opponent).insert(v);
                }
            }
            regions.strategy_mut(opponent).extend(opp_strat);
            // inside the opponent's sub-region its sub-strategy stays valid
            for (&v, &w) in sub.strategy_of(opponent) {
                if sub.set_of(opponent).contains(&v) {
                    regions.strategy_mut(opponent).entry(v).or_insert(w);
                }
            }
            regions
        }
    }
}

/// Exact winning regions and positional strategies.
pub fn solve(game: &ParityGame) -> WinningRegions {
    // recursion depth can reach the position count; give big games room
    let mut regions = if game.len() > 10_000 {
        std::thread::scope(|scope| {
            std::thread::Builder::new()
                .stack_size(256 << 20)
                .spawn_scoped(scope, || {
                    let ctx = Ctx::new(game);
                    ctx.solve_rec(vec![true; game.len()])
                })
                .expect("spawn solver thread")
                .join()
                .expect("solver thread")
        })
    } else {
        let ctx = Ctx::new(game);
        ctx.solve_rec(vec![true; game.len()])
    };
    // strategies are only reported on the owner's region
    let d = regions.defender_set.clone();
    let a = regions.attacker_set.clone();
    regions.defender_strategy.retain(|v, _| d.contains(v));
    regions.attacker_strategy.retain(|v, _| a.contains(v));
    debug_assert_eq!(d.len() + a.len(), game.len());
    regions
}

/// The winner from the root.
pub fn winner(game: &ParityGame) -> Owner {
    if solve(game).defender_set.contains(&game.root) {
        Owner::Defender
    } else {
        Owner::Attacker
    }
}

// ---------------------------------------------------------------------------
// Strategy-enumeration oracle

const BRUTE_FORCE_LIMIT: usize = 14;

/// Positions from which `player` wins every play consistent with the fixed
/// positional strategy `strategy` (the opponent moves freely).
fn wins_all_plays(
    g: &ParityGame,
    player: Owner,
    strategy: &BTreeMap<usize, usize>,
) -> BTreeSet<usize> {
    let n = g.len();
    // restricted successor relation
    let restricted: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            if g.owners[v] == player {
                strategy.get(&v).map(|&w| vec![w]).unwrap_or_default()
            } else {
                g.succ[v].clone()
            }
        })
        .collect();

    // v is losing when a play from v can reach a dead-end owned by the
    // player, or a reachable cycle whose maximal rank favours the opponent
    let mut losing_seed = vec![false; n];
    for v in 0..n {
        if restricted[v].is_empty() && g.owners[v] == player {
            losing_seed[v] = true;
        }
    }
    // cycles with bad maximal rank: for each rank r of the opponent's
    // parity, look for a cycle within {rank <= r} through a rank-r vertex
    let bad_parity = match player {
        Owner::Defender => 1,
        Owner::Attacker => 0,
    };
    let max_rank = (0..n).map(|v| g.ranks[v]).max().unwrap_or(0);
    for r in 0..=max_rank {
        if r % 2 != bad_parity {
            continue;
        }
        let inside: Vec<bool> = (0..n).map(|v| g.ranks[v] <= r).collect();
        for scc in sccs(&restricted, &inside) {
            let cyclic = scc.len() > 1 || restricted[scc[0]].iter().any(|&w| w == scc[0]);
            if cyclic && scc.iter().any(|&v| g.ranks[v] == r) {
                for &v in &scc {
                    if g.ranks[v] == r {
                        losing_seed[v] = true;
                    }
                }
            }
        }
    }
    // backwards closure: any vertex that can reach a losing seed loses
    let mut can_reach_bad = losing_seed;
    loop {
        let mut changed = false;
        for v in 0..n {
            if !can_reach_bad[v] && restricted[v].iter().any(|&w| can_reach_bad[w]) {
                can_reach_bad[v] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..n).filter(|&v| !can_reach_bad[v]).collect()
}

/// Tarjan's strongly connected components restricted to `inside`.
fn sccs(succ: &[Vec<usize>], inside: &[bool]) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next = 0usize;
    let mut out = Vec::new();

    fn visit(
        v: usize,
        succ: &[Vec<usize>],
        inside: &[bool],
        index: &mut Vec<usize>,
        low: &mut Vec<usize>,
        on_stack: &mut Vec<bool>,
        stack: &mut Vec<usize>,
        next: &mut usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        index[v] = *next;
        low[v] = *next;
        *next += 1;
        stack.push(v);
        on_stack[v] = true;
        for &w in &succ[v] {
            if !inside[w] {
                continue;
            }
            if index[w] == usize::MAX {
                visit(w, succ, inside, index, low, on_stack, stack, next, out);
                low[v] = low[v].min(low[w]);
            } else if on_stack[w] {
                low[v] = low[v].min(index[w]);
            }
        }
        if low[v] == index[v] {
            let mut comp = Vec::new();
            while let Some(w) = stack.pop() {
                on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            out.push(comp);
        }
    }

    for v in 0..n {
        if inside[v] && index[v] == usize::MAX {
            visit(
                v,
                succ,
                inside,
                &mut index,
                &mut low,
                &mut on_stack,
                &mut stack,
                &mut next,
                &mut out,
            );
        }
    }
    out
}

/// Enumerates the positional strategies of one player and collects the
/// union of their all-plays-winning sets, plus one strategy achieving it.
fn brute_force_side(
    g: &ParityGame,
    player: Owner,
) -> Result<(BTreeSet<usize>, BTreeMap<usize, usize>), SolverError> {
    let owned: Vec<usize> = (0..g.len())
        .filter(|&v| g.owners[v] == player && !g.succ[v].is_empty())
        .collect();
    let mut bits = 0f64;
    for &v in &owned {
        bits += (g.succ[v].len() as f64).log2();
    }
    if bits > 24.0 {
        return Err(SolverError::TooManyStrategies { bits: bits as u32 });
    }

    let mut choice = vec![0usize; owned.len()];
    let mut best_set = BTreeSet::new();
    let mut best_strategy = BTreeMap::new();
    let mut union: BTreeSet<usize> = BTreeSet::new();
    loop {
        let strategy: BTreeMap<usize, usize> = owned
            .iter()
            .zip(&choice)
            .map(|(&v, &c)| (v, g.succ[v][c]))
            .collect();
        let wins = wins_all_plays(g, player, &strategy);
        union.extend(wins.iter().copied());
        if wins.len() > best_set.len() {
            best_set = wins;
            best_strategy = strategy;
        }
        // odometer
        let mut i = 0;
        loop {
            if i == owned.len() {
                // a single positional strategy must realize the union
                debug_assert_eq!(best_set, union);
                let strat = best_strategy
                    .into_iter()
                    .filter(|(v, _)| union.contains(v))
                    .collect();
                return Ok((union, strat));
            }
            choice[i] += 1;
            if choice[i] < g.succ[owned[i]].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Reference solver: enumerates positional strategies for both players.
/// Rejects games with more than 14 positions.
pub fn brute_force_solve(game: &ParityGame) -> Result<WinningRegions, SolverError> {
    if game.len() > BRUTE_FORCE_LIMIT {
        return Err(SolverError::TooLarge {
            positions: game.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let (defender_set, defender_strategy) = brute_force_side(game, Owner::Defender)?;
    let (attacker_set, attacker_strategy) = brute_force_side(game, Owner::Attacker)?;
    debug_assert!(defender_set.is_disjoint(&attacker_set));
    debug_assert_eq!(defender_set.len() + attacker_set.len(), game.len());
    Ok(WinningRegions {
        defender_set,
        attacker_set,
        defender_strategy,
        attacker_strategy,
    })
}
