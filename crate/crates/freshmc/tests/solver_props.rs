//! The Zielonka solver against the strategy-enumeration reference, plus
//! the region and strategy invariants on solved games.

mod common;

use common::{gen_parity_game, rng, GameCfg};
use freshmc::game::{Owner, ParityGame};
use freshmc::solver::{brute_force_solve, solve, WinningRegions};

fn assert_regions_partition(g: &ParityGame, r: &WinningRegions) {
    assert!(r.defender_set.is_disjoint(&r.attacker_set));
    assert_eq!(r.defender_set.len() + r.attacker_set.len(), g.len());
}

fn assert_strategies_closed(g: &ParityGame, r: &WinningRegions) {
    for (player, set, strategy) in [
        (Owner::Defender, &r.defender_set, &r.defender_strategy),
        (Owner::Attacker, &r.attacker_set, &r.attacker_strategy),
    ] {
        for (&v, &w) in strategy {
            assert!(set.contains(&v), "strategy defined outside the region");
            assert!(set.contains(&w), "strategy leaves the region");
            assert!(g.succ[v].contains(&w), "strategy is not a move");
        }
        // strategies cover every owned, non-dead-end position in the region
        for &v in set.iter() {
            if g.owners[v] == player && !g.succ[v].is_empty() {
                assert!(strategy.contains_key(&v), "no choice at {v}");
            }
        }
    }
}

/// Every cycle in the subgraph restricted to one player's region and
/// strategy has the right parity for that player.
fn assert_strategy_cycles(g: &ParityGame, r: &WinningRegions) {
    for (player, set, strategy) in [
        (Owner::Defender, &r.defender_set, &r.defender_strategy),
        (Owner::Attacker, &r.attacker_set, &r.attacker_strategy),
    ] {
        let restricted: Vec<Vec<usize>> = (0..g.len())
            .map(|v| {
                if !set.contains(&v) {
                    return Vec::new();
                }
                if g.owners[v] == player {
                    strategy.get(&v).map(|&w| vec![w]).unwrap_or_default()
                } else {
                    g.succ[v]
                        .iter()
                        .copied()
                        .filter(|w| set.contains(w))
                        .collect()
                }
            })
            .collect();
        // enumerate simple cycles by DFS from every vertex; games stay small
        fn cycles_from(
            v: usize,
            start: usize,
            restricted: &Vec<Vec<usize>>,
            path: &mut Vec<usize>,
            player: Owner,
            ranks: &[u32],
        ) {
            for &w in &restricted[v] {
                if w == start {
                    let max = path.iter().map(|&u| ranks[u]).max().unwrap();
                    match player {
                        Owner::Defender => assert_eq!(max % 2, 0, "odd cycle {path:?}"),
                        Owner::Attacker => assert_eq!(max % 2, 1, "even cycle {path:?}"),
                    }
                } else if w > start && !path.contains(&w) {
                    path.push(w);
                    cycles_from(w, start, restricted, path, player, ranks);
                    path.pop();
                }
            }
        }
        for v in 0..g.len() {
            let mut path = vec![v];
            cycles_from(v, v, &restricted, &mut path, player, &g.ranks);
        }
    }
}

#[test]
fn zielonka_matches_brute_force_on_random_games() {
    let mut rng = rng(51);
    let cfg = GameCfg::default();
    for round in 0..300 {
        let g = gen_parity_game(&mut rng, &cfg);
        let fast = solve(&g);
        let slow = brute_force_solve(&g).unwrap();
        assert_eq!(fast.defender_set, slow.defender_set, "round {round}");
        assert_eq!(fast.attacker_set, slow.attacker_set, "round {round}");
        assert_regions_partition(&g, &fast);
        assert_strategies_closed(&g, &fast);
        assert_strategies_closed(&g, &slow);
    }
}

#[test]
fn winning_strategies_have_the_right_cycle_parities() {
    let mut rng = rng(52);
    let cfg = GameCfg::default();
    for _ in 0..150 {
        let g = gen_parity_game(&mut rng, &cfg);
        let r = solve(&g);
        assert_strategy_cycles(&g, &r);
    }
}

#[test]
fn solving_is_deterministic() {
    let mut rng = rng(53);
    let cfg = GameCfg::default();
    for _ in 0..50 {
        let g = gen_parity_game(&mut rng, &cfg);
        assert_eq!(solve(&g), solve(&g));
    }
}
