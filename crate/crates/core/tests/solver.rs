//! Solver properties against the joint-state oracle.

mod common;

use cbs_complexity::cbs::{
    empirical_bound_check, low_level_search, mdd_sizes, solve, validate, Constraint, Location, Solution,
    SolveConfig, Splitting,
};
use cbs_complexity::model::{bfs_distance, parse_map, Cell, GridMap, Instance};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn seeded_instance(seed: u64, w: usize, h: usize, k: usize, p: f64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(i) = common::random_instance(&mut rng, w, h, k, p) {
            if common::joint_bfs_makespan(&i).is_some() {
                return i;
            }
        }
    }
}

fn check_tree(sol: &Solution) {
    assert!(sol.stats.generated >= sol.stats.expanded && sol.stats.expanded >= 1);
    let costs: Vec<usize> = sol.expansion_order.iter().map(|&id| sol.tree[id].cost).collect();
    assert!(costs.windows(2).all(|w| w[0] <= w[1]), "expansions out of order: {costs:?}");
    for rec in &sol.tree {
        if let Some(p) = rec.parent {
            assert_eq!(sol.tree[p].constraints + 1, rec.constraints);
            assert_eq!(sol.tree[p].depth + 1, rec.depth);
        }
    }
    assert_eq!(sol.stats.max_depth, sol.tree.iter().map(|r| r.depth).max().unwrap());
}

fn solve_both(instance: &Instance) -> [Solution; 2] {
    [Splitting::Classic, Splitting::Disjoint].map(|s| solve(instance, SolveConfig::new(s)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn two_agents_on_4x4_are_optimal(seed in any::<u64>()) {
        let instance = seeded_instance(seed, 4, 4, 2, 0.2);
        let best = common::joint_bfs_makespan(&instance).unwrap();
        for sol in solve_both(&instance) {
            prop_assert_eq!(sol.cost, best);
            prop_assert_eq!(validate(&instance, &sol.paths), Ok(()));
            check_tree(&sol);
        }
    }

    #[test]
    fn three_agents_on_3x3_are_optimal(seed in any::<u64>()) {
        let instance = seeded_instance(seed, 3, 3, 3, 0.0);
        let best = common::joint_bfs_makespan(&instance).unwrap();
        for sol in solve_both(&instance) {
            prop_assert_eq!(sol.cost, best);
            prop_assert_eq!(validate(&instance, &sol.paths), Ok(()));
            prop_assert!(empirical_bound_check(&instance, &sol.stats, &mdd_sizes(&instance, sol.cost)).is_ok());
            check_tree(&sol);
        }
    }

    #[test]
    fn low_level_matches_bfs_without_constraints(seed in any::<u64>()) {
        let instance = seeded_instance(seed, 6, 6, 1, 0.25);
        let (s, g) = instance.agents()[0];
        let d = bfs_distance(instance.map(), s, g).unwrap();
        let path = low_level_search(&instance, 0, &[], 100).unwrap();
        prop_assert_eq!(path.cost(), d);
        prop_assert!(path.is_well_formed());
    }
}

#[test]
fn blocked_first_step_costs_three() {
    let instance = Instance::new(GridMap::open(3, 3), vec![(Cell::new(0, 0), Cell::new(2, 0))]).unwrap();
    let c = [Constraint::negative(0, Location::Vertex(Cell::new(1, 0)), 1)];
    assert_eq!(low_level_search(&instance, 0, &c, 20).unwrap().cost(), 3);
}

#[test]
fn disjoint_rows_solve_at_the_root() {
    let instance = Instance::new(
        GridMap::open(5, 3),
        vec![(Cell::new(0, 0), Cell::new(4, 0)), (Cell::new(0, 2), Cell::new(2, 2))],
    )
    .unwrap();
    for sol in solve_both(&instance) {
        assert_eq!(sol.cost, 4);
        assert_eq!(sol.stats.generated, 1);
    }
}

#[test]
fn swap_corridor_with_bay_agrees_across_splittings() {
    let map = parse_map("type octile\nheight 3\nwidth 7\nmap\n@@@.@@@\n.......\n@@@@@@@\n").unwrap();
    let instance = Instance::new(map, vec![(Cell::new(0, 1), Cell::new(6, 1)), (Cell::new(6, 1), Cell::new(0, 1))])
        .unwrap();
    let best = common::joint_bfs_makespan(&instance).unwrap();
    for sol in solve_both(&instance) {
        assert_eq!(sol.cost, best);
        validate(&instance, &sol.paths).unwrap();
        check_tree(&sol);
    }
}

#[test]
fn bounds_hold_on_small_fixtures() {
    let open = Instance::new(
        GridMap::open(4, 4),
        vec![(Cell::new(0, 0), Cell::new(3, 3)), (Cell::new(3, 0), Cell::new(0, 3))],
    )
    .unwrap();
    let bottleneck = Instance::new(
        parse_map("type octile\nheight 5\nwidth 5\nmap\n.....\n.....\n@@.@@\n.....\n.....\n").unwrap(),
        vec![
            (Cell::new(0, 0), Cell::new(4, 4)),
            (Cell::new(4, 0), Cell::new(0, 4)),
            (Cell::new(2, 4), Cell::new(2, 0)),
        ],
    )
    .unwrap();
    for instance in [open, bottleneck] {
        for sol in solve_both(&instance) {
            let report = empirical_bound_check(&instance, &sol.stats, &mdd_sizes(&instance, sol.cost)).unwrap();
            assert_eq!(report.checks.len(), 3);
            assert!(report.checks.iter().all(|c| c.margin_log2 >= 0.0));
        }
    }
}
