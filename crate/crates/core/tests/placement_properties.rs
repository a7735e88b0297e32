mod common;

use common::{apply, controllers, naive_cost, random_instance, random_mapping, random_movement};
use dqc_layout::cidq::{CidqList, CostMode};
use dqc_layout::control::QubitControllerMap;
use dqc_layout::oracle::brute_force_placement;
use dqc_layout::placement::{initial_placement, movement_gain, qubit_moving_pass, Movement, PlacementOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mode_strategy() -> impl Strategy<Value = CostMode> {
    prop_oneof![Just(CostMode::Pair), Just(CostMode::PerTarget)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn placement_is_complete_injective_and_monotone(seed in any::<u64>(), k in 1usize..=3, mode in mode_strategy()) {
        let inst = random_instance(seed, 8, k, seed % 2 == 0);
        let opts = PlacementOptions { mode, seed, sweeps: 1 };
        let p = initial_placement(inst.n, &inst.ld, &inst.mc, &inst.topo, &opts).unwrap();
        prop_assert!(p.mapping.is_complete() && p.mapping.is_consistent());
        let ctrl = controllers(&p.mapping, &inst.mc);
        for c in 0..k {
            prop_assert!(ctrl.iter().filter(|&&x| x == c).count() <= inst.mc.capacity(c));
        }
        prop_assert_eq!(p.cost, naive_cost(&inst.ld, &ctrl, &inst.topo, mode));
        prop_assert!(p.cost <= p.stage1_cost);
    }

    #[test]
    fn heuristic_never_beats_the_oracle(seed in any::<u64>(), mode in mode_strategy()) {
        let inst = random_instance(seed, 8, 2, true);
        let p = initial_placement(inst.n, &inst.ld, &inst.mc, &inst.topo, &PlacementOptions { mode, seed, sweeps: 1 }).unwrap();
        let o = brute_force_placement(&inst.ld, &inst.mc, &inst.topo, mode, inst.n).unwrap();
        prop_assert!(p.cost >= o.cost);
        prop_assert_eq!(o.cost, naive_cost(&inst.ld, &o.controllers, &inst.topo, mode));
    }

    #[test]
    fn gain_matches_global_difference(seed in any::<u64>(), k in 2usize..=3, mode in mode_strategy()) {
        let inst = random_instance(seed, 8, k, seed % 3 != 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mq = random_mapping(&mut rng, inst.n, inst.mc.m());
        if let Some(mv) = random_movement(&mut rng, &mq, &inst.mc) {
            let before = naive_cost(&inst.ld, &controllers(&mq, &inst.mc), &inst.topo, mode);
            let mut after = mq.clone();
            apply(&mut after, &inst.mc, &mv);
            let now = naive_cost(&inst.ld, &controllers(&after, &inst.mc), &inst.topo, mode);
            let gain = movement_gain(&mv, &mq, &inst.ld, &inst.mc, &inst.topo, mode).unwrap();
            prop_assert_eq!(gain, before as i64 - now as i64);
        }
    }

    #[test]
    fn pass_log_gains_are_exact(seed in any::<u64>(), k in 2usize..=3, mode in mode_strategy()) {
        let inst = random_instance(seed, 8, k, seed % 2 == 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mq = random_mapping(&mut rng, inst.n, inst.mc.m());
        let ci = rng.random_range(0..k);
        let others: Vec<usize> = (0..k).filter(|&c| c != ci).collect();
        let out = qubit_moving_pass(&mq, ci, &others, &inst.ld, &inst.mc, &inst.topo, mode);
        prop_assert!(out.log.len() <= inst.n);

        let mut cur = mq.clone();
        let mut cost = naive_cost(&inst.ld, &controllers(&cur, &inst.mc), &inst.topo, mode);
        let start = cost;
        let mut locked = vec![false; inst.n];
        for applied in &out.log {
            match applied.movement {
                Movement::Relocate { q, from, to } => {
                    prop_assert_eq!(from, ci);
                    prop_assert!(others.contains(&to));
                    prop_assert!(!locked[q]);
                    locked[q] = true;
                    cur.relocate(q, applied.slot.unwrap()).unwrap();
                }
                Movement::Exchange { a, b } => {
                    prop_assert!(!locked[a] && !locked[b]);
                    locked[a] = true;
                    locked[b] = true;
                    cur.exchange(a, b).unwrap();
                }
            }
            prop_assert!(cur.is_consistent());
            let now = naive_cost(&inst.ld, &controllers(&cur, &inst.mc), &inst.topo, mode);
            prop_assert_eq!(applied.gain, cost as i64 - now as i64);
            cost = now;
        }
        let returned = naive_cost(&inst.ld, &controllers(&out.mapping, &inst.mc), &inst.topo, mode);
        prop_assert_eq!(returned as i64, start as i64 - out.gain);
        prop_assert!(out.gain >= 0);
    }

    #[test]
    fn oracle_is_invariant_under_relabeling(seed in any::<u64>(), mode in mode_strategy()) {
        let inst = random_instance(seed, 7, 3, false);
        let base = brute_force_placement(&inst.ld, &inst.mc, &inst.topo, mode, inst.n).unwrap().cost;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut qperm: Vec<usize> = (0..inst.n).collect();
        rand::seq::SliceRandom::shuffle(qperm.as_mut_slice(), &mut rng);
        let relabeled = CidqList::from_sets(
            inst.ld.iter().map(|s| (qperm[s.measured], s.targets.iter().map(|&t| qperm[t]).collect::<Vec<_>>())),
        );
        let q = brute_force_placement(&relabeled, &inst.mc, &inst.topo, mode, inst.n).unwrap().cost;
        prop_assert_eq!(q, base);

        let cperm = [2, 0, 1];
        let mc = QubitControllerMap::new(inst.mc.assignment().iter().map(|&c| cperm[c]).collect(), 3).unwrap();
        let c = brute_force_placement(&inst.ld, &mc, &inst.topo.permuted(&cperm), mode, inst.n).unwrap().cost;
        prop_assert_eq!(c, base);
    }
}

#[test]
fn stage_two_never_increases_cost_on_small_instances() {
    for seed in 0..100 {
        let inst = random_instance(seed, 8, 2, true);
        let p = initial_placement(inst.n, &inst.ld, &inst.mc, &inst.topo, &PlacementOptions { seed, ..Default::default() })
            .unwrap();
        assert!(p.cost <= p.stage1_cost, "seed {seed}");
    }
}

#[test]
fn more_sweeps_never_hurt() {
    for seed in 0..50 {
        let inst = random_instance(seed, 8, 3, false);
        let one = initial_placement(inst.n, &inst.ld, &inst.mc, &inst.topo, &PlacementOptions { seed, ..Default::default() })
            .unwrap();
        let three = initial_placement(inst.n, &inst.ld, &inst.mc, &inst.topo, &PlacementOptions { seed, sweeps: 3, ..Default::default() })
            .unwrap();
        assert!(three.cost <= one.cost, "seed {seed}");
    }
}
