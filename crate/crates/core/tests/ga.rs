mod common;

use std::collections::HashMap;

use mei::ga::operators::{crossover_at, cut_pair, CUT_PAIRS};
use mei::ga::{crossover_two_point, evolve, init_population, mutate, select_parent, Evaluator};
use mei::scenario::GaConfig;
use mei::PumpSchedule;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn small_cfg() -> GaConfig {
    GaConfig {
        population: 16,
        generations: 4,
        parent_pool: 8,
        elites: 2,
        ..desk_spec().ga
    }
}

#[test]
fn parent_selection_follows_rank_weights() {
    let (population, pool) = (100, 50);
    let draws = 200_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut counts = vec![0usize; pool];
    for _ in 0..draws {
        counts[select_parent(population, pool, &mut rng)] += 1;
    }
    let total: f64 = (1..=pool).map(|r| (population - r) as f64).sum();
    for (i, &c) in counts.iter().enumerate() {
        let p = (population - (i + 1)) as f64 / total;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        assert!((c as f64 - draws as f64 * p).abs() < 5.0 * sd, "rank {}: {c}", i + 1);
    }
}

#[test]
fn single_parent_pool_always_picks_the_best() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!((0..100).all(|_| select_parent(100, 1, &mut rng) == 0));
}

/// Exact distribution of the number of flipped entries when mutating an
/// all-off schedule with `n_pumps >= 4` pumps.
fn mutation_distance_distribution(cfg: &GaConfig) -> Vec<f64> {
    let (lmin, lmax) = cfg.mutation_steps;
    let (kmin, kmax) = cfg.mutation_pumps;
    // one pump: 0 with probability 1/2, otherwise the run length
    let mut one = vec![0.0; lmax + 1];
    one[0] += 0.5;
    for l in lmin..=lmax {
        one[l] += 0.5 / (lmax - lmin + 1) as f64;
    }
    let mut dist = vec![0.0; kmax * lmax + 1];
    let mut conv = vec![1.0];
    for k in 1..=kmax {
        let mut next = vec![0.0; conv.len() + lmax];
        for (a, pa) in conv.iter().enumerate() {
            for (b, pb) in one.iter().enumerate() {
                next[a + b] += pa * pb;
            }
        }
        conv = next;
        if k >= kmin {
            for (d, p) in conv.iter().enumerate() {
                dist[d] += cfg.mutation_prob * p / (kmax - kmin + 1) as f64;
            }
        }
    }
    dist[0] += 1.0 - cfg.mutation_prob;
    dist
}

#[test]
fn mutation_distance_matches_enumeration() {
    let cfg = desk_spec().ga;
    let expected = mutation_distance_distribution(&cfg);
    assert!((expected.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let base = PumpSchedule::all(4, false);
    let draws = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for _ in 0..draws {
        let mut s = base.clone();
        mutate(&mut s, &cfg, &mut rng);
        *counts.entry(s.hamming(&base)).or_default() += 1;
    }
    assert!(counts.keys().all(|&d| d < expected.len() && expected[d] > 0.0));
    for (d, &p) in expected.iter().enumerate() {
        let c = *counts.get(&d).unwrap_or(&0) as f64;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt().max(1.0);
        assert!((c - draws as f64 * p).abs() < 5.0 * sd, "distance {d}: {c} vs {}", draws as f64 * p);
    }
}

#[test]
fn mutation_can_be_disabled() {
    let cfg = GaConfig {
        mutation_prob: 0.0,
        ..desk_spec().ga
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = desk_good_schedule();
    for _ in 0..100 {
        let mut m = s.clone();
        mutate(&mut m, &cfg, &mut rng);
        assert_eq!(m, s);
    }
}

#[test]
fn cut_pairs_cover_every_window_once() {
    let pairs: Vec<(usize, usize)> = (0..CUT_PAIRS).map(cut_pair).collect();
    let mut sorted = pairs.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), CUT_PAIRS);
    assert!(pairs.iter().all(|&(a, b)| a < b && b <= 24));
}

#[test]
fn crossover_swaps_one_window_on_every_pump() {
    let zeros = PumpSchedule::all(3, false);
    let ones = PumpSchedule::all(3, true);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..500 {
        let child = crossover_two_point(&zeros, &ones, &mut rng);
        let first = child.row(0).to_vec();
        let on: Vec<usize> = (0..24).filter(|&h| first[h]).collect();
        assert!(!on.is_empty());
        assert_eq!(on.last().unwrap() - on[0] + 1, on.len());
        assert!(child.rows().iter().all(|r| *r == first));
    }
    assert_eq!(crossover_at(&zeros, &ones, 3, 7).on_count(), 3 * 4);
}

proptest! {
    #[test]
    fn crossover_of_identical_parents_is_identity(rows in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 24), 1..5), seed in any::<u64>()) {
        let s = PumpSchedule::new(rows).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(crossover_two_point(&s, &s, &mut rng), s);
    }

    #[test]
    fn schedule_text_round_trips(rows in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 24), 1..6)) {
        let s = PumpSchedule::new(rows).unwrap();
        prop_assert_eq!(s.to_string().parse::<PumpSchedule>().unwrap(), s);
    }

    #[test]
    fn mutation_changes_at_most_one_run_per_pump(seed in any::<u64>()) {
        let cfg = desk_spec().ga;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = desk_good_schedule();
        let mut m = s.clone();
        mutate(&mut m, &cfg, &mut rng);
        prop_assert!(m.hamming(&s) <= 4 * 6);
        for p in 0..s.n_pumps() {
            let changed: Vec<usize> = (0..24).filter(|&h| m.get(p, h) != s.get(p, h)).collect();
            if let (Some(a), Some(b)) = (changed.first(), changed.last()) {
                prop_assert!(b - a < 6);
            }
        }
    }
}

#[test]
fn evolution_is_independent_of_thread_count() {
    let net = desk();
    let spec = desk_spec();
    let prices = spec.active_prices().unwrap();
    let cfg = small_cfg();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| evolve(&net, prices, &cfg, 3).unwrap())
    };
    let one = run(1);
    let two = run(2);
    assert_eq!(one.best.schedule, two.best.schedule);
    assert_eq!(one.history.len(), cfg.generations);
    for (a, b) in one.history.iter().zip(&two.history) {
        assert_eq!(a.best.total.to_bits(), b.best.total.to_bits());
        assert_eq!(a.mean_total.to_bits(), b.mean_total.to_bits());
    }
    assert!(one.history.windows(2).all(|w| w[1].best.total <= w[0].best.total));
    assert_eq!(one.population.len(), cfg.population);
}

#[test]
fn initial_population_is_feasible_and_reproducible() {
    let net = desk();
    let spec = desk_spec();
    let prices = spec.active_prices().unwrap();
    let cfg = small_cfg();
    let eval = Evaluator::new(&net, prices, &cfg).unwrap();
    let a = init_population(&eval, 8).unwrap();
    let b = init_population(&eval, 8).unwrap();
    assert_eq!(a.len(), cfg.population);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.schedule, y.schedule);
        assert!(eval.simulate(&x.schedule).feasible);
        let f = x.fitness;
        assert_eq!(f.total, f.c_elec + f.p_tank + f.p_pressure + f.p_fraction);
    }
}

#[test]
fn single_generation_returns_best_initial_schedule() {
    let net = desk();
    let spec = desk_spec();
    let prices = spec.active_prices().unwrap();
    let cfg = GaConfig {
        generations: 1,
        ..small_cfg()
    };
    let eval = Evaluator::new(&net, prices, &cfg).unwrap();
    let init = init_population(&eval, 4).unwrap();
    let best = init
        .iter()
        .min_by(|a, b| a.fitness.total.total_cmp(&b.fitness.total))
        .unwrap();
    let out = evolve(&net, prices, &cfg, 4).unwrap();
    assert_eq!(out.best.fitness.total, best.fitness.total);
    assert_eq!(out.history.len(), 1);
}

#[test]
fn impossible_network_exhausts_the_draw_budget() {
    let mut net = desk();
    // no schedule can keep the upper tank above its floor
    for t in net.tanks.values_mut() {
        t.diameter = 0.5;
    }
    let spec = desk_spec();
    let cfg = GaConfig {
        init_budget_factor: 2,
        ..small_cfg()
    };
    let err = evolve(&net, spec.active_prices().unwrap(), &cfg, 1).unwrap_err().to_string();
    assert!(err.contains("drained") || err.contains("tank"), "{err}");
}
