//! Selection, crossover and mutation on binary pump schedules.

use rand::seq::index::sample;
use rand::Rng;

use crate::network::HORIZON_HOURS;
use crate::scenario::GaConfig;
use crate::schedule::PumpSchedule;

/// Selection weight of rank `rank` (1 = best) in a population of `population`.
pub fn rank_weight(rank: usize, population: usize) -> u64 {
    (population - rank) as u64
}

/// Picks a parent among the best `parent_pool` individuals of a ranked
/// population. Returns the 0-based rank, drawn with probability proportional
/// to `population - rank`.
pub fn select_parent<R: Rng + ?Sized>(population: usize, parent_pool: usize, rng: &mut R) -> usize {
    let pool = parent_pool.min(population).max(1);
    let total: u64 = (1..=pool).map(|r| rank_weight(r, population)).sum();
    if total == 0 {
        return 0;
    }
    let mut u = rng.gen_range(0..total);
    for r in 1..=pool {
        let w = rank_weight(r, population);
        if u < w {
            return r - 1;
        }
        u -= w;
    }
    pool - 1
}

/// Number of cut pairs `0 <= p1 < p2 <= 24`.
pub const CUT_PAIRS: usize = (HORIZON_HOURS + 1) * HORIZON_HOURS / 2;

/// Maps `0..CUT_PAIRS` onto the ordered cut pairs.
pub fn cut_pair(index: usize) -> (usize, usize) {
    let mut i = index;
    for p1 in 0..HORIZON_HOURS {
        let n = HORIZON_HOURS - p1;
        if i < n {
            return (p1, p1 + 1 + i);
        }
        i -= n;
    }
    panic!("cut pair index {index} out of range")
}

/// Offspring taking `b` on hours `[p1, p2)` and `a` elsewhere, for every pump.
pub fn crossover_at(a: &PumpSchedule, b: &PumpSchedule, p1: usize, p2: usize) -> PumpSchedule {
    let mut child = a.clone();
    for pump in 0..a.n_pumps() {
        for h in p1..p2 {
            child.set(pump, h, b.get(pump, h));
        }
    }
    child
}

/// Two-point crossover with cut points drawn uniformly over all pairs.
pub fn crossover_two_point<R: Rng + ?Sized>(a: &PumpSchedule, b: &PumpSchedule, rng: &mut R) -> PumpSchedule {
    let (p1, p2) = cut_pair(rng.gen_range(0..CUT_PAIRS));
    crossover_at(a, b, p1, p2)
}

/// With probability `mutation_prob`, overwrites a run of adjacent hours
/// with one random bit for each of a few randomly chosen pumps.
pub fn mutate<R: Rng + ?Sized>(s: &mut PumpSchedule, cfg: &GaConfig, rng: &mut R) {
    if s.n_pumps() == 0 || !rng.gen_bool(cfg.mutation_prob) {
        return;
    }
    let (kmin, kmax) = cfg.mutation_pumps;
    let kmax = kmax.min(s.n_pumps());
    let k = rng.gen_range(kmin.min(kmax)..=kmax);
    let (lmin, lmax) = cfg.mutation_steps;
    for pump in sample(rng, s.n_pumps(), k) {
        let len = rng.gen_range(lmin..=lmax);
        let start = rng.gen_range(0..=HORIZON_HOURS - len);
        let bit = rng.gen_bool(0.5);
        for h in start..start + len {
            s.set(pump, h, bit);
        }
    }
}

/// Uniformly random schedule.
pub fn random_schedule<R: Rng + ?Sized>(n_pumps: usize, rng: &mut R) -> PumpSchedule {
    let rows = (0..n_pumps)
        .map(|_| (0..HORIZON_HOURS).map(|_| rng.gen_bool(0.5)).collect())
        .collect();
    PumpSchedule::new(rows).expect("rows have horizon length")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::keyed_rng;

    #[test]
    fn cut_pairs_enumerate_all() {
        assert_eq!(CUT_PAIRS, 300);
        let pairs: Vec<_> = (0..CUT_PAIRS).map(cut_pair).collect();
        assert_eq!(pairs[0], (0, 1));
        assert_eq!(pairs[23], (0, 24));
        assert_eq!(*pairs.last().unwrap(), (23, 24));
        let mut sorted = pairs.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 300);
    }

    #[test]
    fn crossover_edge_cases() {
        let mut rng = keyed_rng(1, 0, 0, 0);
        let a = random_schedule(3, &mut rng);
        let b = random_schedule(3, &mut rng);
        assert_eq!(crossover_at(&a, &b, 0, 24), b);
        assert_eq!(crossover_two_point(&a, &a, &mut rng), a);
    }

    #[test]
    fn degenerate_pool_always_best() {
        let mut rng = keyed_rng(2, 0, 0, 0);
        for _ in 0..100 {
            assert_eq!(select_parent(500, 1, &mut rng), 0);
        }
    }

    #[test]
    fn zero_mutation_is_identity() {
        let mut rng = keyed_rng(3, 0, 0, 0);
        let s = random_schedule(4, &mut rng);
        let cfg = GaConfig {
            mutation_prob: 0.0,
            ..GaConfig::default()
        };
        let mut m = s.clone();
        mutate(&mut m, &cfg, &mut rng);
        assert_eq!(m, s);
    }
}
