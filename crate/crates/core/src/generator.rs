//! Seeded random instances.
//!
//! The stream is a 64-bit linear congruential generator
//! `state = state * 6364136223846793005 + 1442695040888963407 (mod 2^64)`;
//! a draw from `[lo, hi]` advances the state once and returns
//! `lo + (state >> 33) % (hi - lo + 1)`. Fields are drawn in the order listed
//! on [`random_instance`], so a seed names the same instance in any
//! implementation that follows it.

use crate::model::{Facility, Instance, Job, Objective};

pub const LCG_A: u64 = 6364136223846793005;
pub const LCG_C: u64 = 1442695040888963407;

#[derive(Debug, Clone)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(LCG_A).wrapping_add(LCG_C);
        self.state
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo + 1) as u64;
        lo + ((self.next_u64() >> 33) % span) as i64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorParams {
    pub min_facilities: usize,
    pub max_facilities: usize,
    pub min_jobs: usize,
    pub max_jobs: usize,
    /// When set, the horizon is `min(default, cap)`.
    pub horizon_cap: Option<i64>,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams { min_facilities: 1, max_facilities: 2, min_jobs: 2, max_jobs: 5, horizon_cap: Some(12) }
    }
}

/// Draws, in order: `m`, `n`, then per facility `C_i` in `[1,3]`, then per
/// job `r` in `[0,4]`, per facility `p` in `[1,5]` and `c` in `[1,C_i]`,
/// the due-date multiplier `k` in `[1,3]` giving `d = r + k max_i p`, and per
/// facility a cost in `[1,9]`.
pub fn random_instance(rng: &mut Lcg, params: &GeneratorParams, objective: Objective) -> Instance {
    let m = rng.range(params.min_facilities as i64, params.max_facilities as i64) as usize;
    let n = rng.range(params.min_jobs as i64, params.max_jobs as i64) as usize;
    let facilities: Vec<Facility> =
        (0..m).map(|i| Facility { id: i as i64, capacity: rng.range(1, 3) }).collect();
    let jobs = (0..n)
        .map(|j| {
            let release = rng.range(0, 4);
            let mut proc_time = Vec::with_capacity(m);
            let mut demand = Vec::with_capacity(m);
            for f in &facilities {
                proc_time.push(rng.range(1, 5));
                demand.push(rng.range(1, f.capacity));
            }
            let k = rng.range(1, 3);
            let due = release + k * proc_time.iter().copied().max().unwrap_or(1);
            let cost = (0..m).map(|_| rng.range(1, 9)).collect();
            Job { id: j as i64, release, due, proc_time, demand, cost }
        })
        .collect();
    let mut inst = Instance::new(facilities, jobs, objective);
    if let Some(cap) = params.horizon_cap {
        inst.horizon = inst.horizon.min(cap);
    }
    inst
}

/// Instance number `index` of the corpus for `seed`: each instance gets its
/// own stream seeded by `seed + index`.
pub fn corpus_instance(seed: u64, index: u64, params: &GeneratorParams, objective: Objective) -> Instance {
    random_instance(&mut Lcg::new(seed.wrapping_add(index)), params, objective)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcg_first_step() {
        let mut rng = Lcg::new(0);
        assert_eq!(rng.next_u64(), LCG_C);
        assert_eq!(rng.next_u64(), LCG_C.wrapping_mul(LCG_A).wrapping_add(LCG_C));
    }

    #[test]
    fn draws_respect_bounds() {
        let params = GeneratorParams::default();
        for seed in 0..200 {
            let inst = corpus_instance(seed, 0, &params, Objective::Makespan);
            assert!((1..=2).contains(&inst.num_facilities()));
            assert!((2..=5).contains(&inst.num_jobs()));
            assert!(inst.horizon <= 12);
            for job in &inst.jobs {
                assert!((0..=4).contains(&job.release));
                for (i, f) in inst.facilities.iter().enumerate() {
                    assert!((1..=5).contains(&job.proc_time[i]));
                    assert!((1..=f.capacity).contains(&job.demand[i]));
                    assert!((1..=9).contains(&job.cost[i]));
                }
                assert!(job.due > job.release);
            }
            assert!(inst.is_solvable());
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let params = GeneratorParams::default();
        assert_eq!(
            corpus_instance(7, 3, &params, Objective::TotalTardiness),
            corpus_instance(7, 3, &params, Objective::TotalTardiness)
        );
    }
}
