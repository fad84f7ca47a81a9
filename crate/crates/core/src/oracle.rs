//! Brute-force reference solver for desk-scale instances.
//!
//! Enumerates every assignment and, per facility, every integer start-time
//! tuple in the job windows. Partial tuples that already overload the
//! resource, or whose partial objective cannot beat the best complete tuple,
//! are cut off; both checks are monotone so nothing optimal is skipped. This
//! module shares no search code with [`crate::cumulative`].

use std::collections::HashMap;

use crate::cumulative::SubObjective;
use crate::error::OracleError;
use crate::model::{Assignment, Instance, Objective};

/// Largest `n * m` the oracle accepts.
pub const MAX_VARS: usize = 12;
/// Largest horizon the oracle accepts.
pub const MAX_HORIZON: i64 = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// `None` when infeasible.
    pub optimum: Option<i64>,
    pub assignment: Option<Assignment>,
    /// `(job, start)` pairs of the witness schedule.
    pub starts: Vec<(usize, i64)>,
    /// Complete start tuples (or assignments, for [`oracle_solve`]) examined.
    pub enumerated_count: u64,
}

fn guard(instance: &Instance) -> Result<(), OracleError> {
    let nm = instance.num_jobs() * instance.num_facilities();
    if nm > MAX_VARS {
        return Err(OracleError::TooLarge(format!("n*m = {nm} > {MAX_VARS}")));
    }
    if instance.horizon > MAX_HORIZON {
        return Err(OracleError::TooLarge(format!("horizon {} > {MAX_HORIZON}", instance.horizon)));
    }
    Ok(())
}

struct Enumerator<'a> {
    instance: &'a Instance,
    facility: usize,
    jobs: &'a [usize],
    objective: SubObjective,
    deadlines: bool,
    starts: Vec<i64>,
    best: Option<(i64, Vec<i64>)>,
    count: u64,
}

impl Enumerator<'_> {
    fn overloaded(&self, upto: usize) -> bool {
        let cap = self.instance.facilities[self.facility].capacity;
        let horizon = self.instance.horizon + self.instance.max_proc();
        (0..=horizon).any(|t| {
            let load: i64 = (0..upto)
                .filter(|&k| {
                    let p = self.instance.jobs[self.jobs[k]].proc_time[self.facility];
                    self.starts[k] <= t && t < self.starts[k] + p
                })
                .map(|k| self.instance.jobs[self.jobs[k]].demand[self.facility])
                .sum();
            load > cap
        })
    }

    fn objective_of(&self, upto: usize) -> i64 {
        let i = self.facility;
        let mut value = 0;
        for k in 0..upto {
            let job = &self.instance.jobs[self.jobs[k]];
            let end = self.starts[k] + job.proc_time[i];
            match self.objective {
                SubObjective::Makespan => value = value.max(end),
                SubObjective::Tardiness => value += (end - job.due).max(0),
                SubObjective::Feasibility => {}
            }
        }
        value
    }

    fn run(&mut self, k: usize) {
        if self.objective == SubObjective::Feasibility && self.best.is_some() {
            return;
        }
        if k == self.jobs.len() {
            self.count += 1;
            let v = self.objective_of(k);
            if self.best.as_ref().is_none_or(|(b, _)| v < *b) {
                self.best = Some((v, self.starts.clone()));
            }
            return;
        }
        let job = &self.instance.jobs[self.jobs[k]];
        let lo = job.release.max(0);
        let mut hi = self.instance.horizon;
        if self.deadlines {
            hi = hi.min(job.due - job.proc_time[self.facility]);
        }
        for s in lo..=hi {
            self.starts[k] = s;
            if self.overloaded(k + 1) {
                continue;
            }
            if let Some((b, _)) = &self.best {
                if self.objective != SubObjective::Feasibility && self.objective_of(k + 1) >= *b {
                    continue;
                }
            }
            self.run(k + 1);
        }
    }
}

fn enumerate_facility(
    instance: &Instance,
    facility: usize,
    jobs: &[usize],
    objective: SubObjective,
    deadlines: bool,
) -> OracleResult {
    let cap = instance.facilities[facility].capacity;
    if jobs.iter().any(|&j| instance.jobs[j].demand[facility] > cap) {
        return OracleResult { optimum: None, assignment: None, starts: Vec::new(), enumerated_count: 0 };
    }
    let mut e = Enumerator {
        instance,
        facility,
        jobs,
        objective,
        deadlines,
        starts: vec![0; jobs.len()],
        best: None,
        count: 0,
    };
    e.run(0);
    let count = e.count;
    match e.best {
        Some((v, starts)) => OracleResult {
            optimum: Some(v),
            assignment: None,
            starts: jobs.iter().copied().zip(starts).collect(),
            enumerated_count: count,
        },
        None => OracleResult { optimum: None, assignment: None, starts: Vec::new(), enumerated_count: count },
    }
}

/// Exhaustive optimum of one facility subproblem. Deadlines are enforced for
/// makespan and feasibility, ignored for tardiness.
pub fn oracle_subproblem(
    instance: &Instance,
    facility: usize,
    jobs: &[usize],
    objective: SubObjective,
) -> Result<OracleResult, OracleError> {
    if instance.horizon > MAX_HORIZON {
        return Err(OracleError::TooLarge(format!("horizon {} > {MAX_HORIZON}", instance.horizon)));
    }
    if jobs.len() > MAX_VARS {
        return Err(OracleError::TooLarge(format!("{} jobs", jobs.len())));
    }
    Ok(enumerate_facility(instance, facility, jobs, objective, objective != SubObjective::Tardiness))
}

/// Like [`oracle_subproblem`] for makespan, with deadlines dropped.
pub fn oracle_makespan_without_deadlines(
    instance: &Instance,
    facility: usize,
    jobs: &[usize],
) -> Result<OracleResult, OracleError> {
    if instance.horizon > MAX_HORIZON {
        return Err(OracleError::TooLarge(format!("horizon {} > {MAX_HORIZON}", instance.horizon)));
    }
    Ok(enumerate_facility(instance, facility, jobs, SubObjective::Makespan, false))
}

/// Per-facility subproblem values for every subset of jobs, keyed by
/// `(facility, bitmask)`. `None` marks an infeasible subset.
#[derive(Debug, Clone)]
pub struct SubsetTable {
    pub values: HashMap<(usize, u32), Option<i64>>,
}

impl SubsetTable {
    pub fn build(instance: &Instance) -> Result<SubsetTable, OracleError> {
        guard(instance)?;
        let n = instance.num_jobs();
        let objective = SubObjective::from(instance.objective);
        let mut values = HashMap::new();
        for i in 0..instance.num_facilities() {
            for mask in 0u32..(1 << n) {
                let jobs = mask_jobs(mask, n);
                let r = enumerate_facility(instance, i, &jobs, objective, instance.objective.has_deadlines());
                values.insert((i, mask), r.optimum);
            }
        }
        Ok(SubsetTable { values })
    }

    pub fn get(&self, facility: usize, jobs: &[usize]) -> Option<i64> {
        self.values[&(facility, jobs_mask(jobs))]
    }

    /// Per-facility values of an assignment; `None` if any facility is
    /// infeasible.
    pub fn facility_values(&self, instance: &Instance, a: &Assignment) -> Option<Vec<i64>> {
        a.partition(instance.num_facilities())
            .iter()
            .enumerate()
            .map(|(i, js)| self.get(i, js))
            .collect()
    }

    /// Objective value of a full assignment under the instance objective.
    pub fn assignment_value(&self, instance: &Instance, a: &Assignment) -> Option<i64> {
        let per = self.facility_values(instance, a)?;
        Some(match instance.objective {
            Objective::Makespan => per.into_iter().max().unwrap_or(0),
            Objective::TotalTardiness => per.into_iter().sum(),
            Objective::AssignCost => (0..instance.num_jobs())
                .map(|j| instance.jobs[j].cost[a.facility_of[j]])
                .sum(),
        })
    }
}

pub fn mask_jobs(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&j| mask & (1 << j) != 0).collect()
}

pub fn jobs_mask(jobs: &[usize]) -> u32 {
    jobs.iter().fold(0, |m, &j| m | (1 << j))
}

/// Exact optimum of the whole instance by enumerating all `m^n` assignments.
pub fn oracle_solve(instance: &Instance) -> Result<OracleResult, OracleError> {
    guard(instance)?;
    let n = instance.num_jobs();
    let m = instance.num_facilities();
    let objective = SubObjective::from(instance.objective);
    let mut cache: HashMap<(usize, u32), OracleResult> = HashMap::new();
    let mut best: Option<(i64, Assignment)> = None;
    let mut count = 0;
    for a in Assignment::enumerate(m, n) {
        count += 1;
        let parts = a.partition(m);
        let mut per = Vec::with_capacity(m);
        for (i, js) in parts.iter().enumerate() {
            let r = cache
                .entry((i, jobs_mask(js)))
                .or_insert_with(|| enumerate_facility(instance, i, js, objective, instance.objective.has_deadlines()));
            per.push(r.optimum);
        }
        let Some(per): Option<Vec<i64>> = per.into_iter().collect() else { continue };
        let value = match instance.objective {
            Objective::Makespan => per.into_iter().max().unwrap_or(0),
            Objective::TotalTardiness => per.into_iter().sum(),
            Objective::AssignCost => (0..n).map(|j| instance.jobs[j].cost[a.facility_of[j]]).sum(),
        };
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, a));
        }
    }
    Ok(match best {
        Some((value, a)) => {
            let mut starts = Vec::new();
            for (i, js) in a.partition(m).iter().enumerate() {
                starts.extend(cache[&(i, jobs_mask(js))].starts.iter().copied());
            }
            starts.sort();
            OracleResult { optimum: Some(value), assignment: Some(a), starts, enumerated_count: count }
        }
        None => OracleResult { optimum: None, assignment: None, starts: Vec::new(), enumerated_count: count },
    })
}
