//! Exact single-facility cumulative scheduling.
//!
//! Depth-first branch and bound over serial schedule generation: each branch
//! appends one unscheduled job at the earliest start where the resource
//! profile admits it. Every active schedule is reachable this way, and for the
//! regular objectives handled here (makespan, total tardiness, feasibility) an
//! optimal active schedule exists whenever any feasible schedule does.
//!
//! Time-table propagation: before branching, the earliest fitting start of
//! every unscheduled job is computed against the current profile. A job with no
//! fitting start inside its window kills the node, since placing more jobs only
//! removes capacity.

use crate::error::SubproblemError;
use crate::model::{Instance, Objective, ScheduleOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubObjective {
    Makespan,
    Feasibility,
    Tardiness,
}

impl From<Objective> for SubObjective {
    fn from(o: Objective) -> Self {
        match o {
            Objective::Makespan => SubObjective::Makespan,
            Objective::AssignCost => SubObjective::Feasibility,
            Objective::TotalTardiness => SubObjective::Tardiness,
        }
    }
}

/// The scheduling problem left on facility `facility` once `jobs` are fixed
/// to it.
#[derive(Debug, Clone)]
pub struct FacilitySubproblem<'a> {
    pub instance: &'a Instance,
    pub facility: usize,
    pub jobs: Vec<usize>,
    pub objective: SubObjective,
    /// Enforce `s_j <= d_j - p_ij`. Defaults to on for makespan and
    /// feasibility, off for tardiness.
    pub deadlines: bool,
}

impl<'a> FacilitySubproblem<'a> {
    pub fn new(instance: &'a Instance, facility: usize, jobs: Vec<usize>, objective: SubObjective) -> Self {
        FacilitySubproblem {
            instance,
            facility,
            jobs,
            objective,
            deadlines: objective != SubObjective::Tardiness,
        }
    }

    pub fn without_deadlines(mut self) -> Self {
        self.deadlines = false;
        self
    }
}

#[derive(Debug, Clone, Copy)]
struct Task {
    job: usize,
    release: i64,
    latest: i64,
    proc_time: i64,
    demand: i64,
    due: i64,
}

struct Search<'t> {
    tasks: &'t [Task],
    capacity: i64,
    objective: SubObjective,
    profile: Vec<i64>,
    starts: Vec<Option<i64>>,
    best: Option<(i64, Vec<i64>)>,
    floor: i64,
}

impl Search<'_> {
    fn fits(&self, t: i64, task: &Task) -> bool {
        let free = self.capacity - task.demand;
        self.profile[t as usize..(t + task.proc_time) as usize].iter().all(|&u| u <= free)
    }

    fn earliest_fit(&self, task: &Task) -> Option<i64> {
        (task.release..=task.latest).find(|&t| self.fits(t, task))
    }

    fn place(&mut self, k: usize, t: i64, delta: i64) {
        let task = self.tasks[k];
        for u in &mut self.profile[t as usize..(t + task.proc_time) as usize] {
            *u += delta * task.demand;
        }
        self.starts[k] = if delta > 0 { Some(t) } else { None };
    }

    fn value_term(&self, task: &Task, start: i64) -> i64 {
        match self.objective {
            SubObjective::Makespan => start + task.proc_time,
            SubObjective::Tardiness => (start + task.proc_time - task.due).max(0),
            SubObjective::Feasibility => 0,
        }
    }

    fn combine(&self, acc: i64, term: i64) -> i64 {
        match self.objective {
            SubObjective::Makespan => acc.max(term),
            SubObjective::Tardiness => acc + term,
            SubObjective::Feasibility => 0,
        }
    }

    fn done(&self) -> bool {
        match &self.best {
            Some((v, _)) => self.objective == SubObjective::Feasibility || *v <= self.floor,
            None => false,
        }
    }

    fn dfs(&mut self, partial: i64, remaining: usize) {
        if remaining == 0 {
            if self.best.as_ref().is_none_or(|(v, _)| partial < *v) {
                let starts = self.starts.iter().map(|s| s.expect("all placed")).collect();
                self.best = Some((partial, starts));
            }
            return;
        }
        let mut fits = Vec::with_capacity(remaining);
        let mut bound = partial;
        for k in 0..self.tasks.len() {
            if self.starts[k].is_some() {
                continue;
            }
            let task = self.tasks[k];
            match self.earliest_fit(&task) {
                Some(t) => {
                    bound = self.combine(bound, self.value_term(&task, t));
                    fits.push((k, t));
                }
                None => return,
            }
        }
        if let Some((v, _)) = &self.best {
            if bound >= *v {
                return;
            }
        }
        // tasks are pre-sorted by (due, job), so `fits` is in branching order
        for (k, t) in fits {
            self.place(k, t, 1);
            let term = self.value_term(&self.tasks[k], t);
            self.dfs(self.combine(partial, term), remaining - 1);
            self.place(k, t, -1);
            if self.done() {
                return;
            }
        }
    }
}

/// Solves one facility subproblem to proven optimality (or infeasibility).
pub fn solve_subproblem(sp: &FacilitySubproblem<'_>) -> Result<ScheduleOutcome, SubproblemError> {
    let inst = sp.instance;
    let i = sp.facility;
    let capacity = inst.facilities[i].capacity;
    let mut tasks = Vec::with_capacity(sp.jobs.len());
    for &j in &sp.jobs {
        let job = &inst.jobs[j];
        if job.demand[i] > capacity {
            if sp.objective == SubObjective::Tardiness {
                return Err(SubproblemError::DemandExceedsCapacity { job: j, demand: job.demand[i], capacity });
            }
            return Ok(ScheduleOutcome::infeasible());
        }
        let release = job.release.max(0);
        let latest = inst.latest_start(i, j, sp.deadlines);
        if latest < release {
            return Ok(ScheduleOutcome::infeasible());
        }
        tasks.push(Task {
            job: j,
            release,
            latest,
            proc_time: job.proc_time[i].max(0),
            demand: job.demand[i].max(0),
            due: job.due,
        });
    }
    if tasks.is_empty() {
        return Ok(ScheduleOutcome::optimal(0, Vec::new()));
    }
    tasks.sort_by_key(|t| (t.due, t.job));

    let span = tasks.iter().map(|t| t.latest + t.proc_time).max().unwrap_or(0).max(0) as usize + 1;
    let floor = match sp.objective {
        SubObjective::Makespan => {
            let energy: i64 = tasks.iter().map(|t| t.proc_time * t.demand).sum();
            let by_energy = (energy + capacity - 1) / capacity;
            let by_job = tasks.iter().map(|t| t.release + t.proc_time).max().unwrap_or(0);
            by_energy.max(by_job)
        }
        SubObjective::Tardiness | SubObjective::Feasibility => 0,
    };
    let mut search = Search {
        tasks: &tasks,
        capacity,
        objective: sp.objective,
        profile: vec![0; span],
        starts: vec![None; tasks.len()],
        best: None,
        floor,
    };
    search.dfs(0, tasks.len());
    Ok(match search.best {
        Some((value, starts)) => {
            let mut pairs: Vec<(usize, i64)> = tasks.iter().zip(starts).map(|(t, s)| (t.job, s)).collect();
            pairs.sort();
            ScheduleOutcome::optimal(value, pairs)
        }
        None => ScheduleOutcome::infeasible(),
    })
}

/// Minimum makespan of `subset` on `facility`, with deadlines enforced when
/// the instance objective has them.
pub fn min_makespan_of(instance: &Instance, facility: usize, subset: &[usize]) -> ScheduleOutcome {
    let mut sp = FacilitySubproblem::new(instance, facility, subset.to_vec(), SubObjective::Makespan);
    sp.deadlines = instance.objective.has_deadlines();
    solve_subproblem(&sp).expect("makespan subproblems never error")
}

/// Checks a schedule against windows and capacity and recomputes its value.
/// Returns `None` if any constraint is violated.
pub fn evaluate_schedule(sp: &FacilitySubproblem<'_>, starts: &[(usize, i64)]) -> Option<i64> {
    let inst = sp.instance;
    let i = sp.facility;
    let mut events: Vec<(i64, i64)> = Vec::new();
    let mut value = 0;
    for &j in &sp.jobs {
        let &(_, s) = starts.iter().find(|(k, _)| *k == j)?;
        let job = &inst.jobs[j];
        let p = job.proc_time[i];
        if s < job.release.max(0) || s > inst.latest_start(i, j, sp.deadlines) {
            return None;
        }
        events.push((s, job.demand[i]));
        events.push((s + p, -job.demand[i]));
        value = match sp.objective {
            SubObjective::Makespan => value.max(s + p),
            SubObjective::Tardiness => value + (s + p - job.due).max(0),
            SubObjective::Feasibility => 0,
        };
    }
    // releases before acquisitions at equal times
    events.sort();
    let mut load = 0;
    for (_, delta) in events {
        load += delta;
        if load > inst.facilities[i].capacity {
            return None;
        }
    }
    Some(value)
}
