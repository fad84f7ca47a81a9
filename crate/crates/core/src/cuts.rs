//! Benders cuts generated from facility subproblem outcomes.
//!
//! Cuts are linear in the master variables. Optimality cuts bound `Mvar(i)` or
//! `Tvar(i)` from below; feasibility cuts forbid a set of jobs from sharing a
//! facility. Supports are reduced greedily by removing one job at a time in
//! ascending job order and re-solving.

use crate::cumulative::{self, FacilitySubproblem, SubObjective};
use crate::error::CutError;
use crate::model::{rat, Assignment, CutTag, Instance, LinearCut, Objective, ScheduleOutcome, VarKey};

/// Deliberate defects for exercising the verification harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Emit the deadline analytic cut with the spread term added instead of
    /// subtracted, and without checking its release-time precondition.
    FlipAnalyticSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CutOptions {
    pub analytic: bool,
    pub strengthen: bool,
    pub multi_pass: bool,
    pub fault: Option<Fault>,
}

impl Default for CutOptions {
    fn default() -> Self {
        CutOptions { analytic: true, strengthen: true, multi_pass: false, fault: None }
    }
}

/// What the cut generators know about one master solution.
#[derive(Debug, Clone, Copy)]
pub struct CutContext<'a> {
    pub instance: &'a Instance,
    pub assignment: &'a Assignment,
    /// One outcome per facility, for the jobs `assignment` puts there.
    pub outcomes: &'a [ScheduleOutcome],
}

impl CutContext<'_> {
    fn value(&self, i: usize) -> Result<i64, CutError> {
        self.outcomes[i].value.ok_or(CutError::NoOptimum(i))
    }
}

fn solve(instance: &Instance, i: usize, jobs: &[usize], objective: SubObjective) -> ScheduleOutcome {
    let sp = FacilitySubproblem::new(instance, i, jobs.to_vec(), objective);
    cumulative::solve_subproblem(&sp).expect("assigned jobs fit the facility capacity")
}

/// Greedy removal loop: drop each job in turn (ascending id) and keep it
/// dropped while `keep` still holds for the reduced set.
fn reduce(jobs: &[usize], multi_pass: bool, mut keep: impl FnMut(&[usize]) -> bool) -> Vec<usize> {
    let mut support = jobs.to_vec();
    loop {
        let mut changed = false;
        let mut k = 0;
        while k < support.len() {
            let mut trial = support.clone();
            trial.remove(k);
            if keep(&trial) {
                support = trial;
                changed = true;
            } else {
                k += 1;
            }
        }
        if !multi_pass || !changed {
            return support;
        }
    }
}

/// Reduces `J_i` to a set whose minimum makespan still equals `M*_i`.
pub fn strengthen_support_makespan(ctx: &CutContext<'_>, i: usize, multi_pass: bool) -> Result<Vec<usize>, CutError> {
    let target = ctx.value(i)?;
    let jobs = ctx.assignment.jobs_on(i);
    Ok(reduce(&jobs, multi_pass, |trial| {
        cumulative::min_makespan_of(ctx.instance, i, trial).value == Some(target)
    }))
}

/// Reduces an infeasible job set on facility `i` to a smaller infeasible set.
pub fn strengthen_support_infeasible(
    instance: &Instance,
    i: usize,
    jobs: &[usize],
    multi_pass: bool,
) -> Vec<usize> {
    let objective = SubObjective::from(instance.objective);
    let objective = if objective == SubObjective::Tardiness { objective } else { SubObjective::Feasibility };
    reduce(jobs, multi_pass, |trial| !solve(instance, i, trial, objective).is_feasible())
}

/// `Mvar(i) >= M* (1 - sum_{j in J'} (1 - X(i,j)))`.
pub fn nogood_makespan_cut(i: usize, support: &[usize], mstar: i64) -> LinearCut {
    nogood(CutTag::NogoodMakespan, VarKey::Mvar(i), i, support, mstar)
}

fn nogood(tag: CutTag, target: VarKey, i: usize, support: &[usize], value: i64) -> LinearCut {
    let mut cut = LinearCut::new(tag);
    cut.add(target, rat(1));
    for &j in support {
        cut.add(VarKey::X(i, j), rat(-value));
    }
    cut.with_rhs(rat(value * (1 - support.len() as i64)))
}

fn spread(values: impl Iterator<Item = i64> + Clone) -> i64 {
    match (values.clone().max(), values.min()) {
        (Some(hi), Some(lo)) => hi - lo,
        _ => 0,
    }
}

/// `target - sum p_ij X(i,j) >= value - sum p_ij - slack`.
fn processing_cut(tag: CutTag, target: VarKey, instance: &Instance, i: usize, jobs: &[usize], value: i64, slack: i64) -> LinearCut {
    let mut cut = LinearCut::new(tag);
    cut.add(target, rat(1));
    let mut total = 0;
    for &j in jobs {
        let p = instance.jobs[j].proc_time[i];
        cut.add(VarKey::X(i, j), rat(-p));
        total += p;
    }
    cut.with_rhs(rat(value - total - slack))
}

/// Analytic makespan cut for zero release times:
/// `Mvar(i) >= M* - sum_{J'} p_ij (1 - X(i,j)) - (max_{J'} d - min_{J'} d)`.
/// Deadlines are taken after capping by the horizon.
pub fn analytic_makespan_cut_deadlines(
    instance: &Instance,
    i: usize,
    support: &[usize],
    mstar: i64,
) -> Result<LinearCut, CutError> {
    if let Some(&j) = support.iter().find(|&&j| instance.jobs[j].release > 0) {
        return Err(CutError::NonzeroRelease(j));
    }
    let d = spread(support.iter().map(|&j| instance.effective_due(i, j)));
    Ok(processing_cut(CutTag::AnalyticDeadline, VarKey::Mvar(i), instance, i, support, mstar, d))
}

/// Analytic makespan cut for release times with non-binding deadlines:
/// `Mvar(i) >= M* - sum_{J'} p_ij (1 - X(i,j)) - (max_{J'} r - min_{J'} r)`.
///
/// A deadline is non-binding when it is at least
/// `max(M*, max_{J'} r) + sum_{J'} p_ij`. When `M*` exceeds
/// `sum p + max r - min r`, the bound would stay positive with every job of
/// `J'` removed, so `min r` is replaced by zero.
pub fn analytic_makespan_cut_releases(
    instance: &Instance,
    i: usize,
    support: &[usize],
    mstar: i64,
) -> Result<LinearCut, CutError> {
    let releases = support.iter().map(|&j| instance.jobs[j].release.max(0));
    let max_r = releases.clone().max().unwrap_or(0);
    let min_r = releases.min().unwrap_or(0);
    let total: i64 = support.iter().map(|&j| instance.jobs[j].proc_time[i]).sum();
    let needed = mstar.max(max_r) + total;
    if let Some(&j) = support.iter().find(|&&j| instance.effective_due(i, j) < needed) {
        return Err(CutError::ActiveDeadline(j));
    }
    let slack = if mstar <= total + max_r - min_r { max_r - min_r } else { max_r };
    Ok(processing_cut(CutTag::AnalyticRelease, VarKey::Mvar(i), instance, i, support, mstar, slack))
}

/// `sum_{j in J'} (1 - X(i,j)) >= 1`.
pub fn feasibility_nogood_cut(i: usize, support: &[usize]) -> LinearCut {
    let mut cut = LinearCut::new(CutTag::FeasibilityNogood);
    for &j in support {
        cut.add(VarKey::X(i, j), rat(-1));
    }
    cut.with_rhs(rat(1 - support.len() as i64))
}

/// The two strengthened nogood cuts for total tardiness. `Z_i` holds the jobs
/// whose individual removal leaves `T*_i` unchanged; the first cut is built on
/// `J_i \ Z_i` with its own re-solved tardiness, the second on all of `J_i`.
pub fn tardiness_nogood_cuts(ctx: &CutContext<'_>, i: usize) -> Result<Vec<LinearCut>, CutError> {
    let tstar = ctx.value(i)?;
    let jobs = ctx.assignment.jobs_on(i);
    let removable: Vec<usize> = jobs
        .iter()
        .copied()
        .filter(|&j| {
            let rest: Vec<usize> = jobs.iter().copied().filter(|&k| k != j).collect();
            solve(ctx.instance, i, &rest, SubObjective::Tardiness).value == Some(tstar)
        })
        .collect();
    let core: Vec<usize> = jobs.iter().copied().filter(|j| !removable.contains(j)).collect();
    let core_value = solve(ctx.instance, i, &core, SubObjective::Tardiness)
        .value
        .expect("a subset of a schedulable set is schedulable");
    Ok(vec![
        nogood(CutTag::NogoodTardiness, VarKey::Tvar(i), i, &core, core_value),
        nogood(CutTag::NogoodTardiness, VarKey::Tvar(i), i, &jobs, tstar),
    ])
}

/// Whether facility `i` runs one unit-demand job at a time for `jobs`.
pub fn is_disjunctive(instance: &Instance, i: usize, jobs: &[usize]) -> bool {
    instance.facilities[i].capacity == 1 && jobs.iter().all(|&j| instance.jobs[j].demand[i] == 1)
}

/// Analytic tardiness cut
/// `Tvar(i) >= M* - sum_{J_i} p_ij (1 - X(i,j)) - max_{J_i} d - max_{J_i} r`,
/// with `M*` the deadline-free minimum makespan of `J_i`. Only produced for
/// disjunctive facilities whose horizon admits a serial schedule of `J_i`;
/// `None` otherwise.
pub fn analytic_tardiness_cut(ctx: &CutContext<'_>, i: usize) -> Option<LinearCut> {
    let inst = ctx.instance;
    let jobs = ctx.assignment.jobs_on(i);
    if jobs.is_empty() || !is_disjunctive(inst, i, &jobs) {
        return None;
    }
    let max_r = jobs.iter().map(|&j| inst.jobs[j].release.max(0)).max()?;
    let max_d = jobs.iter().map(|&j| inst.jobs[j].due).max()?;
    let total: i64 = jobs.iter().map(|&j| inst.jobs[j].proc_time[i]).sum();
    if inst.horizon < max_r + total {
        return None;
    }
    let sp = FacilitySubproblem::new(inst, i, jobs.clone(), SubObjective::Makespan).without_deadlines();
    let mstar = cumulative::solve_subproblem(&sp).ok()?.value?;
    Some(processing_cut(CutTag::AnalyticTardiness, VarKey::Tvar(i), inst, i, &jobs, mstar, max_d + max_r))
}

/// All cuts for facility `i` under the instance objective. Trivial cuts are
/// dropped.
pub fn facility_cuts(ctx: &CutContext<'_>, i: usize, options: &CutOptions) -> Vec<LinearCut> {
    let inst = ctx.instance;
    let jobs = ctx.assignment.jobs_on(i);
    let outcome = &ctx.outcomes[i];
    let mut cuts = Vec::new();
    if !outcome.is_feasible() {
        let support = if options.strengthen {
            strengthen_support_infeasible(inst, i, &jobs, options.multi_pass)
        } else {
            jobs.clone()
        };
        cuts.push(feasibility_nogood_cut(i, &support));
        return cuts;
    }
    let value = outcome.value.expect("feasible outcome has a value");
    match inst.objective {
        Objective::AssignCost => {}
        Objective::Makespan => {
            let support = if options.strengthen {
                strengthen_support_makespan(ctx, i, options.multi_pass).expect("feasible")
            } else {
                jobs.clone()
            };
            cuts.push(nogood_makespan_cut(i, &support, value));
            if options.analytic {
                cuts.extend(analytic_makespan_cut_deadlines(inst, i, &support, value).ok());
                cuts.extend(analytic_makespan_cut_releases(inst, i, &support, value).ok());
            }
            if options.fault == Some(Fault::FlipAnalyticSign) {
                let d = spread(support.iter().map(|&j| inst.effective_due(i, j)));
                cuts.push(processing_cut(CutTag::AnalyticDeadline, VarKey::Mvar(i), inst, i, &support, value, -d));
            }
        }
        Objective::TotalTardiness => {
            if options.strengthen {
                cuts.extend(tardiness_nogood_cuts(ctx, i).expect("feasible"));
            } else {
                cuts.push(nogood(CutTag::NogoodTardiness, VarKey::Tvar(i), i, &jobs, value));
            }
            if options.analytic {
                cuts.extend(analytic_tardiness_cut(ctx, i));
            }
        }
    }
    cuts.retain(|c| !c.is_trivial());
    cuts
}

/// Solves every facility subproblem for `assignment`, in facility order.
pub fn facility_outcomes(instance: &Instance, assignment: &Assignment) -> Vec<ScheduleOutcome> {
    let objective = SubObjective::from(instance.objective);
    assignment
        .partition(instance.num_facilities())
        .iter()
        .enumerate()
        .map(|(i, js)| solve(instance, i, js, objective))
        .collect()
}
