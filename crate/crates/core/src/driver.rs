//! The Benders loop and its branch-and-check variant.
//!
//! Iterative mode alternates master solves and subproblem solves. The master
//! value `z_k` is a lower bound and the best subproblem value `v_min` an upper
//! bound; the loop stops when the two meet. Branch and check solves the
//! master once and evaluates every integral node inside the tree search.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::time::{Duration, Instant};

use crate::cuts::{self, CutContext, CutOptions, Fault};
use crate::error::{MasterError, SolveError};
use crate::master::{self, IntegerNode, MasterModel, MasterOptions, MasterStatus};
use crate::model::{Assignment, CutTag, Instance, LinearCut, Objective, ScheduleOutcome, Severity, VarKey};
use crate::relax;

/// Slack when rounding a master value up to the integer lower bound.
const ROUND_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Iterative,
    BranchAndCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mode: Mode,
    /// Heuristic assignments whose cuts seed the master.
    pub warm_start_count: usize,
    /// Master solves allowed in iterative mode; `None` means `2^(n m) + 1`.
    pub iteration_budget: Option<usize>,
    pub time_budget: Option<Duration>,
    pub analytic_cuts: bool,
    pub relaxations: bool,
    pub multi_pass_strengthening: bool,
    /// Reduce cut supports by re-solving; off means nogoods on the full `J_i`.
    pub strengthen: bool,
    pub fault: Option<Fault>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: Mode::Iterative,
            warm_start_count: 0,
            iteration_budget: None,
            time_budget: None,
            analytic_cuts: true,
            relaxations: true,
            multi_pass_strengthening: false,
            strengthen: true,
            fault: None,
        }
    }
}

impl SolverConfig {
    pub fn cut_options(&self) -> CutOptions {
        CutOptions {
            analytic: self.analytic_cuts,
            strengthen: self.strengthen,
            multi_pass: self.multi_pass_strengthening,
            fault: self.fault,
        }
    }

    /// The iteration cap that applies to `instance`.
    pub fn iteration_cap(&self, instance: &Instance) -> usize {
        self.iteration_budget.unwrap_or_else(|| default_iteration_cap(instance))
    }
}

/// `2^(n m) + 1`, saturating.
pub fn default_iteration_cap(instance: &Instance) -> usize {
    let bits = instance.num_jobs() * instance.num_facilities();
    if bits >= usize::BITS as usize - 1 {
        usize::MAX
    } else {
        (1usize << bits) + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    BudgetExhausted,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "Optimal",
            SolveStatus::Infeasible => "Infeasible",
            SolveStatus::BudgetExhausted => "BudgetExhausted",
        })
    }
}

/// One master solve in iterative mode, or one callback in branch and check.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// Master value (iterative) or tree bound (branch and check).
    pub z: f64,
    /// `ceil(z)`; all optimal values are integers.
    pub lower_bound: i64,
    /// Subproblem value per facility, `None` when infeasible.
    pub v_per_facility: Vec<Option<i64>>,
    /// Aggregate value of the assignment, `None` when some facility is infeasible.
    pub v: Option<i64>,
    pub v_min: Option<i64>,
    pub cuts: BTreeMap<CutTag, usize>,
    pub ms: u128,
}

impl fmt::Display for IterationRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<i64>| v.map_or_else(|| "inf".to_string(), |v| v.to_string());
        let cuts: Vec<String> = self.cuts.iter().map(|(t, c)| format!("{t}:{c}")).collect();
        write!(
            f,
            "{} {} {} {} cuts={} ms={}",
            self.k,
            format_value(self.z),
            opt(self.v),
            opt(self.v_min),
            cuts.join(","),
            self.ms
        )
    }
}

fn format_value(z: f64) -> String {
    if z.is_infinite() {
        if z > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if (z - z.round()).abs() < 1e-6 {
        format!("{}", z.round() as i64)
    } else {
        format!("{z:.6}")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveTrace {
    pub iterations: Vec<IterationRecord>,
    pub master_solves: usize,
    pub master_ms: f64,
    pub subproblem_ms: f64,
    pub total_ms: f64,
}

impl SolveTrace {
    /// One line per record: `k z_k v_k v_min cuts=<tag:count,...> ms=<int>`.
    pub fn to_log(&self) -> String {
        let mut s = String::new();
        for it in &self.iterations {
            writeln!(s, "{it}").expect("writing to a String");
        }
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_log())
    }
}

/// Where a cut came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutEvent {
    Relaxation,
    WarmStart,
    Iteration(usize),
    Callback(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutRecord {
    pub cut: LinearCut,
    pub event: CutEvent,
    /// Facility and generating assignment; `None` for relaxations.
    pub facility: Option<usize>,
    pub anchor: Option<Assignment>,
    /// Subproblem value at the anchor, `None` when infeasible.
    pub facility_value: Option<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbbdSolution {
    pub status: SolveStatus,
    /// Best value found; on `Optimal` this is the optimum.
    pub value: Option<i64>,
    pub lower_bound: Option<i64>,
    pub assignment: Option<Assignment>,
    /// Subproblem outcome per facility for `assignment`.
    pub schedules: Vec<ScheduleOutcome>,
    pub trace: SolveTrace,
    pub cuts: Vec<CutRecord>,
}

/// Value of an assignment given its facility outcomes.
pub fn aggregate(instance: &Instance, assignment: &Assignment, outcomes: &[ScheduleOutcome]) -> Option<i64> {
    let mut values = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        values.push(o.value?);
    }
    Some(match instance.objective {
        Objective::Makespan => values.into_iter().max().unwrap_or(0),
        Objective::TotalTardiness => values.into_iter().sum(),
        Objective::AssignCost => assignment
            .facility_of
            .iter()
            .enumerate()
            .map(|(j, &i)| instance.jobs[j].cost[i])
            .sum(),
    })
}

fn target_of(objective: Objective, i: usize) -> Option<VarKey> {
    match objective {
        Objective::Makespan => Some(VarKey::Mvar(i)),
        Objective::TotalTardiness => Some(VarKey::Tvar(i)),
        Objective::AssignCost => None,
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

/// Cuts for every facility that holds jobs or is infeasible.
fn cuts_for_assignment(
    instance: &Instance,
    assignment: &Assignment,
    outcomes: &[ScheduleOutcome],
    options: &CutOptions,
    event: CutEvent,
    only: impl Fn(usize) -> bool,
) -> Vec<CutRecord> {
    let ctx = CutContext { instance, assignment, outcomes };
    let mut out = Vec::new();
    for i in 0..instance.num_facilities() {
        if !only(i) || (outcomes[i].is_feasible() && assignment.jobs_on(i).is_empty()) {
            continue;
        }
        for cut in cuts::facility_cuts(&ctx, i, options) {
            out.push(CutRecord {
                cut,
                event,
                facility: Some(i),
                anchor: Some(assignment.clone()),
                facility_value: outcomes[i].value,
            });
        }
    }
    out
}

fn greedy_assignment(instance: &Instance) -> Assignment {
    let m = instance.num_facilities();
    let facility_of = (0..instance.num_jobs())
        .map(|j| {
            let job = &instance.jobs[j];
            (0..m)
                .filter(|&i| instance.assignable(i, j))
                .min_by_key(|&i| {
                    let key = if instance.objective == Objective::AssignCost { job.cost[i] } else { job.proc_time[i] };
                    (key, i)
                })
                .unwrap_or(0)
        })
        .collect();
    Assignment::new(facility_of)
}

fn next_assignable(instance: &Instance, j: usize, from: usize) -> usize {
    let m = instance.num_facilities();
    (1..=m).map(|s| (from + s) % m).find(|&i| instance.assignable(i, j)).unwrap_or(from)
}

/// Heuristic assignments for seeding: the greedy one (cheapest facility for
/// the cost objective, fastest otherwise), then successive single-job moves to
/// the next assignable facility, cycling through the jobs.
pub fn warm_start_assignments(instance: &Instance, count: usize) -> Vec<Assignment> {
    let mut out: Vec<Assignment> = Vec::new();
    if count == 0 || instance.num_jobs() == 0 {
        return out;
    }
    let mut current = greedy_assignment(instance);
    out.push(current.clone());
    for t in 1..count {
        let j = (t - 1) % instance.num_jobs();
        current.facility_of[j] = next_assignable(instance, j, current.facility_of[j]);
        if !out.contains(&current) {
            out.push(current.clone());
        }
    }
    out
}

/// Cuts generated in advance from [`warm_start_assignments`].
pub fn warm_start(instance: &Instance, config: &SolverConfig) -> Vec<CutRecord> {
    let options = config.cut_options();
    warm_start_assignments(instance, config.warm_start_count)
        .iter()
        .flat_map(|a| {
            let outcomes = cuts::facility_outcomes(instance, a);
            cuts_for_assignment(instance, a, &outcomes, &options, CutEvent::WarmStart, |_| true)
        })
        .collect()
}

fn check_instance(instance: &Instance) -> Result<(), SolveError> {
    let errors: Vec<String> = instance
        .validate()
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .map(|d| d.to_string())
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(SolveError::InvalidInstance(errors.join("; ")))
    }
}

struct Setup {
    model: MasterModel,
    records: Vec<CutRecord>,
}

/// Builds the master with relaxations and warm-start cuts, or reports that
/// some job fits no facility.
fn setup(instance: &Instance, config: &SolverConfig) -> Result<Option<Setup>, SolveError> {
    check_instance(instance)?;
    let mut model = match master::build_master(instance, instance.objective) {
        Ok(m) => m,
        Err(MasterError::Unassignable(_)) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut records = Vec::new();
    if config.relaxations {
        for cut in relax::relaxations_for(instance) {
            records.push(CutRecord { cut, event: CutEvent::Relaxation, facility: None, anchor: None, facility_value: None });
        }
    }
    records.extend(warm_start(instance, config));
    model.add_cuts(records.iter().map(|r| r.cut.clone()))?;
    Ok(Some(Setup { model, records }))
}

fn infeasible_solution(trace: SolveTrace, cuts: Vec<CutRecord>) -> LbbdSolution {
    LbbdSolution {
        status: SolveStatus::Infeasible,
        value: None,
        lower_bound: None,
        assignment: None,
        schedules: Vec::new(),
        trace,
        cuts,
    }
}

fn tally(records: &[CutRecord]) -> BTreeMap<CutTag, usize> {
    let mut m = BTreeMap::new();
    for r in records {
        *m.entry(r.cut.tag).or_insert(0) += 1;
    }
    m
}

fn lower_bound_of(z: f64) -> i64 {
    if z.is_infinite() {
        if z > 0.0 { i64::MAX } else { i64::MIN }
    } else {
        (z - ROUND_TOL).ceil() as i64
    }
}

/// Iterative procedure for optimization subproblems (makespan, tardiness).
pub fn solve_lbbd(instance: &Instance, config: &SolverConfig) -> Result<LbbdSolution, SolveError> {
    if instance.objective == Objective::AssignCost {
        return Err(SolveError::WrongObjective(instance.objective));
    }
    iterate(instance, config)
}

/// Iterative procedure for feasibility subproblems (assignment cost).
pub fn solve_lbbd_feasibility(instance: &Instance, config: &SolverConfig) -> Result<LbbdSolution, SolveError> {
    if instance.objective != Objective::AssignCost {
        return Err(SolveError::WrongObjective(instance.objective));
    }
    iterate(instance, config)
}

fn iterate(instance: &Instance, config: &SolverConfig) -> Result<LbbdSolution, SolveError> {
    let start = Instant::now();
    let deadline = config.time_budget.map(|d| start + d);
    let mut trace = SolveTrace::default();
    let Some(Setup { mut model, mut records }) = setup(instance, config)? else {
        return Ok(infeasible_solution(trace, Vec::new()));
    };
    let options = config.cut_options();
    let cap = config.iteration_cap(instance);
    let mut best: Option<(i64, Assignment, Vec<ScheduleOutcome>)> = None;
    let mut lower = i64::MIN;
    let mut status = SolveStatus::BudgetExhausted;

    for k in 1..=cap {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        let t_iter = Instant::now();
        let t = Instant::now();
        let sol = master::solve_master_with(&mut model, None, &MasterOptions { deadline });
        trace.master_ms += ms_since(t);
        trace.master_solves += 1;
        let assignment = match sol.status {
            MasterStatus::Interrupted => break,
            MasterStatus::Infeasible => {
                // only reachable with an incumbent when some cut was invalid
                status = if best.is_some() { SolveStatus::Optimal } else { SolveStatus::Infeasible };
                break;
            }
            MasterStatus::Optimal => sol.assignment.expect("optimal master has an assignment"),
        };
        let z = sol.objective;
        lower = lower.max(lower_bound_of(z));

        let t = Instant::now();
        let outcomes = cuts::facility_outcomes(instance, &assignment);
        let v = aggregate(instance, &assignment, &outcomes);
        if let Some(v) = v {
            if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                best = Some((v, assignment.clone(), outcomes.clone()));
            }
        }
        let v_min = best.as_ref().map(|b| b.0);
        let done = v_min.is_some_and(|v| lower >= v);
        let new = if done {
            Vec::new()
        } else {
            cuts_for_assignment(instance, &assignment, &outcomes, &options, CutEvent::Iteration(k), |_| true)
        };
        trace.subproblem_ms += ms_since(t);

        trace.iterations.push(IterationRecord {
            k,
            z,
            lower_bound: lower_bound_of(z),
            v_per_facility: outcomes.iter().map(|o| o.value).collect(),
            v,
            v_min,
            cuts: tally(&new),
            ms: t_iter.elapsed().as_millis(),
        });
        if done {
            status = SolveStatus::Optimal;
            break;
        }
        model.add_cuts(new.iter().map(|r| r.cut.clone()))?;
        records.extend(new);
    }
    trace.total_ms = ms_since(start);
    Ok(finish(status, best, lower, trace, records))
}

fn finish(
    status: SolveStatus,
    best: Option<(i64, Assignment, Vec<ScheduleOutcome>)>,
    lower: i64,
    trace: SolveTrace,
    records: Vec<CutRecord>,
) -> LbbdSolution {
    if status == SolveStatus::Infeasible {
        return infeasible_solution(trace, records);
    }
    let (value, assignment, schedules) = match best {
        Some((v, a, s)) => (Some(v), Some(a), s),
        None => (None, None, Vec::new()),
    };
    let lower_bound = if lower == i64::MIN { None } else { Some(lower) };
    LbbdSolution { status, value, lower_bound, assignment, schedules, trace, cuts: records }
}

/// Solves the master once; every integral node is checked against the
/// subproblems and cut off while some facility is infeasible or its value
/// exceeds the node's `Mvar`/`Tvar`.
pub fn solve_branch_and_check(instance: &Instance, config: &SolverConfig) -> Result<LbbdSolution, SolveError> {
    let start = Instant::now();
    let deadline = config.time_budget.map(|d| start + d);
    let mut trace = SolveTrace::default();
    let Some(Setup { mut model, mut records }) = setup(instance, config)? else {
        return Ok(infeasible_solution(trace, Vec::new()));
    };
    let options = config.cut_options();
    let mut best: Option<(i64, Assignment, Vec<ScheduleOutcome>)> = None;
    let mut lower = i64::MIN;
    let mut subproblem_ms = 0.0;
    let mut new_records: Vec<CutRecord> = Vec::new();
    let mut iterations: Vec<IterationRecord> = Vec::new();

    let t_master = Instant::now();
    let sol = {
        let mut callback = |node: &IntegerNode| -> Vec<LinearCut> {
            let t = Instant::now();
            let k = iterations.len() + 1;
            let a = &node.assignment;
            let outcomes = cuts::facility_outcomes(instance, a);
            let v = aggregate(instance, a, &outcomes);
            if let Some(v) = v {
                if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                    best = Some((v, a.clone(), outcomes.clone()));
                }
            }
            let lb = lower_bound_of(node.global_bound);
            lower = lower.max(lb);
            let violated = |i: usize| match (outcomes[i].value, target_of(instance.objective, i)) {
                (None, _) => true,
                (Some(value), Some(key)) => node.value(key) < value as f64 - master::FEAS_TOL,
                (Some(_), None) => false,
            };
            let new = cuts_for_assignment(instance, a, &outcomes, &options, CutEvent::Callback(k), violated);
            iterations.push(IterationRecord {
                k,
                z: node.global_bound,
                lower_bound: lb,
                v_per_facility: outcomes.iter().map(|o| o.value).collect(),
                v,
                v_min: best.as_ref().map(|b| b.0),
                cuts: tally(&new),
                ms: t.elapsed().as_millis(),
            });
            subproblem_ms += ms_since(t);
            let cuts = new.iter().map(|r| r.cut.clone()).collect();
            new_records.extend(new);
            cuts
        };
        master::solve_master_with(&mut model, Some(&mut callback), &MasterOptions { deadline })
    };
    trace.master_ms = ms_since(t_master) - subproblem_ms;
    trace.subproblem_ms = subproblem_ms;
    trace.master_solves = 1;
    records.extend(new_records);

    let status = match sol.status {
        MasterStatus::Infeasible => SolveStatus::Infeasible,
        MasterStatus::Interrupted => SolveStatus::BudgetExhausted,
        MasterStatus::Optimal => {
            let a = sol.assignment.expect("optimal master has an assignment");
            let outcomes = cuts::facility_outcomes(instance, &a);
            let v = aggregate(instance, &a, &outcomes).expect("accepted nodes have feasible subproblems");
            if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                best = Some((v, a, outcomes));
            }
            lower = lower.max(lower_bound_of(sol.objective));
            let v_min = best.as_ref().map(|b| b.0);
            let last = iterations.last();
            iterations.push(IterationRecord {
                k: iterations.len() + 1,
                z: sol.objective,
                lower_bound: lower_bound_of(sol.objective),
                v_per_facility: last.map(|r| r.v_per_facility.clone()).unwrap_or_default(),
                v: Some(v),
                v_min,
                cuts: BTreeMap::new(),
                ms: 0,
            });
            SolveStatus::Optimal
        }
    };
    trace.iterations = iterations;
    trace.total_ms = ms_since(start);
    Ok(finish(status, best, lower, trace, records))
}

/// Dispatches on `config.mode` and the instance objective.
pub fn solve(instance: &Instance, config: &SolverConfig) -> Result<LbbdSolution, SolveError> {
    match (config.mode, instance.objective) {
        (Mode::BranchAndCheck, _) => solve_branch_and_check(instance, config),
        (Mode::Iterative, Objective::AssignCost) => solve_lbbd_feasibility(instance, config),
        (Mode::Iterative, _) => solve_lbbd(instance, config),
    }
}
