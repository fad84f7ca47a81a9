//! Cross-checks against the oracle: solver agreement, cut and relaxation
//! validity over every assignment, the anchor property, and trace
//! bookkeeping.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::driver::{self, CutRecord, LbbdSolution, Mode, SolveStatus, SolverConfig};
use crate::error::{OracleError, SolveError};
use crate::master;
use crate::model::{Assignment, Instance, Objective, Rational, VarKey};
use crate::oracle::{self, SubsetTable};
use crate::relax;

/// Tolerance for comparing LP optima with and without pruning.
pub const LP_TOL: f64 = 1e-6;

/// Violations of one kind, with a readable description of each.
pub type Findings = Vec<String>;

/// Optimality cuts whose bound exceeds the subproblem value at some
/// assignment, and feasibility cuts that exclude an assignment whose facility
/// is schedulable.
pub fn cut_validity(instance: &Instance, table: &SubsetTable, records: &[CutRecord]) -> Findings {
    let m = instance.num_facilities();
    let n = instance.num_jobs();
    let mut out = Vec::new();
    for rec in records.iter().filter(|r| !r.cut.tag.is_relaxation()) {
        let Some(i) = rec.facility else { continue };
        let target = rec.cut.target();
        for a in Assignment::enumerate(m, n) {
            let Some(value) = table.get(i, &a.jobs_on(i)) else { continue };
            let ok = match target {
                Some(key) => rec.cut.bound_at(key, &a).is_some_and(|b| b <= Rational::from_integer(value)),
                None => rec.cut.satisfied_by(|k| match k {
                    VarKey::X(fi, j) => Rational::from_integer(a.x(fi, j) as i64),
                    _ => Rational::zero(),
                }),
            };
            if !ok {
                out.push(format!("{} at {:?}: facility {i} value {value}", rec.cut, a.facility_of));
                break;
            }
        }
    }
    out
}

/// At each generating assignment, every optimality cut of a facility bounds
/// its target by at most the subproblem value, and the largest such bound
/// (or zero, when all cuts were trivial) equals it.
pub fn anchor_property(records: &[CutRecord]) -> Findings {
    let mut groups: BTreeMap<(Vec<usize>, usize), (i64, Vec<Rational>)> = BTreeMap::new();
    for rec in records {
        let (Some(a), Some(i), Some(v)) = (&rec.anchor, rec.facility, rec.facility_value) else { continue };
        let Some(key) = rec.cut.target() else { continue };
        let bound = rec.cut.bound_at(key, a).expect("optimality cuts have the target at coefficient one");
        groups.entry((a.facility_of.clone(), i)).or_insert((v, Vec::new())).1.push(bound);
    }
    let mut out = Vec::new();
    for ((a, i), (v, bounds)) in groups {
        let v = Rational::from_integer(v);
        let top = bounds.iter().copied().fold(Rational::zero(), Rational::max);
        if top != v || bounds.iter().any(|b| *b > v) {
            out.push(format!("facility {i} at {a:?}: value {v}, cut bounds {bounds:?}"));
        }
    }
    out
}

/// Every relaxation inequality at every feasible assignment, with the
/// objective variables at their subproblem values.
pub fn relaxation_validity(instance: &Instance, table: &SubsetTable) -> Findings {
    let cuts = relax::relaxations_for(instance);
    let mut out = Vec::new();
    for a in Assignment::enumerate(instance.num_facilities(), instance.num_jobs()) {
        let Some(values) = table.facility_values(instance, &a) else { continue };
        let point = relax::master_point(instance, &a, &values, &cuts);
        for cut in &cuts {
            if !cut.satisfied_by(|k| point[&k]) {
                out.push(format!("{cut} at {:?} with values {values:?}", a.facility_of));
            }
        }
    }
    out
}

/// Root LP value with pruned and with unpruned energy windows, or `None`
/// when the objective uses no windows.
pub fn pruning_lp_values(instance: &Instance) -> Option<(Option<f64>, Option<f64>)> {
    if instance.objective == Objective::TotalTardiness {
        return None;
    }
    let extra = if instance.objective == Objective::Makespan {
        relax::makespan_relaxation(instance)
    } else {
        Vec::new()
    };
    let bound = |windows: Vec<crate::model::LinearCut>| {
        let mut model = master::build_master(instance, instance.objective).ok()?;
        model.add_cuts(windows.into_iter().chain(extra.iter().cloned())).expect("relaxations use model variables");
        model.root_lp_bound()
    };
    Some((
        bound(relax::energy_window_inequalities(instance)),
        bound(relax::energy_window_inequalities_unpruned(instance)),
    ))
}

/// Whether pruning left the root LP optimum unchanged.
pub fn pruning_is_sound(instance: &Instance) -> Option<bool> {
    pruning_lp_values(instance).map(|(a, b)| match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() <= LP_TOL,
        (None, None) => true,
        _ => false,
    })
}

/// Trace invariants: `z` never decreases, `v_min` never increases, and an
/// optimal iterative run stops exactly when the bounds meet, under the cap.
pub fn convergence(instance: &Instance, config: &SolverConfig, sol: &LbbdSolution) -> Findings {
    let mut out = Vec::new();
    let its = &sol.trace.iterations;
    for w in its.windows(2) {
        if w[1].z < w[0].z - LP_TOL {
            out.push(format!("z decreased at k={}: {} -> {}", w[1].k, w[0].z, w[1].z));
        }
        if let (Some(a), Some(b)) = (w[0].v_min, w[1].v_min) {
            if b > a {
                out.push(format!("v_min increased at k={}", w[1].k));
            }
        }
        if w[1].v_min.is_none() && w[0].v_min.is_some() {
            out.push(format!("v_min lost at k={}", w[1].k));
        }
    }
    if sol.status == SolveStatus::Optimal {
        let Some(last) = its.last() else {
            out.push("optimal without iterations".into());
            return out;
        };
        if Some(last.lower_bound) != last.v_min {
            out.push(format!("stopped with lower bound {} and v_min {:?}", last.lower_bound, last.v_min));
        }
        if config.mode == Mode::Iterative {
            for it in &its[..its.len() - 1] {
                if it.v_min.is_some_and(|v| it.lower_bound >= v) {
                    out.push(format!("bounds met at k={} without stopping", it.k));
                }
            }
            if its.len() >= config.iteration_cap(instance) {
                out.push("iteration cap reached".into());
            }
        }
    }
    if config.mode == Mode::Iterative && sol.status == SolveStatus::BudgetExhausted {
        out.push("budget exhausted".into());
    }
    out
}

/// Everything learned about one instance.
#[derive(Debug, Clone)]
pub struct InstanceCheck {
    pub objective: Objective,
    pub oracle: Option<i64>,
    pub iterative: Option<i64>,
    pub branch_and_check: Option<i64>,
    pub iterations: usize,
    pub cuts_checked: usize,
    pub disagreements: Findings,
    pub cut_violations: Findings,
    pub anchor_violations: Findings,
    pub relaxation_violations: Findings,
    pub pruning_sound: Option<bool>,
    pub convergence_violations: Findings,
}

impl InstanceCheck {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty()
            && self.cut_violations.is_empty()
            && self.anchor_violations.is_empty()
            && self.relaxation_violations.is_empty()
            && self.pruning_sound != Some(false)
            && self.convergence_violations.is_empty()
    }

    /// All findings, one per line, prefixed by kind.
    pub fn findings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (kind, list) in [
            ("disagreement", &self.disagreements),
            ("cut", &self.cut_violations),
            ("anchor", &self.anchor_violations),
            ("relaxation", &self.relaxation_violations),
            ("convergence", &self.convergence_violations),
        ] {
            out.extend(list.iter().map(|f| format!("{kind}: {f}")));
        }
        if self.pruning_sound == Some(false) {
            out.push("pruning: root LP value changed".into());
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CheckError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

fn outcome_value(sol: &LbbdSolution) -> Option<i64> {
    match sol.status {
        SolveStatus::Optimal => sol.value,
        _ => None,
    }
}

/// Runs the oracle and both solver modes on `instance` and every sweep.
/// `config.mode` is ignored; both modes run with the rest of `config`.
pub fn check_instance(instance: &Instance, config: &SolverConfig) -> Result<InstanceCheck, CheckError> {
    let table = SubsetTable::build(instance)?;
    let expected = oracle::oracle_solve(instance)?.optimum;
    let iterative_config = SolverConfig { mode: Mode::Iterative, ..config.clone() };
    let bnc_config = SolverConfig { mode: Mode::BranchAndCheck, ..config.clone() };
    let iterative = driver::solve(instance, &iterative_config)?;
    let bnc = driver::solve(instance, &bnc_config)?;

    let mut disagreements = Vec::new();
    for (name, sol) in [("iterative", &iterative), ("branch-and-check", &bnc)] {
        let expected_status = if expected.is_some() { SolveStatus::Optimal } else { SolveStatus::Infeasible };
        if sol.status != expected_status || outcome_value(sol) != expected {
            disagreements.push(format!("{name}: {} {:?}, oracle {:?}", sol.status, sol.value, expected));
        }
    }

    let mut records: Vec<CutRecord> = iterative.cuts.clone();
    records.extend(bnc.cuts.iter().cloned());
    let mut convergence_violations = convergence(instance, &iterative_config, &iterative);
    convergence_violations.extend(convergence(instance, &bnc_config, &bnc).into_iter().map(|f| format!("bnc {f}")));

    Ok(InstanceCheck {
        objective: instance.objective,
        oracle: expected,
        iterative: outcome_value(&iterative),
        branch_and_check: outcome_value(&bnc),
        iterations: iterative.trace.iterations.len(),
        cuts_checked: records.iter().filter(|r| !r.cut.tag.is_relaxation()).count(),
        disagreements,
        cut_violations: cut_validity(instance, &table, &records),
        anchor_violations: anchor_property(&records),
        relaxation_violations: relaxation_validity(instance, &table),
        pruning_sound: pruning_is_sound(instance),
        convergence_violations,
    })
}
