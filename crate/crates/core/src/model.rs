//! Instances, assignments, schedule outcomes and linear cuts.
//!
//! All data is integral. Facilities and jobs are addressed internally by their
//! position in [`Instance::facilities`] / [`Instance::jobs`]; the `id` fields are
//! carried for reporting and file round-trips.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Exact rational used for cut coefficients.
pub type Rational = Ratio<i64>;

/// Which objective the instance is solved under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// Minimize the latest completion time over all facilities.
    Makespan,
    /// Minimize total assignment cost subject to schedulability.
    #[serde(rename = "cost")]
    AssignCost,
    /// Minimize total tardiness against soft due dates.
    #[serde(rename = "tardiness")]
    TotalTardiness,
}

impl Objective {
    /// Whether `due` acts as a hard deadline under this objective.
    pub fn has_deadlines(self) -> bool {
        !matches!(self, Objective::TotalTardiness)
    }

    pub fn name(self) -> &'static str {
        match self {
            Objective::Makespan => "makespan",
            Objective::AssignCost => "cost",
            Objective::TotalTardiness => "tardiness",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "makespan" => Ok(Objective::Makespan),
            "cost" => Ok(Objective::AssignCost),
            "tardiness" => Ok(Objective::TotalTardiness),
            other => Err(format!("unknown objective `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Facility {
    pub id: i64,
    pub capacity: i64,
}

/// A job with facility-indexed processing data. The `proc`, `demand` and `cost`
/// vectors are ordered like [`Instance::facilities`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub id: i64,
    pub release: i64,
    pub due: i64,
    #[serde(rename = "proc")]
    pub proc_time: Vec<i64>,
    pub demand: Vec<i64>,
    pub cost: Vec<i64>,
}

impl Job {
    /// Energy `p * c` of the job on facility `i`.
    pub fn energy(&self, i: usize) -> i64 {
        self.proc_time[i] * self.demand[i]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub facilities: Vec<Facility>,
    pub jobs: Vec<Job>,
    pub objective: Objective,
    /// Latest admissible start time for every job.
    pub horizon: i64,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    facilities: Vec<Facility>,
    jobs: Vec<Job>,
    objective: Objective,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    horizon: Option<i64>,
}

impl Instance {
    /// Builds an instance with the default horizon.
    pub fn new(facilities: Vec<Facility>, jobs: Vec<Job>, objective: Objective) -> Self {
        let mut inst = Instance { facilities, jobs, objective, horizon: 0 };
        inst.horizon = inst.default_horizon();
        inst
    }

    pub fn num_jobs(&self) -> usize {
        self.jobs.len()
    }

    pub fn num_facilities(&self) -> usize {
        self.facilities.len()
    }

    /// `max_j r_j + sum_j max_i p_ij`: every job can start by this time in a
    /// serial schedule.
    pub fn default_horizon(&self) -> i64 {
        let max_release = self.jobs.iter().map(|j| j.release).max().unwrap_or(0).max(0);
        let total: i64 = self
            .jobs
            .iter()
            .map(|j| j.proc_time.iter().copied().max().unwrap_or(0).max(0))
            .sum();
        max_release + total
    }

    pub fn with_objective(&self, objective: Objective) -> Instance {
        Instance { objective, ..self.clone() }
    }

    pub fn max_proc(&self) -> i64 {
        self.jobs
            .iter()
            .flat_map(|j| j.proc_time.iter().copied())
            .max()
            .unwrap_or(0)
            .max(0)
    }

    /// Latest start of job `j` on facility `i` when `due` is a hard deadline,
    /// capped by the horizon. Without deadlines only the horizon applies.
    pub fn latest_start(&self, i: usize, j: usize, deadlines: bool) -> i64 {
        let job = &self.jobs[j];
        if deadlines {
            (job.due - job.proc_time[i]).min(self.horizon)
        } else {
            self.horizon
        }
    }

    /// Deadline after capping by the horizon: `min(d_j, horizon + p_ij)`.
    pub fn effective_due(&self, i: usize, j: usize) -> i64 {
        let job = &self.jobs[j];
        job.due.min(self.horizon + job.proc_time[i])
    }

    /// Whether job `j` may be placed on facility `i` at all.
    pub fn assignable(&self, i: usize, j: usize) -> bool {
        let job = &self.jobs[j];
        if job.demand[i] > self.facilities[i].capacity {
            return false;
        }
        job.release.max(0) <= self.latest_start(i, j, self.objective.has_deadlines())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Instance, ModelError> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Instance::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        std::fs::write(path.as_ref(), self.to_json())?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Instance, ModelError> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| ModelError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let mut inst = Instance {
            facilities: file.facilities,
            jobs: file.jobs,
            objective: file.objective,
            horizon: 0,
        };
        inst.horizon = file.horizon.unwrap_or_else(|| inst.default_horizon());
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            facilities: self.facilities.clone(),
            jobs: self.jobs.clone(),
            objective: self.objective,
            horizon: Some(self.horizon),
        };
        serde_json::to_string_pretty(&file).expect("instance serializes")
    }

    /// Checks every data invariant. An empty list means the instance is clean;
    /// [`Severity::Error`] entries make the instance unsolvable.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let m = self.facilities.len();
        if self.jobs.is_empty() {
            out.push(Diagnostic::error("instance has no jobs"));
        }
        if m == 0 {
            out.push(Diagnostic::error("instance has no facilities"));
        }
        for f in &self.facilities {
            if f.capacity < 1 {
                out.push(Diagnostic::error(format!("facility {} capacity < 1", f.id)));
            }
        }
        for (a, f) in self.facilities.iter().enumerate() {
            if self.facilities[..a].iter().any(|g| g.id == f.id) {
                out.push(Diagnostic::error(format!("duplicate facility id {}", f.id)));
            }
        }
        for (a, job) in self.jobs.iter().enumerate() {
            if self.jobs[..a].iter().any(|k| k.id == job.id) {
                out.push(Diagnostic::error(format!("duplicate job id {}", job.id)));
            }
            if job.release < 0 {
                out.push(Diagnostic::error(format!("job {} release < 0", job.id)));
            }
            for (field, v) in [("proc", &job.proc_time), ("demand", &job.demand), ("cost", &job.cost)] {
                if v.len() != m {
                    out.push(Diagnostic::error(format!(
                        "job {} `{field}` has {} entries, expected {m}",
                        job.id,
                        v.len()
                    )));
                }
            }
            if job.proc_time.len() != m || job.demand.len() != m {
                continue;
            }
            for (i, f) in self.facilities.iter().enumerate() {
                if job.proc_time[i] < 0 {
                    out.push(Diagnostic::error(format!(
                        "job {} processing time on facility {} < 0",
                        job.id, f.id
                    )));
                }
                if job.demand[i] < 0 {
                    out.push(Diagnostic::error(format!(
                        "job {} demand on facility {} < 0",
                        job.id, f.id
                    )));
                }
                if f.capacity >= 1 && job.demand[i] > f.capacity {
                    out.push(Diagnostic::warning(format!(
                        "job {} unassignable to facility {}: demand {} > capacity {}",
                        job.id, f.id, job.demand[i], f.capacity
                    )));
                }
            }
        }
        if !self.jobs.is_empty() && self.horizon < self.default_horizon() {
            out.push(Diagnostic::warning(format!(
                "horizon {} below the safe bound {}; start times are capped",
                self.horizon,
                self.default_horizon()
            )));
        }
        out
    }

    /// `true` when `validate` reports no errors (warnings are allowed).
    pub fn is_solvable(&self) -> bool {
        self.validate().iter().all(|d| d.severity != Severity::Error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn error(message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, message: message.into() }
    }

    fn warning(message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// Facility index for every job, by position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub facility_of: Vec<usize>,
}

impl Assignment {
    pub fn new(facility_of: Vec<usize>) -> Self {
        Assignment { facility_of }
    }

    /// Jobs on facility `i`, in ascending job order.
    pub fn jobs_on(&self, i: usize) -> Vec<usize> {
        self.facility_of
            .iter()
            .enumerate()
            .filter(|&(_, &f)| f == i)
            .map(|(j, _)| j)
            .collect()
    }

    /// The `J_i` sets for all `m` facilities.
    pub fn partition(&self, m: usize) -> Vec<Vec<usize>> {
        let mut sets = vec![Vec::new(); m];
        for (j, &i) in self.facility_of.iter().enumerate() {
            sets[i].push(j);
        }
        sets
    }

    pub fn x(&self, i: usize, j: usize) -> bool {
        self.facility_of[j] == i
    }

    /// Enumerates all `m^n` assignments in lexicographic order.
    pub fn enumerate(m: usize, n: usize) -> impl Iterator<Item = Assignment> {
        let total = (m as u64).pow(n as u32);
        (0..total).map(move |mut code| {
            let mut facility_of = vec![0; n];
            for slot in facility_of.iter_mut() {
                *slot = (code % m as u64) as usize;
                code /= m as u64;
            }
            Assignment { facility_of }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleStatus {
    Optimal,
    Infeasible,
}

/// Result of one facility subproblem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleOutcome {
    pub status: ScheduleStatus,
    /// Objective value; `None` when infeasible.
    pub value: Option<i64>,
    /// `(job, start)` pairs, present when optimal.
    pub starts: Vec<(usize, i64)>,
}

impl ScheduleOutcome {
    pub fn infeasible() -> Self {
        ScheduleOutcome { status: ScheduleStatus::Infeasible, value: None, starts: Vec::new() }
    }

    pub fn optimal(value: i64, starts: Vec<(usize, i64)>) -> Self {
        ScheduleOutcome { status: ScheduleStatus::Optimal, value: Some(value), starts }
    }

    pub fn is_feasible(&self) -> bool {
        self.status == ScheduleStatus::Optimal
    }
}

/// Master-problem variable addressed by facility / job position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    X(usize, usize),
    Mvar(usize),
    Tvar(usize),
    That(usize, usize),
    Z,
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VarKey::X(i, j) => write!(f, "X_{i}_{j}"),
            VarKey::Mvar(i) => write!(f, "M_{i}"),
            VarKey::Tvar(i) => write!(f, "T_{i}"),
            VarKey::That(i, k) => write!(f, "That_{i}_{k}"),
            VarKey::Z => f.write_str("Z"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CutTag {
    NogoodMakespan,
    AnalyticDeadline,
    AnalyticRelease,
    FeasibilityNogood,
    NogoodTardiness,
    AnalyticTardiness,
    RelaxEnergy,
    RelaxMakespan,
    RelaxTardiness1,
    RelaxTardiness2,
}

impl CutTag {
    pub fn is_relaxation(self) -> bool {
        matches!(
            self,
            CutTag::RelaxEnergy | CutTag::RelaxMakespan | CutTag::RelaxTardiness1 | CutTag::RelaxTardiness2
        )
    }
}

impl fmt::Display for CutTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `sum coeffs[k] * k >= rhs` over master variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCut {
    pub coeffs: BTreeMap<VarKey, Rational>,
    pub rhs: Rational,
    pub tag: CutTag,
}

impl LinearCut {
    pub fn new(tag: CutTag) -> Self {
        LinearCut { coeffs: BTreeMap::new(), rhs: Rational::zero(), tag }
    }

    /// Adds `coef * key` to the left-hand side, merging repeated keys.
    pub fn add(&mut self, key: VarKey, coef: Rational) -> &mut Self {
        let entry = self.coeffs.entry(key).or_insert_with(Rational::zero);
        *entry += coef;
        if entry.is_zero() {
            self.coeffs.remove(&key);
        }
        self
    }

    pub fn with_rhs(mut self, rhs: Rational) -> Self {
        self.rhs = rhs;
        self
    }

    /// Left-hand side at `point`.
    pub fn lhs<F: Fn(VarKey) -> Rational>(&self, point: F) -> Rational {
        self.coeffs.iter().map(|(&k, &c)| c * point(k)).sum()
    }

    pub fn satisfied_by<F: Fn(VarKey) -> Rational>(&self, point: F) -> bool {
        self.lhs(point) >= self.rhs
    }

    /// For a cut `v + (terms in X) >= rhs` with `v` a single continuous
    /// variable at coefficient one, the bound it imposes on `v` under `x`.
    pub fn bound_at(&self, target: VarKey, x: &Assignment) -> Option<Rational> {
        if self.coeffs.get(&target) != Some(&Rational::from_integer(1)) {
            return None;
        }
        let mut bound = self.rhs;
        for (&k, &c) in &self.coeffs {
            match k {
                VarKey::X(i, j) => {
                    if x.x(i, j) {
                        bound -= c;
                    }
                }
                _ if k == target => {}
                _ => return None,
            }
        }
        Some(bound)
    }

    /// The single non-X variable of an optimality cut, if there is exactly one.
    pub fn target(&self) -> Option<VarKey> {
        let mut it = self.coeffs.keys().filter(|k| !matches!(k, VarKey::X(..)));
        let first = *it.next()?;
        if it.next().is_some() {
            None
        } else {
            Some(first)
        }
    }

    /// A cut that no point with `X` in `[0, 1]` and the other variables
    /// nonnegative can violate.
    pub fn is_trivial(&self) -> bool {
        let mut floor = Rational::zero();
        for (k, c) in &self.coeffs {
            match k {
                VarKey::X(..) if c.is_negative() => floor += c,
                VarKey::X(..) => {}
                _ if c.is_negative() => return false,
                _ => {}
            }
        }
        self.rhs <= floor
    }
}

impl fmt::Display for LinearCut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.tag)?;
        if self.coeffs.is_empty() {
            f.write_str(" 0")?;
        }
        for (k, c) in &self.coeffs {
            if c.is_negative() {
                write!(f, " - {} {k}", -c)?;
            } else {
                write!(f, " + {c} {k}")?;
            }
        }
        write!(f, " >= {}", self.rhs)
    }
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_job_instance() -> Instance {
        Instance::new(
            vec![Facility { id: 1, capacity: 2 }],
            vec![
                Job { id: 1, release: 0, due: 10, proc_time: vec![2], demand: vec![1], cost: vec![3] },
                Job { id: 2, release: 1, due: 8, proc_time: vec![3], demand: vec![2], cost: vec![4] },
            ],
            Objective::Makespan,
        )
    }

    #[test]
    fn clean_instance_has_no_diagnostics() {
        assert!(two_job_instance().validate().is_empty());
    }

    #[test]
    fn zero_capacity_is_reported() {
        let mut inst = two_job_instance();
        inst.facilities[0].capacity = 0;
        let diags = inst.validate();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].message, "facility 1 capacity < 1");
        assert_eq!(diags[0].severity, Severity::Error);
    }

    #[test]
    fn oversized_demand_is_a_warning() {
        let mut inst = two_job_instance();
        inst.jobs[1].demand[0] = 3;
        let diags = inst.validate();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Warning);
        assert!(diags[0].message.contains("job 2 unassignable to facility 1"));
        assert!(inst.is_solvable());
        assert!(!inst.assignable(0, 1));
    }

    #[test]
    fn save_then_load_round_trips() {
        let inst = two_job_instance();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        inst.save(&path).unwrap();
        assert_eq!(Instance::load(&path).unwrap(), inst);
    }

    #[test]
    fn missing_capacity_names_the_field() {
        let text = r#"{"facilities":[{"id":0}],"jobs":[],"objective":"makespan"}"#;
        match Instance::from_json(text) {
            Err(ModelError::Parse { message, line, .. }) => {
                assert!(message.contains("capacity"), "{message}");
                assert_eq!(line, 1);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn negative_release_loads_then_fails_validation() {
        let text = r#"{"facilities":[{"id":0,"capacity":1}],
            "jobs":[{"id":0,"release":-1,"due":5,"proc":[2],"demand":[1],"cost":[1]}],
            "objective":"tardiness"}"#;
        let inst = Instance::from_json(text).unwrap();
        assert_eq!(inst.objective, Objective::TotalTardiness);
        assert_eq!(inst.horizon, 2);
        let diags = inst.validate();
        assert!(diags.iter().any(|d| d.message == "job 0 release < 0"));
        assert!(!inst.is_solvable());
    }

    #[test]
    fn partition_covers_every_job_once() {
        for a in Assignment::enumerate(3, 4) {
            let parts = a.partition(3);
            let mut all: Vec<usize> = parts.concat();
            all.sort();
            assert_eq!(all, vec![0, 1, 2, 3]);
        }
        assert_eq!(Assignment::enumerate(3, 4).count(), 81);
    }

    #[test]
    fn cut_bound_and_merge() {
        let mut cut = LinearCut::new(CutTag::NogoodMakespan);
        cut.add(VarKey::Mvar(0), rat(1))
            .add(VarKey::X(0, 1), rat(-7))
            .add(VarKey::X(0, 1), rat(2));
        let cut = cut.with_rhs(rat(-3));
        assert_eq!(cut.coeffs[&VarKey::X(0, 1)], rat(-5));
        assert_eq!(cut.bound_at(VarKey::Mvar(0), &Assignment::new(vec![1, 0])), Some(rat(2)));
        assert_eq!(cut.bound_at(VarKey::Mvar(0), &Assignment::new(vec![0, 1])), Some(rat(-3)));
        assert_eq!(cut.target(), Some(VarKey::Mvar(0)));
        assert!(!cut.is_trivial());
    }
}
