//! 0-1 master problem: assignment variables, per-facility objective variables
//! and a growing pool of cuts, solved by LP-based branch and bound.
//!
//! In callback mode the solver hands every node whose LP optimum is integral in
//! `X` to the caller. Cuts it returns join the pool for the rest of the search
//! and the node LP is re-solved; an empty answer lets the node become the
//! incumbent. This is the hook branch and check is built on.

pub mod lp;

use std::collections::{BinaryHeap, HashMap};
use std::cmp::Ordering;
use std::fmt::Write as _;
use std::time::Instant;

use num_traits::ToPrimitive;

use crate::error::MasterError;
use crate::model::{Assignment, Instance, LinearCut, Objective, VarKey};
use lp::{LinearProgram, LpOutcome, Sense};

/// Integrality tolerance on `X`.
pub const INT_TOL: f64 = 1e-6;
/// Bound comparison tolerance.
pub const FEAS_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct MasterModel {
    objective: Objective,
    n: usize,
    m: usize,
    vars: Vec<VarKey>,
    index: HashMap<VarKey, usize>,
    upper: Vec<Option<f64>>,
    costs: Vec<Vec<i64>>,
    /// X(i, j) excluded up front, indexed `[i][j]`.
    excluded: Vec<Vec<bool>>,
    cuts: Vec<LinearCut>,
}

/// Builds the master for `instance` under `objective`.
pub fn build_master(instance: &Instance, objective: Objective) -> Result<MasterModel, MasterError> {
    let inst = instance.with_objective(objective);
    let n = inst.num_jobs();
    let m = inst.num_facilities();
    let mut vars = Vec::new();
    let mut upper = Vec::new();
    for i in 0..m {
        for j in 0..n {
            vars.push(VarKey::X(i, j));
            upper.push(Some(1.0));
        }
    }
    let span = (inst.horizon + inst.max_proc()) as f64;
    let tardiness_cap: f64 = inst
        .jobs
        .iter()
        .map(|job| (inst.horizon + inst.max_proc() - job.due).max(0) as f64)
        .sum();
    match objective {
        Objective::Makespan => {
            for i in 0..m {
                vars.push(VarKey::Mvar(i));
                upper.push(Some(span));
            }
            vars.push(VarKey::Z);
            upper.push(Some(span));
        }
        Objective::TotalTardiness => {
            for i in 0..m {
                vars.push(VarKey::Tvar(i));
                upper.push(Some(tardiness_cap));
            }
            for i in 0..m {
                for k in 0..n {
                    vars.push(VarKey::That(i, k));
                    upper.push(Some(tardiness_cap));
                }
            }
        }
        Objective::AssignCost => {}
    }
    let index = vars.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let excluded: Vec<Vec<bool>> =
        (0..m).map(|i| (0..n).map(|j| !inst.assignable(i, j)).collect()).collect();
    for j in 0..n {
        if (0..m).all(|i| excluded[i][j]) {
            return Err(MasterError::Unassignable(j));
        }
    }
    let costs = (0..m).map(|i| (0..n).map(|j| inst.jobs[j].cost[i]).collect()).collect();
    Ok(MasterModel { objective, n, m, vars, index, upper, costs, excluded, cuts: Vec::new() })
}

/// Variable family, for counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    X,
    Mvar,
    Tvar,
    That,
    Z,
}

fn kind_of(k: VarKey) -> VarKind {
    match k {
        VarKey::X(..) => VarKind::X,
        VarKey::Mvar(_) => VarKind::Mvar,
        VarKey::Tvar(_) => VarKind::Tvar,
        VarKey::That(..) => VarKind::That,
        VarKey::Z => VarKind::Z,
    }
}

impl MasterModel {
    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn has_var(&self, key: VarKey) -> bool {
        self.index.contains_key(&key)
    }

    pub fn count_vars(&self, kind: VarKind) -> usize {
        self.vars.iter().filter(|&&k| kind_of(k) == kind).count()
    }

    /// One `sum_i X(i,j) = 1` row per job.
    pub fn num_partition_rows(&self) -> usize {
        self.n
    }

    /// One `Z >= Mvar(i)` row per facility under the makespan objective.
    pub fn num_epigraph_rows(&self) -> usize {
        if self.objective == Objective::Makespan {
            self.m
        } else {
            0
        }
    }

    pub fn is_excluded(&self, i: usize, j: usize) -> bool {
        self.excluded[i][j]
    }

    pub fn cuts(&self) -> &[LinearCut] {
        &self.cuts
    }

    pub fn add_cut(&mut self, cut: LinearCut) -> Result<(), MasterError> {
        if let Some(&bad) = cut.coeffs.keys().find(|k| !self.index.contains_key(k)) {
            return Err(MasterError::UnknownVariable(bad));
        }
        self.cuts.push(cut);
        Ok(())
    }

    pub fn add_cuts(&mut self, cuts: impl IntoIterator<Item = LinearCut>) -> Result<(), MasterError> {
        for c in cuts {
            self.add_cut(c)?;
        }
        Ok(())
    }

    fn x_index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// LP relaxation with some X fixed. Returns the LP over the free columns,
    /// the column of each variable (if free), and the objective constant.
    fn relaxation(&self, fix: &[Option<bool>]) -> (LinearProgram, Vec<Option<usize>>, f64, Vec<f64>) {
        let mut fixed_val = vec![0.0; self.vars.len()];
        let mut col = vec![None; self.vars.len()];
        let mut ncols = 0;
        for (k, &key) in self.vars.iter().enumerate() {
            let fixed = match key {
                VarKey::X(i, j) => {
                    if self.excluded[i][j] {
                        Some(false)
                    } else {
                        fix[self.x_index(i, j)]
                    }
                }
                _ => None,
            };
            match fixed {
                Some(v) => fixed_val[k] = if v { 1.0 } else { 0.0 },
                None => {
                    col[k] = Some(ncols);
                    ncols += 1;
                }
            }
        }
        let mut lp = LinearProgram::new(ncols);
        let mut constant = 0.0;
        let mut objective = |key: VarKey, c: f64, lp: &mut LinearProgram| {
            let k = self.index[&key];
            match col[k] {
                Some(cc) => lp.objective[cc] += c,
                None => constant += c * fixed_val[k],
            }
        };
        match self.objective {
            Objective::Makespan => objective(VarKey::Z, 1.0, &mut lp),
            Objective::TotalTardiness => {
                for i in 0..self.m {
                    objective(VarKey::Tvar(i), 1.0, &mut lp);
                }
            }
            Objective::AssignCost => {
                for i in 0..self.m {
                    for j in 0..self.n {
                        objective(VarKey::X(i, j), self.costs[i][j] as f64, &mut lp);
                    }
                }
            }
        }
        let push = |terms: &[(VarKey, f64)], sense: Sense, rhs: f64, lp: &mut LinearProgram| {
            let mut coeffs = Vec::with_capacity(terms.len());
            let mut rhs = rhs;
            for &(key, a) in terms {
                let k = self.index[&key];
                match col[k] {
                    Some(cc) => coeffs.push((cc, a)),
                    None => rhs -= a * fixed_val[k],
                }
            }
            if coeffs.is_empty() {
                let ok = match sense {
                    Sense::Ge => rhs <= FEAS_TOL,
                    Sense::Le => rhs >= -FEAS_TOL,
                    Sense::Eq => rhs.abs() <= FEAS_TOL,
                };
                if ok {
                    return;
                }
            }
            lp.add_row(coeffs, sense, rhs);
        };
        for j in 0..self.n {
            let terms: Vec<(VarKey, f64)> = (0..self.m).map(|i| (VarKey::X(i, j), 1.0)).collect();
            push(&terms, Sense::Eq, 1.0, &mut lp);
        }
        if self.objective == Objective::Makespan {
            for i in 0..self.m {
                push(&[(VarKey::Z, 1.0), (VarKey::Mvar(i), -1.0)], Sense::Ge, 0.0, &mut lp);
            }
        }
        for (k, &key) in self.vars.iter().enumerate() {
            if matches!(key, VarKey::X(..)) {
                // implied by the partition rows
                continue;
            }
            if let Some(u) = self.upper[k] {
                push(&[(key, 1.0)], Sense::Le, u, &mut lp);
            }
        }
        for cut in &self.cuts {
            let terms: Vec<(VarKey, f64)> =
                cut.coeffs.iter().map(|(&k, c)| (k, c.to_f64().expect("finite"))).collect();
            push(&terms, Sense::Ge, cut.rhs.to_f64().expect("finite"), &mut lp);
        }
        (lp, col, constant, fixed_val)
    }

    fn solve_node(&self, fix: &[Option<bool>]) -> Option<(f64, Vec<f64>)> {
        let (lp, col, constant, fixed_val) = self.relaxation(fix);
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                let full = (0..self.vars.len())
                    .map(|k| match col[k] {
                        Some(c) => x[c],
                        None => fixed_val[k],
                    })
                    .collect();
                Some((value + constant, full))
            }
            LpOutcome::Infeasible => None,
            LpOutcome::Unbounded => unreachable!("master relaxation is bounded below"),
        }
    }

    /// Optimal value of the root LP relaxation, `None` if infeasible.
    pub fn root_lp_bound(&self) -> Option<f64> {
        self.solve_node(&vec![None; self.n * self.m]).map(|(v, _)| v)
    }

    /// CPLEX-style LP text of the current model.
    pub fn to_lp_string(&self) -> String {
        let mut s = String::from("Minimize\n obj:");
        match self.objective {
            Objective::Makespan => s.push_str(" Z"),
            Objective::TotalTardiness => {
                for i in 0..self.m {
                    let _ = write!(s, " + T_{i}");
                }
            }
            Objective::AssignCost => {
                for i in 0..self.m {
                    for j in 0..self.n {
                        let _ = write!(s, " + {} X_{i}_{j}", self.costs[i][j]);
                    }
                }
            }
        }
        s.push_str("\nSubject To\n");
        for j in 0..self.n {
            let _ = write!(s, " part_{j}:");
            for i in 0..self.m {
                let _ = write!(s, " + X_{i}_{j}");
            }
            s.push_str(" = 1\n");
        }
        if self.objective == Objective::Makespan {
            for i in 0..self.m {
                let _ = writeln!(s, " epi_{i}: Z - M_{i} >= 0");
            }
        }
        for (c, cut) in self.cuts.iter().enumerate() {
            let _ = write!(s, " c{c}_{}:", cut.tag);
            for (k, a) in &cut.coeffs {
                let a = a.to_f64().unwrap();
                if a < 0.0 {
                    let _ = write!(s, " - {} {k}", -a);
                } else {
                    let _ = write!(s, " + {a} {k}");
                }
            }
            let _ = writeln!(s, " >= {}", cut.rhs.to_f64().unwrap());
        }
        s.push_str("Bounds\n");
        for (k, &key) in self.vars.iter().enumerate() {
            match key {
                VarKey::X(i, j) if self.excluded[i][j] => {
                    let _ = writeln!(s, " {key} = 0");
                }
                VarKey::X(..) => {}
                _ => {
                    let _ = writeln!(s, " 0 <= {key} <= {}", self.upper[k].unwrap_or(f64::INFINITY));
                }
            }
        }
        s.push_str("Binaries\n");
        for &key in &self.vars {
            if matches!(key, VarKey::X(..)) {
                let _ = writeln!(s, " {key}");
            }
        }
        s.push_str("End\n");
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MasterStatus {
    Optimal,
    Infeasible,
    /// Stopped by the deadline; the solution holds the incumbent, if any.
    Interrupted,
}

#[derive(Debug, Clone)]
pub struct MasterSolution {
    pub status: MasterStatus,
    pub objective: f64,
    pub assignment: Option<Assignment>,
    pub values: HashMap<VarKey, f64>,
    pub nodes: usize,
    pub lp_solves: usize,
}

/// An LP solution integral in `X`, as shown to the callback.
#[derive(Debug, Clone)]
pub struct IntegerNode {
    pub assignment: Assignment,
    pub values: HashMap<VarKey, f64>,
    /// LP value of this node.
    pub bound: f64,
    /// Smallest LP bound over this node and all open nodes.
    pub global_bound: f64,
}

impl IntegerNode {
    pub fn value(&self, key: VarKey) -> f64 {
        self.values.get(&key).copied().unwrap_or(0.0)
    }
}

pub type NodeCallback<'a> = dyn FnMut(&IntegerNode) -> Vec<LinearCut> + 'a;

#[derive(Debug, Clone, Default)]
pub struct MasterOptions {
    pub deadline: Option<Instant>,
}

struct OpenNode {
    bound: f64,
    seq: u64,
    fix: Vec<Option<bool>>,
}

impl PartialEq for OpenNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for OpenNode {}
impl PartialOrd for OpenNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenNode {
    // max-heap: smaller bound, then earlier seq, pops first
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then(other.seq.cmp(&self.seq))
    }
}

/// Solves the master to optimality under the current pool.
pub fn solve_master(model: &mut MasterModel, on_integer_node: Option<&mut NodeCallback<'_>>) -> MasterSolution {
    solve_master_with(model, on_integer_node, &MasterOptions::default())
}

pub fn solve_master_with(
    model: &mut MasterModel,
    mut on_integer_node: Option<&mut NodeCallback<'_>>,
    options: &MasterOptions,
) -> MasterSolution {
    let nx = model.n * model.m;
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    heap.push(OpenNode { bound: f64::NEG_INFINITY, seq, fix: vec![None; nx] });
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes = 0;
    let mut lp_solves = 0;
    let mut interrupted = false;

    while let Some(node) = heap.pop() {
        if options.deadline.is_some_and(|d| Instant::now() >= d) {
            interrupted = true;
            break;
        }
        if incumbent.as_ref().is_some_and(|(v, _)| node.bound >= v - FEAS_TOL) {
            continue;
        }
        nodes += 1;
        let mut previous: Option<Vec<f64>> = None;
        loop {
            lp_solves += 1;
            let Some((value, x)) = model.solve_node(&node.fix) else { break };
            if incumbent.as_ref().is_some_and(|(v, _)| value >= v - FEAS_TOL) {
                break;
            }
            // most fractional X, ties to the smallest (i, j)
            let mut branch: Option<(usize, f64)> = None;
            for k in 0..nx {
                let frac = x[k] - x[k].floor();
                let dist = frac.min(1.0 - frac);
                if dist > INT_TOL && branch.is_none_or(|(_, d)| dist > d + 1e-12) {
                    branch = Some((k, dist));
                }
            }
            if let Some((k, _)) = branch {
                for v in [true, false] {
                    let mut fix = node.fix.clone();
                    fix[k] = Some(v);
                    seq += 1;
                    heap.push(OpenNode { bound: value, seq, fix });
                }
                break;
            }
            // cuts that did not move the LP point were not violated by it
            let unchanged = previous
                .as_ref()
                .is_some_and(|p| p.iter().zip(&x).all(|(a, b)| (a - b).abs() <= 1e-9));
            if let (Some(cb), false) = (on_integer_node.as_deref_mut(), unchanged) {
                let open_min = heap.peek().map_or(f64::INFINITY, |n| n.bound);
                let view = IntegerNode {
                    assignment: extract_assignment(model, &x),
                    values: model.vars.iter().copied().zip(x.iter().copied()).collect(),
                    bound: value,
                    global_bound: value.min(open_min),
                };
                let cuts = cb(&view);
                if !cuts.is_empty() {
                    model.add_cuts(cuts).expect("callback cuts reference declared variables");
                    previous = Some(x);
                    continue;
                }
            }
            incumbent = Some((value, x));
            break;
        }
    }

    match incumbent {
        Some((value, x)) => MasterSolution {
            status: if interrupted { MasterStatus::Interrupted } else { MasterStatus::Optimal },
            objective: value,
            assignment: Some(extract_assignment(model, &x)),
            values: model.vars.iter().copied().zip(x).collect(),
            nodes,
            lp_solves,
        },
        None => MasterSolution {
            status: if interrupted { MasterStatus::Interrupted } else { MasterStatus::Infeasible },
            objective: f64::INFINITY,
            assignment: None,
            values: HashMap::new(),
            nodes,
            lp_solves,
        },
    }
}

fn extract_assignment(model: &MasterModel, x: &[f64]) -> Assignment {
    let facility_of = (0..model.n)
        .map(|j| {
            (0..model.m)
                .max_by(|&a, &b| x[model.x_index(a, j)].total_cmp(&x[model.x_index(b, j)]).then(b.cmp(&a)))
                .expect("at least one facility")
        })
        .collect();
    Assignment::new(facility_of)
}
