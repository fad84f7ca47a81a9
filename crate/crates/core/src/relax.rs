//! Subproblem relaxations written in master variables, added once when the
//! master is built.

use std::collections::{BTreeSet, HashMap};

use num_traits::Zero;

use crate::model::{rat, Assignment, CutTag, Instance, LinearCut, Objective, Rational, VarKey};

/// Candidate interval `[t1, t2]` for the energy inequality on one facility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPair {
    pub facility: usize,
    pub t1: i64,
    pub t2: i64,
    /// `(1/C_i) sum_{J(t1,t2)} p_ij c_ij - (t2 - t1)`.
    pub theta: Rational,
}

impl WindowPair {
    fn contains(&self, other: &WindowPair) -> bool {
        self.t1 <= other.t1 && other.t2 <= self.t2
    }
}

/// Jobs whose window lies inside `[t1, t2]`.
pub fn window_jobs(instance: &Instance, t1: i64, t2: i64) -> Vec<usize> {
    (0..instance.num_jobs())
        .filter(|&j| instance.jobs[j].release >= t1 && instance.jobs[j].due <= t2)
        .collect()
}

fn window_energy(instance: &Instance, i: usize, t1: i64, t2: i64) -> i64 {
    window_jobs(instance, t1, t2).iter().map(|&j| instance.jobs[j].energy(i)).sum()
}

/// All `(r_j, d_j')` pairs with `r_j < d_j'` and a nonempty window, per facility.
pub fn candidate_pairs(instance: &Instance) -> Vec<WindowPair> {
    let releases: BTreeSet<i64> = instance.jobs.iter().map(|j| j.release).collect();
    let dues: BTreeSet<i64> = instance.jobs.iter().map(|j| j.due).collect();
    let mut out = Vec::new();
    for (i, facility) in instance.facilities.iter().enumerate() {
        for &t1 in &releases {
            for &t2 in dues.iter().filter(|&&t2| t2 > t1) {
                if window_jobs(instance, t1, t2).is_empty() {
                    continue;
                }
                let theta = Rational::new(window_energy(instance, i, t1, t2), facility.capacity) - rat(t2 - t1);
                out.push(WindowPair { facility: i, t1, t2, theta });
            }
        }
    }
    out
}

/// Drops every pair that contains a kept pair of the same facility with at
/// least its tightness. Identical pairs collapse to one.
pub fn prune_dominated(pairs: &[WindowPair]) -> Vec<WindowPair> {
    let mut order: Vec<&WindowPair> = pairs.iter().collect();
    order.sort_by_key(|p| (p.facility, p.t2 - p.t1, p.t1));
    let mut kept: Vec<WindowPair> = Vec::new();
    for p in order {
        let dominated = kept
            .iter()
            .any(|k| k.facility == p.facility && p.contains(k) && k.theta >= p.theta);
        if !dominated {
            kept.push(p.clone());
        }
    }
    kept
}

fn window_cut(instance: &Instance, pair: &WindowPair) -> LinearCut {
    let i = pair.facility;
    let mut cut = LinearCut::new(CutTag::RelaxEnergy);
    for j in window_jobs(instance, pair.t1, pair.t2) {
        cut.add(VarKey::X(i, j), rat(-instance.jobs[j].energy(i)));
    }
    cut.with_rhs(rat(-instance.facilities[i].capacity * (pair.t2 - pair.t1)))
}

/// `sum_{J(t1,t2)} p_ij c_ij X(i,j) <= C_i (t2 - t1)` over the undominated pairs.
pub fn energy_window_inequalities(instance: &Instance) -> Vec<LinearCut> {
    prune_dominated(&candidate_pairs(instance)).iter().map(|p| window_cut(instance, p)).collect()
}

/// The same family without dominance pruning.
pub fn energy_window_inequalities_unpruned(instance: &Instance) -> Vec<LinearCut> {
    candidate_pairs(instance).iter().map(|p| window_cut(instance, p)).collect()
}

/// `M >= t + (1/C_i) sum_{r_j >= t} p_ij c_ij X(i,j)` for each distinct
/// release time `t`. At `t = 0` the left side is `Mvar(i)`; for later `t` it
/// is `Z`, since a facility that receives none of the late jobs may finish
/// before `t`.
pub fn makespan_relaxation(instance: &Instance) -> Vec<LinearCut> {
    let releases: BTreeSet<i64> = instance.jobs.iter().map(|j| j.release.max(0)).collect();
    let mut out = Vec::new();
    for (i, facility) in instance.facilities.iter().enumerate() {
        for &t in &releases {
            let target = if t == 0 { VarKey::Mvar(i) } else { VarKey::Z };
            let mut cut = LinearCut::new(CutTag::RelaxMakespan);
            cut.add(target, rat(1));
            for (j, job) in instance.jobs.iter().enumerate() {
                if job.release.max(0) >= t {
                    cut.add(VarKey::X(i, j), -Rational::new(job.energy(i), facility.capacity));
                }
            }
            out.push(cut.with_rhs(rat(t)));
        }
    }
    out
}

/// `Tvar(i) >= (1/C_i) sum_{d_j <= d_k} p_ij c_ij X(i,j) - d_k` for each `k`.
pub fn tardiness_relaxation_1(instance: &Instance) -> Vec<LinearCut> {
    let mut out = Vec::new();
    for (i, facility) in instance.facilities.iter().enumerate() {
        for k in 0..instance.num_jobs() {
            let dk = instance.jobs[k].due;
            let mut cut = LinearCut::new(CutTag::RelaxTardiness1);
            cut.add(VarKey::Tvar(i), rat(1));
            for (j, job) in instance.jobs.iter().enumerate() {
                if job.release >= 0 && job.due <= dk {
                    cut.add(VarKey::X(i, j), -Rational::new(job.energy(i), facility.capacity));
                }
            }
            out.push(cut.with_rhs(rat(-dk)));
        }
    }
    out
}

/// Orderings and constants behind the second tardiness relaxation on one
/// facility. Position `k` refers to the `k`-th job by due date (ties by index).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TardinessRelaxAux {
    pub facility: usize,
    /// Jobs by ascending due date.
    pub due_order: Vec<usize>,
    /// Jobs by ascending energy `p_ij c_ij`.
    pub energy_order: Vec<usize>,
    /// `f[k]`: sum of the `k + 1` smallest energies.
    pub prefix_energy: Vec<i64>,
    /// `U[k] = f[k] - d_k`.
    pub big_m: Vec<i64>,
}

impl TardinessRelaxAux {
    pub fn new(instance: &Instance, i: usize) -> Self {
        let n = instance.num_jobs();
        let mut due_order: Vec<usize> = (0..n).collect();
        due_order.sort_by_key(|&j| (instance.jobs[j].due, j));
        let mut energy_order: Vec<usize> = (0..n).collect();
        energy_order.sort_by_key(|&j| (instance.jobs[j].energy(i), j));
        let prefix_energy: Vec<i64> = energy_order
            .iter()
            .scan(0, |acc, &j| {
                *acc += instance.jobs[j].energy(i);
                Some(*acc)
            })
            .collect();
        let big_m = (0..n).map(|k| prefix_energy[k] - instance.jobs[due_order[k]].due).collect();
        TardinessRelaxAux { facility: i, due_order, energy_order, prefix_energy, big_m }
    }

    /// The bound on the tardiness of the `k`-th due-date job when the whole
    /// job set sits on this facility.
    pub fn full_bound(&self, instance: &Instance, k: usize) -> Rational {
        let c = instance.facilities[self.facility].capacity;
        let d = instance.jobs[self.due_order[k]].due;
        (Rational::new(self.prefix_energy[k], c) - rat(d)).max(Rational::zero())
    }
}

/// Second tardiness relaxation: `Tvar(i) >= sum_k That(i,k)` and, for each
/// due-date position `k` held by job `j_k`,
///
/// `That(i,k) >= (1/C_i)(f_k - e_k sum_{l <= k} (1 - X(i,j_l))) - d_k - U_k (1 - X(i,j_k))`
///
/// with `f_k` the sum of the `k` smallest energies and `e_k` the `k`-th
/// smallest. When `j` of the first `k` due-date jobs are elsewhere, job `j_k`
/// is `(k - j)`-th by due date on the facility and the `k - j` smallest
/// assigned energies add up to at least `f_k - j e_k`.
pub fn tardiness_relaxation_2(instance: &Instance) -> Vec<LinearCut> {
    let n = instance.num_jobs();
    let mut out = Vec::new();
    for i in 0..instance.num_facilities() {
        let aux = TardinessRelaxAux::new(instance, i);
        let c = instance.facilities[i].capacity;
        let mut sum = LinearCut::new(CutTag::RelaxTardiness2);
        sum.add(VarKey::Tvar(i), rat(1));
        for k in 0..n {
            sum.add(VarKey::That(i, k), rat(-1));
        }
        out.push(sum);
        for k in 0..n {
            let jk = aux.due_order[k];
            let ek = instance.jobs[aux.energy_order[k]].energy(i);
            let dk = instance.jobs[jk].due;
            let u = rat(aux.big_m[k]);
            let slope = Rational::new(ek, c);
            let mut cut = LinearCut::new(CutTag::RelaxTardiness2);
            cut.add(VarKey::That(i, k), rat(1));
            for &jl in &aux.due_order[..=k] {
                cut.add(VarKey::X(i, jl), -slope);
            }
            cut.add(VarKey::X(i, jk), -u);
            let rhs = Rational::new(aux.prefix_energy[k] - ek * (k as i64 + 1), c) - rat(dk) - u;
            out.push(cut.with_rhs(rhs));
        }
    }
    out
}

/// Every relaxation inequality for the instance objective.
pub fn relaxations_for(instance: &Instance) -> Vec<LinearCut> {
    match instance.objective {
        Objective::AssignCost => energy_window_inequalities(instance),
        Objective::Makespan => {
            let mut v = energy_window_inequalities(instance);
            v.extend(makespan_relaxation(instance));
            v
        }
        Objective::TotalTardiness => {
            let mut v = tardiness_relaxation_1(instance);
            v.extend(tardiness_relaxation_2(instance));
            v
        }
    }
}

/// The master point for an assignment with per-facility subproblem values:
/// `X` from the assignment, `Mvar`/`Tvar` at the values, `Z` at their maximum,
/// and each `That` at the smallest value its own inequalities allow.
pub fn master_point(
    instance: &Instance,
    assignment: &Assignment,
    values: &[i64],
    cuts: &[LinearCut],
) -> HashMap<VarKey, Rational> {
    let mut point = HashMap::new();
    for i in 0..instance.num_facilities() {
        for j in 0..instance.num_jobs() {
            point.insert(VarKey::X(i, j), rat(assignment.x(i, j) as i64));
        }
        point.insert(VarKey::Mvar(i), rat(values[i]));
        point.insert(VarKey::Tvar(i), rat(values[i]));
        for k in 0..instance.num_jobs() {
            point.insert(VarKey::That(i, k), Rational::zero());
        }
    }
    point.insert(VarKey::Z, rat(values.iter().copied().max().unwrap_or(0)));
    for cut in cuts {
        if let Some(key @ VarKey::That(..)) = cut.target() {
            if let Some(b) = cut.bound_at(key, assignment) {
                let slot = point.get_mut(&key).expect("That is in the point");
                if b > *slot {
                    *slot = b;
                }
            }
        }
    }
    point
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Facility, Job};

    fn job(r: i64, d: i64, p: i64, c: i64) -> Job {
        Job { id: 0, release: r, due: d, proc_time: vec![p], demand: vec![c], cost: vec![1] }
    }

    fn single(capacity: i64, jobs: Vec<Job>, objective: Objective) -> Instance {
        let mut jobs = jobs;
        for (k, j) in jobs.iter_mut().enumerate() {
            j.id = k as i64;
        }
        Instance::new(vec![Facility { id: 0, capacity }], jobs, objective)
    }

    #[test]
    fn one_job_window() {
        let inst = single(1, vec![job(0, 4, 3, 1)], Objective::AssignCost);
        let cuts = energy_window_inequalities(&inst);
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].coeffs[&VarKey::X(0, 0)], rat(-3));
        assert_eq!(cuts[0].rhs, rat(-4));
    }

    #[test]
    fn nested_outer_window_pruned() {
        // [1,3] holds a tight job, [0,5] adds little energy
        let inst = single(1, vec![job(1, 3, 2, 1), job(0, 5, 1, 1)], Objective::AssignCost);
        let pairs = candidate_pairs(&inst);
        let inner = pairs.iter().find(|p| (p.t1, p.t2) == (1, 3)).unwrap();
        let outer = pairs.iter().find(|p| (p.t1, p.t2) == (0, 5)).unwrap();
        assert_eq!(inner.theta, rat(0));
        assert_eq!(outer.theta, rat(-2));
        let kept = prune_dominated(&pairs);
        assert!(kept.iter().any(|p| (p.t1, p.t2) == (1, 3)));
        assert!(!kept.iter().any(|p| (p.t1, p.t2) == (0, 5)));
    }

    #[test]
    fn identical_pairs_collapse() {
        let p = WindowPair { facility: 0, t1: 0, t2: 4, theta: rat(1) };
        assert_eq!(prune_dominated(&[p.clone(), p.clone()]), vec![p]);
    }

    #[test]
    fn lemma_condition_prunes_outer() {
        let inner = WindowPair { facility: 0, t1: 1, t2: 3, theta: rat(2) };
        let outer = WindowPair { facility: 0, t1: 0, t2: 5, theta: rat(1) };
        assert_eq!(prune_dominated(&[outer, inner.clone()]), vec![inner]);
    }

    #[test]
    fn makespan_relaxation_total_work() {
        let inst = single(1, vec![job(0, 20, 3, 1), job(0, 20, 2, 1)], Objective::Makespan);
        let cuts = makespan_relaxation(&inst);
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].coeffs[&VarKey::Mvar(0)], rat(1));
        assert_eq!(cuts[0].coeffs[&VarKey::X(0, 0)], rat(-3));
        assert_eq!(cuts[0].coeffs[&VarKey::X(0, 1)], rat(-2));
        assert_eq!(cuts[0].rhs, rat(0));
    }

    #[test]
    fn late_release_cohort_bounds_z() {
        let inst = single(2, vec![job(0, 20, 3, 1), job(4, 20, 2, 2)], Objective::Makespan);
        let cuts = makespan_relaxation(&inst);
        let late = cuts.iter().find(|c| c.rhs == rat(4)).unwrap();
        assert_eq!(late.coeffs.len(), 2);
        assert_eq!(late.coeffs[&VarKey::Z], rat(1));
        assert_eq!(late.coeffs[&VarKey::X(0, 1)], rat(-2));
    }

    #[test]
    fn tardiness_relaxation_1_single_job() {
        let inst = single(1, vec![job(0, 2, 3, 1)], Objective::TotalTardiness);
        let cuts = tardiness_relaxation_1(&inst);
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].coeffs[&VarKey::X(0, 0)], rat(-3));
        assert_eq!(cuts[0].rhs, rat(-2));
    }

    #[test]
    fn tardiness_relaxation_2_collapses_for_one_job() {
        let inst = single(1, vec![job(0, 2, 3, 1)], Objective::TotalTardiness);
        let cuts = tardiness_relaxation_2(&inst);
        let cut = cuts.iter().find(|c| c.target() == Some(VarKey::That(0, 0))).unwrap();
        let on = Assignment::new(vec![0]);
        assert_eq!(cut.bound_at(VarKey::That(0, 0), &on), Some(rat(1)));
        let off = Assignment::new(vec![1]);
        assert!(cut.bound_at(VarKey::That(0, 0), &off).unwrap() <= rat(0));
    }

    #[test]
    fn energy_ties_broken_by_index() {
        let inst = single(1, vec![job(0, 9, 2, 1), job(0, 3, 1, 2)], Objective::TotalTardiness);
        let aux = TardinessRelaxAux::new(&inst, 0);
        assert_eq!(aux.energy_order, vec![0, 1]);
        assert_eq!(aux.due_order, vec![1, 0]);
        assert_eq!(aux.prefix_energy, vec![2, 4]);
        assert_eq!(aux.big_m, vec![2 - 3, 4 - 9]);
    }

    /// Job 0 (d=0, energy 5) sits on facility 1; jobs 1 and 2 (energy 1,
    /// d=1 and d=5) share facility 0 with zero tardiness. Summing the smallest
    /// energies over X-weighted jobs, as in the textbook form, charges job 1
    /// with `(1 + 1) - 1 = 1`.
    #[test]
    fn textbook_form_overcharges_partial_assignments() {
        let unit = |d: i64, p: i64| Job { id: 0, release: 0, due: d, proc_time: vec![p, p], demand: vec![1, 1], cost: vec![1, 1] };
        let inst = Instance::new(
            vec![Facility { id: 0, capacity: 1 }, Facility { id: 1, capacity: 1 }],
            vec![unit(0, 5), unit(1, 1), unit(5, 1)],
            Objective::TotalTardiness,
        );
        let a = Assignment::new(vec![1, 0, 0]);
        let aux = TardinessRelaxAux::new(&inst, 0);
        assert_eq!(aux.due_order, vec![0, 1, 2]);
        assert_eq!(aux.energy_order, vec![1, 2, 0]);
        // textbook right-hand side at k = 1 (job 1), X(0,1) = 1
        let textbook: i64 = aux.energy_order[..2].iter().map(|&j| inst.jobs[j].energy(0) * a.x(0, j) as i64).sum::<i64>() - 1;
        assert_eq!(textbook, 1);
        let true_value = crate::cumulative::solve_subproblem(&crate::cumulative::FacilitySubproblem::new(
            &inst,
            0,
            vec![1, 2],
            crate::cumulative::SubObjective::Tardiness,
        ))
        .unwrap()
        .value;
        assert_eq!(true_value, Some(0));

        let cuts = tardiness_relaxation_2(&inst);
        let point = master_point(&inst, &a, &[0, 5], &cuts);
        assert!(cuts.iter().all(|c| c.satisfied_by(|k| point[&k])));
    }
}
