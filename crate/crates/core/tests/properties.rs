use proptest::prelude::*;

use lbbd::cumulative::{self, FacilitySubproblem, SubObjective};
use lbbd::driver::{self, Mode, SolveStatus, SolverConfig};
use lbbd::generator::{corpus_instance, GeneratorParams};
use lbbd::master;
use lbbd::model::{Facility, Instance, Job, Objective, Rational};
use lbbd::oracle;
use lbbd::relax::TardinessRelaxAux;

#[derive(Debug, Clone)]
struct RawJob {
    release: i64,
    proc: i64,
    demand_pick: i64,
    slack: i64,
}

fn raw_job() -> impl Strategy<Value = RawJob> {
    (0i64..=4, 1i64..=5, 0i64..3, 1i64..=3).prop_map(|(release, proc, demand_pick, slack)| RawJob {
        release,
        proc,
        demand_pick,
        slack,
    })
}

fn facility_instance(capacity: i64, raw: &[RawJob]) -> Instance {
    let jobs = raw
        .iter()
        .enumerate()
        .map(|(j, r)| Job {
            id: j as i64,
            release: r.release,
            due: r.release + r.proc * r.slack,
            proc_time: vec![r.proc],
            demand: vec![1 + r.demand_pick % capacity],
            cost: vec![1],
        })
        .collect();
    let mut inst = Instance::new(vec![Facility { id: 0, capacity }], jobs, Objective::Makespan);
    inst.horizon = inst.horizon.min(oracle::MAX_HORIZON);
    inst
}

fn kind() -> impl Strategy<Value = SubObjective> {
    prop_oneof![Just(SubObjective::Makespan), Just(SubObjective::Feasibility), Just(SubObjective::Tardiness)]
}

fn value(inst: &Instance, jobs: &[usize], kind: SubObjective) -> Option<i64> {
    cumulative::solve_subproblem(&FacilitySubproblem::new(inst, 0, jobs.to_vec(), kind)).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn engine_matches_oracle(capacity in 1i64..=3, raw in prop::collection::vec(raw_job(), 0..=5), kind in kind()) {
        let inst = facility_instance(capacity, &raw);
        let jobs: Vec<usize> = (0..raw.len()).collect();
        let sp = FacilitySubproblem::new(&inst, 0, jobs.clone(), kind);
        let got = cumulative::solve_subproblem(&sp).unwrap();
        let want = oracle::oracle_subproblem(&inst, 0, &jobs, kind).unwrap();
        prop_assert_eq!(got.value, want.optimum);
        if got.is_feasible() {
            prop_assert_eq!(cumulative::evaluate_schedule(&sp, &got.starts), got.value);
        }
    }

    #[test]
    fn removing_a_job_never_hurts(capacity in 1i64..=3, raw in prop::collection::vec(raw_job(), 1..=5), kind in kind(), drop in 0usize..5) {
        let inst = facility_instance(capacity, &raw);
        let all: Vec<usize> = (0..raw.len()).collect();
        let fewer: Vec<usize> = all.iter().copied().filter(|&j| j != drop % raw.len()).collect();
        match (value(&inst, &all, kind), value(&inst, &fewer, kind)) {
            (Some(a), Some(b)) => prop_assert!(b <= a),
            (Some(_), None) => prop_assert!(false, "subset infeasible while the set is feasible"),
            _ => {}
        }
    }

    #[test]
    fn job_order_does_not_matter(capacity in 1i64..=3, raw in prop::collection::vec(raw_job(), 1..=5), kind in kind()) {
        let inst = facility_instance(capacity, &raw);
        let mut reversed = raw.clone();
        reversed.reverse();
        let flipped = facility_instance(capacity, &reversed);
        let jobs: Vec<usize> = (0..raw.len()).collect();
        prop_assert_eq!(value(&inst, &jobs, kind), value(&flipped, &jobs, kind));
    }

    #[test]
    fn sorted_energy_bound_is_below_tardiness(capacity in 1i64..=3, raw in prop::collection::vec(raw_job(), 1..=5)) {
        let inst = facility_instance(capacity, &raw);
        let jobs: Vec<usize> = (0..raw.len()).collect();
        let aux = TardinessRelaxAux::new(&inst, 0);
        let bound: Rational = (0..raw.len()).map(|k| aux.full_bound(&inst, k)).sum();
        if let Some(t) = value(&inst, &jobs, SubObjective::Tardiness) {
            prop_assert!(bound <= Rational::from_integer(t));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_matches_oracle(seed in any::<u64>(), pick in 0usize..3, bnc in any::<bool>()) {
        let objective = [Objective::Makespan, Objective::AssignCost, Objective::TotalTardiness][pick];
        let inst = corpus_instance(seed, 0, &GeneratorParams::default(), objective);
        let mode = if bnc { Mode::BranchAndCheck } else { Mode::Iterative };
        let sol = driver::solve(&inst, &SolverConfig { mode, ..SolverConfig::default() }).unwrap();
        let expected = oracle::oracle_solve(&inst).unwrap().optimum;
        match expected {
            Some(v) => {
                prop_assert_eq!(sol.status, SolveStatus::Optimal);
                prop_assert_eq!(sol.value, Some(v));
                let a = sol.assignment.unwrap();
                let outcomes = lbbd::cuts::facility_outcomes(&inst, &a);
                prop_assert_eq!(driver::aggregate(&inst, &a, &outcomes), Some(v));
            }
            None => prop_assert_eq!(sol.status, SolveStatus::Infeasible),
        }
    }

    #[test]
    fn root_lp_is_a_lower_bound(seed in any::<u64>(), pick in 0usize..3) {
        let objective = [Objective::Makespan, Objective::AssignCost, Objective::TotalTardiness][pick];
        let inst = corpus_instance(seed, 0, &GeneratorParams::default(), objective);
        let Some(opt) = oracle::oracle_solve(&inst).unwrap().optimum else { return Ok(()) };
        let mut model = master::build_master(&inst, objective).unwrap();
        model.add_cuts(lbbd::relax::relaxations_for(&inst)).unwrap();
        let lp = model.root_lp_bound().unwrap();
        prop_assert!(lp <= opt as f64 + 1e-6);
    }

    #[test]
    fn warm_start_and_multi_pass_keep_the_optimum(seed in any::<u64>(), pick in 0usize..3) {
        let objective = [Objective::Makespan, Objective::AssignCost, Objective::TotalTardiness][pick];
        let inst = corpus_instance(seed, 0, &GeneratorParams::default(), objective);
        let base = driver::solve(&inst, &SolverConfig::default()).unwrap();
        let tuned = SolverConfig { warm_start_count: 4, multi_pass_strengthening: true, ..SolverConfig::default() };
        prop_assert_eq!(driver::solve(&inst, &tuned).unwrap().value, base.value);
        let plain = SolverConfig { analytic_cuts: false, strengthen: false, relaxations: false, ..SolverConfig::default() };
        prop_assert_eq!(driver::solve(&inst, &plain).unwrap().value, base.value);
    }
}
