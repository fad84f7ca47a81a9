//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::ExitCode;
use std::time::Instant;

use lbbd::check::{self, InstanceCheck};
use lbbd::cumulative::{self, FacilitySubproblem, SubObjective};
use lbbd::driver::{self, SolverConfig};
use lbbd::generator::{corpus_instance, GeneratorParams, Lcg};
use lbbd::model::{Facility, Instance, Job, Objective};
use lbbd::oracle;

const CORPUS_SEED: u64 = 20240601;
const CORPUS_SIZE: u64 = 200;
const ENGINE_SEED: u64 = 77;
const ENGINE_CASES: usize = 500;
const OBJECTIVES: [Objective; 3] = [Objective::Makespan, Objective::AssignCost, Objective::TotalTardiness];

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn outcome(name: &'static str, failures: &[String], detail: String) -> Outcome {
    let mut detail = detail;
    if let Some(first) = failures.first() {
        detail = format!("{detail}; {} failures, first: {first}", failures.len());
    }
    Outcome { name, passed: failures.is_empty(), detail }
}

struct Run {
    label: String,
    instance: Instance,
    check: InstanceCheck,
}

fn corpus() -> Vec<Run> {
    let params = GeneratorParams::default();
    let config = SolverConfig::default();
    let mut runs = Vec::new();
    for index in 0..CORPUS_SIZE {
        for objective in OBJECTIVES {
            let instance = corpus_instance(CORPUS_SEED, index, &params, objective);
            let check = check::check_instance(&instance, &config).expect("corpus instances satisfy the oracle guard");
            runs.push(Run { label: format!("#{index} {objective}"), instance, check });
        }
    }
    runs
}

fn collect(runs: &[Run], f: impl Fn(&InstanceCheck) -> &Vec<String>) -> Vec<String> {
    runs.iter().flat_map(|r| f(&r.check).iter().map(move |s| format!("{}: {s}", r.label))).collect()
}

fn oracle_equivalence(runs: &[Run]) -> Outcome {
    let failures: Vec<String> = runs
        .iter()
        .filter(|r| r.check.iterative != r.check.oracle)
        .map(|r| format!("{}: lbbd {:?} oracle {:?}", r.label, r.check.iterative, r.check.oracle))
        .collect();
    let infeasible = runs.iter().filter(|r| r.check.oracle.is_none()).count();
    outcome("oracle equivalence", &failures, format!("{} runs, {infeasible} infeasible", runs.len()))
}

fn mode_equivalence(runs: &[Run]) -> Outcome {
    let failures: Vec<String> = runs
        .iter()
        .filter(|r| r.check.branch_and_check != r.check.iterative)
        .map(|r| format!("{}: iterative {:?} bnc {:?}", r.label, r.check.iterative, r.check.branch_and_check))
        .collect();
    outcome("mode equivalence", &failures, format!("{} runs", runs.len()))
}

fn cut_validity(runs: &[Run]) -> Outcome {
    let failures = collect(runs, |c| &c.cut_violations);
    let cuts: usize = runs.iter().map(|r| r.check.cuts_checked).sum();
    outcome("cut validity sweep", &failures, format!("{cuts} cuts against every assignment"))
}

fn anchor(runs: &[Run]) -> Outcome {
    let failures = collect(runs, |c| &c.anchor_violations);
    outcome("anchor property", &failures, format!("{} runs", runs.len()))
}

fn relaxations(runs: &[Run]) -> Outcome {
    let mut failures = collect(runs, |c| &c.relaxation_violations);
    let pruned: Vec<&Run> = runs.iter().filter(|r| r.check.pruning_sound.is_some()).collect();
    failures.extend(
        pruned
            .iter()
            .filter(|r| r.check.pruning_sound == Some(false))
            .map(|r| format!("{}: pruning changed the root LP", r.label)),
    );
    if pruned.len() < 50 {
        failures.push(format!("only {} pruning comparisons", pruned.len()));
    }
    outcome("relaxation validity", &failures, format!("{} pruning comparisons", pruned.len()))
}

fn convergence(runs: &[Run]) -> Outcome {
    let failures = collect(runs, |c| &c.convergence_violations);
    let max_iter = runs.iter().map(|r| r.check.iterations).max().unwrap_or(0);
    outcome("convergence bookkeeping", &failures, format!("max {max_iter} iterations"))
}

fn median(mut v: Vec<usize>) -> f64 {
    v.sort_unstable();
    if v.is_empty() {
        return 0.0;
    }
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

fn ablation(runs: &[Run]) -> Outcome {
    let config = SolverConfig { relaxations: false, ..SolverConfig::default() };
    let mut failures = Vec::new();
    let mut with = Vec::new();
    let mut without = Vec::new();
    for r in runs {
        let sol = driver::solve(&r.instance, &config).expect("valid instance");
        let value = if sol.status == driver::SolveStatus::Optimal { sol.value } else { None };
        if value != r.check.iterative {
            failures.push(format!("{}: {:?} without relaxations, {:?} with", r.label, value, r.check.iterative));
        }
        with.push(r.check.iterations);
        without.push(sol.trace.iterations.len());
    }
    let (m_with, m_without) = (median(with), median(without));
    if m_without < m_with {
        failures.push(format!("median iterations fell from {m_with} to {m_without}"));
    }
    outcome("ablation direction", &failures, format!("median iterations {m_with} with, {m_without} without"))
}

fn random_facility(rng: &mut Lcg) -> (Instance, Vec<usize>) {
    let capacity = rng.range(1, 3);
    let n = rng.range(1, 6) as usize;
    let jobs: Vec<Job> = (0..n)
        .map(|j| {
            let release = rng.range(0, 4);
            let p = rng.range(1, 5);
            let c = rng.range(1, capacity);
            let due = release + p * rng.range(1, 3);
            Job { id: j as i64, release, due, proc_time: vec![p], demand: vec![c], cost: vec![1] }
        })
        .collect();
    let mut inst = Instance::new(vec![Facility { id: 0, capacity }], jobs, Objective::Makespan);
    inst.horizon = inst.horizon.min(oracle::MAX_HORIZON);
    (inst, (0..n).collect())
}

fn engine_equivalence() -> Outcome {
    let mut rng = Lcg::new(ENGINE_SEED);
    let mut failures = Vec::new();
    let kinds = [SubObjective::Makespan, SubObjective::Feasibility, SubObjective::Tardiness];
    for case in 0..ENGINE_CASES {
        let (inst, jobs) = random_facility(&mut rng);
        let kind = kinds[case % kinds.len()];
        let sp = FacilitySubproblem::new(&inst, 0, jobs.clone(), kind);
        let got = cumulative::solve_subproblem(&sp).expect("demands fit").value;
        let want = oracle::oracle_subproblem(&inst, 0, &jobs, kind).expect("guarded").optimum;
        if got != want {
            failures.push(format!("case {case} {kind:?}: cumulative {got:?} oracle {want:?}"));
        }
    }
    outcome("subproblem engine equivalence", &failures, format!("{ENGINE_CASES} single-facility cases"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let runs = corpus();
    let results = [
        oracle_equivalence(&runs),
        mode_equivalence(&runs),
        cut_validity(&runs),
        anchor(&runs),
        relaxations(&runs),
        convergence(&runs),
        ablation(&runs),
        engine_equivalence(),
    ];
    let mut ok = true;
    for (k, r) in results.iter().enumerate() {
        println!("criterion {} {}: {} ({})", k + 1, r.name, if r.passed { "PASS" } else { "FAIL" }, r.detail);
        ok &= r.passed;
    }
    println!("acceptance: {} in {:.1}s", if ok { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
