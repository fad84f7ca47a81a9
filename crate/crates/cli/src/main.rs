use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lbbd::check;
use lbbd::cuts::Fault;
use lbbd::driver::{self, LbbdSolution, Mode, SolveStatus, SolverConfig};
use lbbd::generator::{corpus_instance, GeneratorParams};
use lbbd::model::{Instance, Objective, Severity};
use lbbd::oracle;

#[derive(Parser)]
#[command(name = "lbbd", version, about = "Logic-based Benders decomposition for assignment and scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance file.
    Solve(SolveArgs),
    /// Cross-check both solver modes against the brute-force oracle on random instances.
    Check(CheckArgs),
    /// Time solver configurations on a family of instances; CSV on stdout.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Iterative,
    Bnc,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Iterative => Mode::Iterative,
            ModeArg::Bnc => Mode::BranchAndCheck,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    Makespan,
    Cost,
    Tardiness,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Objective {
        match o {
            ObjectiveArg::Makespan => Objective::Makespan,
            ObjectiveArg::Cost => Objective::AssignCost,
            ObjectiveArg::Tardiness => Objective::TotalTardiness,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Ablation {
    Relax,
    Analytic,
    Nogood,
}

#[derive(Args, Clone)]
struct SolverFlags {
    #[arg(long, value_enum, default_value = "iterative")]
    mode: ModeArg,
    /// Disable subproblem relaxations in the master.
    #[arg(long)]
    no_relax: bool,
    /// Disable analytic cuts.
    #[arg(long)]
    no_analytic: bool,
    /// Repeat support reduction until no job can be removed.
    #[arg(long)]
    multi_pass: bool,
    /// Number of heuristic assignments whose cuts seed the master.
    #[arg(long, value_name = "K", default_value_t = 0)]
    warm_start: usize,
    #[arg(long, value_name = "K", value_parser = clap::value_parser!(u64).range(1..))]
    iter_budget: Option<u64>,
    /// Wall-clock budget in seconds.
    #[arg(long, value_name = "SEC")]
    time_budget: Option<f64>,
}

impl SolverFlags {
    fn config(&self) -> Result<SolverConfig, String> {
        let time_budget = match self.time_budget {
            Some(s) if !(s > 0.0 && s.is_finite()) => return Err(format!("--time-budget must be positive, got {s}")),
            Some(s) => Some(Duration::from_secs_f64(s)),
            None => None,
        };
        Ok(SolverConfig {
            mode: self.mode.into(),
            warm_start_count: self.warm_start,
            iteration_budget: self.iter_budget.map(|k| k as usize),
            time_budget,
            analytic_cuts: !self.no_analytic,
            relaxations: !self.no_relax,
            multi_pass_strengthening: self.multi_pass,
            ..SolverConfig::default()
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_name = "PATH")]
    instance: PathBuf,
    /// Override the objective stored in the instance.
    #[arg(long, value_enum)]
    objective: Option<ObjectiveArg>,
    #[command(flatten)]
    solver: SolverFlags,
    /// Write the iteration log here.
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
    /// Accepted for symmetry with the generating subcommands; the solver is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Clone)]
struct FamilyFlags {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    min_facilities: usize,
    #[arg(long, default_value_t = 2)]
    max_facilities: usize,
    #[arg(long, default_value_t = 2)]
    min_jobs: usize,
    #[arg(long, default_value_t = 5)]
    max_jobs: usize,
    /// Cap on the generated horizon.
    #[arg(long, default_value_t = 12)]
    horizon_cap: i64,
}

impl FamilyFlags {
    fn params(&self) -> Result<GeneratorParams, String> {
        if self.min_facilities == 0 || self.min_facilities > self.max_facilities {
            return Err("facility bounds must satisfy 1 <= min <= max".into());
        }
        if self.min_jobs == 0 || self.min_jobs > self.max_jobs {
            return Err("job bounds must satisfy 1 <= min <= max".into());
        }
        Ok(GeneratorParams {
            min_facilities: self.min_facilities,
            max_facilities: self.max_facilities,
            min_jobs: self.min_jobs,
            max_jobs: self.max_jobs,
            horizon_cap: Some(self.horizon_cap),
        })
    }
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 25)]
    count: u64,
    #[command(flatten)]
    family: FamilyFlags,
    /// Objectives to check; all three by default.
    #[arg(long, value_enum)]
    objective: Vec<ObjectiveArg>,
    #[arg(long)]
    no_relax: bool,
    #[arg(long)]
    no_analytic: bool,
    /// Emit a deliberately invalid analytic cut, to confirm the sweeps notice.
    #[arg(long)]
    inject_fault: bool,
    /// Where failing instances are written.
    #[arg(long, value_name = "DIR", default_value = ".")]
    dump_dir: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Instance files; when absent a random family is generated.
    #[arg(long, value_name = "PATH")]
    instance: Vec<PathBuf>,
    #[arg(long, default_value_t = 10)]
    count: u64,
    #[command(flatten)]
    family: FamilyFlags,
    #[arg(long, value_enum, default_value = "makespan")]
    objective: ObjectiveArg,
    #[command(flatten)]
    solver: SolverFlags,
    /// Also run with this component switched off.
    #[arg(long, value_enum)]
    ablate: Vec<Ablation>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Check(args) => cmd_check(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn load(path: &Path) -> Result<Instance, String> {
    let inst = Instance::load(path).map_err(|e| format!("{}: {e}", path.display()))?;
    for d in inst.validate() {
        if d.severity == Severity::Warning {
            eprintln!("{}: {d}", path.display());
        }
    }
    Ok(inst)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Iterative => "iterative",
        Mode::BranchAndCheck => "bnc",
    }
}

fn exit_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal => 0,
        SolveStatus::Infeasible => 2,
        SolveStatus::BudgetExhausted => 3,
    }
}

fn cmd_solve(args: SolveArgs) -> Result<u8, String> {
    let mut inst = load(&args.instance)?;
    if let Some(o) = args.objective {
        inst = inst.with_objective(o.into());
    }
    let config = args.solver.config()?;
    let sol = driver::solve(&inst, &config).map_err(|e| e.to_string())?;
    if let Some(path) = &args.trace {
        sol.trace.write(path).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let value = if sol.status == SolveStatus::Optimal { sol.value } else { None };
    let fields = [
        ("instance", args.instance.display().to_string()),
        ("mode", mode_name(config.mode).to_string()),
        ("objective", inst.objective.to_string()),
        ("relax", on_off(config.relaxations)),
        ("analytic", on_off(config.analytic_cuts)),
        ("warm_start", config.warm_start_count.to_string()),
        ("status", sol.status.to_string()),
        ("value", opt(value)),
        ("lower_bound", opt(sol.lower_bound)),
        ("upper_bound", opt(sol.value)),
        ("iterations", sol.trace.iterations.len().to_string()),
        ("master_solves", sol.trace.master_solves.to_string()),
        ("time_ms", format!("{}", sol.trace.total_ms.round() as u64)),
        ("trace", args.trace.as_ref().map_or_else(|| "-".to_string(), |p| p.display().to_string())),
    ];
    let line: Vec<String> = fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("{}", line.join(" "));
    Ok(exit_code(sol.status))
}

fn on_off(b: bool) -> String {
    if b { "on" } else { "off" }.to_string()
}

fn cmd_check(args: CheckArgs) -> Result<u8, String> {
    let params = args.family.params()?;
    if params.max_jobs * params.max_facilities > oracle::MAX_VARS {
        return Err(format!("max_jobs * max_facilities must be at most {}", oracle::MAX_VARS));
    }
    if args.family.horizon_cap > oracle::MAX_HORIZON {
        return Err(format!("--horizon-cap must be at most {}", oracle::MAX_HORIZON));
    }
    let objectives: Vec<Objective> = if args.objective.is_empty() {
        vec![Objective::Makespan, Objective::AssignCost, Objective::TotalTardiness]
    } else {
        args.objective.iter().map(|&o| o.into()).collect()
    };
    let config = SolverConfig {
        analytic_cuts: !args.no_analytic,
        relaxations: !args.no_relax,
        fault: args.inject_fault.then_some(Fault::FlipAnalyticSign),
        ..SolverConfig::default()
    };
    println!("{:>5} {:<10} {:>2} {:>2} {:>6} {:>9} {:>6} {:>5} result", "index", "objective", "m", "n", "oracle", "iterative", "bnc", "cuts");
    let mut failed = 0;
    for index in 0..args.count {
        for &objective in &objectives {
            let inst = corpus_instance(args.family.seed, index, &params, objective);
            let report = check::check_instance(&inst, &config).map_err(|e| e.to_string())?;
            let passed = report.passed();
            println!(
                "{:>5} {:<10} {:>2} {:>2} {:>6} {:>9} {:>6} {:>5} {}",
                index,
                objective.to_string(),
                inst.num_facilities(),
                inst.num_jobs(),
                opt(report.oracle),
                opt(report.iterative),
                opt(report.branch_and_check),
                report.cuts_checked,
                if passed { "pass" } else { "FAIL" }
            );
            if !passed {
                failed += 1;
                let path = args.dump_dir.join(format!("check-{}-{index}-{objective}.json", args.family.seed));
                inst.save(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                eprintln!("instance {index} ({objective}) written to {}", path.display());
                for f in report.findings() {
                    eprintln!("  {f}");
                }
            }
        }
    }
    Ok(if failed == 0 { 0 } else { 4 })
}

fn cmd_bench(args: BenchArgs) -> Result<u8, String> {
    let base = args.solver.config()?;
    let objective: Objective = args.objective.into();
    let family: Vec<(String, Instance)> = if args.instance.is_empty() {
        let params = args.family.params()?;
        (0..args.count)
            .map(|k| (format!("seed{}-{k}", args.family.seed), corpus_instance(args.family.seed, k, &params, objective)))
            .collect()
    } else {
        args.instance
            .iter()
            .map(|p| load(p).map(|inst| (p.display().to_string(), inst)))
            .collect::<Result<_, _>>()?
    };
    let mut configs = vec![("full".to_string(), base.clone())];
    for a in &args.ablate {
        let (name, config) = match a {
            Ablation::Relax => ("no-relax", SolverConfig { relaxations: false, ..base.clone() }),
            Ablation::Analytic => ("no-analytic", SolverConfig { analytic_cuts: false, ..base.clone() }),
            Ablation::Nogood => ("no-strengthen", SolverConfig { strengthen: false, ..base.clone() }),
        };
        configs.push((name.to_string(), config));
    }
    println!("instance,config,value,iterations,master_ms,subproblem_ms,total_ms");
    let mut worst = 0;
    for (label, inst) in &family {
        for (name, config) in &configs {
            let sol: LbbdSolution = driver::solve(inst, config).map_err(|e| format!("{label}: {e}"))?;
            let value = if sol.status == SolveStatus::Optimal { opt(sol.value) } else { sol.status.to_string() };
            println!(
                "{label},{name},{value},{},{:.3},{:.3},{:.3}",
                sol.trace.iterations.len(),
                sol.trace.master_ms,
                sol.trace.subproblem_ms,
                sol.trace.total_ms
            );
            if sol.status == SolveStatus::BudgetExhausted {
                worst = 3;
            }
        }
    }
    Ok(worst)
}
