//! Command-line front end: generate scenario files, run seeded experiments,
//! aggregate reports, validate instances, and exercise the budget
//! lower-bound family.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use orabench::domain::validate_instance;
use orabench::error::{Error, Result};
use orabench::genlab::{
    gen_augmentation_plan, gen_byzantine_scenario, gen_hard_instance, gen_prophet_instance,
    hard_instance_offline_opt, AugPreset, BudgetRule, Family, GeneratorConfig, RedPreset,
};
use orabench::harness::{render_summary, run_experiment, summarize, trial_trace, Grouping};
use orabench::io;
use orabench::lp::build_configuration_lp;
use orabench::rng::{derive_seed, stream_from_seed};

#[derive(Parser)]
#[command(
    name = "orabench",
    version,
    about = "Exponential pricing for online resource allocation: generators, seeded experiments, validators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance, scenario, or augmentation plan file.
    Gen(GenArgs),
    /// Run a seeded experiment from a config file and write a CSV report.
    Run(RunArgs),
    /// Aggregate a report CSV into a grouped table.
    Summarize(SummarizeArgs),
    /// Validate an instance file; optionally dump its relaxation.
    Validate(ValidateArgs),
    /// Generate the bit-pattern hard family and check realized offline
    /// optima against the [5B, 7B] window.
    LowerBound(LowerBoundArgs),
}

fn parse_budget(s: &str) -> std::result::Result<BudgetRule, String> {
    if s == "theorem" {
        return Ok(BudgetRule::TheoremRegime);
    }
    s.parse::<f64>()
        .map(BudgetRule::Fixed)
        .map_err(|_| format!("budget must be a number or \"theorem\", got {s}"))
}

#[derive(Args)]
struct GenArgs {
    /// iid | nonidentical | hard_lower_bound | byzantine | augmentation
    #[arg(long)]
    family: Family,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    /// Per-resource budget, or "theorem" for the guarantee's floor.
    #[arg(long, value_parser = parse_budget, default_value = "theorem")]
    budget: BudgetRule,
    #[arg(long, default_value_t = 3)]
    k_max: usize,
    #[arg(long, default_value_t = 3)]
    decisions_max: usize,
    /// Hard family: number of resource bits, m = 2^z.
    #[arg(long, default_value_t = 1)]
    z: usize,
    /// Hard family: copies per item (must be a multiple of z).
    #[arg(long = "B", default_value_t = 4)]
    b: usize,
    #[arg(long, default_value_t = 0.25)]
    red_fraction: f64,
    /// front_loaded | value_decoys | budget_burners | uniform_red
    #[arg(long, default_value = "uniform_red")]
    red_preset: RedPreset,
    /// zero | uniform_boost | misleading | spike
    #[arg(long, default_value = "zero")]
    aug_preset: AugPreset,
    /// Also write the generated augmentation plan here.
    #[arg(long)]
    plan_out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Report CSV path; overrides the config's `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write trial 0's trace as JSON lines; overrides the config's
    /// `trace_out`.
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct SummarizeArgs {
    #[arg(long)]
    report: PathBuf,
    /// none | budget | epsilon
    #[arg(long, default_value = "none")]
    group_by: Grouping,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Check an estimates file against the instance's dimensions.
    #[arg(long)]
    estimates: Option<PathBuf>,
    /// Write the configuration relaxation in plain text.
    #[arg(long)]
    dump_lp: Option<PathBuf>,
    /// Budget scale for the dumped relaxation.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

#[derive(Args)]
struct LowerBoundArgs {
    #[arg(long, default_value_t = 1)]
    z: usize,
    #[arg(long = "B", default_value_t = 4)]
    b: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the generated instance here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn gen(args: GenArgs) -> Result<()> {
    let cfg = GeneratorConfig {
        family: args.family,
        n: args.n,
        m: args.m,
        epsilon: args.epsilon,
        seed: args.seed,
        budget: args.budget,
        k_max: args.k_max,
        decisions_max: args.decisions_max,
        z: args.z,
        b: args.b,
        red_fraction: args.red_fraction,
        red_preset: args.red_preset,
        aug_preset: args.aug_preset,
        ..GeneratorConfig::default()
    };
    match cfg.family {
        Family::Byzantine => {
            let scenario = gen_byzantine_scenario(&cfg)?;
            io::write_scenario_file(&args.out, &scenario)?;
            println!(
                "wrote scenario: {} greens, {} reds, m={}, opt_hat={:.6} -> {}",
                scenario.greens.len(),
                scenario.reds.len(),
                scenario.m,
                scenario.opt_hat,
                args.out.display()
            );
        }
        Family::HardLowerBound => {
            let hard = gen_hard_instance(cfg.z, cfg.b)?;
            io::write_instance_file(&args.out, &hard.instance)?;
            println!(
                "wrote hard instance: z={}, B={}, n={}, m={}, epsilon={:.6} -> {}",
                hard.z,
                hard.b,
                hard.instance.n(),
                hard.instance.m,
                hard.epsilon,
                args.out.display()
            );
        }
        _ => {
            let inst = gen_prophet_instance(&cfg)?;
            io::write_instance_file(&args.out, &inst)?;
            println!(
                "wrote instance: n={}, m={}, budgets[0]={:.3} -> {}",
                inst.n(),
                inst.m,
                inst.budgets[0],
                args.out.display()
            );
            if let Some(plan_out) = &args.plan_out {
                let mut rng = stream_from_seed(derive_seed(cfg.seed, 1));
                let plan = gen_augmentation_plan(&inst, cfg.aug_preset, &mut rng)?;
                io::write_plan_file(plan_out, &plan)?;
                println!("wrote plan: {} entries -> {}", plan.len(), plan_out.display());
            }
        }
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = io::read_config_file(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let report = run_experiment(&cfg)?;
    let out = args.out.or_else(|| cfg.out.as_ref().map(PathBuf::from));
    match &out {
        Some(path) => {
            io::write_report_file(path, &report.rows)?;
            println!("wrote {} rows -> {}", report.rows.len(), path.display());
        }
        None => io::write_report_csv(&report.rows, std::io::stdout().lock())?,
    }
    let trace_out = args.trace_out.or_else(|| cfg.trace_out.as_ref().map(PathBuf::from));
    if let Some(path) = &trace_out {
        let trace = trial_trace(&cfg, 0)?;
        io::write_trace_file(path, &trace)?;
        println!("wrote trial-0 trace ({} steps) -> {}", trace.steps.len(), path.display());
    }
    print!("{}", render_summary(&summarize(&report.rows, Grouping::None)));
    Ok(())
}

fn summarize_cmd(args: SummarizeArgs) -> Result<()> {
    let rows = io::read_report_file(&args.report)?;
    if rows.is_empty() {
        return Err(Error::Malformed("report has no rows".to_string()));
    }
    print!("{}", render_summary(&summarize(&rows, args.group_by)));
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<()> {
    let inst = io::read_instance_file(&args.instance)?;
    let violations = validate_instance(&inst);
    if let Some(path) = &args.estimates {
        let est = io::read_estimates_file(path)?;
        est.check(inst.n(), inst.m)?;
        println!("estimates ok: opt_hat={:.6}, beta={:.3}", est.opt_hat, est.beta);
    }
    if let Some(path) = &args.dump_lp {
        let lp = build_configuration_lp(&inst, args.scale)?;
        std::fs::write(path, lp.dump_text())?;
        println!("wrote relaxation ({} rows) -> {}", lp.rows.len(), path.display());
    }
    if violations.is_empty() {
        println!("instance ok: n={}, m={}", inst.n(), inst.m);
        Ok(())
    } else {
        for v in &violations {
            eprintln!("violation {v}");
        }
        Err(Error::InvalidInstance(format!("{} violations", violations.len())))
    }
}

fn lower_bound(args: LowerBoundArgs) -> Result<()> {
    if args.trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let hard = gen_hard_instance(args.z, args.b)?;
    if let Some(path) = &args.out {
        io::write_instance_file(path, &hard.instance)?;
        println!("wrote hard instance -> {}", path.display());
    }
    let b = args.b as f64;
    let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    let mut inside = 0usize;
    for t in 0..args.trials {
        let requests =
            orabench::domain::realize_instance(&hard.instance, derive_seed(args.seed, t as u64));
        let opt = hard_instance_offline_opt(&hard, &requests)?;
        lo = lo.min(opt);
        hi = hi.max(opt);
        sum += opt;
        if opt >= 5.0 * b - 1e-9 && opt <= 7.0 * b + 1e-9 {
            inside += 1;
        }
    }
    println!(
        "z={} B={} trials={}: offline opt in [{:.3}, {:.3}], mean {:.3}",
        args.z,
        args.b,
        args.trials,
        lo,
        hi,
        sum / args.trials as f64
    );
    let ok = inside == args.trials;
    println!(
        "[5B, 7B] = [{:.1}, {:.1}] check: {} ({}/{} inside)",
        5.0 * b,
        7.0 * b,
        if ok { "PASS" } else { "FAIL" },
        inside,
        args.trials
    );
    if ok {
        Ok(())
    } else {
        Err(Error::invalid("offline optimum left the [5B, 7B] window"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => gen(args),
        Command::Run(args) => run(args),
        Command::Summarize(args) => summarize_cmd(args),
        Command::Validate(args) => validate(args),
        Command::LowerBound(args) => lower_bound(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
