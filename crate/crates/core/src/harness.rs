//! Experiment runner: seeded Monte-Carlo trials of one algorithm over one
//! scenario, benchmark ratios, grouped aggregates, and the closed-form tail
//! bounds the statistical tests size themselves with.
//!
//! Trials are independent work items; each derives its own seed from the
//! master seed, so reports are identical across thread counts and re-runs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::augmentation::{run_augmented_pricing, AugmentationPlan};
use crate::byzantine::{discretize, evaluate_green_benchmark, run_byzantine_pricing, ByzantineScenario};
use crate::domain::{best_response, realize_instance, Instance, RealizedRequest, Trace, TraceStep};
use crate::error::{Error, Result};
use crate::estimation::{default_partition_count, single_sample_pipeline};
use crate::genlab::{
    gen_augmentation_plan, gen_byzantine_scenario, gen_hard_instance, gen_prophet_instance, Family,
    GeneratorConfig, HardInstance,
};
use crate::genlab::hard_instance_offline_opt;
use crate::lp::lp_upper_bound;
use crate::pricing::{
    compute_parameters, known_distribution_estimates, run_exponential_pricing, Estimates, GUARD_TOL,
};
use crate::rng::{derive_seed, stream_from_seed};

/// Benchmark labels carried by report rows. Mixing labels within one
/// aggregate is forbidden, so the label rides on every row.
pub const BENCH_LP_UB: &str = "lp_ub";
pub const BENCH_BRUTE_FORCE: &str = "brute_force";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    ExpPricing,
    SingleSample,
    Byzantine,
    Augmented,
    GreedyBaseline,
    StaticPriceBaseline,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::ExpPricing => "exp_pricing",
            Algorithm::SingleSample => "single_sample",
            Algorithm::Byzantine => "byzantine",
            Algorithm::Augmented => "augmented",
            Algorithm::GreedyBaseline => "greedy_baseline",
            Algorithm::StaticPriceBaseline => "static_price_baseline",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp_pricing" => Ok(Algorithm::ExpPricing),
            "single_sample" => Ok(Algorithm::SingleSample),
            "byzantine" => Ok(Algorithm::Byzantine),
            "augmented" => Ok(Algorithm::Augmented),
            "greedy_baseline" => Ok(Algorithm::GreedyBaseline),
            "static_price_baseline" => Ok(Algorithm::StaticPriceBaseline),
            _ => Err(Error::invalid(format!("unknown algorithm {s}"))),
        }
    }
}

/// Where the scenario comes from: generated on the fly, embedded in the
/// config, or an instance file on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioSource {
    Generator(GeneratorConfig),
    Instance(Instance),
    InstanceFile(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub source: ScenarioSource,
    pub trials: usize,
    /// Master seed; trial t runs under `derive_seed(seed, t)`.
    pub seed: u64,
    pub epsilon: f64,
    /// Parts for the single-sample split; defaults to `n.clamp(1, 64)`.
    pub partition_count: Option<usize>,
    /// Augmentation plan file; absent means the generator preset (generator
    /// sources) or the zero plan.
    pub plan_file: Option<String>,
    /// Default report CSV path; the CLI `--out` flag overrides it.
    pub out: Option<String>,
    /// Optional trace JSONL path for the first trial.
    pub trace_out: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            algorithm: Algorithm::ExpPricing,
            source: ScenarioSource::Generator(GeneratorConfig::default()),
            trials: 50,
            seed: 0,
            epsilon: 0.25,
            partition_count: None,
            plan_file: None,
            out: None,
            trace_out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 || self.epsilon > 0.5 {
            return Err(Error::invalid(format!("epsilon {} outside (0, 1/2]", self.epsilon)));
        }
        let byz_source = matches!(
            &self.source,
            ScenarioSource::Generator(g) if g.family == Family::Byzantine
        );
        let byz_algo = self.algorithm == Algorithm::Byzantine;
        if byz_algo != byz_source {
            return Err(Error::invalid(
                "the byzantine algorithm and the byzantine scenario family require each other",
            ));
        }
        if let Some(d) = self.partition_count {
            if d == 0 {
                return Err(Error::invalid("partition_count must be at least 1"));
            }
        }
        Ok(())
    }
}

/// One trial, one row. Field order is the frozen CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub epsilon: f64,
    /// Smallest budget of the scenario; the binding scale for trends.
    pub budget: f64,
    pub total_value: f64,
    pub stop_time: usize,
    pub benchmark: f64,
    pub benchmark_kind: String,
    /// `total_value / benchmark`; undefined (empty) when benchmark is 0.
    pub ratio: Option<f64>,
    /// EA: the consumption-versus-estimate stopping rule fired early.
    pub terminated_early: bool,
    /// BE: a price-cap break occurred in either half of a Byzantine run.
    pub break_event: bool,
    pub max_utilization: f64,
    pub guard_activations: u64,
    pub conflicts: u64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub rows: Vec<TrialRow>,
}

/// Aggregates over the non-error rows of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: usize,
    pub errors: usize,
    pub mean_total_value: f64,
    pub mean_ratio: Option<f64>,
    /// Standard error of the ratio; absent below two defined ratios.
    pub se_ratio: Option<f64>,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    /// Fraction of rows whose stopping rule fired early.
    pub pr_early_stop: f64,
    /// Fraction of rows with a price-cap break.
    pub pr_break: f64,
    /// Fraction of rows with at least one discretization conflict.
    pub conflict_rate: f64,
    pub max_utilization: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    None,
    Budget,
    Epsilon,
}

impl std::str::FromStr for Grouping {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Grouping::None),
            "budget" => Ok(Grouping::Budget),
            "epsilon" => Ok(Grouping::Epsilon),
            _ => Err(Error::invalid(format!("unknown grouping {s}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub key: String,
    /// Numeric group value for trend checks; absent for the global row.
    pub value: Option<f64>,
    pub aggregates: Aggregates,
}

/// Closed-form tail bounds used to size Monte-Carlo tests: the two-sided
/// sample-mean bound for iid variables in [a, b], the one-sided bound for
/// sums of mean-zero variables with |X| <= M and total variance sigma2, and
/// the two-sided bound for sampling v of u values in [0, M] without
/// replacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundKind {
    Hoeffding { n: usize, a: f64, b: f64, epsilon: f64 },
    Bernstein { sigma2: f64, m: f64, epsilon: f64 },
    BernsteinSwor { u: usize, v: usize, m: f64, mu: f64, tau: f64 },
}

pub fn concentration_bound(kind: &BoundKind) -> Result<f64> {
    match *kind {
        BoundKind::Hoeffding { n, a, b, epsilon } => {
            if n == 0 || !(b > a) || !(epsilon > 0.0) {
                return Err(Error::invalid("hoeffding needs n >= 1, b > a, epsilon > 0"));
            }
            Ok(2.0 * (-2.0 * n as f64 * epsilon * epsilon / ((b - a) * (b - a))).exp())
        }
        BoundKind::Bernstein { sigma2, m, epsilon } => {
            if !(sigma2 >= 0.0) || !(m > 0.0) || !(epsilon >= 0.0) {
                return Err(Error::invalid("bernstein needs sigma2 >= 0, M > 0, epsilon >= 0"));
            }
            Ok((-(epsilon * epsilon / 2.0) / (sigma2 + m * epsilon / 3.0)).exp())
        }
        BoundKind::BernsteinSwor { u, v, m, mu, tau } => {
            if v > u {
                return Err(Error::invalid(format!("cannot sample v = {v} of u = {u} values")));
            }
            if u == 0 || !(m > 0.0) || !(mu >= 0.0) || !(tau > 0.0) {
                return Err(Error::invalid("swor needs u >= 1, M > 0, mu >= 0, tau > 0"));
            }
            Ok(2.0 * (-tau * tau / (m * (4.0 * v as f64 * mu + tau))).exp())
        }
    }
}

/// Allocation loop at a fixed price vector: the argmax decision each step,
/// with the hard feasibility guard. Zero prices give the greedy baseline.
pub fn run_fixed_price_loop(requests: &[RealizedRequest], budgets: &[f64], prices: &[f64]) -> Trace {
    let m = budgets.len();
    let mut cum = vec![0.0; m];
    let mut trace = Trace::new();
    for req in requests {
        let cand = best_response(&req.menu, prices);
        let overruns = cand
            .consumption
            .iter()
            .zip(&cum)
            .zip(budgets)
            .any(|((a, c), b)| c + a > b + GUARD_TOL);
        let chosen = if overruns {
            trace.guard_activations += 1;
            &req.menu[0]
        } else {
            cand
        };
        for (c, a) in cum.iter_mut().zip(&chosen.consumption) {
            *c += a;
        }
        trace.total_value += chosen.value;
        trace.steps.push(TraceStep {
            step: req.step,
            prices: prices.to_vec(),
            chosen: chosen.id,
            value: chosen.value,
            consumption: chosen.consumption.clone(),
            cumulative: cum.clone(),
        });
    }
    trace.stop_time = trace.steps.len();
    trace.terminated_early = false;
    trace
}

enum ResolvedScenario {
    Prophet { instance: Instance, hard: Option<HardInstance> },
    Byzantine(ByzantineScenario),
}

fn resolve_scenario(cfg: &ExperimentConfig) -> Result<ResolvedScenario> {
    match &cfg.source {
        ScenarioSource::Generator(g) => {
            // One epsilon knob per experiment: the generator inherits it.
            let mut g = g.clone();
            g.epsilon = cfg.epsilon;
            match g.family {
                Family::Byzantine => Ok(ResolvedScenario::Byzantine(gen_byzantine_scenario(&g)?)),
                Family::HardLowerBound => {
                    let hard = gen_hard_instance(g.z, g.b)?;
                    Ok(ResolvedScenario::Prophet { instance: hard.instance.clone(), hard: Some(hard) })
                }
                _ => Ok(ResolvedScenario::Prophet { instance: gen_prophet_instance(&g)?, hard: None }),
            }
        }
        ScenarioSource::Instance(inst) => {
            Ok(ResolvedScenario::Prophet { instance: inst.clone(), hard: None })
        }
        ScenarioSource::InstanceFile(path) => {
            Ok(ResolvedScenario::Prophet { instance: crate::io::read_instance_file(path)?, hard: None })
        }
    }
}

/// Everything shared across trials, computed once.
struct Prep {
    scenario: ResolvedScenario,
    estimates: Option<Estimates>,
    plan: Option<AugmentationPlan>,
    prices: Option<Vec<f64>>,
    /// (value, label); per-trial for the hard family, fixed otherwise.
    fixed_benchmark: Option<(f64, String)>,
}

impl Prep {
    fn new(cfg: &ExperimentConfig, scenario: ResolvedScenario) -> Result<Prep> {
        let mut prep =
            Prep { scenario, estimates: None, plan: None, prices: None, fixed_benchmark: None };
        match &prep.scenario {
            ResolvedScenario::Byzantine(sc) => {
                let (value, method) = evaluate_green_benchmark(sc)?;
                let label = match method {
                    crate::byzantine::BenchmarkMethod::BruteForce => BENCH_BRUTE_FORCE,
                    crate::byzantine::BenchmarkMethod::LpUpperBound => BENCH_LP_UB,
                };
                prep.fixed_benchmark = Some((value, label.to_string()));
            }
            ResolvedScenario::Prophet { instance, hard } => {
                if hard.is_none() {
                    prep.fixed_benchmark = Some((lp_upper_bound(instance)?, BENCH_LP_UB.to_string()));
                }
                match cfg.algorithm {
                    Algorithm::ExpPricing => {
                        let est = known_distribution_estimates(instance, cfg.epsilon)?;
                        // Fail now, not per trial, if the budgets are out of regime.
                        compute_parameters(&est, instance.n(), instance.m, &instance.budgets, cfg.epsilon)?;
                        prep.estimates = Some(est);
                    }
                    Algorithm::StaticPriceBaseline => {
                        let est = known_distribution_estimates(instance, cfg.epsilon)?;
                        let prices: Vec<f64> = instance
                            .budgets
                            .iter()
                            .map(|b| est.opt_hat / (2.0 * instance.m as f64 * b))
                            .collect();
                        prep.estimates = Some(est);
                        prep.prices = Some(prices);
                    }
                    Algorithm::GreedyBaseline => {
                        prep.prices = Some(vec![0.0; instance.m]);
                    }
                    Algorithm::Augmented => {
                        let plan = match &cfg.plan_file {
                            Some(path) => crate::io::read_plan_file(path)?,
                            None => match &cfg.source {
                                ScenarioSource::Generator(g) => {
                                    let mut rng = stream_from_seed(derive_seed(cfg.seed, u64::MAX));
                                    gen_augmentation_plan(instance, g.aug_preset, &mut rng)?
                                }
                                _ => AugmentationPlan::new(),
                            },
                        };
                        prep.plan = Some(plan);
                    }
                    Algorithm::SingleSample | Algorithm::Byzantine => {}
                }
            }
        }
        Ok(prep)
    }
}

struct Outcome {
    total_value: f64,
    stop_time: usize,
    terminated_early: bool,
    break_event: bool,
    max_utilization: f64,
    guard_activations: u64,
    conflicts: u64,
    benchmark: f64,
    benchmark_kind: String,
}

fn prophet_outcome(trace: &Trace, budgets: &[f64], benchmark: (f64, String)) -> Outcome {
    Outcome {
        total_value: trace.total_value,
        stop_time: trace.stop_time,
        terminated_early: trace.terminated_early,
        break_event: false,
        max_utilization: trace.max_utilization(budgets),
        guard_activations: trace.guard_activations,
        conflicts: 0,
        benchmark: benchmark.0,
        benchmark_kind: benchmark.1,
    }
}

fn run_trial(cfg: &ExperimentConfig, prep: &Prep, trial_seed: u64) -> Result<(Outcome, Trace)> {
    match &prep.scenario {
        ResolvedScenario::Byzantine(sc) => {
            let mut rng = stream_from_seed(derive_seed(trial_seed, 1));
            let schedule = discretize(sc, cfg.epsilon, &mut rng)?;
            let bt = run_byzantine_pricing(sc, &schedule, cfg.epsilon)?;
            let (benchmark, kind) = prep.fixed_benchmark.clone().expect("byzantine benchmark");
            let outcome = Outcome {
                // Green value only: the quantity the green benchmark bounds.
                total_value: bt.green_value,
                stop_time: bt.trace.stop_time,
                terminated_early: false,
                break_event: bt.first_break.is_some() || bt.second_break.is_some(),
                max_utilization: bt.trace.max_utilization(&sc.budgets),
                guard_activations: 0,
                conflicts: schedule.conflicts,
                benchmark,
                benchmark_kind: kind,
            };
            Ok((outcome, bt.trace))
        }
        ResolvedScenario::Prophet { instance, hard } => {
            let run_seed = match cfg.algorithm {
                Algorithm::SingleSample => derive_seed(trial_seed, 3),
                _ => trial_seed,
            };
            let benchmark = match hard {
                Some(h) => {
                    let requests = realize_instance(instance, run_seed);
                    (hard_instance_offline_opt(h, &requests)?, BENCH_BRUTE_FORCE.to_string())
                }
                None => prep.fixed_benchmark.clone().expect("prophet benchmark"),
            };
            let trace = match cfg.algorithm {
                Algorithm::ExpPricing => {
                    let est = prep.estimates.as_ref().expect("estimates");
                    run_exponential_pricing(instance, est, cfg.epsilon, run_seed)?
                }
                Algorithm::SingleSample => {
                    let sample = realize_instance(instance, derive_seed(trial_seed, 1));
                    let mut rng = stream_from_seed(derive_seed(trial_seed, 2));
                    let d = cfg.partition_count.unwrap_or_else(|| default_partition_count(instance.n()));
                    let est =
                        single_sample_pipeline(&sample, &instance.budgets, cfg.epsilon, d, &mut rng)?;
                    run_exponential_pricing(instance, &est, cfg.epsilon, run_seed)?
                }
                Algorithm::GreedyBaseline | Algorithm::StaticPriceBaseline => {
                    let prices = prep.prices.as_ref().expect("prices");
                    let requests = realize_instance(instance, run_seed);
                    run_fixed_price_loop(&requests, &instance.budgets, prices)
                }
                Algorithm::Augmented => {
                    let plan = prep.plan.as_ref().expect("plan");
                    let run = run_augmented_pricing(instance, plan, cfg.epsilon, run_seed)?;
                    // The collected value is the unperturbed one; the plan
                    // only distorts what the argmax sees.
                    let mut out = prophet_outcome(&run.trace, &instance.budgets, benchmark);
                    out.total_value = run.base_total_value;
                    return Ok((out, run.trace));
                }
                Algorithm::Byzantine => unreachable!("checked by ExperimentConfig::check"),
            };
            let outcome = prophet_outcome(&trace, &instance.budgets, benchmark);
            Ok((outcome, trace))
        }
    }
}

/// Re-runs one trial and returns its full trace, for export.
pub fn trial_trace(cfg: &ExperimentConfig, trial: usize) -> Result<Trace> {
    cfg.check()?;
    if trial >= cfg.trials {
        return Err(Error::invalid(format!("trial {trial} outside 0..{}", cfg.trials)));
    }
    let prep = Prep::new(cfg, resolve_scenario(cfg)?)?;
    let trial_seed = derive_seed(cfg.seed, trial as u64);
    run_trial(cfg, &prep, trial_seed).map(|(_, trace)| trace)
}

fn min_budget(scenario: &ResolvedScenario) -> f64 {
    let budgets = match scenario {
        ResolvedScenario::Prophet { instance, .. } => &instance.budgets,
        ResolvedScenario::Byzantine(sc) => &sc.budgets,
    };
    budgets.iter().copied().fold(f64::INFINITY, f64::min)
}

fn error_row(cfg: &ExperimentConfig, trial: usize, trial_seed: u64, budget: f64, msg: String) -> TrialRow {
    TrialRow {
        trial,
        seed: trial_seed,
        algorithm: cfg.algorithm,
        epsilon: cfg.epsilon,
        budget,
        total_value: 0.0,
        stop_time: 0,
        benchmark: 0.0,
        benchmark_kind: String::new(),
        ratio: None,
        terminated_early: false,
        break_event: false,
        max_utilization: 0.0,
        guard_activations: 0,
        conflicts: 0,
        error: Some(msg),
    }
}

/// Runs a capped-parallelism closure; ORABENCH_THREADS bounds the pool.
fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var("ORABENCH_THREADS") {
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .map_err(|_| Error::invalid(format!("ORABENCH_THREADS = {raw} is not a count")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.check()?;
    let scenario = resolve_scenario(cfg)?;
    let budget = min_budget(&scenario);
    let prep = match Prep::new(cfg, scenario) {
        Ok(p) => p,
        // Shared preparation failed: every trial reports the same error.
        Err(e) => {
            let rows = (0..cfg.trials)
                .map(|t| error_row(cfg, t, derive_seed(cfg.seed, t as u64), budget, e.to_string()))
                .collect();
            return Ok(Report { config: cfg.clone(), rows });
        }
    };
    let rows: Vec<TrialRow> = with_thread_cap(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let trial_seed = derive_seed(cfg.seed, trial as u64);
                match run_trial(cfg, &prep, trial_seed) {
                    Err(e) => error_row(cfg, trial, trial_seed, budget, e.to_string()),
                    Ok((out, _)) => TrialRow {
                        trial,
                        seed: trial_seed,
                        algorithm: cfg.algorithm,
                        epsilon: cfg.epsilon,
                        budget,
                        total_value: out.total_value,
                        stop_time: out.stop_time,
                        benchmark: out.benchmark,
                        benchmark_kind: out.benchmark_kind,
                        ratio: (out.benchmark > 0.0).then(|| out.total_value / out.benchmark),
                        terminated_early: out.terminated_early,
                        break_event: out.break_event,
                        max_utilization: out.max_utilization,
                        guard_activations: out.guard_activations,
                        conflicts: out.conflicts,
                        error: None,
                    },
                }
            })
            .collect()
    })?;
    Ok(Report { config: cfg.clone(), rows })
}

fn aggregate(rows: &[&TrialRow]) -> Aggregates {
    let errors = rows.iter().filter(|r| r.error.is_some()).count();
    let ok: Vec<&&TrialRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    let n_ok = ok.len();
    let frac = |pred: &dyn Fn(&TrialRow) -> bool| {
        if n_ok == 0 {
            0.0
        } else {
            ok.iter().filter(|r| pred(r)).count() as f64 / n_ok as f64
        }
    };
    let ratios: Vec<f64> = ok.iter().filter_map(|r| r.ratio).collect();
    let mean_ratio = if ratios.is_empty() {
        None
    } else {
        Some(ratios.iter().sum::<f64>() / ratios.len() as f64)
    };
    let se_ratio = mean_ratio.filter(|_| ratios.len() >= 2).map(|mean| {
        let var =
            ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (ratios.len() - 1) as f64;
        (var / ratios.len() as f64).sqrt()
    });
    Aggregates {
        trials: rows.len(),
        errors,
        mean_total_value: if n_ok == 0 {
            0.0
        } else {
            ok.iter().map(|r| r.total_value).sum::<f64>() / n_ok as f64
        },
        mean_ratio,
        se_ratio,
        min_ratio: ratios.iter().copied().reduce(f64::min),
        max_ratio: ratios.iter().copied().reduce(f64::max),
        pr_early_stop: frac(&|r| r.terminated_early),
        pr_break: frac(&|r| r.break_event),
        conflict_rate: frac(&|r| r.conflicts > 0),
        max_utilization: ok.iter().map(|r| r.max_utilization).fold(0.0, f64::max),
    }
}

pub fn summarize(rows: &[TrialRow], grouping: Grouping) -> Vec<SummaryRow> {
    let key_of = |r: &TrialRow| -> Option<f64> {
        match grouping {
            Grouping::None => None,
            Grouping::Budget => Some(r.budget),
            Grouping::Epsilon => Some(r.epsilon),
        }
    };
    match grouping {
        Grouping::None => {
            let all: Vec<&TrialRow> = rows.iter().collect();
            vec![SummaryRow { key: "all".to_string(), value: None, aggregates: aggregate(&all) }]
        }
        _ => {
            // Group keys are exact bit patterns; identical configs produce
            // identical floats, and positive floats sort by their bits.
            let mut groups: std::collections::BTreeMap<u64, Vec<&TrialRow>> =
                std::collections::BTreeMap::new();
            for r in rows {
                let v = key_of(r).expect("grouped key");
                groups.entry(v.to_bits()).or_default().push(r);
            }
            groups
                .into_iter()
                .map(|(bits, group)| {
                    let v = f64::from_bits(bits);
                    let label = match grouping {
                        Grouping::Budget => format!("budget={v}"),
                        _ => format!("epsilon={v}"),
                    };
                    SummaryRow { key: label, value: Some(v), aggregates: aggregate(&group) }
                })
                .collect()
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        None => "-".to_string(),
        Some(x) => format!("{x:.6}"),
    }
}

/// Fixed-width text table for the CLI.
pub fn render_summary(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<16} {:>7} {:>7} {:>12} {:>10} {:>10} {:>10} {:>10} {:>9} {:>9} {:>9} {:>9}\n",
        "group",
        "trials",
        "errors",
        "mean_value",
        "mean_ratio",
        "se_ratio",
        "min_ratio",
        "max_ratio",
        "pr_early",
        "pr_break",
        "conflict",
        "max_util"
    ));
    for row in rows {
        let a = &row.aggregates;
        out.push_str(&format!(
            "{:<16} {:>7} {:>7} {:>12.6} {:>10} {:>10} {:>10} {:>10} {:>9.4} {:>9.4} {:>9.4} {:>9.4}\n",
            row.key,
            a.trials,
            a.errors,
            a.mean_total_value,
            fmt_opt(a.mean_ratio),
            fmt_opt(a.se_ratio),
            fmt_opt(a.min_ratio),
            fmt_opt(a.max_ratio),
            a.pr_early_stop,
            a.pr_break,
            a.conflict_rate,
            a.max_utilization
        ));
    }
    out
}
