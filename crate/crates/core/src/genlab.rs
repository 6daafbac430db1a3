//! Generators: prophet-model instance families, the single-minded hard
//! instance behind the budget lower bound, red adversaries for the Byzantine
//! setting, and augmentation plans.
//!
//! Everything here is a pure function of (config, seed), so any generated
//! artifact can be regenerated from its config line in a report.

use crate::augmentation::AugmentationPlan;
use crate::byzantine::{evaluate_green_benchmark, ByzantineScenario, RedRequest};
use crate::domain::{realize_instance, Decision, Instance, RealizedRequest, RequestDistribution, RequestType};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_from_seed, Stream};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Tie-breaking jitter added to generated values, scaled by a running
/// decision counter so no two generated values collide exactly.
const VALUE_JITTER: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Iid,
    Nonidentical,
    HardLowerBound,
    Byzantine,
    Augmentation,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" => Ok(Family::Iid),
            "nonidentical" => Ok(Family::Nonidentical),
            "hard_lower_bound" => Ok(Family::HardLowerBound),
            "byzantine" => Ok(Family::Byzantine),
            "augmentation" => Ok(Family::Augmentation),
            _ => Err(Error::invalid(format!("unknown family {s}"))),
        }
    }
}

/// How per-resource budgets are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetRule {
    Fixed(f64),
    /// The budget floor the approximation guarantees assume. Prophet
    /// families use `ceil(32 ln(n m beta/eps) / eps^2)`; the Byzantine family
    /// uses its own `ceil(20 ln(m beta/eps) / eps^2)`.
    TheoremRegime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RedPreset {
    /// All reds crammed into the earliest slots.
    FrontLoaded,
    /// High-value reds consuming everything, arriving early.
    ValueDecoys,
    /// Zero-value reds consuming one unit of every resource.
    BudgetBurners,
    /// Red times drawn uniformly.
    UniformRed,
}

impl std::str::FromStr for RedPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "front_loaded" => Ok(RedPreset::FrontLoaded),
            "value_decoys" => Ok(RedPreset::ValueDecoys),
            "budget_burners" => Ok(RedPreset::BudgetBurners),
            "uniform_red" => Ok(RedPreset::UniformRed),
            _ => Err(Error::invalid(format!("unknown red preset {s}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugPreset {
    Zero,
    /// Every non-null decision gains 1.
    UniformBoost,
    /// Boost each menu's lowest value-per-consumption decision past the best.
    Misleading,
    /// One huge boost on the first request's first non-null decision.
    Spike,
}

impl std::str::FromStr for AugPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(AugPreset::Zero),
            "uniform_boost" => Ok(AugPreset::UniformBoost),
            "misleading" => Ok(AugPreset::Misleading),
            "spike" => Ok(AugPreset::Spike),
            _ => Err(Error::invalid(format!("unknown augmentation preset {s}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub family: Family,
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub budget: BudgetRule,
    /// Most types a step distribution may have.
    pub k_max: usize,
    /// Most non-null decisions per type.
    pub decisions_max: usize,
    pub value_range: (f64, f64),
    /// Probability that a consumption entry is nonzero.
    pub sparsity: f64,
    /// Hard instance: item-count exponent, m = 2^z.
    pub z: usize,
    /// Hard instance: copies per item.
    pub b: usize,
    /// Fraction of requests that are adversarial in the Byzantine family.
    pub red_fraction: f64,
    pub red_preset: RedPreset,
    pub aug_preset: AugPreset,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            family: Family::Nonidentical,
            n: 50,
            m: 2,
            epsilon: 0.25,
            seed: 0,
            budget: BudgetRule::TheoremRegime,
            k_max: 3,
            decisions_max: 3,
            value_range: (0.0, 1.0),
            sparsity: 0.5,
            z: 1,
            b: 4,
            red_fraction: 0.0,
            red_preset: RedPreset::UniformRed,
            aug_preset: AugPreset::Zero,
        }
    }
}

/// Budget floor assumed by the prophet-model guarantee.
pub fn theorem_budget(n: usize, m: usize, beta: f64, epsilon: f64) -> f64 {
    (32.0 * (n as f64 * m as f64 * beta / epsilon).ln() / epsilon.powi(2)).ceil()
}

/// Budget floor assumed by the Byzantine guarantee.
pub fn byzantine_theorem_budget(m: usize, beta: f64, epsilon: f64) -> f64 {
    (20.0 * (m as f64 * beta / epsilon).ln() / epsilon.powi(2)).ceil()
}

fn resolve_budget(cfg: &GeneratorConfig) -> f64 {
    match cfg.budget {
        BudgetRule::Fixed(b) => b,
        BudgetRule::TheoremRegime => match cfg.family {
            Family::Byzantine => byzantine_theorem_budget(cfg.m, 1.0, cfg.epsilon),
            _ => theorem_budget(cfg.n, cfg.m, 1.0, cfg.epsilon),
        },
    }
}

fn check_prophet_knobs(cfg: &GeneratorConfig) -> Result<()> {
    if cfg.n == 0 || cfg.m == 0 {
        return Err(Error::invalid("n and m must be at least 1"));
    }
    if cfg.k_max == 0 || cfg.decisions_max == 0 {
        return Err(Error::invalid("k_max and decisions_max must be at least 1"));
    }
    let (lo, hi) = cfg.value_range;
    if !lo.is_finite() || !hi.is_finite() || lo < 0.0 || hi < lo {
        return Err(Error::invalid(format!("value range [{lo}, {hi}] invalid")));
    }
    if !(cfg.sparsity > 0.0 && cfg.sparsity <= 1.0) {
        return Err(Error::invalid(format!("sparsity {} outside (0,1]", cfg.sparsity)));
    }
    if !cfg.epsilon.is_finite() || cfg.epsilon <= 0.0 || cfg.epsilon > 0.5 {
        return Err(Error::invalid(format!("epsilon {} outside (0, 1/2]", cfg.epsilon)));
    }
    Ok(())
}

fn gen_distribution(
    cfg: &GeneratorConfig,
    rng: &mut Stream,
    jitter_counter: &mut u64,
) -> Result<RequestDistribution> {
    let k = rng.random_range(1..=cfg.k_max);
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut types = Vec::with_capacity(k);
    for p in raw {
        let n_dec = rng.random_range(1..=cfg.decisions_max);
        let mut decisions = vec![Decision::null(cfg.m)];
        for d in 1..=n_dec {
            *jitter_counter += 1;
            let value =
                rng.random_range(cfg.value_range.0..=cfg.value_range.1) + VALUE_JITTER * *jitter_counter as f64;
            let consumption: Vec<f64> = (0..cfg.m)
                .map(|_| if rng.random::<f64>() < cfg.sparsity { rng.random_range(0.0..=1.0) } else { 0.0 })
                .collect();
            decisions.push(Decision { id: d, value, consumption });
        }
        types.push(RequestType { probability: p / total, decisions });
    }
    RequestDistribution::new(types)
}

/// Generates an iid or nonidentical prophet instance. The augmentation
/// family shares the nonidentical per-step generator; its plan is produced
/// separately by `gen_augmentation_plan`.
pub fn gen_prophet_instance(cfg: &GeneratorConfig) -> Result<Instance> {
    if !matches!(cfg.family, Family::Iid | Family::Nonidentical | Family::Augmentation) {
        return Err(Error::invalid("gen_prophet_instance requires a prophet-model family"));
    }
    check_prophet_knobs(cfg)?;
    let mut rng = stream_from_seed(cfg.seed);
    let mut jitter = 0u64;
    let budget = resolve_budget(cfg);
    let distributions = match cfg.family {
        Family::Iid => {
            let shared = gen_distribution(cfg, &mut rng, &mut jitter)?;
            vec![shared; cfg.n]
        }
        _ => (0..cfg.n)
            .map(|_| gen_distribution(cfg, &mut rng, &mut jitter))
            .collect::<Result<Vec<_>>>()?,
    };
    Instance::new(cfg.m, vec![budget; cfg.m], distributions)
}

/// The generated hard instance plus the bookkeeping its exact oracle needs.
#[derive(Debug, Clone, PartialEq)]
pub struct HardInstance {
    pub instance: Instance,
    pub z: usize,
    pub b: usize,
    /// The scale the lower bound pins: eps = sqrt(z/B).
    pub epsilon: f64,
    /// Buyers per bundle index in group 1, `sqrt(B/z)` rounded to nearest.
    pub group1_per_type: usize,
    /// Per step: (group 1..=3, bundle index l in 0..z).
    pub layout: Vec<(u8, usize)>,
}

fn bundle(l: usize, z: usize, ones: bool) -> Vec<f64> {
    let m = 1usize << z;
    (0..m).map(|j| if ((j >> l) & 1 == 1) == ones { 1.0 } else { 0.0 }).collect()
}

fn single_minded(value: f64, consumption: Vec<f64>) -> Vec<Decision> {
    let m = consumption.len();
    vec![Decision::null(m), Decision { id: 1, value, consumption }]
}

/// Single-minded buyers over m = 2^z items with B copies each. Per bundle
/// index l: group 1 brings `sqrt(B/z)` buyers of value 2 wanting the items
/// whose l-th bit is 1, group 2 brings `2B/z` buyers of value 1 or 3 with
/// probability 1/2 each wanting the same items, group 3 brings `B/z` buyers
/// of value 4 wanting the complement. Groups arrive in order, bundle index
/// ascending within each group.
///
/// `sqrt(B/z)` is rounded to the nearest integer when fractional; the value
/// bounds [5B, 7B] on the exact optimum only count groups 2 and 3 below and
/// total item copies above, so rounding group 1 leaves them intact.
pub fn gen_hard_instance(z: usize, b: usize) -> Result<HardInstance> {
    if z == 0 || z > 16 {
        return Err(Error::invalid(format!("z = {z} outside [1, 16]")));
    }
    if b == 0 || b % z != 0 {
        return Err(Error::invalid(format!("B = {b} must be a positive multiple of z = {z}")));
    }
    let m = 1usize << z;
    let per_type_2 = 2 * b / z;
    let per_type_3 = b / z;
    let group1 = ((b as f64 / z as f64).sqrt().round() as usize).max(1);
    let epsilon = (z as f64 / b as f64).sqrt();
    let mut distributions = Vec::new();
    let mut layout = Vec::new();
    for l in 0..z {
        for _ in 0..group1 {
            distributions.push(RequestDistribution {
                types: vec![RequestType { probability: 1.0, decisions: single_minded(2.0, bundle(l, z, true)) }],
            });
            layout.push((1, l));
        }
    }
    for l in 0..z {
        for _ in 0..per_type_2 {
            distributions.push(RequestDistribution {
                types: vec![
                    RequestType { probability: 0.5, decisions: single_minded(1.0, bundle(l, z, true)) },
                    RequestType { probability: 0.5, decisions: single_minded(3.0, bundle(l, z, true)) },
                ],
            });
            layout.push((2, l));
        }
    }
    for l in 0..z {
        for _ in 0..per_type_3 {
            distributions.push(RequestDistribution {
                types: vec![RequestType { probability: 1.0, decisions: single_minded(4.0, bundle(l, z, false)) }],
            });
            layout.push((3, l));
        }
    }
    let instance = Instance::new(m, vec![b as f64; m], distributions)?;
    Ok(HardInstance { instance, z, b, epsilon, group1_per_type: group1, layout })
}

/// Exact offline optimum of one hard-instance realization, by counting.
///
/// Serving `n_l` bit-one buyers and `k_l` bit-zero buyers of bundle index l
/// loads the item whose bits select the larger of each pair by
/// `sum_l max(n_l, k_l)`, and every bit pattern is an item, so feasibility is
/// exactly `sum_l max(n_l, k_l) <= B`. Within a width `w_l = max(n_l, k_l)`
/// it is optimal to take the `min(w_l, B/z)` value-4 buyers and the top
/// `w_l` values on the bit-one side. A small knapsack over widths finishes.
pub fn hard_instance_offline_opt(hard: &HardInstance, requests: &[RealizedRequest]) -> Result<f64> {
    if requests.len() != hard.layout.len() {
        return Err(Error::invalid(format!(
            "{} requests for a layout of {}",
            requests.len(),
            hard.layout.len()
        )));
    }
    let z = hard.z;
    let b = hard.b;
    let mut a_values: Vec<Vec<f64>> = vec![Vec::new(); z];
    let mut b_counts = vec![0usize; z];
    for (req, &(group, l)) in requests.iter().zip(&hard.layout) {
        if group == 3 {
            b_counts[l] += 1;
        } else {
            a_values[l].push(req.menu[1].value);
        }
    }
    let mut prefix: Vec<Vec<f64>> = Vec::with_capacity(z);
    for vs in &mut a_values {
        vs.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let mut acc = vec![0.0];
        for &v in vs.iter() {
            acc.push(acc.last().unwrap() + v);
        }
        prefix.push(acc);
    }
    let mut dp = vec![f64::NEG_INFINITY; b + 1];
    dp[0] = 0.0;
    for l in 0..z {
        let mut next = vec![f64::NEG_INFINITY; b + 1];
        for used in 0..=b {
            if dp[used] == f64::NEG_INFINITY {
                continue;
            }
            for w in 0..=(b - used) {
                let val = 4.0 * w.min(b_counts[l]) as f64 + prefix[l][w.min(a_values[l].len())];
                let cell = &mut next[used + w];
                *cell = cell.max(dp[used] + val);
            }
        }
        dp = next;
    }
    Ok(dp.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

fn random_red_menu(cfg: &GeneratorConfig, rng: &mut Stream) -> Vec<Decision> {
    let value = rng.random_range(cfg.value_range.0..=cfg.value_range.1.max(cfg.value_range.0 + 1.0));
    let consumption: Vec<f64> = (0..cfg.m).map(|_| rng.random_range(0.0..=1.0)).collect();
    vec![Decision::null(cfg.m), Decision { id: 1, value, consumption }]
}

/// Builds a Byzantine scenario: green menus realized from a generated
/// prophet instance, reds per preset with times fixed up front, and the
/// benchmark estimate taken from the green-only optimum.
pub fn gen_byzantine_scenario(cfg: &GeneratorConfig) -> Result<ByzantineScenario> {
    if cfg.family != Family::Byzantine {
        return Err(Error::invalid("gen_byzantine_scenario requires the byzantine family"));
    }
    if !(0.0..1.0).contains(&cfg.red_fraction) {
        return Err(Error::invalid(format!("red fraction {} outside [0,1)", cfg.red_fraction)));
    }
    let n_r = (cfg.red_fraction * cfg.n as f64).round() as usize;
    let n_g = cfg.n - n_r;
    let budget = resolve_budget(cfg);
    let greens: Vec<Vec<Decision>> = if n_g == 0 {
        Vec::new()
    } else {
        let mut green_cfg = cfg.clone();
        green_cfg.family = Family::Nonidentical;
        green_cfg.n = n_g;
        let inst = gen_prophet_instance(&green_cfg)?;
        realize_instance(&inst, derive_seed(cfg.seed, 1))
            .into_iter()
            .map(|r| r.menu)
            .collect()
    };
    let mut rng = stream_from_seed(derive_seed(cfg.seed, 2));
    let reds: Vec<RedRequest> = (0..n_r)
        .map(|i| match cfg.red_preset {
            RedPreset::FrontLoaded => {
                RedRequest { time: i as f64 * 1e-6, menu: random_red_menu(cfg, &mut rng) }
            }
            RedPreset::ValueDecoys => RedRequest {
                time: i as f64 * 1e-6,
                menu: vec![
                    Decision::null(cfg.m),
                    Decision {
                        id: 1,
                        value: 10.0 * cfg.value_range.1.max(1.0),
                        consumption: vec![1.0; cfg.m],
                    },
                ],
            },
            RedPreset::BudgetBurners => RedRequest {
                time: (i + 1) as f64 / (n_r + 1) as f64,
                menu: vec![
                    Decision::null(cfg.m),
                    Decision { id: 1, value: 0.0, consumption: vec![1.0; cfg.m] },
                ],
            },
            RedPreset::UniformRed => {
                RedRequest { time: rng.random::<f64>(), menu: random_red_menu(cfg, &mut rng) }
            }
        })
        .collect();
    let mut scenario = ByzantineScenario {
        m: cfg.m,
        budgets: vec![budget; cfg.m],
        greens,
        reds,
        opt_hat: 0.0,
        beta: 1.0,
    };
    let (bench, _) = evaluate_green_benchmark(&scenario)?;
    scenario.opt_hat = bench;
    Ok(scenario)
}

/// Builds an augmentation plan for an instance per preset.
pub fn gen_augmentation_plan(
    inst: &Instance,
    preset: AugPreset,
    _rng: &mut Stream,
) -> Result<AugmentationPlan> {
    let mut plan = AugmentationPlan::new();
    match preset {
        AugPreset::Zero => {}
        AugPreset::UniformBoost => {
            for (i, dist) in inst.distributions.iter().enumerate() {
                for (k, t) in dist.types.iter().enumerate() {
                    for d in t.decisions.iter().skip(1) {
                        plan.set(i, k, d.id, 1.0)?;
                    }
                }
            }
        }
        AugPreset::Misleading => {
            // Lift each menu's worst value-per-consumption decision just past
            // the best value, trying to drag the argmax off course.
            for (i, dist) in inst.distributions.iter().enumerate() {
                for (k, t) in dist.types.iter().enumerate() {
                    let best = t.decisions.iter().map(|d| d.value).fold(0.0, f64::max);
                    let worst = t.decisions.iter().skip(1).min_by(|a, b| {
                        let da = a.value / (1.0 + a.consumption.iter().sum::<f64>());
                        let db = b.value / (1.0 + b.consumption.iter().sum::<f64>());
                        da.partial_cmp(&db).unwrap()
                    });
                    if let Some(d) = worst {
                        plan.set(i, k, d.id, best - d.value + 1.0)?;
                    }
                }
            }
        }
        AugPreset::Spike => {
            let first = &inst.distributions[0].types[0].decisions;
            let theta = if first.len() > 1 { 1 } else { 0 };
            plan.set(0, 0, theta, 1e6)?;
        }
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augmentation::apply_augmentation;
    use crate::domain::validate_instance;
    use crate::lp::brute_force_offline_opt;

    #[test]
    fn k_max_one_is_deterministic() {
        let cfg = GeneratorConfig { k_max: 1, n: 8, seed: 3, ..Default::default() };
        let inst = gen_prophet_instance(&cfg).unwrap();
        assert!(inst.distributions.iter().all(|d| d.types.len() == 1));
        assert_eq!(realize_instance(&inst, 1), realize_instance(&inst, 2));
    }

    #[test]
    fn iid_replicates_one_distribution() {
        let cfg = GeneratorConfig { family: Family::Iid, n: 10, seed: 4, ..Default::default() };
        let inst = gen_prophet_instance(&cfg).unwrap();
        for d in &inst.distributions[1..] {
            assert_eq!(*d, inst.distributions[0]);
        }
    }

    #[test]
    fn generated_instances_validate() {
        for seed in 0..1000u64 {
            let cfg = GeneratorConfig {
                family: if seed % 2 == 0 { Family::Iid } else { Family::Nonidentical },
                n: 3 + (seed % 7) as usize,
                m: 1 + (seed % 3) as usize,
                seed,
                ..Default::default()
            };
            let inst = gen_prophet_instance(&cfg).unwrap();
            let violations = validate_instance(&inst);
            assert!(violations.is_empty(), "seed {seed}: {:?}", violations[0]);
        }
    }

    #[test]
    fn rejects_bad_knobs() {
        let cfg = GeneratorConfig { sparsity: 0.0, ..Default::default() };
        assert!(gen_prophet_instance(&cfg).is_err());
        let cfg = GeneratorConfig { value_range: (2.0, 1.0), ..Default::default() };
        assert!(gen_prophet_instance(&cfg).is_err());
        let cfg = GeneratorConfig { family: Family::HardLowerBound, ..Default::default() };
        assert!(gen_prophet_instance(&cfg).is_err());
    }

    #[test]
    fn theorem_budget_matches_desk_value() {
        assert_eq!(theorem_budget(500, 5, 1.0, 0.25), 4716.0);
    }

    #[test]
    fn hard_instance_z1_b4_shape() {
        let hard = gen_hard_instance(1, 4).unwrap();
        assert_eq!(hard.instance.m, 2);
        assert_eq!(hard.epsilon, 0.5);
        assert_eq!(hard.group1_per_type, 2);
        // 2 + 8 + 4 buyers = 3B + sqrt(Bz).
        assert_eq!(hard.instance.n(), 14);
        assert_eq!(hard.instance.budgets, vec![4.0, 4.0]);
        let g1 = &hard.instance.distributions[0].types[0].decisions[1];
        assert_eq!(g1.value, 2.0);
        assert_eq!(g1.consumption, vec![0.0, 1.0]);
        let g3 = &hard.instance.distributions[13].types[0].decisions[1];
        assert_eq!(g3.value, 4.0);
        assert_eq!(g3.consumption, vec![1.0, 0.0]);
        assert!(validate_instance(&hard.instance).is_empty());
    }

    #[test]
    fn hard_instance_z2_b8_shape() {
        let hard = gen_hard_instance(2, 8).unwrap();
        assert_eq!(hard.instance.m, 4);
        assert_eq!(hard.instance.n(), 2 * 2 + 2 * 8 + 2 * 4);
        // Bundles are complementary and each covers half the items.
        for l in 0..2 {
            let a = bundle(l, 2, true);
            let b = bundle(l, 2, false);
            assert_eq!(a.iter().sum::<f64>(), 2.0);
            assert_eq!(b.iter().sum::<f64>(), 2.0);
            for j in 0..4 {
                assert_eq!(a[j] + b[j], 1.0);
            }
        }
        // Group 2 is the random-value group.
        let dist = &hard.instance.distributions[4];
        assert_eq!(dist.types.len(), 2);
        assert_eq!(dist.types[0].decisions[1].value, 1.0);
        assert_eq!(dist.types[1].decisions[1].value, 3.0);
    }

    #[test]
    fn hard_instance_rejects_nonintegral_groups() {
        assert!(gen_hard_instance(2, 9).is_err());
        assert!(gen_hard_instance(0, 4).is_err());
    }

    #[test]
    fn hard_instance_optimum_in_stated_range() {
        let hard = gen_hard_instance(1, 4).unwrap();
        for seed in 0..100u64 {
            let requests = realize_instance(&hard.instance, seed);
            let (brute, _) = brute_force_offline_opt(&requests, &hard.instance.budgets).unwrap();
            assert!((20.0..=28.0).contains(&brute), "seed {seed}: {brute}");
            let counted = hard_instance_offline_opt(&hard, &requests).unwrap();
            assert!((counted - brute).abs() < 1e-9, "seed {seed}: count {counted} brute {brute}");
        }
    }

    #[test]
    fn count_oracle_covers_large_hard_instances() {
        let hard = gen_hard_instance(2, 16).unwrap();
        assert_eq!(hard.group1_per_type, 3);
        for seed in 0..20u64 {
            let requests = realize_instance(&hard.instance, seed);
            let opt = hard_instance_offline_opt(&hard, &requests).unwrap();
            assert!((5.0 * 16.0..=7.0 * 16.0).contains(&opt), "seed {seed}: {opt}");
        }
    }

    #[test]
    fn byzantine_zero_red_fraction() {
        let cfg = GeneratorConfig {
            family: Family::Byzantine,
            n: 6,
            m: 1,
            seed: 5,
            ..Default::default()
        };
        let sc = gen_byzantine_scenario(&cfg).unwrap();
        assert!(sc.reds.is_empty());
        assert_eq!(sc.greens.len(), 6);
        sc.check().unwrap();
        assert!(sc.opt_hat > 0.0);
    }

    #[test]
    fn front_loaded_red_times() {
        let cfg = GeneratorConfig {
            family: Family::Byzantine,
            n: 10,
            m: 1,
            red_fraction: 0.3,
            red_preset: RedPreset::FrontLoaded,
            seed: 6,
            ..Default::default()
        };
        let sc = gen_byzantine_scenario(&cfg).unwrap();
        let times: Vec<f64> = sc.reds.iter().map(|r| r.time).collect();
        assert_eq!(times, vec![0.0, 1e-6, 2e-6]);
    }

    #[test]
    fn budget_burners_never_get_served() {
        let cfg = GeneratorConfig {
            family: Family::Byzantine,
            n: 8,
            m: 2,
            red_fraction: 0.25,
            red_preset: RedPreset::BudgetBurners,
            seed: 7,
            ..Default::default()
        };
        let sc = gen_byzantine_scenario(&cfg).unwrap();
        for red in &sc.reds {
            assert_eq!(red.menu[1].value, 0.0);
            assert!(red.menu[1].consumption.iter().all(|&a| a == 1.0));
        }
        let mut rng = stream_from_seed(8);
        for _ in 0..20 {
            let sched = crate::byzantine::discretize(&sc, 0.25, &mut rng).unwrap();
            let out = crate::byzantine::run_byzantine_pricing(&sc, &sched, 0.25).unwrap();
            assert_eq!(out.red_allocations, 0);
        }
    }

    #[test]
    fn augmentation_presets() {
        let cfg = GeneratorConfig { n: 5, m: 1, seed: 9, ..Default::default() };
        let inst = gen_prophet_instance(&cfg).unwrap();
        let mut rng = stream_from_seed(10);
        let zero = gen_augmentation_plan(&inst, AugPreset::Zero, &mut rng).unwrap();
        assert!(zero.is_empty());

        let boost = gen_augmentation_plan(&inst, AugPreset::UniformBoost, &mut rng).unwrap();
        for (i, dist) in inst.distributions.iter().enumerate() {
            for (k, t) in dist.types.iter().enumerate() {
                let req = RealizedRequest { step: i, type_index: k, menu: t.decisions.clone() };
                let out = apply_augmentation(&req, &boost);
                assert_eq!(out.menu[0].value, 0.0);
                for (d, base) in out.menu.iter().zip(&t.decisions).skip(1) {
                    assert_eq!(d.value, base.value + 1.0);
                }
            }
        }

        let spike = gen_augmentation_plan(&inst, AugPreset::Spike, &mut rng).unwrap();
        assert_eq!(spike.len(), 1);
        assert_eq!(spike.get(0, 0, 1), 1e6);
    }
}
