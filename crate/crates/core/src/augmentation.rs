//! Oblivious nonnegative value perturbations on top of exponential pricing.
//!
//! An adversary fixes, before any randomness, a perturbation `r(i, k, theta)
//! >= 0` per step, type, and decision. The allocator sees perturbed values
//! `v + r` and best-responds to them, while parameters and estimates still
//! come from the unperturbed instance. Because perturbations only raise
//! utilities, the chosen decision's perturbed utility dominates every
//! unperturbed utility on the menu, step by step, which is the hook the
//! guarantee against the unperturbed benchmark hangs on.

use crate::domain::{utility, RealizedRequest, Trace};
use crate::error::{Error, Result};
use crate::pricing::{
    compute_parameters, known_distribution_estimates, run_exponential_pricing_with,
};
use crate::domain::{realize_instance, Instance};
use std::collections::BTreeMap;

/// Sparse map from (step, type, decision) to a nonnegative value boost.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AugmentationPlan {
    r: BTreeMap<(usize, usize, usize), f64>,
}

impl AugmentationPlan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, step: usize, type_index: usize, decision: usize, r: f64) -> Result<()> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::invalid(format!(
                "perturbation r({step},{type_index},{decision}) = {r} must be nonnegative"
            )));
        }
        self.r.insert((step, type_index, decision), r);
        Ok(())
    }

    pub fn get(&self, step: usize, type_index: usize, decision: usize) -> f64 {
        self.r.get(&(step, type_index, decision)).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        self.r.iter().map(|(&(i, k, th), &r)| (i, k, th, r))
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (usize, usize, usize, f64)>) -> Result<Self> {
        let mut plan = Self::new();
        for (i, k, th, r) in entries {
            plan.set(i, k, th, r)?;
        }
        Ok(plan)
    }
}

/// Applies the plan to one realized request: values become `v + r`, menus and
/// consumptions unchanged.
pub fn apply_augmentation(req: &RealizedRequest, plan: &AugmentationPlan) -> RealizedRequest {
    let mut out = req.clone();
    for d in &mut out.menu {
        d.value += plan.get(req.step, req.type_index, d.id);
    }
    out
}

/// A finished augmented run: the trace records perturbed gains, the base
/// fields what the same decisions earn without perturbations.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedRun {
    pub trace: Trace,
    pub base_total_value: f64,
    /// Unperturbed value of the chosen decision, per recorded step.
    pub base_values: Vec<f64>,
}

/// Exponential pricing where the argmax sees perturbed values. Estimates and
/// parameters come from the unperturbed instance's relaxation at budgets
/// scaled by `1 - eps`; everything else is the standard loop, so a zero plan
/// reproduces the unaugmented run bit for bit.
pub fn run_augmented_pricing(
    inst: &Instance,
    plan: &AugmentationPlan,
    epsilon: f64,
    seed: u64,
) -> Result<AugmentedRun> {
    let est = known_distribution_estimates(inst, epsilon)?;
    let params = compute_parameters(&est, inst.n(), inst.m, &inst.budgets, epsilon)?;
    let requests = realize_instance(inst, seed);
    let augmented: Vec<RealizedRequest> =
        requests.iter().map(|r| apply_augmentation(r, plan)).collect();
    let trace = run_exponential_pricing_with(&params, &augmented, &inst.budgets, &est.a_hat);
    let base_values: Vec<f64> = trace
        .steps
        .iter()
        .map(|s| requests[s.step].menu[s.chosen].value)
        .collect();
    let base_total_value = base_values.iter().sum();
    Ok(AugmentedRun { trace, base_total_value, base_values })
}

/// Asserts, for every recorded step, that the chosen decision's perturbed
/// utility is at least the best unperturbed utility on the menu. Holds
/// exactly whenever the hard guard stayed inert.
pub fn check_step_dominance(
    run: &AugmentedRun,
    requests: &[RealizedRequest],
    plan: &AugmentationPlan,
) -> Result<()> {
    for step in &run.trace.steps {
        let req = &requests[step.step];
        let augmented = apply_augmentation(req, plan);
        let chosen_utility = utility(&augmented.menu[step.chosen], &step.prices);
        let base_best = req
            .menu
            .iter()
            .map(|d| utility(d, &step.prices))
            .fold(f64::NEG_INFINITY, f64::max);
        if chosen_utility < base_best {
            return Err(Error::invalid(format!(
                "step {}: perturbed utility {chosen_utility} below base best {base_best}",
                step.step
            )));
        }
    }
    Ok(())
}
