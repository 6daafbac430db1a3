//! Exponential pricing from consumption estimates.
//!
//! Given per-step estimated consumptions `a_hat[i][j]` and a value estimate
//! `opt_hat`, the allocator posts, before step `i`,
//!
//! ```text
//! lambda[i][j] = lambda_init * exp(delta_j * (sum_{l<i} alg[l][j] - sum_{l<i} a_hat[l][j]))
//! lambda_init  = opt_hat * 4 ln(n m beta / eps) / (n m)
//! delta_j      = 8 ln(n m beta / eps) / (eps * B_j)
//! ```
//!
//! and lets the request best-respond. Prices grow exponentially while the run
//! consumes ahead of the estimate and decay while it lags, so cumulative
//! consumption shadows the estimate path. The run stops after step `i` if for
//! some resource `sum_{l<=i} alg >= sum_{l<=i} a_hat + eps B_j / 2`; the
//! triggering step's gain is kept.
//!
//! Two per-run certificates make the analysis checkable on concrete data:
//! a no-regret inequality for exponentiated prices against any bounded gain
//! sequence, and a revenue-loss inequality comparing priced estimate mass
//! against priced algorithm mass.

use crate::domain::{best_response, realize_instance, Instance, RealizedRequest, Trace, TraceStep};
use crate::error::{Error, Result};
use crate::lp::{build_configuration_lp, solution_consumption, solve_packing_lp};
use serde::{Deserialize, Serialize};

/// Tolerance on certificate inequalities.
const CERT_TOL: f64 = 1e-9;
/// Hard feasibility guard slack.
pub(crate) const GUARD_TOL: f64 = 1e-9;

/// Consumption and value estimates feeding a pricing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    /// Estimated benchmark value; at most the true optimum, within factor
    /// `beta` of it from below.
    pub opt_hat: f64,
    /// Quality factor, at least 1.
    pub beta: f64,
    /// `n x m` estimated per-step consumption.
    pub a_hat: Vec<Vec<f64>>,
}

impl Estimates {
    pub fn check(&self, n: usize, m: usize) -> Result<()> {
        if !self.opt_hat.is_finite() || self.opt_hat < 0.0 {
            return Err(Error::invalid(format!("opt_hat {} must be finite and >= 0", self.opt_hat)));
        }
        if !self.beta.is_finite() || self.beta < 1.0 {
            return Err(Error::invalid(format!("beta {} must be at least 1", self.beta)));
        }
        if self.a_hat.len() != n {
            return Err(Error::invalid(format!("a_hat has {} rows, expected {n}", self.a_hat.len())));
        }
        for (i, row) in self.a_hat.iter().enumerate() {
            if row.len() != m {
                return Err(Error::invalid(format!("a_hat[{i}] has {} entries, expected {m}", row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || !(-1e-9..=1.0 + 1e-9).contains(&v) {
                    return Err(Error::invalid(format!("a_hat[{i}][{j}] = {v} outside [0,1]")));
                }
            }
        }
        Ok(())
    }
}

/// Derived run parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingParams {
    pub epsilon: f64,
    pub lambda_init: f64,
    /// Per-resource step size, each in `(0, 1/2]`.
    pub delta: Vec<f64>,
}

/// Derives `lambda_init` and per-resource `delta` from estimates and problem
/// dimensions. Signals `BudgetTooSmall` when any `delta_j` exceeds 1/2, the
/// range the no-regret argument needs.
pub fn compute_parameters(
    est: &Estimates,
    n: usize,
    m: usize,
    budgets: &[f64],
    epsilon: f64,
) -> Result<PricingParams> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("n and m must be at least 1"));
    }
    if budgets.len() != m {
        return Err(Error::invalid(format!("{} budgets for m = {m}", budgets.len())));
    }
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon > 0.5 {
        return Err(Error::invalid(format!("epsilon {epsilon} outside (0, 1/2]")));
    }
    if !est.opt_hat.is_finite() || est.opt_hat < 0.0 || !est.beta.is_finite() || est.beta < 1.0 {
        return Err(Error::invalid("estimates must have opt_hat >= 0 and beta >= 1"));
    }
    let ln_term = (n as f64 * m as f64 * est.beta / epsilon).ln();
    let lambda_init = est.opt_hat * 4.0 * ln_term / (n as f64 * m as f64);
    let mut delta = Vec::with_capacity(m);
    for (j, &b) in budgets.iter().enumerate() {
        if !b.is_finite() || b <= 0.0 {
            return Err(Error::invalid(format!("budget[{j}] = {b} must be positive")));
        }
        let d = 8.0 * ln_term / (epsilon * b);
        if d > 0.5 {
            return Err(Error::BudgetTooSmall { resource: j, delta: d });
        }
        delta.push(d);
    }
    Ok(PricingParams { epsilon, lambda_init, delta })
}

/// Prices for the next step given cumulative algorithm consumption and
/// cumulative estimated consumption over the steps already served.
pub fn price_vector(cum_alg: &[f64], cum_hat: &[f64], params: &PricingParams) -> Vec<f64> {
    params
        .delta
        .iter()
        .enumerate()
        .map(|(j, &d)| params.lambda_init * (d * (cum_alg[j] - cum_hat[j])).exp())
        .collect()
}

/// Runs exponential pricing over a seeded realization of the instance.
pub fn run_exponential_pricing(inst: &Instance, est: &Estimates, epsilon: f64, seed: u64) -> Result<Trace> {
    est.check(inst.n(), inst.m)?;
    let params = compute_parameters(est, inst.n(), inst.m, &inst.budgets, epsilon)?;
    let requests = realize_instance(inst, seed);
    Ok(run_exponential_pricing_with(&params, &requests, &inst.budgets, &est.a_hat))
}

/// The pricing loop against an explicit request sequence and parameters.
/// Exposed so audits can replay exact dynamics with hand-picked parameters.
pub fn run_exponential_pricing_with(
    params: &PricingParams,
    requests: &[RealizedRequest],
    budgets: &[f64],
    a_hat: &[Vec<f64>],
) -> Trace {
    let m = budgets.len();
    let n = requests.len();
    let mut cum_alg = vec![0.0; m];
    let mut cum_hat = vec![0.0; m];
    let mut trace = Trace::new();
    for (i, req) in requests.iter().enumerate() {
        let prices = price_vector(&cum_alg, &cum_hat, params);
        let mut chosen = best_response(&req.menu, &prices);
        // Hard feasibility guard: never let a decision push past a budget.
        // Under the intended budget regime the stopping rule fires first and
        // this stays inert; the counter proves it.
        let overruns = chosen
            .consumption
            .iter()
            .zip(budgets)
            .zip(&cum_alg)
            .any(|((a, b), c)| c + a > b + GUARD_TOL);
        if overruns {
            chosen = &req.menu[0];
            trace.guard_activations += 1;
        }
        for (j, &a) in chosen.consumption.iter().enumerate() {
            cum_alg[j] += a;
        }
        trace.total_value += chosen.value;
        trace.steps.push(TraceStep {
            step: i,
            prices,
            chosen: chosen.id,
            value: chosen.value,
            consumption: chosen.consumption.clone(),
            cumulative: cum_alg.clone(),
        });
        for (j, h) in cum_hat.iter_mut().enumerate() {
            *h += a_hat[i][j];
        }
        let stop = (0..m).any(|j| cum_alg[j] >= cum_hat[j] + 0.5 * params.epsilon * budgets[j]);
        if stop {
            trace.terminated_early = i + 1 < n;
            break;
        }
    }
    trace.stop_time = trace.steps.len();
    trace
}

/// Estimates from known distributions: solve the configuration LP at budgets
/// scaled by `1 - eps` and read off its objective and per-step consumption.
pub fn known_distribution_estimates(inst: &Instance, epsilon: f64) -> Result<Estimates> {
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 1.0 {
        return Err(Error::invalid(format!("epsilon {epsilon} outside (0,1)")));
    }
    let lp = build_configuration_lp(inst, 1.0 - epsilon)?;
    let sol = solve_packing_lp(&lp)?;
    let a_hat = solution_consumption(&lp, &sol);
    Ok(Estimates { opt_hat: sol.objective, beta: 1.0, a_hat })
}

/// Both sides of the no-regret inequality for one prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoRegretCertificate {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Checks, for prices `lam_i = lambda_init * exp(delta * sum_{l<i} r_l)` and
/// gains `r_i` in `[-1, 1]`:
///
/// ```text
/// sum_{i<=tau} lam_i r_i  >=  -2 lambda_init / delta - 4 delta sum_{i<=tau} lam_i max(r_i, 0)
/// ```
pub fn check_no_regret_certificate(
    r: &[f64],
    lambda_init: f64,
    delta: f64,
    tau: usize,
) -> Result<NoRegretCertificate> {
    validate_no_regret_inputs(r, lambda_init, delta, tau)?;
    let mut prefix = 0.0;
    let mut lhs = 0.0;
    let mut pos = 0.0;
    for &ri in &r[..tau] {
        let lam = lambda_init * (delta * prefix).exp();
        lhs += lam * ri;
        pos += lam * ri.max(0.0);
        prefix += ri;
    }
    let rhs = -2.0 * lambda_init / delta - 4.0 * delta * pos;
    let slack = lhs - rhs;
    Ok(NoRegretCertificate { lhs, rhs, slack, holds: slack >= -CERT_TOL })
}

/// Minimum slack of the no-regret inequality over every prefix `tau = 1..=len`,
/// evaluated in one pass.
pub fn no_regret_min_slack(r: &[f64], lambda_init: f64, delta: f64) -> Result<(f64, bool)> {
    validate_no_regret_inputs(r, lambda_init, delta, r.len())?;
    let mut prefix = 0.0;
    let mut lhs = 0.0;
    let mut pos = 0.0;
    let mut min_slack = f64::INFINITY;
    for &ri in r {
        let lam = lambda_init * (delta * prefix).exp();
        lhs += lam * ri;
        pos += lam * ri.max(0.0);
        prefix += ri;
        let rhs = -2.0 * lambda_init / delta - 4.0 * delta * pos;
        min_slack = min_slack.min(lhs - rhs);
    }
    Ok((min_slack, min_slack >= -CERT_TOL))
}

fn validate_no_regret_inputs(r: &[f64], lambda_init: f64, delta: f64, tau: usize) -> Result<()> {
    if !(lambda_init.is_finite() && lambda_init > 0.0) {
        return Err(Error::invalid(format!("lambda_init {lambda_init} must be positive")));
    }
    if !(delta.is_finite() && delta > 0.0 && delta < 0.5) {
        return Err(Error::invalid(format!("delta {delta} outside (0, 1/2)")));
    }
    if tau > r.len() {
        return Err(Error::invalid(format!("tau {tau} exceeds sequence length {}", r.len())));
    }
    for (i, &ri) in r.iter().enumerate() {
        if !ri.is_finite() || ri.abs() > 1.0 + 1e-12 {
            return Err(Error::invalid(format!("r[{i}] = {ri} outside [-1, 1]")));
        }
    }
    Ok(())
}

/// Per-resource revenue-loss inequality over a finished run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceCertificate {
    pub resource: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Checks, per resource, against the trace's own prices:
///
/// ```text
/// sum_{i<=tau} lam_ij (astar_ij - alg_ij) <= 3 lambda_init / delta_j
///                                            + 5 eps sum_{i<=tau} lam_ij alg_ij
/// ```
///
/// where `astar` is the per-step expected consumption of the LP solution the
/// estimates came from.
pub fn check_revenue_loss_certificate(
    trace: &Trace,
    consumption_star: &[Vec<f64>],
    params: &PricingParams,
) -> Result<Vec<ResourceCertificate>> {
    let m = params.delta.len();
    if consumption_star.len() < trace.stop_time {
        return Err(Error::invalid(format!(
            "consumption_star has {} rows, run stopped at {}",
            consumption_star.len(),
            trace.stop_time
        )));
    }
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let mut lhs = 0.0;
        let mut priced_alg = 0.0;
        for (i, step) in trace.steps.iter().enumerate() {
            let lam = step.prices[j];
            lhs += lam * (consumption_star[i][j] - step.consumption[j]);
            priced_alg += lam * step.consumption[j];
        }
        let rhs = 3.0 * params.lambda_init / params.delta[j] + 5.0 * params.epsilon * priced_alg;
        out.push(ResourceCertificate { resource: j, lhs, rhs, holds: lhs <= rhs + CERT_TOL });
    }
    Ok(out)
}
