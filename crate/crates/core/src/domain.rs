//! Domain model: decisions, request types, distributions, instances,
//! realized requests and run traces.
//!
//! Conventions enforced here and relied on everywhere else:
//!
//! - decision ids within a menu are consecutive from 0,
//! - decision 0 is the null decision (zero value, zero consumption), so a
//!   best response always has nonnegative utility,
//! - consumption vectors live in `[0,1]^m` with one entry per resource,
//! - type probabilities are in `(0,1]` and sum to 1 per step.

use crate::error::{Error, Result};
use crate::rng::{stream_from_seed, Stream};
use rand::Rng;
use serde::{Deserialize, Serialize};

const PROB_SUM_TOL: f64 = 1e-12;

/// One option a request can take: a value and a per-resource consumption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub id: usize,
    pub value: f64,
    pub consumption: Vec<f64>,
}

impl Decision {
    pub fn new(id: usize, value: f64, consumption: Vec<f64>) -> Result<Self> {
        let d = Decision { id, value, consumption };
        d.check()?;
        Ok(d)
    }

    /// The always-available opt-out: zero value, zero consumption, id 0.
    pub fn null(m: usize) -> Self {
        Decision { id: 0, value: 0.0, consumption: vec![0.0; m] }
    }

    pub fn is_null(&self) -> bool {
        self.value == 0.0 && self.consumption.iter().all(|&a| a == 0.0)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if !self.value.is_finite() || self.value < 0.0 {
            return Err(Error::InvalidInstance(format!(
                "decision {} has negative or non-finite value {}",
                self.id, self.value
            )));
        }
        for (j, &a) in self.consumption.iter().enumerate() {
            if !a.is_finite() || !(0.0..=1.0).contains(&a) {
                return Err(Error::InvalidInstance(format!(
                    "decision {} consumption[{}] = {} outside [0,1]",
                    self.id, j, a
                )));
            }
        }
        Ok(())
    }
}

/// A menu of decisions realized with some probability. Decision 0 is null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestType {
    pub probability: f64,
    pub decisions: Vec<Decision>,
}

impl RequestType {
    pub fn new(probability: f64, decisions: Vec<Decision>) -> Result<Self> {
        let t = RequestType { probability, decisions };
        t.check(None)?;
        Ok(t)
    }

    fn check(&self, m: Option<usize>) -> Result<()> {
        if !self.probability.is_finite() || self.probability <= 0.0 || self.probability > 1.0 {
            return Err(Error::InvalidInstance(format!(
                "type probability {} outside (0,1]",
                self.probability
            )));
        }
        if self.decisions.is_empty() {
            return Err(Error::InvalidInstance("type has no decisions".into()));
        }
        if !self.decisions[0].is_null() {
            return Err(Error::InvalidInstance(
                "decision 0 must be the null decision".into(),
            ));
        }
        for (i, d) in self.decisions.iter().enumerate() {
            if d.id != i {
                return Err(Error::InvalidInstance(format!(
                    "decision ids must be consecutive from 0, found id {} at position {}",
                    d.id, i
                )));
            }
            d.check()?;
            if let Some(m) = m {
                if d.consumption.len() != m {
                    return Err(Error::InvalidInstance(format!(
                        "decision {} has {} consumption entries, expected {}",
                        d.id,
                        d.consumption.len(),
                        m
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The per-step distribution over request types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestDistribution {
    pub types: Vec<RequestType>,
}

impl RequestDistribution {
    pub fn new(types: Vec<RequestType>) -> Result<Self> {
        let d = RequestDistribution { types };
        d.check(None)?;
        Ok(d)
    }

    pub fn k(&self) -> usize {
        self.types.len()
    }

    fn check(&self, m: Option<usize>) -> Result<()> {
        if self.types.is_empty() {
            return Err(Error::InvalidInstance("distribution has no types".into()));
        }
        let sum: f64 = self.types.iter().map(|t| t.probability).sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidInstance(format!(
                "type probabilities sum to {sum}, expected 1"
            )));
        }
        for t in &self.types {
            t.check(m)?;
        }
        Ok(())
    }
}

/// A full problem instance: `n` request distributions over `m` budgeted
/// resources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub m: usize,
    pub budgets: Vec<f64>,
    pub distributions: Vec<RequestDistribution>,
}

impl Instance {
    pub fn new(m: usize, budgets: Vec<f64>, distributions: Vec<RequestDistribution>) -> Result<Self> {
        let inst = Instance { m, budgets, distributions };
        let violations = validate_instance(&inst);
        if let Some(v) = violations.first() {
            return Err(Error::InvalidInstance(format!(
                "{v} ({} violations total)",
                violations.len()
            )));
        }
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.distributions.len()
    }
}

/// One arrived request: the step it arrived at, which type it realized, and
/// that type's menu.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizedRequest {
    pub step: usize,
    pub type_index: usize,
    pub menu: Vec<Decision>,
}

impl RealizedRequest {
    /// Largest value on the menu (the null decision keeps it at least 0).
    pub fn max_value(&self) -> f64 {
        self.menu.iter().fold(0.0, |acc, d| acc.max(d.value))
    }
}

/// A single validation finding; a valid instance yields none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "at {}: {}", self.location, self.message)
    }
}

/// Checks every structural invariant of an instance and returns the findings
/// as data. Deserialized inputs go through this before any algorithm runs.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |location: String, message: String| out.push(Violation { location, message });

    if inst.m == 0 {
        push("instance".into(), "m must be at least 1".into());
    }
    if inst.distributions.is_empty() {
        push("instance".into(), "instance has no requests".into());
    }
    if inst.budgets.len() != inst.m {
        push(
            "budgets".into(),
            format!("expected {} budgets, found {}", inst.m, inst.budgets.len()),
        );
    }
    for (j, &b) in inst.budgets.iter().enumerate() {
        if !b.is_finite() || b <= 0.0 {
            push(format!("budgets[{j}]"), format!("budget {b} must be positive"));
        }
    }
    for (i, dist) in inst.distributions.iter().enumerate() {
        if dist.types.is_empty() {
            push(format!("request {i}"), "distribution has no types".into());
            continue;
        }
        let sum: f64 = dist.types.iter().map(|t| t.probability).sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            push(
                format!("request {i}"),
                format!("type probabilities sum to {sum}, expected 1"),
            );
        }
        for (k, t) in dist.types.iter().enumerate() {
            let loc = |suffix: String| format!("request {i} type {k}{suffix}");
            if !t.probability.is_finite() || t.probability <= 0.0 || t.probability > 1.0 {
                push(loc(String::new()), format!("probability {} outside (0,1]", t.probability));
            }
            if t.decisions.is_empty() {
                push(loc(String::new()), "type has no decisions".into());
                continue;
            }
            if !t.decisions[0].is_null() {
                push(loc(String::new()), "decision 0 must be the null decision".into());
            }
            for (pos, d) in t.decisions.iter().enumerate() {
                let dloc = loc(format!(" decision {pos}"));
                if d.id != pos {
                    push(dloc.clone(), format!("id {} out of order", d.id));
                }
                if !d.value.is_finite() || d.value < 0.0 {
                    push(dloc.clone(), format!("value {} negative or non-finite", d.value));
                }
                if d.consumption.len() != inst.m {
                    push(
                        dloc.clone(),
                        format!("{} consumption entries, expected {}", d.consumption.len(), inst.m),
                    );
                } else {
                    for (j, &a) in d.consumption.iter().enumerate() {
                        if !a.is_finite() || !(0.0..=1.0).contains(&a) {
                            push(dloc.clone(), format!("consumption[{j}] = {a} outside [0,1]"));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Maps one uniform draw `u` in `[0,1)` to a type index by inverse CDF over
/// the type probabilities.
pub fn type_index_for(dist: &RequestDistribution, u: f64) -> usize {
    let mut cum = 0.0;
    for (k, t) in dist.types.iter().enumerate() {
        cum += t.probability;
        if u < cum {
            return k;
        }
    }
    dist.types.len() - 1
}

/// Draws the realized type for one step, consuming exactly one `f64` from the
/// stream.
pub fn sample_request(dist: &RequestDistribution, step: usize, rng: &mut Stream) -> RealizedRequest {
    let u: f64 = rng.random();
    let k = type_index_for(dist, u);
    RealizedRequest { step, type_index: k, menu: dist.types[k].decisions.clone() }
}

/// Realizes every step of an instance from one seed. Runners and auditors
/// that share a seed see the identical request sequence.
pub fn realize_instance(inst: &Instance, seed: u64) -> Vec<RealizedRequest> {
    let mut rng = stream_from_seed(seed);
    inst.distributions
        .iter()
        .enumerate()
        .map(|(i, dist)| sample_request(dist, i, &mut rng))
        .collect()
}

/// Utility of a decision under posted prices: value minus priced consumption.
pub fn utility(d: &Decision, prices: &[f64]) -> f64 {
    let paid: f64 = d.consumption.iter().zip(prices).map(|(a, p)| a * p).sum();
    d.value - paid
}

/// The request's best response to posted prices: the utility-maximizing
/// decision, ties broken toward the smallest id. The null decision pins the
/// maximum at 0 or above.
pub fn best_response<'a>(menu: &'a [Decision], prices: &[f64]) -> &'a Decision {
    debug_assert!(!menu.is_empty());
    let mut best = &menu[0];
    let mut best_u = utility(best, prices);
    for d in &menu[1..] {
        let u = utility(d, prices);
        if u > best_u {
            best = d;
            best_u = u;
        }
    }
    best
}

/// One executed step of an allocation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    pub prices: Vec<f64>,
    pub chosen: usize,
    pub value: f64,
    pub consumption: Vec<f64>,
    pub cumulative: Vec<f64>,
}

/// Full record of a run: per-step decisions and prices, the stopping time,
/// and audit counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    /// Number of steps whose gains count; equals `steps.len()`.
    pub stop_time: usize,
    /// True when the consumption-versus-estimate stopping rule fired before
    /// the horizon ran out.
    pub terminated_early: bool,
    pub total_value: f64,
    /// Times the hard feasibility guard replaced a chosen decision with null.
    pub guard_activations: u64,
}

impl Trace {
    pub fn new() -> Self {
        Trace {
            steps: Vec::new(),
            stop_time: 0,
            terminated_early: false,
            total_value: 0.0,
            guard_activations: 0,
        }
    }

    /// Peak consumed fraction of any budget over the run.
    pub fn max_utilization(&self, budgets: &[f64]) -> f64 {
        match self.steps.last() {
            None => 0.0,
            Some(last) => last
                .cumulative
                .iter()
                .zip(budgets)
                .map(|(c, b)| c / b)
                .fold(0.0, f64::max),
        }
    }
}

impl Default for Trace {
    fn default() -> Self {
        Self::new()
    }
}
