//! Pricing against a mix of stochastic and adversarial arrivals.
//!
//! Green requests arrive at independent uniform times, red requests at
//! adversary-chosen times. Time is discretized into `T = ceil((n_G+n_R)^2/eps)`
//! slots so that with good probability every request gets its own slot; empty
//! slots carry a dummy request with only the null decision.
//!
//! The allocator prices resource `j` at within-half step `t` as
//!
//! ```text
//! lambda[t][j] = lambda_init * exp(eps * (sum_{s<t} alg[s][j] - (t-1)(1-eps) B_j / T))
//! lambda_init  = eps^5 * opt_hat / m^4
//! ```
//!
//! pacing against the uniform consumption rate `B_j/T` instead of a learned
//! estimate. A half breaks once the next price would exceed
//! `lambda_init * (m beta / eps)^8`; remaining slots of that half take null at
//! frozen prices, and the second half restarts from `lambda_init` as if
//! nothing happened. The split limits how much budget an adversarial prefix
//! can burn: each half consumes at most `B_j/2 + 1` in the intended budget
//! regime.

use crate::domain::{best_response, Decision, RealizedRequest, Trace, TraceStep};
use crate::error::{Error, Result};
use crate::lp::{brute_force_offline_opt, build_sample_lp, solve_packing_lp};
use crate::rng::Stream;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// An adversarial request: a chosen arrival time in `[0,1]` and a menu.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedRequest {
    pub time: f64,
    pub menu: Vec<Decision>,
}

/// Fixed green menus, adversarial red requests, and a benchmark estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ByzantineScenario {
    pub m: usize,
    pub budgets: Vec<f64>,
    /// Menus of the stochastic requests; their arrival order is random.
    pub greens: Vec<Vec<Decision>>,
    pub reds: Vec<RedRequest>,
    /// Estimate of the green-only offline optimum, within factor beta below.
    pub opt_hat: f64,
    pub beta: f64,
}

impl ByzantineScenario {
    pub fn n(&self) -> usize {
        self.greens.len() + self.reds.len()
    }

    pub fn check(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("scenario needs at least one resource"));
        }
        if self.budgets.len() != self.m {
            return Err(Error::invalid(format!("{} budgets for m = {}", self.budgets.len(), self.m)));
        }
        for (j, &b) in self.budgets.iter().enumerate() {
            if !b.is_finite() || b <= 0.0 {
                return Err(Error::invalid(format!("budget[{j}] = {b} must be positive")));
            }
        }
        if !self.opt_hat.is_finite() || self.opt_hat < 0.0 {
            return Err(Error::invalid(format!("opt_hat {} must be finite and >= 0", self.opt_hat)));
        }
        if !self.beta.is_finite() || self.beta < 1.0 {
            return Err(Error::invalid(format!("beta {} must be at least 1", self.beta)));
        }
        for (g, menu) in self.greens.iter().enumerate() {
            check_menu(menu, self.m).map_err(|e| Error::invalid(format!("green {g}: {e}")))?;
        }
        for (r, red) in self.reds.iter().enumerate() {
            if !red.time.is_finite() || !(0.0..=1.0).contains(&red.time) {
                return Err(Error::invalid(format!("red {r} time {} outside [0,1]", red.time)));
            }
            check_menu(&red.menu, self.m).map_err(|e| Error::invalid(format!("red {r}: {e}")))?;
        }
        Ok(())
    }
}

fn check_menu(menu: &[Decision], m: usize) -> Result<()> {
    if menu.is_empty() || !menu[0].is_null() {
        return Err(Error::invalid("menu must start with the null decision"));
    }
    for (i, d) in menu.iter().enumerate() {
        if d.id != i {
            return Err(Error::invalid(format!("decision ids must be consecutive, found {} at {i}", d.id)));
        }
        if d.consumption.len() != m {
            return Err(Error::invalid(format!("decision {i} has {} consumption entries, expected {m}", d.consumption.len())));
        }
        d.check()?;
    }
    Ok(())
}

/// What occupies one time slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SlotContent {
    /// Null-only filler.
    Dummy,
    /// An adversarial menu, inlined since reds own their slot.
    Red(Vec<Decision>),
    /// Index into the scenario's green list.
    Green(usize),
}

/// A fully discretized arrival sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotSchedule {
    pub slots: Vec<SlotContent>,
    /// Raw collisions hit while placing requests, before resampling fixed
    /// them. Red-on-red collisions drop the later red instead.
    pub conflicts: u64,
}

impl SlotSchedule {
    pub fn t(&self) -> usize {
        self.slots.len()
    }
}

fn slot_of(time: f64, t: usize) -> usize {
    ((time * t as f64).ceil() as usize).clamp(1, t) - 1
}

/// Maps reds to their chosen slots (first red per slot wins) and greens to
/// independent uniform slots. Collisions are counted, then greens resample
/// until free so every run is a valid discretized instance; the analysis
/// merely conditions on the no-conflict event, whose frequency the counter
/// measures.
pub fn discretize(scenario: &ByzantineScenario, epsilon: f64, rng: &mut Stream) -> Result<SlotSchedule> {
    scenario.check()?;
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon > 0.5 {
        return Err(Error::invalid(format!("epsilon {epsilon} outside (0, 1/2]")));
    }
    let n = scenario.n();
    let t = ((n * n) as f64 / epsilon).ceil() as usize;
    let mut slots = vec![SlotContent::Dummy; t];
    let mut conflicts = 0u64;
    for red in &scenario.reds {
        let s = slot_of(red.time, t);
        match slots[s] {
            SlotContent::Dummy => slots[s] = SlotContent::Red(red.menu.clone()),
            _ => conflicts += 1,
        }
    }
    for g in 0..scenario.greens.len() {
        loop {
            let s = slot_of(rng.random::<f64>(), t);
            if matches!(slots[s], SlotContent::Dummy) {
                slots[s] = SlotContent::Green(g);
                break;
            }
            conflicts += 1;
        }
    }
    Ok(SlotSchedule { slots, conflicts })
}

/// Everything a priced run over a schedule produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ByzantineTrace {
    /// One step per slot; `step` is the slot index.
    pub trace: Trace,
    /// Slot whose consumption tripped the first-half price cap, if any.
    pub first_break: Option<usize>,
    pub second_break: Option<usize>,
    pub first_half_consumption: Vec<f64>,
    /// Non-null decisions taken on red slots.
    pub red_allocations: u64,
    /// Value collected on green slots only.
    pub green_value: f64,
}

/// Runs the two-half priced allocation over a schedule.
pub fn run_byzantine_pricing(
    scenario: &ByzantineScenario,
    schedule: &SlotSchedule,
    epsilon: f64,
) -> Result<ByzantineTrace> {
    scenario.check()?;
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon > 0.5 {
        return Err(Error::invalid(format!("epsilon {epsilon} outside (0, 1/2]")));
    }
    let m = scenario.m;
    let t_total = schedule.slots.len();
    if t_total == 0 {
        return Err(Error::invalid("schedule has no slots"));
    }
    let lambda_init = epsilon.powi(5) * scenario.opt_hat / (m as f64).powi(4);
    let cap = lambda_init * (m as f64 * scenario.beta / epsilon).powi(8);
    let pace: Vec<f64> =
        scenario.budgets.iter().map(|b| (1.0 - epsilon) * b / t_total as f64).collect();
    let dummy_menu = vec![Decision::null(m)];

    let mut out = ByzantineTrace {
        trace: Trace::new(),
        first_break: None,
        second_break: None,
        first_half_consumption: vec![0.0; m],
        red_allocations: 0,
        green_value: 0.0,
    };
    let halves = [(0, t_total / 2), (t_total / 2, t_total - t_total / 2)];
    for (half, &(start, len)) in halves.iter().enumerate() {
        let mut cum = vec![0.0; m];
        let mut broken = false;
        let mut frozen: Vec<f64> = Vec::new();
        for u in 0..len {
            let slot = start + u;
            let prices: Vec<f64> = if broken {
                frozen.clone()
            } else {
                (0..m)
                    .map(|j| lambda_init * (epsilon * (cum[j] - u as f64 * pace[j])).exp())
                    .collect()
            };
            let menu = match &schedule.slots[slot] {
                SlotContent::Dummy => &dummy_menu,
                SlotContent::Red(menu) => menu,
                SlotContent::Green(g) => &scenario.greens[*g],
            };
            let chosen = if broken { &menu[0] } else { best_response(menu, &prices) };
            for (j, &a) in chosen.consumption.iter().enumerate() {
                cum[j] += a;
            }
            out.trace.total_value += chosen.value;
            match &schedule.slots[slot] {
                SlotContent::Green(_) => out.green_value += chosen.value,
                SlotContent::Red(_) if !chosen.is_null() => out.red_allocations += 1,
                _ => {}
            }
            out.trace.steps.push(TraceStep {
                step: slot,
                prices,
                chosen: chosen.id,
                value: chosen.value,
                consumption: chosen.consumption.clone(),
                cumulative: cum.clone(),
            });
            if !broken {
                let next: Vec<f64> = (0..m)
                    .map(|j| lambda_init * (epsilon * (cum[j] - (u + 1) as f64 * pace[j])).exp())
                    .collect();
                if next.iter().any(|&l| l > cap) {
                    broken = true;
                    frozen = next;
                    let mark = if half == 0 { &mut out.first_break } else { &mut out.second_break };
                    *mark = Some(slot);
                }
            }
        }
        if half == 0 {
            out.first_half_consumption = cum;
        }
    }
    out.trace.stop_time = out.trace.steps.len();
    Ok(out)
}

/// How a benchmark value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BenchmarkMethod {
    BruteForce,
    LpUpperBound,
}

impl std::fmt::Display for BenchmarkMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BenchmarkMethod::BruteForce => write!(f, "brute_force"),
            BenchmarkMethod::LpUpperBound => write!(f, "lp_upper_bound"),
        }
    }
}

/// Offline optimum over the green requests alone: exact by exhaustive search
/// when the decision space is small, otherwise the LP relaxation bound.
pub fn evaluate_green_benchmark(scenario: &ByzantineScenario) -> Result<(f64, BenchmarkMethod)> {
    scenario.check()?;
    if scenario.greens.is_empty() {
        return Ok((0.0, BenchmarkMethod::BruteForce));
    }
    let requests: Vec<RealizedRequest> = scenario
        .greens
        .iter()
        .enumerate()
        .map(|(i, menu)| RealizedRequest { step: i, type_index: 0, menu: menu.clone() })
        .collect();
    match brute_force_offline_opt(&requests, &scenario.budgets) {
        Ok((value, _)) => Ok((value, BenchmarkMethod::BruteForce)),
        Err(Error::SearchSpaceTooLarge { .. }) => {
            let lp = build_sample_lp(&requests, &scenario.budgets)?;
            let sol = solve_packing_lp(&lp)?;
            Ok((sol.objective, BenchmarkMethod::LpUpperBound))
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_from_seed;

    fn take_or_leave(value: f64, consumption: Vec<f64>) -> Vec<Decision> {
        let m = consumption.len();
        vec![Decision::null(m), Decision { id: 1, value, consumption }]
    }

    fn green_scenario(greens: Vec<Vec<Decision>>, budgets: Vec<f64>, opt_hat: f64) -> ByzantineScenario {
        let m = budgets.len();
        ByzantineScenario { m, budgets, greens, reds: Vec::new(), opt_hat, beta: 1.0 }
    }

    #[test]
    fn discretize_single_green() {
        let sc = green_scenario(vec![take_or_leave(1.0, vec![0.5])], vec![10.0], 1.0);
        let mut rng = stream_from_seed(0);
        let mut counts = [0u32; 2];
        for _ in 0..4000 {
            let sched = discretize(&sc, 0.5, &mut rng).unwrap();
            assert_eq!(sched.t(), 2);
            let greens: Vec<usize> = (0..2)
                .filter(|&s| matches!(sched.slots[s], SlotContent::Green(0)))
                .collect();
            assert_eq!(greens.len(), 1);
            counts[greens[0]] += 1;
        }
        for c in counts {
            let freq = c as f64 / 4000.0;
            assert!((freq - 0.5).abs() < 0.05, "slot frequency {freq}");
        }
    }

    #[test]
    fn discretize_keeps_first_red_per_slot() {
        let menu_a = take_or_leave(5.0, vec![1.0]);
        let menu_b = take_or_leave(7.0, vec![1.0]);
        let sc = ByzantineScenario {
            m: 1,
            budgets: vec![4.0],
            greens: Vec::new(),
            reds: vec![
                RedRequest { time: 0.1, menu: menu_a.clone() },
                RedRequest { time: 0.1 + 1e-9, menu: menu_b },
            ],
            opt_hat: 1.0,
            beta: 1.0,
        };
        let mut rng = stream_from_seed(1);
        let sched = discretize(&sc, 0.5, &mut rng).unwrap();
        assert_eq!(sched.t(), 8);
        assert_eq!(sched.slots[0], SlotContent::Red(menu_a));
        assert_eq!(sched.conflicts, 1);
        assert!(sched.slots[1..].iter().all(|s| matches!(s, SlotContent::Dummy)));
    }

    #[test]
    fn conflict_frequency_within_union_bound() {
        let greens: Vec<_> = (0..20).map(|i| take_or_leave(1.0 + i as f64, vec![1.0])).collect();
        let sc = green_scenario(greens, vec![100.0], 10.0);
        let mut rng = stream_from_seed(2);
        let draws = 10_000;
        let mut hits = 0u32;
        for _ in 0..draws {
            let sched = discretize(&sc, 0.2, &mut rng).unwrap();
            assert_eq!(sched.t(), 2000);
            if sched.conflicts > 0 {
                hits += 1;
            }
        }
        let p = hits as f64 / draws as f64;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        // Union bound over pairs: at most n^2/T = 0.2.
        assert!(p <= 0.2 + 3.0 * se, "conflict frequency {p}");
    }

    #[test]
    fn all_dummy_schedule_decays_geometrically() {
        let sc = green_scenario(Vec::new(), vec![8.0], 4.0);
        let sched = SlotSchedule { slots: vec![SlotContent::Dummy; 8], conflicts: 0 };
        let eps = 0.5;
        let out = run_byzantine_pricing(&sc, &sched, eps).unwrap();
        assert_eq!(out.trace.total_value, 0.0);
        assert_eq!(out.trace.steps.len(), 8);
        let lambda_init = eps.powi(5) * 4.0 / 1.0;
        let ratio = (-eps * (1.0 - eps) * 8.0 / 8.0).exp();
        assert_eq!(out.trace.steps[0].prices[0], lambda_init);
        assert_eq!(out.trace.steps[4].prices[0], lambda_init);
        for (i, w) in out.trace.steps.windows(2).enumerate() {
            if i == 3 {
                continue;
            }
            let r = w[1].prices[0] / w[0].prices[0];
            assert!((r - ratio).abs() < 1e-12, "step {i}: ratio {r}");
        }
        assert!(out.first_break.is_none() && out.second_break.is_none());
    }

    #[test]
    fn single_cheap_green_is_served() {
        let sc = green_scenario(vec![take_or_leave(10.0, vec![1.0])], vec![20.0], 3.0);
        let mut slots = vec![SlotContent::Dummy; 6];
        slots[2] = SlotContent::Green(0);
        let sched = SlotSchedule { slots, conflicts: 0 };
        let out = run_byzantine_pricing(&sc, &sched, 0.5).unwrap();
        // lambda_init = 0.5^5 * 3 < 10, and prices only decay before the slot.
        assert_eq!(out.trace.total_value, 10.0);
        assert_eq!(out.green_value, 10.0);
        assert_eq!(out.trace.steps[2].chosen, 1);
    }

    #[test]
    fn restart_begins_exactly_at_lambda_init() {
        // Values above the price cap keep the argmax buying all the way up.
        let greens: Vec<_> = (0..30).map(|_| take_or_leave(1e9, vec![1.0])).collect();
        let sc = green_scenario(greens, vec![56.0], 1e6);
        let mut slots = vec![SlotContent::Dummy; 100];
        for g in 0..30 {
            slots[g] = SlotContent::Green(g);
        }
        let sched = SlotSchedule { slots, conflicts: 0 };
        let eps = 0.5;
        let out = run_byzantine_pricing(&sc, &sched, eps).unwrap();
        let lambda_init = eps.powi(5) * 1e6;
        assert_eq!(out.trace.steps[50].prices[0], lambda_init);
        // The first half was hot enough to trip the cap.
        assert!(out.first_break.is_some());
    }

    #[test]
    fn half_budget_discipline_and_price_cap() {
        // Budget in the intended regime: B >= 20 ln(m beta / eps) / eps^2.
        let eps = 0.5;
        let b = 56.0;
        let greens: Vec<_> = (0..40).map(|_| take_or_leave(1e9, vec![1.0])).collect();
        let sc = green_scenario(greens, vec![b], 1e6);
        let mut slots = vec![SlotContent::Dummy; 120];
        for g in 0..40 {
            slots[g * 2] = SlotContent::Green(g);
        }
        let sched = SlotSchedule { slots, conflicts: 0 };
        let out = run_byzantine_pricing(&sc, &sched, eps).unwrap();
        assert!(out.first_break.is_some());
        assert!(out.first_half_consumption[0] <= b / 2.0 + 1.0);
        let lambda_init = eps.powi(5) * 1e6;
        let cap = lambda_init * (1.0 / eps).powi(8);
        let brk = out.first_break.unwrap();
        for step in &out.trace.steps {
            if step.step <= brk {
                assert!(step.prices[0] <= cap + 1e-9, "price above cap at slot {}", step.step);
            }
            if step.step > brk && step.step < 60 {
                // Frozen half: nothing taken after the break.
                assert_eq!(step.chosen, 0);
            }
        }
    }

    #[test]
    fn losing_reds_do_not_change_the_run() {
        // Reds with zero value and positive consumption never win the argmax
        // at positive prices, so removing them leaves the run untouched.
        let greens: Vec<_> = (0..4).map(|i| take_or_leave(2.0 + i as f64, vec![0.5])).collect();
        let red_menu = vec![Decision::null(1), Decision { id: 1, value: 0.0, consumption: vec![1.0] }];
        let mut slots = vec![SlotContent::Dummy; 12];
        for g in 0..4 {
            slots[g * 2 + 1] = SlotContent::Green(g);
        }
        slots[0] = SlotContent::Red(red_menu);
        let with_red = SlotSchedule { slots: slots.clone(), conflicts: 0 };
        slots[0] = SlotContent::Dummy;
        let without_red = SlotSchedule { slots, conflicts: 0 };
        let sc = green_scenario(greens, vec![30.0], 10.0);
        let a = run_byzantine_pricing(&sc, &with_red, 0.25).unwrap();
        let b = run_byzantine_pricing(&sc, &without_red, 0.25).unwrap();
        assert_eq!(a.red_allocations, 0);
        assert_eq!(a.trace.total_value, b.trace.total_value);
        assert_eq!(a.green_value, b.green_value);
        for (x, y) in a.trace.steps.iter().zip(&b.trace.steps) {
            assert_eq!(x.chosen, y.chosen);
        }
    }

    #[test]
    fn random_order_ratio_in_theorem_regime() {
        // n_R = 0, budgets sized so the cap never binds; the run should
        // collect nearly the whole green optimum.
        let eps = 0.25;
        let values = [3.0, 1.0, 2.0, 4.0, 1.5, 2.5];
        let greens: Vec<_> = values.iter().map(|&v| take_or_leave(v, vec![1.0])).collect();
        let mut sc = green_scenario(greens, vec![444.0], 0.0);
        let (bench, method) = evaluate_green_benchmark(&sc).unwrap();
        assert_eq!(method, BenchmarkMethod::BruteForce);
        assert_eq!(bench, values.iter().sum::<f64>());
        sc.opt_hat = bench;
        let mut rng = stream_from_seed(3);
        let mut total = 0.0;
        let seeds = 200;
        for _ in 0..seeds {
            let sched = discretize(&sc, eps, &mut rng).unwrap();
            let out = run_byzantine_pricing(&sc, &sched, eps).unwrap();
            total += out.trace.total_value;
        }
        let ratio = total / seeds as f64 / bench;
        assert!(ratio >= 1.0 - 4.0 * eps, "ratio {ratio}");
    }

    #[test]
    fn green_benchmark_no_greens_is_zero() {
        let sc = green_scenario(Vec::new(), vec![5.0], 0.0);
        let (v, method) = evaluate_green_benchmark(&sc).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(method, BenchmarkMethod::BruteForce);
    }

    #[test]
    fn lp_benchmark_dominates_brute_force() {
        let mut rng = stream_from_seed(4);
        for trial in 0..20 {
            let n = 2 + (trial % 4);
            let greens: Vec<_> = (0..n)
                .map(|_| {
                    take_or_leave(rng.random_range(0.5..4.0), vec![rng.random_range(0.1..1.0)])
                })
                .collect();
            let sc = green_scenario(greens.clone(), vec![1.5], 1.0);
            let (brute, _) = evaluate_green_benchmark(&sc).unwrap();
            let requests: Vec<RealizedRequest> = greens
                .iter()
                .enumerate()
                .map(|(i, menu)| RealizedRequest { step: i, type_index: 0, menu: menu.clone() })
                .collect();
            let lp = build_sample_lp(&requests, &sc.budgets).unwrap();
            let sol = solve_packing_lp(&lp).unwrap();
            assert!(sol.objective >= brute - 1e-9, "lp {} < brute {brute}", sol.objective);
        }
    }
}
