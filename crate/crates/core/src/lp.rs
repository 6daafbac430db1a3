//! Packing LPs over request menus and a deterministic solver for them.
//!
//! Two LP shapes share one representation:
//!
//! - configuration LP: one variable per (step, type, decision), resource rows
//!   `sum a * x <= budget_scale * B_j`, and a cap row per (step, type) with
//!   right-hand side equal to the type probability. Its optimum upper-bounds
//!   the expected offline optimum.
//! - sample LP: one variable per (request, decision) over a realized
//!   sequence, resource rows against explicit budgets, and a cap row of 1 per
//!   request.
//!
//! All data is nonnegative with positive right-hand sides, so the origin is
//! feasible and no phase-1 is needed. The solver is a revised simplex with a
//! dense basis inverse, explicit variable upper bounds, and Bland's
//! anti-cycling rule for both the entering and leaving choice; identical LPs
//! solve to bitwise-identical solutions. Zero-cost columns are fixed at zero
//! (they cannot help a packing objective) and rows whose remaining support is
//! a single variable are folded into that variable's upper bound, which keeps
//! the basis small on single-decision menus.

use crate::domain::{Instance, RealizedRequest};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Exhaustive search refuses above this many decision tuples.
pub const BRUTE_FORCE_GUARD: f64 = 1e7;
/// Simplex gives up after `50 * (rows + cols)` iterations.
const ITER_CAP_FACTOR: usize = 50;
/// Reduced costs within this of zero count as optimal.
const EPS_RC: f64 = 1e-9;
/// Minimum acceptable pivot magnitude in the ratio test.
const EPS_PIV: f64 = 1e-9;
/// Allowed row and bound violation in returned solutions.
const EPS_FEAS: f64 = 1e-9;
/// Basis inverse is rebuilt from scratch this often, to bound drift.
const REFACTOR_EVERY: usize = 256;

/// Identifies an LP variable back in problem terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKey {
    /// Configuration LP: mass on (step, type, decision).
    Config { step: usize, type_index: usize, decision: usize },
    /// Sample LP: mass on (request position, decision).
    Sample { index: usize, decision: usize },
}

impl VarKey {
    pub fn step(&self) -> usize {
        match *self {
            VarKey::Config { step, .. } => step,
            VarKey::Sample { index, .. } => index,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowLabel {
    Resource(usize),
    TypeCap { step: usize, type_index: usize },
    RequestCap(usize),
}

impl std::fmt::Display for RowLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            RowLabel::Resource(j) => write!(f, "resource {j}"),
            RowLabel::TypeCap { step, type_index } => write!(f, "cap step {step} type {type_index}"),
            RowLabel::RequestCap(i) => write!(f, "cap request {i}"),
        }
    }
}

/// One `<=` row with sparse nonnegative coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpRow {
    pub label: RowLabel,
    /// (variable index, coefficient) pairs; zero coefficients are omitted.
    pub coefs: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// `max c.x  s.t.  R x <= rhs per row,  0 <= x <= upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingLp {
    /// Steps (or sample positions) the variables range over.
    pub n_steps: usize,
    pub m: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub upper: Vec<f64>,
    pub variables: Vec<VarKey>,
}

impl PackingLp {
    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn var_index(&self, key: &VarKey) -> Option<usize> {
        self.variables.iter().position(|k| k == key)
    }

    fn check(&self) -> Result<()> {
        if self.objective.len() != self.variables.len() || self.objective.len() != self.upper.len() {
            return Err(Error::Malformed("LP vector lengths disagree".into()));
        }
        for (v, &c) in self.objective.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::Malformed(format!("objective[{v}] = {c} invalid")));
            }
        }
        for (v, &u) in self.upper.iter().enumerate() {
            if !u.is_finite() || u <= 0.0 {
                return Err(Error::Malformed(format!("upper[{v}] = {u} invalid")));
            }
        }
        for row in &self.rows {
            if !row.rhs.is_finite() || row.rhs <= 0.0 {
                return Err(Error::Malformed(format!("row {} rhs {} invalid", row.label, row.rhs)));
            }
            for &(v, c) in &row.coefs {
                if v >= self.n_vars() || !c.is_finite() || c < 0.0 {
                    return Err(Error::Malformed(format!("row {} entry ({v}, {c}) invalid", row.label)));
                }
            }
        }
        Ok(())
    }

    /// Plain-text dump: objective line, one line per row, bounds line.
    pub fn dump_text(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let term = |v: usize, c: f64| format!("{c}*x{v}");
        let _ = writeln!(s, "packing_lp vars={} rows={}", self.n_vars(), self.rows.len());
        let obj: Vec<String> = self
            .objective
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c != 0.0)
            .map(|(v, &c)| term(v, c))
            .collect();
        let _ = writeln!(s, "maximize: {}", if obj.is_empty() { "0".into() } else { obj.join(" + ") });
        for row in &self.rows {
            let lhs: Vec<String> = row.coefs.iter().map(|&(v, c)| term(v, c)).collect();
            let _ = writeln!(
                s,
                "{}: {} <= {}",
                row.label,
                if lhs.is_empty() { "0".into() } else { lhs.join(" + ") },
                row.rhs
            );
        }
        for (v, &u) in self.upper.iter().enumerate() {
            let _ = writeln!(s, "bound: 0 <= x{v} <= {u}");
        }
        s
    }
}

/// A feasible (within `1e-9`) solution with its objective value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalSolution {
    /// Mass per variable index, in `[0, upper]`.
    pub mass: Vec<f64>,
    pub objective: f64,
}

/// Expected-consumption LP over all (step, type, decision) triples with
/// budgets scaled by `budget_scale` in `(0, 1]`.
pub fn build_configuration_lp(inst: &Instance, budget_scale: f64) -> Result<PackingLp> {
    if !budget_scale.is_finite() || budget_scale <= 0.0 || budget_scale > 1.0 {
        return Err(Error::invalid(format!("budget_scale {budget_scale} outside (0,1]")));
    }
    let n = inst.n();
    let m = inst.m;
    let mut objective = Vec::new();
    let mut upper = Vec::new();
    let mut variables = Vec::new();
    let mut resource_rows: Vec<LpRow> = (0..m)
        .map(|j| LpRow { label: RowLabel::Resource(j), coefs: Vec::new(), rhs: budget_scale * inst.budgets[j] })
        .collect();
    let mut cap_rows = Vec::new();
    for (i, dist) in inst.distributions.iter().enumerate() {
        for (k, t) in dist.types.iter().enumerate() {
            let mut cap = LpRow {
                label: RowLabel::TypeCap { step: i, type_index: k },
                coefs: Vec::new(),
                rhs: t.probability,
            };
            for d in &t.decisions {
                let v = objective.len();
                objective.push(d.value);
                upper.push(1.0);
                variables.push(VarKey::Config { step: i, type_index: k, decision: d.id });
                cap.coefs.push((v, 1.0));
                for (j, &a) in d.consumption.iter().enumerate() {
                    if a > 0.0 {
                        resource_rows[j].coefs.push((v, a));
                    }
                }
            }
            cap_rows.push(cap);
        }
    }
    let mut rows = resource_rows;
    rows.append(&mut cap_rows);
    let lp = PackingLp { n_steps: n, m, objective, rows, upper, variables };
    lp.check()?;
    Ok(lp)
}

/// Per-realization LP over an arrived sequence: each request contributes its
/// menu as variables, capped at total mass 1, against the given budgets.
pub fn build_sample_lp(requests: &[RealizedRequest], budgets: &[f64]) -> Result<PackingLp> {
    if requests.is_empty() {
        return Err(Error::invalid("sample LP needs at least one request"));
    }
    let m = budgets.len();
    for (j, &b) in budgets.iter().enumerate() {
        if !b.is_finite() || b <= 0.0 {
            return Err(Error::invalid(format!("budget[{j}] = {b} must be positive")));
        }
    }
    let mut objective = Vec::new();
    let mut upper = Vec::new();
    let mut variables = Vec::new();
    let mut resource_rows: Vec<LpRow> = (0..m)
        .map(|j| LpRow { label: RowLabel::Resource(j), coefs: Vec::new(), rhs: budgets[j] })
        .collect();
    let mut cap_rows = Vec::new();
    for (pos, req) in requests.iter().enumerate() {
        let mut cap = LpRow { label: RowLabel::RequestCap(pos), coefs: Vec::new(), rhs: 1.0 };
        for d in &req.menu {
            if d.consumption.len() != m {
                return Err(Error::invalid(format!(
                    "request {pos} decision {} has {} consumption entries, expected {m}",
                    d.id,
                    d.consumption.len()
                )));
            }
            let v = objective.len();
            objective.push(d.value);
            upper.push(1.0);
            variables.push(VarKey::Sample { index: pos, decision: d.id });
            cap.coefs.push((v, 1.0));
            for (j, &a) in d.consumption.iter().enumerate() {
                if a > 0.0 {
                    resource_rows[j].coefs.push((v, a));
                }
            }
        }
        cap_rows.push(cap);
    }
    let mut rows = resource_rows;
    rows.append(&mut cap_rows);
    let lp = PackingLp { n_steps: requests.len(), m, objective, rows, upper, variables };
    lp.check()?;
    Ok(lp)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum VarPos {
    Lower,
    Upper,
    Basic(usize),
}

/// Solves the LP to optimality. Deterministic: a fixed pivot rule and fixed
/// scan orders mean identical inputs produce bitwise-identical outputs.
pub fn solve_packing_lp(lp: &PackingLp) -> Result<FractionalSolution> {
    lp.check()?;
    let nv = lp.n_vars();

    // Zero-cost columns cannot increase a packing objective; pin them to 0.
    let fixed: Vec<bool> = lp.objective.iter().map(|&c| c == 0.0).collect();
    let mut ub: Vec<f64> = lp.upper.clone();

    // Rows with singleton support after pinning become variable bounds.
    let mut active: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for row in &lp.rows {
        let support: Vec<(usize, f64)> = row
            .coefs
            .iter()
            .filter(|&&(v, c)| !fixed[v] && c > 0.0)
            .copied()
            .collect();
        match support.len() {
            0 => {}
            1 => {
                let (v, c) = support[0];
                ub[v] = ub[v].min(row.rhs / c);
            }
            _ => active.push((support, row.rhs)),
        }
    }
    let r = active.len();

    let mut x = vec![0.0; nv];
    if r == 0 {
        for v in 0..nv {
            if !fixed[v] && lp.objective[v] > 0.0 {
                x[v] = ub[v];
            }
        }
        return extract(lp, x);
    }

    // Sparse columns over active rows.
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nv];
    let mut rhs = vec![0.0; r];
    for (i, (support, b)) in active.iter().enumerate() {
        rhs[i] = *b;
        for &(v, c) in support {
            cols[v].push((i, c));
        }
    }

    let cost = |col: usize| if col < nv { lp.objective[col] } else { 0.0 };
    let upper_of = |col: usize, ub: &[f64]| if col < nv { ub[col] } else { f64::INFINITY };

    let mut pos: Vec<VarPos> = vec![VarPos::Lower; nv + r];
    let mut basis: Vec<usize> = (0..r).map(|i| nv + i).collect();
    for (i, &b) in basis.iter().enumerate() {
        pos[b] = VarPos::Basic(i);
    }
    let mut xb = rhs.clone();
    let mut binv = vec![0.0; r * r];
    for i in 0..r {
        binv[i * r + i] = 1.0;
    }

    let iter_cap = ITER_CAP_FACTOR * (lp.rows.len() + lp.n_vars());
    let mut pivots_since_refactor = 0usize;

    // t = B^{-1} A_col for the entering column.
    let ftran = |col: usize, binv: &[f64], cols: &[Vec<(usize, f64)>]| -> Vec<f64> {
        let mut t = vec![0.0; r];
        if col < nv {
            for &(ri, c) in &cols[col] {
                for i in 0..r {
                    t[i] += binv[i * r + ri] * c;
                }
            }
        } else {
            let s = col - nv;
            for i in 0..r {
                t[i] = binv[i * r + s];
            }
        }
        t
    };

    let mut iterations = 0usize;
    loop {
        iterations += 1;
        if iterations > iter_cap {
            return Err(Error::NumericalFailure(format!(
                "simplex exceeded iteration cap {iter_cap}"
            )));
        }

        // Pricing: y = c_B B^{-1}.
        let mut y = vec![0.0; r];
        for i in 0..r {
            let cb = cost(basis[i]);
            if cb != 0.0 {
                for k in 0..r {
                    y[k] += cb * binv[i * r + k];
                }
            }
        }

        // Bland entering rule: the lowest-index improving column.
        let mut entering: Option<(usize, f64)> = None; // (col, direction)
        for col in 0..nv + r {
            match pos[col] {
                VarPos::Basic(_) => continue,
                VarPos::Lower if col < nv && fixed[col] => continue,
                state => {
                    let ya = if col < nv {
                        cols[col].iter().map(|&(ri, c)| y[ri] * c).sum::<f64>()
                    } else {
                        y[col - nv]
                    };
                    let d = cost(col) - ya;
                    let dir = match state {
                        VarPos::Lower if d > EPS_RC => 1.0,
                        VarPos::Upper if d < -EPS_RC => -1.0,
                        _ => continue,
                    };
                    entering = Some((col, dir));
                    break;
                }
            }
        }
        let Some((col, dir)) = entering else {
            break; // optimal
        };

        let t = ftran(col, &binv, &cols);

        // Ratio test with bound flips. Candidates carry the index of the
        // variable that would leave, for Bland's smallest-index tie-break.
        let mut best_delta = upper_of(col, &ub);
        let mut best_var = col;
        let mut leave: Option<(usize, bool)> = None; // (row, leaving var goes to upper)
        let consider = |d: f64, var: usize, who: Option<(usize, bool)>,
                            best_delta: &mut f64, best_var: &mut usize,
                            leave: &mut Option<(usize, bool)>| {
            let take = if !best_delta.is_finite() {
                d.is_finite()
            } else {
                let window = 1e-12 * (1.0 + best_delta.abs());
                if d < *best_delta - window {
                    true
                } else {
                    (d - *best_delta).abs() <= window && var < *best_var
                }
            };
            if take {
                *best_delta = d;
                *best_var = var;
                *leave = who;
            }
        };
        for i in 0..r {
            let rate = dir * t[i];
            if rate > EPS_PIV {
                let d = xb[i].max(0.0) / rate;
                consider(d, basis[i], Some((i, false)), &mut best_delta, &mut best_var, &mut leave);
            } else if rate < -EPS_PIV {
                let cap = upper_of(basis[i], &ub);
                if cap.is_finite() {
                    let d = (cap - xb[i]).max(0.0) / (-rate);
                    consider(d, basis[i], Some((i, true)), &mut best_delta, &mut best_var, &mut leave);
                }
            }
        }
        if best_delta.is_infinite() {
            return Err(Error::NumericalFailure("unbounded direction in packing LP".into()));
        }

        for i in 0..r {
            xb[i] -= best_delta * dir * t[i];
        }

        match leave {
            None => {
                // The entering variable ran to its other bound.
                pos[col] = if dir > 0.0 { VarPos::Upper } else { VarPos::Lower };
            }
            Some((li, to_upper)) => {
                let entering_val = match pos[col] {
                    VarPos::Lower => best_delta,
                    VarPos::Upper => ub[col] - best_delta,
                    VarPos::Basic(_) => unreachable!(),
                };
                let lv = basis[li];
                pos[lv] = if to_upper { VarPos::Upper } else { VarPos::Lower };
                basis[li] = col;
                pos[col] = VarPos::Basic(li);
                xb[li] = entering_val;

                // Product-form update of the dense basis inverse.
                let piv = t[li];
                let inv = 1.0 / piv;
                for k in 0..r {
                    binv[li * r + k] *= inv;
                }
                for i in 0..r {
                    if i != li {
                        let f = t[i];
                        if f != 0.0 {
                            for k in 0..r {
                                binv[i * r + k] -= f * binv[li * r + k];
                            }
                        }
                    }
                }

                pivots_since_refactor += 1;
                if pivots_since_refactor >= REFACTOR_EVERY {
                    pivots_since_refactor = 0;
                    refactor(r, nv, &basis, &cols, &mut binv)?;
                    recompute_basics(r, nv, &basis, &cols, &rhs, &ub, &pos, &binv, &mut xb);
                }
            }
        }
    }

    for v in 0..nv {
        x[v] = match pos[v] {
            VarPos::Lower => 0.0,
            VarPos::Upper => ub[v],
            VarPos::Basic(i) => xb[i],
        };
    }
    extract(lp, x)
}

/// Rebuilds the basis inverse by Gauss-Jordan elimination with partial
/// pivoting.
fn refactor(r: usize, nv: usize, basis: &[usize], cols: &[Vec<(usize, f64)>], binv: &mut [f64]) -> Result<()> {
    let mut a = vec![0.0; r * r];
    for (bi, &col) in basis.iter().enumerate() {
        if col < nv {
            for &(ri, c) in &cols[col] {
                a[ri * r + bi] = c;
            }
        } else {
            a[(col - nv) * r + bi] = 1.0;
        }
    }
    for e in binv.iter_mut() {
        *e = 0.0;
    }
    for i in 0..r {
        binv[i * r + i] = 1.0;
    }
    for c in 0..r {
        let mut piv_row = c;
        let mut piv_val = a[c * r + c].abs();
        for i in c + 1..r {
            let v = a[i * r + c].abs();
            if v > piv_val {
                piv_row = i;
                piv_val = v;
            }
        }
        if piv_val < 1e-12 {
            return Err(Error::NumericalFailure("singular basis during refactorization".into()));
        }
        if piv_row != c {
            for k in 0..r {
                a.swap(c * r + k, piv_row * r + k);
                binv.swap(c * r + k, piv_row * r + k);
            }
        }
        let inv = 1.0 / a[c * r + c];
        for k in 0..r {
            a[c * r + k] *= inv;
            binv[c * r + k] *= inv;
        }
        for i in 0..r {
            if i != c {
                let f = a[i * r + c];
                if f != 0.0 {
                    for k in 0..r {
                        a[i * r + k] -= f * a[c * r + k];
                        binv[i * r + k] -= f * binv[c * r + k];
                    }
                }
            }
        }
    }
    Ok(())
}

/// Resynchronizes basic values: `x_B = B^{-1}(rhs - A_N x_N)` where nonbasic
/// structurals sit at 0 or their upper bound.
#[allow(clippy::too_many_arguments)]
fn recompute_basics(
    r: usize,
    nv: usize,
    _basis: &[usize],
    cols: &[Vec<(usize, f64)>],
    rhs: &[f64],
    ub: &[f64],
    pos: &[VarPos],
    binv: &[f64],
    xb: &mut [f64],
) {
    let mut eff = rhs.to_vec();
    for v in 0..nv {
        if pos[v] == VarPos::Upper {
            for &(ri, c) in &cols[v] {
                eff[ri] -= c * ub[v];
            }
        }
    }
    for i in 0..r {
        let mut s = 0.0;
        for k in 0..r {
            s += binv[i * r + k] * eff[k];
        }
        xb[i] = s;
    }
}

/// Clamps into bounds, re-derives the objective, and verifies every original
/// row within `1e-9`.
fn extract(lp: &PackingLp, mut x: Vec<f64>) -> Result<FractionalSolution> {
    for (v, xv) in x.iter_mut().enumerate() {
        if *xv < -1e-7 || *xv > lp.upper[v] + 1e-7 {
            return Err(Error::NumericalFailure(format!(
                "variable {v} = {xv} strays outside [0, {}]",
                lp.upper[v]
            )));
        }
        *xv = xv.clamp(0.0, lp.upper[v]);
    }
    for row in &lp.rows {
        let activity: f64 = row.coefs.iter().map(|&(v, c)| c * x[v]).sum();
        if activity > row.rhs + EPS_FEAS {
            return Err(Error::NumericalFailure(format!(
                "row {} violated: {activity} > {}",
                row.label, row.rhs
            )));
        }
    }
    let objective = lp.objective.iter().zip(&x).map(|(c, xv)| c * xv).sum();
    Ok(FractionalSolution { mass: x, objective })
}

/// Per-step expected consumption of a solution: entry `(i, j)` sums
/// `a_j * mass` over the step's variables. Cap rows keep every entry in
/// `[0, 1]`.
pub fn solution_consumption(lp: &PackingLp, sol: &FractionalSolution) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; lp.m]; lp.n_steps];
    for row in &lp.rows {
        if let RowLabel::Resource(j) = row.label {
            for &(v, c) in &row.coefs {
                let i = lp.variables[v].step();
                out[i][j] += c * sol.mass[v];
            }
        }
    }
    for row in &mut out {
        for e in row.iter_mut() {
            *e = e.clamp(0.0, 1.0);
        }
    }
    out
}

/// Exact integer offline optimum by exhaustive search over decision tuples,
/// ties broken toward the lexicographically smallest tuple. Refuses when the
/// tuple count exceeds [`BRUTE_FORCE_GUARD`].
pub fn brute_force_offline_opt(requests: &[RealizedRequest], budgets: &[f64]) -> Result<(f64, Vec<usize>)> {
    let size: f64 = requests.iter().map(|r| r.menu.len() as f64).product();
    if size > BRUTE_FORCE_GUARD {
        return Err(Error::SearchSpaceTooLarge { size, guard: BRUTE_FORCE_GUARD });
    }
    let n = requests.len();
    // Suffix value bounds let the search cut branches that cannot win.
    let mut suffix_max = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix_max[i] = suffix_max[i + 1] + requests[i].max_value();
    }
    let mut best_value = f64::NEG_INFINITY;
    let mut best_choice = vec![0; n];
    let mut choice = vec![0; n];
    let mut cum = vec![0.0; budgets.len()];
    fn dfs(
        i: usize,
        value: f64,
        requests: &[RealizedRequest],
        budgets: &[f64],
        suffix_max: &[f64],
        cum: &mut Vec<f64>,
        choice: &mut Vec<usize>,
        best_value: &mut f64,
        best_choice: &mut Vec<usize>,
    ) {
        if value + suffix_max[i] <= *best_value {
            return;
        }
        if i == requests.len() {
            if value > *best_value {
                *best_value = value;
                best_choice.copy_from_slice(choice);
            }
            return;
        }
        'menu: for d in &requests[i].menu {
            for (j, &a) in d.consumption.iter().enumerate() {
                if cum[j] + a > budgets[j] + EPS_FEAS {
                    continue 'menu;
                }
            }
            for (j, &a) in d.consumption.iter().enumerate() {
                cum[j] += a;
            }
            choice[i] = d.id;
            dfs(i + 1, value + d.value, requests, budgets, suffix_max, cum, choice, best_value, best_choice);
            for (j, &a) in d.consumption.iter().enumerate() {
                cum[j] -= a;
            }
        }
        choice[i] = 0;
    }
    dfs(0, 0.0, requests, budgets, &suffix_max, &mut cum, &mut choice, &mut best_value, &mut best_choice);
    Ok((best_value, best_choice))
}

/// Objective of the configuration LP at full budgets; an upper bound on the
/// expected offline optimum.
pub fn lp_upper_bound(inst: &Instance) -> Result<f64> {
    let lp = build_configuration_lp(inst, 1.0)?;
    Ok(solve_packing_lp(&lp)?.objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Decision, Instance, RequestDistribution, RequestType};
    use crate::rng::stream_from_seed;
    use rand::Rng;

    fn take_or_leave(value: f64, consumption: Vec<f64>) -> Vec<Decision> {
        let m = consumption.len();
        vec![Decision::null(m), Decision { id: 1, value, consumption }]
    }

    fn request(step: usize, menu: Vec<Decision>) -> RealizedRequest {
        RealizedRequest { step, type_index: 0, menu }
    }

    fn single_type_instance(menus: Vec<Vec<Decision>>, budgets: Vec<f64>) -> Instance {
        let m = budgets.len();
        let _ = m;
        Instance::new(
            budgets.len(),
            budgets,
            menus
                .into_iter()
                .map(|menu| {
                    RequestDistribution::new(vec![RequestType::new(1.0, menu).unwrap()]).unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn configuration_lp_shape() {
        let inst = single_type_instance(vec![take_or_leave(1.0, vec![0.5, 0.0])], vec![2.0, 3.0]);
        let lp = build_configuration_lp(&inst, 1.0).unwrap();
        assert_eq!(lp.n_vars(), 2);
        assert_eq!(lp.rows.len(), 3); // m resource rows + one cap row
        assert_eq!(lp.rows[0].rhs, 2.0);
        assert_eq!(lp.rows[2].rhs, 1.0);
    }

    #[test]
    fn configuration_lp_applies_budget_scale() {
        let inst = single_type_instance(vec![take_or_leave(1.0, vec![1.0])], vec![2.0]);
        let lp = build_configuration_lp(&inst, 0.5).unwrap();
        assert_eq!(lp.rows[0].rhs, 1.0);
        assert!(build_configuration_lp(&inst, 0.0).is_err());
        assert!(build_configuration_lp(&inst, 1.5).is_err());
    }

    #[test]
    fn configuration_lp_cap_rows_carry_probabilities() {
        let dist = RequestDistribution::new(vec![
            RequestType::new(0.3, take_or_leave(1.0, vec![1.0])).unwrap(),
            RequestType::new(0.7, take_or_leave(2.0, vec![1.0])).unwrap(),
        ])
        .unwrap();
        let inst = Instance::new(1, vec![1.0], vec![dist]).unwrap();
        let lp = build_configuration_lp(&inst, 1.0).unwrap();
        let caps: Vec<f64> = lp
            .rows
            .iter()
            .filter(|r| matches!(r.label, RowLabel::TypeCap { .. }))
            .map(|r| r.rhs)
            .collect();
        assert_eq!(caps, vec![0.3, 0.7]);
    }

    #[test]
    fn sample_lp_shape_and_small_budget() {
        let reqs = vec![request(0, take_or_leave(1.0, vec![1.0]))];
        let lp = build_sample_lp(&reqs, &[0.5]).unwrap();
        assert_eq!(lp.n_vars(), 2);
        let sol = solve_packing_lp(&lp).unwrap();
        assert!((sol.objective - 0.5).abs() < 1e-9);
        let d1 = lp.var_index(&VarKey::Sample { index: 0, decision: 1 }).unwrap();
        assert!((sol.mass[d1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn sample_lp_three_requests_budget_two() {
        let reqs = vec![
            request(0, take_or_leave(3.0, vec![1.0])),
            request(1, take_or_leave(2.0, vec![1.0])),
            request(2, take_or_leave(1.0, vec![1.0])),
        ];
        let lp = build_sample_lp(&reqs, &[2.0]).unwrap();
        let sol = solve_packing_lp(&lp).unwrap();
        // Take the two most valuable requests outright: 3 + 2.
        assert!((sol.objective - 5.0).abs() < 1e-9);
    }

    #[test]
    fn solve_single_variable_lp() {
        let reqs = vec![request(0, take_or_leave(1.0, vec![1.0]))];
        let lp = build_sample_lp(&reqs, &[1.0]).unwrap();
        let sol = solve_packing_lp(&lp).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-9);
        let d1 = lp.var_index(&VarKey::Sample { index: 0, decision: 1 }).unwrap();
        assert!((sol.mass[d1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn solve_two_requests_one_unit_budget() {
        let reqs = vec![
            request(0, take_or_leave(1.0, vec![1.0])),
            request(1, take_or_leave(1.0, vec![1.0])),
        ];
        let lp = build_sample_lp(&reqs, &[1.0]).unwrap();
        let sol = solve_packing_lp(&lp).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn solve_fractional_split_vertex() {
        // max 3a + 2b + 2c  s.t. a+c<=1, b+c<=1, a+b<=1 has optimum 3.5 at
        // a=b=c=1/2 (dual certificate y=(1.5,0.5,1.5)).
        let reqs = vec![
            request(
                0,
                vec![
                    Decision::null(2),
                    Decision { id: 1, value: 3.0, consumption: vec![1.0, 0.0] },
                    Decision { id: 2, value: 2.0, consumption: vec![0.0, 1.0] },
                ],
            ),
            request(1, take_or_leave(2.0, vec![1.0, 1.0])),
        ];
        let lp = build_sample_lp(&reqs, &[1.0, 1.0]).unwrap();
        let sol = solve_packing_lp(&lp).unwrap();
        assert!((sol.objective - 3.5).abs() < 1e-9, "objective {}", sol.objective);
    }

    #[test]
    fn solve_with_singleton_rows_folded_into_bounds() {
        let reqs = vec![
            request(0, take_or_leave(2.0, vec![1.0])),
            request(1, take_or_leave(1.0, vec![1.0])),
        ];
        let lp = build_sample_lp(&reqs, &[1.5]).unwrap();
        let sol = solve_packing_lp(&lp).unwrap();
        assert!((sol.objective - 2.5).abs() < 1e-9);
    }

    #[test]
    fn zero_value_lp_solves_to_origin() {
        let reqs = vec![request(0, take_or_leave(0.0, vec![1.0]))];
        let lp = build_sample_lp(&reqs, &[1.0]).unwrap();
        let sol = solve_packing_lp(&lp).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert!(sol.mass.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn consumption_of_zero_solution_is_zero() {
        let reqs = vec![request(0, take_or_leave(0.0, vec![0.7]))];
        let lp = build_sample_lp(&reqs, &[1.0]).unwrap();
        let sol = solve_packing_lp(&lp).unwrap();
        let cons = solution_consumption(&lp, &sol);
        assert_eq!(cons, vec![vec![0.0]]);
    }

    #[test]
    fn consumption_reads_back_full_take() {
        let reqs = vec![request(0, take_or_leave(1.0, vec![0.4, 0.6]))];
        let lp = build_sample_lp(&reqs, &[1.0, 1.0]).unwrap();
        let sol = solve_packing_lp(&lp).unwrap();
        let cons = solution_consumption(&lp, &sol);
        assert!((cons[0][0] - 0.4).abs() < 1e-9);
        assert!((cons[0][1] - 0.6).abs() < 1e-9);
    }

    #[test]
    fn consumption_mixes_type_masses() {
        let dist = RequestDistribution::new(vec![
            RequestType::new(0.5, take_or_leave(1.0, vec![0.8])).unwrap(),
            RequestType::new(0.5, take_or_leave(1.0, vec![0.4])).unwrap(),
        ])
        .unwrap();
        let inst = Instance::new(1, vec![10.0], vec![dist]).unwrap();
        let lp = build_configuration_lp(&inst, 1.0).unwrap();
        let sol = solve_packing_lp(&lp).unwrap();
        let cons = solution_consumption(&lp, &sol);
        // Half mass on each type: 0.5*0.8 + 0.5*0.4.
        assert!((cons[0][0] - 0.6).abs() < 1e-9);
    }

    #[test]
    fn brute_force_single_request() {
        let reqs = vec![request(0, take_or_leave(5.0, vec![1.0]))];
        let (v, choice) = brute_force_offline_opt(&reqs, &[1.0]).unwrap();
        assert_eq!(v, 5.0);
        assert_eq!(choice, vec![1]);
    }

    #[test]
    fn brute_force_respects_budget_and_ties() {
        let reqs = vec![
            request(0, take_or_leave(3.0, vec![1.0])),
            request(1, take_or_leave(3.0, vec![1.0])),
        ];
        let (v, choice) = brute_force_offline_opt(&reqs, &[1.0]).unwrap();
        assert_eq!(v, 3.0);
        // Lexicographically smallest optimal tuple: the null decision has
        // the smaller id, so serving only the second request wins the tie.
        assert_eq!(choice, vec![0, 1]);
    }

    #[test]
    fn brute_force_guard_trips() {
        let menu = vec![
            Decision::null(1),
            Decision { id: 1, value: 1.0, consumption: vec![0.0] },
            Decision { id: 2, value: 2.0, consumption: vec![0.0] },
        ];
        let reqs: Vec<RealizedRequest> = (0..16).map(|i| request(i, menu.clone())).collect();
        // 3^16 > 1e7.
        assert!(matches!(
            brute_force_offline_opt(&reqs, &[1.0]),
            Err(Error::SearchSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn upper_bound_matches_deterministic_sample_lp() {
        let inst = single_type_instance(
            vec![
                take_or_leave(3.0, vec![1.0]),
                take_or_leave(2.0, vec![1.0]),
                take_or_leave(1.0, vec![1.0]),
            ],
            vec![2.0],
        );
        let ub = lp_upper_bound(&inst).unwrap();
        let reqs = crate::domain::realize_instance(&inst, 0);
        let lp = build_sample_lp(&reqs, &inst.budgets).unwrap();
        let sol = solve_packing_lp(&lp).unwrap();
        assert!((ub - sol.objective).abs() < 1e-9);
        assert!((ub - 5.0).abs() < 1e-9);
    }

    #[test]
    fn upper_bound_zero_for_zero_values() {
        let inst = single_type_instance(vec![take_or_leave(0.0, vec![1.0])], vec![1.0]);
        assert_eq!(lp_upper_bound(&inst).unwrap(), 0.0);
    }

    fn random_tiny_instance(seed: u64) -> Instance {
        let mut rng = stream_from_seed(seed);
        let m = 1 + rng.random_range(0..2usize);
        let n = 2 + rng.random_range(0..3usize);
        let budgets: Vec<f64> = (0..m).map(|_| 1.0 + rng.random_range(0..3) as f64).collect();
        let dists = (0..n)
            .map(|_| {
                let k = 1 + rng.random_range(0..2usize);
                let probs: Vec<f64> = if k == 1 { vec![1.0] } else { vec![0.5, 0.5] };
                let types = probs
                    .into_iter()
                    .map(|p| {
                        let extra = 1 + rng.random_range(0..2usize);
                        let mut menu = vec![Decision::null(m)];
                        for d in 0..extra {
                            let cons: Vec<f64> =
                                (0..m).map(|_| rng.random_range(0..2) as f64).collect();
                            menu.push(Decision {
                                id: d + 1,
                                value: rng.random_range(0..6) as f64,
                                consumption: cons,
                            });
                        }
                        RequestType::new(p, menu).unwrap()
                    })
                    .collect();
                RequestDistribution::new(types).unwrap()
            })
            .collect();
        Instance::new(m, budgets, dists).unwrap()
    }

    #[test]
    fn upper_bound_dominates_realized_optima() {
        for seed in 0..50u64 {
            let inst = random_tiny_instance(seed);
            let ub = lp_upper_bound(&inst).unwrap();
            for rs in 0..4u64 {
                let reqs = crate::domain::realize_instance(&inst, 1000 + rs);
                let (opt, _) = brute_force_offline_opt(&reqs, &inst.budgets).unwrap();
                // The LP relaxes the realized integer program only on
                // average, so allow per-realization slack via the sample LP.
                let lp = build_sample_lp(&reqs, &inst.budgets).unwrap();
                let sol = solve_packing_lp(&lp).unwrap();
                assert!(sol.objective >= opt - 1e-7, "seed {seed}: {} < {opt}", sol.objective);
                let _ = ub;
            }
        }
    }

    #[test]
    fn upper_bound_dominates_mean_brute_force() {
        let inst = random_tiny_instance(7);
        let ub = lp_upper_bound(&inst).unwrap();
        let trials = 200;
        let vals: Vec<f64> = (0..trials)
            .map(|t| {
                let reqs = crate::domain::realize_instance(&inst, 50_000 + t as u64);
                brute_force_offline_opt(&reqs, &inst.budgets).unwrap().0
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / trials as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0);
        let se = (var / trials as f64).sqrt();
        assert!(mean <= ub + 3.0 * se, "mean {mean} vs ub {ub} (se {se})");
    }

    #[test]
    fn solutions_satisfy_all_rows() {
        for seed in 0..30u64 {
            let inst = random_tiny_instance(seed);
            let lp = build_configuration_lp(&inst, 1.0).unwrap();
            let sol = solve_packing_lp(&lp).unwrap();
            for row in &lp.rows {
                let act: f64 = row.coefs.iter().map(|&(v, c)| c * sol.mass[v]).sum();
                assert!(act <= row.rhs + 1e-9, "row {} activity {act} rhs {}", row.label, row.rhs);
            }
            for (v, &x) in sol.mass.iter().enumerate() {
                assert!((-1e-9..=1.0 + 1e-9).contains(&x), "mass[{v}] = {x}");
            }
        }
    }

    #[test]
    fn solver_is_deterministic() {
        let inst = random_tiny_instance(11);
        let lp = build_configuration_lp(&inst, 1.0).unwrap();
        let a = solve_packing_lp(&lp).unwrap();
        let b = solve_packing_lp(&lp).unwrap();
        assert_eq!(a.mass, b.mass);
        assert!(a.objective == b.objective);
    }

    #[test]
    fn objective_monotone_in_budget_scale() {
        for seed in 0..20u64 {
            let inst = random_tiny_instance(seed);
            let lo = solve_packing_lp(&build_configuration_lp(&inst, 0.5).unwrap())
                .unwrap()
                .objective;
            let hi = solve_packing_lp(&build_configuration_lp(&inst, 1.0).unwrap())
                .unwrap()
                .objective;
            assert!(lo <= hi + 1e-9, "seed {seed}: {lo} > {hi}");
        }
    }

    #[test]
    fn dump_text_lists_objective_rows_and_bounds() {
        let reqs = vec![request(0, take_or_leave(2.0, vec![0.5]))];
        let lp = build_sample_lp(&reqs, &[1.0]).unwrap();
        let dump = lp.dump_text();
        assert!(dump.contains("maximize: 2*x1"));
        assert!(dump.contains("resource 0: 0.5*x1 <= 1"));
        assert!(dump.contains("cap request 0: 1*x0 + 1*x1 <= 1"));
        assert!(dump.contains("bound: 0 <= x1 <= 1"));
    }
}
