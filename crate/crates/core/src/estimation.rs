//! Learning consumption estimates from a single sample per step.
//!
//! One sampled request per step distribution is enough to drive the pricer:
//! pad the sample with null-only requests, split it uniformly at random into
//! `D` equal parts, give each part a `(1 - eps)/D` slice of every budget, and
//! solve each part's sample relaxation. A request's estimated consumption is
//! whatever its part's solution assigns to it, and the value estimate is an
//! order statistic of the per-request maxima.

use crate::domain::{Decision, RealizedRequest};
use crate::error::{Error, Result};
use crate::lp::{build_sample_lp, solution_consumption, solve_packing_lp};
use crate::pricing::Estimates;
use crate::rng::Stream;
use rand::seq::SliceRandom;
use rayon::prelude::*;

/// A random equal split of the padded sample indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Disjoint index sets covering `[n + pad_count]`, all the same size.
    pub parts: Vec<Vec<usize>>,
    /// Null-only requests appended to make the split even.
    pub pad_count: usize,
}

impl Partition {
    pub fn d(&self) -> usize {
        self.parts.len()
    }

    pub fn n_padded(&self) -> usize {
        self.parts.iter().map(|p| p.len()).sum()
    }

    /// Disjointness, equal sizes, exact coverage of `[n_padded]`.
    pub fn check(&self) -> Result<()> {
        if self.parts.is_empty() {
            return Err(Error::invalid("partition has no parts"));
        }
        let size = self.parts[0].len();
        let n_padded = self.n_padded();
        let mut seen = vec![false; n_padded];
        for part in &self.parts {
            if part.len() != size {
                return Err(Error::invalid("partition parts differ in size"));
            }
            for &i in part {
                if i >= n_padded || seen[i] {
                    return Err(Error::invalid(format!("partition does not cover [{n_padded}] exactly")));
                }
                seen[i] = true;
            }
        }
        Ok(())
    }
}

/// Pads `n` to a multiple of `d`, shuffles, and slices into `d` equal parts.
pub fn random_partition(n: usize, d: usize, rng: &mut Stream) -> Result<Partition> {
    if d == 0 {
        return Err(Error::invalid("partition count must be at least 1"));
    }
    let n_padded = n.div_ceil(d) * d;
    if d > n_padded {
        return Err(Error::invalid(format!("partition count {d} exceeds padded size {n_padded}")));
    }
    let mut indices: Vec<usize> = (0..n_padded).collect();
    indices.shuffle(rng);
    let size = n_padded / d;
    let parts = indices.chunks(size).map(|c| c.to_vec()).collect();
    Ok(Partition { parts, pad_count: n_padded - n })
}

/// Practical default split count.
pub fn default_partition_count(n: usize) -> usize {
    n.clamp(1, 64)
}

/// Split count the concentration analysis asks for. Astronomically large at
/// desk scale; kept so reports can show the gap to the practical default.
pub fn analysis_partition_count(n: usize, m: usize, epsilon: f64) -> f64 {
    let ln = (n as f64 * m as f64 / epsilon).ln();
    1024.0 * ln.powi(3) / epsilon.powi(4)
}

/// Accuracy the split count buys: prefix estimates concentrate within
/// `eps_d * B_j`.
pub fn partition_accuracy(n: usize, m: usize, epsilon: f64, d: usize) -> f64 {
    (4.0 * (n as f64 * m as f64 / epsilon).ln() / d as f64).sqrt()
}

/// Per-part sample relaxations at budgets `(1 - eps)/D * B`; each request's
/// estimated consumption is read off its part's optimal solution. Pad rows
/// are dropped, so the result is `n x m` for the original sample.
pub fn estimate_prefix_consumptions(
    sample: &[RealizedRequest],
    partition: &Partition,
    budgets: &[f64],
    epsilon: f64,
) -> Result<Vec<Vec<f64>>> {
    partition.check()?;
    let n = sample.len();
    let m = budgets.len();
    if partition.n_padded() != n + partition.pad_count {
        return Err(Error::invalid(format!(
            "partition covers {} indices, sample has {n} plus {} pads",
            partition.n_padded(),
            partition.pad_count
        )));
    }
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 1.0 {
        return Err(Error::invalid(format!("epsilon {epsilon} outside (0,1)")));
    }
    let d = partition.d() as f64;
    let scaled: Vec<f64> = budgets.iter().map(|b| b * (1.0 - epsilon) / d).collect();
    let per_part: Vec<Vec<(usize, Vec<f64>)>> = partition
        .parts
        .par_iter()
        .map(|part| {
            let local: Vec<RealizedRequest> = part
                .iter()
                .enumerate()
                .map(|(pos, &gi)| {
                    if gi < n {
                        RealizedRequest { step: pos, ..sample[gi].clone() }
                    } else {
                        RealizedRequest { step: pos, type_index: 0, menu: vec![Decision::null(m)] }
                    }
                })
                .collect();
            let lp = build_sample_lp(&local, &scaled)?;
            let sol = solve_packing_lp(&lp)?;
            let cons = solution_consumption(&lp, &sol);
            Ok(part
                .iter()
                .enumerate()
                .filter(|&(_, &gi)| gi < n)
                .map(|(pos, &gi)| (gi, cons[pos].clone()))
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut out = vec![vec![0.0; m]; n];
    for rows in per_part {
        for (gi, row) in rows {
            out[gi] = row;
        }
    }
    Ok(out)
}

/// The `ceil(3/eps)`-th largest per-request maximum value, descending sort
/// with index tie-break.
pub fn estimate_opt_hat(sample: &[RealizedRequest], epsilon: f64) -> Result<f64> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::invalid(format!("epsilon {epsilon} must be positive")));
    }
    let rank = (3.0 / epsilon).ceil() as usize;
    if sample.len() < rank {
        return Err(Error::SampleTooSmall { needed: rank, got: sample.len() });
    }
    let mut maxima: Vec<(f64, usize)> = sample.iter().enumerate().map(|(i, r)| (r.max_value(), i)).collect();
    maxima.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    Ok(maxima[rank - 1].0)
}

/// The full single-sample pipeline: split, estimate consumptions per part,
/// estimate the benchmark value, package with `beta = 1`.
pub fn single_sample_pipeline(
    sample: &[RealizedRequest],
    budgets: &[f64],
    epsilon: f64,
    d: usize,
    rng: &mut Stream,
) -> Result<Estimates> {
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon > 0.5 {
        return Err(Error::invalid(format!("epsilon {epsilon} outside (0, 1/2]")));
    }
    let partition = random_partition(sample.len(), d, rng)?;
    let opt_hat = estimate_opt_hat(sample, epsilon)?;
    let a_hat = estimate_prefix_consumptions(sample, &partition, budgets, epsilon)?;
    Ok(Estimates { opt_hat, beta: 1.0, a_hat })
}
