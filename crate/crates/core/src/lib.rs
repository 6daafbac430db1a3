//! Posted-price algorithms for online resource allocation with stochastic
//! arrivals, plus the machinery needed to study them empirically.
//!
//! A sequence of `n` requests arrives online. Request `i` realizes one of `K`
//! known types; a type is a menu of decisions, each with a value and a
//! consumption vector over `m` budgeted resources. The allocator posts a price
//! per resource, the request best-responds (a null decision is always
//! available, so utility is never negative), and budgets shrink irrevocably.
//!
//! The crate provides:
//!
//! - the domain model and instance validation ([`domain`]),
//! - a deterministic packing-LP toolkit used both as an estimator source and
//!   as a benchmark upper bound ([`lp`]),
//! - the exponential pricing allocator driven by consumption estimates, with
//!   checkable no-regret and revenue-loss certificates ([`pricing`]),
//! - single-sample estimation: partition the horizon, solve per-part sample
//!   LPs, read off prefix consumption estimates and a value threshold
//!   ([`estimation`]),
//! - a variant that withstands adversarial outlier requests injected among
//!   randomly timed honest ones ([`byzantine`]),
//! - robustness to oblivious nonnegative value augmentations
//!   ([`augmentation`]),
//! - scenario generators including a budget lower-bound construction
//!   ([`genlab`]),
//! - an experiment harness with seeded, reproducible reports ([`harness`]),
//! - JSON/CSV interchange for instances, estimates, scenarios, plans and
//!   traces ([`io`]).

pub mod augmentation;
pub mod byzantine;
pub mod domain;
pub mod error;
pub mod estimation;
pub mod genlab;
pub mod harness;
pub mod io;
pub mod lp;
pub mod pricing;
pub mod rng;

pub use error::{Error, Result};
