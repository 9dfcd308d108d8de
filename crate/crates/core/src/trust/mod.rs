//! Trust arithmetic: evaluation, result-driven updates, environment
//! correction, characteristic inference, transitivity and trustee selection.
//!
//! Everything here is a pure function of its inputs; stores are passed in
//! explicitly and never mutated.

mod evaluate;
mod infer;
pub mod search;
mod transit;
mod update;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use evaluate::{
    net_profit, normalize, post_evaluate, rank_by_score, reverse_evaluate, select_trustee, should_self_execute,
    ReverseDecision, Unavailable,
};
pub use infer::{infer_characteristic_tw, infer_task_tw, Experience};
pub use transit::{
    char_chain_value, hop_value, traditional_path_value, transit_aggressive, transit_chain, transit_conservative,
    transit_pair, transit_traditional, CharPath, HopScope,
};
pub use update::{env_correct, env_correct_min, update_estimates, update_estimates_env, update_observed, Observation};

/// How trust flows along recommendation paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Exact-task records only, values multiplied along the path.
    Traditional,
    /// Every hop must cover all characteristics of the task.
    Conservative,
    /// Each characteristic may travel along its own path.
    Aggressive,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Traditional, Method::Conservative, Method::Aggressive];

    pub fn name(self) -> &'static str {
        match self {
            Method::Traditional => "traditional",
            Method::Conservative => "conservative",
            Method::Aggressive => "aggressive",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "traditional" => Ok(Method::Traditional),
            "conservative" => Ok(Method::Conservative),
            "aggressive" => Ok(Method::Aggressive),
            other => Err(Error::param("method", format!("unknown transitivity method `{other}`"))),
        }
    }
}

/// Which scalar a trustor reads off a record when ranking, and hence the
/// trust value carried along paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionStrategy {
    /// Rank by expected success rate.
    SuccessOnly,
    /// Rank by expected net profit (equivalently, its normalized post-evaluation).
    FullProfit,
}

impl SelectionStrategy {
    pub fn name(self) -> &'static str {
        match self {
            SelectionStrategy::SuccessOnly => "success_only",
            SelectionStrategy::FullProfit => "full_profit",
        }
    }

    /// Trust value in [0, 1] derived from a record.
    pub fn view<T: Scalar>(self, record: &crate::domain::TrustRecord<T>) -> T {
        match self {
            SelectionStrategy::SuccessOnly => record.s_hat,
            SelectionStrategy::FullProfit => post_evaluate(record),
        }
    }
}

impl std::str::FromStr for SelectionStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "success_only" => Ok(SelectionStrategy::SuccessOnly),
            "full_profit" => Ok(SelectionStrategy::FullProfit),
            other => Err(Error::param("strategy", format!("unknown selection strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TransitivityParams<T> {
    /// Minimum recommendation trust for an intermediate.
    pub omega1: T,
    /// Minimum task trust for the last hop of a chain.
    pub omega2: T,
    pub max_hops: usize,
    pub method: Method,
}

impl<T: Scalar> TransitivityParams<T> {
    pub fn new(omega1: T, omega2: T, max_hops: usize, method: Method) -> Result<Self> {
        if !omega1.in_unit() {
            return Err(Error::param("omega1", format!("must lie in [0, 1], got {omega1}")));
        }
        if !omega2.in_unit() {
            return Err(Error::param("omega2", format!("must lie in [0, 1], got {omega2}")));
        }
        if max_hops == 0 {
            return Err(Error::param("max_hops", "must be at least 1"));
        }
        Ok(TransitivityParams { omega1, omega2, max_hops, method })
    }

    pub fn with_method(self, method: Method) -> Self {
        TransitivityParams { method, ..self }
    }
}

impl<T: Scalar> Default for TransitivityParams<T> {
    fn default() -> Self {
        TransitivityParams { omega1: T::lit(0.6), omega2: T::lit(0.6), max_hops: 3, method: Method::Traditional }
    }
}

/// Forgetting factors for the four estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct UpdateParams<T> {
    pub beta_s: T,
    pub beta_g: T,
    pub beta_d: T,
    pub beta_c: T,
}

impl<T: Scalar> UpdateParams<T> {
    pub fn uniform(beta: T) -> Result<Self> {
        Self::new(beta, beta, beta, beta)
    }

    pub fn new(beta_s: T, beta_g: T, beta_d: T, beta_c: T) -> Result<Self> {
        for (name, b) in [("beta_s", beta_s), ("beta_g", beta_g), ("beta_d", beta_d), ("beta_c", beta_c)] {
            if !(b >= T::zero() && b <= T::one()) {
                return Err(Error::param(name, format!("forgetting factor must lie in [0, 1], got {b}")));
            }
        }
        Ok(UpdateParams { beta_s, beta_g, beta_d, beta_c })
    }
}
