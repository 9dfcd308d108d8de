use crate::domain::{DelegationOutcome, EnvSnapshot, Environment, TrustRecord};
use crate::graph::NodeId;
use crate::scalar::Scalar;

use super::UpdateParams;

/// What the trustor observed after delegating: a realized success rate (0/1
/// for a single delegation, a fraction for a block of trials), plus the gain
/// seen on success, the damage seen on failure, and the cost paid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation<T> {
    pub success_rate: T,
    pub gain: Option<T>,
    pub damage: Option<T>,
    pub cost: T,
}

impl<T: Scalar> From<&DelegationOutcome<T>> for Observation<T> {
    fn from(o: &DelegationOutcome<T>) -> Self {
        Observation {
            success_rate: o.realized_success(),
            gain: o.success.then_some(o.gain),
            damage: (!o.success).then_some(o.damage),
            cost: o.cost,
        }
    }
}

#[inline]
fn blend<T: Scalar>(beta: T, old: T, new: T) -> T {
    beta * old + (T::one() - beta) * new
}

/// Exponential forgetting update of all four estimates. Gain is only
/// observed on success and damage only on failure, so each of those
/// estimates moves only when its quantity was actually realized.
pub fn update_observed<T: Scalar>(record: &TrustRecord<T>, obs: &Observation<T>, params: &UpdateParams<T>) -> TrustRecord<T> {
    TrustRecord {
        s_hat: blend(params.beta_s, record.s_hat, obs.success_rate),
        g_hat: obs.gain.map_or(record.g_hat, |g| blend(params.beta_g, record.g_hat, g)),
        d_hat: obs.damage.map_or(record.d_hat, |d| blend(params.beta_d, record.d_hat, d)),
        c_hat: blend(params.beta_c, record.c_hat, obs.cost),
        interaction_count: record.interaction_count + 1,
        kind: record.kind,
    }
}

pub fn update_estimates<T: Scalar>(record: &TrustRecord<T>, outcome: &DelegationOutcome<T>, params: &UpdateParams<T>) -> TrustRecord<T> {
    update_observed(record, &Observation::from(outcome), params)
}

/// Removes the environment's influence from a realized quantity by dividing by
/// the worst environment value involved; the result is clamped to [0, 1].
pub fn env_correct_min<T: Scalar>(min_env: T, realized: T) -> T {
    let corrected = realized / min_env;
    if corrected > T::one() {
        log::trace!("env_correct: over-performance {corrected} clamped to 1");
    }
    corrected.unit_clamp()
}

pub fn env_correct<T: Scalar>(env: &Environment<T>, trustor: NodeId, trustee: NodeId, intermediates: &[NodeId], realized: T) -> T {
    env_correct_min(env.min_over(trustor, trustee, intermediates), realized)
}

/// Like [`update_estimates`], with every realized quantity environment-corrected first.
pub fn update_estimates_env<T: Scalar>(
    record: &TrustRecord<T>,
    outcome: &DelegationOutcome<T>,
    params: &UpdateParams<T>,
    env: &EnvSnapshot<T>,
) -> TrustRecord<T> {
    let e = env.min();
    let obs = Observation::from(outcome);
    let corrected = Observation {
        success_rate: env_correct_min(e, obs.success_rate),
        gain: obs.gain.map(|g| env_correct_min(e, g)),
        damage: obs.damage.map(|d| env_correct_min(e, d)),
        cost: env_correct_min(e, obs.cost),
    };
    update_observed(record, &corrected, params)
}
