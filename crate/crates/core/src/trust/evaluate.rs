use std::cmp::Ordering;

use crate::domain::{AgentProfile, TaskId, TrustRecord, UsageLog};
use crate::graph::NodeId;
use crate::scalar::Scalar;

use super::SelectionStrategy;

/// Affine map of a raw net profit from [-2, 1] onto [0, 1].
pub fn normalize<T: Scalar>(raw: T) -> T {
    let two = T::lit(2.0);
    if raw < -two || raw > T::one() {
        log::debug!("normalize: raw trust value {raw} outside [-2, 1], clamping");
    }
    ((raw + two) / T::lit(3.0)).unit_clamp()
}

/// Expected net profit `S*G - (1-S)*D - C` of delegating to the record's subject.
pub fn net_profit<T: Scalar>(record: &TrustRecord<T>) -> T {
    record.s_hat * record.g_hat - (T::one() - record.s_hat) * record.d_hat - record.c_hat
}

/// Normalized post-evaluation trustworthiness.
pub fn post_evaluate<T: Scalar>(record: &TrustRecord<T>) -> T {
    normalize(net_profit(record))
}

/// Returned when there is nobody to delegate to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Unavailable;

/// Sorts by score descending, breaking ties by the lower node id.
pub fn rank_by_score<T: Scalar>(scored: &mut [(NodeId, T)]) {
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
}

/// Ranks candidates for delegation. The order drives the retry-on-rejection walk.
pub fn select_trustee<T: Scalar>(
    candidates: &[(NodeId, TrustRecord<T>)],
    strategy: SelectionStrategy,
) -> Result<Vec<NodeId>, Unavailable> {
    if candidates.is_empty() {
        return Err(Unavailable);
    }
    let mut scored: Vec<(NodeId, T)> = candidates
        .iter()
        .map(|(n, r)| {
            let score = match strategy {
                SelectionStrategy::SuccessOnly => r.s_hat,
                SelectionStrategy::FullProfit => net_profit(r),
            };
            (*n, score)
        })
        .collect();
    rank_by_score(&mut scored);
    Ok(scored.into_iter().map(|(n, _)| n).collect())
}

/// Self-execution wins unless delegating yields strictly more expected profit.
/// With no record for the alternative the trustor keeps the task.
pub fn should_self_execute<T: Scalar>(self_record: &TrustRecord<T>, best_other: Option<&TrustRecord<T>>) -> bool {
    match best_other {
        None => true,
        Some(other) => net_profit(self_record) >= net_profit(other),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReverseDecision<T> {
    pub reverse_trust: T,
    pub accepted: bool,
}

/// The trustee's view of the trustor: Laplace-smoothed share of responsive uses
/// in its usage log, compared against the trustee's threshold for the task.
pub fn reverse_evaluate<T: Scalar>(
    trustee: &AgentProfile<T>,
    trustor: NodeId,
    usage: &UsageLog,
    task: TaskId,
) -> ReverseDecision<T> {
    let counts = usage.counts(trustee.node, trustor);
    let reverse_trust = T::lit(f64::from(counts.responsive) + 1.0) / T::lit(f64::from(counts.total) + 2.0);
    ReverseDecision { reverse_trust, accepted: reverse_trust >= trustee.threshold_for(task) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::RecordKind;

    fn rec(s: f64, g: f64, d: f64, c: f64) -> TrustRecord<f64> {
        TrustRecord::new(RecordKind::Service, s, g, d, c)
    }

    #[test]
    fn normalize_endpoints() {
        assert_eq!(normalize(1.0), 1.0);
        assert_eq!(normalize(-2.0), 0.0);
        assert_eq!(normalize(-0.5), 0.5);
        assert_eq!(normalize(5.0), 1.0);
        assert_eq!(normalize(-7.0f32), 0.0);
    }

    #[test]
    fn post_evaluation_examples() {
        assert_eq!(post_evaluate(&rec(1.0, 1.0, 0.3, 0.0)), 1.0);
        assert_eq!(post_evaluate(&rec(0.0, 0.9, 1.0, 1.0)), 0.0);
        // 0.8 - 0.2*0.5 - 0.1 = 0.6 -> 2.6/3
        assert!((post_evaluate(&rec(0.8, 1.0, 0.5, 0.1)) - 2.6 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn net_profit_examples() {
        assert_eq!(net_profit(&rec(1.0, 0.37, 0.9, 0.0)), 0.37);
        assert_eq!(net_profit(&rec(0.5, 1.0, 1.0, 0.0)), 0.0);
        assert!((net_profit(&rec(0.8, 0.6, 0.4, 0.2)) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn selection_strategies() {
        assert_eq!(select_trustee::<f64>(&[], SelectionStrategy::SuccessOnly), Err(Unavailable));
        assert_eq!(select_trustee(&[(NodeId(4), rec(0.1, 0.0, 0.0, 0.0))], SelectionStrategy::FullProfit), Ok(vec![NodeId(4)]));

        let cands = [(NodeId(1), rec(0.7, 0.5, 0.5, 0.1)), (NodeId(2), rec(0.9, 0.5, 0.5, 0.1))];
        assert_eq!(select_trustee(&cands, SelectionStrategy::SuccessOnly).unwrap(), vec![NodeId(2), NodeId(1)]);

        // A: 0.09 - 0.09 - 0.1 = -0.1 ; B: 0.56 - 0.03 - 0.1 = 0.43
        let a = rec(0.9, 0.1, 0.9, 0.1);
        let b = rec(0.7, 0.8, 0.1, 0.1);
        assert!((net_profit(&a) + 0.1).abs() < 1e-12);
        assert!((net_profit(&b) - 0.43).abs() < 1e-12);
        let order = select_trustee(&[(NodeId(0), a), (NodeId(1), b)], SelectionStrategy::FullProfit).unwrap();
        assert_eq!(order, vec![NodeId(1), NodeId(0)]);
        let order = select_trustee(&[(NodeId(0), a), (NodeId(1), b)], SelectionStrategy::SuccessOnly).unwrap();
        assert_eq!(order, vec![NodeId(0), NodeId(1)]);
    }

    #[test]
    fn ties_prefer_lower_id() {
        let r = rec(0.5, 0.5, 0.5, 0.5);
        let order = select_trustee(&[(NodeId(9), r), (NodeId(3), r), (NodeId(5), r)], SelectionStrategy::FullProfit).unwrap();
        assert_eq!(order, vec![NodeId(3), NodeId(5), NodeId(9)]);
    }

    #[test]
    fn self_execution_rule() {
        let r = rec(0.6, 0.5, 0.2, 0.1);
        assert!(should_self_execute(&r, Some(&r)));
        // self 0.2 vs other 0.5
        let me = rec(1.0, 0.3, 0.0, 0.1);
        let other = rec(1.0, 0.6, 0.0, 0.1);
        assert!(!should_self_execute(&me, Some(&other)));
        assert!(should_self_execute(&me, None));
    }

    #[test]
    fn reverse_evaluation() {
        let mut trustee = AgentProfile::<f64>::new(NodeId(1));
        let mut log = UsageLog::default();
        let task = TaskId(0);
        let d = reverse_evaluate(&trustee, NodeId(0), &log, task);
        assert!(d.accepted && d.reverse_trust == 0.5);

        trustee.reverse_threshold.insert(task, 0.3);
        assert!(reverse_evaluate(&trustee, NodeId(0), &log, task).accepted);

        for _ in 0..8 {
            log.record(NodeId(1), NodeId(0), true);
        }
        let d = reverse_evaluate(&trustee, NodeId(0), &log, task);
        assert!((d.reverse_trust - 0.1).abs() < 1e-12);
        assert!(!d.accepted);

        trustee.reverse_threshold.insert(task, 0.0);
        assert!(reverse_evaluate(&trustee, NodeId(0), &log, task).accepted);
    }
}
