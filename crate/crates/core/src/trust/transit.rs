use crate::domain::{CharacteristicId, Context, RecordKind, Task, TaskRegistry, TrustRecord, TrustStore};
use crate::graph::NodeId;
use crate::scalar::Scalar;

use super::infer::{infer_characteristic_tw, infer_task_tw, Experience};
use super::{Method, SelectionStrategy, TransitivityParams};

/// Combines a recommender's trust with the trust it vouches for. Note that
/// two low values also combine to a high one: distrusting a recommender who
/// distrusts a subject reads as trust in that subject.
#[inline]
pub fn transit_pair<T: Scalar>(tw_rec: T, tw_task: T) -> T {
    tw_rec * tw_task + (T::one() - tw_rec) * (T::one() - tw_task)
}

/// Product of the hop values along a path.
pub fn transit_traditional<T: Scalar>(path_tws: &[T]) -> T {
    path_tws.iter().fold(T::one(), |acc, &t| acc * t)
}

/// Gates `tws` (recommendation hops then the final task hop) and folds them
/// with [`transit_pair`]. A single value is a direct relation and passes
/// through ungated. `None` when a gate fails or `tws` is empty.
pub fn transit_chain<T: Scalar>(tws: &[T], params: &TransitivityParams<T>) -> Option<T> {
    let (&last, recs) = tws.split_last()?;
    if !passes_gates(recs, last, params) {
        return None;
    }
    Some(tws[1..].iter().fold(tws[0], |acc, &t| transit_pair(acc, t)))
}

fn passes_gates<T: Scalar>(recs: &[T], last: T, params: &TransitivityParams<T>) -> bool {
    recs.is_empty() || (recs.iter().all(|&r| r >= params.omega1) && last >= params.omega2)
}

/// Which hop estimate a transitivity method reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HopScope {
    /// Only a record on the exact target task.
    Exact,
    /// Exact record, else inference over the whole target task.
    Task,
    /// As `Task`, falling back to inference for this one characteristic.
    Characteristic(CharacteristicId),
}

impl HopScope {
    pub fn whole_task(method: Method) -> HopScope {
        match method {
            Method::Traditional => HopScope::Exact,
            Method::Conservative | Method::Aggressive => HopScope::Task,
        }
    }
}

/// Every estimate one observer's history about one subject supports for a target task.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct HopEstimates<T> {
    pub exact: Option<T>,
    pub task: Option<T>,
    /// Aligned with the target's parts.
    pub chars: Vec<Option<T>>,
}

impl<T: Scalar> HopEstimates<T> {
    pub fn from_history<'a>(
        history: impl IntoIterator<Item = (Context, &'a TrustRecord<T>)>,
        registry: &TaskRegistry<T>,
        target: &Task<T>,
        view: SelectionStrategy,
    ) -> Self {
        let mut exact = None;
        let experiences: Vec<(Experience<'_, T>, T)> = history
            .into_iter()
            .map(|(ctx, rec)| {
                let tw = view.view(rec);
                let exp = match ctx {
                    Context::Task(id) => {
                        if id == target.id() {
                            exact = Some(tw);
                        }
                        Experience::Task(registry.get(id))
                    }
                    Context::Characteristic(c) => Experience::Characteristic(c),
                };
                (exp, tw)
            })
            .collect();
        let chars: Vec<Option<T>> =
            target.parts().iter().map(|&(c, _)| infer_characteristic_tw(&experiences, c)).collect();
        let task = infer_task_tw(&experiences, target);
        HopEstimates { exact, task, chars }
    }

    pub fn get(&self, scope: HopScope, target: &Task<T>) -> Option<T> {
        match scope {
            HopScope::Exact => self.exact,
            HopScope::Task => self.exact.or(self.task),
            HopScope::Characteristic(c) => self.exact.or(self.task).or_else(|| {
                let i = target.parts().iter().position(|&(tc, _)| tc == c)?;
                self.chars[i]
            }),
        }
    }

    pub fn covers_task(&self) -> bool {
        self.exact.is_some() || self.task.is_some()
    }

    pub fn covers_any(&self) -> bool {
        self.exact.is_some() || self.chars.iter().any(Option::is_some)
    }
}

/// Trust `observer` places in `subject` for `target` under `scope`, read
/// through `view`. `None` when the history does not support an estimate.
#[allow(clippy::too_many_arguments)]
pub fn hop_value<T: Scalar>(
    store: &TrustStore<T>,
    registry: &TaskRegistry<T>,
    observer: NodeId,
    subject: NodeId,
    kind: RecordKind,
    target: &Task<T>,
    scope: HopScope,
    view: SelectionStrategy,
) -> Option<T> {
    if scope == HopScope::Exact {
        return store.get(observer, subject, kind, Context::Task(target.id())).map(|r| view.view(r));
    }
    HopEstimates::from_history(store.history(observer, subject, kind), registry, target, view).get(scope, target)
}

fn path_hops<T: Scalar>(
    store: &TrustStore<T>,
    registry: &TaskRegistry<T>,
    path: &[NodeId],
    target: &Task<T>,
    scope: HopScope,
    view: SelectionStrategy,
) -> Option<Vec<T>> {
    if path.len() < 2 {
        return None;
    }
    let last = path.len() - 2;
    path.windows(2)
        .enumerate()
        .map(|(i, w)| {
            let kind = if i == last { RecordKind::Service } else { RecordKind::Recommendation };
            hop_value(store, registry, w[0], w[1], kind, target, scope, view)
        })
        .collect()
}

/// Exact-task records multiplied along `path` (trustor first, candidate
/// last), with the same gates as the other methods.
pub fn traditional_path_value<T: Scalar>(
    store: &TrustStore<T>,
    registry: &TaskRegistry<T>,
    path: &[NodeId],
    target: &Task<T>,
    params: &TransitivityParams<T>,
    view: SelectionStrategy,
) -> Option<T> {
    let tws = path_hops(store, registry, path, target, HopScope::Exact, view)?;
    let (&last, recs) = tws.split_last()?;
    passes_gates(recs, last, params).then(|| transit_traditional(&tws))
}

/// Chain value along `path` where every hop must support the whole target task.
pub fn transit_conservative<T: Scalar>(
    store: &TrustStore<T>,
    registry: &TaskRegistry<T>,
    path: &[NodeId],
    target: &Task<T>,
    params: &TransitivityParams<T>,
    view: SelectionStrategy,
) -> Option<T> {
    transit_chain(&path_hops(store, registry, path, target, HopScope::Task, view)?, params)
}

/// Chain value for one characteristic of `target` along `path`.
pub fn char_chain_value<T: Scalar>(
    store: &TrustStore<T>,
    registry: &TaskRegistry<T>,
    path: &[NodeId],
    target: &Task<T>,
    characteristic: CharacteristicId,
    params: &TransitivityParams<T>,
    view: SelectionStrategy,
) -> Option<T> {
    transit_chain(&path_hops(store, registry, path, target, HopScope::Characteristic(characteristic), view)?, params)
}

/// A path used to carry trust, for one characteristic or (`None`) for the whole task.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CharPath {
    pub characteristic: Option<CharacteristicId>,
    pub path: Vec<NodeId>,
}

/// Weighted sum over the target's characteristics of each one's chain value
/// along its own path. `None` if a characteristic lacks a path, a path is
/// blocked, or the paths end at different candidates.
pub fn transit_aggressive<T: Scalar>(
    store: &TrustStore<T>,
    registry: &TaskRegistry<T>,
    paths: &[CharPath],
    target: &Task<T>,
    params: &TransitivityParams<T>,
    view: SelectionStrategy,
) -> Option<T> {
    let candidate = *paths.first()?.path.last()?;
    let mut total = T::zero();
    for &(c, w) in target.parts() {
        let p = paths.iter().find(|p| p.characteristic == Some(c))?;
        if p.path.last() != Some(&candidate) {
            return None;
        }
        total = total + w * char_chain_value(store, registry, &p.path, target, c, params, view)?;
    }
    Some(total)
}
