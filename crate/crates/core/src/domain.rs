//! Vocabulary shared by the engine: tasks and their characteristics, trust
//! records and the store holding them, agent profiles, environments and
//! delegation outcomes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CharacteristicId(pub u16);

impl fmt::Display for CharacteristicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Characteristic {
    pub id: CharacteristicId,
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub u32);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

/// A weighted bag of characteristics. Weights are positive and sum to one;
/// parts are kept sorted by characteristic id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Task<T> {
    id: TaskId,
    parts: Vec<(CharacteristicId, T)>,
}

/// Validates and renormalizes a task definition.
pub fn make_task<T: Scalar>(id: TaskId, parts: &[(CharacteristicId, T)]) -> Result<Task<T>> {
    if parts.is_empty() {
        return Err(Error::InvalidTask(format!("{id} has no characteristics")));
    }
    let mut seen = BTreeSet::new();
    let mut total = T::zero();
    for &(c, w) in parts {
        if !(w > T::zero()) || !w.is_finite() {
            return Err(Error::InvalidTask(format!("{id}: weight of {c} must be positive, got {w}")));
        }
        if !seen.insert(c) {
            return Err(Error::InvalidTask(format!("{id}: duplicate characteristic {c}")));
        }
        total = total + w;
    }
    let mut parts: Vec<_> = parts.iter().map(|&(c, w)| (c, w / total)).collect();
    parts.sort_by_key(|&(c, _)| c);
    Ok(Task { id, parts })
}

impl<T: Scalar> Task<T> {
    /// A task over `chars` with equal weights.
    pub fn uniform(id: TaskId, chars: &[CharacteristicId]) -> Result<Self> {
        let parts: Vec<_> = chars.iter().map(|&c| (c, T::one())).collect();
        make_task(id, &parts)
    }

    pub fn id(&self) -> TaskId {
        self.id
    }

    pub fn parts(&self) -> &[(CharacteristicId, T)] {
        &self.parts
    }

    pub fn characteristics(&self) -> impl Iterator<Item = CharacteristicId> + '_ {
        self.parts.iter().map(|&(c, _)| c)
    }

    pub fn weight_of(&self, c: CharacteristicId) -> Option<T> {
        self.parts.binary_search_by_key(&c, |&(k, _)| k).ok().map(|i| self.parts[i].1)
    }

    pub fn contains(&self, c: CharacteristicId) -> bool {
        self.weight_of(c).is_some()
    }

    pub fn same_characteristics(&self, other: &Task<T>) -> bool {
        self.characteristics().eq(other.characteristics())
    }
}

/// Dense registry of task definitions, indexed by [`TaskId`].
#[derive(Debug, Clone, Default, Serialize)]
pub struct TaskRegistry<T> {
    tasks: Vec<Task<T>>,
}

impl<T: Scalar> TaskRegistry<T> {
    pub fn new() -> Self {
        TaskRegistry { tasks: Vec::new() }
    }

    /// Registers a task and returns its id. A task with the same
    /// characteristics and weights as an existing one reuses that id.
    pub fn register(&mut self, parts: &[(CharacteristicId, T)]) -> Result<TaskId> {
        let candidate = make_task(TaskId(self.tasks.len() as u32), parts)?;
        if let Some(existing) = self.tasks.iter().find(|t| t.parts == candidate.parts) {
            return Ok(existing.id);
        }
        let id = candidate.id;
        self.tasks.push(candidate);
        Ok(id)
    }

    pub fn register_uniform(&mut self, chars: &[CharacteristicId]) -> Result<TaskId> {
        let parts: Vec<_> = chars.iter().map(|&c| (c, T::one())).collect();
        self.register(&parts)
    }

    pub fn get(&self, id: TaskId) -> &Task<T> {
        &self.tasks[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Task<T>> {
        self.tasks.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    /// Trust in the subject performing a task.
    Service,
    /// Trust in the subject's recommendations about others.
    Recommendation,
}

/// What a trust record is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Context {
    Task(TaskId),
    Characteristic(CharacteristicId),
}

/// One observer's expectations about one subject: success rate, gain, damage and cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrustRecord<T> {
    pub s_hat: T,
    pub g_hat: T,
    pub d_hat: T,
    pub c_hat: T,
    pub interaction_count: u32,
    pub kind: RecordKind,
}

impl<T: Scalar> TrustRecord<T> {
    pub fn new(kind: RecordKind, s_hat: T, g_hat: T, d_hat: T, c_hat: T) -> Self {
        TrustRecord { s_hat, g_hat, d_hat, c_hat, interaction_count: 0, kind }
    }

    /// Fresh record with every estimate set to `prior`.
    pub fn with_prior(kind: RecordKind, prior: T) -> Self {
        Self::new(kind, prior, prior, prior, prior)
    }

    pub fn is_valid(&self) -> bool {
        [self.s_hat, self.g_hat, self.d_hat, self.c_hat].iter().all(|v| v.in_unit())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RecordKey {
    pub observer: NodeId,
    pub subject: NodeId,
    pub kind: RecordKind,
    pub context: Context,
}

/// Trust records keyed by (observer, subject, kind, context). Absent keys are
/// "no record", distinct from any stored value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrustStore<T> {
    records: BTreeMap<RecordKey, TrustRecord<T>>,
}

impl<T: Scalar> TrustStore<T> {
    pub fn new() -> Self {
        TrustStore { records: BTreeMap::new() }
    }

    pub fn insert(&mut self, observer: NodeId, subject: NodeId, context: Context, record: TrustRecord<T>) -> Option<TrustRecord<T>> {
        let key = RecordKey { observer, subject, kind: record.kind, context };
        self.records.insert(key, record)
    }

    pub fn get(&self, observer: NodeId, subject: NodeId, kind: RecordKind, context: Context) -> Option<&TrustRecord<T>> {
        self.records.get(&RecordKey { observer, subject, kind, context })
    }

    pub fn get_mut(&mut self, observer: NodeId, subject: NodeId, kind: RecordKind, context: Context) -> Option<&mut TrustRecord<T>> {
        self.records.get_mut(&RecordKey { observer, subject, kind, context })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RecordKey, &TrustRecord<T>)> {
        self.records.iter()
    }

    /// Every record `observer` holds about `subject` of the given kind, in context order.
    pub fn history(&self, observer: NodeId, subject: NodeId, kind: RecordKind) -> impl Iterator<Item = (Context, &TrustRecord<T>)> {
        let lo = RecordKey { observer, subject, kind, context: Context::Task(TaskId(0)) };
        let hi = RecordKey { observer, subject, kind, context: Context::Characteristic(CharacteristicId(u16::MAX)) };
        self.records.range(lo..=hi).map(|(k, r)| (k.context, r))
    }

    /// Every record held by `observer`.
    pub fn held_by(&self, observer: NodeId) -> impl Iterator<Item = (&RecordKey, &TrustRecord<T>)> {
        let lo = RecordKey {
            observer,
            subject: NodeId(0),
            kind: RecordKind::Service,
            context: Context::Task(TaskId(0)),
        };
        self.records.range(lo..).take_while(move |(k, _)| k.observer == observer)
    }
}

/// A graph node's role flags and hidden ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile<T> {
    pub node: NodeId,
    pub is_trustor: bool,
    pub is_trustee: bool,
    /// Ground-truth success probability per characteristic.
    pub competence: BTreeMap<CharacteristicId, T>,
    /// Probability that one use of a trustee's resource by this agent is responsive.
    pub integrity: T,
    /// Reverse-evaluation thresholds per task; missing entries mean 0.
    pub reverse_threshold: BTreeMap<TaskId, T>,
    pub honest: bool,
    /// Realized gain, damage and cost this agent delivers as a trustee.
    pub gain: T,
    pub damage: T,
    pub cost: T,
    /// Dishonest trustees inflate the realized cost by this factor.
    pub cost_multiplier: T,
}

impl<T: Scalar> AgentProfile<T> {
    pub fn new(node: NodeId) -> Self {
        AgentProfile {
            node,
            is_trustor: false,
            is_trustee: false,
            competence: BTreeMap::new(),
            integrity: T::one(),
            reverse_threshold: BTreeMap::new(),
            honest: true,
            gain: T::one(),
            damage: T::one(),
            cost: T::zero(),
            cost_multiplier: T::one(),
        }
    }

    /// Weighted mean of characteristic competences (missing characteristics count as 0).
    pub fn competence_for(&self, task: &Task<T>) -> T {
        task.parts()
            .iter()
            .fold(T::zero(), |acc, &(c, w)| acc + w * self.competence.get(&c).copied().unwrap_or_else(T::zero))
    }

    pub fn threshold_for(&self, task: TaskId) -> T {
        self.reverse_threshold.get(&task).copied().unwrap_or_else(T::zero)
    }

    pub fn is_valid(&self) -> bool {
        self.competence.values().all(|v| v.in_unit())
            && self.integrity.in_unit()
            && self.reverse_threshold.values().all(|v| v.in_unit())
    }
}

/// Instantaneous environment per node, in (0, 1]; unlisted nodes are ideal (1).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Environment<T> {
    values: BTreeMap<NodeId, T>,
}

impl<T: Scalar> Environment<T> {
    pub fn ideal() -> Self {
        Environment { values: BTreeMap::new() }
    }

    pub fn set(&mut self, node: NodeId, value: T) -> Result<()> {
        if !(value > T::zero() && value <= T::one()) {
            return Err(Error::param("environment", format!("value for node {node} must lie in (0, 1], got {value}")));
        }
        self.values.insert(node, value);
        Ok(())
    }

    pub fn get(&self, node: NodeId) -> T {
        self.values.get(&node).copied().unwrap_or_else(T::one)
    }

    /// The worst condition among the trustor, the trustee and every intermediate.
    pub fn min_over(&self, trustor: NodeId, trustee: NodeId, intermediates: &[NodeId]) -> T {
        intermediates
            .iter()
            .fold(self.get(trustor).min(self.get(trustee)), |acc, &n| acc.min(self.get(n)))
    }

    pub fn snapshot(&self, trustor: NodeId, trustee: NodeId, intermediates: &[NodeId]) -> EnvSnapshot<T> {
        EnvSnapshot {
            trustor: self.get(trustor),
            trustee: self.get(trustee),
            intermediates: intermediates.iter().map(|&n| self.get(n)).collect(),
        }
    }
}

/// Environment values observed during one delegation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSnapshot<T> {
    pub trustor: T,
    pub trustee: T,
    pub intermediates: Vec<T>,
}

impl<T: Scalar> EnvSnapshot<T> {
    pub fn ideal() -> Self {
        EnvSnapshot { trustor: T::one(), trustee: T::one(), intermediates: Vec::new() }
    }

    pub fn min(&self) -> T {
        self.intermediates.iter().fold(self.trustor.min(self.trustee), |acc, &e| acc.min(e))
    }
}

/// Environment that changes at epoch boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSchedule<T> {
    /// `(first_epoch, environment)` pairs sorted by epoch.
    phases: Vec<(u64, Environment<T>)>,
}

impl<T: Scalar> EnvironmentSchedule<T> {
    pub fn constant(env: Environment<T>) -> Self {
        EnvironmentSchedule { phases: vec![(0, env)] }
    }

    pub fn from_phases(mut phases: Vec<(u64, Environment<T>)>) -> Self {
        phases.sort_by_key(|(e, _)| *e);
        if phases.first().map_or(true, |(e, _)| *e > 0) {
            phases.insert(0, (0, Environment::ideal()));
        }
        EnvironmentSchedule { phases }
    }

    pub fn at(&self, epoch: u64) -> &Environment<T> {
        let idx = self.phases.partition_point(|(start, _)| *start <= epoch);
        &self.phases[idx.saturating_sub(1)].1
    }
}

/// What one delegation actually produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelegationOutcome<T> {
    pub success: bool,
    /// Zero on failure.
    pub gain: T,
    /// Zero on success.
    pub damage: T,
    pub cost: T,
    /// Whether the trustor misused the trustee's resource.
    pub abusive: bool,
    pub env: EnvSnapshot<T>,
}

impl<T: Scalar> DelegationOutcome<T> {
    /// Builds an outcome, zeroing gain on failure and damage on success.
    pub fn new(success: bool, gain: T, damage: T, cost: T, abusive: bool, env: EnvSnapshot<T>) -> Self {
        let (gain, damage) = if success { (gain, T::zero()) } else { (T::zero(), damage) };
        DelegationOutcome { success, gain, damage, cost, abusive, env }
    }

    pub fn realized_success(&self) -> T {
        if self.success {
            T::one()
        } else {
            T::zero()
        }
    }

    /// Realized net profit: gain minus damage minus cost.
    pub fn net_profit(&self) -> T {
        self.gain - self.damage - self.cost
    }
}

/// Per (trustee, trustor) record of how the trustor used the trustee's resources.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageLog {
    entries: BTreeMap<(NodeId, NodeId), UsageCounts>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageCounts {
    pub responsive: u32,
    pub total: u32,
}

impl UsageLog {
    pub fn record(&mut self, trustee: NodeId, trustor: NodeId, abusive: bool) {
        let e = self.entries.entry((trustee, trustor)).or_default();
        e.total += 1;
        if !abusive {
            e.responsive += 1;
        }
    }

    pub fn counts(&self, trustee: NodeId, trustor: NodeId) -> UsageCounts {
        self.entries.get(&(trustee, trustor)).copied().unwrap_or_default()
    }
}
