use crate::domain::{CharacteristicId, Task};
use crate::scalar::Scalar;

/// A previously experienced context: a full task, or a lone characteristic
/// (weight 1).
#[derive(Debug, Clone, Copy)]
pub enum Experience<'a, T> {
    Task(&'a Task<T>),
    Characteristic(CharacteristicId),
}

impl<T: Scalar> Experience<'_, T> {
    pub fn weight_of(&self, c: CharacteristicId) -> Option<T> {
        match self {
            Experience::Task(t) => t.weight_of(c),
            Experience::Characteristic(own) => (*own == c).then(T::one),
        }
    }
}

impl<'a, T> From<&'a Task<T>> for Experience<'a, T> {
    fn from(t: &'a Task<T>) -> Self {
        Experience::Task(t)
    }
}

/// Weighted average of the trust values of every experienced context that
/// contains `target`, weighted by the characteristic's share in each. `None`
/// when no experience contains it.
pub fn infer_characteristic_tw<T: Scalar>(history: &[(Experience<'_, T>, T)], target: CharacteristicId) -> Option<T> {
    let (num, den) = history.iter().fold((T::zero(), T::zero()), |(num, den), (exp, tw)| match exp.weight_of(target) {
        Some(w) => (num + w * *tw, den + w),
        None => (num, den),
    });
    (den > T::zero()).then(|| num / den)
}

/// Trust for a possibly never-seen task: the task-weighted sum of its
/// characteristics' inferred trust. `None` unless every characteristic is
/// covered by some experience.
pub fn infer_task_tw<T: Scalar>(history: &[(Experience<'_, T>, T)], target: &Task<T>) -> Option<T> {
    target.parts().iter().try_fold(T::zero(), |acc, &(c, w)| Some(acc + w * infer_characteristic_tw(history, c)?))
}
