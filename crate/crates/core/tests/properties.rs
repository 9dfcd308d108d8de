mod common;

use proptest::prelude::*;
use siot_trust::domain::{make_task, CharacteristicId, RecordKind, TaskId, TrustRecord};
use siot_trust::trust::{infer_task_tw, transit_pair, update_observed, Experience, Observation, UpdateParams};

proptest! {
    #[test]
    fn updates_converge_geometrically(beta in 0.0..1.0f64, s0 in 0.0..=1.0f64, c in 0.0..=1.0f64, n in 1i32..80) {
        let params = UpdateParams::uniform(beta).unwrap();
        let obs = Observation { success_rate: c, gain: None, damage: None, cost: 0.0 };
        let mut rec = TrustRecord::new(RecordKind::Service, s0, 0.5, 0.5, 0.5);
        for _ in 0..n {
            rec = update_observed(&rec, &obs, &params);
        }
        prop_assert!(((rec.s_hat - c).abs() - beta.powi(n) * (s0 - c).abs()).abs() <= 1e-12);
    }

    #[test]
    fn pair_is_symmetric_and_bounded(a in 0.0..=1.0f64, t in 0.0..=1.0f64) {
        prop_assert!((transit_pair(a, t) - transit_pair(t, a)).abs() <= 1e-15);
        prop_assert!((0.0..=1.0).contains(&transit_pair(a, t)));
        prop_assert!((transit_pair(0.5, t) - 0.5).abs() <= 1e-15);
    }

    #[test]
    fn lone_characteristics_reproduce_their_trust(weights in prop::collection::vec(0.05..1.0f64, 1..6), tws in prop::collection::vec(0.0..=1.0f64, 6)) {
        let parts: Vec<_> = weights.iter().enumerate().map(|(i, &w)| (CharacteristicId(i as u16), w)).collect();
        let target = make_task(TaskId(0), &parts).unwrap();
        let history: Vec<_> = parts.iter().zip(&tws).map(|((c, _), &tw)| (Experience::Characteristic(*c), tw)).collect();
        let expected: f64 = target.parts().iter().zip(&tws).map(|((_, w), tw)| w * tw).sum();
        prop_assert!((infer_task_tw(&history, &target).unwrap() - expected).abs() <= 1e-12);
        prop_assert!(infer_task_tw(&history[..parts.len() - 1], &target).is_none());
    }
}

#[test]
fn geometric_convergence_sampled() {
    common::check_geometric_convergence(500, 11).unwrap();
}

#[test]
fn transit_pair_identities_sampled() {
    common::check_transit_pair(10_000, 12).unwrap();
}

#[test]
fn inference_fixed_point_and_blocking() {
    common::check_inference(2_000, 13).unwrap();
}

#[test]
fn ideal_environment_reduces_to_plain_update() {
    common::check_env_reduction(5_000, 14).unwrap();
}
