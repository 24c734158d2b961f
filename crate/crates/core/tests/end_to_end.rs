use masqkd_core::adversary::{Leg, MeasureBasis};
use masqkd_core::harness::{run_experiment, run_experiment_with_workers, sweep};
use masqkd_core::postprocess::{estimate_and_decide, sift, undisclosed_bits};
use masqkd_core::protocol::{run_protocol, Payload};
use masqkd_core::{load_config, AttackModel, ExperimentConfig, ProtocolKind};
use serde_json::json;

#[test]
fn sifted_bits_are_balanced() {
    let t = run_protocol(&ExperimentConfig::new(ProtocolKind::Improved, 1500, 5)).unwrap();
    let key = sift(&t);
    assert!(key.len() >= 2000);
    let ones = key.bits.iter().filter(|&&b| b == 1).count() as f64;
    let n = key.len() as f64;
    assert!((ones / n - 0.5).abs() <= 4.0 * (0.25 / n).sqrt());
}

#[test]
fn transcript_is_schedule_independent() {
    let config = ExperimentConfig::new(ProtocolKind::KrawecRef, 300, 77);
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_protocol(&config).unwrap());
    let parallel = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| run_protocol(&config).unwrap());
    assert_eq!(serial, parallel);
    assert!(serial.rounds.iter().enumerate().all(|(i, r)| r.round_index == i as u64));
}

#[test]
fn classical_log_announces_before_discussion() {
    let t = run_protocol(&ExperimentConfig::new(ProtocolKind::Improved, 20, 3)).unwrap();
    let first_discussion = t
        .classical_messages
        .iter()
        .position(|m| matches!(m.payload, Payload::Operation { .. }))
        .unwrap();
    assert!(t.classical_messages[..first_discussion]
        .iter()
        .all(|m| matches!(m.payload, Payload::TpPublication { .. })));
    assert_eq!(first_discussion, 160);
}

#[test]
fn s1_quarter_detection_aborts() {
    let theta = 0.25f64.sqrt().asin();
    let config = ExperimentConfig::new(ProtocolKind::Base, 1000, 7).with_attack(AttackModel::s1_theta(theta));
    let r = run_experiment(&config).unwrap();
    let rate = r.case1_error_rate.unwrap();
    let sigma = (0.25 * 0.75 / r.case_counts.case1 as f64).sqrt();
    assert!((rate - 0.25).abs() <= 4.0 * sigma);
    assert!(r.abort);
}

#[test]
fn intercept_resend_key_mismatches_are_tracked() {
    let config = ExperimentConfig::new(ProtocolKind::Base, 1000, 2)
        .with_attack(AttackModel::intercept_resend(MeasureBasis::X, Leg::AliceToBob));
    let t = run_protocol(&config).unwrap();
    let check = estimate_and_decide(&t, 0.02).unwrap();
    assert_eq!(check.case1_errors, 0);
    assert!(check.case2_true_mismatch_count > 0);
    assert!(check.case2_mismatch_count <= check.case2_true_mismatch_count);
    assert!(check.abort);
    let key = sift(&t);
    assert_eq!(key.len() + key.mismatched_rounds.len(), check.candidate_rounds as usize);
    assert!(undisclosed_bits(&key, &check).len() <= key.len());
}

#[test]
fn reports_match_across_worker_counts() {
    let config = ExperimentConfig::new(ProtocolKind::Base, 200, 19).with_attack(AttackModel::s1_theta(0.05));
    let a = run_experiment_with_workers(&config, Some(1)).unwrap();
    let b = run_experiment_with_workers(&config, Some(2)).unwrap();
    assert_eq!(
        a.to_json_without_wall_time().unwrap(),
        b.to_json_without_wall_time().unwrap()
    );
}

#[test]
fn config_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("masqkd-config-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("config.json");
    let config = ExperimentConfig::new(ProtocolKind::Improved, 12, 4)
        .with_attack(AttackModel::intercept_resend(MeasureBasis::Z, Leg::BobToTp));
    std::fs::write(&path, config.to_json()).unwrap();
    assert_eq!(load_config(&path).unwrap(), config);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn sweep_columns_are_stable_across_parameters() {
    let base = json!({"protocol": "base", "n": 20, "seed": 1, "threshold": 0.02});
    let header = |path: &str, v| {
        let csv = sweep(&base, path, &[v]).unwrap().to_csv().unwrap();
        csv.lines().next().unwrap().to_string()
    };
    assert_eq!(header("n", json!(30)), header("threshold", json!(0.1)));
}
