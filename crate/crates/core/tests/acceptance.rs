//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::f64::consts::PI;
use std::process::ExitCode;

use masqkd_core::adversary::{eve_information, random_s2, random_undetectable_s2, Attack, Leg, MeasureBasis};
use masqkd_core::harness::{compare_protocols, run_experiment, run_experiment_with_workers};
use masqkd_core::postprocess::{key_rate_estimate, sift};
use masqkd_core::protocol::{
    run_protocol, shared_bit_base, shared_bit_improved, BobChoice, Case, RoundEngine, RoundRecord, TpResult, XOutcome,
};
use masqkd_core::quantum::{apply_gate, basis_state, outcome_probabilities, Basis, Gate, StateLabel};
use masqkd_core::rng::{Stream, ATTACK_SAMPLING_STREAM};
use masqkd_core::{AttackModel, ExperimentConfig, ProtocolKind};
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// |observed − p| ≤ 4σ for a binomial proportion over `trials`.
fn within_4_sigma(successes: usize, trials: usize, p: f64) -> (bool, f64, f64) {
    let observed = successes as f64 / trials as f64;
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    ((observed - p).abs() <= 4.0 * sigma, observed, sigma)
}

fn honest(kind: ProtocolKind, n: u64, seed: u64) -> Vec<RoundRecord> {
    run_protocol(&ExperimentConfig::new(kind, n, seed))
        .expect("honest run")
        .rounds
}

fn c1_base_honest() -> Outcome {
    let rounds = honest(ProtocolKind::Base, 2000, 11);
    let case1: Vec<_> = rounds.iter().filter(|r| r.case == Case::Case1).collect();
    let case1_errors = case1.iter().filter(|r| r.check_error).count();
    let case2: Vec<_> = rounds.iter().filter(|r| r.case == Case::Case2).collect();
    let all_match = case2.iter().all(|r| {
        let (a, b) = (r.alice.measured_bit.unwrap(), r.bob_measured_bit().unwrap());
        a == b && r.shared_bit == shared_bit_base(a, b)
    });
    let sifted = rounds.iter().filter(|r| r.shared_bit.is_some()).count();
    let (ok, frac, sigma) = within_4_sigma(sifted, rounds.len(), 0.25);
    check(
        case1_errors == 0 && all_match && ok,
        format!(
            "case1 errors {case1_errors}/{}, case2 all match {all_match}, sifted fraction {frac:.4} (1/4 ± 4·{sigma:.4})",
            case1.len()
        ),
    )
}

fn c2_improved_honest() -> Outcome {
    let rounds = honest(ProtocolKind::Improved, 2000, 12);
    let case1_failures = rounds.iter().filter(|r| r.case == Case::Case1 && r.check_error).count();
    let mut case2 = 0;
    let mut bad = 0;
    for r in rounds.iter().filter(|r| r.case == Case::Case2) {
        case2 += 1;
        let BobChoice::Improved { sigma_z, .. } = r.bob else {
            unreachable!()
        };
        let a = r.alice.measured_bit.unwrap();
        let Some(TpResult::XBasis(x)) = r.tp_result else {
            unreachable!()
        };
        let expected = if (a == 1) ^ sigma_z {
            XOutcome::Minus
        } else {
            XOutcome::Plus
        };
        let (bit, inferred) = shared_bit_improved(a, x);
        if inferred != sigma_z || x != expected || r.shared_bit != Some(bit) {
            bad += 1;
        }
    }
    check(
        case1_failures == 0 && bad == 0 && case2 > 0,
        format!("case1 failures {case1_failures}, case2 rounds {case2} with {bad} deviating from the table"),
    )
}

fn c3_tables() -> Outcome {
    let base_rows = [((0, 0), Some(0)), ((1, 1), Some(1)), ((0, 1), None), ((1, 0), None)];
    let base_ok = base_rows.iter().all(|&((a, b), e)| shared_bit_base(a, b) == e);
    let improved_rows = [
        ((0, XOutcome::Minus), (0, true)),
        ((0, XOutcome::Plus), (1, false)),
        ((1, XOutcome::Plus), (0, true)),
        ((1, XOutcome::Minus), (1, false)),
    ];
    let improved_ok = improved_rows.iter().all(|&((a, x), e)| shared_bit_improved(a, x) == e);
    check(
        base_ok && improved_ok,
        format!("base table rows exact: {base_ok}; improved table rows exact: {improved_ok}"),
    )
}

fn c4_efficiency() -> Outcome {
    let c = compare_protocols(2000, 21, None).map_err(|e| e.to_string())?;
    let base = c.row("base").unwrap().eta_final_over_prepared.unwrap();
    let krawec = c.row("krawec").unwrap().eta_raw_over_prepared.unwrap();
    let base_ok = ((base - 1.0 / 12.0) * 12.0).abs() <= 0.10;
    let krawec_ok = ((krawec - 1.0 / 24.0) * 24.0).abs() <= 0.15;
    let conventions: Vec<String> = c
        .rows
        .iter()
        .map(|r| {
            format!(
                "{}: {}",
                r.protocol,
                r.reproduced_by.as_deref().unwrap_or("not-simulated")
            )
        })
        .collect();
    check(
        base_ok && krawec_ok,
        format!(
            "base final/prepared {base:.5} (1/12 = {:.5}), krawec raw/prepared {krawec:.5} (1/24 = {:.5}); reproduced by [{}]",
            1.0 / 12.0,
            1.0 / 24.0,
            conventions.join(", ")
        ),
    )
}

/// Case 1 statistics of `attack` on the base protocol over `rounds` rounds.
fn case1_stats(attack: &AttackModel, seed: u64, rounds: u64) -> (usize, usize) {
    let engine = RoundEngine::new(ProtocolKind::Base, attack.clone()).expect("valid attack");
    (0..rounds)
        .into_par_iter()
        .map(|i| {
            let r = engine.run_round(seed, i).expect("round");
            match r.case {
                Case::Case1 => (1, usize::from(r.check_error)),
                _ => (0, 0),
            }
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

fn c5_strategy1() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (label, theta) in [
        ("0", 0.0),
        ("π/12", PI / 12.0),
        ("π/8", PI / 8.0),
        ("π/6", PI / 6.0),
        ("π/4", PI / 4.0),
    ] {
        let attack = AttackModel::s1_theta(theta);
        let (case1, errors) = case1_stats(&attack, 500, 88_000);
        let p = theta.sin().powi(2);
        let (within, observed, _) = within_4_sigma(errors, case1, p);
        ok &= within && case1 >= 20_000;
        lines.push(format!("θ={label}: {observed:.4} vs {p:.4} over {case1}"));
    }
    let chi0 = eve_information(&AttackModel::s1_theta(0.0), ProtocolKind::Base)
        .map_err(|e| e.to_string())?
        .unwrap()
        .holevo_bits;
    ok &= chi0.abs() < 1e-9;
    lines.push(format!("χ(θ=0) = {chi0:.2e}"));
    check(ok, lines.join("; "))
}

fn c6_c7_strategy2() -> (Outcome, Outcome) {
    let mut stream = Stream::new(606, ATTACK_SAMPLING_STREAM);
    let mut random_fail = 0;
    let mut worst_z = 0.0f64;
    for k in 0..100 {
        let attack = random_s2(&mut stream, Leg::AliceToBob);
        let p = attack.predicted_case1_error(ProtocolKind::Base);
        let (case1, errors) = case1_stats(&attack, 1000 + k, 4000);
        let observed = errors as f64 / case1 as f64;
        let sigma = (p * (1.0 - p) / case1 as f64).sqrt();
        // One count of slack for the discreteness of the estimate.
        let slack = 4.0 * sigma + 1.0 / case1 as f64;
        worst_z = worst_z.max((observed - p).abs() / sigma.max(f64::MIN_POSITIVE));
        if (observed - p).abs() > slack {
            random_fail += 1;
        }
    }

    let mut und_fail = 0;
    let mut max_pred = 0.0f64;
    let mut max_chi = 0.0f64;
    let mut empirical_errors = 0;
    let mut max_norm_gap = 0.0f64;
    for k in 0..100 {
        let attack = random_undetectable_s2(&mut stream, Leg::AliceToBob);
        let pred = attack.predicted_case1_error(ProtocolKind::Base);
        let chi = match eve_information(&attack, ProtocolKind::Base) {
            Ok(Some(info)) => info.holevo_bits,
            _ => f64::INFINITY,
        };
        let (_, errors) = case1_stats(&attack, 2000 + k, 2000);
        empirical_errors += errors;
        max_pred = max_pred.max(pred.abs());
        max_chi = max_chi.max(chi.abs());
        if pred.abs() > 1e-9 || chi.abs() > 1e-9 || errors > 0 {
            und_fail += 1;
        }
        if let Attack::CollectiveS2 { v0, v1, w0, w1 } = &attack.attack {
            let norm = |v: &[masqkd_core::C64; 4]| v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            max_norm_gap = max_norm_gap
                .max((norm(v0) - norm(w1)).abs())
                .max((norm(v1) - norm(w0)).abs());
        }
    }
    let c6 = check(
        random_fail == 0 && und_fail == 0,
        format!(
            "random: {random_fail}/100 outside 4σ (max |z| {worst_z:.2}); undetectable: {und_fail}/100 failing, max predicted {max_pred:.1e}, max χ {max_chi:.1e}, empirical errors {empirical_errors}"
        ),
    );
    let c7 = check(
        max_norm_gap < 1e-9,
        format!("max(|‖v0‖−‖w1‖|, |‖v1‖−‖w0‖|) over 100 outputs = {max_norm_gap:.1e}"),
    );
    (c6, c7)
}

fn c8_intercept_resend() -> Outcome {
    let config = ExperimentConfig::new(ProtocolKind::Base, 2000, 8)
        .with_attack(AttackModel::intercept_resend(MeasureBasis::Z, Leg::AliceToBob));
    let report = run_experiment(&config).map_err(|e| e.to_string())?;
    let (within, observed, _) = within_4_sigma(report.case1_errors as usize, report.case_counts.case1 as usize, 0.5);
    check(
        within && report.abort,
        format!(
            "case1 error rate {observed:.4} over {} rounds (0.5 ± 4σ), abort {}",
            report.case_counts.case1, report.abort
        ),
    )
}

fn c9_krawec() -> Outcome {
    let rounds = honest(ProtocolKind::KrawecRef, 2000, 9);
    let case1: Vec<_> = rounds.iter().filter(|r| r.case == Case::Case1).collect();
    let case1_plus = case1.iter().all(|r| r.tp_result == Some(TpResult::Message(1)));
    let shared = rounds.iter().filter(|r| r.shared_bit.is_some()).count();
    let (within, yield_, _) = within_4_sigma(shared, rounds.len(), 1.0 / 8.0);
    check(
        case1_plus && within && !case1.is_empty(),
        format!(
            "{} both-reflect rounds all +1: {case1_plus}; shared-bit yield {yield_:.4} (1/8 ± 4σ)",
            case1.len()
        ),
    )
}

fn c10_reduction() -> Outcome {
    let rounds = honest(ProtocolKind::Base, 2000, 10);
    let case1: Vec<_> = rounds.iter().filter(|r| r.case == Case::Case1).collect();
    // Bob's H followed by Z measurement is an X measurement of what Alice reflected.
    let all_plus = case1.iter().all(|r| r.bob_measured_bit() == Some(0) && !r.check_error);
    let plus = basis_state(StateLabel::Plus);
    let p_plus = outcome_probabilities(&plus, &Basis::x(), &[0]).map_err(|e| e.to_string())?[0];
    let via_h = apply_gate(&plus, &Gate::hadamard(), 0).map_err(|e| e.to_string())?;
    let p_zero = outcome_probabilities(&via_h, &Basis::z(), &[0]).map_err(|e| e.to_string())?[0];
    check(
        all_plus && (p_plus - 1.0).abs() < 1e-12 && (p_zero - 1.0).abs() < 1e-12,
        format!(
            "{} Case 1 rounds all yield + : {all_plus}; P(+) = {p_plus:.15}, P(0 after H) = {p_zero:.15}",
            case1.len()
        ),
    )
}

fn c11_key_rate() -> Outcome {
    let exact = key_rate_estimate(0.0, 0.0) == 1.0 && key_rate_estimate(0.0, 1.0) == 0.0;
    let grid: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
    let qs: Vec<f64> = grid.iter().map(|g| g * 0.5).collect();
    let mut monotone = true;
    for i in 0..20 {
        for j in 0..20 {
            let r = key_rate_estimate(qs[i], grid[j]);
            if i + 1 < 20 && key_rate_estimate(qs[i + 1], grid[j]) > r {
                monotone = false;
            }
            if j + 1 < 20 && key_rate_estimate(qs[i], grid[j + 1]) > r {
                monotone = false;
            }
        }
    }
    check(
        exact && monotone,
        format!("r(0,0)=1 and r(0,1)=0 exactly: {exact}; nonincreasing on 20×20 grid: {monotone}"),
    )
}

fn c12_determinism() -> Outcome {
    let mut stream = Stream::new(12, ATTACK_SAMPLING_STREAM);
    let configs = [
        ExperimentConfig::new(ProtocolKind::Base, 500, 1),
        ExperimentConfig::new(ProtocolKind::Improved, 500, 2).with_attack(AttackModel::s1_theta(0.1)),
        ExperimentConfig::new(ProtocolKind::Base, 500, 3).with_attack(random_s2(&mut stream, Leg::AliceToBob)),
        ExperimentConfig::new(ProtocolKind::KrawecRef, 500, 4),
    ];
    let mut identical = 0;
    for config in &configs {
        let runs: Vec<String> = [Some(1), Some(1), Some(4), None]
            .iter()
            .map(|&w| {
                run_experiment_with_workers(config, w)
                    .and_then(|r| r.to_json_without_wall_time())
                    .map_err(|e| e.to_string())
            })
            .collect::<Result<_, _>>()?;
        if runs.iter().all(|r| r == &runs[0]) {
            identical += 1;
        }
    }
    let key_len = sift(&run_protocol(&configs[0]).map_err(|e| e.to_string())?).len();
    check(
        identical == configs.len(),
        format!(
            "{identical}/{} configs byte-identical across reruns and 1/4/default workers (sifted {key_len} bits)",
            configs.len()
        ),
    )
}

fn main() -> ExitCode {
    let (c6, c7) = c6_c7_strategy2();
    let results = [
        ("1 honest base run", c1_base_honest()),
        ("2 honest improved run", c2_improved_honest()),
        ("3 sharing-bit tables", c3_tables()),
        ("4 qubit efficiency", c4_efficiency()),
        ("5 strategy 1 security", c5_strategy1()),
        ("6 strategy 2 security", c6),
        ("7 undetectable norm relations", c7),
        ("8 intercept-resend detection", c8_intercept_resend()),
        ("9 reference protocol statistics", c9_krawec()),
        ("10 reduction property", c10_reduction()),
        ("11 key-rate estimator", c11_key_rate()),
        ("12 determinism", c12_determinism()),
    ];
    let mut failed = 0;
    for (name, result) in &results {
        match result {
            Ok(detail) => println!("criterion {name}: PASS — {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL — {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
