//! Detection statistics over repeated attacked sessions.

use mdi_qss::adversary::{measure_detection_rate, AttackKind};
use mdi_qss::ghz::AnalyzerOutcome;
use mdi_qss::protocol::{run_session, RoundKind, SessionConfig};
use mdi_qss::quantum::PauliBasis;

fn detection_config(master_seed: u64) -> SessionConfig {
    SessionConfig {
        k1: 1,
        k2: 400,
        max_check_rounds: Some(16),
        master_seed,
        ..SessionConfig::default()
    }
}

#[test]
fn intercept_resend_errs_on_a_quarter_of_checks() {
    let stats =
        measure_detection_rate(&detection_config(301), AttackKind::InterceptResend, 150).unwrap();
    assert!(stats.checked_rounds >= 2_000, "{}", stats.checked_rounds);
    let rate = stats.per_check_error_rate;
    assert!((rate - 0.25).abs() < 0.03, "per-check rate {rate}");
    assert!(stats.detection_rate > 0.95, "{}", stats.detection_rate);
}

#[test]
fn substitution_attack_is_caught_as_often_as_interception() {
    let config = detection_config(302);
    let intercept =
        measure_detection_rate(&config, AttackKind::InterceptResend, 150).unwrap();
    let teleport =
        measure_detection_rate(&config, AttackKind::TeleportationBased, 150).unwrap();
    let per_gap = (teleport.per_check_error_rate - intercept.per_check_error_rate).abs();
    assert!(per_gap < 0.04, "per-check gap {per_gap}");
    let detect_gap = (teleport.detection_rate - intercept.detection_rate).abs();
    assert!(detect_gap < 0.05, "detection gap {detect_gap}");
}

#[test]
fn clean_channels_raise_no_alarms() {
    let config = SessionConfig {
        k1: 10,
        k2: 50,
        master_seed: 303,
        ..SessionConfig::default()
    };
    let stats = measure_detection_rate(&config, AttackKind::None, 50).unwrap();
    assert_eq!(stats.aborted, 0);
    assert_eq!(stats.check_errors, 0);
    assert_eq!(stats.detection_rate, 0.0);
    assert!(stats.checked_rounds > 200);
}

// The substituting receiver reads each intercepted decoy in a random basis,
// so his belief matches the actual preparation only half the time.
#[test]
fn intercepted_decoy_beliefs_sit_at_chance_level() {
    let config = SessionConfig {
        k1: 1,
        k2: 2_000,
        attack: AttackKind::TeleportationBased,
        error_threshold: 1.0,
        master_seed: 304,
        ..SessionConfig::default()
    };
    let transcript = run_session(&config).unwrap();
    let mut sampled = 0usize;
    let mut exact = 0usize;
    let mut same_basis = 0usize;
    for round in &transcript.rounds {
        if round.slot.kind() != RoundKind::Decoy {
            continue;
        }
        let mdi_qss::protocol::SequenceSlot::Decoy { prepared } = round.slot else {
            unreachable!();
        };
        if !matches!(round.outcome, AnalyzerOutcome::Success { .. }) {
            continue;
        }
        let belief = round.attack_inference.unwrap();
        sampled += 1;
        exact += usize::from(belief == prepared);
        same_basis += usize::from(belief.basis == prepared.basis);
        // A matching basis reads the state exactly; a mismatched one lands
        // on the wrong axis entirely.
        if belief.basis == prepared.basis {
            assert_eq!(belief, prepared);
        }
        let _: PauliBasis = belief.basis;
    }
    assert!(sampled > 300, "only {sampled} decoy successes");
    let exact_rate = exact as f64 / sampled as f64;
    let basis_rate = same_basis as f64 / sampled as f64;
    assert!((exact_rate - 0.5).abs() < 0.08, "exact rate {exact_rate}");
    assert!((basis_rate - 0.5).abs() < 0.08, "basis rate {basis_rate}");
}
