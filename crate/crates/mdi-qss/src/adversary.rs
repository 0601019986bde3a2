//! Attacks a corrupt receiver can mount on the sender's in-transit photons,
//! and the harness that measures how often the security check catches them.

use crate::ghz::{allowed_label_set, GhzLabel, ProductStateSpec};
use crate::protocol::{run_session, ProtocolError, RoundKind, SessionConfig, Verdict};
use crate::quantum::{bell_phi_minus, Eigenstate, PauliBasis, StateVector};
use crate::seed::derive_seed;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    #[default]
    None,
    InterceptResend,
    #[serde(rename = "teleport")]
    TeleportationBased,
}

/// Measures the in-transit qubit of `joint` in a uniformly random X/Y basis
/// and splices a fresh photon in the observed eigenstate back into its place.
///
/// Returns the joint state after the substitution and the resent photon. Any
/// entanglement the measured photon carried is broken by the measurement.
pub fn intercept_resend_tap(
    joint: &StateVector,
    transit_qubit: usize,
    rng: &mut impl Rng,
) -> (StateVector, Eigenstate) {
    let basis = if rng.gen::<bool>() {
        PauliBasis::X
    } else {
        PauliBasis::Y
    };
    let (sign, reduced) = joint
        .measure_in_basis(transit_qubit, basis, rng)
        .expect("transit qubit exists in the joint state");
    let resent = Eigenstate::new(basis, sign);
    let joint = if joint.num_qubits() == 1 {
        resent.state_vector()
    } else {
        reduced.insert_qubit(transit_qubit, &resent.state_vector())
    };
    (joint, resent)
}

/// The four maximally entangled two-photon states, named so that `PhiMinus`
/// is the shared-pair state `bell_phi_minus`: the phi family is
/// (|01⟩ ± |10⟩)/√2 and the psi family is (|00⟩ ± |11⟩)/√2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BellOutcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
    ];

    pub fn state_vector(self) -> StateVector {
        if self == BellOutcome::PhiMinus {
            return bell_phi_minus();
        }
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        match self {
            BellOutcome::PhiPlus => {
                amps[0b01] = Complex64::new(r, 0.0);
                amps[0b10] = Complex64::new(r, 0.0);
            }
            BellOutcome::PsiPlus => {
                amps[0b00] = Complex64::new(r, 0.0);
                amps[0b11] = Complex64::new(r, 0.0);
            }
            BellOutcome::PsiMinus => {
                amps[0b00] = Complex64::new(r, 0.0);
                amps[0b11] = Complex64::new(-r, 0.0);
            }
            BellOutcome::PhiMinus => unreachable!(),
        }
        StateVector::from_amplitudes(amps).expect("Bell amplitudes are normalized")
    }
}

/// Projective measurement of two qubits in the maximally entangled basis.
/// Both measured qubits are removed; the residual covers the remaining
/// qubits (scalar marker when none remain).
pub fn bell_measure(
    joint: &StateVector,
    qubits: (usize, usize),
    rng: &mut impl Rng,
) -> (BellOutcome, StateVector) {
    let subsystem = [qubits.0, qubits.1];
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    let mut last_nonzero = None;
    for outcome in BellOutcome::ALL {
        let (p, residual) = joint
            .project(&subsystem, &outcome.state_vector())
            .expect("both qubits exist in the joint state");
        if let Some(residual) = residual {
            cumulative += p;
            let hit = u < cumulative;
            last_nonzero = Some((outcome, residual));
            if hit {
                break;
            }
        } else {
            cumulative += p;
        }
    }
    // Completeness of the four projectors puts the cumulative at 1 up to
    // rounding; a draw in the rounding gap lands on the last populated
    // outcome.
    last_nonzero.expect("state has unit norm")
}

/// Fresh shared pairs for every targeted round.
///
/// Each element is one two-qubit pair: qubit 0 is the half the attacker keeps
/// and qubit 1 is the substitute half forwarded to the analyzer in place of
/// the sender's photon. The two halves share amplitudes, so the kept and
/// substitute sequences travel together as one vector per round, with fixed
/// qubit roles and preserved round order.
pub fn teleportation_attack_setup(k_rounds: usize, _rng: &mut impl Rng) -> Vec<StateVector> {
    (0..k_rounds).map(|_| bell_phi_minus()).collect()
}

/// Maps the kept half's post-analysis state to the sender's photon state,
/// keyed by the collective measurement outcome.
///
/// Measuring the intercepted photon and the kept half in the pair state
/// itself (`PhiMinus`) swaps the correlation through unchanged; the other
/// outcomes flip the sign on one or both axes.
pub fn teleport_correction(outcome: BellOutcome, collapsed: Eigenstate) -> Eigenstate {
    let flip = match (outcome, collapsed.basis) {
        (BellOutcome::PhiMinus, _) => false,
        (BellOutcome::PhiPlus, _) => true,
        (BellOutcome::PsiPlus, PauliBasis::X) => true,
        (BellOutcome::PsiPlus, PauliBasis::Y) => false,
        (BellOutcome::PsiMinus, PauliBasis::X) => false,
        (BellOutcome::PsiMinus, PauliBasis::Y) => true,
        (_, PauliBasis::Z) => unreachable!("collapsed pair halves are X/Y eigenstates"),
    };
    if flip {
        collapsed.flipped()
    } else {
        collapsed
    }
}

/// The attacker's measurement on one successful round: the intercepted photon
/// `a_qubit` and the kept pair half `s2_qubit` inside `joint`.
///
/// `kept_collapse` is the kept half's post-analysis state, which the attacker
/// derives from the announced label and the receiver states he learns during
/// decoding. Pair rounds get a collective Bell measurement of the two
/// photons, which hands over the sender's retained-photon state up to the
/// outcome correction. Decoy rounds carry no correlated partner, so the
/// intercepted photon is measured in a random basis instead, and the kept
/// half is cleared along its own collapse axis.
///
/// Returns the inferred state of the sender's photon and the residual with
/// both measured qubits removed.
pub fn teleportation_attack_infer(
    joint: &StateVector,
    a_qubit: usize,
    s2_qubit: usize,
    kind: RoundKind,
    kept_collapse: Eigenstate,
    rng: &mut impl Rng,
) -> (Eigenstate, StateVector) {
    match kind {
        RoundKind::PairHalf => {
            let (outcome, residual) = bell_measure(joint, (a_qubit, s2_qubit), rng);
            (teleport_correction(outcome, kept_collapse), residual)
        }
        RoundKind::Decoy => {
            let basis = if rng.gen::<bool>() {
                PauliBasis::X
            } else {
                PauliBasis::Y
            };
            let (sign, reduced) = joint
                .measure_in_basis(a_qubit, basis, rng)
                .expect("intercepted qubit exists in the joint state");
            let inferred = Eigenstate::new(basis, sign);
            // Removing a_qubit shifts later indices down by one.
            let s2_after = if s2_qubit > a_qubit { s2_qubit - 1 } else { s2_qubit };
            let (s2_sign, residual) = reduced
                .measure_in_basis(s2_after, kept_collapse.basis, rng)
                .expect("kept qubit exists in the joint state");
            debug_assert_eq!(
                s2_sign, kept_collapse.sign,
                "kept half must sit in its collapsed eigenstate"
            );
            let residual = if reduced.num_qubits() == 1 {
                StateVector::scalar()
            } else {
                residual
            };
            (inferred, residual)
        }
    }
}

/// Sign announcement the corrupt receiver makes for a successful decoy round.
///
/// He announces last, with his honest basis, after seeing the other
/// receivers' states. Using his belief about the sender's decoy in place of
/// the real one, he announces whichever sign of his true preparation keeps
/// the announced label inside the allowed set; when the belief tuple cannot
/// discriminate (both signs allowed), he falls back to honesty.
pub fn teleport_announcement(
    belief: Eigenstate,
    receiver_index: usize,
    receivers: &[Eigenstate],
    label: GhzLabel,
) -> Eigenstate {
    let honest = receivers[receiver_index];
    let mut passing = Vec::new();
    for candidate in [honest, honest.flipped()] {
        let mut photons = Vec::with_capacity(receivers.len() + 1);
        photons.push(belief);
        photons.extend_from_slice(receivers);
        photons[1 + receiver_index] = candidate;
        let spec = ProductStateSpec::new(photons).expect("protocol states are X/Y");
        if allowed_label_set(&spec).contains(&label) {
            passing.push(candidate);
        }
    }
    match passing.as_slice() {
        [only] => *only,
        _ => honest,
    }
}

/// Aggregated outcome of repeated attacked sessions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionStats {
    pub sessions: usize,
    pub aborted: usize,
    pub checked_rounds: usize,
    pub check_errors: usize,
    pub per_check_error_rate: f64,
    pub detection_rate: f64,
}

/// Runs `trials` independent sessions of `config` with `attack` installed and
/// aggregates the security-check statistics. Each trial reseeds from the
/// master seed, so the whole measurement is reproducible.
pub fn measure_detection_rate(
    config: &SessionConfig,
    attack: AttackKind,
    trials: usize,
) -> Result<DetectionStats, ProtocolError> {
    if trials == 0 {
        return Err(ProtocolError::InvalidConfig(
            "detection measurement needs at least one trial".to_string(),
        ));
    }
    let mut aborted = 0;
    let mut checked_rounds = 0;
    let mut check_errors = 0;
    for trial in 0..trials {
        let mut trial_config = config.clone();
        trial_config.attack = attack;
        trial_config.master_seed = derive_seed(config.master_seed, &format!("trial-{trial}"));
        let transcript = run_session(&trial_config)?;
        checked_rounds += transcript.check.checked;
        check_errors += transcript.check.errors;
        if transcript.check.verdict == Verdict::Abort {
            aborted += 1;
        }
    }
    let per_check_error_rate = if checked_rounds == 0 {
        0.0
    } else {
        check_errors as f64 / checked_rounds as f64
    };
    Ok(DetectionStats {
        sessions: trials,
        aborted,
        checked_rounds,
        check_errors,
        per_check_error_rate,
        detection_rate: aborted as f64 / trials as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ghz::collapse_reference;
    use crate::quantum::{Sign, XY_EIGENSTATES};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(s: &str) -> Eigenstate {
        s.parse().unwrap()
    }

    #[test]
    fn attack_kind_tokens() {
        let tokens: Vec<String> = [
            AttackKind::None,
            AttackKind::InterceptResend,
            AttackKind::TeleportationBased,
        ]
        .iter()
        .map(|k| serde_json::to_string(k).unwrap())
        .collect();
        assert_eq!(tokens, ["\"none\"", "\"intercept-resend\"", "\"teleport\""]);
        assert_eq!(
            serde_json::from_str::<AttackKind>("\"teleport\"").unwrap(),
            AttackKind::TeleportationBased
        );
    }

    #[test]
    fn tap_in_the_preparation_basis_is_transparent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let joint = StateVector::tensor(&[e("+x").state_vector(), e("-y").state_vector()]);
        let mut seen_x_tap = false;
        for _ in 0..100 {
            let (tapped, resent) = intercept_resend_tap(&joint, 0, &mut rng);
            if resent.basis == PauliBasis::X {
                seen_x_tap = true;
                assert_eq!(resent, e("+x"));
                assert!(tapped.max_amp_diff(&joint) < 1e-12);
            }
        }
        assert!(seen_x_tap);
    }

    #[test]
    fn tap_in_the_conjugate_basis_resends_uniform_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let joint = e("+x").state_vector().insert_qubit(1, &e("+x").state_vector());
        let trials = 10_000;
        let mut y_taps = 0;
        let mut y_plus = 0;
        for _ in 0..trials {
            let (_, resent) = intercept_resend_tap(&joint, 0, &mut rng);
            if resent.basis == PauliBasis::Y {
                y_taps += 1;
                if resent.sign == Sign::Plus {
                    y_plus += 1;
                }
            }
        }
        assert_abs_diff_eq!(y_taps as f64 / trials as f64, 0.5, epsilon = 0.02);
        assert_abs_diff_eq!(y_plus as f64 / y_taps as f64, 0.5, epsilon = 0.02);
    }

    #[test]
    fn tap_breaks_pair_correlations() {
        // Measuring one half of the shared pair collapses the other half to
        // the anticorrelated eigenstate of the tap basis.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let (tapped, resent) = intercept_resend_tap(&bell_phi_minus(), 1, &mut rng);
            let (p, kept) = tapped
                .project(&[1], &resent.state_vector())
                .unwrap();
            assert_abs_diff_eq!(p, 1.0, epsilon = 1e-12);
            assert_eq!(
                kept.unwrap().as_eigenstate().unwrap(),
                resent.flipped()
            );
        }
    }

    #[test]
    fn setup_pairs_are_the_shared_pair_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pairs = teleportation_attack_setup(5, &mut rng);
        assert_eq!(pairs.len(), 5);
        for pair in &pairs {
            assert_abs_diff_eq!(
                pair.inner(&bell_phi_minus()).re,
                1.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn bell_measurement_identifies_each_basis_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for outcome in BellOutcome::ALL {
            for _ in 0..20 {
                let (seen, residual) = bell_measure(&outcome.state_vector(), (0, 1), &mut rng);
                assert_eq!(seen, outcome);
                assert!(residual.is_scalar());
            }
        }
    }

    #[test]
    fn correction_table_matches_projection_for_every_outcome() {
        // Pair ⊗ eigenstate, collective measurement on the far halves: the
        // retained qubit must land exactly on the corrected inference.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut counts = std::collections::HashMap::new();
        let trials = 400;
        for collapsed in XY_EIGENSTATES {
            for _ in 0..trials {
                let joint =
                    StateVector::tensor(&[bell_phi_minus(), collapsed.state_vector()]);
                let (outcome, residual) = bell_measure(&joint, (1, 2), &mut rng);
                let retained = residual.as_eigenstate().unwrap();
                assert_eq!(retained, teleport_correction(outcome, collapsed));
                *counts.entry(outcome).or_insert(0usize) += 1;
            }
        }
        // All four outcomes occur at 1/4 each.
        for outcome in BellOutcome::ALL {
            let n = counts[&outcome] as f64;
            assert_abs_diff_eq!(n / (4.0 * trials as f64), 0.25, epsilon = 0.04);
        }
    }

    #[test]
    fn pair_round_inference_recovers_the_retained_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for a in XY_EIGENSTATES {
            for b in XY_EIGENSTATES {
                for bits in [0u16, 1] {
                    let label = GhzLabel::new(3, bits).unwrap();
                    let kept_collapse = collapse_reference(label, &[a, b]).unwrap();
                    // Post-analysis state of a substituted pair round: the
                    // sender's untouched pair and the kept half's collapse.
                    let joint = StateVector::tensor(&[
                        bell_phi_minus(),
                        kept_collapse.state_vector(),
                    ]);
                    let (inferred, residual) = teleportation_attack_infer(
                        &joint,
                        1,
                        2,
                        RoundKind::PairHalf,
                        kept_collapse,
                        &mut rng,
                    );
                    assert_eq!(residual.as_eigenstate().unwrap(), inferred);
                }
            }
        }
    }

    #[test]
    fn decoy_round_inference_is_chance_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let trials = 10_000;
        let mut basis_hits = 0;
        for i in 0..trials {
            let decoy = XY_EIGENSTATES[i % 4];
            let kept_collapse = XY_EIGENSTATES[(i / 4) % 4];
            let joint = StateVector::tensor(&[
                decoy.state_vector(),
                kept_collapse.state_vector(),
            ]);
            let (inferred, residual) = teleportation_attack_infer(
                &joint,
                0,
                1,
                RoundKind::Decoy,
                kept_collapse,
                &mut rng,
            );
            assert!(residual.is_scalar());
            if inferred.basis == decoy.basis {
                basis_hits += 1;
                // Matching basis reads the decoy exactly.
                assert_eq!(inferred, decoy);
            }
        }
        assert_abs_diff_eq!(basis_hits as f64 / trials as f64, 0.5, epsilon = 0.02);
    }

    #[test]
    fn announcement_policy_passes_when_the_belief_is_right() {
        // Correct belief, even-basis tuple: the chosen sign always keeps the
        // label allowed, whatever the label's sign bit says.
        let receivers = [e("+x"), e("-x")];
        for decoy in [e("+x"), e("-x")] {
            for bits in [0u16, 1] {
                let label = GhzLabel::new(3, bits).unwrap();
                let announced = teleport_announcement(decoy, 0, &receivers, label);
                assert_eq!(announced.basis, receivers[0].basis);
                let spec = ProductStateSpec::new(vec![decoy, announced, receivers[1]]).unwrap();
                assert!(allowed_label_set(&spec).contains(&label));
            }
        }
    }

    #[test]
    fn announcement_policy_falls_back_to_honesty_on_odd_tuples() {
        // A wrong-basis belief makes the tuple odd and uninformative, so both
        // signs pass and the honest preparation is announced.
        let receivers = [e("+x"), e("+x")];
        let belief = e("+y");
        for bits in [0u16, 1] {
            let label = GhzLabel::new(3, bits).unwrap();
            assert_eq!(
                teleport_announcement(belief, 0, &receivers, label),
                receivers[0]
            );
        }
    }

    #[test]
    fn clean_sessions_are_never_flagged() {
        let config = SessionConfig {
            k1: 10,
            k2: 30,
            master_seed: 7,
            ..SessionConfig::default()
        };
        let stats = measure_detection_rate(&config, AttackKind::None, 5).unwrap();
        assert_eq!(stats.sessions, 5);
        assert_eq!(stats.aborted, 0);
        assert_eq!(stats.check_errors, 0);
        assert_eq!(stats.detection_rate, 0.0);
        assert_eq!(stats.per_check_error_rate, 0.0);
        assert!(stats.checked_rounds > 0);
    }

    #[test]
    fn detection_measurement_rejects_zero_trials() {
        let config = SessionConfig::default();
        assert!(measure_detection_rate(&config, AttackKind::None, 0).is_err());
    }

    #[test]
    fn detection_measurement_is_reproducible() {
        let config = SessionConfig {
            k1: 5,
            k2: 40,
            master_seed: 19,
            ..SessionConfig::default()
        };
        let a = measure_detection_rate(&config, AttackKind::InterceptResend, 4).unwrap();
        let b = measure_detection_rate(&config, AttackKind::InterceptResend, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.checked_rounds > 0);
        assert!(a.check_errors > 0, "a sampled tap should trip some checks");
    }
}
