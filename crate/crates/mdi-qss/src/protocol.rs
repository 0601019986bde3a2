//! The session state machine: sequence preparation, per-round transmission
//! and analysis, announcements, the sender-side security check, phase-flip
//! message encoding, and both decoding methods.

use crate::adversary::{
    intercept_resend_tap, teleport_announcement, teleportation_attack_infer,
    teleportation_attack_setup, AttackKind,
};
use crate::coding::NoiseModel;
use crate::ghz::{
    allowed_label_set, analyze_subsystem, collapse_reference, AnalyzerKind, AnalyzerOutcome,
    ProductStateSpec,
};
use crate::quantum::{bell_phi_minus, Eigenstate, PauliBasis, Sign, StateVector, XY_EIGENSTATES};
use crate::seed::derive_rng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("message needs {needed} usable pair rounds but only {usable} succeeded")]
    InsufficientUsableRounds { needed: usize, usable: usize },
    #[error("the session aborted at the security check; nothing was encoded")]
    AbortedSession,
    #[error("receiver bases must be on record before the sender publishes her results")]
    AnnouncementOrdering,
    #[error("round {round} is missing an announcement from receiver {receiver}")]
    MissingAnnouncement { round: usize, receiver: usize },
    #[error("the phase-flip encoding acts on X/Y eigenstates only")]
    ZBasisNotEncodable,
}

/// Whether a transmission slot carries a pair half or a decoy photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundKind {
    PairHalf,
    Decoy,
}

/// One slot of the sender's outgoing photon sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SequenceSlot {
    /// The transmitted half of pair `pair_id`; its partner stays retained.
    PairHalf { pair_id: usize },
    /// A decoy photon in a random eigenstate, kept secret until disclosure.
    Decoy { prepared: Eigenstate },
}

impl SequenceSlot {
    pub fn kind(&self) -> RoundKind {
        match self {
            SequenceSlot::PairHalf { .. } => RoundKind::PairHalf,
            SequenceSlot::Decoy { .. } => RoundKind::Decoy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecodeMethod {
    /// The sender returns the encoded photons; one receiver measures them
    /// after the others reveal their states.
    #[serde(rename = "I")]
    ReceiverMeasures,
    /// The sender measures in the reference bases herself, once all receiver
    /// bases are on record, and publishes the outcomes.
    #[serde(rename = "II")]
    SenderPublishes,
}

/// Full parameterization of one protocol session.
///
/// Unknown keys are rejected on deserialization so a typo in a config file
/// fails instead of silently falling back to a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub n_receivers: usize,
    /// Number of retained/transmitted photon pairs.
    pub k1: usize,
    /// Number of decoy photons mixed into the outgoing sequence.
    pub k2: usize,
    pub analyzer: AnalyzerKind,
    pub attack: AttackKind,
    pub noise: Option<NoiseModel>,
    /// Check error rate above which the session aborts.
    pub error_threshold: f64,
    /// Fraction of encoded positions reserved for integrity sampling bits.
    pub sampling_bit_fraction: f64,
    /// Cap on how many eligible rounds the security check consumes; the
    /// protocol itself leaves the budget open, so None checks them all.
    pub max_check_rounds: Option<usize>,
    pub decode_method: DecodeMethod,
    pub master_seed: u64,
    /// Bit string ('0'/'1') to encode; empty skips the encoding phase.
    pub message: String,
}

impl Default for SessionConfig {
    fn default() -> SessionConfig {
        SessionConfig {
            n_receivers: 2,
            k1: 200,
            k2: 100,
            analyzer: AnalyzerKind::LinearOptics,
            attack: AttackKind::None,
            noise: None,
            error_threshold: 0.05,
            sampling_bit_fraction: 0.10,
            max_check_rounds: None,
            decode_method: DecodeMethod::ReceiverMeasures,
            master_seed: 1,
            message: String::new(),
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if !(2..=13).contains(&self.n_receivers) {
            return Err(ProtocolError::InvalidConfig(format!(
                "n_receivers {} outside the supported range 2..=13",
                self.n_receivers
            )));
        }
        if self.k1 < 1 {
            return Err(ProtocolError::InvalidConfig(
                "at least one photon pair is required".to_string(),
            ));
        }
        if !(0.0..=1.0).contains(&self.error_threshold) {
            return Err(ProtocolError::InvalidConfig(format!(
                "error_threshold {} outside [0, 1]",
                self.error_threshold
            )));
        }
        if !(0.0..1.0).contains(&self.sampling_bit_fraction) {
            return Err(ProtocolError::InvalidConfig(format!(
                "sampling_bit_fraction {} outside [0, 1)",
                self.sampling_bit_fraction
            )));
        }
        if let Some(noise) = &self.noise {
            noise
                .validate()
                .map_err(|e| ProtocolError::InvalidConfig(e.to_string()))?;
        }
        if !self.message.chars().all(|c| c == '0' || c == '1') {
            return Err(ProtocolError::InvalidConfig(
                "message must be a string of 0/1 bits".to_string(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Party {
    Analyzer,
    Sender,
    Receiver(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "topic", content = "value", rename_all = "kebab-case")]
pub enum AnnouncementContent {
    AnalysisResult(AnalyzerOutcome),
    DecoyPosition,
    PreparedState(Eigenstate),
    PreparationBasis(PauliBasis),
    MeasurementResult(Sign),
    SamplingBit(bool),
}

/// One classical publication, stamped with its global sequence number so
/// cross-phase ordering stays visible in the record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Announcement {
    pub order: u64,
    pub party: Party,
    pub content: AnnouncementContent,
}

/// Immutable record of one transmission round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub index: usize,
    pub slot: SequenceSlot,
    pub receiver_preparations: Vec<Eigenstate>,
    pub outcome: AnalyzerOutcome,
    /// State of the sender's retained photon after a successful pair-round
    /// analysis; None for decoy rounds and failures.
    pub alice_collapsed: Option<Eigenstate>,
    /// What the attacker believes the sender's photon was, when an attack
    /// with an inference step ran on this round.
    pub attack_inference: Option<Eigenstate>,
    pub announcements: Vec<Announcement>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Proceed,
    Abort,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub checked: usize,
    pub errors: usize,
    pub error_rate: f64,
    /// Set when no round qualified for checking, so the rate is vacuous.
    pub no_checks_warning: bool,
    pub verdict: Verdict,
}

/// One encoded position of the message-carrying subsequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncodedPosition {
    pub round_index: usize,
    pub sent_bit: bool,
    pub is_sampling: bool,
    /// The state receivers derive from the announced label and their own
    /// preparations; the decoding comparison point.
    pub reference: Eigenstate,
    /// Outcome of the single physical measurement in the reference basis.
    pub observed: Sign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeOutcome {
    pub method: DecodeMethod,
    /// Recovered message per receiver; equal strings when everyone
    /// cooperates, which is the only regime the simulator models.
    pub bits_per_receiver: Vec<String>,
    pub integrity_ok: bool,
}

impl DecodeOutcome {
    pub fn message_bits(&self) -> &str {
        &self.bits_per_receiver[0]
    }
}

/// Complete record of one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub config: SessionConfig,
    pub rounds: Vec<RoundRecord>,
    pub decoy_positions: Vec<usize>,
    pub check: CheckSummary,
    pub encoded: Vec<EncodedPosition>,
    pub decoded: Option<DecodeOutcome>,
}

impl Transcript {
    pub fn verdict(&self) -> Verdict {
        self.check.verdict
    }

    /// Rounds where the analyzer reported a reproducible state.
    pub fn analyzer_success_count(&self) -> usize {
        self.rounds
            .iter()
            .filter(|r| matches!(r.outcome, AnalyzerOutcome::Success { .. }))
            .count()
    }

    /// Successful pair rounds: the pool the encoded subsequence draws from.
    pub fn usable_round_count(&self) -> usize {
        self.rounds
            .iter()
            .filter(|r| {
                r.slot.kind() == RoundKind::PairHalf
                    && matches!(r.outcome, AnalyzerOutcome::Success { .. })
            })
            .count()
    }
}

fn uniform_xy(rng: &mut impl Rng) -> Eigenstate {
    XY_EIGENSTATES[rng.gen_range(0..XY_EIGENSTATES.len())]
}

/// Builds the sender's sequences: `k1` pair halves with their retained
/// partners, and `k2` decoys spliced in at uniformly random positions.
///
/// Returns the retained pair ids (in pair order), the outgoing slot list,
/// and the sorted decoy positions.
pub fn prepare_sender_sequences(
    k1: usize,
    k2: usize,
    rng: &mut impl Rng,
) -> (Vec<usize>, Vec<SequenceSlot>, Vec<usize>) {
    assert!(k1 >= 1, "at least one photon pair is required");
    let total = k1 + k2;
    let mut decoy_positions: Vec<usize> = rand::seq::index::sample(rng, total, k2).into_vec();
    decoy_positions.sort_unstable();
    let mut outgoing = Vec::with_capacity(total);
    let mut decoys = decoy_positions.iter().peekable();
    let mut next_pair = 0;
    for position in 0..total {
        if decoys.peek() == Some(&&position) {
            decoys.next();
            outgoing.push(SequenceSlot::Decoy {
                prepared: uniform_xy(rng),
            });
        } else {
            outgoing.push(SequenceSlot::PairHalf { pair_id: next_pair });
            next_pair += 1;
        }
    }
    ((0..k1).collect(), outgoing, decoy_positions)
}

/// Channel and attack context for one round, beyond the slot itself.
pub struct RoundEnvironment<'a> {
    pub analyzer: AnalyzerKind,
    pub noise: Option<NoiseModel>,
    pub attack: AttackKind,
    /// Fresh pair consumed by the substitution attack on this round.
    pub teleport_pair: Option<&'a StateVector>,
}

/// Runs one transmission round: joint-state construction, transit noise on
/// the sender's photon, the attack tap, the analyzer, and the post-analysis
/// collapse bookkeeping. Announcements are appended by the session driver.
pub fn run_round(
    index: usize,
    slot: SequenceSlot,
    receiver_preparations: &[Eigenstate],
    env: &RoundEnvironment<'_>,
    channel_rng: &mut impl Rng,
    analyzer_rng: &mut impl Rng,
    attack_rng: &mut impl Rng,
) -> RoundRecord {
    let n = receiver_preparations.len();
    let mut parts: Vec<StateVector> = Vec::with_capacity(n + 1);
    let transit_qubit = match slot {
        SequenceSlot::PairHalf { .. } => {
            parts.push(bell_phi_minus());
            1
        }
        SequenceSlot::Decoy { prepared } => {
            parts.push(prepared.state_vector());
            0
        }
    };
    parts.extend(receiver_preparations.iter().map(|p| p.state_vector()));
    let mut joint = StateVector::tensor(&parts);
    let receiver_qubits: Vec<usize> = (transit_qubit + 1..=transit_qubit + n).collect();

    if let Some(noise) = env.noise {
        joint = noise.apply_transit(&joint, transit_qubit, channel_rng);
    }

    let mut analyzer_entry = transit_qubit;
    let mut substituted = false;
    match env.attack {
        AttackKind::None => {}
        AttackKind::InterceptResend => {
            let (tapped, _resent) = intercept_resend_tap(&joint, transit_qubit, attack_rng);
            joint = tapped;
        }
        AttackKind::TeleportationBased => {
            let pair = env
                .teleport_pair
                .expect("the substitution attack consumes one fresh pair per round");
            let kept = joint.num_qubits();
            joint = StateVector::tensor(&[joint, pair.clone()]);
            // The kept half sits at `kept`, the substitute at `kept + 1`;
            // the substitute enters the analyzer in the sender's slot.
            analyzer_entry = kept + 1;
            substituted = true;
        }
    }

    let mut analyzer_subsystem = vec![analyzer_entry];
    analyzer_subsystem.extend(&receiver_qubits);
    let (outcome, residual) =
        analyze_subsystem(&joint, &analyzer_subsystem, env.analyzer, analyzer_rng)
            .expect("round arity is bounded by the validated receiver count");

    let mut alice_collapsed = None;
    let mut attack_inference = None;
    if let AnalyzerOutcome::Success { label, .. } = outcome {
        let mut residual = residual.expect("successful analysis leaves a residual state");
        if substituted {
            // Residual qubits keep their original relative order:
            // pair rounds leave [retained, intercepted, kept half],
            // decoy rounds leave [intercepted, kept half].
            let kept_collapse = collapse_reference(label, receiver_preparations)
                .expect("receiver preparations are X/Y eigenstates");
            let (a_res, s2_res) = match slot.kind() {
                RoundKind::PairHalf => (1, 2),
                RoundKind::Decoy => (0, 1),
            };
            let (inferred, rest) = teleportation_attack_infer(
                &residual,
                a_res,
                s2_res,
                slot.kind(),
                kept_collapse,
                attack_rng,
            );
            attack_inference = Some(inferred);
            residual = rest;
        }
        if slot.kind() == RoundKind::PairHalf {
            alice_collapsed = Some(residual.as_eigenstate().expect(
                "transit Paulis keep the pair maximally entangled, so the retained photon collapses onto an X/Y axis",
            ));
        }
    }

    RoundRecord {
        index,
        slot,
        receiver_preparations: receiver_preparations.to_vec(),
        outcome,
        alice_collapsed,
        attack_inference,
        announcements: Vec::new(),
    }
}

fn announced_receiver_states(round: &RoundRecord) -> Result<Vec<Eigenstate>, ProtocolError> {
    let n = round.receiver_preparations.len();
    let mut states = vec![None; n];
    for a in &round.announcements {
        if let (Party::Receiver(i), AnnouncementContent::PreparedState(s)) = (a.party, &a.content)
        {
            states[i] = Some(*s);
        }
    }
    states
        .into_iter()
        .enumerate()
        .map(|(receiver, s)| {
            s.ok_or(ProtocolError::MissingAnnouncement {
                round: round.index,
                receiver,
            })
        })
        .collect()
}

/// The sender's security check over the announced record.
///
/// Eligible rounds are successful decoy rounds whose basis tuple (the
/// sender's decoy plus the announced receiver states) has an even Y count;
/// odd tuples are announced but carry no detection power and stay out of the
/// denominator. An error is a reported label outside the tuple's allowed
/// set. `max_checks` caps how many eligible rounds are consumed, in round
/// order.
pub fn security_check(
    rounds: &[RoundRecord],
    threshold: f64,
    max_checks: Option<usize>,
) -> Result<CheckSummary, ProtocolError> {
    let mut checked = 0;
    let mut errors = 0;
    for round in rounds {
        if max_checks.is_some_and(|cap| checked >= cap) {
            break;
        }
        let SequenceSlot::Decoy { prepared } = round.slot else {
            continue;
        };
        let AnalyzerOutcome::Success { label, .. } = round.outcome else {
            continue;
        };
        let announced = announced_receiver_states(round)?;
        let y_count = usize::from(prepared.basis == PauliBasis::Y)
            + announced
                .iter()
                .filter(|s| s.basis == PauliBasis::Y)
                .count();
        if y_count % 2 == 1 {
            continue;
        }
        let mut photons = vec![prepared];
        photons.extend(announced);
        let spec = ProductStateSpec::new(photons).expect("protocol states are X/Y eigenstates");
        checked += 1;
        if !allowed_label_set(&spec).contains(&label) {
            errors += 1;
        }
    }
    let no_checks_warning = checked == 0;
    let error_rate = if checked == 0 {
        0.0
    } else {
        errors as f64 / checked as f64
    };
    let verdict = if error_rate > threshold {
        Verdict::Abort
    } else {
        Verdict::Proceed
    };
    Ok(CheckSummary {
        checked,
        errors,
        error_rate,
        no_checks_warning,
        verdict,
    })
}

/// The phase-flip encoding: bit 0 leaves the photon alone, bit 1 flips the
/// eigenstate sign within its basis.
pub fn encode_bit(state: Eigenstate, bit: bool) -> Result<Eigenstate, ProtocolError> {
    if state.basis == PauliBasis::Z {
        return Err(ProtocolError::ZBasisNotEncodable);
    }
    Ok(if bit { state.flipped() } else { state })
}

/// Reads the message out of a completed transcript.
///
/// Both methods compare the recorded measurement against the reference state
/// and differ in which announcements they require: the receiver-measures
/// method needs every peer state on record, while the sender-publishes
/// method insists that every receiver basis was announced before the
/// sender's result for that round.
pub fn decode_message(
    transcript: &Transcript,
    method: DecodeMethod,
) -> Result<DecodeOutcome, ProtocolError> {
    if transcript.check.verdict == Verdict::Abort {
        return Err(ProtocolError::AbortedSession);
    }
    let n = transcript.config.n_receivers;
    let mut message = String::new();
    let mut integrity_ok = true;
    for pos in &transcript.encoded {
        let round = &transcript.rounds[pos.round_index];
        match method {
            DecodeMethod::ReceiverMeasures => {
                let mut seen = vec![false; n];
                // The measuring receiver knows his own photon.
                seen[0] = true;
                for a in &round.announcements {
                    if let (Party::Receiver(i), AnnouncementContent::PreparedState(_)) =
                        (a.party, &a.content)
                    {
                        seen[i] = true;
                    }
                }
                if let Some(receiver) = seen.iter().position(|s| !s) {
                    return Err(ProtocolError::MissingAnnouncement {
                        round: round.index,
                        receiver,
                    });
                }
            }
            DecodeMethod::SenderPublishes => {
                let result_order = round
                    .announcements
                    .iter()
                    .find_map(|a| match (a.party, &a.content) {
                        (Party::Sender, AnnouncementContent::MeasurementResult(_)) => {
                            Some(a.order)
                        }
                        _ => None,
                    })
                    .ok_or(ProtocolError::AnnouncementOrdering)?;
                let mut basis_orders = vec![None; n];
                for a in &round.announcements {
                    if let (Party::Receiver(i), AnnouncementContent::PreparationBasis(_)) =
                        (a.party, &a.content)
                    {
                        basis_orders[i] = Some(a.order);
                    }
                }
                for order in basis_orders {
                    match order {
                        Some(o) if o < result_order => {}
                        _ => return Err(ProtocolError::AnnouncementOrdering),
                    }
                }
            }
        }
        let bit = pos.observed != pos.reference.sign;
        if pos.is_sampling {
            let published = round
                .announcements
                .iter()
                .find_map(|a| match (a.party, &a.content) {
                    (Party::Sender, AnnouncementContent::SamplingBit(b)) => Some(*b),
                    _ => None,
                });
            if published != Some(bit) {
                integrity_ok = false;
            }
        } else {
            message.push(if bit { '1' } else { '0' });
        }
    }
    Ok(DecodeOutcome {
        method,
        bits_per_receiver: vec![message; n],
        integrity_ok,
    })
}

struct SessionRngs {
    sender: ChaCha8Rng,
    receivers: Vec<ChaCha8Rng>,
    channel: ChaCha8Rng,
    analyzer: ChaCha8Rng,
    attack: ChaCha8Rng,
    decode: ChaCha8Rng,
    return_channel: ChaCha8Rng,
}

impl SessionRngs {
    fn new(master_seed: u64, n_receivers: usize) -> SessionRngs {
        SessionRngs {
            sender: derive_rng(master_seed, "sender"),
            receivers: (0..n_receivers)
                .map(|i| derive_rng(master_seed, &format!("receiver-{i}")))
                .collect(),
            channel: derive_rng(master_seed, "channel"),
            analyzer: derive_rng(master_seed, "analyzer"),
            attack: derive_rng(master_seed, "attack"),
            decode: derive_rng(master_seed, "decode"),
            return_channel: derive_rng(master_seed, "return-channel"),
        }
    }
}

/// Runs a complete session: preparation, every transmission round, the
/// announcement phases, the security check, and (on Proceed, with a
/// non-empty message) encoding plus decoding with the configured method.
pub fn run_session(config: &SessionConfig) -> Result<Transcript, ProtocolError> {
    config.validate()?;
    let mut rngs = SessionRngs::new(config.master_seed, config.n_receivers);
    let (_retained, outgoing, decoy_positions) =
        prepare_sender_sequences(config.k1, config.k2, &mut rngs.sender);

    let teleport_pairs = if config.attack == AttackKind::TeleportationBased {
        teleportation_attack_setup(outgoing.len(), &mut rngs.attack)
    } else {
        Vec::new()
    };

    let mut order = 0u64;
    let next_order = |order: &mut u64| {
        let o = *order;
        *order += 1;
        o
    };

    let mut rounds: Vec<RoundRecord> = Vec::with_capacity(outgoing.len());
    for (index, slot) in outgoing.iter().copied().enumerate() {
        let preparations: Vec<Eigenstate> = rngs
            .receivers
            .iter_mut()
            .map(|rng| uniform_xy(rng))
            .collect();
        let env = RoundEnvironment {
            analyzer: config.analyzer,
            noise: config.noise,
            attack: config.attack,
            teleport_pair: teleport_pairs.get(index),
        };
        let mut record = run_round(
            index,
            slot,
            &preparations,
            &env,
            &mut rngs.channel,
            &mut rngs.analyzer,
            &mut rngs.attack,
        );
        record.announcements.push(Announcement {
            order: next_order(&mut order),
            party: Party::Analyzer,
            content: AnnouncementContent::AnalysisResult(record.outcome),
        });
        rounds.push(record);
    }

    // Disclosure: the sender reveals which slots were decoys, then the
    // receivers publish their preparations for the successful decoy rounds.
    // The corrupt receiver announces last, after seeing the others.
    for &position in &decoy_positions {
        rounds[position].announcements.push(Announcement {
            order: next_order(&mut order),
            party: Party::Sender,
            content: AnnouncementContent::DecoyPosition,
        });
    }
    for &position in &decoy_positions {
        let round = &mut rounds[position];
        let AnalyzerOutcome::Success { label, .. } = round.outcome else {
            continue;
        };
        let preparations = round.receiver_preparations.clone();
        for (i, prep) in preparations.iter().enumerate().skip(1) {
            round.announcements.push(Announcement {
                order: next_order(&mut order),
                party: Party::Receiver(i),
                content: AnnouncementContent::PreparedState(*prep),
            });
        }
        let first_announced = if config.attack == AttackKind::TeleportationBased {
            let belief = round
                .attack_inference
                .expect("the substitution attack measures every successful round");
            teleport_announcement(belief, 0, &preparations, label)
        } else {
            preparations[0]
        };
        round.announcements.push(Announcement {
            order: next_order(&mut order),
            party: Party::Receiver(0),
            content: AnnouncementContent::PreparedState(first_announced),
        });
    }

    let check = security_check(&rounds, config.error_threshold, config.max_check_rounds)?;

    let mut encoded: Vec<EncodedPosition> = Vec::new();
    if check.verdict == Verdict::Proceed && !config.message.is_empty() {
        let message_bits: Vec<bool> = config.message.chars().map(|c| c == '1').collect();
        let fraction = config.sampling_bit_fraction;
        // Stream sized so its non-sampling share holds the whole message.
        let total = (message_bits.len() as f64 / (1.0 - fraction)).ceil() as usize;
        let sampling_count = total - message_bits.len();
        let usable: Vec<usize> = rounds
            .iter()
            .filter(|r| {
                r.slot.kind() == RoundKind::PairHalf
                    && matches!(r.outcome, AnalyzerOutcome::Success { .. })
            })
            .map(|r| r.index)
            .collect();
        if usable.len() < total {
            return Err(ProtocolError::InsufficientUsableRounds {
                needed: total,
                usable: usable.len(),
            });
        }
        let mut sampling_slots =
            rand::seq::index::sample(&mut rngs.sender, total, sampling_count).into_vec();
        sampling_slots.sort_unstable();
        let mut sampling = sampling_slots.iter().peekable();
        let mut message_iter = message_bits.iter();
        let mut stream = Vec::with_capacity(total);
        for slot_index in 0..total {
            let round_index = usable[slot_index];
            if sampling.peek() == Some(&&slot_index) {
                sampling.next();
                stream.push((round_index, rngs.sender.gen::<bool>(), true));
            } else {
                let bit = *message_iter
                    .next()
                    .expect("the stream is sized to fit the message");
                stream.push((round_index, bit, false));
            }
        }

        // Receivers publish their decoding information first: peer states
        // for the measuring receiver and every preparation basis.
        for &(round_index, _, _) in &stream {
            let round = &mut rounds[round_index];
            let preparations = round.receiver_preparations.clone();
            for (i, prep) in preparations.iter().enumerate().skip(1) {
                round.announcements.push(Announcement {
                    order: next_order(&mut order),
                    party: Party::Receiver(i),
                    content: AnnouncementContent::PreparedState(*prep),
                });
            }
            for (i, prep) in preparations.iter().enumerate() {
                round.announcements.push(Announcement {
                    order: next_order(&mut order),
                    party: Party::Receiver(i),
                    content: AnnouncementContent::PreparationBasis(prep.basis),
                });
            }
        }

        // The sender encodes each bit on the retained photon and the photon
        // is measured once in the reference basis; under the
        // receiver-measures method it crosses the channel again first.
        for &(round_index, bit, is_sampling) in &stream {
            let round = &rounds[round_index];
            let label = match round.outcome {
                AnalyzerOutcome::Success { label, .. } => label,
                AnalyzerOutcome::Failure => unreachable!("usable rounds succeeded"),
            };
            let reference = collapse_reference(label, &round.receiver_preparations)
                .expect("receiver preparations are X/Y eigenstates");
            let held = round
                .alice_collapsed
                .expect("successful pair rounds collapse the retained photon");
            let encoded_state = encode_bit(held, bit)?;
            let mut photon = encoded_state.state_vector();
            if config.decode_method == DecodeMethod::ReceiverMeasures {
                if let Some(noise) = config.noise {
                    photon = noise.apply_transit(&photon, 0, &mut rngs.return_channel);
                }
            }
            let (observed, _) = photon
                .measure_in_basis(0, reference.basis, &mut rngs.decode)
                .expect("the encoded photon is a single qubit");
            encoded.push(EncodedPosition {
                round_index,
                sent_bit: bit,
                is_sampling,
                reference,
                observed,
            });
        }

        // Results are published only after all receiver information is on
        // record, and the sampling key comes last of all.
        for pos in &encoded {
            rounds[pos.round_index].announcements.push(Announcement {
                order: next_order(&mut order),
                party: Party::Sender,
                content: AnnouncementContent::MeasurementResult(pos.observed),
            });
        }
        for pos in &encoded {
            if pos.is_sampling {
                rounds[pos.round_index].announcements.push(Announcement {
                    order: next_order(&mut order),
                    party: Party::Sender,
                    content: AnnouncementContent::SamplingBit(pos.sent_bit),
                });
            }
        }
    }

    let mut transcript = Transcript {
        config: config.clone(),
        rounds,
        decoy_positions,
        check,
        encoded,
        decoded: None,
    };
    if transcript.check.verdict == Verdict::Proceed && !transcript.encoded.is_empty() {
        transcript.decoded = Some(decode_message(&transcript, config.decode_method)?);
    }
    Ok(transcript)
}
