//! Dense complex state vectors for small collections of qubits.
//!
//! Amplitudes are indexed by the computational basis string `b_0 b_1 … b_{m-1}`
//! with qubit 0 leftmost, so qubit 0 occupies the most significant bit of the
//! index and tensor products concatenate factors left to right. Qubit 0 is the
//! first listed party throughout the crate.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Amplitudes with magnitude below this are classified as zero.
pub const AMP_TOL: f64 = 1e-9;

/// Normalization drift allowed on constructed states.
pub const NORM_TOL: f64 = 1e-12;

/// Projection branches below this probability carry no residual state.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum QuantumError {
    #[error("amplitude vector of length {got} is not a power of two")]
    NotPowerOfTwo { got: usize },
    #[error("state norm {norm} differs from 1 beyond tolerance")]
    NotNormalized { norm: f64 },
    #[error("qubit index {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("subsystem indices must be distinct and in range")]
    BadSubsystem,
    #[error("target has {target_qubits} qubits but subsystem selects {subsystem_len}")]
    DimensionMismatch {
        target_qubits: usize,
        subsystem_len: usize,
    },
}

/// Measurement basis selector; doubles as the Pauli operator of the same axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliBasis {
    Z,
    X,
    Y,
}

/// Sign of a basis eigenstate: `Plus` for +1 eigenvalue, `Minus` for -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// A single-qubit eigenstate of one of the three Pauli operators.
///
/// Canonical expansions: |±x⟩ = (|0⟩ ± |1⟩)/√2, |±y⟩ = (|0⟩ ± i|1⟩)/√2,
/// |+z⟩ = |0⟩, |−z⟩ = |1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Eigenstate {
    pub basis: PauliBasis,
    pub sign: Sign,
}

impl Eigenstate {
    pub fn new(basis: PauliBasis, sign: Sign) -> Eigenstate {
        Eigenstate { basis, sign }
    }

    /// The eigenstate with the same basis and opposite sign.
    pub fn flipped(self) -> Eigenstate {
        Eigenstate::new(self.basis, self.sign.flipped())
    }

    /// Canonical 2-dimensional state vector.
    pub fn state_vector(self) -> StateVector {
        let s = self.sign.factor();
        let amp1 = match self.basis {
            PauliBasis::Z => {
                return StateVector {
                    num_qubits: 1,
                    amps: match self.sign {
                        Sign::Plus => vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                        Sign::Minus => vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
                    },
                }
            }
            PauliBasis::X => Complex64::new(s, 0.0),
            PauliBasis::Y => Complex64::new(0.0, s),
        };
        let r = std::f64::consts::FRAC_1_SQRT_2;
        StateVector {
            num_qubits: 1,
            amps: vec![Complex64::new(r, 0.0), amp1 * r],
        }
    }
}

impl fmt::Display for Eigenstate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.sign {
            Sign::Plus => '+',
            Sign::Minus => '-',
        };
        let basis = match self.basis {
            PauliBasis::Z => 'z',
            PauliBasis::X => 'x',
            PauliBasis::Y => 'y',
        };
        write!(f, "{sign}{basis}")
    }
}

impl std::str::FromStr for Eigenstate {
    type Err = String;

    fn from_str(s: &str) -> Result<Eigenstate, String> {
        let mut chars = s.chars();
        let sign = match chars.next() {
            Some('+') => Sign::Plus,
            Some('-') => Sign::Minus,
            _ => return Err(format!("expected sign prefix in eigenstate `{s}`")),
        };
        let basis = match chars.next() {
            Some('x') | Some('X') => PauliBasis::X,
            Some('y') | Some('Y') => PauliBasis::Y,
            Some('z') | Some('Z') => PauliBasis::Z,
            _ => return Err(format!("expected basis letter in eigenstate `{s}`")),
        };
        if chars.next().is_some() {
            return Err(format!("trailing characters in eigenstate `{s}`"));
        }
        Ok(Eigenstate::new(basis, sign))
    }
}

impl Serialize for Eigenstate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Eigenstate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Eigenstate, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All four eigenstates a party may prepare, in a fixed enumeration order.
pub const XY_EIGENSTATES: [Eigenstate; 4] = [
    Eigenstate { basis: PauliBasis::X, sign: Sign::Plus },
    Eigenstate { basis: PauliBasis::X, sign: Sign::Minus },
    Eigenstate { basis: PauliBasis::Y, sign: Sign::Plus },
    Eigenstate { basis: PauliBasis::Y, sign: Sign::Minus },
];

/// Normalized pure state of `num_qubits` qubits.
///
/// `num_qubits == 0` is permitted only as the scalar marker produced when a
/// projection consumes every qubit; it holds the single amplitude 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Builds a state from raw amplitudes, validating length and norm.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<StateVector, QuantumError> {
        let len = amps.len();
        if len == 0 || len & (len - 1) != 0 {
            return Err(QuantumError::NotPowerOfTwo { got: len });
        }
        let num_qubits = len.trailing_zeros() as usize;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QuantumError::NotNormalized { norm });
        }
        Ok(StateVector { num_qubits, amps })
    }

    /// Internal constructor for callers that guarantee normalization.
    pub(crate) fn from_amplitudes_unchecked(num_qubits: usize, amps: Vec<Complex64>) -> StateVector {
        debug_assert_eq!(amps.len(), 1 << num_qubits);
        debug_assert!((amps.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-9);
        StateVector { num_qubits, amps }
    }

    /// Computational basis state |index⟩ on `num_qubits` qubits.
    pub fn basis_state(num_qubits: usize, index: usize) -> StateVector {
        assert!(index < (1 << num_qubits), "basis index out of range");
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        StateVector { num_qubits, amps }
    }

    /// The 0-qubit scalar marker left over when a projection removes all qubits.
    pub fn scalar() -> StateVector {
        StateVector {
            num_qubits: 0,
            amps: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn is_scalar(&self) -> bool {
        self.num_qubits == 0
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.num_qubits, other.num_qubits, "inner product dimension mismatch");
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Largest per-amplitude difference against another state of equal size.
    pub fn max_amp_diff(&self, other: &StateVector) -> f64 {
        assert_eq!(self.num_qubits, other.num_qubits);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Tensor product of the given parts, leftmost part first.
    pub fn tensor(parts: &[StateVector]) -> StateVector {
        assert!(!parts.is_empty(), "tensor of no parts");
        let mut num_qubits = 0;
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for part in parts {
            num_qubits += part.num_qubits;
            let mut next = Vec::with_capacity(amps.len() * part.amps.len());
            for a in &amps {
                for b in &part.amps {
                    next.push(a * b);
                }
            }
            amps = next;
        }
        StateVector { num_qubits, amps }
    }

    /// Position of `qubit` as a bit mask inside an amplitude index.
    fn bit_mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    /// Projects the ordered `subsystem` qubits onto `target`.
    ///
    /// Returns the outcome probability and the normalized residual state of
    /// the remaining qubits in their original relative order. The residual is
    /// `None` when the probability falls below `PROB_FLOOR`, and the scalar
    /// marker when no qubits remain.
    pub fn project(
        &self,
        subsystem: &[usize],
        target: &StateVector,
    ) -> Result<(f64, Option<StateVector>), QuantumError> {
        let k = subsystem.len();
        let mut seen = vec![false; self.num_qubits];
        for &q in subsystem {
            if q >= self.num_qubits || seen[q] {
                return Err(QuantumError::BadSubsystem);
            }
            seen[q] = true;
        }
        if target.num_qubits != k {
            return Err(QuantumError::DimensionMismatch {
                target_qubits: target.num_qubits,
                subsystem_len: k,
            });
        }
        let remaining: Vec<usize> = (0..self.num_qubits).filter(|q| !seen[*q]).collect();
        let rem_count = remaining.len();

        // coeff[r] = Σ_s conj(target[s]) · ψ[s on subsystem, r on remaining]
        let mut coeff = vec![Complex64::new(0.0, 0.0); 1 << rem_count];
        for (idx, amp) in self.amps.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let mut s = 0usize;
            for (pos, &q) in subsystem.iter().enumerate() {
                if idx & self.bit_mask(q) != 0 {
                    s |= 1 << (k - 1 - pos);
                }
            }
            let mut r = 0usize;
            for (pos, &q) in remaining.iter().enumerate() {
                if idx & self.bit_mask(q) != 0 {
                    r |= 1 << (rem_count - 1 - pos);
                }
            }
            coeff[r] += target.amps[s].conj() * amp;
        }

        let probability: f64 = coeff.iter().map(|c| c.norm_sqr()).sum();
        if probability < PROB_FLOOR {
            return Ok((probability, None));
        }
        if rem_count == 0 {
            return Ok((probability, Some(StateVector::scalar())));
        }
        let scale = probability.sqrt().recip();
        for c in &mut coeff {
            *c *= scale;
        }
        Ok((
            probability,
            Some(StateVector {
                num_qubits: rem_count,
                amps: coeff,
            }),
        ))
    }

    /// Measures `qubit` in `basis`, sampling the sign with Born probabilities.
    ///
    /// The measured qubit is removed: the collapsed state covers the remaining
    /// qubits, or is the outcome eigenstate itself when `qubit` was the last
    /// qubit of the state.
    pub fn measure_in_basis(
        &self,
        qubit: usize,
        basis: PauliBasis,
        rng: &mut impl Rng,
    ) -> Result<(Sign, StateVector), QuantumError> {
        if qubit >= self.num_qubits {
            return Err(QuantumError::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        let plus = Eigenstate::new(basis, Sign::Plus).state_vector();
        let (p_plus, resid_plus) = self.project(&[qubit], &plus)?;
        let mut sign = if rng.gen::<f64>() < p_plus {
            Sign::Plus
        } else {
            Sign::Minus
        };
        let residual = match sign {
            Sign::Plus => resid_plus,
            Sign::Minus => {
                let minus = Eigenstate::new(basis, Sign::Minus).state_vector();
                self.project(&[qubit], &minus)?.1
            }
        };
        // A branch can be drawn against a vanishing probability only through
        // floating-point edge cases; fall back to the opposite branch.
        let residual = match residual {
            Some(r) => r,
            None => {
                sign = sign.flipped();
                let state = Eigenstate::new(basis, sign).state_vector();
                self.project(&[qubit], &state)?
                    .1
                    .expect("both measurement branches have zero probability")
            }
        };
        if self.num_qubits == 1 {
            return Ok((sign, Eigenstate::new(basis, sign).state_vector()));
        }
        Ok((sign, residual))
    }

    /// Applies the Pauli operator of the given axis to one qubit.
    pub fn apply_pauli(&self, qubit: usize, pauli: PauliBasis) -> StateVector {
        assert!(qubit < self.num_qubits, "pauli qubit out of range");
        let mask = self.bit_mask(qubit);
        let mut amps = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (idx, amp) in self.amps.iter().enumerate() {
            match pauli {
                // X: |0⟩↔|1⟩
                PauliBasis::X => amps[idx ^ mask] += amp,
                // Y: |0⟩→i|1⟩, |1⟩→−i|0⟩
                PauliBasis::Y => {
                    let phase = if idx & mask == 0 {
                        Complex64::new(0.0, 1.0)
                    } else {
                        Complex64::new(0.0, -1.0)
                    };
                    amps[idx ^ mask] += amp * phase;
                }
                // Z: |1⟩→−|1⟩
                PauliBasis::Z => {
                    let phase = if idx & mask == 0 { 1.0 } else { -1.0 };
                    amps[idx] += amp * phase;
                }
            }
        }
        StateVector {
            num_qubits: self.num_qubits,
            amps,
        }
    }

    /// Inserts a fresh unentangled qubit at `position`, shifting later qubits.
    pub fn insert_qubit(&self, position: usize, single: &StateVector) -> StateVector {
        assert_eq!(single.num_qubits, 1, "inserted state must be one qubit");
        assert!(position <= self.num_qubits, "insert position out of range");
        let new_qubits = self.num_qubits + 1;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << new_qubits];
        // Split each old index into bits above and below the insertion point.
        let low_count = self.num_qubits - position;
        let low_mask = (1usize << low_count) - 1;
        for (idx, amp) in self.amps.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let high = idx >> low_count;
            let low = idx & low_mask;
            for (bit, bamp) in single.amps.iter().enumerate() {
                let new_idx = (high << (low_count + 1)) | (bit << low_count) | low;
                amps[new_idx] = amp * bamp;
            }
        }
        StateVector {
            num_qubits: new_qubits,
            amps,
        }
    }

    /// Classifies a single-qubit state as a Pauli eigenstate, ignoring global
    /// phase. Returns `None` if no eigenstate overlaps within `AMP_TOL`.
    pub fn as_eigenstate(&self) -> Option<Eigenstate> {
        if self.num_qubits != 1 {
            return None;
        }
        for basis in [PauliBasis::X, PauliBasis::Y, PauliBasis::Z] {
            for sign in [Sign::Plus, Sign::Minus] {
                let e = Eigenstate::new(basis, sign);
                if (e.state_vector().inner(self).norm_sqr() - 1.0).abs() < AMP_TOL {
                    return Some(e);
                }
            }
        }
        None
    }
}

/// The Bell state (|01⟩ − |10⟩)/√2 shared between Alice's retained and
/// transmitted photons.
pub fn bell_phi_minus() -> StateVector {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    StateVector {
        num_qubits: 2,
        amps: vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(r, 0.0),
            Complex64::new(-r, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    }
}
