//! Transit noise channels and the repetition code that protects message bits
//! against residual channel errors.

use crate::quantum::{PauliBasis, StateVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CodingError {
    #[error("probability {value} outside [0, 1]")]
    BadProbability { value: f64 },
    #[error("repetition factor {r} must be odd and positive")]
    BadRepetitionFactor { r: usize },
    #[error("coded stream length {len} is not a multiple of the factor {r}")]
    LengthNotMultiple { len: usize, r: usize },
}

fn check_probability(value: f64) -> Result<(), CodingError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(CodingError::BadProbability { value });
    }
    Ok(())
}

/// Independent single-photon noise applied while a photon is in transit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// With this probability a uniformly random Pauli hits the photon.
    #[serde(default)]
    pub depolarizing_p: f64,
    /// With this probability a Z additionally hits the photon.
    #[serde(default)]
    pub dephasing_q: f64,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<(), CodingError> {
        check_probability(self.depolarizing_p)?;
        check_probability(self.dephasing_q)
    }

    pub fn is_quiet(&self) -> bool {
        self.depolarizing_p == 0.0 && self.dephasing_q == 0.0
    }

    /// Both channels in fixed order: depolarizing, then dephasing.
    pub fn apply_transit(&self, state: &StateVector, qubit: usize, rng: &mut impl Rng) -> StateVector {
        let state = apply_depolarizing(state, qubit, self.depolarizing_p, rng);
        apply_dephasing(&state, qubit, self.dephasing_q, rng)
    }
}

/// With probability `p`, applies a Pauli chosen uniformly from {X, Y, Z} to
/// `qubit`. An X/Y eigenstate therefore flips its sign with probability 2p/3.
pub fn apply_depolarizing(
    state: &StateVector,
    qubit: usize,
    p: f64,
    rng: &mut impl Rng,
) -> StateVector {
    assert!((0.0..=1.0).contains(&p), "depolarizing probability out of range");
    if p > 0.0 && rng.gen::<f64>() < p {
        let pauli = match rng.gen_range(0..3u8) {
            0 => PauliBasis::X,
            1 => PauliBasis::Y,
            _ => PauliBasis::Z,
        };
        state.apply_pauli(qubit, pauli)
    } else {
        state.clone()
    }
}

/// With probability `q`, applies Z to `qubit`.
pub fn apply_dephasing(
    state: &StateVector,
    qubit: usize,
    q: f64,
    rng: &mut impl Rng,
) -> StateVector {
    assert!((0.0..=1.0).contains(&q), "dephasing probability out of range");
    if q > 0.0 && rng.gen::<f64>() < q {
        state.apply_pauli(qubit, PauliBasis::Z)
    } else {
        state.clone()
    }
}

/// Odd-factor repetition code over message bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct RepetitionCode {
    r: usize,
}

impl RepetitionCode {
    pub fn new(r: usize) -> Result<RepetitionCode, CodingError> {
        if r == 0 || r % 2 == 0 {
            return Err(CodingError::BadRepetitionFactor { r });
        }
        Ok(RepetitionCode { r })
    }

    pub fn factor(&self) -> usize {
        self.r
    }

    pub fn encode(&self, bits: &[bool]) -> Vec<bool> {
        bits.iter()
            .flat_map(|&b| std::iter::repeat(b).take(self.r))
            .collect()
    }

    /// Majority vote over each block of `r` channel bits.
    pub fn decode(&self, coded: &[bool]) -> Result<Vec<bool>, CodingError> {
        if coded.len() % self.r != 0 {
            return Err(CodingError::LengthNotMultiple {
                len: coded.len(),
                r: self.r,
            });
        }
        Ok(coded
            .chunks(self.r)
            .map(|block| block.iter().filter(|&&b| b).count() * 2 > self.r)
            .collect())
    }
}

impl Default for RepetitionCode {
    fn default() -> RepetitionCode {
        RepetitionCode { r: 5 }
    }
}

impl TryFrom<usize> for RepetitionCode {
    type Error = CodingError;

    fn try_from(r: usize) -> Result<RepetitionCode, CodingError> {
        RepetitionCode::new(r)
    }
}

impl From<RepetitionCode> for usize {
    fn from(code: RepetitionCode) -> usize {
        code.r
    }
}

/// Probability that a majority vote over `r` copies fails when each copy
/// flips independently with probability `p`: the tail sum of the binomial
/// distribution from (r+1)/2 upward.
pub fn logical_error_rate(p: f64, r: usize) -> f64 {
    assert!((0.0..=1.0).contains(&p), "flip probability out of range");
    assert!(r % 2 == 1, "repetition factor must be odd");
    let mut total = 0.0;
    for k in (r + 1) / 2..=r {
        let mut term = 1.0;
        // C(r, k) built multiplicatively; exact in f64 for desk-scale r.
        for j in 0..k {
            term *= (r - j) as f64 / (k - j) as f64;
        }
        total += term * p.powi(k as i32) * (1.0 - p).powi((r - k) as i32);
    }
    total
}
