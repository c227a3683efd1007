use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dmc::NORM_TOL;
use crate::regions::RatePoint4;
use crate::{Error, Result};

/// Largest block length of the exact computations.
pub const MAX_EXACT_N: usize = 8;

/// Budget of elementary terms of an exact computation.
pub const EXACT_GUARD: f64 = 1e8;

/// Uniform draw in `[0, 1)` with 53 random bits.
pub(crate) fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-CDF sample from `p`; rounding slack falls on the last symbol
/// with positive probability.
pub(crate) fn sample(rng: &mut ChaCha8Rng, p: &[f64]) -> usize {
    let u = uniform(rng);
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    p.iter().rposition(|&pi| pi > 0.0).unwrap_or(0)
}

/// `⌈2^{nR}⌉`, forgiving rounding just above an integer.
pub fn message_count(n: usize, rate: f64) -> Result<u64> {
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(Error::InvalidParameter(format!("rate must be finite and >= 0, got {rate}")));
    }
    let m = ((n as f64 * rate).exp2() - 1e-9).ceil().max(1.0);
    if m > u32::MAX as f64 {
        return Err(Error::InvalidParameter(format!("2^(n R) = {m} messages is too many")));
    }
    Ok(m as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub m1: u64,
    pub m1p: u64,
    pub m2: u64,
    pub m2p: u64,
    /// Codeword symbol distribution of user 1 over its prefix input alphabet.
    pub p_c1: Vec<f64>,
    pub p_c2: Vec<f64>,
    pub seed: u64,
}

impl CodeParams {
    /// Message counts `⌈2^{nR}⌉` for secret rates `(R1, R2)` and auxiliary
    /// rates `(R1', R2')`.
    pub fn from_rates(n: usize, rates: &RatePoint4, p_c1: Vec<f64>, p_c2: Vec<f64>, seed: u64) -> Result<Self> {
        Ok(CodeParams {
            n,
            m1: message_count(n, rates.r1)?,
            m1p: message_count(n, rates.r1p)?,
            m2: message_count(n, rates.r2)?,
            m2p: message_count(n, rates.r2p)?,
            p_c1,
            p_c2,
            seed,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.n > MAX_EXACT_N {
            return Err(Error::InvalidParameter(format!("block length must be in 1..={MAX_EXACT_N}, got {}", self.n)));
        }
        if [self.m1, self.m1p, self.m2, self.m2p].contains(&0) {
            return Err(Error::InvalidParameter("message counts must be at least 1".into()));
        }
        for p in [&self.p_c1, &self.p_c2] {
            if p.is_empty() || p.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidParameter("input distribution must be non-empty and >= 0".into()));
            }
            let s: f64 = p.iter().sum();
            if (s - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidParameter(format!("input distribution sums to {s}")));
            }
        }
        Ok(())
    }

    pub fn codewords1(&self) -> u64 {
        self.m1 * self.m1p
    }

    pub fn codewords2(&self) -> u64 {
        self.m2 * self.m2p
    }

    /// Terms of the exact eavesdropper computation: `|Z|^n · M1·M1'·M2·M2'`.
    pub fn leakage_terms(&self, z: usize) -> f64 {
        (z as f64).powi(self.n as i32) * (self.codewords1() * self.codewords2()) as f64
    }

    pub fn check_guard(&self, z: usize) -> Result<()> {
        let terms = self.leakage_terms(z);
        if terms > EXACT_GUARD {
            return Err(Error::GuardExceeded { terms, limit: EXACT_GUARD });
        }
        Ok(())
    }
}

/// Random wiretap codebooks. Codeword `(m, m')` of user `i` is stored at
/// index `m · M'_i + m'`, each as `n` symbols of the prefix input alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Code {
    pub n: usize,
    pub m1: u64,
    pub m1p: u64,
    pub m2: u64,
    pub m2p: u64,
    pub c1: Vec<Vec<u8>>,
    pub c2: Vec<Vec<u8>>,
    pub seed: Option<u64>,
}

impl Code {
    /// Codebooks given explicitly, indexed as in [`Code`].
    pub fn from_codebooks(m1: u64, m1p: u64, m2: u64, m2p: u64, c1: Vec<Vec<u8>>, c2: Vec<Vec<u8>>) -> Result<Self> {
        let n = c1.first().map_or(0, Vec::len);
        if n == 0 || n > MAX_EXACT_N {
            return Err(Error::InvalidParameter(format!("block length must be in 1..={MAX_EXACT_N}")));
        }
        if c1.len() as u64 != m1 * m1p {
            return Err(Error::Dimension { expected: (m1 * m1p) as usize, got: c1.len() });
        }
        if c2.len() as u64 != m2 * m2p {
            return Err(Error::Dimension { expected: (m2 * m2p) as usize, got: c2.len() });
        }
        if let Some(w) = c1.iter().chain(&c2).find(|w| w.len() != n) {
            return Err(Error::Dimension { expected: n, got: w.len() });
        }
        Ok(Code { n, m1, m1p, m2, m2p, c1, c2, seed: None })
    }

    pub fn codeword1(&self, m: u64, mp: u64) -> &[u8] {
        &self.c1[(m * self.m1p + mp) as usize]
    }

    pub fn codeword2(&self, m: u64, mp: u64) -> &[u8] {
        &self.c2[(m * self.m2p + mp) as usize]
    }

    pub(crate) fn check_alphabets(&self, c1: usize, c2: usize) -> Result<()> {
        let bad = |book: &[Vec<u8>], size: usize| book.iter().flatten().any(|&s| s as usize >= size);
        if bad(&self.c1, c1) || bad(&self.c2, c2) {
            return Err(Error::InvalidParameter("codeword symbol outside the prefix input alphabet".into()));
        }
        Ok(())
    }
}

/// Draws both codebooks i.i.d. from the input distributions with
/// `ChaCha8Rng::seed_from_u64(seed)`: all of user 1's codewords in index
/// order, then user 2's.
pub fn generate_code(params: &CodeParams) -> Result<Code> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut draw = |count: u64, p: &[f64]| -> Vec<Vec<u8>> {
        (0..count).map(|_| (0..params.n).map(|_| sample(&mut rng, p) as u8).collect()).collect()
    };
    let c1 = draw(params.codewords1(), &params.p_c1);
    let c2 = draw(params.codewords2(), &params.p_c2);
    Ok(Code { n: params.n, m1: params.m1, m1p: params.m1p, m2: params.m2, m2p: params.m2p, c1, c2, seed: Some(params.seed) })
}
