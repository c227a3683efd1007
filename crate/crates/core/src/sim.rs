//! Exact finite-length simulation of random wiretap codes on a discrete
//! memoryless two-way wiretap channel.
//!
//! Codebooks are drawn with `rand_chacha` 0.3 `ChaCha8Rng::seed_from_u64`,
//! one 64-bit word per symbol (top 53 bits as a uniform, inverse-CDF
//! sampling), user 1's codebook first. Eavesdropper laws and leakage are
//! computed by exact enumeration; decoding error is exact or Monte Carlo.

mod code;
mod decode;
mod dmc;
mod leakage;

pub use code::{generate_code, message_count, Code, CodeParams, EXACT_GUARD, MAX_EXACT_N};
pub use decode::{ml_error, ErrorEstimate, ErrorMode, TIE_TOL};
pub use dmc::{load_dmc_json, parse_dmc_json, Alphabets, DmcSpec, PrefixSpec, Stochastic, MAX_EXACT_ALPHABET, NORM_TOL};
pub use leakage::{
    divergence, eve_distributions, exact_leakage, resolvability_divergences, target_output, EveDistributions,
    LeakageReport,
};

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gaussian::MiProfile;
use crate::regions::RatePoint4;
use crate::{Error, Result};

/// `(message + key) mod modulus`.
pub fn one_time_pad(message: u64, key: u64, modulus: u64) -> Result<u64> {
    for v in [message, key] {
        if v >= modulus {
            return Err(Error::OutOfRange { value: v, modulus });
        }
    }
    Ok(((message as u128 + key as u128) % modulus as u128) as u64)
}

/// Inverse of [`one_time_pad`].
pub fn one_time_pad_decrypt(cipher: u64, key: u64, modulus: u64) -> Result<u64> {
    for v in [cipher, key] {
        if v >= modulus {
            return Err(Error::OutOfRange { value: v, modulus });
        }
    }
    Ok(((cipher as u128 + modulus as u128 - key as u128) % modulus as u128) as u64)
}

// axes of the single-letter joint law
const C1: usize = 0;
const C2: usize = 1;
const X1: usize = 2;
const X2: usize = 3;
const Y1: usize = 4;
const Y2: usize = 5;
const Z: usize = 6;

struct Joint {
    sizes: [usize; 7],
    p: Vec<f64>,
}

impl Joint {
    fn index_of(&self, mut k: usize) -> [usize; 7] {
        let mut idx = [0; 7];
        for ax in (0..7).rev() {
            idx[ax] = k % self.sizes[ax];
            k /= self.sizes[ax];
        }
        idx
    }

    fn key(&self, idx: &[usize; 7], axes: &[usize]) -> usize {
        axes.iter().fold(0, |acc, &ax| acc * self.sizes[ax] + idx[ax])
    }

    fn table(&self, axes: &[usize]) -> Vec<f64> {
        let mut t = vec![0.0; axes.iter().map(|&a| self.sizes[a]).product()];
        for (k, &p) in self.p.iter().enumerate() {
            if p > 0.0 {
                t[self.key(&self.index_of(k), axes)] += p;
            }
        }
        t
    }

    /// `I(A; B | C)` in bits by direct summation of
    /// `p(a,b,c) log p(a,b,c) p(c) / (p(a,c) p(b,c))`.
    fn cmi(&self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        let abc: Vec<usize> = [a, b, c].concat();
        let ac: Vec<usize> = [a, c].concat();
        let bc: Vec<usize> = [b, c].concat();
        let (t_abc, t_ac, t_bc, t_c) = (self.table(&abc), self.table(&ac), self.table(&bc), self.table(c));
        let mut seen = vec![false; t_abc.len()];
        let mut s = 0.0;
        for k in 0..self.p.len() {
            let idx = self.index_of(k);
            let kabc = self.key(&idx, &abc);
            if seen[kabc] || t_abc[kabc] <= 0.0 {
                continue;
            }
            seen[kabc] = true;
            let p = t_abc[kabc];
            s += p * (p * t_c[self.key(&idx, c)] / (t_ac[self.key(&idx, &ac)] * t_bc[self.key(&idx, &bc)])).log2();
        }
        s.max(0.0)
    }
}

/// Single-letter rate thresholds of the channel with independent codeword
/// symbols `C1 ~ p_c1`, `C2 ~ p_c2` passed through the prefixes.
pub fn single_letter_mi(dmc: &DmcSpec, prefix: &PrefixSpec, p_c1: &[f64], p_c2: &[f64]) -> Result<MiProfile> {
    if p_c1.len() != prefix.c1() || p_c2.len() != prefix.c2() {
        return Err(Error::InvalidParameter("input distributions do not match the prefix alphabets".into()));
    }
    for p in [p_c1, p_c2] {
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) || (p.iter().sum::<f64>() - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter("input distribution must be a probability vector".into()));
        }
    }
    let a = dmc.alphabets();
    let sizes = [prefix.c1(), prefix.c2(), a.x1, a.x2, a.y1, a.y2, a.z];
    let mut p = Vec::with_capacity(sizes.iter().product());
    for c1 in 0..sizes[C1] {
        for c2 in 0..sizes[C2] {
            for x1 in 0..a.x1 {
                for x2 in 0..a.x2 {
                    let w = p_c1[c1] * p_c2[c2] * prefix.p1.get(c1, x1) * prefix.p2.get(c2, x2);
                    for y1 in 0..a.y1 {
                        for y2 in 0..a.y2 {
                            for z in 0..a.z {
                                p.push(w * dmc.p(x1, x2, y1, y2, z));
                            }
                        }
                    }
                }
            }
        }
    }
    let j = Joint { sizes, p };
    Ok(MiProfile {
        a1: j.cmi(&[Y2], &[C1], &[X2]),
        a2: j.cmi(&[Y1], &[C2], &[X1]),
        e1: j.cmi(&[C1], &[Z], &[]),
        e2: j.cmi(&[C2], &[Z], &[]),
        e12: j.cmi(&[C1, C2], &[Z], &[]),
        e1c: j.cmi(&[C1], &[Z], &[C2]),
        e2c: j.cmi(&[C2], &[Z], &[C1]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportMode {
    Exact,
    MonteCarlo,
}

/// Secrecy and reliability of one code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecrecyReport {
    pub n: usize,
    pub m1: u64,
    pub m1p: u64,
    pub m2: u64,
    pub m2p: u64,
    pub seed: Option<u64>,
    /// How `pe` was obtained; leakage is always exact.
    pub mode: ReportMode,
    pub leakage_bits: f64,
    pub pe: f64,
    pub pe_half_width: Option<f64>,
    /// `D(p(zⁿ | m1, m2) ‖ p(zⁿ))` at index `m1 · M2 + m2`.
    pub divergences: Vec<f64>,
    pub mean_divergence: f64,
    /// `D(p(zⁿ | m1, m2) ‖ q^{⊗n})` against the i.i.d. output law.
    pub target_divergences: Vec<f64>,
    pub mean_target_divergence: f64,
}

pub fn evaluate_code(
    code: &Code,
    dmc: &DmcSpec,
    prefix: &PrefixSpec,
    p_c1: &[f64],
    p_c2: &[f64],
    mode: ErrorMode,
) -> Result<SecrecyReport> {
    let eve = eve_distributions(code, dmc, prefix)?;
    let leak = leakage::leakage_from(&eve);
    let target = target_output(dmc, prefix, p_c1, p_c2, code.n)?;
    let target_divergences = resolvability_divergences(&eve, &target);
    let err = ml_error(code, dmc, prefix, mode)?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(SecrecyReport {
        n: code.n,
        m1: code.m1,
        m1p: code.m1p,
        m2: code.m2,
        m2p: code.m2p,
        seed: code.seed,
        mode: match mode {
            ErrorMode::Exact => ReportMode::Exact,
            ErrorMode::MonteCarlo { .. } => ReportMode::MonteCarlo,
        },
        leakage_bits: leak.leakage_bits,
        pe: err.pe,
        pe_half_width: err.half_width,
        mean_divergence: mean(&leak.divergences),
        divergences: leak.divergences,
        mean_target_divergence: mean(&target_divergences),
        target_divergences,
    })
}

/// How decoding error is evaluated in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum PeMode {
    Exact,
    /// Trial seeds are derived from the experiment seed.
    MonteCarlo { trials: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub p_c1: Vec<f64>,
    pub p_c2: Vec<f64>,
    pub rates: RatePoint4,
    pub n_list: Vec<usize>,
    pub codes_per_n: usize,
    pub seed: u64,
    #[serde(default = "default_pe_mode")]
    pub pe_mode: PeMode,
}

fn default_pe_mode() -> PeMode {
    PeMode::Exact
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub n: usize,
    pub m1: u64,
    pub m1p: u64,
    pub m2: u64,
    pub m2p: u64,
    pub codes: usize,
    pub mean_leakage: Option<f64>,
    pub mean_pe: Option<f64>,
    /// Why the cell was skipped, if it was.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaReport {
    pub n: usize,
    pub replica: usize,
    pub report: SecrecyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub thresholds: MiProfile,
    pub rates: RatePoint4,
    pub rows: Vec<ThresholdRow>,
    pub reports: Vec<ReplicaReport>,
}

/// Averages exact leakage and decoding error over random codes for each
/// block length, next to the single-letter thresholds.
///
/// Replica seeds come from a `ChaCha8Rng` seeded with `spec.seed`, two words
/// per replica (code, Monte Carlo trials) in `(n, replica)` order. Cells
/// that exceed the exact-mode guard are reported as skipped.
pub fn threshold_experiment(dmc: &DmcSpec, prefix: &PrefixSpec, spec: &ExperimentSpec) -> Result<ThresholdTable> {
    if spec.codes_per_n == 0 {
        return Err(Error::InvalidParameter("codes_per_n must be at least 1".into()));
    }
    let thresholds = single_letter_mi(dmc, prefix, &spec.p_c1, &spec.p_c2)?;
    let mut master = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = Vec::with_capacity(spec.n_list.len());
    let mut reports = Vec::new();
    for &n in &spec.n_list {
        let seeds: Vec<(u64, u64)> = (0..spec.codes_per_n).map(|_| (master.next_u64(), master.next_u64())).collect();
        let base = CodeParams::from_rates(n, &spec.rates, spec.p_c1.clone(), spec.p_c2.clone(), 0)?;
        let mut row = ThresholdRow {
            n,
            m1: base.m1,
            m1p: base.m1p,
            m2: base.m2,
            m2p: base.m2p,
            codes: 0,
            mean_leakage: None,
            mean_pe: None,
            skipped: None,
        };
        let cell = base.validate().and_then(|_| base.check_guard(dmc.alphabets().z)).and_then(|_| {
            seeds
                .par_iter()
                .map(|&(code_seed, trial_seed)| {
                    let code = generate_code(&CodeParams { seed: code_seed, ..base.clone() })?;
                    let mode = match spec.pe_mode {
                        PeMode::Exact => ErrorMode::Exact,
                        PeMode::MonteCarlo { trials } => ErrorMode::MonteCarlo { trials, seed: trial_seed },
                    };
                    evaluate_code(&code, dmc, prefix, &spec.p_c1, &spec.p_c2, mode)
                })
                .collect::<Result<Vec<_>>>()
        });
        match cell {
            Ok(reps) => {
                let k = reps.len() as f64;
                row.codes = reps.len();
                row.mean_leakage = Some(reps.iter().map(|r| r.leakage_bits).sum::<f64>() / k);
                row.mean_pe = Some(reps.iter().map(|r| r.pe).sum::<f64>() / k);
                log::info!("n = {n}: {} codes, mean leakage {:?}, mean pe {:?}", row.codes, row.mean_leakage, row.mean_pe);
                reports.extend(reps.into_iter().enumerate().map(|(replica, report)| ReplicaReport { n, replica, report }));
            }
            Err(e @ (Error::GuardExceeded { .. } | Error::InvalidParameter(_))) => {
                log::warn!("skipping n = {n}: {e}");
                row.skipped = Some(e.to_string());
            }
            Err(e) => return Err(e),
        }
        rows.push(row);
    }
    Ok(ThresholdTable { thresholds, rates: spec.rates, rows, reports })
}
