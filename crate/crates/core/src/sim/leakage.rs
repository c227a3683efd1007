use serde::{Deserialize, Serialize};

use super::code::Code;
use super::dmc::{DmcSpec, PrefixSpec};
use crate::{Error, Result};

/// Eavesdropper output laws of a code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EveDistributions {
    /// `p(zⁿ | m1, m2)` at index `m1 · M2 + m2`; `zⁿ` is mixed-radix with
    /// the first letter most significant.
    pub conditional: Vec<Vec<f64>>,
    /// `p(zⁿ)` under uniform messages.
    pub marginal: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    /// `I(Zⁿ; M1 M2)` for the given code.
    pub leakage_bits: f64,
    /// `D(p(zⁿ | m1, m2) ‖ p(zⁿ))` at index `m1 · M2 + m2`.
    pub divergences: Vec<f64>,
}

/// Eavesdropper law per codeword symbol pair, `[c1][c2][z]`, with the
/// prefix channels folded in.
pub(crate) fn composite_eve(dmc: &DmcSpec, prefix: &PrefixSpec) -> Vec<Vec<Vec<f64>>> {
    let w = dmc.eve_channel();
    let a = dmc.alphabets();
    (0..prefix.c1())
        .map(|c1| {
            (0..prefix.c2())
                .map(|c2| {
                    (0..a.z)
                        .map(|z| {
                            let mut s = 0.0;
                            for x1 in 0..a.x1 {
                                for x2 in 0..a.x2 {
                                    s += prefix.p1.get(c1, x1) * prefix.p2.get(c2, x2) * w[x1][x2][z];
                                }
                            }
                            s
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub(crate) fn check_exact(code: &Code, dmc: &DmcSpec, prefix: &PrefixSpec) -> Result<()> {
    dmc.check_exact()?;
    prefix.check_exact()?;
    if prefix.p1.cols() != dmc.alphabets().x1 || prefix.p2.cols() != dmc.alphabets().x2 {
        return Err(Error::InvalidParameter("prefix outputs do not match the channel inputs".into()));
    }
    code.check_alphabets(prefix.c1(), prefix.c2())?;
    let z = dmc.alphabets().z as f64;
    let terms = z.powi(code.n as i32) * (code.c1.len() * code.c2.len()) as f64;
    if terms > super::code::EXACT_GUARD {
        return Err(Error::GuardExceeded { terms, limit: super::code::EXACT_GUARD });
    }
    Ok(())
}

/// Product law over `zⁿ` of one codeword pair, added into `acc` with weight
/// `weight`.
fn accumulate_product(letters: &[&[f64]], weight: f64, acc: &mut [f64], scratch: &mut Vec<f64>) {
    scratch.clear();
    scratch.push(weight);
    for law in letters {
        let prev = std::mem::take(scratch);
        scratch.reserve(prev.len() * law.len());
        for &p in &prev {
            for &q in *law {
                scratch.push(p * q);
            }
        }
    }
    for (a, s) in acc.iter_mut().zip(scratch.iter()) {
        *a += s;
    }
}

/// Exact eavesdropper laws, marginalizing the prefix noise and the uniform
/// auxiliary messages.
pub fn eve_distributions(code: &Code, dmc: &DmcSpec, prefix: &PrefixSpec) -> Result<EveDistributions> {
    check_exact(code, dmc, prefix)?;
    let w = composite_eve(dmc, prefix);
    let len = dmc.alphabets().z.pow(code.n as u32);
    if len == 1 {
        let k = (code.m1 * code.m2) as usize;
        return Ok(EveDistributions { conditional: vec![vec![1.0]; k], marginal: vec![1.0] });
    }
    let weight = 1.0 / (code.m1p * code.m2p) as f64;
    let mut scratch = Vec::with_capacity(len);
    let mut conditional = Vec::with_capacity((code.m1 * code.m2) as usize);
    for m1 in 0..code.m1 {
        for m2 in 0..code.m2 {
            let mut acc = vec![0.0; len];
            for m1p in 0..code.m1p {
                let w1 = code.codeword1(m1, m1p);
                for m2p in 0..code.m2p {
                    let w2 = code.codeword2(m2, m2p);
                    let letters: Vec<&[f64]> =
                        w1.iter().zip(w2).map(|(&a, &b)| w[a as usize][b as usize].as_slice()).collect();
                    accumulate_product(&letters, weight, &mut acc, &mut scratch);
                }
            }
            conditional.push(acc);
        }
    }
    let k = conditional.len() as f64;
    let mut marginal = vec![0.0; len];
    for c in &conditional {
        for (m, p) in marginal.iter_mut().zip(c) {
            *m += p / k;
        }
    }
    Ok(EveDistributions { conditional, marginal })
}

/// `D(p ‖ q)` in bits.
pub fn divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * (a / b).log2()).sum::<f64>().max(0.0)
}

/// `I(Zⁿ; M1 M2)` as the average divergence of the per-message laws from
/// their mixture.
pub fn exact_leakage(code: &Code, dmc: &DmcSpec, prefix: &PrefixSpec) -> Result<LeakageReport> {
    let eve = eve_distributions(code, dmc, prefix)?;
    Ok(leakage_from(&eve))
}

pub(crate) fn leakage_from(eve: &EveDistributions) -> LeakageReport {
    let divergences: Vec<f64> = eve.conditional.iter().map(|c| divergence(c, &eve.marginal)).collect();
    let leakage_bits = divergences.iter().sum::<f64>() / divergences.len() as f64;
    LeakageReport { leakage_bits, divergences }
}

/// i.i.d. eavesdropper output law induced by the input distributions,
/// `n` letters.
pub fn target_output(dmc: &DmcSpec, prefix: &PrefixSpec, p_c1: &[f64], p_c2: &[f64], n: usize) -> Result<Vec<f64>> {
    if p_c1.len() != prefix.c1() || p_c2.len() != prefix.c2() {
        return Err(Error::InvalidParameter("input distributions do not match the prefix alphabets".into()));
    }
    let w = composite_eve(dmc, prefix);
    let z = dmc.alphabets().z;
    let mut q = vec![0.0; z];
    for (c1, p1) in p_c1.iter().enumerate() {
        for (c2, p2) in p_c2.iter().enumerate() {
            for (qz, wz) in q.iter_mut().zip(&w[c1][c2]) {
                *qz += p1 * p2 * wz;
            }
        }
    }
    let mut out = vec![1.0];
    for _ in 0..n {
        out = out.iter().flat_map(|a| q.iter().map(move |b| a * b)).collect();
    }
    Ok(out)
}

/// Divergences of the per-message laws from the i.i.d. output law. Their
/// average bounds the leakage from above.
pub fn resolvability_divergences(eve: &EveDistributions, target: &[f64]) -> Vec<f64> {
    eve.conditional.iter().map(|c| divergence(c, target)).collect()
}
