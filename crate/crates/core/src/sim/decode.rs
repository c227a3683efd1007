use std::collections::HashMap;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::code::{sample, uniform, Code, EXACT_GUARD};
use super::dmc::{DmcSpec, PrefixSpec};
use crate::{Error, Result};

/// Relative likelihood gap below which two candidates tie; ties go to the
/// lower codeword index.
pub const TIE_TOL: f64 = 1e-12;

/// Normal quantile of the 95% two-sided interval.
const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ErrorMode {
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub pe: f64,
    /// 95% half-width, Monte Carlo only.
    pub half_width: Option<f64>,
}

/// Per-letter likelihoods `[candidate symbol][own input][own output]` of
/// one receiver.
struct Receiver {
    table: Vec<Vec<Vec<f64>>>,
}

impl Receiver {
    fn likelihood(&self, word: &[u8], own_x: &[usize], y: &[usize]) -> f64 {
        word.iter().zip(own_x).zip(y).map(|((&c, &x), &y)| self.table[c as usize][x][y]).product()
    }

    fn decide(&self, book: &[Vec<u8>], own_x: &[usize], y: &[usize]) -> usize {
        let mut best = (0, self.likelihood(&book[0], own_x, y));
        for (i, w) in book.iter().enumerate().skip(1) {
            let l = self.likelihood(w, own_x, y);
            if l > best.1 * (1.0 + TIE_TOL) {
                best = (i, l);
            }
        }
        best.0
    }
}

struct Setup {
    /// `p(y1, y2 | x1, x2)` as `[x1][x2][y1 * |Y2| + y2]`.
    legit: Vec<Vec<Vec<f64>>>,
    y2: usize,
    /// Bob decodes user 1 from `(x2ⁿ, y2ⁿ)`.
    bob: Receiver,
    /// Alice decodes user 2 from `(x1ⁿ, y1ⁿ)`.
    alice: Receiver,
}

impl Setup {
    fn new(dmc: &DmcSpec, prefix: &PrefixSpec) -> Self {
        let a = dmc.alphabets();
        let legit = dmc.legit_channel();
        let marg = |x1: usize, x2: usize, y: usize, first: bool| -> f64 {
            if first {
                (0..a.y2).map(|y2| legit[x1][x2][y * a.y2 + y2]).sum()
            } else {
                (0..a.y1).map(|y1| legit[x1][x2][y1 * a.y2 + y]).sum()
            }
        };
        let bob = Receiver {
            table: (0..prefix.c1())
                .map(|c| {
                    (0..a.x2)
                        .map(|x2| {
                            (0..a.y2)
                                .map(|y2| (0..a.x1).map(|x1| prefix.p1.get(c, x1) * marg(x1, x2, y2, false)).sum())
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        };
        let alice = Receiver {
            table: (0..prefix.c2())
                .map(|c| {
                    (0..a.x1)
                        .map(|x1| {
                            (0..a.y1)
                                .map(|y1| (0..a.x2).map(|x2| prefix.p2.get(c, x2) * marg(x1, x2, y1, true)).sum())
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        };
        Setup { legit, y2: a.y2, bob, alice }
    }
}

/// Positive-probability input sequences of a codeword through its prefix.
fn input_sequences(word: &[u8], prefix: &super::dmc::Stochastic) -> Vec<(Vec<usize>, f64)> {
    let mut out = vec![(Vec::with_capacity(word.len()), 1.0)];
    for &c in word {
        let row = prefix.row(c as usize);
        out = out
            .into_iter()
            .flat_map(|(seq, p)| {
                row.iter().enumerate().filter(|(_, q)| **q > 0.0).map(move |(x, q)| {
                    let mut s = seq.clone();
                    s.push(x);
                    (s, p * q)
                })
            })
            .collect();
    }
    out
}

fn seq_index(seq: &[usize], radix: usize) -> usize {
    seq.iter().fold(0, |acc, &s| acc * radix + s)
}

fn all_sequences(n: usize, radix: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..radix.pow(n as u32)).map(move |mut k| {
        let mut s = vec![0; n];
        for slot in s.iter_mut().rev() {
            *slot = k % radix;
            k /= radix;
        }
        s
    })
}

fn exact_terms(code: &Code, prefix: &PrefixSpec, legit: &[Vec<Vec<f64>>]) -> f64 {
    let positive = |row: &[f64]| row.iter().filter(|p| **p > 0.0).count() as f64;
    let k = legit.iter().flatten().map(|r| positive(r)).fold(0.0, f64::max);
    let count = |book: &[Vec<u8>], pre: &super::dmc::Stochastic| -> f64 {
        book.iter().map(|w| w.iter().map(|&c| positive(pre.row(c as usize))).product::<f64>()).sum()
    };
    count(&code.c1, &prefix.p1) * count(&code.c2, &prefix.p2) * k.powi(code.n as i32)
}

/// Probability that either receiver misdecodes the other user's
/// `(message, auxiliary message)` pair, with maximum-likelihood decoders
/// that use their own channel input.
pub fn ml_error(code: &Code, dmc: &DmcSpec, prefix: &PrefixSpec, mode: ErrorMode) -> Result<ErrorEstimate> {
    dmc.check_exact()?;
    prefix.check_exact()?;
    code.check_alphabets(prefix.c1(), prefix.c2())?;
    let setup = Setup::new(dmc, prefix);
    match mode {
        ErrorMode::Exact => exact_error(code, dmc, prefix, &setup),
        ErrorMode::MonteCarlo { trials, seed } => monte_carlo_error(code, dmc, prefix, &setup, trials, seed),
    }
}

fn exact_error(code: &Code, dmc: &DmcSpec, prefix: &PrefixSpec, s: &Setup) -> Result<ErrorEstimate> {
    let terms = exact_terms(code, prefix, &s.legit);
    if terms > EXACT_GUARD {
        return Err(Error::GuardExceeded { terms, limit: EXACT_GUARD });
    }
    let a = dmc.alphabets();
    let n = code.n;
    let mut bob_cache: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut alice_cache: HashMap<usize, Vec<usize>> = HashMap::new();
    let x1_seqs: Vec<_> = code.c1.iter().map(|w| input_sequences(w, &prefix.p1)).collect();
    let x2_seqs: Vec<_> = code.c2.iter().map(|w| input_sequences(w, &prefix.p2)).collect();
    let pairs: Vec<(usize, usize)> = (0..a.y1).flat_map(|y1| (0..a.y2).map(move |y2| (y1, y2))).collect();

    let mut err = 0.0;
    for (i1, xs1) in x1_seqs.iter().enumerate() {
        for (i2, xs2) in x2_seqs.iter().enumerate() {
            let mut wrong = 0.0;
            for (x1, p1) in xs1 {
                let k1 = seq_index(x1, a.x1);
                let alice = alice_cache.entry(k1).or_insert_with(|| {
                    all_sequences(n, a.y1).map(|y| s.alice.decide(&code.c2, x1, &y)).collect()
                });
                for (x2, p2) in xs2 {
                    let k2 = seq_index(x2, a.x2);
                    let bob = bob_cache.entry(k2).or_insert_with(|| {
                        all_sequences(n, a.y2).map(|y| s.bob.decide(&code.c1, x2, &y)).collect()
                    });
                    // depth-first over joint outputs, tracking both sequence indices
                    let mut stack = vec![(0usize, 0usize, 0usize, p1 * p2)];
                    while let Some((t, iy1, iy2, p)) = stack.pop() {
                        if t == n {
                            if bob[iy2] != i1 || alice[iy1] != i2 {
                                wrong += p;
                            }
                            continue;
                        }
                        let law = &s.legit[x1[t]][x2[t]];
                        for &(y1, y2) in &pairs {
                            let q = law[y1 * s.y2 + y2];
                            if q > 0.0 {
                                stack.push((t + 1, iy1 * a.y1 + y1, iy2 * a.y2 + y2, p * q));
                            }
                        }
                    }
                }
            }
            err += wrong;
        }
    }
    let pe = (err / (x1_seqs.len() * x2_seqs.len()) as f64).clamp(0.0, 1.0);
    Ok(ErrorEstimate { pe, half_width: None })
}

fn monte_carlo_error(
    code: &Code,
    dmc: &DmcSpec,
    prefix: &PrefixSpec,
    s: &Setup,
    trials: u64,
    seed: u64,
) -> Result<ErrorEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("Monte Carlo mode needs at least one trial".into()));
    }
    let a = dmc.alphabets();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng, k: usize| ((uniform(rng) * k as f64) as usize).min(k - 1);
    let mut errors = 0u64;
    let (mut x1, mut x2, mut y1, mut y2) = (vec![0; code.n], vec![0; code.n], vec![0; code.n], vec![0; code.n]);
    for _ in 0..trials {
        let i1 = pick(&mut rng, code.c1.len());
        let i2 = pick(&mut rng, code.c2.len());
        for t in 0..code.n {
            x1[t] = sample(&mut rng, prefix.p1.row(code.c1[i1][t] as usize));
            x2[t] = sample(&mut rng, prefix.p2.row(code.c2[i2][t] as usize));
            let y = sample(&mut rng, &s.legit[x1[t]][x2[t]]);
            y1[t] = y / a.y2;
            y2[t] = y % a.y2;
        }
        if s.bob.decide(&code.c1, &x2, &y2) != i1 || s.alice.decide(&code.c2, &x1, &y1) != i2 {
            errors += 1;
        }
    }
    let pe = errors as f64 / trials as f64;
    let half_width = Z95 * (pe * (1.0 - pe) / trials as f64).sqrt();
    Ok(ErrorEstimate { pe, half_width: Some(half_width) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::dmc::Alphabets;

    fn noiseless() -> DmcSpec {
        let a = Alphabets { x1: 2, x2: 2, y1: 2, y2: 2, z: 1 };
        DmcSpec::from_fn(a, |x1, x2, y1, y2, _| if y1 == x2 && y2 == x1 { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn noiseless_distinct_codewords_never_fail() {
        let d = noiseless();
        let p = PrefixSpec::identity(&d);
        let code = Code::from_codebooks(2, 2, 2, 1, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]], vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(ml_error(&code, &d, &p, ErrorMode::Exact).unwrap().pe, 0.0);
        let mc = ml_error(&code, &d, &p, ErrorMode::MonteCarlo { trials: 500, seed: 3 }).unwrap();
        assert_eq!((mc.pe, mc.half_width), (0.0, Some(0.0)));
    }

    #[test]
    fn uninformative_output_picks_lowest_index() {
        let a = Alphabets { x1: 2, x2: 1, y1: 1, y2: 2, z: 1 };
        let d = DmcSpec::from_fn(a, |_, _, _, _, _| 0.5).unwrap();
        let p = PrefixSpec::identity(&d);
        for m in [2u64, 3, 4] {
            let book: Vec<Vec<u8>> = (0..m).map(|i| vec![(i % 2) as u8, (i / 2 % 2) as u8]).collect();
            let code = Code::from_codebooks(m, 1, 1, 1, book, vec![vec![0, 0]]).unwrap();
            let pe = ml_error(&code, &d, &p, ErrorMode::Exact).unwrap().pe;
            assert!((pe - (m - 1) as f64 / m as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_trials_rejected() {
        let d = noiseless();
        let p = PrefixSpec::identity(&d);
        let code = Code::from_codebooks(1, 1, 1, 1, vec![vec![0]], vec![vec![1]]).unwrap();
        assert!(ml_error(&code, &d, &p, ErrorMode::MonteCarlo { trials: 0, seed: 0 }).is_err());
    }
}
