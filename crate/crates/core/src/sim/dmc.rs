use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Error, Result};

/// Row sums of stochastic objects must be within this of one.
pub const NORM_TOL: f64 = 1e-12;

/// Largest alphabet accepted by the exact computations.
pub const MAX_EXACT_ALPHABET: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Alphabets {
    pub x1: usize,
    pub x2: usize,
    pub y1: usize,
    pub y2: usize,
    pub z: usize,
}

impl Alphabets {
    fn sizes(&self) -> [usize; 5] {
        [self.x1, self.x2, self.y1, self.y2, self.z]
    }

    pub fn tensor_len(&self) -> usize {
        self.sizes().iter().product()
    }
}

/// Transition law `p(y1, y2, z | x1, x2)` of a memoryless two-way wiretap
/// channel, stored row-major over `[x1][x2][y1][y2][z]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DmcSpec {
    alphabets: Alphabets,
    tensor: Vec<f64>,
}

impl DmcSpec {
    pub fn new(alphabets: Alphabets, tensor: Vec<f64>) -> Result<Self> {
        if alphabets.sizes().contains(&0) {
            return Err(Error::InvalidParameter("alphabet sizes must be at least 1".into()));
        }
        if tensor.len() != alphabets.tensor_len() {
            return Err(Error::Dimension { expected: alphabets.tensor_len(), got: tensor.len() });
        }
        if tensor.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidParameter("transition probabilities must be finite and >= 0".into()));
        }
        let row = alphabets.y1 * alphabets.y2 * alphabets.z;
        for (k, chunk) in tensor.chunks(row).enumerate() {
            let s: f64 = chunk.iter().sum();
            if (s - 1.0).abs() > NORM_TOL {
                let (x1, x2) = (k / alphabets.x2, k % alphabets.x2);
                return Err(Error::InvalidParameter(format!("p(.|x1={x1}, x2={x2}) sums to {s}")));
            }
        }
        Ok(DmcSpec { alphabets, tensor })
    }

    pub fn from_fn(alphabets: Alphabets, f: impl Fn(usize, usize, usize, usize, usize) -> f64) -> Result<Self> {
        let mut t = Vec::with_capacity(alphabets.tensor_len());
        for x1 in 0..alphabets.x1 {
            for x2 in 0..alphabets.x2 {
                for y1 in 0..alphabets.y1 {
                    for y2 in 0..alphabets.y2 {
                        for z in 0..alphabets.z {
                            t.push(f(x1, x2, y1, y2, z));
                        }
                    }
                }
            }
        }
        Self::new(alphabets, t)
    }

    pub fn alphabets(&self) -> Alphabets {
        self.alphabets
    }

    pub fn tensor(&self) -> &[f64] {
        &self.tensor
    }

    pub fn p(&self, x1: usize, x2: usize, y1: usize, y2: usize, z: usize) -> f64 {
        let a = &self.alphabets;
        self.tensor[(((x1 * a.x2 + x2) * a.y1 + y1) * a.y2 + y2) * a.z + z]
    }

    /// `p(y1, y2 | x1, x2)` as `[x1][x2][y1 * |Y2| + y2]`.
    pub fn legit_channel(&self) -> Vec<Vec<Vec<f64>>> {
        let a = &self.alphabets;
        (0..a.x1)
            .map(|x1| {
                (0..a.x2)
                    .map(|x2| {
                        let mut out = vec![0.0; a.y1 * a.y2];
                        for y1 in 0..a.y1 {
                            for y2 in 0..a.y2 {
                                out[y1 * a.y2 + y2] = (0..a.z).map(|z| self.p(x1, x2, y1, y2, z)).sum();
                            }
                        }
                        out
                    })
                    .collect()
            })
            .collect()
    }

    /// `p(z | x1, x2)` as `[x1][x2][z]`.
    pub fn eve_channel(&self) -> Vec<Vec<Vec<f64>>> {
        let a = &self.alphabets;
        (0..a.x1)
            .map(|x1| {
                (0..a.x2)
                    .map(|x2| {
                        (0..a.z)
                            .map(|z| {
                                let mut s = 0.0;
                                for y1 in 0..a.y1 {
                                    for y2 in 0..a.y2 {
                                        s += self.p(x1, x2, y1, y2, z);
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

    pub fn check_exact(&self) -> Result<()> {
        if let Some(s) = self.alphabets.sizes().iter().find(|s| **s > MAX_EXACT_ALPHABET) {
            return Err(Error::InvalidParameter(format!(
                "alphabet of size {s} exceeds the exact-mode limit {MAX_EXACT_ALPHABET}"
            )));
        }
        Ok(())
    }
}

/// Row-stochastic matrix `p(col | row)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stochastic {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Stochastic {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("stochastic matrix must be non-empty".into()));
        }
        let mut data = Vec::with_capacity(n_rows * cols);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension { expected: cols, got: row.len() });
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidParameter(format!("row {r} has a negative or non-finite entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidParameter(format!("row {r} sums to {s}")));
            }
            data.extend(row);
        }
        Ok(Stochastic { rows: n_rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Stochastic { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// Artificial prefix channels `p(x1 | c1)` and `p(x2 | c2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefixSpec {
    pub p1: Stochastic,
    pub p2: Stochastic,
}

impl PrefixSpec {
    pub fn new(p1: Stochastic, p2: Stochastic, dmc: &DmcSpec) -> Result<Self> {
        let a = dmc.alphabets();
        if p1.cols() != a.x1 {
            return Err(Error::Dimension { expected: a.x1, got: p1.cols() });
        }
        if p2.cols() != a.x2 {
            return Err(Error::Dimension { expected: a.x2, got: p2.cols() });
        }
        Ok(PrefixSpec { p1, p2 })
    }

    /// No prefix: codeword symbols are sent as they are.
    pub fn identity(dmc: &DmcSpec) -> Self {
        let a = dmc.alphabets();
        PrefixSpec { p1: Stochastic::identity(a.x1), p2: Stochastic::identity(a.x2) }
    }

    pub fn c1(&self) -> usize {
        self.p1.rows()
    }

    pub fn c2(&self) -> usize {
        self.p2.rows()
    }

    pub fn check_exact(&self) -> Result<()> {
        if self.c1() > MAX_EXACT_ALPHABET || self.c2() > MAX_EXACT_ALPHABET {
            return Err(Error::InvalidParameter(format!(
                "codeword alphabet exceeds the exact-mode limit {MAX_EXACT_ALPHABET}"
            )));
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    alphabets: Alphabets,
    tensor: Value,
    #[serde(default)]
    prefix1: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    prefix2: Option<Vec<Vec<f64>>>,
}

fn flatten(v: &Value, shape: &[usize], out: &mut Vec<f64>) -> Result<()> {
    match (v, shape.split_first()) {
        (Value::Number(n), None) => {
            out.push(n.as_f64().ok_or_else(|| Error::InvalidParameter("tensor entry is not a number".into()))?);
            Ok(())
        }
        (Value::Array(items), Some((&len, rest))) => {
            if items.len() != len {
                return Err(Error::Dimension { expected: len, got: items.len() });
            }
            items.iter().try_for_each(|it| flatten(it, rest, out))
        }
        _ => Err(Error::InvalidParameter("tensor nesting does not match the alphabets".into())),
    }
}

/// Parses a channel document: alphabet sizes, the transition tensor (flat
/// or nested `[x1][x2][y1][y2][z]`), and optional prefix matrices (identity
/// when absent).
pub fn parse_dmc_json(text: &str) -> Result<(DmcSpec, PrefixSpec)> {
    let raw: RawDocument = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
    let a = raw.alphabets;
    let mut tensor = Vec::with_capacity(a.tensor_len());
    let flat = matches!(&raw.tensor, Value::Array(items) if items.iter().all(Value::is_number));
    if flat {
        flatten(&raw.tensor, &[a.tensor_len()], &mut tensor)?;
    } else {
        flatten(&raw.tensor, &a.sizes(), &mut tensor)?;
    }
    let dmc = DmcSpec::new(a, tensor)?;
    let p1 = raw.prefix1.map(Stochastic::new).transpose()?.unwrap_or_else(|| Stochastic::identity(a.x1));
    let p2 = raw.prefix2.map(Stochastic::new).transpose()?.unwrap_or_else(|| Stochastic::identity(a.x2));
    let prefix = PrefixSpec::new(p1, p2, &dmc)?;
    Ok((dmc, prefix))
}

pub fn load_dmc_json(path: &Path) -> Result<(DmcSpec, PrefixSpec)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Spec(format!("{}: {e}", path.display())))?;
    parse_dmc_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BIN: Alphabets = Alphabets { x1: 2, x2: 2, y1: 1, y2: 1, z: 2 };

    #[test]
    fn flat_and_nested_agree() {
        let flat = r#"{"alphabets":{"x1":2,"x2":2,"y1":1,"y2":1,"z":2},
            "tensor":[1,0, 0,1, 0,1, 1,0]}"#;
        let nested = r#"{"alphabets":{"x1":2,"x2":2,"y1":1,"y2":1,"z":2},
            "tensor":[[[[[1,0]]],[[[0,1]]]],[[[[0,1]]],[[[1,0]]]]]}"#;
        let (a, pa) = parse_dmc_json(flat).unwrap();
        let (b, _) = parse_dmc_json(nested).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.p(1, 0, 0, 0, 1), 1.0);
        assert_eq!(pa, PrefixSpec::identity(&a));
    }

    #[test]
    fn rejects_bad_documents() {
        let unnormalized = r#"{"alphabets":{"x1":2,"x2":2,"y1":1,"y2":1,"z":2},"tensor":[1,0,0,1,0,1,1,0.1]}"#;
        assert!(parse_dmc_json(unnormalized).is_err());
        let unknown = r#"{"alphabets":{"x1":1,"x2":1,"y1":1,"y2":1,"z":1},"tensor":[1],"extra":1}"#;
        assert!(parse_dmc_json(unknown).is_err());
        let short = r#"{"alphabets":{"x1":2,"x2":2,"y1":1,"y2":1,"z":2},"tensor":[1,0]}"#;
        assert!(matches!(parse_dmc_json(short), Err(Error::Dimension { .. })));
        let bad_prefix = r#"{"alphabets":{"x1":1,"x2":1,"y1":1,"y2":1,"z":1},"tensor":[1],"prefix1":[[0.5,0.5]]}"#;
        assert!(matches!(parse_dmc_json(bad_prefix), Err(Error::Dimension { .. })));
    }

    #[test]
    fn marginal_channels() {
        let d = DmcSpec::from_fn(BIN, |x1, x2, _, _, z| if (x1 ^ x2) == z { 0.9 } else { 0.1 }).unwrap();
        let e = d.eve_channel();
        assert_eq!(e[1][1], vec![0.9, 0.1]);
        let l = d.legit_channel();
        assert_eq!(l[0][1], vec![1.0]);
    }

    #[test]
    fn stochastic_checks() {
        assert!(Stochastic::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        assert!(Stochastic::new(vec![vec![1.5, -0.5]]).is_err());
        let s = Stochastic::new(vec![vec![0.25, 0.75]]).unwrap();
        assert_eq!((s.rows(), s.cols(), s.get(0, 1)), (1, 2, 0.75));
    }
}
