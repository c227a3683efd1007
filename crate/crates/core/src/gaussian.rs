//! Gaussian two-way wiretap channel with prefix jamming noise.
//!
//! Channel model (all additive noises have unit variance):
//!
//! ```text
//! Y1 = √g1·X1 + X2 + N21
//! Y2 = X1 + √g2·X2 + N12
//! Z  = √h1·X1 + √h2·X2 + Ne
//! Xi = Ci + Nii,   Ci ~ N(0, ρi − ρiⁿ),   Nii ~ N(0, ρiⁿ)
//! ```
//!
//! [`mi_profile`] evaluates the seven single-letter mutual informations in
//! closed form; [`mi_oracle`] recomputes any of them from the full joint
//! covariance and is used to validate the closed forms.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub g1: f64,
    pub g2: f64,
    pub h1: f64,
    pub h2: f64,
    pub rho1: f64,
    pub rho2: f64,
}

impl ChannelParams {
    pub fn new(g1: f64, g2: f64, h1: f64, h2: f64, rho1: f64, rho2: f64) -> Result<Self> {
        let p = ChannelParams { g1, g2, h1, h2, rho1, rho2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("g1", self.g1),
            ("g2", self.g2),
            ("h1", self.h1),
            ("h2", self.h2),
            ("rho1", self.rho1),
            ("rho2", self.rho2),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn preset(preset: Preset) -> Self {
        match preset {
            Preset::Fig4 => ChannelParams { g1: 1.0, g2: 1.0, h1: 1.0, h2: 0.1, rho1: 1.0, rho2: 100.0 },
            Preset::Fig5 => ChannelParams { g1: 1.0, g2: 1.0, h1: 1.5, h2: 1.5, rho1: 1.0, rho2: 1.0 },
            Preset::Fig6 => ChannelParams { g1: 1.0, g2: 1.0, h1: 10.0, h2: 10.0, rho1: 0.9, rho2: 0.9 },
        }
    }

    /// The same channel with the roles of the two users exchanged.
    pub fn swapped(&self) -> Self {
        ChannelParams {
            g1: self.g2,
            g2: self.g1,
            h1: self.h2,
            h2: self.h1,
            rho1: self.rho2,
            rho2: self.rho1,
        }
    }
}

/// Named parameter sets of the three evaluated channel configurations.
///
/// `Fig4` uses `h1 = 1`. A value of `h1 = 10` is sometimes quoted for this
/// configuration in discussion of its key rates; the preset keeps `h1 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig4,
    Fig5,
    Fig6,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig4" => Ok(Preset::Fig4),
            "fig5" => Ok(Preset::Fig5),
            "fig6" => Ok(Preset::Fig6),
            other => Err(Error::InvalidParameter(format!("unknown preset '{other}'"))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
        })
    }
}

/// Division of each user's power between jamming noise and codeword.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSplit {
    pub rho1n: f64,
    pub rho2n: f64,
    pub rho1c: f64,
    pub rho2c: f64,
}

impl PowerSplit {
    pub fn new(params: &ChannelParams, rho1n: f64, rho2n: f64) -> Result<Self> {
        for (name, v, budget) in [("rho1n", rho1n, params.rho1), ("rho2n", rho2n, params.rho2)] {
            if !v.is_finite() || v < 0.0 || v > budget {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} must lie in [0, {budget}]"
                )));
            }
        }
        Ok(PowerSplit {
            rho1n,
            rho2n,
            rho1c: params.rho1 - rho1n,
            rho2c: params.rho2 - rho2n,
        })
    }

    /// No jamming: all power on the codewords.
    pub fn no_jamming(params: &ChannelParams) -> Self {
        PowerSplit { rho1n: 0.0, rho2n: 0.0, rho1c: params.rho1, rho2c: params.rho2 }
    }

    pub fn swapped(&self) -> Self {
        PowerSplit { rho1n: self.rho2n, rho2n: self.rho1n, rho1c: self.rho2c, rho2c: self.rho1c }
    }
}

/// The seven single-letter mutual informations (bits) that define every
/// rate region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiProfile {
    /// `I(Y2; C1 | X2)`
    pub a1: f64,
    /// `I(Y1; C2 | X1)`
    pub a2: f64,
    /// `I(C1; Z)`
    pub e1: f64,
    /// `I(C2; Z)`
    pub e2: f64,
    /// `I(C1 C2; Z)`
    pub e12: f64,
    /// `I(C1; Z | C2)`
    pub e1c: f64,
    /// `I(C2; Z | C1)`
    pub e2c: f64,
}

/// Tolerance for the chain-rule identities of [`MiProfile`].
pub const CHAIN_RULE_TOL: f64 = 1e-9;

impl MiProfile {
    /// Builds a profile from the legitimate rates, the individual leakages and
    /// the joint leakage; the conditional terms follow from the chain rule.
    pub fn from_chain(a1: f64, a2: f64, e1: f64, e2: f64, e12: f64) -> Result<Self> {
        let mi = MiProfile { a1, a2, e1, e2, e12, e1c: e12 - e2, e2c: e12 - e1 };
        mi.validate()?;
        Ok(mi)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.a1, self.a2, self.e1, self.e2, self.e12, self.e1c, self.e2c];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(format!("mutual informations must be finite and >= 0: {self:?}")));
        }
        if (self.e12 - self.e1 - self.e2c).abs() > CHAIN_RULE_TOL
            || (self.e12 - self.e2 - self.e1c).abs() > CHAIN_RULE_TOL
        {
            return Err(Error::InvalidParameter(format!("chain rule violated: {self:?}")));
        }
        if self.e1c < self.e1 - CHAIN_RULE_TOL || self.e2c < self.e2 - CHAIN_RULE_TOL {
            return Err(Error::InvalidParameter(format!(
                "conditional leakage below marginal leakage: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn swapped(&self) -> Self {
        MiProfile {
            a1: self.a2,
            a2: self.a1,
            e1: self.e2,
            e2: self.e1,
            e12: self.e12,
            e1c: self.e2c,
            e2c: self.e1c,
        }
    }
}

/// `½·log2(1 + x)`, exact zero at `x = 0`.
fn half_log2_1p(x: f64) -> f64 {
    0.5 * x.ln_1p() / LN_2
}

/// Closed-form single-letter mutual informations for Gaussian codewords.
pub fn mi_profile(params: &ChannelParams, split: &PowerSplit) -> Result<MiProfile> {
    params.validate()?;
    PowerSplit::new(params, split.rho1n, split.rho2n)?;
    let ChannelParams { h1, h2, rho1, rho2, .. } = *params;
    let PowerSplit { rho1n, rho2n, rho1c, rho2c } = *split;

    let floor = h1 * rho1n + h2 * rho2n + 1.0;
    Ok(MiProfile {
        a1: half_log2_1p(rho1c / (1.0 + rho1n)),
        a2: half_log2_1p(rho2c / (1.0 + rho2n)),
        e1: half_log2_1p(h1 * rho1c / (h1 * rho1n + h2 * rho2 + 1.0)),
        e2: half_log2_1p(h2 * rho2c / (h1 * rho1 + h2 * rho2n + 1.0)),
        e12: half_log2_1p((h1 * rho1c + h2 * rho2c) / floor),
        e1c: half_log2_1p(h1 * rho1c / floor),
        e2c: half_log2_1p(h2 * rho2c / floor),
    })
}

/// One of the seven quantities of [`MiProfile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiQuantity {
    A1,
    A2,
    E1,
    E2,
    E12,
    E1c,
    E2c,
}

impl MiQuantity {
    pub const ALL: [MiQuantity; 7] = [
        MiQuantity::A1,
        MiQuantity::A2,
        MiQuantity::E1,
        MiQuantity::E2,
        MiQuantity::E12,
        MiQuantity::E1c,
        MiQuantity::E2c,
    ];

    pub fn of(self, mi: &MiProfile) -> f64 {
        match self {
            MiQuantity::A1 => mi.a1,
            MiQuantity::A2 => mi.a2,
            MiQuantity::E1 => mi.e1,
            MiQuantity::E2 => mi.e2,
            MiQuantity::E12 => mi.e12,
            MiQuantity::E1c => mi.e1c,
            MiQuantity::E2c => mi.e2c,
        }
    }

    /// Index sets (A, B, C) of `I(A; B | C)` over the joint vector
    /// `(C1, C2, N11, N22, X1, X2, Y1, Y2, Z)`.
    fn index_sets(self) -> (&'static [usize], &'static [usize], &'static [usize]) {
        match self {
            MiQuantity::A1 => (&[Y2], &[C1], &[X2]),
            MiQuantity::A2 => (&[Y1], &[C2], &[X1]),
            MiQuantity::E1 => (&[C1], &[Z], &[]),
            MiQuantity::E2 => (&[C2], &[Z], &[]),
            MiQuantity::E12 => (&[C1, C2], &[Z], &[]),
            MiQuantity::E1c => (&[C1], &[Z], &[C2]),
            MiQuantity::E2c => (&[C2], &[Z], &[C1]),
        }
    }
}

const C1: usize = 0;
const C2: usize = 1;
const X1: usize = 4;
const X2: usize = 5;
const Y1: usize = 6;
const Y2: usize = 7;
const Z: usize = 8;

/// Mixing matrix from the independent sources `(C1, C2, N11, N22, N21, N12, Ne)`
/// to the joint vector `(C1, C2, N11, N22, X1, X2, Y1, Y2, Z)`, and the source
/// variances.
fn joint_mixing(params: &ChannelParams, split: &PowerSplit) -> (DMatrix<f64>, [f64; 7]) {
    let (sg1, sg2) = (params.g1.sqrt(), params.g2.sqrt());
    let (sh1, sh2) = (params.h1.sqrt(), params.h2.sqrt());
    #[rustfmt::skip]
    let rows = [
        1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, // C1
        0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, // C2
        0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, // N11
        0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, // N22
        1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, // X1
        0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, // X2
        sg1, 1.0, sg1, 1.0, 1.0, 0.0, 0.0, // Y1
        1.0, sg2, 1.0, sg2, 0.0, 1.0, 0.0, // Y2
        sh1, sh2, sh1, sh2, 0.0, 0.0, 1.0, // Z
    ];
    let var = [split.rho1c, split.rho2c, split.rho1n, split.rho2n, 1.0, 1.0, 1.0];
    (DMatrix::from_row_slice(9, 7, &rows), var)
}

/// Joint covariance of `(C1, C2, N11, N22, X1, X2, Y1, Y2, Z)`.
pub fn joint_covariance(params: &ChannelParams, split: &PowerSplit) -> DMatrix<f64> {
    let (mix, var) = joint_mixing(params, split);
    linalg::linear_covariance(&mix, &var)
}

/// Evaluates one mutual information from the joint covariance by
/// log-determinants of Schur complements, independently of [`mi_profile`].
///
/// Singular blocks (zero codeword or jamming power) are handled by flooring
/// eigenvalues at [`linalg::EIGEN_FLOOR`]; a `log` warning is emitted when
/// that happens.
pub fn mi_oracle(params: &ChannelParams, split: &PowerSplit, quantity: MiQuantity) -> Result<f64> {
    params.validate()?;
    PowerSplit::new(params, split.rho1n, split.rho2n)?;
    let cov = joint_covariance(params, split);
    let (a, b, c) = quantity.index_sets();
    Ok(linalg::gaussian_cmi(&cov, a, b, c))
}

/// Plug-in Monte-Carlo estimate of one mutual information from `samples`
/// seeded draws. Sanity check only; carries sampling error of order
/// `1/sqrt(samples)`.
pub fn mi_monte_carlo(
    params: &ChannelParams,
    split: &PowerSplit,
    quantity: MiQuantity,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    params.validate()?;
    PowerSplit::new(params, split.rho1n, split.rho2n)?;
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let (mix, var) = joint_mixing(params, split);
    let sd: Vec<f64> = var.iter().map(|v| v.sqrt()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = [0.0f64; 9];
    let mut outer = [[0.0f64; 9]; 9];
    let mut src = [0.0f64; 7];
    let mut obs = [0.0f64; 9];
    for _ in 0..samples {
        for (s, sd) in src.iter_mut().zip(&sd) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *s = z * sd;
        }
        for (i, o) in obs.iter_mut().enumerate() {
            *o = (0..7).map(|j| mix[(i, j)] * src[j]).sum();
        }
        for i in 0..9 {
            sum[i] += obs[i];
            for j in i..9 {
                outer[i][j] += obs[i] * obs[j];
            }
        }
    }
    let n = samples as f64;
    let cov = DMatrix::from_fn(9, 9, |i, j| {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        (outer[i][j] - sum[i] * sum[j] / n) / (n - 1.0)
    });
    let (a, b, c) = quantity.index_sets();
    Ok(linalg::gaussian_cmi(&cov, a, b, c))
}

/// Covariance of the source `(X̃1, X̃2, Ỹ1, Ỹ2, Z̃)` induced by the jamming
/// noises:
///
/// ```text
/// X̃1 = N11,  X̃2 = N22,  Ỹ1 = X̃2 + N21,  Ỹ2 = X̃1 + N12,
/// Z̃ = √h1·X̃1 + √h2·X̃2 + Ne
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InducedDmsCov {
    pub cov: [[f64; 5]; 5],
}

impl InducedDmsCov {
    pub const X1: usize = 0;
    pub const X2: usize = 1;
    pub const Y1: usize = 2;
    pub const Y2: usize = 3;
    pub const Z: usize = 4;

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cov[i][j]
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(5, 5, |i, j| self.cov[i][j])
    }

    /// Smallest eigenvalue of the covariance.
    pub fn min_eigenvalue(&self) -> f64 {
        nalgebra::SymmetricEigen::new(self.to_dmatrix()).eigenvalues.min()
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// The same source with the users exchanged.
    pub fn swapped(&self) -> Self {
        let perm = [Self::X2, Self::X1, Self::Y2, Self::Y1, Self::Z];
        let mut cov = [[0.0; 5]; 5];
        for i in 0..5 {
            for j in 0..5 {
                cov[i][j] = self.cov[perm[i]][perm[j]];
            }
        }
        InducedDmsCov { cov }
    }
}

pub fn induced_dms_cov(params: &ChannelParams, split: &PowerSplit) -> Result<InducedDmsCov> {
    params.validate()?;
    PowerSplit::new(params, split.rho1n, split.rho2n)?;
    let (sh1, sh2) = (params.h1.sqrt(), params.h2.sqrt());
    // sources (N11, N22, N21, N12, Ne)
    #[rustfmt::skip]
    let rows = [
        1.0, 0.0, 0.0, 0.0, 0.0, // X̃1
        0.0, 1.0, 0.0, 0.0, 0.0, // X̃2
        0.0, 1.0, 1.0, 0.0, 0.0, // Ỹ1
        1.0, 0.0, 0.0, 1.0, 0.0, // Ỹ2
        sh1, sh2, 0.0, 0.0, 1.0, // Z̃
    ];
    let var = [split.rho1n, split.rho2n, 1.0, 1.0, 1.0];
    let mut cov = [[0.0; 5]; 5];
    for (i, row) in cov.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c = (0..5).map(|k| rows[i * 5 + k] * rows[j * 5 + k] * var[k]).sum();
        }
    }
    Ok(InducedDmsCov { cov })
}
