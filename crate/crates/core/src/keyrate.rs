//! Secret-key rate versus public-communication rate for scalar degraded
//! Gaussian sources `Ỹ ↔ X̃ ↔ Z̃`.
//!
//! The rate pair of a test channel is computed with `U` constant and
//! `V = Ỹ + T`, `T ~ N(0, t)`:
//!
//! ```text
//! rp = I(V; Ỹ) − I(V; X̃)      (public communication)
//! rk = I(V; X̃) − I(V; Z̃)      (key)
//! ```
//!
//! Sweeping `t` traces the boundary; the upper concave envelope of the
//! traced points (time-sharing between test channels) is the key-rate
//! function used by key generation.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::gaussian::InducedDmsCov;
use crate::{Error, Result};

/// Number of test-channel noise values in a sweep.
pub const T_POINTS: usize = 100;
/// Sweep range of the test-channel noise, relative to `Var(X̃)`.
pub const T_RANGE: (f64, f64) = (1e-6, 1e6);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chain {
    /// `Ỹ2 ↔ X̃1 ↔ Z̃`: Alice holds X̃1, Bob observes Ỹ2 and talks.
    A,
    /// `Ỹ1 ↔ X̃2 ↔ Z̃`: Bob holds X̃2, Alice observes Ỹ1 and talks.
    B,
}

impl Chain {
    /// The user (1 or 2) who sends the public messages.
    pub fn communicator(self) -> usize {
        match self {
            Chain::A => 2,
            Chain::B => 1,
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            Chain::A => Chain::B,
            Chain::B => Chain::A,
        }
    }
}

/// `X̃ ~ N(0, var_x)`, `Ỹ = X̃ + N(0, noise_y)`, `Z̃ = eve_gain·X̃ + N(0, eve_noise)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarDegradedSource {
    pub var_x: f64,
    pub noise_y: f64,
    pub eve_gain: f64,
    pub eve_noise: f64,
}

impl ScalarDegradedSource {
    pub fn new(var_x: f64, noise_y: f64, eve_gain: f64, eve_noise: f64) -> Result<Self> {
        let s = ScalarDegradedSource { var_x, noise_y, eve_gain, eve_noise };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.var_x.is_finite()
            && self.var_x >= 0.0
            && self.noise_y.is_finite()
            && self.noise_y > 0.0
            && self.eve_gain.is_finite()
            && self.eve_noise.is_finite()
            && self.eve_noise > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid scalar source {self:?}")))
        }
    }

    /// `I(Ỹ; X̃) − I(Ỹ; Z̃)`: the key rate with unlimited public communication.
    pub fn key_rate_ceiling(&self) -> f64 {
        let cov = self.covariance(0.0);
        pair_mi(&cov, X, Y) - pair_mi(&cov, Y, Z)
    }

    /// Covariance of `(X̃, Ỹ, Z̃, V)` for test-channel noise `t`.
    fn covariance(&self, t: f64) -> [[f64; 4]; 4] {
        // sources (X̃, N_Y, W, T)
        let c = self.eve_gain;
        let mix = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [c, 0.0, 1.0, 0.0], [1.0, 1.0, 0.0, 1.0]];
        let var = [self.var_x, self.noise_y, self.eve_noise, t];
        let mut cov = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                cov[i][j] = (0..4).map(|k| mix[i][k] * mix[j][k] * var[k]).sum();
            }
        }
        cov
    }
}

const X: usize = 0;
const Y: usize = 1;
const Z: usize = 2;
const V: usize = 3;

/// `I(A; B)` in bits for two scalar entries of a covariance, via the 2×2
/// log-determinant.
fn pair_mi(cov: &[[f64; 4]; 4], a: usize, b: usize) -> f64 {
    let (va, vb, c) = (cov[a][a], cov[b][b], cov[a][b]);
    if va <= 0.0 || vb <= 0.0 {
        return 0.0;
    }
    let det = va * vb - c * c;
    if det <= 0.0 {
        return f64::INFINITY;
    }
    0.5 * (va * vb / det).ln() / LN_2
}

/// Reduces the induced vector source to a scalar degraded source by
/// discarding one observation per user.
///
/// Chain A keeps `(X̃1, Ỹ2, Z̃)`, chain B keeps `(X̃2, Ỹ1, Z̃)`. The
/// observer's channel is rescaled to unit gain and the part of `Z̃` not
/// explained by the hidden variable is folded into Eve's noise.
pub fn reduce_dms(dms: &InducedDmsCov, chain: Chain) -> Result<ScalarDegradedSource> {
    let (x, y) = match chain {
        Chain::A => (InducedDmsCov::X1, InducedDmsCov::Y2),
        Chain::B => (InducedDmsCov::X2, InducedDmsCov::Y1),
    };
    let z = InducedDmsCov::Z;
    let var_x = dms.get(x, x);
    if var_x <= 0.0 {
        return Err(Error::SourceAbsent);
    }
    let y_gain = dms.get(x, y) / var_x;
    let noise_y = (dms.get(y, y) - y_gain * y_gain * var_x) / (y_gain * y_gain);
    let eve_gain = dms.get(x, z) / var_x;
    let eve_noise = dms.get(z, z) - eve_gain * eve_gain * var_x;
    ScalarDegradedSource::new(var_x, noise_y, eve_gain, eve_noise)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRatePoint {
    pub rp: f64,
    /// Key rate clamped at zero.
    pub rk: f64,
    /// Key rate before clamping.
    pub rk_raw: f64,
}

/// Public and key rates of the Gaussian test channel with noise variance `t`.
pub fn key_rate_point(src: &ScalarDegradedSource, t: f64) -> Result<KeyRatePoint> {
    src.validate()?;
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!("test-channel noise must be positive, got {t}")));
    }
    let cov = src.covariance(t);
    let i_vy = pair_mi(&cov, V, Y);
    let i_vx = pair_mi(&cov, V, X);
    let i_vz = pair_mi(&cov, V, Z);
    let rk_raw = i_vx - i_vz;
    Ok(KeyRatePoint { rp: i_vy - i_vx, rk: rk_raw.max(0.0), rk_raw })
}

/// `n` log-spaced test-channel noise values over [`T_RANGE`] scaled by `var_x`.
pub fn t_sweep(var_x: f64, n: usize) -> Vec<f64> {
    let (lo, hi) = ((T_RANGE.0 * var_x).ln(), (T_RANGE.1 * var_x).ln());
    (0..n)
        .map(|i| {
            let f = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            (lo + f * (hi - lo)).exp()
        })
        .collect()
}

/// Upper concave, nondecreasing envelope of the `(rp, rk)` test-channel
/// points, anchored at the origin and flat beyond its last breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRateEnvelope {
    breakpoints: Vec<(f64, f64)>,
}

impl KeyRateEnvelope {
    pub fn new(src: &ScalarDegradedSource) -> Result<Self> {
        Self::with_points(src, T_POINTS)
    }

    pub fn with_points(src: &ScalarDegradedSource, n_t: usize) -> Result<Self> {
        if src.var_x <= 0.0 {
            return Err(Error::SourceAbsent);
        }
        let pts = t_sweep(src.var_x, n_t)
            .into_iter()
            .map(|t| key_rate_point(src, t).map(|p| (p.rp.max(0.0), p.rk)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_points(pts))
    }

    /// Envelope of arbitrary achievable `(rp, rk)` points.
    pub fn from_points(mut pts: Vec<(f64, f64)>) -> Self {
        pts.push((0.0, 0.0));
        pts.retain(|p| p.0.is_finite() && p.1.is_finite());
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
        let mut hull: Vec<(f64, f64)> = Vec::new();
        for p in pts {
            if p.0 < 0.0 {
                continue;
            }
            if let Some(&last) = hull.last() {
                if p.0 == last.0 {
                    continue; // sorted so the first of equal rp has the largest rk
                }
            }
            while hull.len() >= 2 {
                let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
                if cross >= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        // the origin is the leftmost point and must stay the first breakpoint
        if hull.first() != Some(&(0.0, 0.0)) {
            hull.insert(0, (0.0, 0.0));
        }
        let peak = hull
            .iter()
            .enumerate()
            .fold(0, |best, (i, p)| if p.1 > hull[best].1 { i } else { best });
        hull.truncate(peak + 1);
        KeyRateEnvelope { breakpoints: hull }
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn max_key_rate(&self) -> f64 {
        self.breakpoints.last().map_or(0.0, |p| p.1)
    }

    /// Key rate achievable with public rate `rp` (piecewise-linear).
    pub fn eval(&self, rp: f64) -> f64 {
        let b = &self.breakpoints;
        if rp <= 0.0 {
            return 0.0;
        }
        let i = b.partition_point(|p| p.0 <= rp);
        if i >= b.len() {
            return b[b.len() - 1].1;
        }
        let (p0, p1) = (b[i - 1], b[i]);
        p0.1 + (p1.1 - p0.1) * (rp - p0.0) / (p1.0 - p0.0)
    }

    /// Largest key rate when public and key rates share one budget:
    /// `max_p min(f(p), budget − p)` over `p ∈ [0, budget]`.
    pub fn max_key_shared_budget(&self, budget: f64) -> f64 {
        if budget <= 0.0 {
            return 0.0;
        }
        // g(p) = f(p) + p − budget is increasing and piecewise linear; the
        // optimum sits at its root
        let b = &self.breakpoints;
        let k = b.partition_point(|q| q.1 + q.0 < budget);
        if k >= b.len() {
            return self.max_key_rate().min(budget);
        }
        let (x0, y0) = b[k - 1];
        let (x1, y1) = b[k];
        let slope = (y1 - y0) / (x1 - x0);
        let p = (budget - y0 + slope * x0) / (1.0 + slope);
        (budget - p).clamp(0.0, budget)
    }
}

/// Key-rate curve sampled on a public-rate grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRateCurve {
    pub points: Vec<(f64, f64)>,
}

impl KeyRateCurve {
    pub fn max_key_rate(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(0.0, f64::max)
    }
}

/// Evaluates the key-rate envelope of `src` at every public rate of
/// `rp_grid` (ascending, non-negative).
pub fn key_rate_curve(src: &ScalarDegradedSource, rp_grid: &[f64]) -> Result<KeyRateCurve> {
    if rp_grid.iter().any(|r| !r.is_finite() || *r < 0.0) || rp_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("rate grid must be ascending and non-negative".into()));
    }
    let env = KeyRateEnvelope::new(src)?;
    Ok(KeyRateCurve { points: rp_grid.iter().map(|&rp| (rp, env.eval(rp))).collect() })
}
