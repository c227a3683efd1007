//! Rate regions of the two-way wiretap channel.
//!
//! Coordinates of the 4-D systems are `(R1, R2, R1', R2')`: secret rates
//! followed by auxiliary (randomization) message rates.
//!
//! * cooperative jamming (`cj`): projection of [`prop1_system`], equal to
//!   [`corollary1_polygon`];
//! * key exchange (`kx`): [`kx_polygon`], reachable through
//!   [`key_exchange_ledger`] accounting;
//! * key generation (`kg`): [`kg_augment`] on top of ledgers at the corners
//!   of the cooperative-jamming system.
//!
//! [`sweep_regions`] unions each family over a grid of power splits and
//! convexifies the union (time-sharing).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gaussian::{induced_dms_cov, mi_profile, ChannelParams, InducedDmsCov, MiProfile, PowerSplit};
use crate::keyrate::{reduce_dms, Chain, KeyRateEnvelope, T_POINTS};
use crate::polytope::{hull_union, project_fm, vertices_2d, vertices_nd, HalfspaceSystem, Polygon2, VERTEX_TOL};
use crate::{Error, Result};

/// Tolerance of ledger bookkeeping checks.
pub const LEDGER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint4 {
    pub r1: f64,
    pub r2: f64,
    pub r1p: f64,
    pub r2p: f64,
}

impl RatePoint4 {
    pub fn new(r1: f64, r2: f64, r1p: f64, r2p: f64) -> Result<Self> {
        if [r1, r2, r1p, r2p].iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(format!("rates must be finite and >= 0: {r1}, {r2}, {r1p}, {r2p}")));
        }
        Ok(RatePoint4 { r1, r2, r1p, r2p })
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.r1, self.r2, self.r1p, self.r2p]
    }
}

/// Per-user split of the secret and auxiliary rates.
///
/// Index 0 is user 1 (Alice), index 1 is user 2 (Bob). The secret message
/// of user `i` carries a secret part `rs` and a key part `rk` for the other
/// user; the auxiliary message carries an open part `ro` and a part `re`
/// encrypted with the other user's key.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RateSplitLedger {
    pub rs: [f64; 2],
    pub rk: [f64; 2],
    pub ro: [f64; 2],
    pub re: [f64; 2],
}

impl RateSplitLedger {
    /// Ledger without key exchange: everything secret stays secret, every
    /// auxiliary message stays open.
    pub fn plain(p: &RatePoint4) -> Self {
        RateSplitLedger { rs: [p.r1, p.r2], rk: [0.0; 2], ro: [p.r1p, p.r2p], re: [0.0; 2] }
    }

    /// `R_i = Rs_i + Rk_i`.
    pub fn secret_rate(&self, i: usize) -> f64 {
        self.rs[i] + self.rk[i]
    }

    /// `R'_i = Ro_i + Re_i`.
    pub fn aux_rate(&self, i: usize) -> f64 {
        self.ro[i] + self.re[i]
    }

    /// Effective secret rates `(Rs_1 + Re_1, Rs_2 + Re_2)`.
    pub fn effective(&self) -> (f64, f64) {
        (self.rs[0] + self.re[0], self.rs[1] + self.re[1])
    }

    /// Key rate sent but not used for encryption.
    pub fn unused_key(&self) -> f64 {
        (self.rk[0] - self.re[1]) + (self.rk[1] - self.re[0])
    }

    pub fn swapped(&self) -> Self {
        let s = |a: [f64; 2]| [a[1], a[0]];
        RateSplitLedger { rs: s(self.rs), rk: s(self.rk), ro: s(self.ro), re: s(self.re) }
    }

    fn check_signs(&self) -> Result<()> {
        for v in self.rs.iter().chain(&self.rk).chain(&self.ro).chain(&self.re) {
            if !v.is_finite() || *v < -LEDGER_TOL {
                return Err(Error::Ledger(format!("negative or non-finite rate in {self:?}")));
            }
        }
        Ok(())
    }

    /// One-time-pad budget: each encrypted rate is covered by the other
    /// user's key rate.
    pub fn check_key_budget(&self) -> Result<()> {
        self.check_signs()?;
        if self.re[0] > self.rk[1] + LEDGER_TOL {
            return Err(Error::Ledger(format!("Re_1 = {} exceeds Rk_2 = {}", self.re[0], self.rk[1])));
        }
        if self.re[1] > self.rk[0] + LEDGER_TOL {
            return Err(Error::Ledger(format!("Re_2 = {} exceeds Rk_1 = {}", self.re[1], self.rk[0])));
        }
        Ok(())
    }

    /// The cooperative-jamming constraints restated on the split rates.
    pub fn check_channel(&self, mi: &MiProfile) -> Result<()> {
        self.check_key_budget()?;
        let total = |i: usize| self.secret_rate(i) + self.aux_rate(i);
        let checks = [
            (total(0) <= mi.a1 + LEDGER_TOL, "user 1 exceeds its channel rate"),
            (total(1) <= mi.a2 + LEDGER_TOL, "user 2 exceeds its channel rate"),
            (self.aux_rate(0) + self.aux_rate(1) >= mi.e12 - LEDGER_TOL, "joint randomization below I(C1C2;Z)"),
            (self.aux_rate(0) >= mi.e1 - LEDGER_TOL, "user 1 randomization below I(C1;Z)"),
            (self.aux_rate(1) >= mi.e2 - LEDGER_TOL, "user 2 randomization below I(C2;Z)"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::Ledger(msg.into()));
            }
        }
        Ok(())
    }
}

/// Which chain of the induced source is used, and which user encrypts with
/// the generated key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KgConfig {
    pub chain: Chain,
    pub encryptor: usize,
}

impl KgConfig {
    pub const ALL: [KgConfig; 4] = [
        KgConfig { chain: Chain::A, encryptor: 1 },
        KgConfig { chain: Chain::A, encryptor: 2 },
        KgConfig { chain: Chain::B, encryptor: 1 },
        KgConfig { chain: Chain::B, encryptor: 2 },
    ];

    pub fn new(chain: Chain, encryptor: usize) -> Result<Self> {
        if encryptor != 1 && encryptor != 2 {
            return Err(Error::InvalidParameter(format!("encryptor must be 1 or 2, got {encryptor}")));
        }
        Ok(KgConfig { chain, encryptor })
    }

    pub fn communicator(&self) -> usize {
        self.chain.communicator()
    }

    pub fn swapped(&self) -> Self {
        KgConfig { chain: self.chain.swapped(), encryptor: 3 - self.encryptor }
    }
}

fn system4() -> HalfspaceSystem {
    HalfspaceSystem::new(4).expect("dimension 4 is supported")
}

/// Cooperative jamming with resolvability lower bounds on the auxiliary
/// rates.
pub fn prop1_system(mi: &MiProfile) -> HalfspaceSystem {
    (|| {
        system4()
            .le(&[1.0, 0.0, 1.0, 0.0], mi.a1)?
            .le(&[0.0, 1.0, 0.0, 1.0], mi.a2)?
            .ge(&[0.0, 0.0, 1.0, 1.0], mi.e12)?
            .ge(&[0.0, 0.0, 1.0, 0.0], mi.e1)?
            .ge(&[0.0, 0.0, 0.0, 1.0], mi.e2)?
            .nonnegative()
    })()
    .expect("finite profile")
}

/// Auxiliary rates constrained to the dominant face of the eavesdropper's
/// multiple-access region.
pub fn ty_aux_system(mi: &MiProfile) -> HalfspaceSystem {
    (|| {
        system4()
            .le(&[1.0, 0.0, 1.0, 0.0], mi.a1)?
            .le(&[0.0, 1.0, 0.0, 1.0], mi.a2)?
            .eq(&[0.0, 0.0, 1.0, 1.0], mi.e12)?
            .le(&[0.0, 0.0, 1.0, 0.0], mi.e1c)?
            .le(&[0.0, 0.0, 0.0, 1.0], mi.e2c)?
            .nonnegative()
    })()
    .expect("finite profile")
}

fn pentagon(b1: f64, b2: f64, sum: f64) -> Polygon2 {
    let sys = (|| {
        HalfspaceSystem::new(2)?
            .le(&[1.0, 0.0], b1)?
            .le(&[0.0, 1.0], b2)?
            .le(&[1.0, 1.0], sum)?
            .nonnegative()
    })()
    .expect("finite bounds");
    vertices_2d(&sys).expect("2-D system")
}

/// Secret rates reachable by cooperative jamming for one input distribution.
pub fn corollary1_polygon(mi: &MiProfile) -> Polygon2 {
    pentagon(mi.a1 - mi.e1, mi.a2 - mi.e2, mi.a1 + mi.a2 - mi.e12)
}

/// Secret rates reachable with key exchange on top of cooperative jamming.
pub fn kx_polygon(mi: &MiProfile) -> Polygon2 {
    pentagon(mi.a1, mi.a2, mi.a1 + mi.a2 - mi.e12)
}

fn project_to_rates(sys: &HalfspaceSystem) -> Polygon2 {
    let proj = project_fm(sys, &[0, 1]).expect("valid coordinates");
    vertices_2d(&proj).expect("2-D projection")
}

/// `(R1, R2)` projection of [`prop1_system`] by Fourier–Motzkin elimination.
pub fn prop1_projection(mi: &MiProfile) -> Polygon2 {
    project_to_rates(&prop1_system(mi))
}

/// `(R1, R2)` projection of [`ty_aux_system`].
pub fn ty_aux_projection(mi: &MiProfile) -> Polygon2 {
    project_to_rates(&ty_aux_system(mi))
}

/// Whether both auxiliary-rate formulations project onto the same secret
/// rate polygon, and that polygon is [`corollary1_polygon`].
pub fn projection_equivalence_check(mi: &MiProfile) -> bool {
    let c = corollary1_polygon(mi);
    let p = prop1_projection(mi);
    let t = ty_aux_projection(mi);
    p.approx_eq(&t, VERTEX_TOL) && p.approx_eq(&c, VERTEX_TOL)
}

/// Effective secret rates of a cooperative-jamming point after key
/// exchange. Pure bookkeeping: checks that the ledger decomposes `p` and
/// respects the key budget.
pub fn key_exchange_ledger(p: &RatePoint4, ledger: &RateSplitLedger) -> Result<(f64, f64)> {
    ledger.check_key_budget()?;
    let pairs = [
        (ledger.secret_rate(0), p.r1, "Rs_1 + Rk_1 != R1"),
        (ledger.secret_rate(1), p.r2, "Rs_2 + Rk_2 != R2"),
        (ledger.aux_rate(0), p.r1p, "Ro_1 + Re_1 != R1'"),
        (ledger.aux_rate(1), p.r2p, "Ro_2 + Re_2 != R2'"),
    ];
    for (got, want, msg) in pairs {
        if (got - want).abs() > LEDGER_TOL {
            return Err(Error::Ledger(format!("{msg}: {got} vs {want}")));
        }
    }
    Ok(ledger.effective())
}

/// Ledger where user `from` sacrifices `amount` of secret rate as a key
/// that user `to` spends encrypting the same amount of auxiliary rate.
fn with_key_transfer(mut l: RateSplitLedger, from: usize, amount: f64) -> RateSplitLedger {
    let to = 1 - from;
    l.rs[from] -= amount;
    l.rk[from] += amount;
    l.ro[to] -= amount;
    l.re[to] += amount;
    l
}

/// Base ledgers for key generation at one power split.
///
/// Enumerates the vertices of the cooperative-jamming system, assigns each
/// user's unused channel rate to its open auxiliary message so that
/// `Rs + Rk + Ro + Re = a_i`, then applies key exchange in each direction
/// at `steps + 1` evenly spaced fractions of the largest transferable
/// amount (`steps = 1` keeps only none and maximal).
pub fn base_ledgers(mi: &MiProfile, steps: usize) -> Vec<RateSplitLedger> {
    let steps = steps.max(1);
    let mut out: Vec<RateSplitLedger> = Vec::new();
    for v in vertices_nd(&prop1_system(mi)) {
        let clamp = |x: f64| x.max(0.0);
        let (r1, r2) = (clamp(v[0]), clamp(v[1]));
        let filled = RateSplitLedger {
            rs: [r1, r2],
            rk: [0.0; 2],
            ro: [clamp(mi.a1 - r1), clamp(mi.a2 - r2)],
            re: [0.0; 2],
        };
        let max12 = filled.rs[0].min(filled.ro[1]);
        let max21 = filled.rs[1].min(filled.ro[0]);
        for i in 0..=steps {
            for j in 0..=steps {
                let f = |k: usize| k as f64 / steps as f64;
                let l = with_key_transfer(with_key_transfer(filled, 0, max12 * f(i)), 1, max21 * f(j));
                if !out.iter().any(|o| ledger_close(o, &l)) {
                    out.push(l);
                }
            }
        }
    }
    out
}

fn ledger_close(a: &RateSplitLedger, b: &RateSplitLedger) -> bool {
    let flat = |l: &RateSplitLedger| [l.rs, l.rk, l.ro, l.re].concat();
    flat(a).iter().zip(flat(b)).all(|(x, y)| (x - y).abs() <= VERTEX_TOL)
}

/// Largest generated key rate for one ledger, given the key-rate envelope
/// of the chain.
///
/// The communicator spends public rate from its open rate; the encryptor
/// spends the encrypted increment from its own open rate. When one user
/// plays both roles the two shares come out of the same budget.
pub fn generated_key_rate(env: &KeyRateEnvelope, cfg: &KgConfig, base: &RateSplitLedger) -> f64 {
    let c = cfg.communicator() - 1;
    let e = cfg.encryptor - 1;
    let (open_c, open_e) = (base.ro[c].max(0.0), base.ro[e].max(0.0));
    if c == e {
        env.max_key_shared_budget(open_c)
    } else {
        env.eval(open_c).min(open_e)
    }
}

fn augmented_polygon(base: &RateSplitLedger, cfg: &KgConfig, key: f64) -> Polygon2 {
    let (r1, r2) = base.effective();
    let boosted = if cfg.encryptor == 1 { (r1 + key, r2) } else { (r1, r2 + key) };
    Polygon2::hull(vec![(r1, r2), boosted]).down_closure()
}

/// Effective secret rates reachable from `base` when key generation on the
/// chosen chain adds to the encryptor's rate. The result is down-closed.
pub fn kg_augment(mi: &MiProfile, dms: &InducedDmsCov, cfg: &KgConfig, base: &RateSplitLedger) -> Result<Polygon2> {
    base.check_channel(mi)?;
    KgConfig::new(cfg.chain, cfg.encryptor)?;
    let src = reduce_dms(dms, cfg.chain)?;
    let env = KeyRateEnvelope::new(&src)?;
    Ok(augmented_polygon(base, cfg, generated_key_rate(&env, cfg, base)))
}

/// Options of [`sweep_regions`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Grid points per power axis (≥ 2).
    pub grid: usize,
    pub compute_kg: bool,
    /// Test-channel noise values per key-rate envelope.
    pub t_points: usize,
    /// Key-exchange fractions per direction in the base ledgers.
    pub ledger_steps: usize,
}

impl SweepOptions {
    pub fn new(grid: usize) -> Self {
        SweepOptions { grid, compute_kg: true, t_points: T_POINTS, ledger_steps: 1 }
    }
}

/// Diagnostics of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub rho1n: f64,
    pub rho2n: f64,
    pub mi: MiProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub cj: Polygon2,
    pub kx: Polygon2,
    pub kg: Polygon2,
    pub cells: Vec<SweepCell>,
}

fn grid_value(budget: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        budget
    } else {
        budget * i as f64 / (n - 1) as f64
    }
}

/// Key-generation region of one cell: down-closed effective rates of every
/// base ledger, augmented under every configuration whose chain has a
/// source.
pub fn kg_cell(params: &ChannelParams, split: &PowerSplit, mi: &MiProfile, opts: &SweepOptions) -> Result<Polygon2> {
    let ledgers = base_ledgers(mi, opts.ledger_steps);
    if ledgers.is_empty() {
        return Ok(Polygon2::empty());
    }
    let dms = induced_dms_cov(params, split)?;
    let envs: Vec<(Chain, KeyRateEnvelope)> = [Chain::A, Chain::B]
        .into_iter()
        .filter_map(|chain| {
            let src = reduce_dms(&dms, chain).ok()?;
            KeyRateEnvelope::with_points(&src, opts.t_points).ok().map(|e| (chain, e))
        })
        .collect();
    let mut pts = Vec::new();
    for l in &ledgers {
        let (r1, r2) = l.effective();
        pts.push((r1, r2));
        for cfg in KgConfig::ALL {
            if let Some((_, env)) = envs.iter().find(|(c, _)| *c == cfg.chain) {
                let key = generated_key_rate(env, &cfg, l);
                pts.push(if cfg.encryptor == 1 { (r1 + key, r2) } else { (r1, r2 + key) });
            }
        }
    }
    Ok(Polygon2::hull(pts).down_closure())
}

/// Unions the three region families over an `N × N` grid of jamming powers
/// `(ρ1ⁿ, ρ2ⁿ) ∈ [0, ρ1] × [0, ρ2]` and takes convex hulls.
pub fn sweep_regions(params: &ChannelParams, opts: &SweepOptions) -> Result<SweepResult> {
    params.validate()?;
    let n = opts.grid;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("grid must be at least 2, got {n}")));
    }
    let rows: Vec<(Polygon2, Polygon2, Polygon2, Vec<SweepCell>)> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let rho1n = grid_value(params.rho1, i, n);
            let (mut cj, mut kx, mut kg, mut cells) = (Vec::new(), Vec::new(), Vec::new(), Vec::with_capacity(n));
            for j in 0..n {
                let rho2n = grid_value(params.rho2, j, n);
                let split = PowerSplit::new(params, rho1n, rho2n)?;
                let mi = mi_profile(params, &split)?;
                cj.push(corollary1_polygon(&mi));
                kx.push(kx_polygon(&mi));
                if opts.compute_kg {
                    kg.push(kg_cell(params, &split, &mi, opts)?);
                }
                cells.push(SweepCell { rho1n, rho2n, mi });
            }
            Ok((hull_union(&cj), hull_union(&kx), hull_union(&kg), cells))
        })
        .collect::<Result<_>>()?;

    log::info!("swept {n}x{n} power splits");
    let mut cells = Vec::with_capacity(n * n);
    let (mut cj, mut kx, mut kg) = (Vec::new(), Vec::new(), Vec::new());
    for (a, b, c, d) in rows {
        cj.push(a);
        kx.push(b);
        kg.push(c);
        cells.extend(d);
    }
    Ok(SweepResult { cj: hull_union(&cj), kx: hull_union(&kx), kg: hull_union(&kg), cells })
}

/// Sufficient condition for the cooperative-jamming and key-exchange
/// regions to be empty while key generation still helps:
/// `0 < ρ1 < (h2 − 1)/h1` and `0 < ρ2 < (h1 − 1)/h2`.
pub fn prop4_condition(params: &ChannelParams) -> bool {
    if params.h1 == 0.0 || params.h2 == 0.0 {
        return false;
    }
    0.0 < params.rho1
        && params.rho1 < (params.h2 - 1.0) / params.h1
        && 0.0 < params.rho2
        && params.rho2 < (params.h1 - 1.0) / params.h2
}

/// Overall rate of `rounds` blocks when the first block runs at `first`
/// and the others at `steady`.
pub fn multi_round_rate(first: f64, steady: f64, rounds: u64) -> Result<f64> {
    if rounds < 1 {
        return Err(Error::InvalidParameter("at least one round is required".into()));
    }
    let b = rounds as f64;
    Ok((first + (b - 1.0) * steady) / b)
}

/// Largest `R1` and `R2` over a region, `None` when it is empty.
pub fn max_rates(poly: &Polygon2) -> Option<(f64, f64)> {
    Some((poly.max_linear((1.0, 0.0)).ok()?, poly.max_linear((0.0, 1.0)).ok()?))
}

/// Whether a region holds no rate pair beyond the origin (within
/// [`VERTEX_TOL`]).
pub fn is_trivial(poly: &Polygon2) -> bool {
    max_rates(poly).is_none_or(|(r1, r2)| r1 <= VERTEX_TOL && r2 <= VERTEX_TOL)
}
