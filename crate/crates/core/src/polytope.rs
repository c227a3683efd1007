//! Small-dimension rate-region geometry.
//!
//! Everything is in `f64` with fixed tolerances: [`VERTEX_TOL`] for vertex
//! deduplication and polygon comparison, [`FEAS_TOL`] for constraint
//! satisfaction.

mod lp;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};
pub use lp::LpOutcome;

/// Vertices closer than this are the same vertex.
pub const VERTEX_TOL: f64 = 1e-9;
/// Slack allowed when testing a point against a constraint.
pub const FEAS_TOL: f64 = 1e-9;
/// Distance below which a vertex is treated as lying on its neighbours' edge.
const COLLINEAR_TOL: f64 = 1e-12;

const MIN_DIM: usize = 1;
const MAX_DIM: usize = 6;
const ZERO_COEFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub bound: f64,
}

impl Constraint {
    /// The row as `a·x ≤ b`.
    fn as_le(&self) -> (Vec<f64>, f64) {
        match self.sense {
            Sense::Le => (self.coeffs.clone(), self.bound),
            Sense::Ge => (self.coeffs.iter().map(|c| -c).collect(), -self.bound),
        }
    }
}

/// A system of linear inequalities in `dim` variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceSystem {
    dim: usize,
    rows: Vec<Constraint>,
}

impl HalfspaceSystem {
    pub fn new(dim: usize) -> Result<Self> {
        if !(MIN_DIM..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "dimension {dim} outside [{MIN_DIM}, {MAX_DIM}]"
            )));
        }
        Ok(HalfspaceSystem { dim, rows: Vec::new() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Constraint] {
        &self.rows
    }

    pub fn push(&mut self, coeffs: &[f64], sense: Sense, bound: f64) -> Result<()> {
        if coeffs.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: coeffs.len() });
        }
        if coeffs.iter().chain(std::iter::once(&bound)).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("constraint has a non-finite entry".into()));
        }
        self.rows.push(Constraint { coeffs: coeffs.to_vec(), sense, bound });
        Ok(())
    }

    pub fn le(mut self, coeffs: &[f64], bound: f64) -> Result<Self> {
        self.push(coeffs, Sense::Le, bound)?;
        Ok(self)
    }

    pub fn ge(mut self, coeffs: &[f64], bound: f64) -> Result<Self> {
        self.push(coeffs, Sense::Ge, bound)?;
        Ok(self)
    }

    /// Equality, stored as a pair of opposite inequalities.
    pub fn eq(self, coeffs: &[f64], bound: f64) -> Result<Self> {
        self.le(coeffs, bound)?.ge(coeffs, bound)
    }

    /// Adds `x_i ≥ 0` for every coordinate.
    pub fn nonnegative(mut self) -> Result<Self> {
        for i in 0..self.dim {
            let mut a = vec![0.0; self.dim];
            a[i] = 1.0;
            self.push(&a, Sense::Ge, 0.0)?;
        }
        Ok(self)
    }

    fn le_rows(&self) -> Vec<(Vec<f64>, f64)> {
        self.rows.iter().map(Constraint::as_le).collect()
    }

    fn from_le_rows(dim: usize, rows: Vec<(Vec<f64>, f64)>) -> Self {
        HalfspaceSystem {
            dim,
            rows: rows
                .into_iter()
                .map(|(coeffs, bound)| Constraint { coeffs, sense: Sense::Le, bound })
                .collect(),
        }
    }

    /// Whether `x` satisfies every row up to `tol`.
    pub fn satisfies(&self, x: &[f64], tol: f64) -> bool {
        self.le_rows().iter().all(|(a, b)| dot(a, x) <= b + tol)
    }

    pub fn is_feasible(&self) -> bool {
        let (a, b): (Vec<_>, Vec<_>) = self.le_rows().into_iter().unzip();
        !matches!(lp::maximize(&vec![0.0; self.dim], &a, &b), LpOutcome::Infeasible)
    }

    /// Maximizes `c·x` over the system.
    pub fn maximize(&self, c: &[f64]) -> Result<LpOutcome> {
        if c.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: c.len() });
        }
        let (a, b): (Vec<_>, Vec<_>) = self.le_rows().into_iter().unzip();
        Ok(lp::maximize(c, &a, &b))
    }
}

fn dot(a: &[f64], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(a, x)| a * x).sum()
}

/// Scales a row so its largest coefficient magnitude is one. Returns `None`
/// for rows whose coefficients all vanish.
fn normalize_row(a: &[f64], b: f64) -> Option<(Vec<f64>, f64)> {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale <= ZERO_COEFF {
        return None;
    }
    Some((a.iter().map(|v| v / scale).collect(), b / scale))
}

fn infeasible_marker(dim: usize) -> Vec<(Vec<f64>, f64)> {
    vec![(vec![0.0; dim], -1.0)]
}

/// Drops constant rows, rows dominated by a parallel row, and rows implied
/// by the remaining ones (checked by LP). An infeasible system collapses to
/// the single row `0 ≤ -1`.
fn remove_redundant(dim: usize, rows: Vec<(Vec<f64>, f64)>) -> Vec<(Vec<f64>, f64)> {
    let mut kept: Vec<(Vec<f64>, f64)> = Vec::new();
    for (a, b) in rows {
        match normalize_row(&a, b) {
            None => {
                if b < -FEAS_TOL {
                    return infeasible_marker(dim);
                }
            }
            Some((a, b)) => {
                // pairwise dominance among parallel rows
                if let Some(k) = kept
                    .iter()
                    .position(|(ka, _)| ka.iter().zip(&a).all(|(x, y)| (x - y).abs() <= ZERO_COEFF))
                {
                    if b < kept[k].1 {
                        kept[k].1 = b;
                    }
                } else {
                    kept.push((a, b));
                }
            }
        }
    }

    let (a_all, b_all): (Vec<_>, Vec<_>) = kept.iter().cloned().unzip();
    if matches!(lp::maximize(&vec![0.0; dim], &a_all, &b_all), LpOutcome::Infeasible) {
        return infeasible_marker(dim);
    }

    let mut i = 0;
    while i < kept.len() {
        let others: Vec<_> = kept.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, r)| r.clone()).collect();
        let (a, b): (Vec<_>, Vec<_>) = others.into_iter().unzip();
        let redundant = match lp::maximize(&kept[i].0, &a, &b) {
            LpOutcome::Optimal { value, .. } => value <= kept[i].1 + FEAS_TOL,
            LpOutcome::Unbounded => false,
            LpOutcome::Infeasible => false,
        };
        if redundant {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    kept
}

/// Fourier–Motzkin projection of `sys` onto the coordinates `keep`, in the
/// order given. Redundant rows are removed after every elimination step.
pub fn project_fm(sys: &HalfspaceSystem, keep: &[usize]) -> Result<HalfspaceSystem> {
    if keep.is_empty() || keep.len() > sys.dim {
        return Err(Error::InvalidParameter(format!("cannot keep {} of {} coordinates", keep.len(), sys.dim)));
    }
    for (i, &k) in keep.iter().enumerate() {
        if k >= sys.dim || keep[..i].contains(&k) {
            return Err(Error::InvalidParameter(format!("invalid coordinate set {keep:?}")));
        }
    }

    // current coordinate labels, eliminated in decreasing index order
    let mut labels: Vec<usize> = (0..sys.dim).collect();
    let mut rows = remove_redundant(sys.dim, sys.le_rows());
    let mut drop: Vec<usize> = (0..sys.dim).filter(|c| !keep.contains(c)).collect();
    drop.sort_unstable_by(|a, b| b.cmp(a));

    for var in drop {
        let col = labels.iter().position(|&l| l == var).expect("label present");
        let (mut pos, mut neg, mut zero) = (Vec::new(), Vec::new(), Vec::new());
        for (a, b) in rows {
            if a[col] > ZERO_COEFF {
                pos.push((a, b));
            } else if a[col] < -ZERO_COEFF {
                neg.push((a, b));
            } else {
                zero.push((a, b));
            }
        }
        let mut next: Vec<(Vec<f64>, f64)> = zero
            .into_iter()
            .map(|(mut a, b)| {
                a.remove(col);
                (a, b)
            })
            .collect();
        for (ap, bp) in &pos {
            for (an, bn) in &neg {
                let (sp, sn) = (1.0 / ap[col], 1.0 / -an[col]);
                let mut a: Vec<f64> = ap.iter().zip(an).map(|(p, n)| p * sp + n * sn).collect();
                a.remove(col);
                next.push((a, bp * sp + bn * sn));
            }
        }
        labels.remove(col);
        rows = remove_redundant(labels.len(), next);
    }

    let perm: Vec<usize> = keep.iter().map(|k| labels.iter().position(|l| l == k).expect("kept")).collect();
    let rows = rows
        .into_iter()
        .map(|(a, b)| (perm.iter().map(|&p| a[p]).collect(), b))
        .collect();
    Ok(HalfspaceSystem::from_le_rows(keep.len(), rows))
}

/// Solves a small square system by Gaussian elimination with partial
/// pivoting; `None` when (numerically) singular.
fn solve_square(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < ZERO_COEFF {
            return None;
        }
        m.swap(c, p);
        rhs.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            if f != 0.0 {
                for k in c..n {
                    m[r][k] -= f * m[c][k];
                }
                rhs[r] -= f * rhs[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (rhs[r] - s) / m[r][r];
    }
    Some(x)
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Vertices of a bounded system in any supported dimension, by solving every
/// `d`-subset of rows and keeping feasible, distinct solutions. Order follows
/// the lexicographic order of the row subsets.
pub fn vertices_nd(sys: &HalfspaceSystem) -> Vec<Vec<f64>> {
    let rows: Vec<(Vec<f64>, f64)> = sys
        .le_rows()
        .into_iter()
        .filter_map(|(a, b)| normalize_row(&a, b))
        .collect();
    let d = sys.dim;
    let mut out: Vec<Vec<f64>> = Vec::new();
    combinations(rows.len(), d, &mut |idx| {
        let m = idx.iter().map(|&i| rows[i].0.clone()).collect();
        let rhs = idx.iter().map(|&i| rows[i].1).collect();
        if let Some(x) = solve_square(m, rhs) {
            if rows.iter().all(|(a, b)| dot(a, &x) <= b + FEAS_TOL)
                && !out.iter().any(|v| v.iter().zip(&x).all(|(p, q)| (p - q).abs() <= VERTEX_TOL))
            {
                out.push(x);
            }
        }
    });
    out
}

/// Vertices of a bounded 2-D system as a counterclockwise polygon.
pub fn vertices_2d(sys: &HalfspaceSystem) -> Result<Polygon2> {
    if sys.dim != 2 {
        return Err(Error::Dimension { expected: 2, got: sys.dim });
    }
    let pts: Vec<(f64, f64)> = vertices_nd(sys).into_iter().map(|v| (v[0], v[1])).collect();
    Ok(Polygon2::hull(pts))
}

/// A convex polygon in the `(R1, R2)` plane with counterclockwise vertices.
/// May be empty, a single point, or a segment.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Polygon2 {
    vertices: Vec<(f64, f64)>,
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

impl Polygon2 {
    pub fn empty() -> Self {
        Polygon2 { vertices: Vec::new() }
    }

    /// Convex hull (monotone chain) of an arbitrary point set.
    pub fn hull(pts: Vec<(f64, f64)>) -> Self {
        // +0.0 folds negative zeros so ties in x sort consistently
        let mut pts: Vec<(f64, f64)> =
            pts.into_iter().filter(|p| p.0.is_finite() && p.1.is_finite()).map(|p| (p.0 + 0.0, p.1 + 0.0)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pts.dedup();
        if pts.len() <= 2 {
            if pts.len() == 2 && dist(pts[0], pts[1]) <= VERTEX_TOL {
                pts.pop();
            }
            return Polygon2 { vertices: pts };
        }
        let chain = |it: &mut dyn Iterator<Item = &(f64, f64)>| {
            let mut out: Vec<(f64, f64)> = Vec::new();
            for &p in it {
                while out.len() >= 2 && cross(out[out.len() - 2], out[out.len() - 1], p) <= 0.0 {
                    out.pop();
                }
                out.push(p);
            }
            out.pop();
            out
        };
        let mut v = chain(&mut pts.iter());
        v.extend(chain(&mut pts.iter().rev()));
        Polygon2 { vertices: simplify_ring(v) }
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, p: (f64, f64), tol: f64) -> bool {
        let v = &self.vertices;
        match v.len() {
            0 => false,
            1 => dist(v[0], p) <= tol,
            2 => point_segment_dist(p, v[0], v[1]) <= tol,
            n => (0..n).all(|i| {
                let (a, b) = (v[i], v[(i + 1) % n]);
                cross(a, b, p) / dist(a, b) >= -tol
            }),
        }
    }

    /// Whether every vertex of `other` lies in `self` (an empty `other` is
    /// always contained).
    pub fn contains_polygon(&self, other: &Polygon2, tol: f64) -> bool {
        other.vertices.iter().all(|&p| self.contains(p, tol))
    }

    /// `max w1·R1 + w2·R2` over the polygon.
    pub fn max_linear(&self, w: (f64, f64)) -> Result<f64> {
        self.vertices
            .iter()
            .map(|&(x, y)| w.0 * x + w.1 * y)
            .reduce(f64::max)
            .ok_or(Error::EmptyRegion)
    }

    /// Vertex sets agree within `tol` in both directions.
    pub fn approx_eq(&self, other: &Polygon2, tol: f64) -> bool {
        let covered = |a: &Polygon2, b: &Polygon2| {
            a.vertices.iter().all(|&p| b.vertices.iter().any(|&q| dist(p, q) <= tol))
        };
        covered(self, other) && covered(other, self)
    }

    /// Smallest axis-aligned down-closed polygon containing `self` and the
    /// origin: the hull of every vertex with its projections on the axes.
    pub fn down_closure(&self) -> Polygon2 {
        if self.is_empty() {
            return Polygon2::empty();
        }
        let mut pts = vec![(0.0, 0.0)];
        for &(x, y) in &self.vertices {
            pts.extend([(x, y), (x.max(0.0), 0.0), (0.0, y.max(0.0))]);
        }
        Polygon2::hull(pts)
    }
}

/// Drops near-duplicate and near-collinear vertices of a counterclockwise
/// ring.
fn simplify_ring(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    loop {
        let n = v.len();
        if n <= 1 {
            return v;
        }
        if n == 2 {
            if dist(v[0], v[1]) <= VERTEX_TOL {
                v.pop();
            }
            return v;
        }
        let drop = (0..n).find(|&i| {
            let (prev, cur, next) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
            dist(cur, next) <= VERTEX_TOL || point_segment_dist(cur, prev, next) <= COLLINEAR_TOL
        });
        match drop {
            Some(i) => {
                v.remove(i);
            }
            None => return v,
        }
    }
}

fn point_segment_dist(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0);
    dist(p, (a.0 + t * dx, a.1 + t * dy))
}

/// Convex hull of the union of polygons (time-sharing between regions).
pub fn hull_union(polys: &[Polygon2]) -> Polygon2 {
    Polygon2::hull(polys.iter().flat_map(|p| p.vertices.iter().copied()).collect())
}
