//! Exact oracles for commutative algebras.
//!
//! A diagonal family is a finite set of functions on a finite point set `K`,
//! i.e. elements of `C(K)`. At each point a combination `Σ gᵢ* f_{σ(i)} gᵢ`
//! evaluates to `Σ |gᵢ(x)|² f_{σ(i)}(x)`, a convex (or sub-convex) combination
//! of complex numbers with weights that may vary freely from point to point.
//! Hull membership in `C(K)` therefore reduces to planar convex-hull
//! membership at every point, which this module decides exactly.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kraus::{KrausCombination, KrausTerm, MatrixFamily, Mode};
use crate::matrix::{CMatrix, C64};

/// Tolerance for scalar hull membership.
pub const SCALAR_TOL: f64 = 1e-12;
/// Tolerance for pointwise hull membership.
pub const POINTWISE_TOL: f64 = 1e-9;

/// Functions on a finite set of `points`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiagonalRepr", into = "DiagonalRepr")]
pub struct DiagonalFamily {
    points: usize,
    functions: Vec<Vec<C64>>,
    labels: Option<Vec<String>>,
}

#[derive(Clone, Serialize, Deserialize)]
struct DiagonalRepr {
    points: usize,
    functions: Vec<Vec<C64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl TryFrom<DiagonalRepr> for DiagonalFamily {
    type Error = Error;

    fn try_from(r: DiagonalRepr) -> Result<Self> {
        let mut f = DiagonalFamily::new(r.points, r.functions)?;
        f.labels = r.labels;
        Ok(f)
    }
}

impl From<DiagonalFamily> for DiagonalRepr {
    fn from(f: DiagonalFamily) -> Self {
        DiagonalRepr {
            points: f.points,
            functions: f.functions,
            labels: f.labels,
        }
    }
}

impl DiagonalFamily {
    pub fn new(points: usize, functions: Vec<Vec<C64>>) -> Result<Self> {
        for f in &functions {
            if f.len() != points {
                return Err(Error::DimensionMismatch {
                    expected: points,
                    found: f.len(),
                });
            }
            if f.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self {
            points,
            functions,
            labels: None,
        })
    }

    pub fn from_real(points: usize, functions: &[Vec<f64>]) -> Result<Self> {
        Self::new(
            points,
            functions
                .iter()
                .map(|f| f.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn functions(&self) -> &[Vec<C64>] {
        &self.functions
    }

    pub fn without(&self, index: usize) -> DiagonalFamily {
        DiagonalFamily {
            points: self.points,
            functions: self
                .functions
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != index)
                .map(|(_, f)| f.clone())
                .collect(),
            labels: None,
        }
    }

    /// Values of every function at one point.
    pub fn values_at(&self, x: usize) -> Vec<C64> {
        self.functions.iter().map(|f| f[x]).collect()
    }

    /// The same data as diagonal matrices in `M_points`.
    pub fn to_matrix_family(&self) -> Result<MatrixFamily> {
        MatrixFamily::with_dim(
            self.points,
            self.functions
                .iter()
                .map(|f| CMatrix::from_diagonal(f))
                .collect(),
        )
    }

    /// `(λ fᵢ − g)ᵢ`.
    pub fn affine_image(&self, lambda: C64, g: &[C64]) -> Result<DiagonalFamily> {
        if g.len() != self.points {
            return Err(Error::DimensionMismatch {
                expected: self.points,
                found: g.len(),
            });
        }
        Self::new(
            self.points,
            self.functions
                .iter()
                .map(|f| f.iter().zip(g).map(|(&a, &b)| lambda * a - b).collect())
                .collect(),
        )
    }
}

fn cross(o: C64, a: C64, b: C64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Vertices of the convex hull in counter-clockwise order (Andrew's monotone
/// chain); collinear boundary points are dropped.
pub fn convex_hull(points: &[C64]) -> Vec<C64> {
    let mut pts: Vec<C64> = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<C64> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<C64> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Euclidean distance from `target` to the convex hull of `points`
/// (with the origin adjoined when `include_zero`). Boundary counts as inside.
pub fn plane_hull_distance(target: C64, points: &[C64], include_zero: bool) -> f64 {
    let mut pts = points.to_vec();
    if include_zero {
        pts.push(C64::new(0.0, 0.0));
    }
    let hull = convex_hull(&pts);
    match hull.len() {
        0 => f64::INFINITY,
        1 => (target - hull[0]).norm(),
        2 => segment_distance(target, hull[0], hull[1]),
        n => {
            let inside = (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], target) >= 0.0);
            if inside {
                0.0
            } else {
                (0..n)
                    .map(|i| segment_distance(target, hull[i], hull[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

/// Convex weights over `points` (plus an implicit origin when `include_zero`)
/// reproducing `target`, provided it lies within `tol` of the hull.
///
/// Returned weights are indexed like `points`; the origin's share is the
/// remainder `1 − Σ w`.
pub fn hull_weights(target: C64, points: &[C64], include_zero: bool, tol: f64) -> Option<Vec<f64>> {
    if plane_hull_distance(target, points, include_zero) > tol {
        return None;
    }
    let n = points.len();
    // Index `n` stands for the origin.
    let mut cand: Vec<(usize, C64)> = points.iter().copied().enumerate().collect();
    if include_zero {
        cand.push((n, C64::new(0.0, 0.0)));
    }
    let mut best: Option<(f64, Vec<(usize, f64)>)> = None;
    let mut consider = |score: f64, w: Vec<(usize, f64)>| {
        if best.as_ref().is_none_or(|b| score > b.0) {
            best = Some((score, w));
        }
    };
    for (i, &(ia, a)) in cand.iter().enumerate() {
        consider(-(target - a).norm(), vec![(ia, 1.0)]);
        for (j, &(ib, b)) in cand.iter().enumerate().skip(i + 1) {
            let ab = b - a;
            let len2 = ab.norm_sqr();
            if len2 > 0.0 {
                let t =
                    (((target - a).re * ab.re + (target - a).im * ab.im) / len2).clamp(0.0, 1.0);
                let dist = (target - (a + ab * t)).norm();
                consider(-dist, vec![(ia, 1.0 - t), (ib, t)]);
            }
            for &(ic, c) in cand.iter().skip(j + 1) {
                let area = cross(a, b, c);
                if area.abs() <= 1e-300 {
                    continue;
                }
                let wa = cross(target, b, c) / area;
                let wb = cross(a, target, c) / area;
                let wc = 1.0 - wa - wb;
                let lo = wa.min(wb).min(wc);
                if lo >= -1e-12 {
                    let w = [wa, wb, wc].map(|x| x.max(0.0));
                    let s: f64 = w.iter().sum();
                    consider(0.0, vec![(ia, w[0] / s), (ib, w[1] / s), (ic, w[2] / s)]);
                }
            }
        }
    }
    let (_, entries) = best?;
    let mut weights = vec![0.0; n];
    for (idx, w) in entries {
        if idx < n {
            weights[idx] += w;
        }
    }
    Some(weights)
}

/// Membership of `target` in the hull of scalars `values`, where
/// combinations are `Σ |aᵢ|² λᵢ` with `Σ |aᵢ|² = 1` (exact) or `≤ 1` (sub).
pub fn scalar_hull_membership(values: &[C64], target: C64, mode: Mode) -> bool {
    let include_zero = mode == Mode::SubUnital;
    if values.is_empty() && !include_zero {
        return false;
    }
    plane_hull_distance(target, values, include_zero) <= SCALAR_TOL
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseVerdict {
    pub member: bool,
    /// Per point, convex weights over the generators, or `None` where the
    /// target value escapes the planar hull.
    pub weights: Vec<Option<Vec<f64>>>,
    /// Largest planar distance over all points (the sup-norm distance).
    pub distance: f64,
}

pub fn pointwise_hull_membership(
    family: &DiagonalFamily,
    target: &[C64],
    mode: Mode,
) -> Result<PointwiseVerdict> {
    if target.len() != family.points() {
        return Err(Error::DimensionMismatch {
            expected: family.points(),
            found: target.len(),
        });
    }
    let include_zero = mode == Mode::SubUnital;
    let mut weights = Vec::with_capacity(target.len());
    let mut distance: f64 = 0.0;
    for (x, &t) in target.iter().enumerate() {
        let vals = family.values_at(x);
        let dist = if vals.is_empty() && !include_zero {
            f64::INFINITY
        } else {
            plane_hull_distance(t, &vals, include_zero)
        };
        distance = distance.max(dist);
        weights.push(if dist <= POINTWISE_TOL {
            hull_weights(t, &vals, include_zero, POINTWISE_TOL)
        } else {
            None
        });
    }
    Ok(PointwiseVerdict {
        member: weights.iter().all(Option::is_some),
        weights,
        distance,
    })
}

/// `λ₀ = 1` and `λ_n = exp(i (1 − 2⁻ⁿ) π/2)` for `1 ≤ n < count`.
pub fn lambda_sequence(count: usize) -> Vec<C64> {
    (0..count)
        .map(|n| {
            if n == 0 {
                C64::new(1.0, 0.0)
            } else {
                let angle = (1.0 - 0.5f64.powi(n as i32)) * std::f64::consts::FRAC_PI_2;
                C64::from_polar(1.0, angle)
            }
        })
        .collect()
}

/// Per-element hull verdicts for a diagonal family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalPolyhedronReport {
    pub members: Vec<bool>,
    pub distances: Vec<f64>,
    pub is_polyhedron: bool,
}

/// Checks each function against the hull of the others, pointwise.
pub fn verify_polyhedron_pointwise(
    family: &DiagonalFamily,
    mode: Mode,
) -> Result<DiagonalPolyhedronReport> {
    let mut members = Vec::with_capacity(family.len());
    let mut distances = Vec::with_capacity(family.len());
    for (i, f) in family.functions().iter().enumerate() {
        let v = pointwise_hull_membership(&family.without(i), f, mode)?;
        members.push(v.member);
        distances.push(v.distance);
    }
    Ok(DiagonalPolyhedronReport {
        is_polyhedron: members.iter().all(|&m| !m),
        members,
        distances,
    })
}

/// An almost biorthogonal system: `f_α(x_α) = 1` and `|f_β(x_α)| ≤ η` for
/// `β ≠ α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UbabsSystem {
    pub family: DiagonalFamily,
    pub anchors: Vec<usize>,
    pub eta: f64,
}

impl UbabsSystem {
    pub fn new(family: DiagonalFamily, anchors: Vec<usize>, eta: f64) -> Result<Self> {
        let sys = Self {
            family,
            anchors,
            eta,
        };
        sys.check()?;
        Ok(sys)
    }

    /// Indicator functions of `count` distinct points (`η = 0`).
    pub fn indicators(count: usize) -> Self {
        let functions = (0..count)
            .map(|a| {
                (0..count)
                    .map(|x| C64::new(if x == a { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        Self {
            family: DiagonalFamily::new(count, functions).expect("square data"),
            anchors: (0..count).collect(),
            eta: 0.0,
        }
    }

    fn check(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.eta) {
            return Err(Error::Precondition(format!(
                "eta must lie in [0, 1), got {}",
                self.eta
            )));
        }
        if self.anchors.len() != self.family.len() {
            return Err(Error::Precondition(
                "one anchor per function required".into(),
            ));
        }
        for (a, &xa) in self.anchors.iter().enumerate() {
            if xa >= self.family.points() {
                return Err(Error::InvalidIndex {
                    index: xa,
                    len: self.family.points(),
                });
            }
            let fa = self.family.functions()[a][xa];
            if (fa - C64::new(1.0, 0.0)).norm() > 1e-12 {
                return Err(Error::Precondition(format!(
                    "function {a} is not 1 at its anchor"
                )));
            }
            for (b, fb) in self.family.functions().iter().enumerate() {
                if b != a && fb[xa].norm() > self.eta + 1e-12 {
                    return Err(Error::Precondition(format!(
                        "|f_{b}(x_{a})| = {} exceeds eta",
                        fb[xa].norm()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The gap `1 − η`, a lower bound on each function's sup-norm distance to
/// the sub-unital hull of the others.
///
/// The bound is re-derived at every anchor point from exact plane geometry.
pub fn ubabs_gap(system: &UbabsSystem) -> Result<f64> {
    system.check()?;
    let gap = 1.0 - system.eta;
    for (a, &xa) in system.anchors.iter().enumerate() {
        let others: Vec<C64> = system
            .family
            .functions()
            .iter()
            .enumerate()
            .filter(|&(b, _)| b != a)
            .map(|(_, f)| f[xa])
            .collect();
        let dist = plane_hull_distance(system.family.functions()[a][xa], &others, true);
        if dist < gap - 1e-12 {
            return Err(Error::Precondition(format!(
                "anchor distance {dist} for function {a} is below the gap {gap}"
            )));
        }
    }
    Ok(gap)
}

/// Result of decomposing an indicator into compressed cover indicators.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverDecomposition {
    /// Indicators of the cover sets as diagonal matrices.
    pub family: MatrixFamily,
    /// Disjoint pieces `Bᵢ ⊆ cover_sets[i]` partitioning the target.
    pub parts: Vec<Vec<usize>>,
    /// `Σ qᵢ p_{Sᵢ} qᵢ` with `qᵢ = 1_{Bᵢ}`, over nonempty pieces.
    pub combination: KrausCombination,
}

fn indicator(points: usize, set: &BTreeSet<usize>) -> CMatrix {
    let diag: Vec<f64> = (0..points)
        .map(|x| if set.contains(&x) { 1.0 } else { 0.0 })
        .collect();
    CMatrix::from_real_diagonal(&diag)
}

/// Writes the indicator of `target` as a sub-unital combination of cover
/// indicators, using the greedy partition
/// `Bᵢ = target ∩ coverᵢ \ (B₁ ∪ … ∪ B_{i−1})`.
pub fn projection_cover_decompose(
    points: usize,
    target: &[usize],
    cover_sets: &[Vec<usize>],
) -> Result<CoverDecomposition> {
    let in_range = |s: &[usize]| s.iter().all(|&x| x < points);
    if !in_range(target) || !cover_sets.iter().all(|c| in_range(c)) {
        return Err(Error::Precondition(format!(
            "point index outside 0..{points}"
        )));
    }
    let target: BTreeSet<usize> = target.iter().copied().collect();
    let covers: Vec<BTreeSet<usize>> = cover_sets
        .iter()
        .map(|c| c.iter().copied().collect())
        .collect();
    let union: BTreeSet<usize> = covers.iter().flatten().copied().collect();
    if let Some(x) = target.difference(&union).next() {
        return Err(Error::Precondition(format!("point {x} is not covered")));
    }
    let mut used = BTreeSet::new();
    let mut parts = Vec::with_capacity(covers.len());
    let mut terms = Vec::new();
    for (i, cover) in covers.iter().enumerate() {
        let part: BTreeSet<usize> = target
            .intersection(cover)
            .filter(|x| !used.contains(*x))
            .copied()
            .collect();
        used.extend(part.iter().copied());
        if !part.is_empty() {
            terms.push(KrausTerm {
                gen: i,
                coeff: indicator(points, &part),
            });
        }
        parts.push(part.into_iter().collect());
    }
    let family = MatrixFamily::with_dim(
        points.max(1),
        covers.iter().map(|c| indicator(points, c)).collect(),
    )?;
    Ok(CoverDecomposition {
        family,
        parts,
        combination: KrausCombination::new(Mode::SubUnital, terms),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kraus::apply_combination;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn projections_in_two_point_algebra() {
        let fam = DiagonalFamily::from_real(2, &[vec![1.0, 0.0]]).unwrap();
        let v =
            pointwise_hull_membership(&fam, &[c(0.0, 0.0), c(1.0, 0.0)], Mode::SubUnital).unwrap();
        assert!(!v.member);
        assert!(v.weights[1].is_none());
        assert!((v.distance - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pointwise_weights_vary_by_point() {
        let fam = DiagonalFamily::from_real(2, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let t = [c(1.0 / 3.0, 0.0), c(1.0 / 3.0, 0.0)];
        let v = pointwise_hull_membership(&fam, &t, Mode::ExactUnital).unwrap();
        assert!(v.member);
        let w0 = v.weights[0].as_ref().unwrap();
        let w1 = v.weights[1].as_ref().unwrap();
        assert!((w0[0] - 1.0 / 3.0).abs() < 1e-12 && (w0[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!((w1[0] - 2.0 / 3.0).abs() < 1e-12 && (w1[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn generator_is_member() {
        let fam = DiagonalFamily::new(2, vec![vec![c(0.3, 1.0), c(-2.0, 0.5)]]).unwrap();
        let t = fam.functions()[0].clone();
        assert!(
            pointwise_hull_membership(&fam, &t, Mode::ExactUnital)
                .unwrap()
                .member
        );
        assert!(pointwise_hull_membership(&fam, &[c(0.0, 0.0)], Mode::ExactUnital).is_err());
    }

    #[test]
    fn scalar_examples() {
        let vals = [c(1.0, 0.0), c(0.0, 1.0)];
        let t = c(1.0 / 3.0, 1.0 / 3.0);
        assert!(!scalar_hull_membership(&vals, t, Mode::ExactUnital));
        assert!(scalar_hull_membership(&vals, t, Mode::SubUnital));
        let l = c(0.6, -0.8);
        assert!(scalar_hull_membership(&[l], l, Mode::ExactUnital));
        assert!(!scalar_hull_membership(&[], l, Mode::ExactUnital));
    }

    #[test]
    fn lambda_examples() {
        let l = lambda_sequence(6);
        assert_eq!(l[0], c(1.0, 0.0));
        let h = 0.5f64.sqrt();
        assert!((l[1] - c(h, h)).norm() < 1e-15);
        let mut prev = -1.0;
        for z in &l {
            assert!((z.norm() - 1.0).abs() < 1e-15);
            let arg = z.arg();
            assert!(arg > prev && arg < std::f64::consts::FRAC_PI_2);
            prev = arg;
        }
    }

    #[test]
    fn plane_distance_examples() {
        let pts = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)];
        assert_eq!(plane_hull_distance(c(0.2, 0.2), &pts, false), 0.0);
        assert!((plane_hull_distance(c(2.0, 0.0), &[c(1.0, 0.0)], true) - 1.0).abs() < 1e-15);
        // λ₂ against its neighbours: the active facet is the chord [λ₁, λ₃].
        let l = lambda_sequence(6);
        let others = [l[0], l[1], l[3], l[4], l[5]];
        let d = plane_hull_distance(l[2], &others, true);
        assert!((d - segment_distance(l[2], l[1], l[3])).abs() < 1e-15);
        assert!(d > 0.0);
    }

    #[test]
    fn ubabs_examples() {
        let sys = UbabsSystem::indicators(5);
        assert_eq!(ubabs_gap(&sys).unwrap(), 1.0);

        let fam = DiagonalFamily::from_real(2, &[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let sys = UbabsSystem::new(fam, vec![0, 1], 0.5).unwrap();
        assert_eq!(ubabs_gap(&sys).unwrap(), 0.5);

        let fam = DiagonalFamily::from_real(2, &[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        assert!(UbabsSystem::new(fam, vec![0, 1], 1.0).is_err());
    }

    #[test]
    fn cover_examples() {
        let d = projection_cover_decompose(3, &[0, 1], &[vec![0, 1]]).unwrap();
        assert_eq!(d.combination.terms.len(), 1);

        let d = projection_cover_decompose(3, &[1, 2], &[vec![1], vec![2]]).unwrap();
        assert_eq!(d.parts, vec![vec![1], vec![2]]);

        let d = projection_cover_decompose(4, &[1, 2, 3], &[vec![1, 2], vec![2, 3]]).unwrap();
        assert_eq!(d.parts, vec![vec![1, 2], vec![3]]);
        let value = apply_combination(&d.family, &d.combination).unwrap();
        assert_eq!(value, CMatrix::from_real_diagonal(&[0.0, 1.0, 1.0, 1.0]));

        assert!(projection_cover_decompose(4, &[0, 3], &[vec![0]]).is_err());
    }
}
