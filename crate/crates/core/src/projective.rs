//! Projective points, polynomial curves and fixed/moving hyperplanes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{common_roots, ComplexPoly};
use crate::position::Region;
use crate::tolerance::Tolerances;

/// A point of `P^n` in homogeneous coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjPoint {
    coords: Vec<Complex64>,
}

impl ProjPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() || coords.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::AllZero);
        }
        Ok(ProjPoint { coords })
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    /// Projective dimension `n` (there are `n + 1` coordinates).
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// Projective equality within `tol` in the Fubini-Study distance.
    pub fn approx_eq(&self, other: &ProjPoint, tol: f64) -> bool {
        fs_distance(self, other).is_ok_and(|d| d <= tol)
    }
}

/// Fubini-Study chordal distance `sqrt(1 - |<p,q>|^2 / (|p|^2 |q|^2))`.
///
/// Evaluated through Lagrange's identity, `|p|^2|q|^2 - |<p,q>|^2 =
/// sum_{i<j} |p_i q_j - p_j q_i|^2`, which keeps full relative accuracy for
/// nearby points.
pub fn fs_distance(p: &ProjPoint, q: &ProjPoint) -> Result<f64> {
    if p.coords.len() != q.coords.len() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    Ok(fs_distance_raw(&p.coords, &q.coords))
}

/// [`fs_distance`] on raw coordinate slices of equal length, neither zero.
pub(crate) fn fs_distance_raw(p: &[Complex64], q: &[Complex64]) -> f64 {
    let p = unit_scaled(p);
    let q = unit_scaled(q);
    let np: f64 = p.iter().map(|c| c.norm_sqr()).sum();
    let nq: f64 = q.iter().map(|c| c.norm_sqr()).sum();
    let mut wedge = 0.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            wedge += (p[i] * q[j] - p[j] * q[i]).norm_sqr();
        }
    }
    (wedge / (np * nq)).sqrt().min(1.0)
}

fn unit_scaled(v: &[Complex64]) -> Vec<Complex64> {
    let m = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    v.iter().map(|c| c / m).collect()
}

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(Complex64),
    Infinity,
}

impl From<Complex64> for Extended {
    fn from(z: Complex64) -> Self {
        Extended::Finite(z)
    }
}

/// Chordal metric on the Riemann sphere.
pub fn chordal(a: Extended, b: Extended) -> f64 {
    match (a, b) {
        (Extended::Infinity, Extended::Infinity) => 0.0,
        (Extended::Finite(z), Extended::Infinity) | (Extended::Infinity, Extended::Finite(z)) => {
            1.0 / (1.0 + z.norm_sqr()).sqrt()
        }
        (Extended::Finite(a), Extended::Finite(b)) => {
            (a - b).norm() / ((1.0 + a.norm_sqr()).sqrt() * (1.0 + b.norm_sqr()).sqrt())
        }
    }
}

/// A holomorphic curve into `P^n` given by a polynomial reduced
/// representation `(f_0, ..., f_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTuple")]
pub struct ProjCurve {
    n: usize,
    components: Vec<ComplexPoly>,
}

/// Wire form of a curve: `{"n": .., "components": [poly, ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawTuple {
    pub n: usize,
    pub components: Vec<ComplexPoly>,
}

/// Wire form of a hyperplane: `{"n": .., "coeffs": [poly, ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawHyperplane {
    pub n: usize,
    pub coeffs: Vec<ComplexPoly>,
}

impl TryFrom<RawTuple> for ProjCurve {
    type Error = Error;

    fn try_from(raw: RawTuple) -> Result<Self> {
        check_len(raw.n, raw.components.len())?;
        ProjCurve::new(raw.components)
    }
}

fn check_len(n: usize, len: usize) -> Result<()> {
    if len != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: len.saturating_sub(1),
        });
    }
    Ok(())
}

impl ProjCurve {
    /// Accept a tuple that is already reduced; rejects tuples with a common
    /// root (use [`reduce`] to cancel it instead).
    pub fn new(components: Vec<ComplexPoly>) -> Result<Self> {
        Self::new_with(components, &Tolerances::default())
    }

    pub fn new_with(components: Vec<ComplexPoly>, tol: &Tolerances) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if let Some(r) = common_roots(&components, tol)?.first() {
            return Err(Error::CommonZero {
                re: r.z.re,
                im: r.z.im,
            });
        }
        Ok(ProjCurve {
            n: components.len() - 1,
            components,
        })
    }

    /// Convenience constructor from real coefficient lists.
    pub fn from_real(components: &[&[f64]]) -> Result<Self> {
        Self::new(
            components
                .iter()
                .map(|c| ComplexPoly::from_real(c))
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[ComplexPoly] {
        &self.components
    }

    pub fn eval(&self, z: Complex64) -> Vec<Complex64> {
        self.components.iter().map(|p| p.eval(z)).collect()
    }

    /// Image point `f(z)`.
    pub fn point(&self, z: Complex64) -> ProjPoint {
        ProjPoint {
            coords: self.eval(z),
        }
    }

    /// True if every component has degree 0, i.e. the map is constant.
    pub fn has_constant_components(&self) -> bool {
        self.components.iter().all(|p| p.degree() == 0)
    }

    /// True if the map into `P^n` is constant: all pairwise Wronskians vanish.
    pub fn is_constant_map(&self) -> bool {
        let c = &self.components;
        (0..c.len())
            .all(|i| (i + 1..c.len()).all(|j| crate::polynomial::wronskian(&c[i], &c[j]).is_zero()))
    }

    /// `sup_l |f_l(z)|`.
    pub fn sup_norm(&self, z: Complex64) -> f64 {
        sup_norm(self, z)
    }

    /// Multiply every component by the nonzero constant `c`.
    pub fn scaled(&self, c: Complex64) -> ProjCurve {
        ProjCurve {
            n: self.n,
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// `f(center + scale * zeta)` recomposed exactly.
    pub fn compose_affine(&self, center: Complex64, scale: Complex64) -> ProjCurve {
        ProjCurve {
            n: self.n,
            components: self
                .components
                .iter()
                .map(|p| p.compose_affine(center, scale))
                .collect(),
        }
    }
}

/// `max_l |f_l(z)|`.
pub fn sup_norm(f: &ProjCurve, z: Complex64) -> f64 {
    f.components
        .iter()
        .map(|p| p.eval(z).norm())
        .fold(0.0, f64::max)
}

/// Cancel the common factor of the components so they have no common root.
pub fn reduce(components: Vec<ComplexPoly>) -> Result<ProjCurve> {
    reduce_with(components, &Tolerances::default())
}

/// [`reduce`] with explicit tolerances. The common factor is removed by
/// deflating each component against the common root clusters.
pub fn reduce_with(components: Vec<ComplexPoly>, tol: &Tolerances) -> Result<ProjCurve> {
    if components.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    let common = common_roots(&components, tol)?;
    let components = components
        .into_iter()
        .map(|p| p.deflate(&common))
        .collect::<Vec<_>>();
    Ok(ProjCurve {
        n: components.len() - 1,
        components,
    })
}

/// A moving hyperplane `a_0(z) w_0 + ... + a_n(z) w_n = 0` with polynomial
/// coefficients free of common zeros. Fixed hyperplanes have constant
/// coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawHyperplane", into = "RawHyperplane")]
pub struct MovingHyperplane {
    n: usize,
    coeffs: Vec<ComplexPoly>,
    /// Factor applied to the caller's representative by normalization.
    normalization: f64,
}

/// Equality of representatives; the normalization record is provenance only.
impl PartialEq for MovingHyperplane {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.coeffs == other.coeffs
    }
}

impl TryFrom<RawHyperplane> for MovingHyperplane {
    type Error = Error;

    fn try_from(raw: RawHyperplane) -> Result<Self> {
        check_len(raw.n, raw.coeffs.len())?;
        MovingHyperplane::new(raw.coeffs)
    }
}

impl From<MovingHyperplane> for RawHyperplane {
    fn from(h: MovingHyperplane) -> Self {
        RawHyperplane {
            n: h.n,
            coeffs: h.coeffs,
        }
    }
}

impl MovingHyperplane {
    pub fn new(coeffs: Vec<ComplexPoly>) -> Result<Self> {
        Self::new_with(coeffs, &Tolerances::default())
    }

    pub fn new_with(coeffs: Vec<ComplexPoly>, tol: &Tolerances) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if let Some(r) = common_roots(&coeffs, tol)?.first() {
            return Err(Error::CommonZero {
                re: r.z.re,
                im: r.z.im,
            });
        }
        Ok(MovingHyperplane {
            n: coeffs.len() - 1,
            coeffs,
            normalization: 1.0,
        })
    }

    /// Fixed hyperplane with constant coefficients.
    pub fn fixed(coeffs: &[Complex64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| ComplexPoly::constant(c)).collect())
    }

    pub fn fixed_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(
            coeffs
                .iter()
                .map(|&c| ComplexPoly::from_real(&[c]))
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[ComplexPoly] {
        &self.coeffs
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn is_fixed(&self) -> bool {
        self.coeffs.iter().all(|p| p.degree() == 0)
    }

    pub fn eval(&self, z: Complex64) -> Vec<Complex64> {
        self.coeffs.iter().map(|p| p.eval(z)).collect()
    }

    /// `max_l |a_l(z)|`.
    pub fn norm_at(&self, z: Complex64) -> f64 {
        hyperplane_norm(self, z)
    }

    /// Same hyperplane, representative multiplied by `c`.
    pub fn scaled(&self, c: Complex64) -> MovingHyperplane {
        MovingHyperplane {
            n: self.n,
            coeffs: self.coeffs.iter().map(|p| p.scale(c)).collect(),
            normalization: self.normalization * c.norm(),
        }
    }

    /// Rescale so the maximum of `norm_at` over the region's grid is 1.
    pub fn normalized(&self, region: &Region) -> MovingHyperplane {
        let peak = region
            .grid_points()
            .into_iter()
            .map(|z| self.norm_at(z))
            .fold(0.0, f64::max);
        if peak == 0.0 || (peak - 1.0).abs() <= 4.0 * f64::EPSILON {
            return self.clone();
        }
        self.scaled(Complex64::new(1.0 / peak, 0.0))
    }

    /// Fixed hyperplane rescaled so its largest coefficient has modulus 1.
    pub fn normalized_fixed(&self) -> MovingHyperplane {
        let peak = self.norm_at(Complex64::new(0.0, 0.0));
        if peak == 0.0 || peak == 1.0 {
            return self.clone();
        }
        self.scaled(Complex64::new(1.0 / peak, 0.0))
    }

    /// The curve `z -> [a_0(z) : ... : a_n(z)]`.
    pub fn induced_curve(&self) -> ProjCurve {
        induced_curve(self)
    }
}

/// `max_l |a_l(z)|`.
pub fn hyperplane_norm(h: &MovingHyperplane, z: Complex64) -> f64 {
    h.coeffs
        .iter()
        .map(|p| p.eval(z).norm())
        .fold(0.0, f64::max)
}

pub fn induced_curve(h: &MovingHyperplane) -> ProjCurve {
    ProjCurve {
        n: h.n,
        components: h.coeffs.clone(),
    }
}

/// `<f, H> = sum_l a_l(z) f_l(z)` as an exact polynomial.
pub fn pair(f: &ProjCurve, h: &MovingHyperplane) -> Result<ComplexPoly> {
    pair_coeffs(f, &h.coeffs)
}

/// [`pair`] against a raw coefficient tuple.
pub fn pair_coeffs(f: &ProjCurve, coeffs: &[ComplexPoly]) -> Result<ComplexPoly> {
    if coeffs.len() != f.components.len() {
        return Err(Error::DimensionMismatch {
            expected: f.n,
            found: coeffs.len().saturating_sub(1),
        });
    }
    let terms: Vec<ComplexPoly> = coeffs
        .iter()
        .zip(&f.components)
        .map(|(a, p)| a * p)
        .collect();
    let scale = terms
        .iter()
        .map(|t| t.max_coeff_modulus())
        .fold(0.0, f64::max);
    let mut sum = ComplexPoly::zero();
    for t in &terms {
        sum = &sum + t;
    }
    if sum.is_negligible(scale, crate::polynomial::TAU_COEFF) {
        return Ok(ComplexPoly::zero());
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn poly(c: &[f64]) -> ComplexPoly {
        ComplexPoly::from_real(c)
    }

    #[test]
    fn reduce_examples() {
        let f = reduce(vec![poly(&[0.0, 0.0, 1.0]), poly(&[0.0, 0.0, 0.0, 1.0])]).unwrap();
        assert_eq!(f.components(), &[poly(&[1.0]), poly(&[0.0, 1.0])]);

        let f = reduce(vec![poly(&[-1.0, 0.0, 1.0]), poly(&[-1.0, 1.0])]).unwrap();
        assert_eq!(f.components()[0].degree(), 1);
        assert!((f.components()[0].coeffs()[0] - c64(1.0, 0.0)).norm() < 1e-12);
        assert!((f.components()[1].coeffs()[0] - c64(1.0, 0.0)).norm() < 1e-12);

        let f = reduce(vec![poly(&[1.0]), poly(&[0.0, 1.0])]).unwrap();
        assert_eq!(f.components(), &[poly(&[1.0]), poly(&[0.0, 1.0])]);

        assert_eq!(
            reduce(vec![ComplexPoly::zero(), ComplexPoly::zero()]),
            Err(Error::AllZero)
        );
    }

    #[test]
    fn new_rejects_common_zero() {
        assert!(matches!(
            ProjCurve::from_real(&[&[0.0, 1.0], &[0.0, 0.0, 1.0]]),
            Err(Error::CommonZero { .. })
        ));
    }

    #[test]
    fn pair_examples() {
        let f = ProjCurve::from_real(&[&[1.0], &[0.0, 1.0]]).unwrap();
        let h = MovingHyperplane::fixed_real(&[1.0, -1.0]).unwrap();
        assert_eq!(pair(&f, &h).unwrap(), poly(&[1.0, -1.0]));

        let h = MovingHyperplane::new(vec![poly(&[0.0, 1.0]), poly(&[1.0])]).unwrap();
        assert_eq!(pair(&f, &h).unwrap(), poly(&[0.0, 2.0]));

        let f2 = ProjCurve::from_real(&[&[1.0], &[0.0, 1.0], &[0.0, 0.0, 1.0]]).unwrap();
        let h = MovingHyperplane::fixed_real(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(pair(&f2, &h).unwrap(), poly(&[0.0, 0.0, 1.0]));

        assert!(matches!(
            pair(&f2, &MovingHyperplane::fixed_real(&[1.0, 0.0]).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn norms() {
        let f = ProjCurve::from_real(&[&[1.0], &[0.0, 1.0]]).unwrap();
        assert_eq!(sup_norm(&f, c64(2.0, 0.0)), 2.0);
        assert_eq!(sup_norm(&f, c64(0.0, 0.0)), 1.0);
        let g = ProjCurve::from_real(&[&[3.0], &[0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(sup_norm(&g, c64(0.0, 1.0)), 3.0);

        let h = MovingHyperplane::fixed_real(&[1.0, -1.0]).unwrap();
        assert_eq!(hyperplane_norm(&h, c64(7.0, -3.0)), 1.0);
        let h = MovingHyperplane::new(vec![poly(&[0.0, 1.0]), poly(&[1.0])]).unwrap();
        assert_eq!(hyperplane_norm(&h, c64(2.0, 0.0)), 2.0);
        let h = MovingHyperplane::new(vec![poly(&[0.0, 1.0]), poly(&[1.0, 1.0])]).unwrap();
        assert_eq!(hyperplane_norm(&h, c64(0.0, 0.0)), 1.0);
    }

    #[test]
    fn induced_curve_and_invariant_gate() {
        let h = MovingHyperplane::fixed_real(&[1.0, -1.0]).unwrap();
        assert_eq!(
            induced_curve(&h).components(),
            &[poly(&[1.0]), poly(&[-1.0])]
        );
        let h = MovingHyperplane::new(vec![poly(&[0.0, 1.0]), poly(&[1.0])]).unwrap();
        assert_eq!(induced_curve(&h).components(), h.coeffs());
        assert!(matches!(
            MovingHyperplane::new(vec![poly(&[0.0, 0.0, 1.0]), poly(&[0.0, 0.0, 0.0, 1.0])]),
            Err(Error::CommonZero { .. })
        ));
        assert_eq!(
            MovingHyperplane::new(vec![ComplexPoly::zero(), ComplexPoly::zero()]),
            Err(Error::AllZero)
        );
    }

    #[test]
    fn fs_distance_examples() {
        let p = |v: &[f64]| ProjPoint::new(v.iter().map(|&x| c64(x, 0.0)).collect()).unwrap();
        assert_eq!(fs_distance(&p(&[1.0, 0.0]), &p(&[1.0, 0.0])).unwrap(), 0.0);
        assert_eq!(fs_distance(&p(&[1.0, 0.0]), &p(&[0.0, 1.0])).unwrap(), 1.0);
        assert!((fs_distance(&p(&[1.0, 1.0]), &p(&[1.0, -1.0])).unwrap() - 1.0).abs() < 1e-15);
        assert!(fs_distance(&p(&[1.0, 1.0]), &p(&[1.0, 0.0, 0.0])).is_err());
        assert!(ProjPoint::new(vec![c64(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn chordal_examples() {
        let zero = Extended::Finite(c64(0.0, 0.0));
        assert_eq!(chordal(zero, Extended::Infinity), 1.0);
        let a = Extended::Finite(c64(0.3, -2.0));
        assert_eq!(chordal(a, a), 0.0);
        assert!((chordal(zero, Extended::Finite(c64(1.0, 0.0))) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(chordal(Extended::Infinity, Extended::Infinity), 0.0);
    }

    #[test]
    fn normalization_hits_unit_peak() {
        let region = Region::new(-1.0, 1.0, -1.0, 1.0, 5, 5).unwrap();
        let h = MovingHyperplane::new(vec![poly(&[0.0, 3.0]), poly(&[3.0])])
            .unwrap()
            .normalized(&region);
        let peak = region
            .grid_points()
            .into_iter()
            .map(|z| h.norm_at(z))
            .fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-15);
        assert!((h.normalization() - 1.0 / (3.0 * 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn json_schema() {
        let f: ProjCurve =
            serde_json::from_str(r#"{"n":1,"components":[[[1,0]],[[0,0],[1,0]]]}"#).unwrap();
        assert_eq!(f.n(), 1);
        let h: MovingHyperplane =
            serde_json::from_str(r#"{"n":1,"coeffs":[[[0,0],[1,0]],[[1,0]]]}"#).unwrap();
        assert!(!h.is_fixed());
        let s = serde_json::to_string(&h).unwrap();
        assert_eq!(s, r#"{"n":1,"coeffs":[[[0.0,0.0],[1.0,0.0]],[[1.0,0.0]]]}"#);
        assert!(serde_json::from_str::<ProjCurve>(
            r#"{"n":2,"components":[[[1,0]],[[0,0],[1,0]]]}"#
        )
        .is_err());
    }
}
