//! Complex univariate polynomials.
//!
//! Coefficients are stored in ascending degree. Trailing coefficients that are
//! negligible relative to the polynomial's scale are trimmed on construction,
//! so the empty coefficient vector is the zero polynomial.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Default coefficient trimming tolerance, relative to the largest modulus.
pub const TAU_COEFF: f64 = 1e-12;

/// Relative tolerance of the multiplicity test used when merging split
/// clusters of a multiple root.
const MULTIPLICITY_TEST_TOL: f64 = 1e-9;

/// Radius (relative to `max(1, |z|)`) inside which split clusters are
/// candidates for the multiplicity test.
const MULTIPLICITY_MERGE_RADIUS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct ComplexPoly {
    coeffs: Vec<Complex64>,
}

/// A root cluster: location and multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub z: Complex64,
    pub multiplicity: usize,
}

impl Root {
    pub fn new(z: Complex64, multiplicity: usize) -> Self {
        Root { z, multiplicity }
    }
}

fn max_modulus(cs: &[Complex64]) -> f64 {
    cs.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

impl ComplexPoly {
    /// Build from ascending coefficients, trimming with the default tolerance.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self::new_with_tol(coeffs, TAU_COEFF)
    }

    /// Build from ascending coefficients, trimming trailing entries with
    /// modulus `<= tol * max modulus`.
    pub fn new_with_tol(coeffs: Vec<Complex64>, tol: f64) -> Self {
        let scale = max_modulus(&coeffs);
        Self::trimmed(coeffs, scale, tol)
    }

    /// Trim trailing coefficients against an externally supplied scale. Used
    /// after cancellation, where the result's own maximum is meaningless.
    fn trimmed(mut coeffs: Vec<Complex64>, scale: f64, tol: f64) -> Self {
        let cutoff = tol * scale;
        while let Some(last) = coeffs.last() {
            if last.norm() <= cutoff || *last == Complex64::new(0.0, 0.0) {
                coeffs.pop();
            } else {
                break;
            }
        }
        ComplexPoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        ComplexPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// The identity polynomial `z`.
    pub fn identity() -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
    }

    /// `c * z^k`.
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// Monic polynomial with the given roots and multiplicities.
    pub fn from_roots(roots: &[Root]) -> Self {
        let mut p = Self::one();
        for r in roots {
            let lin = ComplexPoly::new(vec![-r.z, Complex64::new(1.0, 0.0)]);
            for _ in 0..r.multiplicity {
                p = &p * &lin;
            }
        }
        p
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0 (check [`is_zero`](Self::is_zero)).
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// True for nonzero polynomials of degree 0.
    pub fn is_constant(&self) -> bool {
        self.coeffs.len() == 1
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn max_coeff_modulus(&self) -> f64 {
        max_modulus(&self.coeffs)
    }

    /// True if every coefficient is at most `tol * scale` in modulus.
    pub fn is_negligible(&self, scale: f64, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.norm() <= tol * scale)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::trimmed(self.coeffs.iter().map(|&a| a * c).collect(), 1.0, 0.0)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(self.leading().inv())
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative at `z` in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Self::trimmed(coeffs, 1.0, 0.0)
    }

    /// `k`-th derivative.
    pub fn nth_derivative(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |p, _| p.derivative())
    }

    /// `p(center + scale * zeta)` as a polynomial in `zeta`, by Horner
    /// recomposition on polynomials.
    pub fn compose_affine(&self, center: Complex64, scale: Complex64) -> Self {
        let lin = ComplexPoly {
            coeffs: vec![center, scale],
        };
        let mut acc = Self::zero();
        for &c in self.coeffs.iter().rev() {
            acc = &acc * &lin;
            match acc.coeffs.first_mut() {
                Some(a0) => *a0 += c,
                None => acc.coeffs.push(c),
            }
        }
        Self::trimmed(acc.coeffs, 1.0, 0.0)
    }

    /// Divide by `(z - r)` once, discarding the remainder. Forward synthetic
    /// division is used for `|r| <= 1`, backward for larger roots.
    pub fn deflate_once(&self, r: Complex64) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return Self::zero();
        }
        let a = &self.coeffs;
        let mut q = vec![Complex64::new(0.0, 0.0); n - 1];
        if r.norm() <= 1.0 {
            // a_d z^d + ... : q_{d-1} = a_d, q_{k-1} = a_k + r q_k
            q[n - 2] = a[n - 1];
            for k in (1..n - 1).rev() {
                q[k - 1] = a[k] + r * q[k];
            }
        } else {
            // a_0 = -r q_0, a_k = q_{k-1} - r q_k
            q[0] = -a[0] / r;
            for k in 1..n - 1 {
                q[k] = (q[k - 1] - a[k]) / r;
            }
        }
        Self::trimmed(q, 1.0, 0.0)
    }

    /// Remove every listed root cluster by repeated deflation.
    pub fn deflate(&self, roots: &[Root]) -> Self {
        let mut p = self.clone();
        for r in roots {
            for _ in 0..r.multiplicity {
                p = p.deflate_once(r.z);
            }
        }
        p
    }

    /// Roots with multiplicities under default tolerances.
    pub fn roots(&self) -> Result<Vec<Root>> {
        roots_with(self, &Tolerances::default())
    }
}

impl fmt::Display for ComplexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(k, c)| match k {
                0 => format!("({c})"),
                1 => format!("({c})z"),
                _ => format!("({c})z^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl TryFrom<Vec<[f64; 2]>> for ComplexPoly {
    type Error = String;

    fn try_from(v: Vec<[f64; 2]>) -> std::result::Result<Self, String> {
        if v.iter().flatten().any(|x| !x.is_finite()) {
            return Err("polynomial coefficients must be finite".into());
        }
        Ok(ComplexPoly::new(
            v.into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        ))
    }
}

impl From<ComplexPoly> for Vec<[f64; 2]> {
    fn from(p: ComplexPoly) -> Self {
        p.coeffs.iter().map(|c| [c.re, c.im]).collect()
    }
}

impl Add for &ComplexPoly {
    type Output = ComplexPoly;

    fn add(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        let coeffs = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(zero)
                    + rhs.coeffs.get(k).copied().unwrap_or(zero)
            })
            .collect();
        let scale = self.max_coeff_modulus().max(rhs.max_coeff_modulus());
        ComplexPoly::trimmed(coeffs, scale, TAU_COEFF)
    }
}

impl Neg for &ComplexPoly {
    type Output = ComplexPoly;

    fn neg(self) -> ComplexPoly {
        ComplexPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;

    fn sub(self, rhs: &ComplexPoly) -> ComplexPoly {
        self + &(-rhs)
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;

    fn mul(self, rhs: &ComplexPoly) -> ComplexPoly {
        if self.is_zero() || rhs.is_zero() {
            return ComplexPoly::zero();
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        ComplexPoly::trimmed(coeffs, 1.0, 0.0)
    }
}

/// `W(p, q) = p q' - p' q`.
pub fn wronskian(p: &ComplexPoly, q: &ComplexPoly) -> ComplexPoly {
    &(p * &q.derivative()) - &(&p.derivative() * q)
}

/// All roots of `p` with multiplicities.
///
/// Eigenvalues of the companion matrix are computed by a complex Schur
/// decomposition, each is polished by one guarded Newton step, and the
/// results are clustered: first within `tol.cluster`, then split clusters of
/// a multiple root are merged when the merged centroid passes a derivative
/// test for the combined multiplicity. Every reported root satisfies
/// `|p(z)| <= tol.res * max|c_k| * max(1, |z|)^deg`.
pub fn roots_with(p: &ComplexPoly, tol: &Tolerances) -> Result<Vec<Root>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let coeffs = p.coeffs();
    let zero_mult = coeffs
        .iter()
        .take_while(|c| **c == Complex64::new(0.0, 0.0))
        .count();
    let reduced = ComplexPoly {
        coeffs: coeffs[zero_mult..].to_vec(),
    };

    let mut raw: Vec<Complex64> = match reduced.degree() {
        0 => Vec::new(),
        1 => vec![-reduced.coeffs[0] / reduced.coeffs[1]],
        _ => companion_eigenvalues(&reduced).unwrap_or_else(|| aberth(&reduced)),
    };
    for z in raw.iter_mut() {
        *z = newton_polish(&reduced, *z);
    }

    let mut clusters = cluster_points(&raw, tol.cluster);
    for r in clusters.iter_mut() {
        let radius = tol.cluster * r.z.norm().max(1.0);
        r.z = refine_multiple(&reduced, r.z, r.multiplicity, radius);
    }
    merge_multiple_roots(&reduced, &mut clusters);
    if zero_mult > 0 {
        clusters.push(Root::new(Complex64::new(0.0, 0.0), zero_mult));
    }
    clusters.sort_by(|a, b| {
        a.z.re
            .partial_cmp(&b.z.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                a.z.im
                    .partial_cmp(&b.z.im)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
    });
    Ok(clusters)
}

fn companion_eigenvalues(p: &ComplexPoly) -> Option<Vec<Complex64>> {
    let d = p.degree();
    let lead = p.leading();
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..d {
        m[(i, d - 1)] = -p.coeffs[i] / lead;
    }
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000 * d)?;
    let (_, t) = schur.unpack();
    let mut out = Vec::with_capacity(d);
    let mut i = 0;
    while i < d {
        let sub = if i + 1 < d {
            t[(i + 1, i)]
        } else {
            Complex64::new(0.0, 0.0)
        };
        if i + 1 < d && sub.norm() > f64::EPSILON * (t[(i, i)].norm() + t[(i + 1, i + 1)].norm()) {
            // unreduced 2x2 block
            let (a, b, c, dd) = (t[(i, i)], t[(i, i + 1)], sub, t[(i + 1, i + 1)]);
            let tr = a + dd;
            let det = a * dd - b * c;
            let disc = (tr * tr - det * 4.0).sqrt();
            out.push((tr + disc) * 0.5);
            out.push((tr - disc) * 0.5);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    if out.iter().all(|z| z.is_finite()) {
        Some(out)
    } else {
        None
    }
}

/// Aberth-Ehrlich simultaneous iteration; fallback when the Schur iteration
/// does not converge.
fn aberth(p: &ComplexPoly) -> Vec<Complex64> {
    let d = p.degree();
    let a = p.coeffs();
    let radius = (a[0].norm() / p.leading().norm())
        .powf(1.0 / d as f64)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            Complex64::from_polar(
                radius,
                2.0 * std::f64::consts::PI * (k as f64 + 0.25) / d as f64,
            )
        })
        .collect();
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for k in 0..d {
            let (v, dv) = p.eval_with_derivative(z[k]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let sum: Complex64 = (0..d)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / z[k].norm().max(1.0));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    z
}

fn newton_polish(p: &ComplexPoly, z: Complex64) -> Complex64 {
    let (v, dv) = p.eval_with_derivative(z);
    if dv.norm() == 0.0 || v.norm() == 0.0 {
        return z;
    }
    let candidate = z - v / dv;
    if candidate.is_finite() && p.eval(candidate).norm() < v.norm() {
        candidate
    } else {
        z
    }
}

/// Single-linkage clustering with threshold `tol * max(1, |z|)`; each cluster
/// is represented by its centroid.
#[allow(clippy::needless_range_loop)]
fn cluster_points(points: &[Complex64], tol: f64) -> Vec<Root> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut k = i;
        while parent[k] != r {
            let next = parent[k];
            parent[k] = r;
            k = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = points[i].norm().max(points[j].norm()).max(1.0);
            if (points[i] - points[j]).norm() <= tol * scale {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj] = ri;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Complex64, usize)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => {
                g.1 += points[i];
                g.2 += 1;
            }
            None => groups.push((r, points[i], 1)),
        }
    }
    groups
        .into_iter()
        .map(|(_, sum, m)| Root::new(sum / m as f64, m))
        .collect()
}

/// `sum_i |a_i| * i!/(i-k)! * |z|^(i-k)`: the natural scale of `p^(k)(z)`.
fn derivative_scale(p: &ComplexPoly, k: usize, z: Complex64) -> f64 {
    let r = z.norm();
    p.coeffs()
        .iter()
        .enumerate()
        .skip(k)
        .map(|(i, c)| {
            let falling: f64 = ((i - k + 1)..=i).map(|x| x as f64).product();
            c.norm() * falling * r.powi((i - k) as i32)
        })
        .sum()
}

/// Sharpen the centroid of an m-fold cluster with Newton steps on
/// `p^(m-1)`, for which the multiple root is simple. Steps larger than
/// `radius` are rejected.
fn refine_multiple(p: &ComplexPoly, z: Complex64, m: usize, radius: f64) -> Complex64 {
    if m < 2 {
        return z;
    }
    let d = p.nth_derivative(m - 1);
    let mut c = z;
    for _ in 0..3 {
        let (v, dv) = d.eval_with_derivative(c);
        if dv.norm() == 0.0 || v.norm() == 0.0 {
            break;
        }
        let step = v / dv;
        if !step.is_finite() || (c - step - z).norm() > radius {
            break;
        }
        c -= step;
    }
    c
}

fn passes_multiplicity_test(p: &ComplexPoly, z: Complex64, m: usize) -> bool {
    let mut dp = p.clone();
    for k in 0..m {
        let scale = derivative_scale(p, k, z);
        if scale == 0.0 {
            return false;
        }
        if dp.eval(z).norm() > MULTIPLICITY_TEST_TOL * scale {
            return false;
        }
        dp = dp.derivative();
    }
    true
}

/// A multiple root of multiplicity m splits into m points at distance about
/// `eps^(1/m)`, which can exceed the clustering threshold for m >= 3. Merge
/// nearby clusters whose combined centroid behaves like a root of the
/// combined multiplicity.
fn merge_multiple_roots(p: &ComplexPoly, clusters: &mut Vec<Root>) {
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let dist = (clusters[i].z - clusters[j].z).norm();
                let scale = clusters[i].z.norm().max(clusters[j].z.norm()).max(1.0);
                if dist <= MULTIPLICITY_MERGE_RADIUS * scale && best.is_none_or(|b| dist < b.2) {
                    best = Some((i, j, dist));
                }
            }
        }
        let Some((i, j, _)) = best else { return };
        let (a, b) = (clusters[i], clusters[j]);
        let m = a.multiplicity + b.multiplicity;
        let centroid = merged_centroid(p, a, b);
        if passes_multiplicity_test(p, centroid, m) {
            clusters[i] = Root::new(centroid, m);
            clusters.remove(j);
        } else {
            // closest pair rejected; try the remaining candidate pairs
            if !merge_any_other(p, clusters, (i, j)) {
                return;
            }
        }
    }
}

fn merged_centroid(p: &ComplexPoly, a: Root, b: Root) -> Complex64 {
    let m = a.multiplicity + b.multiplicity;
    let centroid = (a.z * a.multiplicity as f64 + b.z * b.multiplicity as f64) / m as f64;
    let radius = (a.z - b.z)
        .norm()
        .max(f64::EPSILON * centroid.norm().max(1.0));
    refine_multiple(p, centroid, m, radius)
}

fn merge_any_other(p: &ComplexPoly, clusters: &mut Vec<Root>, skip: (usize, usize)) -> bool {
    for i in 0..clusters.len() {
        for j in i + 1..clusters.len() {
            if (i, j) == skip {
                continue;
            }
            let (a, b) = (clusters[i], clusters[j]);
            let scale = a.z.norm().max(b.z.norm()).max(1.0);
            if (a.z - b.z).norm() > MULTIPLICITY_MERGE_RADIUS * scale {
                continue;
            }
            let m = a.multiplicity + b.multiplicity;
            let centroid = merged_centroid(p, a, b);
            if passes_multiplicity_test(p, centroid, m) {
                clusters[i] = Root::new(centroid, m);
                clusters.remove(j);
                return true;
            }
        }
    }
    false
}

/// Residual bound from the root contract: `tol * max|c_k| * max(1,|z|)^deg`.
pub fn root_residual_bound(p: &ComplexPoly, z: Complex64, tol: f64) -> f64 {
    tol * p.max_coeff_modulus() * z.norm().max(1.0).powi(p.degree() as i32)
}

/// Approximate GCD via root clustering, with default clustering tolerances.
pub fn gcd_approx(ps: &[ComplexPoly], tau_root: f64) -> Result<ComplexPoly> {
    let tol = Tolerances {
        root: tau_root,
        ..Tolerances::default()
    };
    gcd_approx_with(ps, &tol)
}

/// Common root clusters of all nonzero inputs, matched within
/// `tol.root * max(1, |z|)`, with multiplicity equal to the minimum across
/// inputs. Returns the monic polynomial with those roots (1 if none).
pub fn gcd_approx_with(ps: &[ComplexPoly], tol: &Tolerances) -> Result<ComplexPoly> {
    Ok(ComplexPoly::from_roots(&common_roots(ps, tol)?))
}

/// The root clusters shared by every nonzero input (see [`gcd_approx_with`]).
pub fn common_roots(ps: &[ComplexPoly], tol: &Tolerances) -> Result<Vec<Root>> {
    let nonzero: Vec<&ComplexPoly> = ps.iter().filter(|p| !p.is_zero()).collect();
    if nonzero.is_empty() {
        return Err(Error::AllZero);
    }
    if nonzero.iter().any(|p| p.is_constant()) {
        return Ok(Vec::new());
    }
    // start from the lowest-degree input: fewest candidates
    let mut order: Vec<&ComplexPoly> = nonzero.clone();
    order.sort_by_key(|p| p.degree());
    let mut common: Vec<(Complex64, usize, usize)> = roots_with(order[0], tol)?
        .into_iter()
        .map(|r| (r.z, r.multiplicity, 1))
        .collect();
    for p in &order[1..] {
        let rs = roots_with(p, tol)?;
        let mut used = vec![false; rs.len()];
        let mut next = Vec::with_capacity(common.len());
        for &(z, m, count) in &common {
            let scale = z.norm().max(1.0);
            let best = rs
                .iter()
                .enumerate()
                .filter(|(k, r)| !used[*k] && (r.z - z).norm() <= tol.root * scale)
                .min_by(|a, b| {
                    (a.1.z - z)
                        .norm()
                        .partial_cmp(&(b.1.z - z).norm())
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
            if let Some((k, r)) = best {
                used[k] = true;
                // running mean of the matched locations
                let loc = (z * count as f64 + r.z) / (count + 1) as f64;
                next.push((loc, m.min(r.multiplicity), count + 1));
            }
        }
        common = next;
        if common.is_empty() {
            break;
        }
    }
    Ok(common
        .into_iter()
        .map(|(z, m, _)| Root::new(z, m))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn eval_examples() {
        let p = ComplexPoly::from_real(&[1.0, 2.0]);
        assert_eq!(p.eval(c(0.0, 1.0)), c(1.0, 2.0));
        assert_eq!(ComplexPoly::zero().eval(c(5.0, 0.0)), c(0.0, 0.0));
        assert_eq!(
            ComplexPoly::from_real(&[-1.0, 0.0, 1.0]).eval(c(1.0, 0.0)),
            c(0.0, 0.0)
        );
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(
            ComplexPoly::monomial(c(1.0, 0.0), 2).derivative(),
            ComplexPoly::from_real(&[0.0, 2.0])
        );
        assert!(ComplexPoly::from_real(&[7.0]).derivative().is_zero());
        assert!(ComplexPoly::zero().derivative().is_zero());
        assert_eq!(
            ComplexPoly::from_real(&[1.0, 1.0, 0.0, 1.0]).derivative(),
            ComplexPoly::from_real(&[1.0, 0.0, 3.0])
        );
    }

    #[test]
    fn wronskian_examples() {
        let one = ComplexPoly::one();
        let z = ComplexPoly::identity();
        let z2 = ComplexPoly::monomial(c(1.0, 0.0), 2);
        assert_eq!(wronskian(&one, &z2), ComplexPoly::from_real(&[0.0, 2.0]));
        assert_eq!(wronskian(&z, &z2), z2);
        let p = ComplexPoly::new(vec![c(0.3, -1.0), c(2.0, 0.5), c(-0.7, 0.1), c(1.1, 1.0)]);
        assert!(wronskian(&p, &p).is_zero());
    }

    #[test]
    fn trimming_and_zero_flag() {
        let p = ComplexPoly::new(vec![c(1.0, 0.0), c(1e-14, 0.0)]);
        assert_eq!(p.degree(), 0);
        assert!(ComplexPoly::new(vec![c(0.0, 0.0); 4]).is_zero());
        let a = ComplexPoly::from_real(&[1.0, 2.0, 3.0]);
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn product_degree_is_additive() {
        let a = ComplexPoly::from_real(&[1.0, 0.0, 1e-6]);
        let b = ComplexPoly::from_real(&[2.0, 1e-5]);
        assert_eq!((&a * &b).degree(), 3);
    }

    #[test]
    fn roots_simple() {
        let rs = ComplexPoly::from_real(&[-1.0, 0.0, 1.0]).roots().unwrap();
        assert_eq!(rs.len(), 2);
        assert!(close(rs[0].z, c(-1.0, 0.0), 1e-12) && rs[0].multiplicity == 1);
        assert!(close(rs[1].z, c(1.0, 0.0), 1e-12) && rs[1].multiplicity == 1);
    }

    #[test]
    fn roots_double() {
        let rs = ComplexPoly::from_real(&[4.0, -4.0, 1.0]).roots().unwrap();
        assert_eq!(rs.len(), 1);
        assert_eq!(rs[0].multiplicity, 2);
        assert!(close(rs[0].z, c(2.0, 0.0), 1e-7));
    }

    #[test]
    fn roots_of_cube_plus_one_match_closed_form() {
        // closed-form cube roots of -1: e^{i pi (2k+1)/3}
        let expected: Vec<Complex64> = (0..3)
            .map(|k| Complex64::from_polar(1.0, std::f64::consts::PI * (2 * k + 1) as f64 / 3.0))
            .collect();
        let rs = ComplexPoly::from_real(&[1.0, 0.0, 0.0, 1.0])
            .roots()
            .unwrap();
        assert_eq!(rs.len(), 3);
        for e in expected {
            let hit = rs
                .iter()
                .find(|r| close(r.z, e, 1e-12))
                .expect("missing cube root");
            assert_eq!(hit.multiplicity, 1);
        }
    }

    #[test]
    fn roots_triple_and_quadruple_clusters() {
        let a = c(0.4, -0.3);
        let p = ComplexPoly::from_roots(&[Root::new(a, 3), Root::new(c(-1.5, 0.2), 1)]);
        let rs = p.roots().unwrap();
        assert_eq!(rs.len(), 2, "{rs:?}");
        let triple = rs.iter().find(|r| r.multiplicity == 3).unwrap();
        assert!(close(triple.z, a, 1e-6));

        let q = ComplexPoly::from_roots(&[Root::new(c(1.2, 0.0), 4)]);
        let rs = q.roots().unwrap();
        assert_eq!(rs, vec![Root::new(rs[0].z, 4)]);
        assert!(close(rs[0].z, c(1.2, 0.0), 1e-6));
    }

    #[test]
    fn close_distinct_roots_stay_separate() {
        let p =
            ComplexPoly::from_roots(&[Root::new(c(0.5, 0.0), 1), Root::new(c(0.5 + 1e-3, 0.0), 1)]);
        assert_eq!(p.roots().unwrap().len(), 2);
    }

    #[test]
    fn roots_of_zero_polynomial_is_error() {
        assert_eq!(ComplexPoly::zero().roots(), Err(Error::ZeroPolynomial));
        assert!(ComplexPoly::one().roots().unwrap().is_empty());
    }

    #[test]
    fn root_residuals_within_bound() {
        let p = ComplexPoly::new(vec![
            c(0.3, 2.0),
            c(-1.0, 0.5),
            c(4.0, 0.0),
            c(0.0, -2.0),
            c(1.0, 1.0),
            c(0.5, 0.0),
        ]);
        let rs = p.roots().unwrap();
        assert_eq!(rs.iter().map(|r| r.multiplicity).sum::<usize>(), 5);
        for r in rs {
            assert!(p.eval(r.z).norm() <= root_residual_bound(&p, r.z, 1e-8));
        }
    }

    #[test]
    fn gcd_examples() {
        let z2 = ComplexPoly::monomial(c(1.0, 0.0), 2);
        let z3 = ComplexPoly::monomial(c(1.0, 0.0), 3);
        assert_eq!(gcd_approx(&[z2.clone(), z3], 1e-6).unwrap(), z2);

        let g = gcd_approx(
            &[
                ComplexPoly::from_real(&[-1.0, 0.0, 1.0]),
                ComplexPoly::from_real(&[-1.0, 1.0]),
            ],
            1e-6,
        )
        .unwrap();
        assert_eq!(g.degree(), 1);
        assert!(close(g.coeffs()[0], c(-1.0, 0.0), 1e-10));

        let g = gcd_approx(
            &[
                ComplexPoly::from_real(&[1.0, 1.0]),
                ComplexPoly::from_real(&[2.0]),
            ],
            1e-6,
        )
        .unwrap();
        assert_eq!(g, ComplexPoly::one());
    }

    #[test]
    fn gcd_ignores_zero_inputs_and_rejects_all_zero() {
        let p = ComplexPoly::from_real(&[-2.0, 1.0]);
        let g = gcd_approx(&[ComplexPoly::zero(), p.clone()], 1e-6).unwrap();
        assert_eq!(g, p);
        assert_eq!(
            gcd_approx(&[ComplexPoly::zero(), ComplexPoly::zero()], 1e-6),
            Err(Error::AllZero)
        );
    }

    #[test]
    fn deflation_removes_roots_both_directions() {
        let small = c(0.3, 0.1);
        let big = c(-3.0, 2.0);
        let rest = ComplexPoly::from_real(&[1.0, -0.5, 2.0]);
        let p = &(&rest * &ComplexPoly::from_roots(&[Root::new(small, 1)]))
            * &ComplexPoly::from_roots(&[Root::new(big, 2)]);
        let q = p.deflate(&[Root::new(small, 1), Root::new(big, 2)]);
        assert_eq!(q.degree(), 2);
        for (a, b) in q.coeffs().iter().zip(rest.coeffs()) {
            assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn compose_affine_matches_pointwise() {
        let p = ComplexPoly::new(vec![c(1.0, -1.0), c(0.0, 2.0), c(3.0, 0.0), c(-0.5, 0.5)]);
        let (center, scale) = (c(0.2, -0.7), c(0.1, 0.3));
        let g = p.compose_affine(center, scale);
        for zeta in [c(0.0, 0.0), c(1.0, 1.0), c(-2.0, 0.5)] {
            assert!(close(g.eval(zeta), p.eval(center + scale * zeta), 1e-12));
        }
    }

    #[test]
    fn json_is_array_of_pairs() {
        let p = ComplexPoly::new(vec![c(1.0, 0.0), c(0.0, -2.0)]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[1.0,0.0],[0.0,-2.0]]");
        let back: ComplexPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
