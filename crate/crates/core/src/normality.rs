//! Empirical normality detection.
//!
//! Normality of a family is a limit property; everything here is a finite
//! surrogate. [`marty_sup`] tracks the grid supremum of the Fubini-Study
//! derivative across the family (a Marty-type test), [`zalcman_search`]
//! rescales a blowing-up family around its derivative peaks, and
//! [`green_omission_check`] counts omitted fixed hyperplanes.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::Root;
use crate::position::{is_general_position, Region};
use crate::projective::{fs_distance_raw, pair, MovingHyperplane, ProjCurve};

/// Thresholds for the Marty verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MartyConfig {
    /// Minimum growth factor across the trailing increasing run.
    pub gamma: f64,
    /// Minimum length of that run.
    pub k: usize,
    /// Family sup at or below this is "bounded".
    pub cap: f64,
}

impl Default for MartyConfig {
    fn default() -> Self {
        MartyConfig {
            gamma: 2.0,
            k: 3,
            cap: 1e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MartyVerdict {
    Bounded,
    BlowUp,
    Inconclusive,
}

impl std::fmt::Display for MartyVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MartyVerdict::Bounded => "bounded",
            MartyVerdict::BlowUp => "blow-up",
            MartyVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemberSup {
    pub index: usize,
    pub sup: f64,
    pub argmax: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartyStats {
    pub members: Vec<MemberSup>,
    pub family_sup: f64,
    pub verdict: MartyVerdict,
    /// Always true: the verdict is a finite-grid surrogate.
    pub empirical: bool,
}

/// Fubini-Study derivative `|f ^ f'| / |f|^2` with Euclidean norms, computed
/// through the Lagrange identity so no cancellation occurs.
pub fn fs_derivative(f: &ProjCurve, z: Complex64) -> f64 {
    let mut v = Vec::with_capacity(f.n() + 1);
    let mut dv = Vec::with_capacity(f.n() + 1);
    for p in f.components() {
        let (a, b) = p.eval_with_derivative(z);
        v.push(a);
        dv.push(b);
    }
    let scale = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return f64::INFINITY;
    }
    let v: Vec<Complex64> = v.iter().map(|c| c / scale).collect();
    let dv: Vec<Complex64> = dv.iter().map(|c| c / scale).collect();
    let norm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    let mut wedge = 0.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            wedge += (v[i] * dv[j] - v[j] * dv[i]).norm_sqr();
        }
    }
    wedge.sqrt() / norm2
}

/// Grid supremum of [`fs_derivative`] for one curve. Ties go to the first
/// grid point.
pub fn member_sup(f: &ProjCurve, region: &Region) -> (f64, Complex64) {
    region
        .grid_points()
        .into_iter()
        .map(|z| (fs_derivative(f, z), z))
        .fold(
            (f64::NEG_INFINITY, Complex64::new(f64::NAN, f64::NAN)),
            |best, cur| {
                if cur.0 > best.0 {
                    cur
                } else {
                    best
                }
            },
        )
}

pub fn marty_sup(members: &[ProjCurve], region: &Region, cfg: &MartyConfig) -> MartyStats {
    let members: Vec<MemberSup> = members
        .par_iter()
        .enumerate()
        .map(|(index, f)| {
            let (sup, z) = member_sup(f, region);
            MemberSup {
                index,
                sup,
                argmax: [z.re, z.im],
            }
        })
        .collect();
    let sups: Vec<f64> = members.iter().map(|m| m.sup).collect();
    MartyStats {
        family_sup: sups.iter().copied().fold(0.0, f64::max),
        verdict: classify(&sups, cfg),
        members,
        empirical: true,
    }
}

/// Verdict from the sequence of member sups.
///
/// Blow-up: the trailing strictly increasing run has at least `k` members
/// and grows by a factor of at least `gamma` from its first to its last
/// member. Otherwise bounded if every sup is at most `cap`. Fewer than `k`
/// members carry no trend and are inconclusive.
pub fn classify(sups: &[f64], cfg: &MartyConfig) -> MartyVerdict {
    if sups.len() < cfg.k.max(2) {
        return MartyVerdict::Inconclusive;
    }
    let mut start = sups.len() - 1;
    while start > 0 && sups[start - 1] < sups[start] {
        start -= 1;
    }
    let run = sups.len() - start;
    let last = sups[sups.len() - 1];
    if run >= cfg.k && last >= cfg.gamma * sups[start] && last > 0.0 {
        return MartyVerdict::BlowUp;
    }
    if sups.iter().all(|&s| s <= cfg.cap) {
        MartyVerdict::Bounded
    } else {
        MartyVerdict::Inconclusive
    }
}

/// Result of rescaling a blowing-up family around its derivative peaks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZalcmanTrace {
    /// Rescaling centers `z_nu` (grid argmax of the FS derivative).
    pub centers: Vec<[f64; 2]>,
    /// Scales `rho_nu = 1 / f_nu^#(z_nu)`.
    pub scales: Vec<f64>,
    /// `g_nu(zeta) = f_nu(z_nu + rho_nu zeta)`.
    pub rescaled: Vec<ProjCurve>,
    /// FS derivative of each `g_nu` at `zeta = 0`.
    pub unit_derivative: Vec<f64>,
    /// Sample points `zeta` with `|zeta| <= zeta_radius`.
    pub zeta_grid: Vec<[f64; 2]>,
    /// Last rescaled curve sampled on the zeta grid, unit max-modulus
    /// coordinates as `[re, im]` pairs.
    pub limit_candidate: Vec<Vec<[f64; 2]>>,
    /// `max_zeta d_FS(g_nu, g_{nu+1})` for consecutive members.
    pub step_residuals: Vec<f64>,
    /// Final entry of `step_residuals` (0 for a single member).
    pub convergence_residual: f64,
    /// `d_FS(g_{N-1}(zeta), limit(zeta))` per zeta-grid point.
    pub distance_to_limit: Vec<f64>,
}

/// Square `n x n` sampling of `[-r, r]^2` restricted to the closed disc.
pub fn zeta_disc(radius: f64, n: usize) -> Vec<Complex64> {
    let n = n.max(2);
    let step = 2.0 * radius / (n - 1) as f64;
    (0..n)
        .flat_map(|j| {
            (0..n)
                .map(move |i| Complex64::new(-radius + step * i as f64, -radius + step * j as f64))
        })
        .filter(|z| z.norm() <= radius * (1.0 + 1e-12))
        .collect()
}

pub fn zalcman_search(
    members: &[ProjCurve],
    region: &Region,
    zeta_radius: f64,
    cfg: &MartyConfig,
) -> Result<ZalcmanTrace> {
    let stats = marty_sup(members, region, cfg);
    if stats.verdict != MartyVerdict::BlowUp {
        return Err(Error::NotBlowingUp {
            verdict: stats.verdict.to_string(),
        });
    }
    Ok(rescale_family(members, &stats, zeta_radius, 21))
}

/// Rescale each member around its recorded argmax; `grid_n` controls the
/// zeta sampling density.
pub fn rescale_family(
    members: &[ProjCurve],
    stats: &MartyStats,
    zeta_radius: f64,
    grid_n: usize,
) -> ZalcmanTrace {
    let zetas = zeta_disc(zeta_radius, grid_n);
    let mut centers = Vec::new();
    let mut scales = Vec::new();
    let mut rescaled = Vec::new();
    let mut unit_derivative = Vec::new();
    for (f, s) in members.iter().zip(&stats.members) {
        let center = Complex64::new(s.argmax[0], s.argmax[1]);
        let rho = 1.0 / fs_derivative(f, center);
        let g = f.compose_affine(center, Complex64::new(rho, 0.0));
        unit_derivative.push(fs_derivative(&g, Complex64::new(0.0, 0.0)));
        centers.push(s.argmax);
        scales.push(rho);
        rescaled.push(g);
    }
    let samples: Vec<Vec<Vec<Complex64>>> = rescaled
        .par_iter()
        .map(|g| zetas.iter().map(|&z| g.eval(z)).collect())
        .collect();
    let step_residuals: Vec<f64> = samples
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| fs_distance_raw(a, b))
                .fold(0.0, f64::max)
        })
        .collect();
    let last = samples.last().cloned().unwrap_or_default();
    let previous = if samples.len() >= 2 {
        &samples[samples.len() - 2]
    } else {
        &last
    };
    let distance_to_limit = previous
        .iter()
        .zip(&last)
        .map(|(a, b)| fs_distance_raw(a, b))
        .collect();
    let limit_candidate = last
        .iter()
        .map(|v| {
            let m = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
            v.iter().map(|c| [c.re / m, c.im / m]).collect()
        })
        .collect();
    ZalcmanTrace {
        centers,
        scales,
        rescaled,
        unit_derivative,
        zeta_grid: zetas.iter().map(|z| [z.re, z.im]).collect(),
        limit_candidate,
        convergence_residual: step_residuals.last().copied().unwrap_or(0.0),
        step_residuals,
        distance_to_limit,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreenCheck {
    pub omitted_count: usize,
    /// Indices of omitted hyperplanes.
    pub omitted: Vec<usize>,
    /// Roots of each pairing (empty for omitted hyperplanes or a curve
    /// lying inside the hyperplane).
    pub witness_roots: Vec<Vec<Root>>,
    /// False only if a nonconstant curve omits all `2n+1` hyperplanes.
    pub consistent: bool,
}

/// Count the fixed hyperplanes a polynomial curve omits. A hyperplane is
/// omitted iff the pairing is a nonzero constant; a nonconstant polynomial
/// always has a root in the plane.
pub fn green_omission_check(f: &ProjCurve, hs: &[MovingHyperplane]) -> Result<GreenCheck> {
    if hs.len() != 2 * f.n() + 1 {
        return Err(Error::WrongCount {
            expected: format!("{}", 2 * f.n() + 1),
            found: hs.len(),
        });
    }
    if !is_general_position(hs)? {
        return Err(Error::NotGeneralPosition);
    }
    let mut omitted = Vec::new();
    let mut witness_roots = Vec::with_capacity(hs.len());
    for (j, h) in hs.iter().enumerate() {
        let p = pair(f, h)?;
        if p.is_constant() {
            omitted.push(j);
            witness_roots.push(Vec::new());
        } else if p.is_zero() {
            witness_roots.push(Vec::new());
        } else {
            witness_roots.push(p.roots()?);
        }
    }
    let omitted_count = omitted.len();
    Ok(GreenCheck {
        consistent: !(omitted_count == hs.len() && !f.is_constant_map()),
        omitted_count,
        omitted,
        witness_roots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::polynomial::ComplexPoly;

    fn linear(nu: f64) -> ProjCurve {
        ProjCurve::from_real(&[&[1.0], &[0.0, nu]]).unwrap()
    }

    #[test]
    fn fs_derivative_examples() {
        assert!((fs_derivative(&linear(1.0), c64(0.0, 0.0)) - 1.0).abs() < 1e-15);
        let constant = ProjCurve::from_real(&[&[2.0], &[-1.0]]).unwrap();
        assert_eq!(fs_derivative(&constant, c64(0.3, 0.2)), 0.0);
        for nu in [1.0, 3.0, 17.0] {
            // closed form nu / (1 + nu^2 |z|^2) at z = 0
            assert!((fs_derivative(&linear(nu), c64(0.0, 0.0)) - nu).abs() < 1e-12);
            let z = c64(0.2, -0.1);
            let expected = nu / (1.0 + nu * nu * z.norm_sqr());
            assert!((fs_derivative(&linear(nu), z) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn classify_rules() {
        let cfg = MartyConfig::default();
        assert_eq!(classify(&[1.0], &cfg), MartyVerdict::Inconclusive);
        assert_eq!(classify(&[1.0, 2.0, 3.0, 4.0], &cfg), MartyVerdict::BlowUp);
        assert_eq!(classify(&[1.0, 1.0, 1.0], &cfg), MartyVerdict::Bounded);
        assert_eq!(classify(&[0.0, 0.0, 0.0], &cfg), MartyVerdict::Bounded);
        // increasing but slowly
        assert_eq!(classify(&[1.0, 1.1, 1.2, 1.3], &cfg), MartyVerdict::Bounded);
        assert_eq!(classify(&[5e3, 4e3, 6e3], &cfg), MartyVerdict::Inconclusive);
    }

    #[test]
    fn marty_translation_family_is_bounded() {
        let region = Region::square(1.0, 11).unwrap();
        let fam: Vec<ProjCurve> = [0.0, 0.2, -0.4]
            .iter()
            .map(|&c| {
                ProjCurve::new(vec![ComplexPoly::one(), ComplexPoly::from_real(&[c, 1.0])]).unwrap()
            })
            .collect();
        let stats = marty_sup(&fam, &region, &MartyConfig::default());
        assert_eq!(stats.verdict, MartyVerdict::Bounded);
        for m in &stats.members {
            // spherical derivative of z + c peaks at z = -c, value 1
            assert!((m.sup - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn marty_linear_blowup() {
        let region = Region::square(1.0, 11).unwrap();
        let fam: Vec<ProjCurve> = (1..=5).map(|nu| linear(nu as f64)).collect();
        let stats = marty_sup(&fam, &region, &MartyConfig::default());
        assert_eq!(stats.verdict, MartyVerdict::BlowUp);
        for (nu, m) in (1..=5).zip(&stats.members) {
            assert!((m.sup - nu as f64).abs() < 1e-12);
            assert_eq!(m.argmax, [0.0, 0.0]);
        }
        let single = marty_sup(&fam[..1], &region, &MartyConfig::default());
        assert_eq!(single.verdict, MartyVerdict::Inconclusive);
    }

    #[test]
    fn zalcman_linear_family_is_exact() {
        let region = Region::square(1.0, 11).unwrap();
        let fam: Vec<ProjCurve> = (1..=6).map(|nu| linear(nu as f64)).collect();
        let trace = zalcman_search(&fam, &region, 2.0, &MartyConfig::default()).unwrap();
        for (nu, rho) in (1..=6).zip(&trace.scales) {
            assert!((rho - 1.0 / nu as f64).abs() < 1e-14);
        }
        for g in &trace.rescaled {
            assert!((g.components()[1].coeffs()[1] - c64(1.0, 0.0)).norm() < 1e-14);
        }
        assert!(trace.convergence_residual <= 1e-14);
        assert!(trace
            .unit_derivative
            .iter()
            .all(|d| (d - 1.0).abs() < 1e-12));
    }

    #[test]
    fn zalcman_quadratic_family() {
        // f_nu = (1, (nu z)^2): f# = 2 nu^2 r / (1 + nu^4 r^4), peak at r = 3^(-1/4)/nu
        let region = Region::square(1.0, 201).unwrap();
        let fam: Vec<ProjCurve> = (1..=5)
            .map(|nu| {
                let nu = nu as f64;
                ProjCurve::from_real(&[&[1.0], &[0.0, 0.0, nu * nu]]).unwrap()
            })
            .collect();
        let trace = zalcman_search(&fam, &region, 1.0, &MartyConfig::default()).unwrap();
        for (nu, c) in (1..=5).zip(&trace.centers) {
            let r = c64(c[0], c[1]).norm();
            let peak_r = 3f64.powf(-0.25) / nu as f64;
            assert!((r - peak_r).abs() < 0.02, "nu={nu} r={r} expected {peak_r}");
        }
        for (g, d) in trace.rescaled.iter().zip(&trace.unit_derivative) {
            assert!((d - 1.0).abs() < 1e-8);
            assert!(!g.is_constant_map());
        }
    }

    #[test]
    fn zalcman_rejects_bounded_family() {
        let region = Region::square(1.0, 5).unwrap();
        let fam = vec![linear(1.0), linear(1.0), linear(1.0)];
        assert!(matches!(
            zalcman_search(&fam, &region, 1.0, &MartyConfig::default()),
            Err(Error::NotBlowingUp { .. })
        ));
    }

    #[test]
    fn green_examples() {
        let hs: Vec<MovingHyperplane> = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
            .iter()
            .map(|v| MovingHyperplane::fixed_real(v).unwrap())
            .collect();
        let constant = ProjCurve::from_real(&[&[1.0], &[1.0]]).unwrap();
        let g = green_omission_check(&constant, &hs).unwrap();
        assert_eq!(g.omitted_count, 3);
        assert!(g.consistent);

        let g = green_omission_check(&linear(1.0), &hs).unwrap();
        assert_eq!(g.omitted_count, 1);
        assert_eq!(g.omitted, vec![0]);
        assert!(g.consistent);
        assert_eq!(g.witness_roots[1].len(), 1);

        let bad: Vec<MovingHyperplane> = [[1.0, 0.0], [0.0, 1.0], [0.0, 2.0]]
            .iter()
            .map(|v| MovingHyperplane::fixed_real(v).unwrap())
            .collect();
        assert_eq!(
            green_omission_check(&linear(1.0), &bad),
            Err(Error::NotGeneralPosition)
        );
    }
}
