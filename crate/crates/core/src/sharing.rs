//! Preimages of hyperplanes, hyperplane sharing, and checks of the
//! normality-criterion hypotheses on a family of curves with per-member
//! ("wandering") moving hyperplanes.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::derived::derived_map_with;
use crate::error::{Error, Result};
use crate::normality::{marty_sup, MartyConfig, MartyStats, MartyVerdict};
use crate::polynomial::{roots_with, Root};
use crate::position::{uniform_delta_checked, DeltaVerdict, Region};
use crate::projective::{fs_distance_raw, pair, sup_norm, MovingHyperplane, ProjCurve};
use crate::tolerance::Tolerances;

/// One curve of the family with its `2n+1` assigned moving hyperplanes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub label: String,
    pub curve: ProjCurve,
    pub hyperplanes: Vec<MovingHyperplane>,
}

impl FamilyMember {
    pub fn new(
        label: impl Into<String>,
        curve: ProjCurve,
        hyperplanes: Vec<MovingHyperplane>,
    ) -> Result<Self> {
        let n = curve.n();
        if hyperplanes.len() != 2 * n + 1 {
            return Err(Error::WrongCount {
                expected: format!("2n+1 = {}", 2 * n + 1),
                found: hyperplanes.len(),
            });
        }
        if let Some(h) = hyperplanes.iter().find(|h| h.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: h.n(),
            });
        }
        Ok(FamilyMember {
            label: label.into(),
            curve,
            hyperplanes,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub region: Region,
    /// Zero-set matching tolerance; `None` means `1e-6 * diameter(region)`.
    pub tau_match: Option<f64>,
    pub tol: Tolerances,
    pub marty: MartyConfig,
}

impl CheckConfig {
    pub fn new(epsilon: f64, delta: f64, region: Region) -> Result<Self> {
        let cfg = CheckConfig {
            epsilon,
            delta,
            region,
            tau_match: None,
            tol: Tolerances::default(),
            marty: MartyConfig::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.delta.is_nan() || self.delta <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if let Some(t) = self.tau_match {
            if t.is_nan() || t <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "tau_match must be positive, got {t}"
                )));
            }
        }
        Ok(())
    }

    pub fn tau_match(&self) -> f64 {
        self.tau_match.unwrap_or(1e-6 * self.region.diameter())
    }
}

/// Roots of `<f, H>` inside the region, boundary-inclusive within `tau_match`.
pub fn preimage_zeros(
    f: &ProjCurve,
    h: &MovingHyperplane,
    region: &Region,
    tau_match: f64,
) -> Result<Vec<Root>> {
    preimage_zeros_with(f, h, region, tau_match, &Tolerances::default())
}

pub fn preimage_zeros_with(
    f: &ProjCurve,
    h: &MovingHyperplane,
    region: &Region,
    tau_match: f64,
    tol: &Tolerances,
) -> Result<Vec<Root>> {
    let p = pair(f, h)?;
    if p.is_zero() {
        return Err(Error::IdenticallyZero { hyperplane: None });
    }
    Ok(roots_with(&p, tol)?
        .into_iter()
        .filter(|r| region.contains(r.z, tau_match))
        .collect())
}

/// Outcome of matching two finite point sets.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SetMatching {
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_left: Vec<usize>,
    pub unmatched_right: Vec<usize>,
}

impl SetMatching {
    pub fn is_perfect(&self) -> bool {
        self.unmatched_left.is_empty() && self.unmatched_right.is_empty()
    }
}

/// Mutual-nearest-neighbour matching within `tau`, repeated on the
/// remaining points until no new pair appears.
pub fn match_sets(left: &[Complex64], right: &[Complex64], tau: f64) -> SetMatching {
    let mut free_l: Vec<usize> = (0..left.len()).collect();
    let mut free_r: Vec<usize> = (0..right.len()).collect();
    let mut pairs = Vec::new();
    loop {
        let nearest = |from: Complex64, pool: &[usize], pts: &[Complex64]| -> Option<usize> {
            pool.iter().copied().min_by(|&a, &b| {
                (pts[a] - from)
                    .norm()
                    .partial_cmp(&(pts[b] - from).norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        };
        let mut found = Vec::new();
        for &i in &free_l {
            let Some(j) = nearest(left[i], &free_r, right) else {
                break;
            };
            if (left[i] - right[j]).norm() > tau {
                continue;
            }
            if nearest(right[j], &free_l, left) == Some(i) {
                found.push((i, j));
            }
        }
        if found.is_empty() {
            break;
        }
        for &(i, j) in &found {
            free_l.retain(|&x| x != i);
            free_r.retain(|&x| x != j);
        }
        pairs.extend(found);
    }
    pairs.sort_unstable();
    SetMatching {
        pairs,
        unmatched_left: free_l,
        unmatched_right: free_r,
    }
}

/// How preimage multiplicities enter the sharing comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SharingMode {
    /// Compare zero sets only.
    #[default]
    IgnoreMultiplicities,
    /// Matched zeros must also have equal multiplicities.
    CountMultiplicities,
}

/// `f` and `g` share `H` on the region: equal preimage sets and `f = g`
/// (projectively, within `tol.proj`) at every shared zero.
pub fn shares(
    f: &ProjCurve,
    g: &ProjCurve,
    h: &MovingHyperplane,
    region: &Region,
    tau_match: f64,
) -> Result<bool> {
    shares_with(
        f,
        g,
        h,
        region,
        tau_match,
        SharingMode::IgnoreMultiplicities,
        &Tolerances::default(),
    )
}

pub fn shares_with(
    f: &ProjCurve,
    g: &ProjCurve,
    h: &MovingHyperplane,
    region: &Region,
    tau_match: f64,
    mode: SharingMode,
    tol: &Tolerances,
) -> Result<bool> {
    let zf = preimage_zeros_with(f, h, region, tau_match, tol)?;
    let zg = preimage_zeros_with(g, h, region, tau_match, tol)?;
    let locs = |rs: &[Root]| rs.iter().map(|r| r.z).collect::<Vec<_>>();
    let m = match_sets(&locs(&zf), &locs(&zg), tau_match);
    if !m.is_perfect() {
        return Ok(false);
    }
    for &(i, j) in &m.pairs {
        if mode == SharingMode::CountMultiplicities && zf[i].multiplicity != zg[j].multiplicity {
            return Ok(false);
        }
        let z = (zf[i].z + zg[j].z) * 0.5;
        if fs_distance_raw(&f.eval(z), &g.eval(z)) > tol.proj {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Condition (1) verdict for one hyperplane: `f(z) in H` iff `grad f(z) in H`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition1Verdict {
    pub hyperplane: usize,
    pub pass: bool,
    pub curve_zeros: Vec<[f64; 2]>,
    pub derived_zeros: Vec<[f64; 2]>,
    /// Zeros present in exactly one of the two sets.
    pub witnesses: Vec<[f64; 2]>,
}

fn pt(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn label_hyperplane(e: Error, j: usize) -> Error {
    match e {
        Error::IdenticallyZero { .. } => Error::IdenticallyZero {
            hyperplane: Some(j),
        },
        other => other,
    }
}

/// Compare the preimage sets of each `H_j` under `f` and its derived map.
pub fn condition1_check(m: &FamilyMember, cfg: &CheckConfig) -> Result<Vec<Condition1Verdict>> {
    let derived = derived_map_with(&m.curve, &cfg.tol)?;
    let tau = cfg.tau_match();
    m.hyperplanes
        .iter()
        .enumerate()
        .map(|(j, h)| {
            let zf = preimage_zeros_with(&m.curve, h, &cfg.region, tau, &cfg.tol)
                .map_err(|e| label_hyperplane(e, j))?;
            let zd = preimage_zeros_with(&derived, h, &cfg.region, tau, &cfg.tol)
                .map_err(|e| label_hyperplane(e, j))?;
            let lf: Vec<Complex64> = zf.iter().map(|r| r.z).collect();
            let ld: Vec<Complex64> = zd.iter().map(|r| r.z).collect();
            let matching = match_sets(&lf, &ld, tau);
            let witnesses: Vec<[f64; 2]> = matching
                .unmatched_left
                .iter()
                .map(|&i| pt(lf[i]))
                .chain(matching.unmatched_right.iter().map(|&i| pt(ld[i])))
                .collect();
            Ok(Condition1Verdict {
                hyperplane: j,
                pass: witnesses.is_empty(),
                curve_zeros: lf.into_iter().map(pt).collect(),
                derived_zeros: ld.into_iter().map(pt).collect(),
                witnesses,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition2Witness {
    pub z: [f64; 2],
    pub hyperplane: usize,
    /// `|f_0(z)|`
    pub f0_abs: f64,
    /// `epsilon * ||f(z)||`
    pub epsilon_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition2Verdict {
    pub pass: bool,
    pub points_checked: usize,
    pub witnesses: Vec<Condition2Witness>,
}

/// At every preimage zero of every `H_j`: `|f_0(z)| >= epsilon * ||f(z)||`.
pub fn condition2_check(m: &FamilyMember, cfg: &CheckConfig) -> Result<Condition2Verdict> {
    let tau = cfg.tau_match();
    let f0 = &m.curve.components()[0];
    let mut witnesses = Vec::new();
    let mut points_checked = 0;
    for (j, h) in m.hyperplanes.iter().enumerate() {
        let zeros = preimage_zeros_with(&m.curve, h, &cfg.region, tau, &cfg.tol)
            .map_err(|e| label_hyperplane(e, j))?;
        for r in zeros {
            points_checked += 1;
            let f0_abs = f0.eval(r.z).norm();
            let epsilon_norm = cfg.epsilon * sup_norm(&m.curve, r.z);
            if f0_abs < epsilon_norm {
                witnesses.push(Condition2Witness {
                    z: pt(r.z),
                    hyperplane: j,
                    f0_abs,
                    epsilon_norm,
                });
            }
        }
    }
    Ok(Condition2Verdict {
        pass: witnesses.is_empty(),
        points_checked,
        witnesses,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Overall {
    Pass,
    Fail,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberReport {
    pub label: String,
    pub delta: Option<DeltaVerdict>,
    pub delta_pass: bool,
    pub condition1: Option<Vec<Condition1Verdict>>,
    pub condition1_pass: bool,
    pub condition2: Option<Condition2Verdict>,
    pub condition2_pass: bool,
    pub errors: Vec<String>,
    pub degenerate: bool,
}

impl MemberReport {
    pub fn pass(&self) -> bool {
        self.delta_pass && self.condition1_pass && self.condition2_pass && self.errors.is_empty()
    }
}

/// Marty statistics of `{induced_curve(H_{j,f}) : f}` for one index `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InducedFamilyReport {
    pub hyperplane: usize,
    pub stats: MartyStats,
    /// Fails only on an empirical blow-up verdict.
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub members: Vec<MemberReport>,
    pub induced_families: Vec<InducedFamilyReport>,
    /// Smallest coarse-grid determinant-product minimum over all members.
    pub delta_estimate: Option<f64>,
    pub overall: Overall,
    pub warnings: Vec<String>,
}

fn check_member(m: &FamilyMember, cfg: &CheckConfig) -> MemberReport {
    let mut errors = Vec::new();
    let mut degenerate = false;
    let mut record = |e: Error, errors: &mut Vec<String>| {
        degenerate |= e.is_degenerate();
        errors.push(e.to_string());
    };

    let delta = match uniform_delta_checked(&m.hyperplanes, &cfg.region, cfg.delta) {
        Ok(v) => Some(v),
        Err(e) => {
            record(e, &mut errors);
            None
        }
    };
    let condition1 = match condition1_check(m, cfg) {
        Ok(v) => Some(v),
        Err(e) => {
            record(e, &mut errors);
            None
        }
    };
    let condition2 = match condition2_check(m, cfg) {
        Ok(v) => Some(v),
        Err(e) => {
            record(e, &mut errors);
            None
        }
    };
    MemberReport {
        label: m.label.clone(),
        delta_pass: delta.as_ref().is_some_and(|d| d.passes),
        delta,
        condition1_pass: condition1
            .as_ref()
            .is_some_and(|v| v.iter().all(|c| c.pass)),
        condition1,
        condition2_pass: condition2.as_ref().is_some_and(|v| v.pass),
        condition2,
        errors,
        degenerate,
    }
}

/// Run every hypothesis check over the family. Members are checked in
/// parallel; the report lists them in label order.
pub fn hypotheses_check(members: &[FamilyMember], cfg: &CheckConfig) -> Result<ConditionReport> {
    cfg.validate()?;
    let mut warnings = Vec::new();
    if members.is_empty() {
        warnings.push("empty family: hypotheses hold vacuously".to_string());
        return Ok(ConditionReport {
            members: Vec::new(),
            induced_families: Vec::new(),
            delta_estimate: None,
            overall: Overall::Pass,
            warnings,
        });
    }
    let n = members[0].curve.n();
    if let Some(m) = members.iter().find(|m| m.curve.n() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.curve.n(),
        });
    }

    let mut reports: Vec<MemberReport> = members.par_iter().map(|m| check_member(m, cfg)).collect();
    reports.sort_by(|a, b| a.label.cmp(&b.label));

    let induced_families: Vec<InducedFamilyReport> = (0..2 * n + 1)
        .map(|j| {
            let fam: Vec<ProjCurve> = members
                .iter()
                .map(|m| m.hyperplanes[j].induced_curve())
                .collect();
            let stats = marty_sup(&fam, &cfg.region, &cfg.marty);
            InducedFamilyReport {
                hyperplane: j,
                pass: stats.verdict != MartyVerdict::BlowUp,
                stats,
            }
        })
        .collect();
    for f in &induced_families {
        if f.stats.verdict == MartyVerdict::Inconclusive {
            warnings.push(format!(
                "induced family {} : normality inconclusive",
                f.hyperplane
            ));
        }
    }

    let delta_estimate = reports
        .iter()
        .filter_map(|r| r.delta.map(|d| d.coarse.min))
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.min(v)))
        });
    let overall = if reports.iter().any(|r| r.degenerate) {
        Overall::Degenerate
    } else if reports.iter().all(|r| r.pass()) && induced_families.iter().all(|f| f.pass) {
        Overall::Pass
    } else {
        Overall::Fail
    };
    Ok(ConditionReport {
        members: reports,
        induced_families,
        delta_estimate,
        overall,
        warnings,
    })
}
