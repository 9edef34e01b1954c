//! Deterministic scene templates and targeted scene mutations.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scene::{Scene, ZalcmanConfig};
use crate::error::{Error, Result};
use crate::polynomial::{ComplexPoly, Root};
use crate::position::{gen_pos_product, Region};
use crate::projective::{pair, MovingHyperplane, ProjCurve};
use crate::sharing::{CheckConfig, FamilyMember};

pub const TEMPLATES: [&str; 4] = [
    "montel_omitting",
    "blowup_linear",
    "wandering_shared",
    "degenerate_position",
];

/// `key=value` template parameters.
#[derive(Debug, Clone, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    /// Parse `k=v,k=v` (empty string gives no parameters).
    pub fn parse(spec: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::BadParams(format!("expected key=value, got {item:?}")))?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Params { values })
    }

    pub fn set(mut self, key: &str, value: impl ToString) -> Self {
        self.values.insert(key.to_string(), value.to_string());
        self
    }

    fn check_known(&self, known: &[&str]) -> Result<()> {
        match self.values.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(Error::BadParams(format!(
                "unknown parameter {k:?}; accepted: {}",
                known.join(", ")
            ))),
            None => Ok(()),
        }
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::BadParams(format!("cannot parse {key}={v:?}"))),
        }
    }

    fn to_metadata(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.values
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                .collect(),
        )
    }
}

pub fn generate_scene(template: &str, params: &Params) -> Result<Scene> {
    let mut scene = match template {
        "montel_omitting" => montel_omitting(params),
        "blowup_linear" => blowup_linear(params),
        "wandering_shared" => wandering_shared(params),
        "degenerate_position" => degenerate_position(params),
        other => Err(Error::UnknownTemplate(other.to_string())),
    }?;
    scene.metadata.insert(
        "template".into(),
        serde_json::Value::String(template.into()),
    );
    scene.metadata.insert("params".into(), params.to_metadata());
    Ok(scene)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn label(i: usize) -> String {
    format!("f{i:03}")
}

fn positive<T: PartialOrd + Default + std::fmt::Display>(name: &str, v: T) -> Result<T> {
    if v > T::default() {
        Ok(v)
    } else {
        Err(Error::BadParams(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn grid_region(params: &Params) -> Result<Region> {
    let radius = positive("radius", params.get("radius", 1.0)?)?;
    let grid = params.get("grid", 21usize)?;
    Region::square(radius, grid).map_err(|e| Error::BadParams(e.to_string()))
}

fn scene(
    n: usize,
    region: Region,
    members: Vec<FamilyMember>,
    epsilon: f64,
    delta: f64,
) -> Result<Scene> {
    let config =
        CheckConfig::new(epsilon, delta, region).map_err(|e| Error::BadParams(e.to_string()))?;
    let members = members
        .into_iter()
        .map(|m| {
            let hs = m
                .hyperplanes
                .iter()
                .map(|h| h.normalized(&region))
                .collect();
            FamilyMember::new(m.label, m.curve, hs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Scene {
        n,
        region,
        members,
        config,
        zalcman: ZalcmanConfig::default(),
        metadata: BTreeMap::new(),
    })
}

/// `2n+1` fixed hyperplanes with rows `(1, w^j, w^{2j}, ..., w^{nj})`,
/// `w = exp(2 pi i / (2n+1))`: every `n+1` rows form a Vandermonde matrix
/// on distinct nodes, so the set is in general position.
pub fn unit_root_hyperplanes(n: usize) -> Vec<MovingHyperplane> {
    let q = 2 * n + 1;
    (0..q)
        .map(|j| {
            let row: Vec<Complex64> = (0..=n)
                .map(|l| Complex64::from_polar(1.0, 2.0 * PI * (j * l) as f64 / q as f64))
                .collect();
            MovingHyperplane::fixed(&row).expect("nonzero row")
        })
        .collect()
}

fn random_in_disc(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    let rho = r * rng.gen::<f64>().sqrt();
    Complex64::from_polar(rho, 2.0 * PI * rng.gen::<f64>())
}

/// Constant curves `(1, c_1, ..., c_n)` omitting the unit-root hyperplanes.
fn montel_omitting(params: &Params) -> Result<Scene> {
    params.check_known(&["n", "N", "seed", "radius", "grid"])?;
    let n = positive("n", params.get("n", 1usize)?)?;
    let count = positive("N", params.get("N", 10usize)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.get("seed", 0u64)?);
    let region = grid_region(params)?;
    let hs = unit_root_hyperplanes(n);
    let mut members = Vec::with_capacity(count);
    while members.len() < count {
        let mut comps = vec![ComplexPoly::one()];
        comps.extend((0..n).map(|_| ComplexPoly::constant(random_in_disc(&mut rng, 1.0))));
        let curve = ProjCurve::new(comps)?;
        // keep the image well away from every hyperplane
        let clear = hs.iter().all(|h| {
            pair(&curve, h)
                .map(|p| p.is_constant() && p.coeffs()[0].norm() >= 0.05)
                .unwrap_or(false)
        });
        if clear {
            members.push(FamilyMember::new(
                label(members.len() + 1),
                curve,
                hs.clone(),
            )?);
        }
    }
    let normalized: Vec<MovingHyperplane> = hs.iter().map(|h| h.normalized(&region)).collect();
    let d = gen_pos_product(&normalized, c(0.0, 0.0))?;
    scene(n, region, members, 0.5, 0.5 * d)
}

/// `f_nu = (1, nu z, (nu z)^2, ..., (nu z)^n)` for `nu = 1..N`.
fn blowup_linear(params: &Params) -> Result<Scene> {
    params.check_known(&["n", "N", "radius", "grid", "seed"])?;
    let n = positive("n", params.get("n", 1usize)?)?;
    let count = positive("N", params.get("N", 8usize)?)?;
    let region = grid_region(params)?;
    let hs = unit_root_hyperplanes(n);
    let members = (1..=count)
        .map(|nu| {
            let comps = (0..=n)
                .map(|l| ComplexPoly::monomial(c((nu as f64).powi(l as i32), 0.0), l))
                .collect();
            FamilyMember::new(label(nu), ProjCurve::new(comps)?, hs.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    scene(n, region, members, 0.5, 1e-3)
}

/// Curves `(1, p)` with `p = c (z - a)^2`, `|c| = 0.1`, `|a| <= 0.3`, and
/// per-member hyperplanes `(1, 0)`, `(0, 1)`, `(1 + t z, e^{i theta})`.
///
/// On `[-1, 1]^2`: the only preimage point is `a` for `(0, 1)`, where both
/// `p` and `p'` vanish; `(1, 0)` and the moving third hyperplane are omitted
/// by the curve and its derived map `(1, p')`. The determinant product is
/// bounded below by `|1 + t z|`.
fn wandering_shared(params: &Params) -> Result<Scene> {
    params.check_known(&["n", "N", "seed", "t", "grid"])?;
    let n = params.get("n", 1usize)?;
    if n != 1 {
        return Err(Error::BadParams(
            "wandering_shared is defined for n = 1".into(),
        ));
    }
    let count = positive("N", params.get("N", 6usize)?)?;
    let t: f64 = params.get("t", 0.05)?;
    if !(0.0..=0.1).contains(&t) {
        return Err(Error::BadParams("t must lie in [0, 0.1]".into()));
    }
    let grid = params.get("grid", 21usize)?;
    let region = Region::square(1.0, grid).map_err(|e| Error::BadParams(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.get("seed", 0u64)?);
    let members = (1..=count)
        .map(|i| {
            let a = random_in_disc(&mut rng, 0.3);
            let coef = Complex64::from_polar(0.1, 2.0 * PI * rng.gen::<f64>());
            let theta = 2.0 * PI * rng.gen::<f64>();
            let p = ComplexPoly::from_roots(&[Root::new(a, 2)]).scale(coef);
            let curve = ProjCurve::new(vec![ComplexPoly::one(), p])?;
            let hs = vec![
                MovingHyperplane::fixed(&[c(1.0, 0.0), c(0.0, 0.0)])?,
                MovingHyperplane::fixed(&[c(0.0, 0.0), c(1.0, 0.0)])?,
                MovingHyperplane::new(vec![
                    ComplexPoly::new(vec![c(1.0, 0.0), c(t, 0.0)]),
                    ComplexPoly::constant(Complex64::from_polar(1.0, theta)),
                ])?,
            ];
            FamilyMember::new(label(i), curve, hs)
        })
        .collect::<Result<Vec<_>>>()?;
    scene(1, region, members, 0.5, 0.1)
}

/// Fixed hyperplanes `(1, 0)`, `(0, 1)`, `(1, t)`: the determinant product
/// equals `|t|` everywhere, so `t -> 0` collapses general position.
fn degenerate_position(params: &Params) -> Result<Scene> {
    params.check_known(&["t", "delta", "grid"])?;
    let t: f64 = params.get("t", 0.01)?;
    if t.is_nan() || t.abs() > 1.0 {
        return Err(Error::BadParams("|t| must be at most 1".into()));
    }
    let delta = positive("delta", params.get("delta", 0.1)?)?;
    let grid = params.get("grid", 21usize)?;
    let region = Region::square(1.0, grid).map_err(|e| Error::BadParams(e.to_string()))?;
    let hs = vec![
        MovingHyperplane::fixed_real(&[1.0, 0.0])?,
        MovingHyperplane::fixed_real(&[0.0, 1.0])?,
        MovingHyperplane::fixed_real(&[1.0, t])
            .map_err(|_| Error::BadParams("t gives a zero hyperplane".into()))?,
    ];
    let curve = ProjCurve::from_real(&[&[1.0], &[0.0, 0.0, 1.0]])?;
    scene(
        1,
        region,
        vec![FamilyMember::new(label(1), curve, hs)?],
        0.5,
        delta,
    )
}

/// Targeted violations of one hypothesis on a `wandering_shared` scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Replace the third hyperplane of a member by a copy of the second.
    DuplicateHyperplane { member: usize },
    /// Give `f_0` a root `r` inside the region; `r` is then a zero of both
    /// `<f, (1,0)>` and `<grad f, (1,0)>`, and `|f_0(r)| = 0`.
    FirstComponentRoot { member: usize },
    /// Tilt the shared hyperplane `(0, 1)` to `(kappa, 1)` so the preimages
    /// of the curve and of its derived map separate.
    PerturbSharedHyperplane { member: usize },
}

pub fn mutate(scene: &Scene, mutation: Mutation) -> Result<Scene> {
    let mut out = scene.clone();
    let idx = match mutation {
        Mutation::DuplicateHyperplane { member }
        | Mutation::FirstComponentRoot { member }
        | Mutation::PerturbSharedHyperplane { member } => member,
    };
    let m = out
        .members
        .get_mut(idx)
        .ok_or_else(|| Error::BadParams(format!("no member {idx}")))?;
    if m.curve.n() != 1 {
        return Err(Error::BadParams("mutations apply to n = 1 scenes".into()));
    }
    match mutation {
        Mutation::DuplicateHyperplane { .. } => {
            m.hyperplanes[2] = m.hyperplanes[1].clone();
        }
        Mutation::FirstComponentRoot { .. } => {
            let p = m.curve.components()[1].clone();
            let a = p.roots()?.first().map(|r| r.z).unwrap_or_default();
            let shift = if a.re <= 0.0 { 0.5 } else { -0.5 };
            let r = a + c(shift, 0.0);
            let f0 = ComplexPoly::new(vec![-r, c(1.0, 0.0)]);
            m.curve = ProjCurve::new(vec![f0, p])?;
        }
        Mutation::PerturbSharedHyperplane { .. } => {
            let h = MovingHyperplane::fixed(&[c(0.01, 0.0), c(1.0, 0.0)])?;
            m.hyperplanes[1] = h.normalized(&scene.region);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normality::green_omission_check;
    use crate::position::{is_general_position, uniform_delta};

    #[test]
    fn params_parse() {
        let p = Params::parse("N=5, seed=3").unwrap();
        assert_eq!(p.get("N", 0usize).unwrap(), 5);
        assert!(Params::parse("N5").is_err());
        assert!(matches!(
            generate_scene("blowup_linear", &Params::parse("bogus=1").unwrap()),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(
            generate_scene("nope", &Params::default()),
            Err(Error::UnknownTemplate(_))
        ));
    }

    #[test]
    fn blowup_linear_members() {
        let s = generate_scene("blowup_linear", &Params::parse("N=5").unwrap()).unwrap();
        assert_eq!(s.members.len(), 5);
        for (nu, m) in (1..=5).zip(&s.members) {
            assert_eq!(m.curve.components()[0], ComplexPoly::one());
            assert_eq!(
                m.curve.components()[1],
                ComplexPoly::from_real(&[0.0, nu as f64])
            );
        }
    }

    #[test]
    fn unit_root_sets_are_in_general_position() {
        for n in 1..=4 {
            assert!(is_general_position(&unit_root_hyperplanes(n)).unwrap());
        }
    }

    #[test]
    fn montel_members_omit_all_hyperplanes() {
        let s = generate_scene("montel_omitting", &Params::parse("n=1,N=10").unwrap()).unwrap();
        assert_eq!(s.members.len(), 10);
        for m in &s.members {
            let g = green_omission_check(&m.curve, &m.hyperplanes).unwrap();
            assert_eq!(g.omitted_count, 3);
            assert!(g.consistent);
        }
        let s2 =
            generate_scene("montel_omitting", &Params::parse("n=2,N=4,seed=9").unwrap()).unwrap();
        assert!(s2
            .members
            .iter()
            .all(|m| green_omission_check(&m.curve, &m.hyperplanes)
                .unwrap()
                .omitted_count
                == 5));
    }

    #[test]
    fn degenerate_position_matches_closed_form() {
        for t in [0.5, 0.01, 1e-4] {
            let s = generate_scene("degenerate_position", &Params::default().set("t", t)).unwrap();
            let d = uniform_delta(&s.members[0].hyperplanes, &s.region).unwrap();
            // hand computation: |det(H1,H2)| |det(H1,H3)| |det(H2,H3)| = 1 * |t| * 1
            assert!(
                (d.min - t).abs() <= 1e-15 * t.max(1.0),
                "t={t} min={}",
                d.min
            );
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let p = Params::parse("N=4,seed=11").unwrap();
        let a = generate_scene("wandering_shared", &p).unwrap().to_json();
        let b = generate_scene("wandering_shared", &p).unwrap().to_json();
        assert_eq!(a, b);
        let other = generate_scene("wandering_shared", &p.clone().set("seed", 12))
            .unwrap()
            .to_json();
        assert_ne!(a, other);
    }
}
