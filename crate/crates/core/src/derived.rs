//! The derived holomorphic map of a curve,
//! `[f_0^2 : W(f_0, f_1) : ... : W(f_0, f_n)]` with the common factor removed.

use crate::error::{Error, Result};
use crate::polynomial::{wronskian, ComplexPoly};
use crate::projective::{reduce_with, ProjCurve};
use crate::tolerance::Tolerances;

/// Unreduced tuple `(f_0^2, W(f_0, f_1), ..., W(f_0, f_n))`.
pub fn derived_components(f: &ProjCurve) -> Result<Vec<ComplexPoly>> {
    let comps = f.components();
    let f0 = &comps[0];
    if f0.is_zero() {
        return Err(Error::FirstComponentZero);
    }
    let mut out = Vec::with_capacity(comps.len());
    out.push(f0 * f0);
    out.extend(comps[1..].iter().map(|fl| wronskian(f0, fl)));
    Ok(out)
}

pub fn derived_map(f: &ProjCurve) -> Result<ProjCurve> {
    derived_map_with(f, &Tolerances::default())
}

/// The common factor `d` is the full approximate GCD of the tuple, cancelled
/// by root-cluster deflation.
pub fn derived_map_with(f: &ProjCurve, tol: &Tolerances) -> Result<ProjCurve> {
    reduce_with(derived_components(f)?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::projective::fs_distance;

    fn poly(c: &[f64]) -> ComplexPoly {
        ComplexPoly::from_real(c)
    }

    #[test]
    fn derivative_of_z_squared() {
        let f = ProjCurve::from_real(&[&[1.0], &[0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(
            derived_map(&f).unwrap().components(),
            &[poly(&[1.0]), poly(&[0.0, 2.0])]
        );
    }

    #[test]
    fn derivative_of_reciprocal() {
        let f = ProjCurve::from_real(&[&[0.0, 1.0], &[1.0]]).unwrap();
        let g = derived_map(&f).unwrap();
        assert_eq!(g.components(), &[poly(&[0.0, 0.0, 1.0]), poly(&[-1.0])]);
    }

    #[test]
    fn rational_normal_curve() {
        // oracle: expand W(1, z) = 1 and W(1, z^2) = 2z by hand
        let f = ProjCurve::from_real(&[&[1.0], &[0.0, 1.0], &[0.0, 0.0, 1.0]]).unwrap();
        let g = derived_map(&f).unwrap();
        assert_eq!(
            g.components(),
            &[poly(&[1.0]), poly(&[1.0]), poly(&[0.0, 2.0])]
        );
    }

    #[test]
    fn constant_curve_maps_to_first_coordinate_point() {
        let f = ProjCurve::from_real(&[&[2.0], &[-1.0], &[3.0]]).unwrap();
        let g = derived_map(&f).unwrap();
        let e0 = crate::ProjPoint::new(vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]).unwrap();
        assert_eq!(fs_distance(&g.point(c64(0.4, 0.1)), &e0).unwrap(), 0.0);
    }

    #[test]
    fn common_factor_is_cancelled() {
        // f = (z^2, 1 + z^3): f0^2 = z^4 and W = z^2 * 3z^2 - 2z (1 + z^3) = z^4 - 2z share z
        let f = ProjCurve::from_real(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0, 1.0]]).unwrap();
        let g = derived_map(&f).unwrap();
        assert_eq!(g.components()[0].degree(), 3);
        assert_eq!(g.components()[1].degree(), 3);
        let w = c64(0.3, 0.8);
        let expected = crate::ProjPoint::new(vec![w.powi(4), w.powi(4) - w * 2.0]).unwrap();
        assert!(fs_distance(&g.point(w), &expected).unwrap() < 1e-12);
    }

    #[test]
    fn first_component_zero_is_rejected() {
        let f = ProjCurve::new(vec![ComplexPoly::zero(), poly(&[1.0])]).unwrap();
        assert_eq!(derived_map(&f), Err(Error::FirstComponentZero));
    }
}
