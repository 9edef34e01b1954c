//! General-position measures for systems of fixed and moving hyperplanes.

use itertools::Itertools;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projective::MovingHyperplane;
use crate::tolerance::Tolerances;

/// Axis-aligned rectangle in the complex plane with a sampling grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRegion")]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub grid_nx: usize,
    pub grid_ny: usize,
}

#[derive(Deserialize)]
struct RawRegion {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    grid_nx: usize,
    grid_ny: usize,
}

impl TryFrom<RawRegion> for Region {
    type Error = Error;

    fn try_from(r: RawRegion) -> Result<Self> {
        Region::new(r.x_min, r.x_max, r.y_min, r.y_max, r.grid_nx, r.grid_ny)
    }
}

impl Region {
    pub fn new(
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        grid_nx: usize,
        grid_ny: usize,
    ) -> Result<Self> {
        if ![x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidRegion("bounds must be finite".into()));
        }
        if x_min >= x_max || y_min >= y_max {
            return Err(Error::InvalidRegion(
                "need x_min < x_max and y_min < y_max".into(),
            ));
        }
        if grid_nx < 2 || grid_ny < 2 {
            return Err(Error::InvalidRegion(
                "grid needs at least 2 points per axis".into(),
            ));
        }
        Ok(Region {
            x_min,
            x_max,
            y_min,
            y_max,
            grid_nx,
            grid_ny,
        })
    }

    /// Square `[-r, r]^2` with an `n x n` grid.
    pub fn square(r: f64, n: usize) -> Result<Self> {
        Region::new(-r, r, -r, r, n, n)
    }

    pub fn with_grid(&self, nx: usize, ny: usize) -> Result<Self> {
        Region::new(self.x_min, self.x_max, self.y_min, self.y_max, nx, ny)
    }

    /// Grid with every spacing halved; contains every point of `self`'s grid.
    pub fn refined(&self) -> Region {
        Region {
            grid_nx: 2 * self.grid_nx - 1,
            grid_ny: 2 * self.grid_ny - 1,
            ..*self
        }
    }

    pub fn diameter(&self) -> f64 {
        (self.x_max - self.x_min).hypot(self.y_max - self.y_min)
    }

    /// Grid points, x varying fastest.
    pub fn grid_points(&self) -> Vec<Complex64> {
        let xs = axis(self.x_min, self.x_max, self.grid_nx);
        let ys = axis(self.y_min, self.y_max, self.grid_ny);
        ys.iter()
            .flat_map(|&y| xs.iter().map(move |&x| Complex64::new(x, y)))
            .collect()
    }

    /// Membership with a boundary slack.
    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.x_min - slack
            && z.re <= self.x_max + slack
            && z.im >= self.y_min - slack
            && z.im <= self.y_max + slack
    }
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// Determinant by LU with partial pivoting. `m` is row-major and square.
#[allow(clippy::needless_range_loop)]
pub fn determinant(mut m: Vec<Vec<Complex64>>) -> Complex64 {
    let n = m.len();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| {
                m[a][col]
                    .norm()
                    .partial_cmp(&m[b][col].norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if m[pivot][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col];
        det *= p;
        for row in col + 1..n {
            let factor = m[row][col] / p;
            if factor.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let v = m[col][k];
                m[row][k] -= factor * v;
            }
        }
    }
    det
}

fn check_dims(hs: &[MovingHyperplane]) -> Result<usize> {
    let n = hs.first().map(|h| h.n()).ok_or(Error::WrongCount {
        expected: "at least 1".into(),
        found: 0,
    })?;
    for h in hs {
        if h.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: h.n(),
            });
        }
    }
    Ok(n)
}

/// `|det[a_l^(j)(z)]|` for exactly `n + 1` hyperplanes, using the
/// representatives as given.
pub fn gen_pos_det(hs: &[MovingHyperplane], z: Complex64) -> Result<f64> {
    let n = check_dims(hs)?;
    if hs.len() != n + 1 {
        return Err(Error::WrongCount {
            expected: format!("{}", n + 1),
            found: hs.len(),
        });
    }
    Ok(det_of_rows(hs.iter().map(|h| h.eval(z)).collect()))
}

fn det_of_rows(rows: Vec<Vec<Complex64>>) -> f64 {
    determinant(rows).norm()
}

/// Product of [`gen_pos_det`] over all `(n+1)`-subsets of `q >= n+1`
/// hyperplanes.
pub fn gen_pos_product(hs: &[MovingHyperplane], z: Complex64) -> Result<f64> {
    let n = check_dims(hs)?;
    if hs.len() < n + 1 {
        return Err(Error::WrongCount {
            expected: format!("at least {}", n + 1),
            found: hs.len(),
        });
    }
    let rows: Vec<Vec<Complex64>> = hs.iter().map(|h| h.eval(z)).collect();
    Ok(product_over_subsets(&rows, n + 1))
}

fn product_over_subsets(rows: &[Vec<Complex64>], k: usize) -> f64 {
    (0..rows.len())
        .combinations(k)
        .map(|idx| det_of_rows(idx.iter().map(|&i| rows[i].clone()).collect()))
        .product()
}

/// Grid estimate of `inf_z` of the determinant product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaEstimate {
    pub min: f64,
    pub argmin: [f64; 2],
}

/// Minimum of [`gen_pos_product`] over the region's grid, with its location.
/// Ties resolve to the first grid point in x-fastest order.
pub fn uniform_delta(hs: &[MovingHyperplane], region: &Region) -> Result<DeltaEstimate> {
    let values = delta_field(hs, region)?;
    let (z, min) = values.into_iter().fold(
        (Complex64::new(f64::NAN, f64::NAN), f64::INFINITY),
        |best, (z, v)| {
            if v < best.1 {
                (z, v)
            } else {
                best
            }
        },
    );
    Ok(DeltaEstimate {
        min,
        argmin: [z.re, z.im],
    })
}

/// `(z, D(z))` at every grid point, in grid order.
pub fn delta_field(hs: &[MovingHyperplane], region: &Region) -> Result<Vec<(Complex64, f64)>> {
    // validate once; per-point evaluation cannot fail afterwards
    gen_pos_product(hs, Complex64::new(0.0, 0.0))?;
    Ok(region
        .grid_points()
        .into_par_iter()
        .map(|z| (z, gen_pos_product(hs, z).expect("validated")))
        .collect())
}

/// Coarse and refined-grid estimates against a threshold `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaVerdict {
    pub coarse: DeltaEstimate,
    pub refined: DeltaEstimate,
    /// Coarse minimum exceeds `delta` and the refinement guard did not trip.
    pub passes: bool,
    /// Coarse grid said `> delta` but the refined grid found `<= delta / 2`.
    pub undersampled: bool,
}

/// [`uniform_delta`] with the grid-refinement guard.
pub fn uniform_delta_checked(
    hs: &[MovingHyperplane],
    region: &Region,
    delta: f64,
) -> Result<DeltaVerdict> {
    let coarse = uniform_delta(hs, region)?;
    let refined = uniform_delta(hs, &region.refined())?;
    let passes = coarse.min > delta;
    let undersampled = passes && refined.min <= delta / 2.0;
    Ok(DeltaVerdict {
        coarse,
        refined,
        passes: passes && !undersampled,
        undersampled,
    })
}

/// General position of fixed hyperplanes. Each representative is scaled to
/// unit max-modulus first, so the verdict does not depend on the choice of
/// representatives.
pub fn is_general_position(hs: &[MovingHyperplane]) -> Result<bool> {
    is_general_position_with(hs, &Tolerances::default())
}

pub fn is_general_position_with(hs: &[MovingHyperplane], tol: &Tolerances) -> Result<bool> {
    if let Some(index) = hs.iter().position(|h| !h.is_fixed()) {
        return Err(Error::NotFixed { index });
    }
    let normalized: Vec<MovingHyperplane> = hs.iter().map(|h| h.normalized_fixed()).collect();
    Ok(gen_pos_product(&normalized, Complex64::new(0.0, 0.0))? > tol.gp)
}
