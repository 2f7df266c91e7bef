//! Equal- or unequal-time correlator samples on a uniform vertex lattice
//! over `[0, D]^2`, with singular cells masked.
//!
//! Values are stored as `v0 * kappa`, row-major in `x1`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::smooth::{feature_lines, kappa_a_approx, kappa_b_approx, EvalMode, SmoothModeTable};
use crate::sudden::{
    kappa_sudden, singularity_lines, Divergence, KappaValue, LineKind, SingularityLine, SpacetimePoint,
};
use crate::waveguide::{SuddenStep, TanhStep};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellMask {
    Finite,
    Singular(Divergence),
}

impl CellMask {
    pub fn label(self) -> &'static str {
        match self {
            CellMask::Finite => "finite",
            CellMask::Singular(Divergence::Positive) => "singular+",
            CellMask::Singular(Divergence::Negative) => "singular-",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorGrid {
    pub t1: f64,
    pub t2: f64,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub values: Vec<f64>,
    pub mask: Vec<CellMask>,
    pub kappa_a: Option<Vec<f64>>,
    pub kappa_b: Option<Vec<f64>>,
}

impl CorrelatorGrid {
    pub fn resolution(&self) -> usize {
        self.x1.len()
    }

    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 * self.x2.len() + i2
    }

    pub fn value(&self, i1: usize, i2: usize) -> f64 {
        self.values[self.index(i1, i2)]
    }

    pub fn mask_at(&self, i1: usize, i2: usize) -> CellMask {
        self.mask[self.index(i1, i2)]
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|m| **m != CellMask::Finite).count()
    }

    /// Largest `|value(i, j) - value(j, i)|` over unmasked pairs; `None` if
    /// the masks are not transpose-symmetric.
    pub fn transpose_asymmetry(&self) -> Option<f64> {
        let n = self.resolution();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (self.mask_at(i, j), self.mask_at(j, i));
                if a != b {
                    return None;
                }
                if a == CellMask::Finite {
                    worst = worst.max((self.value(i, j) - self.value(j, i)).abs());
                }
            }
        }
        Some(worst)
    }
}

fn axis(resolution: usize, length: f64) -> Result<Vec<f64>> {
    if resolution < 2 {
        return Err(invalid("resolution", format!("must be >= 2, got {resolution}")));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(invalid("length", format!("must be > 0, got {length}")));
    }
    let last = (resolution - 1) as f64;
    Ok((0..resolution).map(|i| length * i as f64 / last).collect())
}

/// Marks every cell whose pixel square `[x - h/2, x + h/2]^2` is crossed by
/// one of `lines`; divergence directions come from the line weights.
fn band_mask(mask: &mut [CellMask], xs: &[f64], lines: &[SingularityLine], spacing: f64) {
    let n = xs.len();
    let band = spacing * (1.0 - 1e-9);
    for (i1, &x1) in xs.iter().enumerate() {
        for (i2, &x2) in xs.iter().enumerate() {
            let cell = &mut mask[i1 * n + i2];
            if *cell != CellMask::Finite {
                continue;
            }
            if let Some(line) = lines.iter().find(|l| l.residual(x1, x2).abs() < band) {
                *cell = CellMask::Singular(line.direction());
            }
        }
    }
}

/// Sudden-step closed form on a `resolution x resolution` lattice.
pub fn grid_evaluate(
    t1: f64,
    t2: f64,
    resolution: usize,
    step: &SuddenStep,
    length: f64,
) -> Result<CorrelatorGrid> {
    let xs = axis(resolution, length)?;
    let v0 = step.v0();
    let cells: Vec<(f64, CellMask)> = (0..resolution * resolution)
        .into_par_iter()
        .map(|k| {
            let (i1, i2) = (k / resolution, k % resolution);
            let p1 = SpacetimePoint::new(t1, xs[i1]);
            let p2 = SpacetimePoint::new(t2, xs[i2]);
            match kappa_sudden(&p1, &p2, step, length) {
                KappaValue::Finite(v) => (v0 * v, CellMask::Finite),
                KappaValue::Singular(d) => (0.0, CellMask::Singular(d)),
            }
        })
        .collect();
    let (mut values, mut mask): (Vec<f64>, Vec<CellMask>) = cells.into_iter().unzip();
    let lines = singularity_lines(t1, t2, step, length);
    band_mask(&mut mask, &xs, &lines, xs[1] - xs[0]);
    zero_masked(&mut values, &mask);
    Ok(CorrelatorGrid {
        t1,
        t2,
        x1: xs.clone(),
        x2: xs,
        values,
        mask,
        kappa_a: None,
        kappa_b: None,
    })
}

fn zero_masked(values: &mut [f64], mask: &[CellMask]) {
    for (v, m) in values.iter_mut().zip(mask) {
        if *m != CellMask::Finite {
            *v = 0.0;
        }
    }
}

/// Abel-regularized sudden-step mode sum on the lattice, masked like
/// [`grid_evaluate`].
pub fn grid_evaluate_mode_sum(
    t1: f64,
    t2: f64,
    resolution: usize,
    step: &SuddenStep,
    length: f64,
    n_max: u32,
    p: f64,
) -> Result<CorrelatorGrid> {
    let xs = axis(resolution, length)?;
    let weights = crate::sudden::mode_sum_weights(t1, t2, step, length, n_max, p)?;
    let n = resolution;
    let dtheta = PI / (n - 1) as f64;
    let series: Vec<f64> = (0..2 * n - 1)
        .into_par_iter()
        .map(|k| crate::smooth::cosine_series(&weights, k as f64 * dtheta, length))
        .collect();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            values[i * n + j] = step.v0() * (series[i + j] + series[i.abs_diff(j)]);
        }
    }
    let mut mask = vec![CellMask::Finite; n * n];
    band_mask(&mut mask, &xs, &singularity_lines(t1, t2, step, length), xs[1] - xs[0]);
    zero_masked(&mut values, &mask);
    Ok(CorrelatorGrid {
        t1,
        t2,
        x1: xs.clone(),
        x2: xs,
        values,
        mask,
        kappa_a: None,
        kappa_b: None,
    })
}

/// Smooth-step correlator on the lattice; only the light-cone lines of the
/// stationary part are masked.
#[allow(clippy::too_many_arguments)]
pub fn grid_evaluate_smooth(
    t1: f64,
    t2: f64,
    resolution: usize,
    profile: &TanhStep,
    length: f64,
    mode: EvalMode,
    n_max: u32,
    p: f64,
) -> Result<CorrelatorGrid> {
    let xs = axis(resolution, length)?;
    let n = resolution;
    let v0 = profile.v0();
    let (a, b) = match mode {
        EvalMode::Exact => exact_parts(t1, t2, &xs, profile, length, n_max, p)?,
        EvalMode::Approx => approx_parts(t1, t2, &xs, profile, length)?,
    };
    let mut mask: Vec<CellMask> = a
        .iter()
        .map(|v| if v.is_finite() { CellMask::Finite } else { CellMask::Singular(Divergence::Positive) })
        .collect();
    let cones: Vec<SingularityLine> = feature_lines(t1, t2, profile, length)
        .into_iter()
        .filter(|l| l.kind == LineKind::LightCone)
        .collect();
    band_mask(&mut mask, &xs, &cones, xs[1] - xs[0]);
    let mut kappa_a = a;
    let mut kappa_b = b;
    zero_masked(&mut kappa_a, &mask);
    zero_masked(&mut kappa_b, &mask);
    let values: Vec<f64> = (0..n * n).map(|k| v0 * (kappa_a[k] + kappa_b[k])).collect();
    Ok(CorrelatorGrid {
        t1,
        t2,
        x1: xs.clone(),
        x2: xs,
        values,
        mask,
        kappa_a: Some(kappa_a),
        kappa_b: Some(kappa_b),
    })
}

/// Mode sums on the vertex lattice. With `x_i = i h`, the shape product
/// reduces to cosine series at `theta_k = k pi h / D`, `k = i +- j`.
fn exact_parts(
    t1: f64,
    t2: f64,
    xs: &[f64],
    profile: &TanhStep,
    length: f64,
    n_max: u32,
    p: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let table = SmoothModeTable::new(profile, length, n_max, p)?;
    let (wa, wb) = table.weights(t1, t2);
    let n = xs.len();
    let step = PI / (n - 1) as f64;
    let series: Vec<(f64, f64)> = (0..2 * n - 1)
        .into_par_iter()
        .map(|k| {
            let theta = k as f64 * step;
            (
                crate::smooth::cosine_series(&wa, theta, length),
                crate::smooth::cosine_series(&wb, theta, length),
            )
        })
        .collect();
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (s, d) = (series[i + j], series[i.abs_diff(j)]);
            a[i * n + j] = s.0 + d.0;
            b[i * n + j] = s.1 + d.1;
        }
    }
    Ok((a, b))
}

fn approx_parts(
    t1: f64,
    t2: f64,
    xs: &[f64],
    profile: &TanhStep,
    length: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = xs.len();
    let cells: Vec<Result<(f64, f64)>> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let p1 = SpacetimePoint::new(t1, xs[k / n]);
            let p2 = SpacetimePoint::new(t2, xs[k % n]);
            let b = kappa_b_approx(&p1, &p2, profile, length);
            match kappa_a_approx(&p1, &p2, profile, length) {
                Ok(a) => Ok((a, b)),
                Err(Error::Divergent { .. }) => Ok((f64::INFINITY, b)),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut a = Vec::with_capacity(n * n);
    let mut b = Vec::with_capacity(n * n);
    for cell in cells {
        let (x, y) = cell?;
        a.push(x);
        b.push(y);
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sudden(v0: f64, v1: f64) -> SuddenStep {
        SuddenStep::new(v0, v1).unwrap()
    }

    #[test]
    fn rejects_tiny_resolution() {
        assert!(grid_evaluate(0.1, 0.1, 1, &sudden(1.0, 0.8), 1.0).is_err());
    }

    #[test]
    fn static_grid_symmetric_with_diagonal_mask() {
        let g = grid_evaluate(-1.0, -1.0, 41, &sudden(1.0, 1.0), 1.0).unwrap();
        assert!(g.transpose_asymmetry().unwrap() < 1e-15);
        for i in 0..41 {
            for j in 0..41 {
                assert_eq!(g.mask_at(i, j) != CellMask::Finite, i == j, "({i},{j})");
            }
        }
    }

    #[test]
    fn rectangle_grows_with_time() {
        let step = sudden(1.0, 0.8);
        let a = grid_evaluate(0.1, 0.1, 101, &step, 1.0).unwrap();
        let b = grid_evaluate(0.2, 0.2, 101, &step, 1.0).unwrap();
        // the rectangle's corner on the x2 = 0 edge walks along the edge
        let corner = |g: &CorrelatorGrid| {
            (0..101)
                .find(|&i| g.mask_at(i, 0) == CellMask::Singular(Divergence::Negative))
                .unwrap()
        };
        assert_eq!(corner(&a), 16);
        assert_eq!(corner(&b), 32);
        // corner of the rectangle on the x2 = 0 edge sits at x1 = 0.32
        assert_eq!(b.mask_at(32, 0), CellMask::Singular(Divergence::Negative));
        assert_eq!(b.mask_at(50, 0), CellMask::Finite);
    }

    #[test]
    fn refinement_keeps_shared_values() {
        let step = sudden(1.0, 0.8);
        let coarse = grid_evaluate(0.2, 0.2, 26, &step, 1.0).unwrap();
        let fine = grid_evaluate(0.2, 0.2, 51, &step, 1.0).unwrap();
        for i in 0..26 {
            for j in 0..26 {
                if coarse.mask_at(i, j) == CellMask::Finite && fine.mask_at(2 * i, 2 * j) == CellMask::Finite {
                    assert_eq!(coarse.value(i, j), fine.value(2 * i, 2 * j));
                }
            }
        }
    }

    #[test]
    fn smooth_approx_masks_only_light_cone() {
        let prof = TanhStep::new(1.0, 0.8, 0.3).unwrap();
        let g = grid_evaluate_smooth(0.2, 0.2, 64, &prof, 1.0, EvalMode::Approx, 0, 0.0).unwrap();
        assert_eq!(g.masked_count(), 64);
        assert!(g.values.iter().all(|v| v.is_finite()));
        let (a, b) = (g.kappa_a.as_ref().unwrap(), g.kappa_b.as_ref().unwrap());
        for k in 0..g.values.len() {
            assert_eq!(g.values[k], 1.0 * (a[k] + b[k]));
        }
    }

    #[test]
    fn smooth_exact_grid_matches_pointwise_sum() {
        let prof = TanhStep::new(1.0, 0.8, 0.3).unwrap();
        let g = grid_evaluate_smooth(2.0, 2.0, 11, &prof, 1.0, EvalMode::Exact, 2000, 0.99).unwrap();
        let (a, b) = (g.kappa_a.as_ref().unwrap(), g.kappa_b.as_ref().unwrap());
        for (i, j) in [(1, 4), (7, 2), (10, 0)] {
            let p1 = SpacetimePoint::new(2.0, g.x1[i]);
            let p2 = SpacetimePoint::new(2.0, g.x2[j]);
            let ka = crate::smooth::kappa_a_exact(&p1, &p2, &prof, 1.0, 2000, 0.99).unwrap();
            let kb = crate::smooth::kappa_b_exact(&p1, &p2, &prof, 1.0, 2000, 0.99).unwrap();
            assert!((a[i * 11 + j] - ka).abs() < 1e-12);
            assert!((b[i * 11 + j] - kb).abs() < 1e-12);
        }
        assert!(g.transpose_asymmetry().unwrap() < 1e-12);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let step = sudden(1.0, 0.8);
        let a = grid_evaluate(0.37, -0.2, 33, &step, 1.0).unwrap();
        let b = grid_evaluate(0.37, -0.2, 33, &step, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mode_sum_grid_tracks_closed_form() {
        let step = sudden(1.0, 0.8);
        let exact = grid_evaluate(0.3, 0.45, 21, &step, 1.0).unwrap();
        let sum = grid_evaluate_mode_sum(0.3, 0.45, 21, &step, 1.0, 10_000, 0.999).unwrap();
        let finite = |g: &CorrelatorGrid| g.mask.iter().map(|m| *m == CellMask::Finite).collect::<Vec<_>>();
        assert_eq!(finite(&exact), finite(&sum));
        let worst = exact
            .values
            .iter()
            .zip(&sum.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 5e-3, "{worst}");
    }
}
