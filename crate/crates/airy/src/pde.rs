//! Finite-difference solution of `u_t = (1/2) u_xx - a x u` on `[0, x_max]`
//! with `u = 0` at both ends, started from a discrete delta. The result
//! approximates the column `x -> Z_{0,t}(x, y0)` of the Dirichlet heat
//! kernel without using any Airy function.
//!
//! Time stepping is Crank–Nicolson with the step restricted so that the
//! explicit half is a nonnegative matrix; together with the M-matrix
//! implicit half this keeps every iterate nonnegative.

use serde::Serialize;

use crate::zeros::airy_zero;
use crate::{AirySpectrum, AiryError};

/// Uniform grid `x_j = j dx`, `j = 0..=M`, with `M dx = x_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PdeGrid {
    pub dx: f64,
    pub x_max: f64,
}

impl PdeGrid {
    pub fn nodes(&self) -> usize {
        (self.x_max / self.dx).round() as usize + 1
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    /// Index of the node at `x`, if `x` lies on the grid.
    pub fn node_of(&self, x: f64) -> Option<usize> {
        let j = (x / self.dx).round();
        ((j * self.dx - x).abs() <= 1e-9 * self.dx && j >= 0.0 && (j as usize) < self.nodes())
            .then_some(j as usize)
    }

    /// Smallest admissible truncation point for tilt `a`: ten units past the
    /// classical turning point of the last default eigenfunction.
    pub fn min_x_max(a: f64) -> Result<f64, AiryError> {
        let b = (2.0 * a).cbrt();
        Ok(airy_zero(AirySpectrum::DEFAULT_LEN - 1)? / b + 10.0)
    }
}

/// Largest step for which the scheme is positivity preserving.
pub fn max_stable_step(a: f64, grid: &PdeGrid) -> f64 {
    2.0 / (1.0 / (grid.dx * grid.dx) + a * grid.x_max)
}

/// Solution snapshot at one output time.
#[derive(Debug, Clone, Serialize)]
pub struct PdeColumn {
    pub time: f64,
    pub values: Vec<f64>,
    pub mass: f64,
}

/// Runs the oracle from a unit mass at `y0` and records the solution at each
/// of the ascending `times`. `dt` defaults to 90% of [`max_stable_step`].
pub fn pde_kernel_columns(
    a: f64,
    times: &[f64],
    grid: PdeGrid,
    y0: f64,
    dt: Option<f64>,
) -> Result<Vec<PdeColumn>, AiryError> {
    if !(a.is_finite() && a > 0.0) {
        return Err(AiryError::Domain(format!("tilt must be positive, got {a}")));
    }
    if !(grid.dx > 0.0 && grid.x_max > grid.dx) {
        return Err(AiryError::Domain(format!("degenerate grid {grid:?}")));
    }
    let min_x_max = PdeGrid::min_x_max(a)?;
    if grid.x_max < min_x_max {
        return Err(AiryError::Domain(format!(
            "x_max = {} below the required {min_x_max:.3}",
            grid.x_max
        )));
    }
    let j0 = grid
        .node_of(y0)
        .filter(|&j| j > 0 && j + 1 < grid.nodes())
        .ok_or_else(|| AiryError::Domain(format!("start point {y0} is not an interior grid node")))?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !(*t > 0.0)) {
        return Err(AiryError::Domain("output times must be positive and ascending".into()));
    }
    let dt_max = max_stable_step(a, &grid);
    let dt_target = match dt {
        Some(dt) if dt > dt_max || dt <= 0.0 => {
            return Err(AiryError::StepSize { dt, max: dt_max });
        }
        Some(dt) => dt,
        None => 0.9 * dt_max,
    };

    let m = grid.nodes() - 1;
    let interior = m - 1;
    let inv_dx2 = 1.0 / (grid.dx * grid.dx);
    let potential: Vec<f64> = (1..m).map(|j| a * grid.x(j)).collect();

    let mut u = vec![0.0; interior];
    u[j0 - 1] = 1.0 / grid.dx;
    let mut rhs = vec![0.0; interior];
    let mut scratch = vec![0.0; interior];

    let mut out = Vec::with_capacity(times.len());
    let mut now = 0.0;
    for &target in times {
        let span = target - now;
        if span > 0.0 {
            let steps = (span / dt_target).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            let off = 0.25 * h * inv_dx2;
            for _ in 0..steps {
                // rhs = (I + h/2 A) u
                for j in 0..interior {
                    let left = if j > 0 { u[j - 1] } else { 0.0 };
                    let right = if j + 1 < interior { u[j + 1] } else { 0.0 };
                    let diag = 1.0 - 0.5 * h * (inv_dx2 + potential[j]);
                    rhs[j] = diag * u[j] + off * (left + right);
                }
                solve_implicit(&potential, h, inv_dx2, &rhs, &mut u, &mut scratch);
            }
            now = target;
        }
        let mut values = Vec::with_capacity(m + 1);
        values.push(0.0);
        values.extend_from_slice(&u);
        values.push(0.0);
        let mass = values.iter().sum::<f64>() * grid.dx;
        out.push(PdeColumn {
            time: target,
            values,
            mass,
        });
    }
    Ok(out)
}

/// Single-time convenience wrapper around [`pde_kernel_columns`].
pub fn pde_oracle(a: f64, t: f64, grid: PdeGrid, y0: f64) -> Result<PdeColumn, AiryError> {
    let mut cols = pde_kernel_columns(a, &[t], grid, y0, None)?;
    Ok(cols.remove(0))
}

/// Thomas algorithm for `(I - h/2 A) u = rhs`.
fn solve_implicit(
    potential: &[f64],
    h: f64,
    inv_dx2: f64,
    rhs: &[f64],
    u: &mut [f64],
    c_prime: &mut [f64],
) {
    let n = rhs.len();
    let off = -0.25 * h * inv_dx2;
    let diag = |j: usize| 1.0 + 0.5 * h * (inv_dx2 + potential[j]);
    let mut denom = diag(0);
    c_prime[0] = off / denom;
    u[0] = rhs[0] / denom;
    for j in 1..n {
        denom = diag(j) - off * c_prime[j - 1];
        c_prime[j] = off / denom;
        u[j] = (rhs[j] - off * u[j - 1]) / denom;
    }
    for j in (0..n - 1).rev() {
        u[j] -= c_prime[j] * u[j + 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PdeGrid {
        PdeGrid { dx: 0.05, x_max: 45.0 }
    }

    #[test]
    fn rejects_oversized_steps() {
        let g = grid();
        let dt = 2.0 * max_stable_step(0.5, &g);
        assert!(matches!(
            pde_kernel_columns(0.5, &[0.1], g, 1.0, Some(dt)),
            Err(AiryError::StepSize { .. })
        ));
    }

    #[test]
    fn rejects_short_domain_and_off_grid_start() {
        assert!(pde_oracle(0.5, 0.1, PdeGrid { dx: 0.05, x_max: 10.0 }, 1.0).is_err());
        assert!(pde_oracle(0.5, 0.1, grid(), 1.01).is_err());
    }

    #[test]
    fn positive_with_decreasing_mass() {
        let cols = pde_kernel_columns(0.5, &[0.1, 0.5, 1.0, 2.0], grid(), 1.0, None).unwrap();
        let mut last = 1.0 + 1e-12;
        for c in &cols {
            assert!(c.values.iter().all(|v| *v >= 0.0));
            assert!(c.mass <= last);
            last = c.mass;
        }
    }
}
