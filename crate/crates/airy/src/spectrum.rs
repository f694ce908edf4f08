//! Dirichlet spectrum of `(1/2) d^2/dx^2 - a x` on the half line and the
//! heat-kernel quantities built from it.
//!
//! The eigenpairs are `kappa_l(x) = c_l Ai(b x - omega_l)` with
//! `b = (2a)^{1/3}` and eigenvalue `-lambda_l`, `lambda_l = (a / b) omega_l`.
//! Normalization constants are computed by quadrature; the closed form
//! `c_l = sqrt(b) / |Ai'(-omega_l)|` is exposed separately as a cross-check.

use std::f64::consts::PI;

use serde::Serialize;

use crate::function::{ai_unchecked, AI_SUP};
use crate::quad::{breakpoints, integrate_with_breaks, QuadTolerance};
use crate::zeros::{airy_zeros, zero_lower_bound, MAX_ZERO_INDEX};
use crate::AiryError;

/// Beyond `u = RIGHT_CUTOFF` the integrands `Ai(u)` and `Ai(u)^2` are below
/// 1e-16 relative to their bulk and are dropped.
const RIGHT_CUTOFF: f64 = 14.0;

/// Bound on `|int_y^inf Ai(u) du|` over all real `y`.
const AI_PARTIAL_INTEGRAL_SUP: f64 = 1.5;

/// A truncated kernel sum together with a bound on the discarded tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEvaluation {
    pub value: f64,
    pub truncation_bound: f64,
}

/// `Z_T = int int Z_{0,2T}(x, y) dx dy` and its large-`T` prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TotalPartition {
    pub half_width: f64,
    pub value: f64,
    pub truncation_bound: f64,
    /// `exp(-2 lambda_0 T) (int kappa_0)^2`
    pub asymptotic: f64,
}

impl TotalPartition {
    pub fn ratio(&self) -> f64 {
        self.value / self.asymptotic
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AirySpectrum {
    a: f64,
    b: f64,
    omegas: Vec<f64>,
    lambdas: Vec<f64>,
    norms: Vec<f64>,
    integrals: Vec<f64>,
    t_min: f64,
}

impl AirySpectrum {
    pub const DEFAULT_LEN: usize = 40;
    pub const DEFAULT_T_MIN: f64 = 0.05;

    /// First `len` eigenpairs for tilt `a`.
    pub fn new(a: f64, len: usize) -> Result<Self, AiryError> {
        if !(a.is_finite() && a > 0.0) {
            return Err(AiryError::Domain(format!("tilt must be positive, got {a}")));
        }
        if len == 0 {
            return Err(AiryError::Domain("spectrum needs at least one eigenpair".into()));
        }
        let b = (2.0 * a).cbrt();
        let omegas = airy_zeros(len)?;
        let lambdas = omegas.iter().map(|w| a / b * w).collect();
        let tol = QuadTolerance {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_intervals: 20_000,
        };
        let mut norms = Vec::with_capacity(len);
        let mut integrals = Vec::with_capacity(len);
        for &w in &omegas {
            let br = breakpoints(-w, RIGHT_CUTOFF, 0.5);
            let sq = integrate_with_breaks(|u| ai_unchecked(u).0.powi(2), &br, tol)?;
            let c = (b / sq.value).sqrt();
            let lin = integrate_with_breaks(|u| ai_unchecked(u).0, &br, tol)?;
            norms.push(c);
            integrals.push(c / b * lin.value);
        }
        Ok(Self {
            a,
            b,
            omegas,
            lambdas,
            norms,
            integrals,
            t_min: Self::DEFAULT_T_MIN,
        })
    }

    /// Smallest spectrum (at least [`Self::DEFAULT_LEN`] pairs) whose
    /// heat-kernel truncation bound at time `t_min` is below `tail_tol`.
    pub fn for_times(a: f64, t_min: f64, tail_tol: f64) -> Result<Self, AiryError> {
        if !(a.is_finite() && a > 0.0 && t_min > 0.0) {
            return Err(AiryError::Domain(format!(
                "need a > 0 and t_min > 0, got a={a}, t_min={t_min}"
            )));
        }
        let b = (2.0 * a).cbrt();
        let mut len = Self::DEFAULT_LEN;
        while tail_bound(a, b, len, t_min) * sup_eigen_sq(b, len) > tail_tol {
            len += len / 4;
            if len >= MAX_ZERO_INDEX {
                return Err(AiryError::Range {
                    index: len,
                    limit: MAX_ZERO_INDEX,
                });
            }
        }
        Ok(Self::new(a, len)?.with_t_min(t_min))
    }

    /// Sets the smallest time accepted by the kernel evaluations.
    pub fn with_t_min(mut self, t_min: f64) -> Self {
        self.t_min = t_min;
        self
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn len(&self) -> usize {
        self.omegas.len()
    }
    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
    pub fn t_min(&self) -> f64 {
        self.t_min
    }
    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }
    pub fn norms(&self) -> &[f64] {
        &self.norms
    }
    /// `int_0^inf kappa_l(x) dx` for each retained eigenfunction.
    pub fn integrals(&self) -> &[f64] {
        &self.integrals
    }

    /// `sqrt(b) / |Ai'(-omega_l)|`.
    pub fn closed_form_norm(&self, ell: usize) -> f64 {
        self.b.sqrt() / ai_unchecked(-self.omegas[ell]).1.abs()
    }

    /// Point beyond which every retained eigenfunction is negligible.
    pub fn support_end(&self) -> f64 {
        (self.omegas[self.len() - 1] + RIGHT_CUTOFF) / self.b
    }

    /// `kappa_l(x)`; exactly zero at the Dirichlet boundary.
    pub fn eigenfunction(&self, ell: usize, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let u = self.b * x - self.omegas[ell];
        if u > RIGHT_CUTOFF * 8.0 {
            return 0.0;
        }
        self.norms[ell] * ai_unchecked(u).0
    }

    fn check_time(&self, t: f64) -> Result<(), AiryError> {
        if !(t.is_finite() && t >= self.t_min) {
            return Err(AiryError::TimeTooSmall { t, t_min: self.t_min });
        }
        Ok(())
    }

    fn check_point(x: f64) -> Result<(), AiryError> {
        if !(x.is_finite() && x >= 0.0) {
            return Err(AiryError::Domain(format!("kernel argument must be >= 0, got {x}")));
        }
        Ok(())
    }

    /// Bound on the discarded part of the eigen-expansion of `Z_{0,t}(x, y)`.
    pub fn truncation_bound(&self, t: f64) -> f64 {
        tail_bound(self.a, self.b, self.len(), t) * sup_eigen_sq(self.b, self.len())
    }

    /// Dirichlet heat kernel `Z_{0,t}(x, y) = sum_m exp(-lambda_m t) kappa_m(x) kappa_m(y)`.
    pub fn heat_kernel(&self, t: f64, x: f64, y: f64) -> Result<KernelEvaluation, AiryError> {
        self.check_time(t)?;
        Self::check_point(x)?;
        Self::check_point(y)?;
        let value = (0..self.len())
            .map(|m| (-self.lambdas[m] * t).exp() * self.eigenfunction(m, x) * self.eigenfunction(m, y))
            .sum();
        Ok(KernelEvaluation {
            value,
            truncation_bound: self.truncation_bound(t),
        })
    }

    /// `int_0^inf Z_{0,t}(x, y) dy`, using the quadrature values of
    /// `int kappa_m`.
    pub fn kernel_row_integral(&self, t: f64, x: f64) -> Result<KernelEvaluation, AiryError> {
        self.check_time(t)?;
        Self::check_point(x)?;
        let value = (0..self.len())
            .map(|m| (-self.lambdas[m] * t).exp() * self.eigenfunction(m, x) * self.integrals[m])
            .sum();
        let c_sq = self.b * PI / self.omegas[self.len() - 1].sqrt();
        let bound = tail_bound(self.a, self.b, self.len(), t)
            * AI_SUP
            * c_sq
            * AI_PARTIAL_INTEGRAL_SUP
            / self.b;
        Ok(KernelEvaluation {
            value,
            truncation_bound: bound,
        })
    }

    /// Total partition function of one path on `[-T, T]` with free ends.
    pub fn total_partition(&self, half_width: f64) -> Result<TotalPartition, AiryError> {
        if !(half_width.is_finite() && half_width >= 3.0 * self.t_min) {
            return Err(AiryError::TimeTooSmall {
                t: half_width,
                t_min: 3.0 * self.t_min,
            });
        }
        let t = 2.0 * half_width;
        let value = (0..self.len())
            .map(|m| (-self.lambdas[m] * t).exp() * self.integrals[m].powi(2))
            .sum();
        let c_sq = self.b * PI / self.omegas[self.len() - 1].sqrt();
        let bound = tail_bound(self.a, self.b, self.len(), t)
            * (c_sq / self.b * AI_PARTIAL_INTEGRAL_SUP).powi(2);
        let asymptotic = (-self.lambdas[0] * t).exp() * self.integrals[0].powi(2);
        Ok(TotalPartition {
            half_width,
            value,
            truncation_bound: bound,
            asymptotic,
        })
    }

    /// `int_0^x kappa_0(u)^2 du`, the distribution function of the squared
    /// ground state.
    pub fn ground_state_cdf(&self, x: f64) -> Result<f64, AiryError> {
        if x.is_nan() {
            return Err(AiryError::Domain("NaN argument".into()));
        }
        if x <= 0.0 {
            return Ok(0.0);
        }
        if x >= self.support_end() {
            return Ok(1.0);
        }
        let q = integrate_with_breaks(
            |u| self.eigenfunction(0, u).powi(2),
            &breakpoints(0.0, x, 0.5),
            QuadTolerance {
                abs_tol: 1e-15,
                rel_tol: 1e-13,
                max_intervals: 4000,
            },
        )?;
        Ok(q.value.clamp(0.0, 1.0))
    }

    /// Ground-state CDF at each of the ascending points `xs`, integrating
    /// only between consecutive points.
    pub fn ground_state_cdf_sorted(&self, xs: &[f64]) -> Result<Vec<f64>, AiryError> {
        let tol = QuadTolerance {
            abs_tol: 1e-15,
            rel_tol: 1e-13,
            max_intervals: 4000,
        };
        let end = self.support_end();
        let mut out = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        let mut prev = 0.0f64;
        for &x in xs {
            if x.is_nan() {
                return Err(AiryError::Domain("NaN argument".into()));
            }
            if x < prev {
                return Err(AiryError::Domain("points must be ascending".into()));
            }
            let target = x.clamp(0.0, end);
            if target > prev {
                let q = integrate_with_breaks(
                    |u| self.eigenfunction(0, u).powi(2),
                    &breakpoints(prev, target, 0.5),
                    tol,
                )?;
                acc += q.value;
                prev = target;
            }
            out.push(acc.clamp(0.0, 1.0));
        }
        Ok(out)
    }
}

/// Upper bound on `sup_x kappa_l(x)^2` for every `l >= len`.
fn sup_eigen_sq(b: f64, len: usize) -> f64 {
    // c_l^2 = b / Ai'(-omega_l)^2 <= b pi / sqrt(omega_l), omega_l increasing
    AI_SUP * AI_SUP * b * PI / zero_lower_bound(len).sqrt()
}

/// `sum_{l >= len} exp(-(a/b) w_l t)`, with `w_l` the lower bound
/// `(3 pi (4l + 3) / 8)^{2/3}` on `omega_l`.
fn tail_bound(a: f64, b: f64, len: usize, t: f64) -> f64 {
    let rate = a / b * t;
    let mut sum = 0.0;
    let mut ell = len;
    loop {
        let w = zero_lower_bound(ell);
        let term = (-rate * w).exp();
        sum += term;
        if term < 1e-30 * sum || term == 0.0 || ell > len + 10_000_000 {
            break;
        }
        ell += 1;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b_is_one_for_half_tilt() {
        let s = AirySpectrum::new(0.5, 3).unwrap();
        assert!((s.b() - 1.0).abs() < 1e-15);
        assert!((s.lambdas()[0] - 0.5 * s.omegas()[0]).abs() < 1e-15);
    }

    #[test]
    fn quadrature_norms_match_closed_form() {
        let s = AirySpectrum::new(0.7, 12).unwrap();
        for l in 0..s.len() {
            let rel = (s.norms()[l] - s.closed_form_norm(l)).abs() / s.norms()[l];
            assert!(rel < 1e-9, "l={l} rel={rel}");
        }
    }

    #[test]
    fn dirichlet_boundary_is_exact() {
        let s = AirySpectrum::new(2.0, 5).unwrap();
        for l in 0..5 {
            assert_eq!(s.eigenfunction(l, 0.0), 0.0);
        }
    }

    #[test]
    fn small_times_are_refused() {
        let s = AirySpectrum::new(0.5, 10).unwrap();
        assert!(matches!(
            s.heat_kernel(0.01, 1.0, 1.0),
            Err(AiryError::TimeTooSmall { .. })
        ));
        assert!(s.heat_kernel(1.0, -0.5, 1.0).is_err());
    }

    #[test]
    fn adaptive_length_meets_tail_target() {
        let s = AirySpectrum::for_times(0.5, 1.0, 1e-12).unwrap();
        assert!(s.truncation_bound(1.0) <= 1e-12);
        assert!(s.len() >= AirySpectrum::DEFAULT_LEN);
    }

    #[test]
    fn ground_state_cdf_limits() {
        let s = AirySpectrum::new(0.5, 1).unwrap();
        assert_eq!(s.ground_state_cdf(0.0).unwrap(), 0.0);
        assert!((s.ground_state_cdf(40.0).unwrap() - 1.0).abs() < 1e-12);
        let pts = [0.5, 1.0, 2.0, 3.0];
        let batch = s.ground_state_cdf_sorted(&pts).unwrap();
        for (x, c) in pts.iter().zip(batch) {
            assert!((s.ground_state_cdf(*x).unwrap() - c).abs() < 1e-12);
        }
    }
}
