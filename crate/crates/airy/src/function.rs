//! Real-argument Airy function `Ai` and its derivative.
//!
//! Three regimes:
//! * `x >= 12`: the exponentially decaying asymptotic expansion;
//! * `x <= -12`: the oscillatory asymptotic expansion;
//! * in between: a Taylor expansion of `y'' = x y` about the nearest node of
//!   a table with spacing 1/4. Nodes on `[-12, 0]` are generated by Taylor
//!   stepping leftward from the exact values at the origin; nodes on
//!   `(0, 12]` by stepping backward from the asymptotic values at `x = 12`,
//!   the direction in which `Ai` is the dominant solution.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use crate::AiryError;

/// `Ai(0) = 3^{-2/3} / Gamma(2/3)`.
pub const AI_ZERO: f64 = 0.355_028_053_887_817_239_260_063_186_004_183_2;
/// `Ai'(0) = -3^{-1/3} / Gamma(1/3)`.
pub const AI_PRIME_ZERO: f64 = -0.258_819_403_792_806_798_405_183_560_189_203;
/// Largest value of `|Ai|` on the real line (attained near `x = -1.0188`).
pub const AI_SUP: f64 = 0.535_656_656_015_700_4;

/// Arguments with `|x|` above this bound are rejected by [`airy_ai`].
pub const MAX_ABS_ARGUMENT: f64 = 1.0e3;

const ASYMPTOTIC_CUTOFF: f64 = 12.0;
const NODE_SPACING: f64 = 0.25;
const NODES_PER_SIDE: usize = 48;

/// `Ai(x)` for `|x| <= 1000`.
pub fn airy_ai(x: f64) -> Result<f64, AiryError> {
    Ok(airy_ai_deriv(x)?.0)
}

/// `(Ai(x), Ai'(x))` for `|x| <= 1000`.
pub fn airy_ai_deriv(x: f64) -> Result<(f64, f64), AiryError> {
    if !x.is_finite() || x.abs() > MAX_ABS_ARGUMENT {
        return Err(AiryError::Domain(format!(
            "Airy argument {x} outside [-{MAX_ABS_ARGUMENT}, {MAX_ABS_ARGUMENT}]"
        )));
    }
    Ok(ai_unchecked(x))
}

/// Evaluation without the domain check; callers guarantee finiteness.
pub(crate) fn ai_unchecked(x: f64) -> (f64, f64) {
    if x >= ASYMPTOTIC_CUTOFF {
        asymptotic_positive(x)
    } else if x <= -ASYMPTOTIC_CUTOFF {
        asymptotic_negative(-x)
    } else {
        let table = node_table();
        let j = (x / NODE_SPACING).round() as i64;
        let idx = (j + NODES_PER_SIDE as i64) as usize;
        let x0 = j as f64 * NODE_SPACING;
        let (y, dy) = table[idx];
        taylor_step(x0, y, dy, x - x0)
    }
}

fn node_table() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(build_nodes)
}

fn build_nodes() -> Vec<(f64, f64)> {
    let mut nodes = vec![(0.0, 0.0); 2 * NODES_PER_SIDE + 1];
    let center = NODES_PER_SIDE;
    nodes[center] = (AI_ZERO, AI_PRIME_ZERO);

    let mut state = (AI_ZERO, AI_PRIME_ZERO);
    for j in 1..=NODES_PER_SIDE {
        let x0 = -((j - 1) as f64) * NODE_SPACING;
        state = taylor_step(x0, state.0, state.1, -NODE_SPACING);
        nodes[center - j] = state;
    }

    let mut state = asymptotic_positive(ASYMPTOTIC_CUTOFF);
    nodes[2 * NODES_PER_SIDE] = state;
    for j in (1..NODES_PER_SIDE).rev() {
        let x0 = (j + 1) as f64 * NODE_SPACING;
        state = taylor_step(x0, state.0, state.1, -NODE_SPACING);
        nodes[center + j] = state;
    }
    nodes
}

/// Advances a solution of `y'' = x y` from `x0` to `x0 + h`.
fn taylor_step(x0: f64, y0: f64, dy0: f64, h: f64) -> (f64, f64) {
    // (k)(k-1) c_k = x0 c_{k-2} + c_{k-3}
    let mut c = [0.0f64, y0, dy0]; // c_{k-3}, c_{k-2}, c_{k-1}
    let mut value = y0 + dy0 * h;
    let mut deriv = dy0;
    let mut h_pow = h; // h^{k-1}
    let scale = y0.abs() + dy0.abs();
    let mut small_run = 0;
    for k in 2..120usize {
        let c_k = (x0 * c[1] + c[0]) / (k * (k - 1)) as f64;
        let dterm = k as f64 * c_k * h_pow;
        h_pow *= h;
        let term = c_k * h_pow;
        value += term;
        deriv += dterm;
        c = [c[1], c[2], c_k];
        if term.abs() <= 1e-18 * scale && dterm.abs() <= 1e-18 * scale {
            small_run += 1;
            if small_run >= 3 {
                break;
            }
        } else {
            small_run = 0;
        }
    }
    (value, deriv)
}

fn u_coefficients(count: usize) -> Vec<f64> {
    let mut u = Vec::with_capacity(count);
    u.push(1.0);
    for k in 1..count {
        let kf = k as f64;
        let ratio = (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        let prev = u[k - 1];
        u.push(prev * ratio);
    }
    u
}

fn asymptotic_coefficients() -> &'static (Vec<f64>, Vec<f64>) {
    static COEFFS: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let u = u_coefficients(40);
        let v = u
            .iter()
            .enumerate()
            .map(|(k, uk)| {
                if k == 0 {
                    1.0
                } else {
                    let kf = k as f64;
                    -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk
                }
            })
            .collect();
        (u, v)
    })
}

/// Sums `sum_k (sign)^k c_k / zeta^k` over the indices `start, start+step, ...`
/// until the terms stop decreasing or drop below `1e-17`.
fn asymptotic_sum(c: &[f64], zeta: f64, start: usize, step: usize, alternate: bool) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut sign = 1.0;
    let mut k = start;
    while k < c.len() {
        let term = c[k] / zeta.powi(k as i32);
        if term.abs() > last {
            break;
        }
        sum += sign * term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
        last = term.abs();
        if alternate {
            sign = -sign;
        }
        k += step;
    }
    sum
}

fn asymptotic_positive(x: f64) -> (f64, f64) {
    let (u, v) = asymptotic_coefficients();
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let x14 = x.sqrt().sqrt();
    let e = (-zeta).exp();
    let su = asymptotic_sum(u, zeta, 0, 1, true);
    let sv = asymptotic_sum(v, zeta, 0, 1, true);
    let norm = 1.0 / (2.0 * PI.sqrt());
    (norm * e / x14 * su, -norm * e * x14 * sv)
}

fn asymptotic_negative(z: f64) -> (f64, f64) {
    let (u, v) = asymptotic_coefficients();
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let z14 = z.sqrt().sqrt();
    let phase = zeta - FRAC_PI_4;
    let (s, c) = phase.sin_cos();
    let u_even = asymptotic_sum(u, zeta, 0, 2, true);
    let u_odd = asymptotic_sum(u, zeta, 1, 2, true);
    let v_even = asymptotic_sum(v, zeta, 0, 2, true);
    let v_odd = asymptotic_sum(v, zeta, 1, 2, true);
    let rpi = 1.0 / PI.sqrt();
    let ai = rpi / z14 * (c * u_even + s * u_odd);
    let aip = rpi * z14 * (s * v_even - c * v_odd);
    (ai, aip)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_matches_constants() {
        let (y, dy) = airy_ai_deriv(0.0).unwrap();
        assert_eq!(y, AI_ZERO);
        assert_eq!(dy, AI_PRIME_ZERO);
    }

    #[test]
    fn backward_recurrence_lands_on_origin_constants() {
        // the x > 0 half of the table is built from x = 12 downward; its first
        // node must agree with a one-step Taylor expansion from the origin
        let table = node_table();
        let from_right = table[NODES_PER_SIDE + 1];
        let from_origin = taylor_step(0.0, AI_ZERO, AI_PRIME_ZERO, NODE_SPACING);
        assert!((from_right.0 - from_origin.0).abs() < 1e-14);
        assert!((from_right.1 - from_origin.1).abs() < 1e-14);
    }

    #[test]
    fn regimes_agree_at_the_cutoffs() {
        for &x in &[ASYMPTOTIC_CUTOFF, -ASYMPTOTIC_CUTOFF] {
            let lo = ai_unchecked(x - 1e-9);
            let hi = ai_unchecked(x + 1e-9);
            let scale = lo.0.abs().max(1e-300);
            assert!(((lo.0 - hi.0) / scale).abs() < 1e-7, "x={x} {lo:?} {hi:?}");
        }
    }

    #[test]
    fn out_of_range_is_rejected() {
        assert!(airy_ai(1001.0).is_err());
        assert!(airy_ai(f64::NAN).is_err());
        assert!(airy_ai(-1000.0).is_ok());
    }

    #[test]
    fn far_right_underflows_cleanly() {
        assert_eq!(airy_ai(900.0).unwrap(), 0.0);
    }
}
