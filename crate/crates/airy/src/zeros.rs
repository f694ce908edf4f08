//! Zeros `-omega_0 > -omega_1 > ...` of `Ai`.

use std::f64::consts::PI;

use crate::function::ai_unchecked;
use crate::AiryError;

/// Zeros with index at or above this bound lie beyond the supported
/// argument range of [`crate::airy_ai`].
pub const MAX_ZERO_INDEX: usize = 6000;

/// Leading terms of the large-index expansion of the `ell`-th zero magnitude
/// (`ell` counted from 0).
pub fn asymptotic_zero(ell: usize) -> f64 {
    let t = 3.0 * PI * (4 * ell + 3) as f64 / 8.0;
    let t2 = t.powi(-2);
    t.powf(2.0 / 3.0) * (1.0 + 5.0 / 48.0 * t2 - 5.0 / 36.0 * t2 * t2)
}

/// `(3 pi (4 ell + 3) / 8)^{2/3}`, a lower bound on `omega_ell`.
pub fn zero_lower_bound(ell: usize) -> f64 {
    (3.0 * PI * (4 * ell + 3) as f64 / 8.0).powf(2.0 / 3.0)
}

/// Magnitude `omega_ell` of the `ell`-th zero of `Ai`, located by bisection
/// inside a bracket centred on [`asymptotic_zero`].
pub fn airy_zero(ell: usize) -> Result<f64, AiryError> {
    if ell >= MAX_ZERO_INDEX {
        return Err(AiryError::Range {
            index: ell,
            limit: MAX_ZERO_INDEX,
        });
    }
    let guess = asymptotic_zero(ell);
    // a quarter of the local zero spacing
    let half_width = 0.25 * PI / guess.sqrt();
    let f = |w: f64| ai_unchecked(-w).0;
    let (mut lo, mut hi) = (guess - half_width, guess + half_width);
    let (mut f_lo, f_hi) = (f(lo), f(hi));
    if f_lo * f_hi > 0.0 {
        return Err(AiryError::Bracket { index: ell, lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The first `count` zero magnitudes.
pub fn airy_zeros(count: usize) -> Result<Vec<f64>, AiryError> {
    (0..count).map(airy_zero).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_are_increasing_and_vanish() {
        let zs = airy_zeros(60).unwrap();
        for w in zs.windows(2) {
            assert!(w[0] < w[1]);
        }
        for &z in &zs {
            assert!(ai_unchecked(-z).0.abs() < 1e-10);
        }
    }

    #[test]
    fn index_limit() {
        assert!(matches!(
            airy_zero(MAX_ZERO_INDEX),
            Err(AiryError::Range { .. })
        ));
        assert!(airy_zero(MAX_ZERO_INDEX - 1).unwrap() < 1000.0);
    }
}
