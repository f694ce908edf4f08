//! Cross-checks of the Airy numerics against routes that share no code with
//! the implementation: the Maclaurin series of `Ai`, bisection on that series,
//! finite differences and brute-force quadrature.

use tiltlab_airy::quad::{breakpoints, integrate_with_breaks, QuadTolerance};
use tiltlab_airy::{airy_ai, airy_ai_deriv, airy_zero, pde_kernel_columns, AirySpectrum, PdeGrid};

/// `Ai(x) = Ai(0) f(x) + Ai'(0) g(x)` with the two Maclaurin series of
/// `y'' = x y`, summed to machine precision.
fn maclaurin_ai(x: f64) -> f64 {
    let ai0 = 0.355_028_053_887_817_239_26;
    let aip0 = -0.258_819_403_792_806_798_41;
    let x3 = x * x * x;
    let (mut f, mut tf) = (1.0, 1.0);
    let (mut g, mut tg) = (x, x);
    for k in 1..200 {
        let kf = k as f64;
        tf *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        tg *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        f += tf;
        g += tg;
        if tf.abs() < 1e-20 && tg.abs() < 1e-20 {
            break;
        }
    }
    ai0 * f + aip0 * g
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn value_at_origin() {
    let expected = maclaurin_ai(0.0);
    assert!((expected - 0.355_028_053_9).abs() < 1e-10);
    assert!((airy_ai(0.0).unwrap() - expected).abs() < 1e-15);
}

#[test]
fn matches_maclaurin_series_across_switchover() {
    // envelope-relative error: near zeros a pointwise relative error is meaningless
    let mut x = -6.0;
    while x <= 4.0 {
        let reference = maclaurin_ai(x);
        let envelope = reference.abs().max(0.1 * (x.abs() + 1.0).powf(-0.25).min(1.0) * (-(2.0 / 3.0) * x.max(0.0).powf(1.5)).exp());
        let err = (airy_ai(x).unwrap() - reference).abs() / envelope;
        assert!(err < 1e-10, "x={x} err={err}");
        x += 0.0625;
    }
}

#[test]
fn decays_monotonically_on_the_right() {
    let mut last = airy_ai(0.0).unwrap();
    for j in 1..400 {
        let v = airy_ai(j as f64 * 0.25).unwrap();
        assert!(v > 0.0 || (v == 0.0 && last >= 0.0));
        assert!(v <= last);
        last = v;
    }
}

#[test]
fn satisfies_airy_equation() {
    let h = 2e-4;
    for &x in &[-14.0, -8.3, -1.0, 1.0, 3.7, 13.0] {
        let f = |u: f64| airy_ai(u).unwrap();
        let second = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        let envelope = (x.abs() + 1.0).powf(-0.25) * (-(2.0 / 3.0) * x.max(0.0).powf(1.5)).exp();
        let rel = (second - x * f(x)).abs() / ((x.abs() + 1.0) * envelope);
        assert!(rel < 1e-6, "x={x} rel={rel}");
    }
}

#[test]
fn derivative_matches_central_difference() {
    let h = 1e-5;
    for &x in &[-20.0, -5.5, -0.3, 0.7, 6.0, 15.0] {
        let fd = (airy_ai(x + h).unwrap() - airy_ai(x - h).unwrap()) / (2.0 * h);
        let d = airy_ai_deriv(x).unwrap().1;
        assert!((fd - d).abs() <= 1e-7 * d.abs().max(1e-6), "x={x} fd={fd} d={d}");
    }
}

#[test]
fn first_zeros_match_bisection_oracle() {
    let w0 = bisect(|w| maclaurin_ai(-w), 2.0, 3.0);
    let w1 = bisect(|w| maclaurin_ai(-w), 4.0, 5.0);
    assert!((w0 - 2.338_107_410_459_767).abs() < 1e-12);
    assert!((w1 - 4.087_949_444_130_970).abs() < 1e-12);
    assert!((airy_zero(0).unwrap() - w0).abs() < 1e-10);
    assert!((airy_zero(1).unwrap() - w1).abs() < 1e-10);
    assert!(airy_zero(0).unwrap() < airy_zero(1).unwrap());
    assert!(airy_zero(1).unwrap() < airy_zero(2).unwrap());
}

fn inner(s: &AirySpectrum, l: usize, m: usize) -> f64 {
    let end = s.support_end();
    integrate_with_breaks(
        |x| s.eigenfunction(l, x) * s.eigenfunction(m, x),
        &breakpoints(0.0, end, 0.25),
        QuadTolerance {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_intervals: 20_000,
        },
    )
    .unwrap()
    .value
}

#[test]
fn ground_state_is_normalized() {
    for &a in &[0.5, 2.0] {
        let s = AirySpectrum::new(a, 2).unwrap();
        assert!((inner(&s, 0, 0) - 1.0).abs() < 1e-8);
    }
}

#[test]
fn gram_matrix_is_identity() {
    let s = AirySpectrum::new(0.5, 10).unwrap();
    for l in 0..10 {
        for m in 0..=l {
            let expected = if l == m { 1.0 } else { 0.0 };
            assert!((inner(&s, l, m) - expected).abs() < 1e-6, "({l},{m})");
        }
    }
}

#[test]
fn eigen_relation_residual() {
    for &a in &[0.5, 1.3] {
        let s = AirySpectrum::new(a, 6).unwrap();
        let h = 1e-3;
        for l in 0..6 {
            let lam = s.lambdas()[l];
            let mut worst: f64 = 0.0;
            let mut scale: f64 = 0.0;
            let mut x = 0.1;
            while x <= 6.0 {
                let k = |u| s.eigenfunction(l, u);
                let second = (k(x + h) - 2.0 * k(x) + k(x - h)) / (h * h);
                let residual = 0.5 * second - a * x * k(x) + lam * k(x);
                worst = worst.max(residual.abs());
                scale = scale.max((lam * k(x)).abs());
                x += 0.05;
            }
            assert!(worst / scale < 1e-5, "a={a} l={l} rel={}", worst / scale);
        }
    }
}

#[test]
fn kernel_symmetry_and_semigroup() {
    let s = AirySpectrum::for_times(0.5, 0.5, 1e-13).unwrap();
    let (t1, t2) = (0.5, 0.8);
    for &(x, y) in &[(0.5, 1.5), (1.0, 1.0), (2.0, 0.7)] {
        let zxy = s.heat_kernel(t1, x, y).unwrap().value;
        let zyx = s.heat_kernel(t1, y, x).unwrap().value;
        assert!((zxy - zyx).abs() <= 1e-14 * zxy.abs());
        let composed = integrate_with_breaks(
            |u| s.heat_kernel(t1, x, u).unwrap().value * s.heat_kernel(t2, u, y).unwrap().value,
            &breakpoints(0.0, 20.0, 0.5),
            QuadTolerance {
                abs_tol: 1e-12,
                rel_tol: 1e-10,
                max_intervals: 4000,
            },
        )
        .unwrap()
        .value;
        let direct = s.heat_kernel(t1 + t2, x, y).unwrap().value;
        assert!((composed - direct).abs() < 1e-6, "({x},{y}) {composed} {direct}");
    }
}

#[test]
fn large_time_factorization() {
    let s = AirySpectrum::new(0.5, 40).unwrap();
    let t = 30.0 / s.lambdas()[0];
    for &(x, y) in &[(0.5, 1.0), (1.5, 2.5), (3.0, 0.8)] {
        let z = s.heat_kernel(t, x, y).unwrap().value * (s.lambdas()[0] * t).exp();
        let limit = s.eigenfunction(0, x) * s.eigenfunction(0, y);
        assert!(((z - limit) / limit).abs() < 1e-4);
    }
}

#[test]
fn row_integral_matches_direct_quadrature_and_decays() {
    let s = AirySpectrum::for_times(0.5, 1.0, 1e-13).unwrap();
    let t = 1.0;
    // vanishes at the wall, rises, then decays
    let mut last = 0.0;
    let mut falling = false;
    let mut slopes = Vec::new();
    let mut prev_log = None;
    for j in 1..=16 {
        let x = 0.5 * j as f64;
        let r = s.kernel_row_integral(t, x).unwrap().value;
        assert!(r > 0.0, "x={x}");
        if r < last {
            falling = true;
        } else {
            assert!(!falling, "row integral rose again at x={x}");
        }
        if j <= 6 {
            let direct = integrate_with_breaks(
                |y| s.heat_kernel(t, x, y).unwrap().value,
                &breakpoints(0.0, s.support_end(), 0.5),
                QuadTolerance::default(),
            )
            .unwrap()
            .value;
            assert!(((direct - r) / r).abs() < 1e-8, "x={x}");
        }
        if let Some(p) = prev_log {
            slopes.push((r.ln() - p) / 0.5);
        }
        prev_log = Some(r.ln());
        last = r;
    }
    // far from the wall a free path pays area x t: slope -> -a t
    let tail = slopes[slopes.len() - 1];
    assert!(falling && tail < 0.0);
    assert!((tail + 0.5 * t).abs() < 0.02, "tail slope {tail}");
    assert!(s.kernel_row_integral(t, 0.0).unwrap().value == 0.0);
}

#[test]
fn total_partition_matches_double_quadrature() {
    let s = AirySpectrum::for_times(0.5, 0.25, 1e-13).unwrap();
    let half = 0.75;
    let tp = s.total_partition(half).unwrap();
    let tol = QuadTolerance {
        abs_tol: 1e-11,
        rel_tol: 1e-9,
        max_intervals: 4000,
    };
    let outer = integrate_with_breaks(
        |x| {
            integrate_with_breaks(
                |y| s.heat_kernel(2.0 * half, x, y).unwrap().value,
                &breakpoints(0.0, 40.0, 2.0),
                tol,
            )
            .unwrap()
            .value
        },
        &breakpoints(0.0, 40.0, 2.0),
        tol,
    )
    .unwrap()
    .value;
    assert!(((outer - tp.value) / tp.value).abs() < 1e-7, "{outer} vs {}", tp.value);
}

#[test]
fn total_partition_asymptotics() {
    let s = AirySpectrum::new(0.5, 40).unwrap();
    let lam0 = s.lambdas()[0];
    assert!((lam0 - 1.169_053_7).abs() < 1e-7);
    let mut last_value = f64::INFINITY;
    let mut last_gap = f64::INFINITY;
    for &two_t in &[5.0 / lam0, 12.0 / lam0, 25.0 / lam0] {
        let tp = s.total_partition(0.5 * two_t).unwrap();
        assert!(tp.value < last_value);
        let gap = tp.ratio() - 1.0;
        assert!(gap > 0.0 && gap < last_gap);
        last_value = tp.value;
        last_gap = gap;
    }
    assert!(last_gap < 0.01);
}

#[test]
fn pde_oracle_agrees_with_spectral_kernel() {
    let a = 0.5;
    let s = AirySpectrum::new(a, 40).unwrap();
    let grid = PdeGrid { dx: 0.01, x_max: 45.0 };
    let cols = pde_kernel_columns(a, &[1.0, 2.0], grid, 1.5, None).unwrap();
    for col in &cols {
        for &x in &[0.5, 1.0, 2.0, 3.0] {
            let j = grid.node_of(x).unwrap();
            let spectral = s.heat_kernel(col.time, x, 1.5).unwrap().value;
            let rel = ((col.values[j] - spectral) / spectral).abs();
            assert!(rel < 1e-3, "t={} x={x} rel={rel}", col.time);
        }
    }
}
