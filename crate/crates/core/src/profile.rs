//! Continuum functions of time (tilts, floors, ceilings) and boundary
//! potentials, in the units of the rescaled paths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real function of `t` used for tilts, floors and ceilings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// Piecewise-linear through `(t, value)` knots with ascending `t`,
    /// held constant outside the knot range.
    Table {
        points: Vec<[f64; 2]>,
    },
    /// `offset + scale * |t|^alpha`.
    Power {
        offset: f64,
        scale: f64,
        alpha: f64,
    },
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Table { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if t <= first[0] {
                    return first[1];
                }
                if t >= last[0] {
                    return last[1];
                }
                let j = points.partition_point(|p| p[0] <= t);
                let (p, q) = (points[j - 1], points[j]);
                let w = (t - p[0]) / (q[0] - p[0]);
                p[1] + w * (q[1] - p[1])
            }
            Profile::Power {
                offset,
                scale,
                alpha,
            } => offset + scale * t.abs().powf(*alpha),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Profile::Constant { value } if !value.is_finite() => {
                Err(Error::Config(format!("non-finite constant profile {value}")))
            }
            Profile::Table { points } => {
                if points.is_empty() {
                    return Err(Error::Config("empty profile table".into()));
                }
                if points.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
                    return Err(Error::Config("non-finite profile knot".into()));
                }
                if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(Error::Config("profile knots must have ascending times".into()));
                }
                Ok(())
            }
            Profile::Power {
                offset,
                scale,
                alpha,
            } if !(offset.is_finite() && scale.is_finite() && alpha.is_finite() && *alpha >= 0.0) => {
                Err(Error::Config("power profile needs finite offset/scale and alpha >= 0".into()))
            }
            _ => Ok(()),
        }
    }

    /// Values at `t_k = k / resolution` for `k = -t_n..=t_n`.
    pub fn sample(&self, t_n: i64, resolution: u32) -> Vec<f64> {
        (-t_n..=t_n)
            .map(|k| self.eval(k as f64 / resolution as f64))
            .collect()
    }
}

/// Floor or ceiling: a [`Profile`] in continuum height units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FloorCeiling(pub Profile);

impl FloorCeiling {
    pub fn constant(value: f64) -> Self {
        FloorCeiling(Profile::constant(value))
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.eval(t)
    }

    pub fn sample(&self, t_n: i64, resolution: u32) -> Vec<f64> {
        self.0.sample(t_n, resolution)
    }

    /// Smallest lattice height `h` with `h / sqrt(N) >= floor(t_k)`, never
    /// below the wall.
    pub fn floor_lattice(&self, t_n: i64, resolution: u32) -> Vec<i32> {
        let s = (resolution as f64).sqrt();
        self.sample(t_n, resolution)
            .into_iter()
            .map(|v| ((v * s - 1e-9).ceil() as i32).max(0))
            .collect()
    }

    /// Largest lattice height `h` with `h / sqrt(N) <= ceiling(t_k)`.
    pub fn ceiling_lattice(&self, t_n: i64, resolution: u32) -> Vec<i32> {
        let s = (resolution as f64).sqrt();
        self.sample(t_n, resolution)
            .into_iter()
            .map(|v| {
                let h = (v * s + 1e-9).floor();
                h.clamp(i32::MIN as f64, (i32::MAX / 2) as f64) as i32
            })
            .collect()
    }
}

/// Nondecreasing boundary potential `nu(x)` on the half line; the endpoint
/// weight is `exp(-nu(x))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    Zero,
    Linear { slope: f64 },
    Quadratic { coef: f64 },
}

impl Potential {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::Linear { slope } => slope * x,
            Potential::Quadratic { coef } => coef * x * x,
        }
    }

    /// `nu((h + 1) / sqrt(N)) - nu((h - 1) / sqrt(N))`.
    pub fn lattice_gradient(&self, h: i32, sqrt_n: f64) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::Linear { slope } => 2.0 * slope / sqrt_n,
            Potential::Quadratic { coef } => 4.0 * coef * h as f64 / (sqrt_n * sqrt_n),
        }
    }

    /// Whether `exp(-nu)` is square integrable on the half line.
    pub fn is_confining(&self) -> bool {
        match *self {
            Potential::Zero => false,
            Potential::Linear { slope } => slope > 0.0,
            Potential::Quadratic { coef } => coef > 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Potential::Zero => true,
            Potential::Linear { slope } => slope.is_finite() && slope >= 0.0,
            Potential::Quadratic { coef } => coef.is_finite() && coef >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("potential {self:?} is not nondecreasing on the half line")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_interpolates_and_extrapolates_flat() {
        let p = Profile::Table {
            points: vec![[-1.0, 0.0], [0.0, 2.0], [2.0, 0.0]],
        };
        p.validate().unwrap();
        assert_eq!(p.eval(-5.0), 0.0);
        assert_eq!(p.eval(-0.5), 1.0);
        assert_eq!(p.eval(1.0), 1.0);
        assert_eq!(p.eval(9.0), 0.0);
    }

    #[test]
    fn rejects_unsorted_table() {
        let p = Profile::Table {
            points: vec![[0.0, 0.0], [0.0, 1.0]],
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn lattice_rounding_is_conservative() {
        // sqrt(4) = 2: 0.3 -> 0.6 lattice units
        let f = FloorCeiling::constant(0.3);
        assert_eq!(f.floor_lattice(1, 4), vec![1, 1, 1]);
        assert_eq!(f.ceiling_lattice(1, 4), vec![0, 0, 0]);
        let exact = FloorCeiling::constant(1.5);
        assert_eq!(exact.floor_lattice(0, 4), vec![3]);
        assert_eq!(exact.ceiling_lattice(0, 4), vec![3]);
        assert_eq!(FloorCeiling::constant(-2.0).floor_lattice(0, 1), vec![0]);
    }

    #[test]
    fn potential_gradients() {
        let s = 2.0;
        for h in 0..10 {
            for p in [
                Potential::Zero,
                Potential::Linear { slope: 1.5 },
                Potential::Quadratic { coef: 0.7 },
            ] {
                let direct = p.eval((h as f64 + 1.0) / s) - p.eval((h as f64 - 1.0) / s);
                assert!((p.lattice_gradient(h, s) - direct).abs() < 1e-12);
            }
        }
        assert!(!Potential::Zero.is_confining());
        assert!(Potential::Linear { slope: -1.0 }.validate().is_err());
    }
}
