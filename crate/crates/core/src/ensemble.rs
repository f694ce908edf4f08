//! Problem instances, path containers and the area functional.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{FloorCeiling, Potential, Profile};

/// Endpoint data of an ensemble.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryData {
    /// Endpoints integrated out with no potential. Well defined because the
    /// area tilt alone confines the endpoints.
    #[default]
    Free,
    /// Endpoints pinned at `left` (time `-T`) and `right` (time `T`), top path
    /// first, in continuum units.
    Fixed { left: Vec<f64>, right: Vec<f64> },
    /// Endpoints integrated against `exp(-nu_i(x))` on the left and
    /// `exp(-eta_i(y))` on the right.
    Potential {
        left: Vec<Potential>,
        right: Vec<Potential>,
    },
}

/// A full problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TiltedEnsembleSpec {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub a: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    /// Per-path tilts overriding the geometric schedule `a * lambda^(i-1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tilts: Option<Vec<Profile>>,
    #[serde(rename = "N")]
    pub resolution: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<FloorCeiling>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ceiling: Option<FloorCeiling>,
    #[serde(default)]
    pub boundary: BoundaryData,
}

fn one() -> f64 {
    1.0
}

impl TiltedEnsembleSpec {
    /// Geometric tilts, no floor or ceiling, free boundary.
    pub fn geometric(n: usize, t: f64, a: f64, lambda: f64, resolution: u32) -> Self {
        Self {
            n,
            t,
            a,
            lambda,
            tilts: None,
            resolution,
            floor: None,
            ceiling: None,
            boundary: BoundaryData::Free,
        }
    }

    /// `T_N = floor(T N)`.
    pub fn t_n(&self) -> i64 {
        (self.t * self.resolution as f64 + 1e-9).floor() as i64
    }

    pub fn sites(&self) -> usize {
        2 * self.t_n() as usize + 1
    }

    /// Lattice times `k / N`, `k = -T_N..=T_N`.
    pub fn times(&self) -> Vec<f64> {
        let t_n = self.t_n();
        (-t_n..=t_n).map(|k| k as f64 / self.resolution as f64).collect()
    }

    /// Tilt of path `i` (0 = top) at time `t`.
    pub fn tilt(&self, i: usize, t: f64) -> f64 {
        match &self.tilts {
            Some(ps) => ps[i].eval(t),
            None => self.a * self.lambda.powi(i as i32),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n == 0 {
            return bad("need at least one path".into());
        }
        if !(self.t.is_finite() && self.t > 0.0) {
            return bad(format!("T must be positive, got {}", self.t));
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return bad(format!("a must be positive, got {}", self.a));
        }
        if !(self.lambda.is_finite() && self.lambda >= 1.0) {
            return bad(format!("lambda must be >= 1, got {}", self.lambda));
        }
        if self.resolution == 0 {
            return bad("N must be positive".into());
        }
        if self.t_n() < 1 {
            return bad(format!("T N = {} leaves no interior lattice site", self.t * self.resolution as f64));
        }
        let times = self.times();
        if let Some(ps) = &self.tilts {
            if ps.len() != self.n {
                return Err(Error::Dimension {
                    expected: self.n,
                    found: ps.len(),
                });
            }
            for p in ps {
                p.validate()?;
            }
        }
        for i in 0..self.n {
            for &t in &times {
                let r = self.tilt(i, t);
                if !(r.is_finite() && r > 0.0) {
                    return bad(format!("tilt of path {} is {r} at t = {t}; tilts must be positive", i + 1));
                }
            }
        }
        if let Some(f) = &self.floor {
            f.0.validate()?;
            if let Some(t) = times.iter().find(|&&t| f.eval(t) < 0.0) {
                return bad(format!("floor is negative at t = {t}"));
            }
        }
        if let Some(c) = &self.ceiling {
            c.0.validate()?;
            for &t in &times {
                let lo = self.floor.as_ref().map_or(0.0, |f| f.eval(t));
                if !(c.eval(t) > lo) {
                    return bad(format!("ceiling does not lie above the floor at t = {t}"));
                }
            }
        }
        match &self.boundary {
            BoundaryData::Free => {}
            BoundaryData::Fixed { left, right } => {
                for (side, xs, t) in [("left", left, -self.t), ("right", right, self.t)] {
                    if xs.len() != self.n {
                        return Err(Error::Dimension {
                            expected: self.n,
                            found: xs.len(),
                        });
                    }
                    if xs.windows(2).any(|w| !(w[0] > w[1])) || !(xs[self.n - 1] > 0.0) {
                        return bad(format!("{side} endpoints must satisfy x_1 > ... > x_n > 0"));
                    }
                    if let Some(f) = &self.floor {
                        if xs[self.n - 1] < f.eval(t) {
                            return bad(format!("{side} endpoint below the floor"));
                        }
                    }
                    if let Some(c) = &self.ceiling {
                        if xs[0] > c.eval(t) {
                            return bad(format!("{side} endpoint above the ceiling"));
                        }
                    }
                }
            }
            BoundaryData::Potential { left, right } => {
                for ps in [left, right] {
                    if ps.len() != self.n {
                        return Err(Error::Dimension {
                            expected: self.n,
                            found: ps.len(),
                        });
                    }
                    for p in ps {
                        p.validate()?;
                        if !p.is_confining() {
                            return bad(format!(
                                "potential {p:?} does not make exp(-nu) square integrable; use the free boundary"
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Validated lattice version of the instance.
    pub fn lattice(&self) -> Result<LatticeModel> {
        self.validate()?;
        let t_n = self.t_n();
        let n = self.n;
        let sites = self.sites();
        let times = self.times();
        let mut tilts = Vec::with_capacity(n * sites);
        for i in 0..n {
            tilts.extend(times.iter().map(|&t| self.tilt(i, t)));
        }
        let floor = match &self.floor {
            Some(f) => f.floor_lattice(t_n, self.resolution),
            None => vec![0; sites],
        };
        let ceiling = self
            .ceiling
            .as_ref()
            .map(|c| c.ceiling_lattice(t_n, self.resolution));
        let sqrt_n = (self.resolution as f64).sqrt();
        let boundary = match &self.boundary {
            BoundaryData::Free => LatticeBoundary::Free,
            BoundaryData::Fixed { left, right } => {
                let l: Vec<i32> = left.iter().map(|x| (x * sqrt_n).round() as i32).collect();
                let r: Vec<i32> = right
                    .iter()
                    .zip(&l)
                    .map(|(y, &li)| {
                        let ri = (y * sqrt_n).round() as i32;
                        if (ri - li).rem_euclid(2) != 0 {
                            ri + 1
                        } else {
                            ri
                        }
                    })
                    .collect();
                for (side, v, s) in [("left", &l, 0usize), ("right", &r, sites - 1)] {
                    if v.windows(2).any(|w| w[0] <= w[1]) {
                        return Err(Error::Config(format!(
                            "{side} endpoints collide after rounding to the lattice; increase N"
                        )));
                    }
                    if v[n - 1] < floor[s] || ceiling.as_ref().is_some_and(|c| v[0] > c[s]) {
                        return Err(Error::Config(format!(
                            "{side} endpoints violate the lattice floor or ceiling"
                        )));
                    }
                }
                LatticeBoundary::Fixed { left: l, right: r }
            }
            BoundaryData::Potential { left, right } => LatticeBoundary::Potential {
                left: left.clone(),
                right: right.clone(),
            },
        };
        Ok(LatticeModel {
            n,
            t_n,
            resolution: self.resolution,
            tilts,
            floor,
            ceiling,
            boundary,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }
}

/// Boundary data in lattice units.
#[derive(Debug, Clone, PartialEq)]
pub enum LatticeBoundary {
    Free,
    Fixed { left: Vec<i32>, right: Vec<i32> },
    Potential {
        left: Vec<Potential>,
        right: Vec<Potential>,
    },
}

impl LatticeBoundary {
    /// Whether the endpoint sites are resampled by the dynamics.
    pub fn moves_endpoints(&self) -> bool {
        !matches!(self, LatticeBoundary::Fixed { .. })
    }
}

/// An instance pre-scaled to lattice units: tilts per (path, site), integer
/// floor and ceiling, integer or potential boundary data.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeModel {
    pub n: usize,
    pub t_n: i64,
    pub resolution: u32,
    /// Row-major `n x sites`.
    pub tilts: Vec<f64>,
    pub floor: Vec<i32>,
    pub ceiling: Option<Vec<i32>>,
    pub boundary: LatticeBoundary,
}

impl LatticeModel {
    pub fn sites(&self) -> usize {
        2 * self.t_n as usize + 1
    }

    pub fn sqrt_n(&self) -> f64 {
        (self.resolution as f64).sqrt()
    }

    pub fn tilt(&self, i: usize, site: usize) -> f64 {
        self.tilts[i * self.sites() + site]
    }

    /// Parity class (0 or 1) of path `i` at site index `site`. Pinned
    /// endpoints fix it; otherwise path `i` has parity `n - 1 - i` at the
    /// central site, so the bottom path can touch the wall at `t = 0`.
    pub fn parity(&self, i: usize, site: usize) -> i32 {
        match &self.boundary {
            LatticeBoundary::Fixed { left, .. } => (left[i] + site as i32).rem_euclid(2),
            _ => {
                let k = site as i64 - self.t_n;
                (k + (self.n - 1 - i) as i64).rem_euclid(2) as i32
            }
        }
    }

    /// Checks every constraint of the instance, including the parity class.
    pub fn admits(&self, ens: &DiscretePathEnsemble) -> Result<()> {
        if ens.n() != self.n || ens.t_n() != self.t_n {
            return Err(Error::InvalidState(format!(
                "ensemble shape ({}, {}) does not match instance ({}, {})",
                ens.n(),
                ens.t_n(),
                self.n,
                self.t_n
            )));
        }
        ens.check_invariants()?;
        let sites = self.sites();
        let bottom = ens.row(self.n - 1);
        if let Some(k) = (0..sites).find(|&k| bottom[k] < self.floor[k]) {
            return Err(Error::InvalidState(format!("bottom path below the floor at site {k}")));
        }
        if let Some(c) = &self.ceiling {
            let top = ens.row(0);
            if let Some(k) = (0..sites).find(|&k| top[k] > c[k]) {
                return Err(Error::InvalidState(format!("top path above the ceiling at site {k}")));
            }
        }
        if let LatticeBoundary::Fixed { left, right } = &self.boundary {
            for i in 0..self.n {
                let row = ens.row(i);
                if row[0] != left[i] || row[sites - 1] != right[i] {
                    return Err(Error::InvalidState(format!("path {} misses its fixed endpoints", i + 1)));
                }
            }
        }
        for i in 0..self.n {
            if (ens.row(i)[0] - self.parity(i, 0)).rem_euclid(2) != 0 {
                return Err(Error::InvalidState(format!("path {} is in the wrong parity class", i + 1)));
            }
        }
        Ok(())
    }

    /// `-N^{-3/2} sum_i sum_k rho_i(k/N) W_i(k)` minus the endpoint
    /// potentials.
    pub fn log_weight(&self, ens: &DiscretePathEnsemble) -> Result<f64> {
        self.admits(ens)?;
        let sites = self.sites();
        let scale = (self.resolution as f64).powf(-1.5);
        let mut area = 0.0;
        for i in 0..self.n {
            let row = ens.row(i);
            let tilt = &self.tilts[i * sites..(i + 1) * sites];
            area += row.iter().zip(tilt).map(|(&w, &r)| r * w as f64).sum::<f64>();
        }
        let mut lw = -scale * area;
        if let LatticeBoundary::Potential { left, right } = &self.boundary {
            let s = self.sqrt_n();
            for i in 0..self.n {
                let row = ens.row(i);
                lw -= left[i].eval(row[0] as f64 / s) + right[i].eval(row[sites - 1] as f64 / s);
            }
        }
        Ok(lw)
    }
}

/// `(1/N) sum_k tilt(t_k) path(t_k)`.
pub fn compute_area(path: &[f64], tilt: &[f64], resolution: f64) -> Result<f64> {
    if path.len() != tilt.len() {
        return Err(Error::Dimension {
            expected: path.len(),
            found: tilt.len(),
        });
    }
    if !(resolution > 0.0) {
        return Err(Error::Domain(format!("resolution must be positive, got {resolution}")));
    }
    Ok(path.iter().zip(tilt).map(|(x, r)| x * r).sum::<f64>() / resolution)
}

/// Log weight of `ens` under `spec`; see [`LatticeModel::log_weight`].
pub fn log_weight(ens: &DiscretePathEnsemble, spec: &TiltedEnsembleSpec) -> Result<f64> {
    spec.lattice()?.log_weight(ens)
}

/// Ordered real-valued paths on a common time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathEnsemble {
    times: Vec<f64>,
    n: usize,
    /// Row-major `n x times.len()`.
    heights: Vec<f64>,
}

impl PathEnsemble {
    pub fn new(times: Vec<f64>, n: usize, heights: Vec<f64>) -> Result<Self> {
        if heights.len() != n * times.len() {
            return Err(Error::Dimension {
                expected: n * times.len(),
                found: heights.len(),
            });
        }
        if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("time grid must be nonempty and increasing".into()));
        }
        let e = Self { times, n, heights };
        let len = e.len();
        for i in 1..n {
            let (up, lo) = (e.path(i - 1), e.path(i));
            if let Some(k) = (0..len).find(|&k| !(up[k] > lo[k])) {
                return Err(Error::InvalidState(format!(
                    "paths {i} and {} are not strictly ordered at t = {}",
                    i + 1,
                    e.times[k]
                )));
            }
        }
        Ok(e)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn path(&self, i: usize) -> &[f64] {
        let len = self.len();
        &self.heights[i * len..(i + 1) * len]
    }

    /// Index of the grid time closest to `t = 0`.
    pub fn center_index(&self) -> usize {
        let j = self.times.partition_point(|&t| t < 0.0);
        if j > 0 && (j == self.len() || self.times[j - 1].abs() < self.times[j].abs()) {
            j - 1
        } else {
            j
        }
    }

    /// `X_i(0)`, or the value at the grid time nearest 0.
    pub fn at_zero(&self, i: usize) -> f64 {
        self.path(i)[self.center_index()]
    }

    /// Grid resolution `1 / (t_1 - t_0)`.
    pub fn resolution(&self) -> f64 {
        if self.len() < 2 {
            1.0
        } else {
            1.0 / (self.times[1] - self.times[0])
        }
    }

    /// Brownian rescaling `t -> X(gamma t) / sqrt(gamma)`: grid times are
    /// divided by `gamma`, heights by `sqrt(gamma)`. Exact, no resampling.
    pub fn rescale(&self, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Domain(format!("rescaling factor must be positive, got {gamma}")));
        }
        let s = gamma.sqrt();
        Ok(Self {
            times: self.times.iter().map(|t| t / gamma).collect(),
            n: self.n,
            heights: self.heights.iter().map(|x| x / s).collect(),
        })
    }

    /// [`Self::rescale`] followed by linear interpolation onto `target`,
    /// which must lie inside the rescaled time range.
    pub fn rescale_onto(&self, gamma: f64, target: &[f64]) -> Result<Self> {
        let r = self.rescale(gamma)?;
        let (lo, hi) = (r.times[0], r.times[r.len() - 1]);
        let tol = 1e-12 * (1.0 + hi.abs());
        if target.iter().any(|&t| t < lo - tol || t > hi + tol) {
            return Err(Error::Domain(format!(
                "target grid leaves the rescaled range [{lo}, {hi}]"
            )));
        }
        let mut heights = Vec::with_capacity(self.n * target.len());
        for i in 0..self.n {
            let p = r.path(i);
            for &t in target {
                let j = r.times.partition_point(|&s| s <= t).clamp(1, r.len().max(2) - 1);
                if r.len() == 1 {
                    heights.push(p[0]);
                    continue;
                }
                let (t0, t1) = (r.times[j - 1], r.times[j]);
                let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
                heights.push(p[j - 1] + w * (p[j] - p[j - 1]));
            }
        }
        Self::new(target.to_vec(), self.n, heights)
    }

    /// Subtracts `xi` from every height.
    pub fn shift(&self, xi: f64) -> Self {
        Self {
            times: self.times.clone(),
            n: self.n,
            heights: self.heights.iter().map(|x| x - xi).collect(),
        }
    }

    /// Checks `floor <= X_n` and `X_1 <= ceiling` at every grid time.
    pub fn check_constraints(&self, floor: Option<&FloorCeiling>, ceiling: Option<&FloorCeiling>) -> Result<()> {
        let tol = 1e-12;
        if let Some(f) = floor {
            let bottom = self.path(self.n - 1);
            if let Some(k) = (0..self.len()).find(|&k| bottom[k] < f.eval(self.times[k]) - tol) {
                return Err(Error::InvalidState(format!("below the floor at t = {}", self.times[k])));
            }
        }
        if let Some(c) = ceiling {
            let top = self.path(0);
            if let Some(k) = (0..self.len()).find(|&k| top[k] > c.eval(self.times[k]) + tol) {
                return Err(Error::InvalidState(format!("above the ceiling at t = {}", self.times[k])));
            }
        }
        Ok(())
    }
}

/// `n` lattice paths with unit increments on sites `-T_N..=T_N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiscretePathEnsemble {
    n: usize,
    t_n: i64,
    /// Row-major `n x (2 T_N + 1)`.
    w: Vec<i32>,
    /// Parity of each path at the left and right endpoints.
    parity: Vec<[u8; 2]>,
}

impl DiscretePathEnsemble {
    pub fn new(n: usize, t_n: i64, w: Vec<i32>) -> Result<Self> {
        let sites = 2 * t_n as usize + 1;
        if t_n < 0 || w.len() != n * sites {
            return Err(Error::Dimension {
                expected: n * sites,
                found: w.len(),
            });
        }
        let parity = (0..n)
            .map(|i| {
                let row = &w[i * sites..(i + 1) * sites];
                [row[0].rem_euclid(2) as u8, row[sites - 1].rem_euclid(2) as u8]
            })
            .collect();
        let e = Self { n, t_n, w, parity };
        e.check_invariants()?;
        Ok(e)
    }

    pub fn from_rows(rows: &[Vec<i32>]) -> Result<Self> {
        let sites = rows.first().map_or(0, Vec::len);
        if sites % 2 == 0 || rows.iter().any(|r| r.len() != sites) {
            return Err(Error::Domain("rows must share an odd length".into()));
        }
        Self::new(rows.len(), (sites / 2) as i64, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_n(&self) -> i64 {
        self.t_n
    }

    pub fn sites(&self) -> usize {
        2 * self.t_n as usize + 1
    }

    pub fn heights(&self) -> &[i32] {
        &self.w
    }

    pub fn row(&self, i: usize) -> &[i32] {
        let s = self.sites();
        &self.w[i * s..(i + 1) * s]
    }

    /// `W_i` at site index `site` (site `k` has index `k + T_N`).
    #[inline]
    pub fn get(&self, i: usize, site: usize) -> i32 {
        self.w[i * self.sites() + site]
    }

    #[inline]
    pub(crate) fn heights_mut(&mut self) -> &mut [i32] {
        &mut self.w
    }

    pub fn endpoint_parity(&self) -> &[[u8; 2]] {
        &self.parity
    }

    pub fn check_invariants(&self) -> Result<()> {
        let s = self.sites();
        for i in 0..self.n {
            let row = self.row(i);
            if let Some(k) = (1..s).find(|&k| (row[k] - row[k - 1]).abs() != 1) {
                return Err(Error::InvalidState(format!("path {} has a non-unit step at site {k}", i + 1)));
            }
            let p = [row[0].rem_euclid(2) as u8, row[s - 1].rem_euclid(2) as u8];
            if p != self.parity[i] {
                return Err(Error::InvalidState(format!("endpoint parity of path {} changed", i + 1)));
            }
        }
        let bottom = self.row(self.n - 1);
        if let Some(k) = (0..s).find(|&k| bottom[k] < 0) {
            return Err(Error::InvalidState(format!("bottom path below the wall at site {k}")));
        }
        for i in 1..self.n {
            let (up, lo) = (self.row(i - 1), self.row(i));
            if let Some(k) = (0..s).find(|&k| lo[k] >= up[k]) {
                return Err(Error::InvalidState(format!(
                    "paths {i} and {} touch at site {k}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Rescaled paths `W(k) / sqrt(N)` at times `k / N`.
    pub fn to_paths(&self, resolution: u32) -> PathEnsemble {
        let s = (resolution as f64).sqrt();
        let times = (-self.t_n..=self.t_n)
            .map(|k| k as f64 / resolution as f64)
            .collect();
        PathEnsemble {
            times,
            n: self.n,
            heights: self.w.iter().map(|&w| w as f64 / s).collect(),
        }
    }

    /// Every height lowered by the lattice amount `s`.
    pub fn shifted(&self, s: i32) -> Result<Self> {
        Self::new(self.n, self.t_n, self.w.iter().map(|&w| w - s).collect())
    }

    /// Largest pointwise gap `|W_i(k) - V_i(k)|`.
    pub fn distance(&self, other: &Self) -> i32 {
        self.w
            .iter()
            .zip(&other.w)
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or(0)
    }

    /// Whether `self <= other` at every path and site.
    pub fn below(&self, other: &Self) -> bool {
        self.w.iter().zip(&other.w).all(|(a, b)| a <= b)
    }
}
