//! Heat-bath dynamics on ordered lattice paths, extremal configurations and
//! the synchronized two-chain coupling.
//!
//! One elementary step picks a path `i`, a site `k` and a uniform `U`. At an
//! interior site with `W_i(k-1) = W_i(k+1) = h` the height becomes `h + 1`
//! if `U <= p` and `h - 1` otherwise, where `p` is the conditional
//! probability of the upper value given the neighbours. Endpoint sites are
//! only picked when the endpoints are not pinned, and then follow the same
//! rule with the endpoint potential folded into `p`. A proposal that breaks
//! the ordering, the floor or the ceiling is rejected.

use crate::ensemble::{DiscretePathEnsemble, LatticeBoundary, LatticeModel, TiltedEnsembleSpec};
use crate::error::{Error, Result};
use crate::profile::Potential;
use crate::rng::RngStream;

/// `exp(-x) / (1 + exp(-x))` without overflow.
#[inline]
fn logistic_down(x: f64) -> f64 {
    if x >= 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Probability of the upper value at an interior site with tilt `rho`.
pub fn interior_prob(rho: f64, resolution: u32) -> Result<f64> {
    boundary_prob(rho, resolution, 0.0)
}

/// Probability of the upper value at an endpoint whose potential has lattice
/// gradient `grad` at the neighbouring height.
pub fn boundary_prob(rho: f64, resolution: u32, grad: f64) -> Result<f64> {
    if !(rho > 0.0) || resolution == 0 || grad.is_nan() {
        return Err(Error::Domain(format!(
            "need rho > 0 and N >= 1, got rho = {rho}, N = {resolution}, grad = {grad}"
        )));
    }
    let c = rho * (resolution as f64).powf(-1.5);
    Ok(logistic_down(2.0 * c + grad))
}

/// Result of one elementary step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Interior site whose neighbours differ: the height is forced.
    Skipped,
    Rejected,
    Accepted,
}

/// The two candidate heights at a site and the probability of the upper one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteRule {
    pub up: i32,
    pub down: i32,
    pub p_up: f64,
}

/// Per-instance tables for the dynamics.
#[derive(Debug, Clone)]
pub struct HeatBathKernel {
    spec: TiltedEnsembleSpec,
    model: LatticeModel,
    n: usize,
    sites: usize,
    /// First selectable site index: 0 when endpoints move, 1 otherwise.
    first: usize,
    /// Number of selectable sites per path.
    span: usize,
    /// Row-major `n x sites` interior probabilities.
    p_up: Vec<f64>,
    /// `rho_i(k/N) N^{-3/2}` at the two endpoints, per path.
    c_left: Vec<f64>,
    c_right: Vec<f64>,
    potentials: Option<(Vec<Potential>, Vec<Potential>)>,
    floor: Vec<i32>,
    /// `i32::MAX` where there is no ceiling.
    ceiling: Vec<i32>,
}

impl HeatBathKernel {
    pub fn new(spec: &TiltedEnsembleSpec) -> Result<Self> {
        let model = spec.lattice()?;
        let n = model.n;
        let sites = model.sites();
        let mut p_up = Vec::with_capacity(n * sites);
        for i in 0..n {
            for k in 0..sites {
                p_up.push(interior_prob(model.tilt(i, k), model.resolution)?);
            }
        }
        let scale = (model.resolution as f64).powf(-1.5);
        let c_left = (0..n).map(|i| model.tilt(i, 0) * scale).collect();
        let c_right = (0..n).map(|i| model.tilt(i, sites - 1) * scale).collect();
        let potentials = match &model.boundary {
            LatticeBoundary::Potential { left, right } => Some((left.clone(), right.clone())),
            _ => None,
        };
        let moves = model.boundary.moves_endpoints();
        let ceiling = model
            .ceiling
            .clone()
            .unwrap_or_else(|| vec![i32::MAX; sites]);
        Ok(Self {
            spec: spec.clone(),
            floor: model.floor.clone(),
            ceiling,
            n,
            sites,
            first: if moves { 0 } else { 1 },
            span: if moves { sites } else { sites - 2 },
            p_up,
            c_left,
            c_right,
            potentials,
            model,
        })
    }

    pub fn spec(&self) -> &TiltedEnsembleSpec {
        &self.spec
    }

    pub fn model(&self) -> &LatticeModel {
        &self.model
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Selectable site indices.
    pub fn site_range(&self) -> std::ops::Range<usize> {
        self.first..self.first + self.span
    }

    /// Elementary steps per sweep, `n (2 T_N + 1)`.
    pub fn sweep_len(&self) -> u64 {
        (self.n * self.sites) as u64
    }

    /// Interior up-probability of path `i` at site index `site`.
    pub fn interior_prob_at(&self, i: usize, site: usize) -> f64 {
        self.p_up[i * self.sites + site]
    }

    #[inline]
    fn endpoint_prob(&self, i: usize, site: usize, neighbour: i32) -> f64 {
        match &self.potentials {
            None => self.p_up[i * self.sites + site],
            Some((left, right)) => {
                let s = self.model.sqrt_n();
                let (c, pot) = if site == 0 {
                    (self.c_left[i], &left[i])
                } else {
                    (self.c_right[i], &right[i])
                };
                logistic_down(2.0 * c + pot.lattice_gradient(neighbour, s))
            }
        }
    }

    /// Candidate heights at `(i, site)`, or `None` when the height is forced
    /// or the site is not selectable.
    pub fn site_rule(&self, ens: &DiscretePathEnsemble, i: usize, site: usize) -> Option<SiteRule> {
        if !self.site_range().contains(&site) {
            return None;
        }
        let (h, p) = if site == 0 {
            let nb = ens.get(i, 1);
            (nb, self.endpoint_prob(i, 0, nb))
        } else if site == self.sites - 1 {
            let nb = ens.get(i, site - 1);
            (nb, self.endpoint_prob(i, site, nb))
        } else {
            let l = ens.get(i, site - 1);
            if l != ens.get(i, site + 1) {
                return None;
            }
            (l, self.p_up[i * self.sites + site])
        };
        Some(SiteRule {
            up: h + 1,
            down: h - 1,
            p_up: p,
        })
    }

    /// Whether height `h` at `(i, site)` respects ordering, floor and
    /// ceiling given the rest of `ens`.
    pub fn admissible(&self, ens: &DiscretePathEnsemble, i: usize, site: usize, h: i32) -> bool {
        fits(ens.heights(), self.n, self.sites, &self.floor, &self.ceiling, i, site, h)
    }

    /// Applies the update at `(i, site)` driven by `u`.
    #[inline]
    pub fn apply(&self, ens: &mut DiscretePathEnsemble, i: usize, site: usize, u: f64) -> Move {
        let s = self.sites;
        let base = i * s;
        let (h, p) = {
            let w = ens.heights();
            if site == 0 {
                let nb = w[base + 1];
                (nb, self.endpoint_prob(i, 0, nb))
            } else if site == s - 1 {
                let nb = w[base + s - 2];
                (nb, self.endpoint_prob(i, site, nb))
            } else {
                let l = w[base + site - 1];
                if l != w[base + site + 1] {
                    return Move::Skipped;
                }
                (l, self.p_up[base + site])
            }
        };
        let new = if u <= p { h + 1 } else { h - 1 };
        let w = ens.heights_mut();
        if !fits(w, self.n, s, &self.floor, &self.ceiling, i, site, new) {
            return Move::Rejected;
        }
        w[base + site] = new;
        Move::Accepted
    }

    /// Draws `(i, site, U)` for one elementary step.
    #[inline]
    pub fn draw(&self, rng: &mut RngStream) -> (usize, usize, f64) {
        let idx = rng.index((self.n * self.span) as u64) as usize;
        let u = rng.uniform();
        (idx / self.span, idx % self.span + self.first, u)
    }

    /// One elementary step of `state`.
    #[inline]
    pub fn step(&self, state: &mut ChainState) -> Move {
        let (i, site, u) = self.draw(&mut state.rng);
        state.step_count += 1;
        self.apply(&mut state.ens, i, site, u)
    }

    /// Pointwise-least admissible configuration.
    pub fn minimal_config(&self) -> Result<DiscretePathEnsemble> {
        let (n, s) = (self.n, self.sites);
        let m = &self.model;
        let mut rows: Vec<Vec<i32>> = vec![Vec::new(); n];
        for i in (0..n).rev() {
            let mut bound: Vec<i32> = (0..s)
                .map(|k| {
                    let lb = if i == n - 1 { self.floor[k] } else { rows[i + 1][k] + 1 };
                    lb + (lb - m.parity(i, k)).rem_euclid(2)
                })
                .collect();
            if let LatticeBoundary::Fixed { left, right } = &m.boundary {
                bound[0] = bound[0].max(left[i]);
                bound[s - 1] = bound[s - 1].max(right[i]);
            }
            let f = spread(&bound, |a, b| a.max(b), -1);
            if let LatticeBoundary::Fixed { left, right } = &m.boundary {
                if f[0] != left[i] || f[s - 1] != right[i] {
                    return Err(Error::Infeasible(format!(
                        "path {} cannot reach its endpoints above the paths below it",
                        i + 1
                    )));
                }
            }
            rows[i] = f;
        }
        if let Some(k) = (0..s).find(|&k| rows[0][k] > self.ceiling[k]) {
            return Err(Error::Infeasible(format!(
                "n = {n} paths do not fit under the ceiling at site {k}"
            )));
        }
        DiscretePathEnsemble::from_rows(&rows)
    }

    /// Default height cap for [`Self::maximal_config`] when there is no
    /// ceiling: the largest pinned endpoint or `floor + n`, plus
    /// `4 sqrt(T_N) + 20`.
    pub fn default_cap(&self) -> i32 {
        let mut base = self.floor.iter().max().copied().unwrap_or(0) + self.n as i32;
        if let LatticeBoundary::Fixed { left, right } = &self.model.boundary {
            base = base.max(left[0]).max(right[0]);
        }
        base + (4.0 * (self.model.t_n as f64).sqrt()).ceil() as i32 + 20
    }

    /// Pointwise-greatest admissible configuration; without a ceiling the
    /// top path is capped at `cap` (default [`Self::default_cap`]).
    pub fn maximal_config(&self, cap: Option<i32>) -> Result<DiscretePathEnsemble> {
        let (n, s) = (self.n, self.sites);
        let m = &self.model;
        let cap = cap.unwrap_or_else(|| self.default_cap());
        let mut rows: Vec<Vec<i32>> = vec![Vec::new(); n];
        for i in 0..n {
            let mut bound: Vec<i32> = (0..s)
                .map(|k| {
                    let ub = if i == 0 {
                        if self.ceiling[k] == i32::MAX {
                            cap
                        } else {
                            self.ceiling[k]
                        }
                    } else {
                        rows[i - 1][k] - 1
                    };
                    ub - (ub - m.parity(i, k)).rem_euclid(2)
                })
                .collect();
            if let LatticeBoundary::Fixed { left, right } = &m.boundary {
                bound[0] = bound[0].min(left[i]);
                bound[s - 1] = bound[s - 1].min(right[i]);
            }
            let f = spread(&bound, |a, b| a.min(b), 1);
            if let LatticeBoundary::Fixed { left, right } = &m.boundary {
                if f[0] != left[i] || f[s - 1] != right[i] {
                    return Err(Error::Infeasible(format!(
                        "path {} cannot reach its endpoints below the paths above it",
                        i + 1
                    )));
                }
            }
            rows[i] = f;
        }
        if let Some(k) = (0..s).find(|&k| rows[n - 1][k] < self.floor[k]) {
            return Err(Error::Infeasible(format!(
                "n = {n} paths do not fit above the floor at site {k} (cap {cap})"
            )));
        }
        DiscretePathEnsemble::from_rows(&rows)
    }
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn fits(w: &[i32], n: usize, s: usize, floor: &[i32], ceiling: &[i32], i: usize, site: usize, h: i32) -> bool {
    if i + 1 < n {
        if h <= w[(i + 1) * s + site] {
            return false;
        }
    } else if h < floor[site] {
        return false;
    }
    if i > 0 {
        h < w[(i - 1) * s + site]
    } else {
        h <= ceiling[site]
    }
}

/// `f(k) = op_j (bound(j) + step |k - j|)`, by a forward and a backward pass.
fn spread(bound: &[i32], op: impl Fn(i32, i32) -> i32, step: i32) -> Vec<i32> {
    let mut f = bound.to_vec();
    for k in 1..f.len() {
        f[k] = op(f[k], f[k - 1] + step);
    }
    for k in (0..f.len().saturating_sub(1)).rev() {
        f[k] = op(f[k], f[k + 1] + step);
    }
    f
}

/// Least admissible configuration of `spec`.
pub fn minimal_config(spec: &TiltedEnsembleSpec) -> Result<DiscretePathEnsemble> {
    HeatBathKernel::new(spec)?.minimal_config()
}

/// Greatest admissible configuration of `spec` under the height cap.
pub fn maximal_config(spec: &TiltedEnsembleSpec, cap: Option<i32>) -> Result<DiscretePathEnsemble> {
    HeatBathKernel::new(spec)?.maximal_config(cap)
}

/// A single chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub ens: DiscretePathEnsemble,
    pub step_count: u64,
    pub rng: RngStream,
}

impl ChainState {
    pub fn new(kernel: &HeatBathKernel, ens: DiscretePathEnsemble, rng: RngStream) -> Result<Self> {
        kernel.model().admits(&ens)?;
        Ok(Self {
            ens,
            step_count: 0,
            rng,
        })
    }
}

/// Elementary step of `state` under `kernel`.
pub fn step(state: &mut ChainState, kernel: &HeatBathKernel) -> Move {
    kernel.step(state)
}

/// Two chains driven by the same `(i, k, U)`.
#[derive(Debug, Clone)]
pub struct CouplingState {
    pub lower: DiscretePathEnsemble,
    pub upper: DiscretePathEnsemble,
    pub step_count: u64,
    pub rng: RngStream,
}

/// Kernels of a lower and an upper instance satisfying the domination
/// hypotheses: lower floor and ceiling below the upper ones, lower tilts
/// above the upper tilts, lower pinned endpoints below the upper ones with
/// equal parity, and lower endpoint-potential gradients above the upper
/// ones.
#[derive(Debug, Clone)]
pub struct Coupling {
    lower: HeatBathKernel,
    upper: HeatBathKernel,
}

impl Coupling {
    pub fn new(lower: &TiltedEnsembleSpec, upper: &TiltedEnsembleSpec) -> Result<Self> {
        let c = Self {
            lower: HeatBathKernel::new(lower)?,
            upper: HeatBathKernel::new(upper)?,
        };
        c.check_hypotheses()?;
        Ok(c)
    }

    pub fn lower(&self) -> &HeatBathKernel {
        &self.lower
    }

    pub fn upper(&self) -> &HeatBathKernel {
        &self.upper
    }

    fn check_hypotheses(&self) -> Result<()> {
        let (l, u) = (self.lower.model(), self.upper.model());
        let bad = |m: &str| Err(Error::Config(format!("domination hypothesis violated: {m}")));
        if l.n != u.n || l.t_n != u.t_n || l.resolution != u.resolution {
            return bad("instances must share n, T_N and N");
        }
        if l.floor.iter().zip(&u.floor).any(|(a, b)| a > b) {
            return bad("lower floor exceeds upper floor");
        }
        if self
            .lower
            .ceiling
            .iter()
            .zip(&self.upper.ceiling)
            .any(|(a, b)| a > b)
        {
            return bad("lower ceiling exceeds upper ceiling");
        }
        if l.tilts.iter().zip(&u.tilts).any(|(a, b)| a < b) {
            return bad("lower tilts must dominate upper tilts");
        }
        let zero = |n| vec![Potential::Zero; n];
        let pots = |b: &LatticeBoundary| match b {
            LatticeBoundary::Free => Some((zero(l.n), zero(l.n))),
            LatticeBoundary::Potential { left, right } => Some((left.clone(), right.clone())),
            LatticeBoundary::Fixed { .. } => None,
        };
        match (&l.boundary, &u.boundary) {
            (
                LatticeBoundary::Fixed { left: x, right: y },
                LatticeBoundary::Fixed { left: xu, right: yu },
            ) => {
                for (a, b) in x.iter().zip(xu).chain(y.iter().zip(yu)) {
                    if a > b || (a - b).rem_euclid(2) != 0 {
                        return bad("pinned endpoints must be ordered and of equal parity");
                    }
                }
            }
            (lb, ub) => {
                let (Some((xi, zeta)), Some((nu, eta))) = (pots(lb), pots(ub)) else {
                    return bad("cannot couple pinned with unpinned endpoints");
                };
                let top = self.upper.default_cap().max(
                    self.upper
                        .ceiling
                        .iter()
                        .copied()
                        .filter(|&c| c != i32::MAX)
                        .max()
                        .unwrap_or(0),
                );
                let s = l.sqrt_n();
                for i in 0..l.n {
                    for h in 0..=top {
                        if xi[i].lattice_gradient(h, s) < nu[i].lattice_gradient(h, s)
                            || zeta[i].lattice_gradient(h, s) < eta[i].lattice_gradient(h, s)
                        {
                            return bad("lower endpoint potentials must grow at least as fast");
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Lower chain at its minimal and upper chain at its maximal
    /// configuration.
    pub fn start(&self, rng: RngStream, cap: Option<i32>) -> Result<CouplingState> {
        let lower = self.lower.minimal_config()?;
        let upper = self.upper.maximal_config(cap)?;
        if !lower.below(&upper) {
            return Err(Error::Config("initial configurations are not ordered; raise the cap".into()));
        }
        Ok(CouplingState {
            lower,
            upper,
            step_count: 0,
            rng,
        })
    }

    /// One synchronized step; fails if the order breaks at the updated site.
    pub fn step(&self, cs: &mut CouplingState) -> Result<(Move, Move)> {
        let (i, site, u) = self.lower.draw(&mut cs.rng);
        cs.step_count += 1;
        let ml = self.lower.apply(&mut cs.lower, i, site, u);
        let mu = self.upper.apply(&mut cs.upper, i, site, u);
        let (a, b) = (cs.lower.get(i, site), cs.upper.get(i, site));
        if a > b {
            return Err(Error::CouplingBroken {
                step: cs.step_count,
                path: i + 1,
                site: site as i64 - self.lower.model().t_n,
                lower: a,
                upper: b,
                dump: format!("lower: {:?}\nupper: {:?}", cs.lower.heights(), cs.upper.heights()),
            });
        }
        Ok((ml, mu))
    }
}

/// [`Coupling::step`] as a free function.
pub fn coupled_step(coupling: &Coupling, cs: &mut CouplingState) -> Result<(Move, Move)> {
    coupling.step(cs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::BoundaryData;

    fn fixed(n: usize, t: f64, res: u32, left: Vec<f64>, right: Vec<f64>) -> TiltedEnsembleSpec {
        let mut s = TiltedEnsembleSpec::geometric(n, t, 1.0, 2.0, res);
        s.boundary = BoundaryData::Fixed { left, right };
        s
    }

    #[test]
    fn probabilities() {
        let p = interior_prob(1.0, 1).unwrap();
        assert!((p - (-2.0f64).exp() / (1.0 + (-2.0f64).exp())).abs() < 1e-15);
        assert!((p - 0.11920).abs() < 1e-5);
        assert!((interior_prob(1e-12, 1).unwrap() - 0.5).abs() < 1e-11);
        assert_eq!(interior_prob(1e300, 1).unwrap(), 0.0);
        assert!(interior_prob(0.0, 1).is_err());
        assert!(interior_prob(-1.0, 4).is_err());
        let q = boundary_prob(1.0, 1, 2f64.ln()).unwrap();
        assert!((q - 0.06337).abs() < 1e-5);
        assert_eq!(boundary_prob(1.0, 1, 0.0).unwrap(), p);
        assert_eq!(boundary_prob(1.0, 1, f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn extremal_single_path() {
        let spec = fixed(1, 1.0, 1, vec![1.0], vec![1.0]);
        assert_eq!(minimal_config(&spec).unwrap().row(0), &[1, 0, 1]);
        assert_eq!(maximal_config(&spec, None).unwrap().row(0), &[1, 2, 1]);
    }

    #[test]
    fn extremal_two_paths() {
        let spec = fixed(2, 1.0, 1, vec![3.0, 1.0], vec![3.0, 1.0]);
        let m = minimal_config(&spec).unwrap();
        assert_eq!(m.row(0), &[3, 2, 3]);
        assert_eq!(m.row(1), &[1, 0, 1]);
        let x = maximal_config(&spec, None).unwrap();
        assert_eq!(x.row(0), &[3, 4, 3]);
        assert_eq!(x.row(1), &[1, 2, 1]);
    }

    #[test]
    fn free_minimal_is_a_zigzag_staircase() {
        let spec = TiltedEnsembleSpec::geometric(3, 1.0, 1.0, 2.0, 2);
        let m = minimal_config(&spec).unwrap();
        assert_eq!(m.row(2), &[0, 1, 0, 1, 0]);
        assert_eq!(m.row(1), &[1, 2, 1, 2, 1]);
        assert_eq!(m.row(0), &[2, 3, 2, 3, 2]);
        let x = maximal_config(&spec, Some(9)).unwrap();
        assert!(m.below(&x));
        assert_eq!(x.row(0), &[8, 9, 8, 9, 8]);
    }

    #[test]
    fn infeasible_instances() {
        let mut spec = fixed(2, 1.0, 1, vec![3.0, 1.0], vec![3.0, 1.0]);
        spec.ceiling = Some(crate::profile::FloorCeiling(crate::profile::Profile::Table {
            points: vec![[-1.0, 3.0], [0.0, 1.5], [1.0, 3.0]],
        }));
        assert!(matches!(minimal_config(&spec), Err(Error::Infeasible(_))));
        let far = fixed(1, 1.0, 1, vec![1.0], vec![5.0]);
        assert!(matches!(minimal_config(&far), Err(Error::Infeasible(_))));
    }

    #[test]
    fn rejection_keeps_order() {
        let spec = fixed(2, 1.0, 1, vec![3.0, 1.0], vec![3.0, 1.0]);
        let k = HeatBathKernel::new(&spec).unwrap();
        let mut e = k.minimal_config().unwrap();
        // raising the bottom path to 2 would touch the top path
        assert_eq!(k.apply(&mut e, 1, 1, 0.0), Move::Rejected);
        assert_eq!(e.row(1), &[1, 0, 1]);
        assert_eq!(k.apply(&mut e, 0, 1, 0.0), Move::Accepted);
        assert_eq!(e.row(0), &[3, 4, 3]);
    }

    #[test]
    fn fixed_endpoints_never_move() {
        let spec = fixed(2, 2.0, 1, vec![4.0, 2.0], vec![4.0, 2.0]);
        let k = HeatBathKernel::new(&spec).unwrap();
        let mut st = ChainState::new(&k, k.minimal_config().unwrap(), RngStream::new(3, 0)).unwrap();
        let parity = st.ens.endpoint_parity().to_vec();
        for _ in 0..10_000 {
            k.step(&mut st);
        }
        assert_eq!(st.ens.row(0)[0], 4);
        assert_eq!(st.ens.row(1)[4], 2);
        assert_eq!(st.ens.endpoint_parity(), &parity[..]);
        k.model().admits(&st.ens).unwrap();
    }

    #[test]
    fn coupling_hypotheses_are_checked() {
        let lo = TiltedEnsembleSpec::geometric(2, 1.0, 1.0, 2.0, 4);
        let mut hi = lo.clone();
        hi.a = 2.0;
        assert!(Coupling::new(&lo, &hi).is_err());
        assert!(Coupling::new(&hi, &lo).is_ok());
        let mut pinned = lo.clone();
        pinned.boundary = BoundaryData::Fixed {
            left: vec![2.0, 1.0],
            right: vec![2.0, 1.0],
        };
        assert!(Coupling::new(&lo, &pinned).is_err());
    }

    #[test]
    fn identical_chains_stay_identical() {
        let spec = TiltedEnsembleSpec::geometric(2, 1.0, 1.0, 2.0, 4);
        let c = Coupling::new(&spec, &spec).unwrap();
        let e = c.lower().minimal_config().unwrap();
        let mut cs = CouplingState {
            lower: e.clone(),
            upper: e,
            step_count: 0,
            rng: RngStream::new(5, 0),
        };
        for _ in 0..20_000 {
            c.step(&mut cs).unwrap();
        }
        assert_eq!(cs.lower, cs.upper);
    }
}
