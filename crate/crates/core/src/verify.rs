//! Falsifiable experiments for the exact identities and inequalities of the
//! model. Every check returns a [`VerificationReport`] listing its subchecks;
//! the report passes when no counted subcheck fails and the check ran in
//! full.
//!
//! Seeds of individual chains are derived from the master seed and the
//! instance, so two runs of the same instance under the same plan share
//! their samples. This makes the identity controls (tilt ratio 1 in the
//! scaling check, `k = 0` in the cascade check) exact.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use tiltlab_airy::quad::{breakpoints, integrate_with_breaks, QuadTolerance};
use tiltlab_airy::{airy_zero, pde_kernel_columns, AirySpectrum, PdeGrid};

use crate::ensemble::{BoundaryData, TiltedEnsembleSpec};
use crate::error::{Error, Result};
use crate::exact::{detailed_balance_defect, ExactLaw};
use crate::heatbath::{ChainState, Coupling, HeatBathKernel};
use crate::io::{ResultRow, SummaryRow};
use crate::profile::{FloorCeiling, Potential, Profile};
use crate::rng::{derive_seed, RngStream};
use crate::sampler::{coalescence, observe_statistics, Execution, MoveCounts, SamplingPlan};
use crate::stats::{
    batch_len, curved_max, ks_dominance, ks_one_sample, ks_two_sample, pooled_batch_stderr, tail_slope,
    CurvedProfile, EmpiricalSummary, FsReference,
};

/// One named comparison inside a check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subcheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Informational subchecks are reported but do not enter the verdict.
    pub counted: bool,
}

impl Subcheck {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
            counted: true,
        }
    }

    /// Passes when `value < threshold`.
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            pass: value < threshold,
            ..Self::at_most(name, value, threshold)
        }
    }

    /// Passes when `value > threshold`.
    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            pass: value > threshold,
            ..Self::at_most(name, value, threshold)
        }
    }

    pub fn informational(mut self) -> Self {
        self.counted = false;
        self
    }
}

/// Outcome of one check. `statistic` is the number of failed counted
/// subchecks and `threshold` is 0.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub specs: Vec<TiltedEnsembleSpec>,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Set when a part of the check was disabled; a partial report never
    /// passes.
    pub partial: bool,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    pub sample_sizes: Vec<usize>,
    pub subchecks: Vec<Subcheck>,
    pub summaries: Vec<SummaryRow>,
    pub notes: Vec<String>,
    /// Excluded from the serialized form so reruns compare byte for byte.
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl VerificationReport {
    fn new(check: &str, master_seed: u64) -> Self {
        Self {
            check: check.into(),
            specs: Vec::new(),
            statistic: 0.0,
            threshold: 0.0,
            pass: false,
            partial: false,
            master_seed,
            seeds: Vec::new(),
            sample_sizes: Vec::new(),
            subchecks: Vec::new(),
            summaries: Vec::new(),
            notes: Vec::new(),
            wall_clock: Duration::ZERO,
        }
    }

    fn push(&mut self, s: Subcheck) {
        self.subchecks.push(s);
    }

    fn finish(mut self, started: Instant) -> Self {
        self.statistic = self.failed().count() as f64;
        self.pass = self.statistic <= self.threshold && !self.partial;
        self.wall_clock = started.elapsed();
        self
    }

    /// Counted subchecks that failed.
    pub fn failed(&self) -> impl Iterator<Item = &Subcheck> {
        self.subchecks.iter().filter(|s| s.counted && !s.pass)
    }

    pub fn subcheck(&self, name: &str) -> Option<&Subcheck> {
        self.subchecks.iter().find(|s| s.name == name)
    }

    /// Serialized report; identical for identical inputs.
    pub fn canonical_bytes(&self) -> Result<Vec<u8>> {
        let mut v = serde_json::to_vec_pretty(self)?;
        v.push(b'\n');
        Ok(v)
    }

    pub fn result_rows(&self) -> Vec<ResultRow> {
        self.subchecks
            .iter()
            .map(|s| ResultRow {
                check: self.check.clone(),
                subcheck: s.name.clone(),
                value: s.value,
                threshold: s.threshold,
                pass: s.pass,
                counted: s.counted,
            })
            .collect()
    }
}

/// `round(N * factor)`, refused when the rounding moves the lattice by more
/// than 5%.
pub fn aligned_resolution(resolution: u32, factor: f64) -> Result<u32> {
    let exact = resolution as f64 * factor;
    let nb = exact.round();
    if nb < 1.0 || (nb - exact).abs() > 0.05 * exact {
        return Err(Error::Config(format!(
            "N = {resolution} scaled by {factor} is {exact:.3}, not within 5% of a positive integer"
        )));
    }
    Ok(nb as u32)
}

/// Lattice bias allowance `2 / sqrt(N)` for comparisons with a continuum
/// law.
pub fn lattice_allowance(resolution: u32) -> f64 {
    2.0 / (resolution as f64).sqrt()
}

/// Samples per replica batch: at least the nominal batch length and at
/// least a fifth of the shortest replica.
const BATCHES_PER_REPLICA: usize = 5;

/// Chains of one check, keyed by instance and plan.
struct Runs {
    master: u64,
    exec: Execution,
    alpha: f64,
    runs: Vec<Run>,
    keys: HashMap<String, usize>,
}

struct Run {
    spec: TiltedEnsembleSpec,
    plan: SamplingPlan,
    seed: u64,
    /// Per sample: `X_i(0)` for each path, then the plain and the curved
    /// maximum of the top path.
    values: Vec<Vec<f64>>,
    counts: MoveCounts,
}

impl Run {
    fn x0(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    fn top_max(&self) -> &[f64] {
        &self.values[self.spec.n]
    }

    fn top_curved(&self) -> &[f64] {
        &self.values[self.spec.n + 1]
    }

    fn mean_stderr(&self, values: &[f64]) -> (f64, f64) {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let mut segments = Vec::with_capacity(self.plan.replicas);
        let mut at = 0;
        for r in 0..self.plan.replicas {
            let len = self.plan.share(r);
            segments.push(&values[at..at + len]);
            at += len;
        }
        let shortest = (0..self.plan.replicas).map(|r| self.plan.share(r)).min().unwrap_or(0);
        let batch = batch_len(self.plan.thin).max(shortest / BATCHES_PER_REPLICA);
        let se = pooled_batch_stderr(&segments, batch).unwrap_or(f64::NAN);
        (mean, se)
    }

    fn summary(&self, statistic: &str, values: &[f64], alpha: Option<f64>) -> SummaryRow {
        let (mean, stderr) = self.mean_stderr(values);
        SummaryRow {
            statistic: statistic.into(),
            n: self.spec.n,
            t: self.spec.t,
            resolution: self.spec.resolution,
            a: self.spec.a,
            lambda: self.spec.lambda,
            alpha,
            mean,
            stderr,
            count: values.len(),
            seed: self.seed,
        }
    }
}

impl Runs {
    fn new(master: u64, exec: Execution, alpha: f64) -> Self {
        Self {
            master,
            exec,
            alpha,
            runs: Vec::new(),
            keys: HashMap::new(),
        }
    }

    fn get(&mut self, spec: &TiltedEnsembleSpec, plan: &SamplingPlan) -> Result<usize> {
        let key = serde_json::to_string(&(spec, plan, self.alpha))?;
        if let Some(&j) = self.keys.get(&key) {
            return Ok(j);
        }
        let seed = derive_seed(self.master, &key);
        let n = spec.n;
        let sqrt_n = (spec.resolution as f64).sqrt();
        let profile = CurvedProfile::new(self.alpha, &spec.times())?;
        let obs = observe_statistics(spec, plan, seed, self.exec, n + 2, |e, v| {
            let c = e.sites() / 2;
            for (i, x) in v.iter_mut().take(n).enumerate() {
                *x = e.get(i, c) as f64 / sqrt_n;
            }
            let top: Vec<f64> = e.row(0).iter().map(|&w| w as f64 / sqrt_n).collect();
            v[n] = top.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            v[n + 1] = curved_max(&top, &profile).expect("profile built on the same grid");
        })?;
        self.runs.push(Run {
            spec: spec.clone(),
            plan: *plan,
            seed,
            values: obs.values,
            counts: obs.counts,
        });
        self.keys.insert(key, self.runs.len() - 1);
        Ok(self.runs.len() - 1)
    }

    fn record(&self, report: &mut VerificationReport) {
        for r in &self.runs {
            report.specs.push(r.spec.clone());
            report.seeds.push(r.seed);
            report.sample_sizes.push(r.values[0].len());
            let rate = r.counts.accepted as f64 / r.counts.steps.max(1) as f64;
            report.notes.push(format!(
                "chain n={} T={} N={} a={}: {} steps, acceptance rate {rate:.4}",
                r.spec.n, r.spec.t, r.spec.resolution, r.spec.a, r.counts.steps
            ));
        }
    }

    /// Informational distance between chains from the minimal and maximal
    /// configurations after the burn-in of run `j`.
    fn coalescence(&self, j: usize, label: &str) -> Result<Subcheck> {
        let r = &self.runs[j];
        let d = coalescence(&r.spec, r.plan.burn_in, RngStream::new(r.seed, u64::MAX), None)?;
        Ok(Subcheck::at_most(format!("coalescence distance after burn-in, {label}"), d.final_distance as f64, 0.0)
            .informational())
    }
}

/// Maps every value to the nearest point `j / sqrt(N)` of the reference
/// lattice, returning the mapped values and the largest displacement in
/// lattice units. The points are formed exactly as the sampled values are,
/// so equal heights compare equal.
fn snap(values: &[f64], resolution: u32) -> (Vec<f64>, f64) {
    let sqrt_n = (resolution as f64).sqrt();
    let mut worst = 0.0f64;
    let out = values
        .iter()
        .map(|&v| {
            let j = (v * sqrt_n).round();
            worst = worst.max((v * sqrt_n - j).abs());
            j / sqrt_n
        })
        .collect();
    (out, worst)
}

fn scaled(values: &[f64], c: f64) -> Vec<f64> {
    values.iter().map(|v| v * c).collect()
}

// ---------------------------------------------------------------------------
// configuration

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum CheckConfig {
    Stationarity(StationarityConfig),
    Domination(DominationConfig),
    Scaling(ScalingConfig),
    Cascade(CascadeConfig),
    MaxRecursion(MaxRecursionConfig),
    Confinement(ConfinementConfig),
    FsLimit(FsLimitConfig),
    Spectral(SpectralConfig),
}

impl CheckConfig {
    pub const NAMES: [&'static str; 8] = [
        "stationarity",
        "domination",
        "scaling",
        "cascade",
        "max_recursion",
        "confinement",
        "fs_limit",
        "spectral",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckConfig::Stationarity(_) => "stationarity",
            CheckConfig::Domination(_) => "domination",
            CheckConfig::Scaling(_) => "scaling",
            CheckConfig::Cascade(_) => "cascade",
            CheckConfig::MaxRecursion(_) => "max_recursion",
            CheckConfig::Confinement(_) => "confinement",
            CheckConfig::FsLimit(_) => "fs_limit",
            CheckConfig::Spectral(_) => "spectral",
        }
    }

    /// Default configuration of the check called `name`.
    pub fn by_name(name: &str) -> Result<Self> {
        Ok(match name {
            "stationarity" => CheckConfig::Stationarity(Default::default()),
            "domination" => CheckConfig::Domination(Default::default()),
            "scaling" => CheckConfig::Scaling(Default::default()),
            "cascade" => CheckConfig::Cascade(Default::default()),
            "max_recursion" => CheckConfig::MaxRecursion(Default::default()),
            "confinement" => CheckConfig::Confinement(Default::default()),
            "fs_limit" => CheckConfig::FsLimit(Default::default()),
            "spectral" => CheckConfig::Spectral(Default::default()),
            _ => return Err(Error::Config(format!("unknown check '{name}'"))),
        })
    }

    pub fn run(&self, master_seed: u64, exec: Execution) -> Result<VerificationReport> {
        match self {
            CheckConfig::Stationarity(c) => check_stationarity(c, master_seed),
            CheckConfig::Domination(c) => check_domination(c, master_seed),
            CheckConfig::Scaling(c) => check_scaling(c, master_seed, exec),
            CheckConfig::Cascade(c) => check_cascade(c, master_seed, exec),
            CheckConfig::MaxRecursion(c) => check_max_recursion(c, master_seed, exec),
            CheckConfig::Confinement(c) => check_confinement(c, master_seed, exec),
            CheckConfig::FsLimit(c) => check_fs_limit(c, master_seed, exec),
            CheckConfig::Spectral(c) => check_spectral(c),
        }
    }
}

const fn plan(samples: usize, replicas: usize, burn_in: u64, thin: u64) -> SamplingPlan {
    SamplingPlan {
        samples,
        replicas,
        burn_in,
        thin,
    }
}

// ---------------------------------------------------------------------------
// stationarity on enumerable instances

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationarityConfig {
    /// Recorded sweeps per instance, after a default burn-in.
    pub sweeps: u64,
    pub burn_in: u64,
    pub tv_tol: f64,
    /// Relative tolerance of the detailed-balance identity.
    pub balance_tol: f64,
    pub instances: Vec<TiltedEnsembleSpec>,
}

fn fixed_ends(mut s: TiltedEnsembleSpec, left: Vec<f64>, right: Vec<f64>) -> TiltedEnsembleSpec {
    s.boundary = BoundaryData::Fixed { left, right };
    s
}

impl Default for StationarityConfig {
    fn default() -> Self {
        let g = TiltedEnsembleSpec::geometric;
        let mut tilted = fixed_ends(g(2, 2.0, 0.5, 2.0, 1), vec![4.0, 2.0], vec![4.0, 2.0]);
        tilted.tilts = Some(vec![
            Profile::Power {
                offset: 0.5,
                scale: 0.5,
                alpha: 1.0,
            },
            Profile::Table {
                points: vec![[-2.0, 2.0], [2.0, 1.0]],
            },
        ]);
        let mut fine = fixed_ends(g(2, 0.5, 1.0, 2.0, 4), vec![1.0, 0.5], vec![1.0, 0.5]);
        fine.ceiling = Some(FloorCeiling::constant(2.0));
        let mut potential = g(2, 2.0, 1.0, 2.0, 1);
        potential.ceiling = Some(FloorCeiling::constant(5.0));
        potential.boundary = BoundaryData::Potential {
            left: vec![Potential::Linear { slope: 0.5 }, Potential::Quadratic { coef: 0.25 }],
            right: vec![Potential::Quadratic { coef: 0.25 }, Potential::Linear { slope: 0.5 }],
        };
        Self {
            sweeps: 1_000_000,
            burn_in: 200,
            tv_tol: 0.01,
            balance_tol: 1e-12,
            instances: vec![
                fixed_ends(g(1, 1.0, 1.0, 2.0, 1), vec![1.0], vec![1.0]),
                fixed_ends(g(1, 2.0, 1.0, 2.0, 1), vec![2.0], vec![2.0]),
                fixed_ends(g(2, 1.0, 1.0, 2.0, 1), vec![3.0, 1.0], vec![3.0, 1.0]),
                tilted,
                fine,
                potential,
            ],
        }
    }
}

pub fn check_stationarity(cfg: &StationarityConfig, master_seed: u64) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut report = VerificationReport::new("stationarity", master_seed);
    for (j, spec) in cfg.instances.iter().enumerate() {
        let kernel = HeatBathKernel::new(spec)?;
        let law = ExactLaw::new(kernel.model())?;
        let (defect, pairs) = detailed_balance_defect(&kernel, &law)?;
        let seed = derive_seed(master_seed, &serde_json::to_string(&(spec, "stationarity"))?);
        let mut state = ChainState::new(&kernel, kernel.minimal_config()?, RngStream::new(seed, 0))?;
        let sweep = kernel.sweep_len();
        for _ in 0..cfg.burn_in * sweep {
            kernel.step(&mut state);
        }
        let mut counts = vec![0u64; law.len()];
        let mut outside = 0u64;
        for _ in 0..cfg.sweeps {
            for _ in 0..sweep {
                kernel.step(&mut state);
            }
            match law.index_of(&state.ens) {
                Some(k) => counts[k] += 1,
                None => outside += 1,
            }
        }
        let tv = if outside > 0 {
            1.0
        } else {
            law.total_variation(&counts)?
        };
        report.push(Subcheck::below(format!("total variation, instance {j}"), tv, cfg.tv_tol));
        report.push(Subcheck::at_most(
            format!("detailed balance defect, instance {j}"),
            defect,
            cfg.balance_tol,
        ));
        report.notes.push(format!(
            "instance {j}: {} configurations, {pairs} transition pairs, {} sweeps",
            law.len(),
            cfg.sweeps
        ));
        report.specs.push(spec.clone());
        report.seeds.push(seed);
        report.sample_sizes.push(cfg.sweeps as usize);
    }
    Ok(report.finish(started))
}

// ---------------------------------------------------------------------------
// coupled chains

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DominationPair {
    pub label: String,
    /// Larger tilts, lower floor, ceiling and boundary data.
    pub lower: TiltedEnsembleSpec,
    pub upper: TiltedEnsembleSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DominationConfig {
    /// Elementary coupled steps per pair.
    pub steps: u64,
    /// Height cap of the maximal starting configuration; default per
    /// instance when absent.
    pub cap: Option<i32>,
    pub pairs: Vec<DominationPair>,
}

impl Default for DominationConfig {
    fn default() -> Self {
        let base = TiltedEnsembleSpec::geometric(2, 2.0, 1.0, 2.0, 16);
        let with = |f: &dyn Fn(&mut TiltedEnsembleSpec)| {
            let mut s = base.clone();
            f(&mut s);
            s
        };
        let pair = |label: &str, lower, upper| DominationPair {
            label: label.into(),
            lower,
            upper,
        };
        Self {
            steps: 1_000_000,
            cap: None,
            pairs: vec![
                pair("identical", base.clone(), base.clone()),
                pair(
                    "tilts (1,2) below (1,1)",
                    with(&|s| s.tilts = Some(vec![Profile::constant(1.0), Profile::constant(2.0)])),
                    with(&|s| s.tilts = Some(vec![Profile::constant(1.0), Profile::constant(1.0)])),
                ),
                pair("floor 0 below floor 0.5", base.clone(), with(&|s| s.floor = Some(FloorCeiling::constant(0.5)))),
                pair(
                    "fixed endpoints and ceilings",
                    with(&|s| {
                        s.boundary = BoundaryData::Fixed {
                            left: vec![1.0, 0.5],
                            right: vec![1.0, 0.5],
                        };
                        s.ceiling = Some(FloorCeiling::constant(3.0));
                    }),
                    with(&|s| {
                        s.boundary = BoundaryData::Fixed {
                            left: vec![1.5, 0.5],
                            right: vec![1.5, 0.5],
                        };
                        s.ceiling = Some(FloorCeiling::constant(4.0));
                    }),
                ),
                pair(
                    "boundary potentials and tilts",
                    with(&|s| {
                        s.a = 2.0;
                        s.boundary = BoundaryData::Potential {
                            left: vec![Potential::Linear { slope: 2.0 }; 2],
                            right: vec![Potential::Linear { slope: 2.0 }; 2],
                        };
                    }),
                    with(&|s| {
                        s.boundary = BoundaryData::Potential {
                            left: vec![Potential::Linear { slope: 1.0 }; 2],
                            right: vec![Potential::Linear { slope: 1.0 }; 2],
                        };
                    }),
                ),
            ],
        }
    }
}

pub fn check_domination(cfg: &DominationConfig, master_seed: u64) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut report = VerificationReport::new("domination", master_seed);
    for (j, pair) in cfg.pairs.iter().enumerate() {
        let coupling = Coupling::new(&pair.lower, &pair.upper)?;
        let seed = derive_seed(master_seed, &serde_json::to_string(&(&pair.lower, &pair.upper))?);
        let mut cs = coupling.start(RngStream::new(seed, 0), cfg.cap)?;
        let sweep = coupling.lower().sweep_len();
        let (c, n) = (coupling.lower().sites() / 2, pair.lower.n);
        let sqrt_n = (pair.lower.resolution as f64).sqrt();
        let record_from = cfg.steps / 5;
        let mut tops = (Vec::new(), Vec::new());
        let mut bottoms = (Vec::new(), Vec::new());
        let mut violations = 0u64;
        for s in 1..=cfg.steps {
            match coupling.step(&mut cs) {
                Ok(_) => {}
                Err(e @ Error::CouplingBroken { .. }) => {
                    violations += 1;
                    report.notes.push(format!("pair {j}: {e}"));
                    break;
                }
                Err(e) => return Err(e),
            }
            if s >= record_from && s % sweep == 0 {
                tops.0.push(cs.lower.get(0, c) as f64 / sqrt_n);
                tops.1.push(cs.upper.get(0, c) as f64 / sqrt_n);
                bottoms.0.push(cs.lower.get(n - 1, c) as f64 / sqrt_n);
                bottoms.1.push(cs.upper.get(n - 1, c) as f64 / sqrt_n);
            }
        }
        report.push(Subcheck::at_most(
            format!("order violations, {}", pair.label),
            violations as f64,
            0.0,
        ));
        for (what, (lo, up)) in [("X1(0)", tops), ("Xn(0)", bottoms)] {
            if lo.len() < 2 {
                continue;
            }
            let ks = ks_dominance(&EmpiricalSummary::new(lo)?, &EmpiricalSummary::new(up)?);
            report.push(Subcheck::at_most(
                format!("one-sided KS of {what}, {}", pair.label),
                ks.statistic,
                ks.threshold,
            ));
        }
        report.specs.push(pair.lower.clone());
        report.specs.push(pair.upper.clone());
        report.seeds.push(seed);
        report.sample_sizes.push(cfg.steps as usize);
    }
    Ok(report.finish(started))
}

// ---------------------------------------------------------------------------
// Brownian scaling

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub a: f64,
    pub lambda: f64,
    #[serde(rename = "N")]
    pub resolution: u32,
    /// Plan of the run with tilt `a lambda` on `[-T, T]`.
    pub plan: SamplingPlan,
    /// Plan of the run with tilt `a` on `[-T lambda^(2/3), T lambda^(2/3)]`.
    pub rescaled_plan: SamplingPlan,
    /// Lattice bias allowance; `2 / sqrt(N)` when absent.
    pub allowance: Option<f64>,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            n: 1,
            t: 2.0,
            a: 1.0,
            lambda: 2.0,
            resolution: 64,
            plan: plan(10_000, 4, 20_000, 2_000),
            rescaled_plan: plan(10_000, 4, 12_000, 1_200),
            allowance: None,
        }
    }
}

pub fn check_scaling(cfg: &ScalingConfig, master_seed: u64, exec: Execution) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut report = VerificationReport::new("scaling", master_seed);
    let gamma = cfg.lambda.powf(2.0 / 3.0);
    let nb = aligned_resolution(cfg.resolution, 1.0 / gamma)?;
    let direct = TiltedEnsembleSpec::geometric(cfg.n, cfg.t, cfg.a * cfg.lambda, cfg.lambda, cfg.resolution);
    let wide = TiltedEnsembleSpec::geometric(cfg.n, cfg.t * gamma, cfg.a, cfg.lambda, nb);
    let mut runs = Runs::new(master_seed, exec, CurvedProfile::DEFAULT_ALPHA);
    let (ja, jb) = (runs.get(&direct, &cfg.plan)?, runs.get(&wide, &cfg.rescaled_plan)?);
    let (ra, rb) = (&runs.runs[ja], &runs.runs[jb]);
    let allowance = cfg.allowance.unwrap_or_else(|| lattice_allowance(cfg.resolution));
    let c = cfg.lambda.powf(-1.0 / 3.0);
    let mut worst_shift = 0.0f64;
    for (what, a, b) in [("X1(0)", ra.x0(0), rb.x0(0)), ("max X1", ra.top_max(), rb.top_max())] {
        let (b, shift) = snap(&scaled(b, c), cfg.resolution);
        worst_shift = worst_shift.max(shift);
        let ks = ks_two_sample(&EmpiricalSummary::new(a.to_vec())?, &EmpiricalSummary::new(b)?);
        report.push(Subcheck::at_most(format!("two-sample KS of {what}"), ks.statistic, ks.threshold + allowance));
        report.summaries.push(ra.summary(what, a, None));
        report.summaries.push(rb.summary(what, rb_values(rb, what), None));
    }
    report.push(Subcheck::below("rescaled atom displacement", worst_shift, 0.5));
    report.push(runs.coalescence(ja, "direct run")?);
    if jb != ja {
        report.push(runs.coalescence(jb, "rescaled run")?);
    }
    report.notes.push(format!(
        "rescaled run on N = {nb}; its values times lambda^(-1/3) are mapped to the nearest multiple of 1/sqrt({})",
        cfg.resolution
    ));
    report.notes.push(format!("lattice allowance {allowance}"));
    runs.record(&mut report);
    Ok(report.finish(started))
}

fn rb_values<'a>(r: &'a Run, what: &str) -> &'a [f64] {
    if what == "X1(0)" {
        r.x0(0)
    } else {
        r.top_max()
    }
}

// ---------------------------------------------------------------------------
// cascade of dominations

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CascadeConfig {
    pub n: usize,
    pub k: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub a: f64,
    pub lambda: f64,
    #[serde(rename = "N")]
    pub resolution: u32,
    /// Plan of the `n`-path run.
    pub plan: SamplingPlan,
    /// Plan of the `(n - k)`-path run on the stretched interval.
    pub partner_plan: SamplingPlan,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            n: 3,
            k: 1,
            t: 2.0,
            a: 1.0,
            lambda: 2.0,
            resolution: 32,
            plan: plan(10_000, 4, 10_000, 1_000),
            partner_plan: plan(10_000, 4, 6_000, 600),
        }
    }
}

pub fn check_cascade(cfg: &CascadeConfig, master_seed: u64, exec: Execution) -> Result<VerificationReport> {
    let started = Instant::now();
    if cfg.k >= cfg.n {
        return Err(Error::Config(format!("need k < n, got k = {}, n = {}", cfg.k, cfg.n)));
    }
    let mut report = VerificationReport::new("cascade", master_seed);
    let k = cfg.k as f64;
    let gamma = cfg.lambda.powf(2.0 * k / 3.0);
    let nb = aligned_resolution(cfg.resolution, 1.0 / gamma)?;
    let full = TiltedEnsembleSpec::geometric(cfg.n, cfg.t, cfg.a, cfg.lambda, cfg.resolution);
    let reduced = TiltedEnsembleSpec::geometric(cfg.n - cfg.k, cfg.t * gamma, cfg.a, cfg.lambda, nb);
    let mut runs = Runs::new(master_seed, exec, CurvedProfile::DEFAULT_ALPHA);
    let (ja, jb) = (runs.get(&full, &cfg.plan)?, runs.get(&reduced, &cfg.partner_plan)?);
    let (ra, rb) = (&runs.runs[ja], &runs.runs[jb]);
    let lower = ra.x0(cfg.k).to_vec();
    let (upper, shift) = snap(&scaled(rb.x0(0), cfg.lambda.powf(-k / 3.0)), cfg.resolution);
    let ks = ks_dominance(&EmpiricalSummary::new(lower.clone())?, &EmpiricalSummary::new(upper)?);
    report.push(Subcheck::at_most(
        format!("one-sided KS of X{}(0) against the scaled top path", cfg.k + 1),
        ks.statistic,
        ks.threshold,
    ));
    report.push(Subcheck::below("rescaled atom displacement", shift, 0.5));
    if cfg.k > 0 {
        let m_lower = EmpiricalSummary::new(lower.clone())?.median();
        let m_top = EmpiricalSummary::new(ra.x0(0).to_vec())?.median();
        report.push(Subcheck::at_most(
            format!("median X{}(0) minus median X1(0)", cfg.k + 1),
            m_lower - m_top,
            0.0,
        ));
    }
    report.summaries.push(ra.summary(&format!("X{}(0)", cfg.k + 1), &lower, None));
    report.summaries.push(rb.summary("X1(0)", rb.x0(0), None));
    report.push(runs.coalescence(ja, "n-path run")?);
    if jb != ja {
        report.push(runs.coalescence(jb, "reduced run")?);
    }
    report.notes.push(format!(
        "reduced run on N = {nb}; its values times lambda^(-k/3) are mapped to the nearest multiple of 1/sqrt({})",
        cfg.resolution
    ));
    runs.record(&mut report);
    Ok(report.finish(started))
}

// ---------------------------------------------------------------------------
// recursion for the expected maxima

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaxRecursionConfig {
    #[serde(rename = "T")]
    pub t: f64,
    pub a: f64,
    pub lambda: f64,
    #[serde(rename = "N")]
    pub resolution: u32,
    /// Path counts `n` for which `M_{n+1}(a) <= M_1(a) + M_n(a lambda)` is
    /// tested.
    pub cases: Vec<usize>,
    /// Monotonicity in `n` is tested over `1..=n_max`.
    pub n_max: usize,
    pub plan: SamplingPlan,
    /// Single-path scaling `M_T(b) = b^(-1/3) M_{T b^(2/3)}(1)`.
    pub scaling_b: f64,
    #[serde(rename = "scaling_T")]
    pub scaling_t: f64,
    #[serde(rename = "scaling_N")]
    pub scaling_resolution: u32,
    /// Error bars are widened by this many standard errors.
    pub sigmas: f64,
}

impl Default for MaxRecursionConfig {
    fn default() -> Self {
        Self {
            t: 2.0,
            a: 1.0,
            lambda: 2.0,
            resolution: 32,
            cases: vec![1, 2],
            n_max: 4,
            plan: plan(10_000, 4, 10_000, 200),
            scaling_b: 8.0,
            scaling_t: 1.0,
            scaling_resolution: 64,
            sigmas: 3.0,
        }
    }
}

pub fn check_max_recursion(cfg: &MaxRecursionConfig, master_seed: u64, exec: Execution) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut report = VerificationReport::new("max_recursion", master_seed);
    let mut runs = Runs::new(master_seed, exec, CurvedProfile::DEFAULT_ALPHA);
    let top_n = cfg.n_max.max(cfg.cases.iter().map(|n| n + 1).max().unwrap_or(1));
    let mut base = Vec::with_capacity(top_n);
    for n in 1..=top_n {
        let spec = TiltedEnsembleSpec::geometric(n, cfg.t, cfg.a, cfg.lambda, cfg.resolution);
        let j = runs.get(&spec, &cfg.plan)?;
        let r = &runs.runs[j];
        base.push(r.mean_stderr(r.top_max()));
        report.summaries.push(r.summary("max X1", r.top_max(), None));
    }
    for &n in &cfg.cases {
        if n == 0 {
            return Err(Error::Config("recursion cases need n >= 1".into()));
        }
        let spec = TiltedEnsembleSpec::geometric(n, cfg.t, cfg.a * cfg.lambda, cfg.lambda, cfg.resolution);
        let j = runs.get(&spec, &cfg.plan)?;
        let r = &runs.runs[j];
        let (m_tilted, se_tilted) = r.mean_stderr(r.top_max());
        report.summaries.push(r.summary("max X1", r.top_max(), None));
        let (m_next, se_next) = base[n];
        let (m_one, se_one) = base[0];
        let excess = m_next - m_one - m_tilted;
        let bar = cfg.sigmas * (se_next.powi(2) + se_one.powi(2) + se_tilted.powi(2)).sqrt();
        report.push(Subcheck::at_most(
            format!("M_{}(a) - M_1(a) - M_{n}(a lambda)", n + 1),
            excess,
            bar,
        ));
    }
    for n in 1..cfg.n_max {
        let ((m0, s0), (m1, s1)) = (base[n - 1], base[n]);
        report.push(Subcheck::at_most(
            format!("M_{n} - M_{}", n + 1),
            m0 - m1,
            cfg.sigmas * (s0 * s0 + s1 * s1).sqrt(),
        ));
    }
    for n in 2..cfg.n_max {
        report.push(
            Subcheck::at_most(format!("increment ratio (M_{} - M_{n}) / (M_{n} - M_{})", n + 1, n - 1), {
                (base[n].0 - base[n - 1].0) / (base[n - 1].0 - base[n - 2].0)
            }, 1.0)
            .informational(),
        );
    }
    let b = cfg.scaling_b;
    let nb = aligned_resolution(cfg.scaling_resolution, b.powf(-2.0 / 3.0))?;
    let steep = TiltedEnsembleSpec::geometric(1, cfg.scaling_t, b, cfg.lambda, cfg.scaling_resolution);
    let long = TiltedEnsembleSpec::geometric(1, cfg.scaling_t * b.powf(2.0 / 3.0), 1.0, cfg.lambda, nb);
    let (js, jl) = (runs.get(&steep, &cfg.plan)?, runs.get(&long, &cfg.plan)?);
    let (rs, rl) = (&runs.runs[js], &runs.runs[jl]);
    let (ms, ss) = rs.mean_stderr(rs.top_max());
    let (ml, sl) = rl.mean_stderr(rl.top_max());
    let c = b.powf(-1.0 / 3.0);
    report.push(Subcheck::at_most(
        format!("|M_T({b}) - {b}^(-1/3) M_(T {b}^(2/3))(1)|"),
        (ms - c * ml).abs(),
        cfg.sigmas * (ss * ss + c * c * sl * sl).sqrt(),
    ));
    report.summaries.push(rs.summary("max X1", rs.top_max(), None));
    report.summaries.push(rl.summary("max X1", rl.top_max(), None));
    runs.record(&mut report);
    Ok(report.finish(started))
}

// ---------------------------------------------------------------------------
// confinement of the curved maximum

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfinementConfig {
    pub alpha: f64,
    pub ns: Vec<usize>,
    #[serde(rename = "Ts")]
    pub ts: Vec<f64>,
    pub a: f64,
    pub lambda: f64,
    #[serde(rename = "N")]
    pub resolution: u32,
    pub plan: SamplingPlan,
    /// Largest admissible relative growth of the supremum when the largest
    /// cell is added.
    pub growth_tol: f64,
    /// Tilt ratio of an informational control grid.
    pub control_lambda: Option<f64>,
    /// Interval half-widths of the single-path growth fit.
    #[serde(rename = "growth_Ts")]
    pub growth_ts: Vec<f64>,
}

impl Default for ConfinementConfig {
    fn default() -> Self {
        Self {
            alpha: CurvedProfile::DEFAULT_ALPHA,
            ns: vec![1, 2, 4, 8],
            ts: vec![2.0, 4.0, 8.0],
            a: 1.0,
            lambda: 2.0,
            resolution: 32,
            plan: plan(5_000, 4, 10_000, 200),
            growth_tol: 0.05,
            control_lambda: Some(1.0),
            growth_ts: vec![2.0, 4.0, 8.0, 16.0],
        }
    }
}

impl ConfinementConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::Config(format!("alpha must lie in (0, 1/2), got {}", self.alpha)));
        }
        if self.ns.is_empty() || self.ts.is_empty() {
            return Err(Error::Config("empty (n, T) grid".into()));
        }
        Ok(())
    }
}

/// Mean curved maximum of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfinementCell {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub lambda: f64,
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
    pub tail_slope: f64,
    pub heavy_tail: bool,
}

/// `sup(all cells) / sup(all cells but the largest) - 1`, the largest cell
/// being the one with the largest `n` and `T`; 0 for a single cell.
pub fn plateau_growth(cells: &[ConfinementCell]) -> f64 {
    if cells.len() < 2 {
        return 0.0;
    }
    let n_max = cells.iter().map(|c| c.n).max().unwrap_or(0);
    let t_max = cells.iter().map(|c| c.t).fold(f64::NEG_INFINITY, f64::max);
    let sup = cells.iter().map(|c| c.mean).fold(f64::NEG_INFINITY, f64::max);
    let rest = cells
        .iter()
        .filter(|c| !(c.n == n_max && c.t == t_max))
        .map(|c| c.mean)
        .fold(f64::NEG_INFINITY, f64::max);
    sup / rest - 1.0
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn confinement_grid(
    cfg: &ConfinementConfig,
    lambda: f64,
    runs: &mut Runs,
    report: &mut VerificationReport,
) -> Result<Vec<ConfinementCell>> {
    let mut cells = Vec::new();
    for &n in &cfg.ns {
        for &t in &cfg.ts {
            let spec = TiltedEnsembleSpec::geometric(n, t, cfg.a, lambda, cfg.resolution);
            let j = runs.get(&spec, &cfg.plan)?;
            let r = &runs.runs[j];
            let xi = r.top_curved();
            let (mean, stderr) = r.mean_stderr(xi);
            let fit = tail_slope(&EmpiricalSummary::new(xi.to_vec())?)?;
            report.summaries.push(r.summary("xi_phi(X1)", xi, Some(cfg.alpha)));
            cells.push(ConfinementCell {
                n,
                t,
                lambda,
                mean,
                stderr,
                count: xi.len(),
                tail_slope: fit.slope,
                heavy_tail: fit.heavy_tail,
            });
        }
    }
    Ok(cells)
}

/// Report of [`check_confinement`] with the per-cell table.
#[derive(Debug, Clone)]
pub struct ConfinementOutcome {
    pub report: VerificationReport,
    pub cells: Vec<ConfinementCell>,
    pub control: Vec<ConfinementCell>,
}

pub fn run_confinement(cfg: &ConfinementConfig, master_seed: u64, exec: Execution) -> Result<ConfinementOutcome> {
    let started = Instant::now();
    cfg.validate()?;
    let mut report = VerificationReport::new("confinement", master_seed);
    let mut runs = Runs::new(master_seed, exec, cfg.alpha);
    let cells = confinement_grid(cfg, cfg.lambda, &mut runs, &mut report)?;
    report.push(Subcheck::below(
        "supremum growth at the grid edge",
        plateau_growth(&cells),
        cfg.growth_tol,
    ));
    for c in &cells {
        report.push(Subcheck::below(
            format!("tail slope of xi, n={} T={}", c.n, c.t),
            c.tail_slope,
            0.0,
        ));
    }
    // growth along n at the largest T, and along T at the largest n
    let t_max = cfg.ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n_max = cfg.ns.iter().copied().max().unwrap_or(1);
    let along_n: Vec<&ConfinementCell> = cells.iter().filter(|c| c.t == t_max).collect();
    let along_t: Vec<&ConfinementCell> = cells.iter().filter(|c| c.n == n_max).collect();
    for (what, line) in [("n", along_n), ("T", along_t)] {
        if line.len() >= 2 {
            let (last, prev) = (line[line.len() - 1].mean, line[line.len() - 2].mean);
            report.push(Subcheck::below(format!("relative growth along {what} at the edge"), last / prev - 1.0, cfg.growth_tol).informational());
        }
    }
    if cfg.growth_ts.len() >= 2 {
        let mut means = Vec::new();
        for &t in &cfg.growth_ts {
            let spec = TiltedEnsembleSpec::geometric(1, t, 1.0, cfg.lambda, cfg.resolution);
            let j = runs.get(&spec, &cfg.plan)?;
            let r = &runs.runs[j];
            let (m, _) = r.mean_stderr(r.top_max());
            report.summaries.push(r.summary("max X1", r.top_max(), None));
            report.push(Subcheck::at_most(format!("M_T(1) / log(1 + T), T={t}"), m / (1.0 + t).ln(), f64::INFINITY).informational());
            means.push(m);
        }
        report.push(Subcheck::below(
            "log-log slope of M_T(1) in T",
            log_log_slope(&cfg.growth_ts, &means),
            1.0,
        ));
    }
    let control = match cfg.control_lambda {
        Some(l) => {
            let control = confinement_grid(cfg, l, &mut runs, &mut report)?;
            report.push(
                Subcheck::below(format!("supremum growth at the grid edge, control lambda={l}"), plateau_growth(&control), cfg.growth_tol)
                    .informational(),
            );
            control
        }
        None => Vec::new(),
    };
    report.notes.push(
        "desk-scale surrogate: uniform boundedness over all (n, T) is replaced by bounded growth of the \
         supremum when the largest (n, T) cell of a finite grid is added"
            .into(),
    );
    if cfg.control_lambda.is_some() {
        report.notes.push("the control grid lies outside the hypothesis lambda > 1 and is informational".into());
    }
    let first = report.subchecks.len();
    for (j, r) in runs.runs.iter().enumerate() {
        if r.spec.lambda == cfg.lambda && r.spec.a == cfg.a && cfg.ns.contains(&r.spec.n) {
            let label = format!("n={} T={} lambda={}", r.spec.n, r.spec.t, r.spec.lambda);
            let s = runs.coalescence(j, &label)?;
            report.subchecks.push(s);
        }
    }
    let _ = first;
    runs.record(&mut report);
    Ok(ConfinementOutcome {
        report: report.finish(started),
        cells,
        control,
    })
}

pub fn check_confinement(cfg: &ConfinementConfig, master_seed: u64, exec: Execution) -> Result<VerificationReport> {
    Ok(run_confinement(cfg, master_seed, exec)?.report)
}

// ---------------------------------------------------------------------------
// single path against the ground-state law

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FsLimitConfig {
    #[serde(rename = "T")]
    pub t: f64,
    pub a: f64,
    #[serde(rename = "N")]
    pub resolution: u32,
    pub plan: SamplingPlan,
    /// Coarser lattice of the refinement comparison.
    #[serde(rename = "coarse_N")]
    pub coarse_resolution: u32,
    pub coarse_plan: SamplingPlan,
    /// Tilt of the reference used as a negative control.
    pub wrong_a: f64,
    pub allowance: Option<f64>,
}

impl Default for FsLimitConfig {
    fn default() -> Self {
        Self {
            t: 8.0,
            a: 0.5,
            resolution: 64,
            plan: plan(10_000, 4, 15_000, 1_500),
            coarse_resolution: 16,
            coarse_plan: plan(10_000, 4, 8_000, 800),
            wrong_a: 2.0,
            allowance: None,
        }
    }
}

pub fn check_fs_limit(cfg: &FsLimitConfig, master_seed: u64, exec: Execution) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut report = VerificationReport::new("fs_limit", master_seed);
    let mut runs = Runs::new(master_seed, exec, CurvedProfile::DEFAULT_ALPHA);
    let fine = TiltedEnsembleSpec::geometric(1, cfg.t, cfg.a, 1.0, cfg.resolution);
    let coarse = TiltedEnsembleSpec::geometric(1, cfg.t, cfg.a, 1.0, cfg.coarse_resolution);
    let (jf, jc) = (runs.get(&fine, &cfg.plan)?, runs.get(&coarse, &cfg.coarse_plan)?);
    let reference = FsReference::new(cfg.a)?;
    let wrong = FsReference::new(cfg.wrong_a)?;
    let allowance = cfg.allowance.unwrap_or_else(|| lattice_allowance(cfg.resolution));
    let sample = EmpiricalSummary::new(runs.runs[jf].x0(0).to_vec())?;
    let ks = ks_one_sample(&sample, |xs| reference.cdf_sorted(xs))?;
    report.push(Subcheck::at_most("one-sample KS of X(0)", ks.statistic, ks.threshold + allowance));
    let coarse_sample = EmpiricalSummary::new(runs.runs[jc].x0(0).to_vec())?;
    let ks_coarse = ks_one_sample(&coarse_sample, |xs| reference.cdf_sorted(xs))?;
    report.push(Subcheck::below(
        format!("KS at N={} minus KS at N={}", cfg.resolution, cfg.coarse_resolution),
        ks.statistic - ks_coarse.statistic,
        0.0,
    ));
    let ks_wrong = ks_one_sample(&sample, |xs| wrong.cdf_sorted(xs))?;
    report.push(Subcheck::above(
        format!("one-sample KS against the a={} reference", cfg.wrong_a),
        ks_wrong.statistic,
        ks_wrong.threshold + allowance,
    ));
    for j in [jf, jc] {
        let r = &runs.runs[j];
        report.summaries.push(r.summary("X1(0)", r.x0(0), None));
    }
    report.push(runs.coalescence(jf, &format!("N={}", cfg.resolution))?);
    report.push(runs.coalescence(jc, &format!("N={}", cfg.coarse_resolution))?);
    report.notes.push(format!(
        "reference: squared ground state of (1/2) d^2/dx^2 - {} x with a Dirichlet wall; lattice allowance {allowance}",
        cfg.a
    ));
    runs.record(&mut report);
    Ok(report.finish(started))
}

// ---------------------------------------------------------------------------
// spectral toolkit

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralConfig {
    pub a: f64,
    /// Disabling the finite-difference oracle makes the report partial.
    pub pde: bool,
    pub zero_tol: f64,
    pub gram_size: usize,
    pub gram_tol: f64,
    pub residual_tol: f64,
    pub pde_tol: f64,
    pub pde_dx: f64,
    pub row_slope_tol: f64,
    pub partition_tol: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            a: 0.5,
            pde: true,
            zero_tol: 1e-10,
            gram_size: 10,
            gram_tol: 1e-6,
            residual_tol: 1e-5,
            pde_tol: 1e-3,
            pde_dx: 0.01,
            row_slope_tol: 0.05,
            partition_tol: 0.01,
        }
    }
}

/// `Ai` from its Maclaurin series, independent of the library routine.
fn maclaurin_ai(x: f64) -> f64 {
    let ai0 = 0.355_028_053_887_817_239_26;
    let aip0 = -0.258_819_403_792_806_798_41;
    let x3 = x * x * x;
    let (mut f, mut tf, mut g, mut tg) = (1.0, 1.0, x, x);
    for k in 1..200 {
        let k = k as f64;
        tf *= x3 / ((3.0 * k - 1.0) * (3.0 * k));
        tg *= x3 / ((3.0 * k) * (3.0 * k + 1.0));
        f += tf;
        g += tg;
        if tf.abs() < 1e-20 && tg.abs() < 1e-20 {
            break;
        }
    }
    ai0 * f + aip0 * g
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == f_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn check_spectral(cfg: &SpectralConfig) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut report = VerificationReport::new("spectral", 0);
    let a = cfg.a;
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::Config(format!("tilt must be positive, got {a}")));
    }
    for (ell, (lo, hi)) in [(0usize, (2.0, 3.0)), (1, (4.0, 5.0))] {
        let oracle = bisect(|w| maclaurin_ai(-w), lo, hi);
        report.push(Subcheck::at_most(
            format!("|omega_{ell} - bisection|"),
            (airy_zero(ell)? - oracle).abs(),
            cfg.zero_tol,
        ));
    }

    let s = AirySpectrum::new(a, cfg.gram_size.max(6))?;
    let tol = QuadTolerance {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_intervals: 20_000,
    };
    let breaks = breakpoints(0.0, s.support_end(), 0.25);
    let mut gram = 0.0f64;
    for l in 0..cfg.gram_size {
        for m in 0..=l {
            let v = integrate_with_breaks(|x| s.eigenfunction(l, x) * s.eigenfunction(m, x), &breaks, tol)?.value;
            gram = gram.max((v - if l == m { 1.0 } else { 0.0 }).abs());
        }
    }
    report.push(Subcheck::at_most("Gram matrix deviation from identity", gram, cfg.gram_tol));

    let h = 1e-3;
    let mut residual = 0.0f64;
    for l in 0..6 {
        let lam = s.lambdas()[l];
        let k = |u: f64| s.eigenfunction(l, u);
        let (mut worst, mut scale) = (0.0f64, 0.0f64);
        for j in 0..=118 {
            let x = 0.1 + 0.05 * j as f64;
            let second = (k(x + h) - 2.0 * k(x) + k(x - h)) / (h * h);
            worst = worst.max((0.5 * second - a * x * k(x) + lam * k(x)).abs());
            scale = scale.max((lam * k(x)).abs());
        }
        residual = residual.max(worst / scale);
    }
    report.push(Subcheck::at_most("relative eigen-relation residual", residual, cfg.residual_tol));

    let points = [0.5, 1.0, 1.5, 2.0, 3.0];
    let times = [1.0, 2.0, 4.0];
    if cfg.pde {
        let ks = AirySpectrum::for_times(a, 1.0, 1e-13)?;
        let grid = PdeGrid {
            dx: cfg.pde_dx,
            x_max: PdeGrid::min_x_max(a)?.max(45.0).ceil(),
        };
        let mut worst = 0.0f64;
        for &y in &points {
            for col in pde_kernel_columns(a, &times, grid, y, None)? {
                for &x in &points {
                    let j = grid
                        .node_of(x)
                        .ok_or_else(|| Error::Config(format!("{x} is not a node of the finite-difference grid")))?;
                    let z = ks.heat_kernel(col.time, x, y)?.value;
                    worst = worst.max(((col.values[j] - z) / z).abs());
                }
            }
        }
        report.push(Subcheck::at_most("spectral kernel vs finite differences, relative", worst, cfg.pde_tol));
    } else {
        report.partial = true;
        report.notes.push("finite-difference oracle disabled; the report is partial".into());
    }

    let rs = AirySpectrum::for_times(a, 1.0, 1e-13)?;
    let t = 1.0;
    let mut values = Vec::new();
    for j in 1..=16 {
        values.push(rs.kernel_row_integral(t, 0.5 * j as f64)?.value);
    }
    let mut rises_after_fall = 0;
    let mut falling = false;
    for w in values.windows(2) {
        if w[1] < w[0] {
            falling = true;
        } else if falling {
            rises_after_fall += 1;
        }
    }
    report.push(Subcheck::at_most("row integral rises after its first fall", rises_after_fall as f64, 0.0));
    let n = values.len();
    let slope = (values[n - 1].ln() - values[n - 2].ln()) / 0.5;
    report.push(Subcheck::at_most(
        "row integral log slope, relative deviation from -a t",
        (slope / (-a * t) - 1.0).abs(),
        cfg.row_slope_tol,
    ));

    let ps = AirySpectrum::new(a, AirySpectrum::DEFAULT_LEN)?;
    let lam0 = ps.lambdas()[0];
    let mut gaps = Vec::new();
    for two_t in [5.0 / lam0, 12.0 / lam0, 25.0 / lam0] {
        let tp = ps.total_partition(0.5 * two_t)?;
        gaps.push(tp.ratio() - 1.0);
    }
    let non_monotone = gaps.windows(2).filter(|w| w[1].abs() >= w[0].abs()).count();
    report.push(Subcheck::at_most(
        "partition ratio deviation at 2T = 25/lambda_0",
        gaps[2].abs(),
        cfg.partition_tol,
    ));
    report.push(Subcheck::at_most("non-monotone steps of the partition ratio", non_monotone as f64, 0.0));
    let closed = (0..cfg.gram_size.max(6))
        .map(|l| (s.norms()[l] / s.closed_form_norm(l) - 1.0).abs())
        .fold(0.0f64, f64::max);
    report.push(Subcheck::at_most("quadrature vs closed-form normalisation", closed, 1e-8).informational());
    report.notes.push(format!("a = {a}, b = {}, lambda_0 = {lam0}", s.b()));
    Ok(report.finish(started))
}

/// Runs `checks` in order.
pub fn run_checks(checks: &[CheckConfig], master_seed: u64, exec: Execution) -> Result<Vec<VerificationReport>> {
    checks.iter().map(|c| c.run(master_seed, exec)).collect()
}
