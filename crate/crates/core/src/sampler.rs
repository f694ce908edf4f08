//! Running chains: sweep schedules, observed runs, independent replicas and
//! the minimal/maximal coalescence diagnostic.

use serde::{Deserialize, Serialize};

use crate::ensemble::{DiscretePathEnsemble, PathEnsemble, TiltedEnsembleSpec};
use crate::error::{Error, Result};
use crate::heatbath::{ChainState, Coupling, CouplingState, HeatBathKernel, Move};
use crate::rng::{RngPosition, RngStream};

pub const DEFAULT_BURN_IN: u64 = 200;

fn default_burn_in() -> u64 {
    DEFAULT_BURN_IN
}

fn default_thin() -> u64 {
    1
}

/// Sweep schedule. One sweep is `n (2 T_N + 1)` elementary steps; samples
/// are taken after sweeps `burn_in + thin, burn_in + 2 thin, ... <= sweeps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub sweeps: u64,
    #[serde(default = "default_burn_in")]
    pub burn_in: u64,
    #[serde(default = "default_thin")]
    pub thin: u64,
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps <= self.burn_in {
            return Err(Error::Config(format!(
                "sweeps ({}) must exceed burn_in ({})",
                self.sweeps, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        Ok(())
    }

    pub fn sample_count(&self) -> u64 {
        (self.sweeps - self.burn_in) / self.thin
    }

    /// Schedule yielding exactly `samples` samples.
    pub fn for_samples(samples: u64, burn_in: u64, thin: u64) -> Self {
        Self {
            sweeps: burn_in + samples * thin,
            burn_in,
            thin,
        }
    }
}

/// Elementary step outcomes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveCounts {
    pub steps: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub skipped: u64,
}

impl MoveCounts {
    #[inline]
    fn record(&mut self, m: Move) {
        self.steps += 1;
        match m {
            Move::Accepted => self.accepted += 1,
            Move::Rejected => self.rejected += 1,
            Move::Skipped => self.skipped += 1,
        }
    }

    pub fn merge(&mut self, other: &MoveCounts) {
        self.steps += other.steps;
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.skipped += other.skipped;
    }
}

/// Observed run output.
#[derive(Debug, Clone)]
pub struct ChainRun<T> {
    pub samples: Vec<T>,
    pub counts: MoveCounts,
    pub state: ChainState,
}

/// Runs `state` through `schedule`, calling `observe` at each sample time.
pub fn run_observed<T>(
    kernel: &HeatBathKernel,
    mut state: ChainState,
    schedule: &Schedule,
    mut observe: impl FnMut(&DiscretePathEnsemble) -> T,
) -> Result<ChainRun<T>> {
    schedule.validate()?;
    let sweep = kernel.sweep_len();
    let mut counts = MoveCounts::default();
    let mut samples = Vec::with_capacity(schedule.sample_count() as usize);
    let run_sweeps = |st: &mut ChainState, c: &mut MoveCounts, k: u64| {
        for _ in 0..k * sweep {
            c.record(kernel.step(st));
        }
    };
    run_sweeps(&mut state, &mut counts, schedule.burn_in);
    for _ in 0..schedule.sample_count() {
        run_sweeps(&mut state, &mut counts, schedule.thin);
        samples.push(observe(&state.ens));
    }
    debug_assert!(kernel.model().admits(&state.ens).is_ok());
    Ok(ChainRun {
        samples,
        counts,
        state,
    })
}

/// Rescaled snapshots from one chain started at the minimal configuration.
#[derive(Debug, Clone, Serialize)]
pub struct SampleSet {
    pub spec: TiltedEnsembleSpec,
    pub schedule: Schedule,
    pub start: RngPosition,
    pub counts: MoveCounts,
    #[serde(skip)]
    pub samples: Vec<PathEnsemble>,
}

/// Samples `spec` on stream `(seed, stream_id)`.
pub fn run_chain(spec: &TiltedEnsembleSpec, schedule: &Schedule, seed: u64, stream_id: u64) -> Result<SampleSet> {
    let kernel = HeatBathKernel::new(spec)?;
    let rng = RngStream::new(seed, stream_id);
    let start = rng.position();
    let state = ChainState::new(&kernel, kernel.minimal_config()?, rng)?;
    let res = spec.resolution;
    let run = run_observed(&kernel, state, schedule, |e| e.to_paths(res))?;
    Ok(SampleSet {
        spec: spec.clone(),
        schedule: *schedule,
        start,
        counts: run.counts,
        samples: run.samples,
    })
}

/// How replicas are distributed over threads.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    /// Rayon work stealing; identical to `Sequential` without the
    /// `parallel` feature.
    #[default]
    Parallel,
}

/// `f(0), ..., f(count - 1)` in index order.
pub fn map_replicas<T, F>(count: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(f).collect()
        }
        _ => (0..count).map(f).collect(),
    }
}

/// Sample budget of an experiment split over independent replicas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingPlan {
    pub samples: usize,
    pub replicas: usize,
    pub burn_in: u64,
    pub thin: u64,
}

impl SamplingPlan {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.replicas == 0 || self.thin == 0 {
            return Err(Error::Config("samples, replicas and thin must be positive".into()));
        }
        if self.replicas > self.samples {
            return Err(Error::Config("more replicas than samples".into()));
        }
        Ok(())
    }

    /// Samples drawn by replica `r`.
    pub fn share(&self, r: usize) -> usize {
        self.samples / self.replicas + usize::from(r < self.samples % self.replicas)
    }
}

/// Observed values of `k` statistics per sample, concatenated over replicas
/// in replica order, plus total move counts.
#[derive(Debug, Clone)]
pub struct Observed {
    pub values: Vec<Vec<f64>>,
    pub counts: MoveCounts,
}

/// Runs `plan.replicas` chains of `spec` on streams `0..replicas` of `seed`,
/// each from the minimal configuration, recording `k` statistics per sample.
pub fn observe_statistics<F>(
    spec: &TiltedEnsembleSpec,
    plan: &SamplingPlan,
    seed: u64,
    exec: Execution,
    k: usize,
    stat: F,
) -> Result<Observed>
where
    F: Fn(&DiscretePathEnsemble, &mut [f64]) + Sync + Send,
{
    plan.validate()?;
    let kernel = HeatBathKernel::new(spec)?;
    let init = kernel.minimal_config()?;
    let runs = map_replicas(plan.replicas, exec, |r| -> Result<(Vec<Vec<f64>>, MoveCounts)> {
        let state = ChainState::new(&kernel, init.clone(), RngStream::new(seed, r as u64))?;
        let schedule = Schedule::for_samples(plan.share(r) as u64, plan.burn_in, plan.thin);
        let run = run_observed(&kernel, state, &schedule, |e| {
            let mut v = vec![0.0; k];
            stat(e, &mut v);
            v
        })?;
        let mut cols = vec![Vec::with_capacity(run.samples.len()); k];
        for s in &run.samples {
            for (c, x) in cols.iter_mut().zip(s) {
                c.push(*x);
            }
        }
        Ok((cols, run.counts))
    });
    let mut values = vec![Vec::with_capacity(plan.samples); k];
    let mut counts = MoveCounts::default();
    for run in runs {
        let (cols, c) = run?;
        for (v, col) in values.iter_mut().zip(cols) {
            v.extend(col);
        }
        counts.merge(&c);
    }
    Ok(Observed { values, counts })
}

/// Distance between chains from the minimal and maximal configurations of
/// one instance driven by the same randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoalescenceDiagnostic {
    pub sweeps: u64,
    pub cap: i32,
    pub initial_distance: i32,
    pub final_distance: i32,
    /// First sweep after which the chains agree everywhere.
    pub coalesced_at: Option<u64>,
}

pub fn coalescence(spec: &TiltedEnsembleSpec, sweeps: u64, rng: RngStream, cap: Option<i32>) -> Result<CoalescenceDiagnostic> {
    let coupling = Coupling::new(spec, spec)?;
    let cap = cap.unwrap_or_else(|| coupling.upper().default_cap());
    let mut cs: CouplingState = coupling.start(rng, Some(cap))?;
    let initial_distance = cs.lower.distance(&cs.upper);
    let sweep = coupling.lower().sweep_len();
    let mut coalesced_at = None;
    for s in 1..=sweeps {
        for _ in 0..sweep {
            coupling.step(&mut cs)?;
        }
        if coalesced_at.is_none() && cs.lower == cs.upper {
            coalesced_at = Some(s);
        }
    }
    Ok(CoalescenceDiagnostic {
        sweeps,
        cap,
        initial_distance,
        final_distance: cs.lower.distance(&cs.upper),
        coalesced_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> TiltedEnsembleSpec {
        TiltedEnsembleSpec::geometric(2, 1.0, 1.0, 2.0, 8)
    }

    #[test]
    fn schedule_arithmetic() {
        let s = Schedule {
            sweeps: 50,
            burn_in: 10,
            thin: 40,
        };
        assert_eq!(s.sample_count(), 1);
        assert_eq!(Schedule::for_samples(7, 3, 2).sample_count(), 7);
        assert!(Schedule {
            sweeps: 5,
            burn_in: 5,
            thin: 1
        }
        .validate()
        .is_err());
    }

    #[test]
    fn one_sample_when_thin_spans_the_run() {
        let s = Schedule {
            sweeps: 30,
            burn_in: 10,
            thin: 20,
        };
        let out = run_chain(&small(), &s, 1, 0).unwrap();
        assert_eq!(out.samples.len(), 1);
        assert_eq!(out.counts.steps, 30 * 2 * 17);
    }

    #[test]
    fn deterministic_given_seed() {
        let s = Schedule {
            sweeps: 60,
            burn_in: 10,
            thin: 5,
        };
        let a = run_chain(&small(), &s, 42, 3).unwrap();
        let b = run_chain(&small(), &s, 42, 3).unwrap();
        assert_eq!(a.samples, b.samples);
        let c = run_chain(&small(), &s, 42, 4).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn replicas_independent_of_execution() {
        let plan = SamplingPlan {
            samples: 30,
            replicas: 4,
            burn_in: 5,
            thin: 2,
        };
        let stat = |e: &DiscretePathEnsemble, out: &mut [f64]| out[0] = e.get(0, e.t_n() as usize) as f64;
        let a = observe_statistics(&small(), &plan, 9, Execution::Sequential, 1, stat).unwrap();
        let b = observe_statistics(&small(), &plan, 9, Execution::Parallel, 1, stat).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.values[0].len(), 30);
        assert_eq!((0..4).map(|r| plan.share(r)).sum::<usize>(), 30);
    }

    #[test]
    fn extremal_chains_coalesce() {
        let d = coalescence(&small(), 2000, RngStream::new(1, 0), None).unwrap();
        assert!(d.initial_distance > 0);
        assert_eq!(d.final_distance, 0);
        assert!(d.coalesced_at.is_some());
    }
}
