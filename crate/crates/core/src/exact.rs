//! Exhaustive treatment of small instances: every admissible configuration
//! with its exact probability, and the one-step transition probabilities of
//! the heat-bath chain between them.

use std::collections::HashMap;

use crate::ensemble::{DiscretePathEnsemble, LatticeBoundary, LatticeModel};
use crate::error::{Error, Result};
use crate::heatbath::HeatBathKernel;

/// Refuse to enumerate beyond this many configurations.
pub const MAX_STATES: usize = 200_000;

/// All admissible configurations of `model`, in lexicographic order of the
/// height matrix. Moving endpoints need a ceiling to keep the set finite.
pub fn enumerate(model: &LatticeModel) -> Result<Vec<DiscretePathEnsemble>> {
    let sites = model.sites();
    let pinned = match &model.boundary {
        LatticeBoundary::Fixed { left, right } => Some((left, right)),
        _ => None,
    };
    if pinned.is_none() && model.ceiling.is_none() {
        return Err(Error::Config("enumeration with moving endpoints needs a ceiling".into()));
    }
    let top = |k: usize| -> i32 {
        match (&model.ceiling, pinned) {
            (Some(c), _) => c[k],
            (None, Some((l, _))) => l[0] + k as i32,
            (None, None) => unreachable!(),
        }
    };
    let mut rows: Vec<Vec<Vec<i32>>> = Vec::with_capacity(model.n);
    for i in 0..model.n {
        let starts: Vec<i32> = match pinned {
            Some((l, _)) => vec![l[i]],
            None => (model.floor[0]..=top(0))
                .filter(|h| (h - model.parity(i, 0)).rem_euclid(2) == 0)
                .collect(),
        };
        let end = pinned.map(|(_, r)| r[i]);
        let mut out = Vec::new();
        let mut row = vec![0; sites];
        for h in starts {
            row[0] = h;
            extend_row(model, &top, end, &mut row, 1, &mut out)?;
        }
        rows.push(out);
    }
    let mut states = Vec::new();
    let mut stack: Vec<usize> = Vec::with_capacity(model.n);
    combine(model, &rows, &mut stack, &mut states)?;
    states.sort_by(|a, b| a.heights().cmp(b.heights()));
    Ok(states)
}

fn extend_row(
    model: &LatticeModel,
    top: &impl Fn(usize) -> i32,
    end: Option<i32>,
    row: &mut Vec<i32>,
    k: usize,
    out: &mut Vec<Vec<i32>>,
) -> Result<()> {
    let sites = row.len();
    if k == sites {
        if end.map_or(true, |e| row[sites - 1] == e) {
            if out.len() >= MAX_STATES {
                return Err(Error::Config(format!("more than {MAX_STATES} single-path rows")));
            }
            out.push(row.clone());
        }
        return Ok(());
    }
    for h in [row[k - 1] - 1, row[k - 1] + 1] {
        if h < model.floor[k].max(0) || h > top(k) {
            continue;
        }
        if let Some(e) = end {
            if ((e - h).abs() as usize) > sites - 1 - k {
                continue;
            }
        }
        row[k] = h;
        extend_row(model, top, end, row, k + 1, out)?;
    }
    Ok(())
}

fn combine(
    model: &LatticeModel,
    rows: &[Vec<Vec<i32>>],
    stack: &mut Vec<usize>,
    states: &mut Vec<DiscretePathEnsemble>,
) -> Result<()> {
    let i = stack.len();
    if i == model.n {
        let w: Vec<i32> = stack.iter().enumerate().flat_map(|(p, &r)| rows[p][r].iter().copied()).collect();
        let ens = DiscretePathEnsemble::new(model.n, model.t_n, w)?;
        if model.admits(&ens).is_ok() {
            if states.len() >= MAX_STATES {
                return Err(Error::Config(format!("more than {MAX_STATES} configurations")));
            }
            states.push(ens);
        }
        return Ok(());
    }
    for r in 0..rows[i].len() {
        if i > 0 {
            let above = &rows[i - 1][stack[i - 1]];
            if rows[i][r].iter().zip(above).any(|(lo, up)| lo >= up) {
                continue;
            }
        }
        stack.push(r);
        combine(model, rows, stack, states)?;
        stack.pop();
    }
    Ok(())
}

/// Exact law of a small instance.
#[derive(Debug, Clone)]
pub struct ExactLaw {
    pub states: Vec<DiscretePathEnsemble>,
    pub probs: Vec<f64>,
    index: HashMap<DiscretePathEnsemble, usize>,
}

impl ExactLaw {
    pub fn new(model: &LatticeModel) -> Result<Self> {
        let states = enumerate(model)?;
        if states.is_empty() {
            return Err(Error::Infeasible("no admissible configuration".into()));
        }
        let logs = states.iter().map(|s| model.log_weight(s)).collect::<Result<Vec<f64>>>()?;
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let z: f64 = w.iter().sum();
        let index = states.iter().cloned().enumerate().map(|(j, s)| (s, j)).collect();
        Ok(Self {
            probs: w.iter().map(|x| x / z).collect(),
            states,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, ens: &DiscretePathEnsemble) -> Option<usize> {
        self.index.get(ens).copied()
    }

    /// `(1/2) sum_j |counts[j] / total - p_j|` for visit counts indexed like
    /// `states`.
    pub fn total_variation(&self, counts: &[u64]) -> Result<f64> {
        if counts.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: counts.len(),
            });
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Domain("no visits recorded".into()));
        }
        Ok(0.5
            * counts
                .iter()
                .zip(&self.probs)
                .map(|(&c, p)| (c as f64 / total as f64 - p).abs())
                .sum::<f64>())
    }
}

/// Off-diagonal one-step transition probabilities `P(w -> w')` of the
/// heat-bath chain, keyed by state indices of `law`.
pub fn transitions(kernel: &HeatBathKernel, law: &ExactLaw) -> Result<HashMap<(usize, usize), f64>> {
    let q = 1.0 / (kernel.n() * kernel.site_range().len()) as f64;
    let mut out: HashMap<(usize, usize), f64> = HashMap::new();
    for (j, w) in law.states.iter().enumerate() {
        for i in 0..kernel.n() {
            for site in kernel.site_range() {
                let Some(rule) = kernel.site_rule(w, i, site) else {
                    continue;
                };
                let current = w.get(i, site);
                for (h, p) in [(rule.up, rule.p_up), (rule.down, 1.0 - rule.p_up)] {
                    if h == current || !kernel.admissible(w, i, site, h) {
                        continue;
                    }
                    let mut heights = w.heights().to_vec();
                    heights[i * w.sites() + site] = h;
                    let next = DiscretePathEnsemble::new(w.n(), w.t_n(), heights)?;
                    let k = law.index_of(&next).ok_or_else(|| {
                        Error::InvalidState("a move leaves the enumerated state space".into())
                    })?;
                    *out.entry((j, k)).or_insert(0.0) += q * p;
                }
            }
        }
    }
    Ok(out)
}

/// Largest relative defect `|pi(w) P(w,w') - pi(w') P(w',w)| / max(...)`
/// over all transition pairs, and the number of pairs.
pub fn detailed_balance_defect(kernel: &HeatBathKernel, law: &ExactLaw) -> Result<(f64, usize)> {
    let p = transitions(kernel, law)?;
    let mut worst = 0.0f64;
    for (&(j, k), &pjk) in &p {
        let pkj = p.get(&(k, j)).copied().unwrap_or(0.0);
        let (f, b) = (law.probs[j] * pjk, law.probs[k] * pkj);
        worst = worst.max((f - b).abs() / f.max(b));
    }
    Ok((worst, p.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{BoundaryData, TiltedEnsembleSpec};

    fn fixed(n: usize, t: f64, ends: Vec<f64>) -> TiltedEnsembleSpec {
        let mut s = TiltedEnsembleSpec::geometric(n, t, 1.0, 2.0, 1);
        s.boundary = BoundaryData::Fixed {
            left: ends.clone(),
            right: ends,
        };
        s
    }

    #[test]
    fn two_state_chain() {
        let spec = fixed(1, 1.0, vec![1.0]);
        let law = ExactLaw::new(&spec.lattice().unwrap()).unwrap();
        assert_eq!(law.len(), 2);
        // (1,0,1) then (1,2,1); ratio exp(-2)
        assert!((law.probs[1] / law.probs[0] - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn counts_for_two_paths() {
        // of the four pairs of zigzags only (3,2,3) over (1,2,1) touches
        let spec = fixed(2, 1.0, vec![3.0, 1.0]);
        let law = ExactLaw::new(&spec.lattice().unwrap()).unwrap();
        assert_eq!(law.len(), 3);
        assert_eq!(law.states[0].heights(), &[3, 2, 3, 1, 0, 1]);
    }

    #[test]
    fn balance_holds_on_small_instances() {
        for spec in [fixed(1, 2.0, vec![1.0]), fixed(2, 2.0, vec![3.0, 1.0])] {
            let kernel = HeatBathKernel::new(&spec).unwrap();
            let law = ExactLaw::new(kernel.model()).unwrap();
            let (defect, pairs) = detailed_balance_defect(&kernel, &law).unwrap();
            assert!(pairs > 0);
            assert!(defect < 1e-12, "{defect}");
        }
    }

    #[test]
    fn moving_endpoints_need_a_ceiling() {
        let spec = TiltedEnsembleSpec::geometric(1, 1.0, 1.0, 2.0, 1);
        assert!(enumerate(&spec.lattice().unwrap()).is_err());
    }
}
