//! Deterministic derivative-free search over a box, optionally intersected with
//! a disk on a pair of coordinates.
//!
//! The search scans a coarse lattice, then runs compass pattern search (step
//! halving) from the best lattice nodes. Nothing here is random; the `seed`
//! carried by [`SearchConfig`] is only echoed into the result so callers that
//! mix in seeded sampling can record it.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Disk constraint `sum_{d in dims} x_d^2 <= radius^2`, centered at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Disk {
    pub dims: Vec<usize>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub disk: Option<Disk>,
}

impl SearchSpace {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Self { lower, upper, disk: None }
    }

    pub fn with_disk(mut self, dims: Vec<usize>, radius: f64) -> Self {
        self.disk = Some(Disk { dims, radius });
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() || self.lower.is_empty() {
            return Err(Error::EmptyFeasibleSet);
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::EmptyFeasibleSet);
        }
        if let Some(disk) = &self.disk {
            if disk.radius < 0.0 || disk.dims.iter().any(|&d| d >= self.dim()) {
                return Err(Error::EmptyFeasibleSet);
            }
            // the point of the box closest to the origin must lie in the disk
            let r2: f64 = disk
                .dims
                .iter()
                .map(|&d| {
                    let c = 0f64.clamp(self.lower[d], self.upper[d]);
                    c * c
                })
                .sum();
            if r2 > disk.radius * disk.radius {
                return Err(Error::EmptyFeasibleSet);
            }
        }
        Ok(())
    }

    /// Clips to the box, then pulls disk coordinates radially onto the disk.
    pub fn project(&self, x: &mut [f64]) {
        for (d, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[d], self.upper[d]);
        }
        if let Some(disk) = &self.disk {
            let r2: f64 = disk.dims.iter().map(|&d| x[d] * x[d]).sum();
            if r2 > disk.radius * disk.radius {
                let scale = disk.radius / r2.sqrt();
                for &d in &disk.dims {
                    x[d] *= scale;
                }
            }
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let in_box = x.iter().enumerate().all(|(d, v)| *v >= self.lower[d] - tol && *v <= self.upper[d] + tol);
        let in_disk = self.disk.as_ref().is_none_or(|disk| {
            let r2: f64 = disk.dims.iter().map(|&d| x[d] * x[d]).sum();
            r2.sqrt() <= disk.radius + tol
        });
        in_box && in_disk
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Lattice points per axis; `None` picks 9 for up to 3 dims, 5 for 4-5, 3 above.
    pub points_per_axis: Option<usize>,
    /// Pattern search stops once every step is below this fraction of its axis range.
    pub min_step: f64,
    pub max_evals: usize,
    /// Number of best lattice nodes to refine from.
    pub starts: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { points_per_axis: None, min_step: 1e-6, max_evals: 200_000, starts: 1, seed: 0 }
    }
}

impl SearchConfig {
    pub fn points_for(&self, dim: usize) -> usize {
        self.points_per_axis.unwrap_or(match dim {
            0..=3 => 9,
            4..=5 => 5,
            _ => 3,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub seed: u64,
    /// Incumbent value after the lattice scan and after every refinement round.
    pub history: Vec<f64>,
}

/// Larger is better; NaN ranks below everything.
fn score(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

fn lattice(space: &SearchSpace, n: usize) -> Vec<Vec<f64>> {
    let dim = space.dim();
    let axes: Vec<Vec<f64>> = (0..dim)
        .map(|d| {
            let (lo, hi) = (space.lower[d], space.upper[d]);
            if n <= 1 || lo == hi {
                vec![0.5 * (lo + hi)]
            } else {
                (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
            }
        })
        .collect();
    let total: usize = axes.iter().map(Vec::len).product();
    let mut nodes = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut x = vec![0.0; dim];
        for d in (0..dim).rev() {
            let len = axes[d].len();
            x[d] = axes[d][idx % len];
            idx /= len;
        }
        space.project(&mut x);
        nodes.push(x);
    }
    nodes
}

/// Maximizes `objective` over `space`.
pub fn grid_then_refine<F>(objective: F, space: &SearchSpace, config: &SearchConfig) -> Result<SearchResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    space.validate()?;
    let dim = space.dim();
    let n = config.points_for(dim).max(1);
    let nodes = lattice(space, n);
    let values: Vec<f64> = nodes.par_iter().map(|x| score(objective(x))).collect();
    let mut evaluations = nodes.len();

    // best nodes first, lattice (lexicographic) order among ties
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    if values[order[0]] == f64::NEG_INFINITY {
        return Err(Error::EmptyFeasibleSet);
    }

    let pitch: Vec<f64> = (0..dim)
        .map(|d| {
            let range = space.upper[d] - space.lower[d];
            if n > 1 {
                range / (n - 1) as f64
            } else {
                0.5 * range
            }
        })
        .collect();

    let mut best: Option<SearchResult> = None;
    let mut seen: Vec<&Vec<f64>> = Vec::new();
    for &start in order.iter().take(config.starts.max(1)) {
        if values[start] == f64::NEG_INFINITY || seen.contains(&&nodes[start]) {
            continue;
        }
        seen.push(&nodes[start]);
        let budget = config.max_evals.saturating_sub(evaluations);
        let run = pattern_search(&objective, space, config, nodes[start].clone(), values[start], &pitch, budget);
        evaluations += run.evaluations;
        let better = best.as_ref().is_none_or(|b| run.value > b.value);
        if better {
            best = Some(run);
        }
    }
    let mut result = best.expect("at least one start");
    result.evaluations = evaluations;
    Ok(result)
}

/// Minimizes `objective` over `space`.
pub fn minimize<F>(objective: F, space: &SearchSpace, config: &SearchConfig) -> Result<SearchResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut r = grid_then_refine(
        |x| {
            let v = objective(x);
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                -v
            }
        },
        space,
        config,
    )?;
    r.value = -r.value;
    for h in &mut r.history {
        *h = -*h;
    }
    Ok(r)
}

/// Pattern search started at `start` with per-axis initial steps `step`, no
/// lattice scan. Runs until every step is below `config.min_step` times its
/// axis range or `config.max_evals` is spent.
pub fn refine_from<F>(
    objective: F,
    space: &SearchSpace,
    start: &[f64],
    step: &[f64],
    config: &SearchConfig,
) -> Result<SearchResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    space.validate()?;
    if start.len() != space.dim() || step.len() != space.dim() {
        return Err(Error::InvalidParameter(format!(
            "start/step lengths {}/{} do not match dimension {}",
            start.len(),
            step.len(),
            space.dim()
        )));
    }
    let mut x = start.to_vec();
    space.project(&mut x);
    let fx = score(objective(&x));
    let mut r = pattern_search(&objective, space, config, x, fx, step, config.max_evals.saturating_sub(1));
    r.evaluations += 1;
    Ok(r)
}

fn pattern_search<F>(
    objective: &F,
    space: &SearchSpace,
    config: &SearchConfig,
    start: Vec<f64>,
    start_value: f64,
    pitch: &[f64],
    budget: usize,
) -> SearchResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = space.dim();
    let mut x = start;
    let mut fx = start_value;
    let mut step = pitch.to_vec();
    let mut evaluations = 0;
    let mut history = vec![fx];
    let floor: Vec<f64> = (0..dim).map(|d| config.min_step * (space.upper[d] - space.lower[d])).collect();
    let done = |step: &[f64]| step.iter().zip(&floor).all(|(s, f)| s <= f);

    let mut converged = done(&step);
    while !converged {
        if evaluations + 2 * dim > budget {
            break;
        }
        let mut best_cand: Option<(Vec<f64>, f64)> = None;
        for d in 0..dim {
            if step[d] <= floor[d] {
                continue;
            }
            for sign in [1.0, -1.0] {
                let mut c = x.clone();
                c[d] += sign * step[d];
                space.project(&mut c);
                if c == x {
                    continue;
                }
                let v = score(objective(&c));
                evaluations += 1;
                if v > fx && best_cand.as_ref().is_none_or(|(_, bv)| v > *bv) {
                    best_cand = Some((c, v));
                }
            }
        }
        match best_cand {
            Some((c, v)) => {
                x = c;
                fx = v;
            }
            None => {
                for s in &mut step {
                    *s *= 0.5;
                }
            }
        }
        history.push(fx);
        converged = done(&step);
    }
    SearchResult { point: x, value: fx, evaluations, converged, seed: config.seed, history }
}
