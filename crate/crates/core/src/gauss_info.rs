//! Entropies and mutual informations of jointly Gaussian signals.
//!
//! A [`LinearGaussianSystem`] holds the covariance of the channel inputs and a
//! list of observations, each a linear combination of inputs plus a linear
//! combination of independent unit-variance noise sources. Every information
//! quantity reduces to log-determinants of conditional covariance blocks, which
//! are formed by sequential Schur complements.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

/// Conditioning pivots below this fraction of the variable's own variance are
/// treated as linearly dependent on earlier conditioning variables.
const DEPENDENT_PIVOT: f64 = 1e-12;
/// Output pivots below this fraction of the output's own variance make the
/// information quantity infinite.
const SINGULAR_PIVOT: f64 = 1e-14;

/// One noise term `coeff * N_source` of an observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseTerm {
    pub source: usize,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub input_coeffs: Vec<f64>,
    pub noise: Vec<NoiseTerm>,
}

impl Observation {
    /// Observation with noise variance `noise_var` drawn from the noise source
    /// named by `tag`; observations with the same tag see the same noise.
    pub fn new(input_coeffs: Vec<f64>, noise_var: f64, tag: usize) -> Self {
        Self { input_coeffs, noise: vec![NoiseTerm { source: tag, coeff: noise_var.sqrt() }] }
    }

    pub fn with_noise(input_coeffs: Vec<f64>, noise: Vec<NoiseTerm>) -> Self {
        Self { input_coeffs, noise }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Signal {
    Input(usize),
    Output(usize),
}

/// An ordered list of signals naming one argument of an information quantity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SignalSelector(pub Vec<Signal>);

impl SignalSelector {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn inputs(idx: &[usize]) -> Self {
        Self(idx.iter().map(|&i| Signal::Input(i)).collect())
    }

    pub fn outputs(idx: &[usize]) -> Self {
        Self(idx.iter().map(|&i| Signal::Output(i)).collect())
    }

    pub fn and(mut self, other: &SignalSelector) -> Self {
        self.0.extend_from_slice(&other.0);
        self
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianSystem {
    input_cov: Vec<Vec<f64>>,
    observations: Vec<Observation>,
}

/// Mutual information together with conditioning diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiResult {
    pub bits: f64,
    /// Some conditioning variable was linearly dependent on the others and was
    /// dropped from the Schur complement.
    pub regularized: bool,
}

impl LinearGaussianSystem {
    pub fn new(input_cov: Vec<Vec<f64>>) -> Result<Self> {
        let n = input_cov.len();
        for (i, row) in input_cov.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParameter(format!("covariance row {i} has length {}", row.len())));
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() || (v - input_cov[j][i]).abs() > 1e-12 * (1.0 + v.abs()) {
                    return Err(Error::InvalidParameter("input covariance must be finite and symmetric".into()));
                }
            }
        }
        Ok(Self { input_cov, observations: Vec::new() })
    }

    pub fn from_matrix3(a: &[[f64; 3]; 3]) -> Self {
        Self { input_cov: a.iter().map(|r| r.to_vec()).collect(), observations: Vec::new() }
    }

    pub fn num_inputs(&self) -> usize {
        self.input_cov.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.observations.len()
    }

    /// Appends an observation and returns its output index.
    pub fn observe(&mut self, obs: Observation) -> Result<usize> {
        if obs.input_coeffs.len() != self.num_inputs() {
            return Err(Error::InvalidParameter(format!(
                "observation has {} coefficients, system has {} inputs",
                obs.input_coeffs.len(),
                self.num_inputs()
            )));
        }
        if obs.input_coeffs.iter().chain(obs.noise.iter().map(|t| &t.coeff)).any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("observation coefficients must be finite".into()));
        }
        self.observations.push(obs);
        Ok(self.observations.len() - 1)
    }

    fn check(&self, s: Signal) -> Result<()> {
        let (index, len) = match s {
            Signal::Input(i) => (i, self.num_inputs()),
            Signal::Output(j) => (j, self.num_outputs()),
        };
        if index >= len {
            return Err(Error::IndexOutOfRange { index, len });
        }
        Ok(())
    }

    fn cov_input_output(&self, i: usize, obs: &Observation) -> f64 {
        self.input_cov[i].iter().zip(&obs.input_coeffs).map(|(k, h)| k * h).sum()
    }

    fn cov_outputs(&self, a: &Observation, b: &Observation) -> f64 {
        let mut signal = 0.0;
        for (i, ha) in a.input_coeffs.iter().enumerate() {
            if *ha == 0.0 {
                continue;
            }
            signal += ha * self.cov_input_output(i, b);
        }
        let mut noise = 0.0;
        for ta in &a.noise {
            for tb in &b.noise {
                if ta.source == tb.source {
                    noise += ta.coeff * tb.coeff;
                }
            }
        }
        signal + noise
    }

    fn cov(&self, a: Signal, b: Signal) -> f64 {
        match (a, b) {
            (Signal::Input(i), Signal::Input(j)) => self.input_cov[i][j],
            (Signal::Input(i), Signal::Output(j)) | (Signal::Output(j), Signal::Input(i)) => {
                self.cov_input_output(i, &self.observations[j])
            }
            (Signal::Output(i), Signal::Output(j)) => self.cov_outputs(&self.observations[i], &self.observations[j]),
        }
    }

    /// Covariance matrix of the selected signals, composed by linearity.
    pub fn joint_covariance(&self, sel: &SignalSelector) -> Result<Vec<Vec<f64>>> {
        for &s in &sel.0 {
            self.check(s)?;
        }
        let k = sel.len();
        let mut m = vec![vec![0.0; k]; k];
        for a in 0..k {
            for b in a..k {
                let v = self.cov(sel.0[a], sel.0[b]);
                m[a][b] = v;
                m[b][a] = v;
            }
        }
        Ok(m)
    }

    /// `I(inputs; outputs | given)` in bits.
    pub fn mutual_information(
        &self,
        inputs: &SignalSelector,
        outputs: &SignalSelector,
        given: &SignalSelector,
    ) -> Result<f64> {
        self.mutual_information_detailed(inputs, outputs, given).map(|r| r.bits)
    }

    pub fn mutual_information_detailed(
        &self,
        inputs: &SignalSelector,
        outputs: &SignalSelector,
        given: &SignalSelector,
    ) -> Result<MiResult> {
        if outputs.is_empty() {
            return Ok(MiResult { bits: 0.0, regularized: false });
        }
        let inputs_only = |sel: &SignalSelector| sel.0.iter().all(|s| matches!(s, Signal::Input(_)));
        let outputs_only = outputs.0.iter().all(|s| matches!(s, Signal::Output(_)));
        if inputs_only(inputs) && inputs_only(given) && outputs_only {
            return self.structural_mi(inputs, outputs, given);
        }

        // order: given, inputs, outputs
        let all = given.clone().and(inputs).and(outputs);
        let joint = self.joint_covariance(&all)?;
        let g = given.len();
        let ni = inputs.len();
        let no = outputs.len();

        let (after_given, reg_a) = schur_eliminate(&joint, g);
        let out_given = sub_block(&after_given, ni, no);
        let (after_inputs, reg_b) = schur_eliminate(&after_given, ni);

        let ld_outer = log2_det(&out_given).map_err(|_| degenerate(outputs, given))?;
        let ld_inner = log2_det(&after_inputs).map_err(|_| degenerate(outputs, &given.clone().and(inputs)))?;
        let bits = 0.5 * (ld_outer - ld_inner);
        if bits < -1e-9 {
            return Err(Error::DegenerateChannel(format!(
                "negative mutual information {bits} for outputs {:?}",
                outputs.0
            )));
        }
        Ok(MiResult { bits: bits.max(0.0), regularized: reg_a || reg_b })
    }

    /// `I(inputs; outputs | given)` when only inputs are conditioned on. The
    /// conditional output covariance is assembled from the conditional input
    /// covariance and the noise covariance, which avoids the cancellation of
    /// subtracting a large signal term from the joint covariance.
    fn structural_mi(
        &self,
        inputs: &SignalSelector,
        outputs: &SignalSelector,
        given: &SignalSelector,
    ) -> Result<MiResult> {
        for &s in inputs.0.iter().chain(&given.0).chain(&outputs.0) {
            self.check(s)?;
        }
        let (outer, reg_a) = self.output_cov_given_inputs(outputs, given);
        let (inner, reg_b) = self.output_cov_given_inputs(outputs, &given.clone().and(inputs));
        let ld_outer = log2_det(&outer).map_err(|_| degenerate(outputs, given))?;
        let ld_inner = log2_det(&inner).map_err(|_| degenerate(outputs, &given.clone().and(inputs)))?;
        let bits = 0.5 * (ld_outer - ld_inner);
        if bits < -1e-9 {
            return Err(Error::DegenerateChannel(format!(
                "negative mutual information {bits} for outputs {:?}",
                outputs.0
            )));
        }
        Ok(MiResult { bits: bits.max(0.0), regularized: reg_a || reg_b })
    }

    fn output_cov_given_inputs(&self, outputs: &SignalSelector, cond: &SignalSelector) -> (Vec<Vec<f64>>, bool) {
        let n = self.num_inputs();
        let mut known = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for s in &cond.0 {
            if let Signal::Input(i) = *s {
                if !known[i] {
                    known[i] = true;
                    order.push(i);
                }
            }
        }
        let k = order.len();
        let free: Vec<usize> = (0..n).filter(|i| !known[*i]).collect();
        order.extend_from_slice(&free);
        let permuted: Vec<Vec<f64>> =
            order.iter().map(|&i| order.iter().map(|&j| self.input_cov[i][j]).collect()).collect();
        let (free_cov, regularized) = schur_eliminate(&permuted, k);

        let obs: Vec<&Observation> = outputs
            .0
            .iter()
            .map(|s| match *s {
                Signal::Output(j) => &self.observations[j],
                Signal::Input(_) => unreachable!("outputs_only checked by caller"),
            })
            .collect();
        let m = obs.len();
        let mut cov = vec![vec![0.0; m]; m];
        for a in 0..m {
            for b in a..m {
                let mut v = 0.0;
                for (fi, &i) in free.iter().enumerate() {
                    let ha = obs[a].input_coeffs[i];
                    if ha == 0.0 {
                        continue;
                    }
                    for (fj, &j) in free.iter().enumerate() {
                        v += ha * free_cov[fi][fj] * obs[b].input_coeffs[j];
                    }
                }
                for ta in &obs[a].noise {
                    for tb in &obs[b].noise {
                        if ta.source == tb.source {
                            v += ta.coeff * tb.coeff;
                        }
                    }
                }
                cov[a][b] = v;
                cov[b][a] = v;
            }
        }
        (cov, regularized)
    }

    /// `h(sel)` in bits.
    pub fn differential_entropy(&self, sel: &SignalSelector) -> Result<f64> {
        self.conditional_entropy(sel, &SignalSelector::empty())
    }

    /// `h(sel | given)` in bits.
    pub fn conditional_entropy(&self, sel: &SignalSelector, given: &SignalSelector) -> Result<f64> {
        let all = given.clone().and(sel);
        let joint = self.joint_covariance(&all)?;
        let (rest, _) = schur_eliminate(&joint, given.len());
        let ld = log2_det(&rest).map_err(|_| degenerate(sel, given))?;
        let k = sel.len() as f64;
        Ok(0.5 * (k * (2.0 * PI * E).log2() + ld))
    }
}

fn degenerate(sel: &SignalSelector, given: &SignalSelector) -> Error {
    Error::DegenerateChannel(format!("{:?} given {:?}", sel.0, given.0))
}

/// Conditions the trailing block of `m` on its first `k` variables. Returns the
/// Schur complement over the remaining variables and whether any conditioning
/// variable was dropped as linearly dependent.
fn schur_eliminate(m: &[Vec<f64>], k: usize) -> (Vec<Vec<f64>>, bool) {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut regularized = false;
    for p in 0..k {
        let pivot = a[p][p];
        if pivot <= DEPENDENT_PIVOT * m[p][p].max(1.0) {
            regularized = true;
            continue;
        }
        for i in (p + 1)..n {
            let f = a[i][p] / pivot;
            if f == 0.0 {
                continue;
            }
            for j in (p + 1)..n {
                a[i][j] -= f * a[p][j];
            }
        }
    }
    let rest = (k..n).map(|i| a[i][k..n].to_vec()).collect();
    (rest, regularized)
}

fn sub_block(m: &[Vec<f64>], start: usize, len: usize) -> Vec<Vec<f64>> {
    m[start..start + len].iter().map(|r| r[start..start + len].to_vec()).collect()
}

/// log2 of the determinant of a symmetric positive definite matrix, via
/// Gaussian elimination with diagonal pivoting.
pub(crate) fn log2_det(m: &[Vec<f64>]) -> std::result::Result<f64, ()> {
    let n = m.len();
    let mut a = m.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    for step in 0..n {
        // largest remaining diagonal entry
        let (best, _) = perm[step..].iter().enumerate().fold((step, f64::NEG_INFINITY), |acc, (off, &r)| {
            if a[r][r] > acc.1 {
                (step + off, a[r][r])
            } else {
                acc
            }
        });
        perm.swap(step, best);
        let p = perm[step];
        let pivot = a[p][p];
        if !(pivot > SINGULAR_PIVOT * m[p][p].max(f64::MIN_POSITIVE)) || pivot <= 0.0 {
            return Err(());
        }
        total += pivot.log2();
        for &i in &perm[step + 1..] {
            let f = a[i][p] / pivot;
            if f == 0.0 {
                continue;
            }
            for &j in &perm[step + 1..] {
                a[i][j] -= f * a[p][j];
            }
        }
    }
    Ok(total)
}
