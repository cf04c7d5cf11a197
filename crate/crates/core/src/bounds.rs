//! Sum-rate upper bounds: cut-set, the genie bound with an auxiliary observation
//! `Y1g` (here called the Marić bound), and the two closed-form genie bounds
//! `S1` and `S2`.
//!
//! Bounds that divide by a gain which is zero for the given channel return
//! [`Error::NotApplicable`]; [`bound_envelope`] records those as `+inf`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss_info::{LinearGaussianSystem, NoiseTerm, Observation, SignalSelector};
use crate::hull::RateHull;
use crate::model::{capacity, is_valid_covariance, ChannelGains, CovarianceParams};
use crate::optim::{self, SearchConfig, SearchSpace};
use rayon::prelude::*;

/// Output indices in the systems built by [`channel_system`].
const Y1: usize = 0;
const Y2: usize = 1;
const YR: usize = 2;
/// Noise source tag of the auxiliary noise in the Marić genie signal.
const AUX_NOISE: usize = 3;

/// Relative ties between bound values below this are broken by bound order.
const TIE_TOLERANCE: f64 = 1e-9;

/// Which covariance matrices the outer maximizations range over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceSearch {
    /// `P1 = P2 = Pr = P`; only the correlations are searched.
    #[default]
    FullPower,
    /// Correlations and all three powers in `[0, P]`.
    FullBox,
}

/// How the genie combination `u Y1 + v Y1g` has to reproduce receiver 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MaricForm {
    /// `X2` enters with coefficient `h22`, as receiver 2 sees it. Identical to
    /// [`MaricForm::Verbatim`] when `h22 = 1`.
    #[default]
    ScaledToH22,
    /// `X2` enters with coefficient 1 whatever `h22` is. For `h22 != 1` this
    /// can undercut achievable rates.
    Verbatim,
}

impl MaricForm {
    /// Required `X2` coefficient of `u Y1 + v Y1g`.
    pub fn x2_target(self, gains: &ChannelGains) -> f64 {
        match self {
            MaricForm::ScaledToH22 => gains.h22,
            MaricForm::Verbatim => 1.0,
        }
    }
}

/// Index placement used for the genie noise variance inside `Theta_ji`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum S2Convention {
    /// `Theta_ji` uses `sigma_i^2 = h_ij^2 / (h_ij^2 + h_ir^2)`.
    #[default]
    Verbatim,
    /// `Theta_ji` uses `sigma_j^2` in place of `sigma_i^2`.
    Swapped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsConfig {
    pub covariance_search: CovarianceSearch,
    /// Outer search over covariance parameters (cut-set and Marić).
    pub outer: SearchConfig,
    /// Inner minimization over the genie coefficients of the Marić bound.
    pub maric_inner: SearchConfig,
    /// Truncation of the free genie coefficients to `[-V, V]`.
    pub maric_box: f64,
    pub maric_form: MaricForm,
    /// Search over all five covariance parameters for `S2`.
    pub s2_search: SearchConfig,
    pub s2_convention: S2Convention,
    /// Also evaluate `S1` on the relabeled channel and keep the smaller value.
    pub s1_relabeled: bool,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            covariance_search: CovarianceSearch::FullPower,
            outer: SearchConfig { starts: 2, max_evals: 20_000, ..Default::default() },
            maric_inner: SearchConfig { starts: 3, max_evals: 5_000, ..Default::default() },
            maric_box: 50.0,
            maric_form: MaricForm::ScaledToH22,
            s2_search: SearchConfig { starts: 3, ..Default::default() },
            s2_convention: S2Convention::Verbatim,
            s1_relabeled: false,
        }
    }
}

/// A maximized bound together with the covariance that attains it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizedBound {
    pub value: f64,
    pub cov: CovarianceParams,
    pub evaluations: usize,
}

/// Right-hand sides of the three cut-set constraints at a fixed covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutsetEvaluation {
    pub r1_cap: f64,
    pub r2_cap: f64,
    pub sum_cap: f64,
}

impl CutsetEvaluation {
    /// Largest `R1 + R2` allowed by the three constraints together.
    pub fn max_sum(&self) -> f64 {
        self.sum_cap.min(self.r1_cap + self.r2_cap)
    }
}

/// Inputs, relay input and the three noisy observations of the channel.
pub fn channel_system(gains: &ChannelGains, cov: &CovarianceParams) -> LinearGaussianSystem {
    let mut sys = LinearGaussianSystem::from_matrix3(&cov.matrix());
    for (tag, coeffs) in [gains.rx1_coeffs(), gains.rx2_coeffs(), gains.relay_coeffs()].into_iter().enumerate() {
        sys.observe(Observation::new(coeffs.to_vec(), 1.0, tag)).expect("three finite coefficients");
    }
    sys
}

fn check_cov(cov: &CovarianceParams) -> Result<()> {
    if !is_valid_covariance(cov) {
        return Err(Error::InvalidParameter(format!("covariance {cov:?} is not positive semidefinite")));
    }
    Ok(())
}

fn inputs(idx: &[usize]) -> SignalSelector {
    SignalSelector::inputs(idx)
}

fn outputs(idx: &[usize]) -> SignalSelector {
    SignalSelector::outputs(idx)
}

pub fn cutset_region_at(gains: &ChannelGains, cov: &CovarianceParams) -> Result<CutsetEvaluation> {
    gains.validate()?;
    check_cov(cov)?;
    let sys = channel_system(gains, cov);
    let none = SignalSelector::empty();
    let (x1, x2, xr) = (0, 1, 2);

    let r1_mac = sys.mutual_information(&inputs(&[x1, xr]), &outputs(&[Y1]), &inputs(&[x2]))?;
    let r1_bc = sys.mutual_information(&inputs(&[x1]), &outputs(&[Y1, YR]), &inputs(&[x2, xr]))?;
    let r2_mac = sys.mutual_information(&inputs(&[x2, xr]), &outputs(&[Y2]), &inputs(&[x1]))?;
    let r2_bc = sys.mutual_information(&inputs(&[x2]), &outputs(&[Y2, YR]), &inputs(&[x1, xr]))?;
    let sum_mac = sys.mutual_information(&inputs(&[x1, x2, xr]), &outputs(&[Y1, Y2]), &none)?;
    let sum_bc = sys.mutual_information(&inputs(&[x1, x2]), &outputs(&[Y1, Y2, YR]), &inputs(&[xr]))?;

    Ok(CutsetEvaluation { r1_cap: r1_mac.min(r1_bc), r2_cap: r2_mac.min(r2_bc), sum_cap: sum_mac.min(sum_bc) })
}

/// Search space over covariance parameters: `(rho1, rho2)` on the unit disk,
/// followed by `(P1, P2, Pr)` in `[0, P]` for the full box.
fn covariance_space(mode: CovarianceSearch, power: f64) -> SearchSpace {
    match mode {
        CovarianceSearch::FullPower => SearchSpace::boxed(vec![-1.0, -1.0], vec![1.0, 1.0]),
        CovarianceSearch::FullBox => {
            SearchSpace::boxed(vec![-1.0, -1.0, 0.0, 0.0, 0.0], vec![1.0, 1.0, power, power, power])
        }
    }
    .with_disk(vec![0, 1], 1.0)
}

fn covariance_from_point(x: &[f64], power: f64) -> CovarianceParams {
    match x.len() {
        2 => CovarianceParams::full_power(x[0], x[1], power),
        _ => CovarianceParams::new(x[0], x[1], x[2], x[3], x[4]),
    }
}

fn maximize_over_covariance<F>(
    objective: F,
    mode: CovarianceSearch,
    power: f64,
    config: &SearchConfig,
) -> Result<OptimizedBound>
where
    F: Fn(&CovarianceParams) -> Result<f64> + Sync,
{
    let space = covariance_space(mode, power);
    let r =
        optim::grid_then_refine(|x| objective(&covariance_from_point(x, power)).unwrap_or(f64::NAN), &space, config)?;
    Ok(OptimizedBound { value: r.value, cov: covariance_from_point(&r.point, power), evaluations: r.evaluations })
}

fn check_power(power: f64) -> Result<()> {
    if !power.is_finite() || power <= 0.0 {
        return Err(Error::InvalidParameter(format!("power P = {power} must be finite and > 0")));
    }
    Ok(())
}

/// Largest sum rate in the cut-set outer bound.
pub fn cutset_sum_bound(gains: &ChannelGains, power: f64, config: &BoundsConfig) -> Result<OptimizedBound> {
    gains.validate()?;
    check_power(power)?;
    maximize_over_covariance(
        |cov| cutset_region_at(gains, cov).map(|c| c.max_sum()),
        config.covariance_search,
        power,
        &config.outer,
    )
}

/// Genie coefficients of `Y1g = d1 X1 + d2 X2 + d5 Xr + d3 Z1 + d4 Z~1`, with
/// `u = (t - v d2) / h21` and `d5 = (hr2 - u hr1) / v` derived from the free
/// ones, where `t` is [`MaricForm::x2_target`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaricSearchPoint {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

impl MaricSearchPoint {
    pub fn u(&self, gains: &ChannelGains, form: MaricForm) -> f64 {
        (form.x2_target(gains) - self.v * self.d2) / gains.h21
    }

    pub fn d5(&self, gains: &ChannelGains, form: MaricForm) -> f64 {
        (gains.hr2 - self.u(gains, form) * gains.hr1) / self.v
    }

    /// Left-hand side of the feasibility constraint; feasible iff `<= 1`.
    pub fn constraint_lhs(&self, gains: &ChannelGains, form: MaricForm) -> f64 {
        (self.u(gains, form) + self.v * self.d3).powi(2) + (self.v * self.d4).powi(2)
    }

    pub fn is_feasible(&self, gains: &ChannelGains, form: MaricForm) -> bool {
        self.v != 0.0 && gains.h21 > 0.0 && self.constraint_lhs(gains, form) <= 1.0 + 1e-12
    }

    /// The point with `v = 1` and `d2` equal to the target (so `u = 0`,
    /// `d5 = hr2`) and the given `d1`, `d3`, `d4`. Feasible iff
    /// `d3^2 + d4^2 <= 1`.
    pub fn canonical(gains: &ChannelGains, form: MaricForm, d1: f64, d3: f64, d4: f64) -> Self {
        Self { v: 1.0, d1, d2: form.x2_target(gains), d3, d4 }
    }
}

/// `I(X1, X2, Xr; Y1, Y1g)` for one feasible genie point.
pub fn maric_information_at(
    gains: &ChannelGains,
    cov: &CovarianceParams,
    point: &MaricSearchPoint,
    form: MaricForm,
) -> Result<f64> {
    if gains.h21 <= 0.0 {
        return Err(Error::NotApplicable("Marić bound needs h21 > 0".into()));
    }
    if !point.is_feasible(gains, form) {
        return Err(Error::InvalidParameter(format!("infeasible genie point {point:?}")));
    }
    let mut sys = LinearGaussianSystem::from_matrix3(&cov.matrix());
    sys.observe(Observation::new(gains.rx1_coeffs().to_vec(), 1.0, 0))?;
    sys.observe(Observation::with_noise(
        vec![point.d1, point.d2, point.d5(gains, form)],
        vec![NoiseTerm { source: 0, coeff: point.d3 }, NoiseTerm { source: AUX_NOISE, coeff: point.d4 }],
    ))?;
    sys.mutual_information(&inputs(&[0, 1, 2]), &outputs(&[0, 1]), &SignalSelector::empty())
}

/// Inner minimization of the Marić bound at a fixed covariance.
///
/// `I(X; Y1, Y1g)` is unchanged when `Y1g` is replaced by `v Y1g + u Y1`,
/// which maps every feasible point onto a canonical one (`v = 1`, `u = 0`)
/// with the same value. The search therefore runs over `(d3, d4)` on the unit
/// disk, and for each of those `d1` is set to its exact minimizer: the
/// determinant of the observation covariance is a convex quadratic in `d1`.
pub fn maric_sum_at(
    gains: &ChannelGains,
    cov: &CovarianceParams,
    config: &BoundsConfig,
) -> Result<(f64, MaricSearchPoint)> {
    gains.validate()?;
    check_cov(cov)?;
    if gains.is_silent() {
        return Ok((0.0, MaricSearchPoint::canonical(gains, config.maric_form, 0.0, 0.0, 1.0)));
    }
    if gains.h21 <= 0.0 {
        return Err(Error::NotApplicable("Marić bound needs h21 > 0".into()));
    }
    let (vbox, form) = (config.maric_box, config.maric_form);
    let point_for = |d3: f64, d4: f64| {
        MaricSearchPoint::canonical(gains, form, best_genie_d1(gains, cov, form, d3).clamp(-vbox, vbox), d3, d4)
    };
    let space = SearchSpace::boxed(vec![-1.0, -1.0], vec![1.0, 1.0]).with_disk(vec![0, 1], 1.0);
    let a = cov.matrix();
    let objective = |x: &[f64]| canonical_information(gains, &a, &point_for(x[0], x[1]));
    let r = optim::minimize(objective, &space, &config.maric_inner)?;
    Ok((r.value, point_for(r.point[0], r.point[1])))
}

/// `I(X; Y1, Y1g)` for a canonical genie point through the 2x2 determinants
/// directly. A genie whose noise is a copy of `Z1` gives `+inf`.
fn canonical_information(gains: &ChannelGains, a: &[[f64; 3]; 3], point: &MaricSearchPoint) -> f64 {
    let noise_det = point.d4 * point.d4;
    if noise_det == 0.0 {
        return f64::INFINITY;
    }
    let h = gains.rx1_coeffs();
    let g = [point.d1, point.d2, gains.hr2];
    let quad =
        |x: &[f64; 3], y: &[f64; 3]| (0..3).map(|i| (0..3).map(|j| x[i] * a[i][j] * y[j]).sum::<f64>()).sum::<f64>();
    let yy = quad(&h, &h) + 1.0;
    let gg = quad(&g, &g) + point.d3 * point.d3 + noise_det;
    let yg = quad(&h, &g) + point.d3;
    let det = yy * gg - yg * yg;
    if det <= 0.0 {
        return f64::INFINITY;
    }
    0.5 * (det / noise_det).log2()
}

/// Minimizer over `d1` of `det Cov(Y1, Y1g)` for the canonical genie
/// `Y1g = d1 X1 + t X2 + hr2 Xr + d3 Z1 + d4 Z~1`. With `h` the receiver-1
/// coefficients and `g0 = (0, t, hr2)`, the determinant is
/// `a (A11 e^2 + 2 (A g0)_1 e + ...) - ((A h)_1 e + h'A g0 + d3)^2` with
/// `a = h'A h + 1`, whose unique stationary point is returned.
fn best_genie_d1(gains: &ChannelGains, cov: &CovarianceParams, form: MaricForm, d3: f64) -> f64 {
    let a = cov.matrix();
    let h = gains.rx1_coeffs();
    let g0 = [0.0, form.x2_target(gains), gains.hr2];
    let mul = |v: &[f64; 3]| -> [f64; 3] { [0, 1, 2].map(|i| a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2]) };
    let ah = mul(&h);
    let ag0 = mul(&g0);
    let dot = |x: &[f64; 3], y: &[f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    let total = dot(&h, &ah) + 1.0;
    let curvature = total * a[0][0] - ah[0] * ah[0];
    if curvature <= 0.0 {
        return 0.0;
    }
    (ah[0] * (dot(&h, &ag0) + d3) - total * ag0[0]) / curvature
}

/// `max_A min_d I(X; Y1, Y1g)`: each outer iterate runs the inner
/// minimization to its own convergence.
pub fn maric_sum_bound(gains: &ChannelGains, power: f64, config: &BoundsConfig) -> Result<OptimizedBound> {
    gains.validate()?;
    check_power(power)?;
    if gains.is_silent() {
        return Ok(OptimizedBound { value: 0.0, cov: CovarianceParams::full_power(0.0, 0.0, power), evaluations: 0 });
    }
    if gains.h21 <= 0.0 {
        return Err(Error::NotApplicable("Marić bound needs h21 > 0".into()));
    }
    maximize_over_covariance(
        |cov| maric_sum_at(gains, cov, config).map(|(v, _)| v),
        config.covariance_search,
        power,
        &config.outer,
    )
}

fn interference_term(gains: &ChannelGains, power: f64) -> f64 {
    capacity(gains.h22.powi(2) * power / (1.0 + gains.h21.powi(2).max(gains.h2r.powi(2)) * power))
}

/// `S1` bound at fixed correlations.
pub fn s1_bound_param(gains: &ChannelGains, power: f64, rho1: f64, rho2: f64) -> Result<f64> {
    gains.validate()?;
    check_power(power)?;
    if rho1 * rho1 + rho2 * rho2 > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!("rho1^2 + rho2^2 > 1 for ({rho1}, {rho2})")));
    }
    if gains.is_silent() {
        return Ok(0.0);
    }
    if gains.h21 <= 0.0 {
        return Err(Error::NotApplicable("S1 bound needs h21 > 0".into()));
    }
    let g = gains;
    let rx1 = g.h11.powi(2) + g.h21.powi(2) + g.hr1.powi(2) + 2.0 * g.hr1 * g.h11 * rho1 + 2.0 * g.hr1 * g.h21 * rho2;
    Ok(interference_term(g, power) + capacity(g.h2r.powi(2) / g.h21.powi(2)) + capacity(power * rx1.max(0.0)))
}

/// `S1` bound maximized over the correlations, in closed form.
pub fn s1_bound(gains: &ChannelGains, power: f64) -> Result<f64> {
    gains.validate()?;
    check_power(power)?;
    if gains.is_silent() {
        return Ok(0.0);
    }
    if gains.h21 <= 0.0 {
        return Err(Error::NotApplicable("S1 bound needs h21 > 0".into()));
    }
    let g = gains;
    let direct = (g.h11.powi(2) + g.h21.powi(2)).sqrt();
    let rx1 = g.h11.powi(2) + g.h21.powi(2) + g.hr1.powi(2) + 2.0 * g.hr1 * direct;
    Ok(capacity(power * rx1) + interference_term(g, power) + capacity(g.h2r.powi(2) / g.h21.powi(2)))
}

/// `S1`, optionally tightened by also bounding the relabeled channel.
pub fn s1_bound_with(gains: &ChannelGains, power: f64, config: &BoundsConfig) -> Result<f64> {
    let direct = s1_bound(gains, power);
    if !config.s1_relabeled {
        return direct;
    }
    smaller_of(direct, s1_bound(&gains.swapped(), power))
}

/// Genie noise variances and the two `Theta` terms of the `S2` bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S2Intermediates {
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub theta12: f64,
    pub theta21: f64,
}

pub fn s2_intermediates(gains: &ChannelGains, cov: &CovarianceParams, convention: S2Convention) -> S2Intermediates {
    let g = gains;
    let sigma1_sq = g.h12.powi(2) / (g.h12.powi(2) + g.h1r.powi(2));
    let sigma2_sq = g.h21.powi(2) / (g.h21.powi(2) + g.h2r.powi(2));
    let (p1, p2, pr) = (cov.p1, cov.p2, cov.pr);

    // Theta_ji with j the interferer and i the receiver
    struct Link {
        h_ji: f64,
        h_ri: f64,
        h_ii: f64,
        h_ij: f64,
        rho_i: f64,
        rho_j: f64,
        p_i: f64,
        p_j: f64,
        sigma_i_sq: f64,
        sigma_j_sq: f64,
    }
    let theta = |l: Link| {
        let sigma_sq = match convention {
            S2Convention::Verbatim => l.sigma_i_sq,
            S2Convention::Swapped => l.sigma_j_sq,
        };
        let own = l.h_ii * l.p_i.sqrt() + l.h_ri * l.rho_i * pr.sqrt();
        l.h_ji.powi(2) * l.p_j
            + l.h_ri.powi(2) * (1.0 - l.rho_i.powi(2)) * pr
            + 2.0 * l.h_ji * l.h_ri * l.rho_j * (l.p_j * pr).sqrt()
            + sigma_sq * own.powi(2) / (sigma_sq + l.h_ij.powi(2) * l.p_i)
    };
    let theta12 = theta(Link {
        h_ji: g.h12,
        h_ri: g.hr2,
        h_ii: g.h22,
        h_ij: g.h21,
        rho_i: cov.rho2,
        rho_j: cov.rho1,
        p_i: p2,
        p_j: p1,
        sigma_i_sq: sigma2_sq,
        sigma_j_sq: sigma1_sq,
    });
    let theta21 = theta(Link {
        h_ji: g.h21,
        h_ri: g.hr1,
        h_ii: g.h11,
        h_ij: g.h12,
        rho_i: cov.rho1,
        rho_j: cov.rho2,
        p_i: p1,
        p_j: p2,
        sigma_i_sq: sigma1_sq,
        sigma_j_sq: sigma2_sq,
    });
    S2Intermediates { sigma1_sq, sigma2_sq, theta12, theta21 }
}

pub fn s2_bound_at(gains: &ChannelGains, cov: &CovarianceParams, convention: S2Convention) -> Result<f64> {
    gains.validate()?;
    check_cov(cov)?;
    if gains.is_silent() {
        return Ok(0.0);
    }
    if gains.h12 <= 0.0 || gains.h21 <= 0.0 {
        return Err(Error::NotApplicable("S2 bound needs h12 > 0 and h21 > 0".into()));
    }
    let s = s2_intermediates(gains, cov, convention);
    Ok(capacity(s.theta12.max(0.0))
        + capacity(s.theta21.max(0.0))
        + capacity(gains.h1r.powi(2) / gains.h12.powi(2))
        + capacity(gains.h2r.powi(2) / gains.h21.powi(2)))
}

/// `S2` maximized over all five covariance parameters.
pub fn s2_bound(gains: &ChannelGains, power: f64, config: &BoundsConfig) -> Result<OptimizedBound> {
    gains.validate()?;
    check_power(power)?;
    if gains.is_silent() {
        return Ok(OptimizedBound { value: 0.0, cov: CovarianceParams::full_power(0.0, 0.0, power), evaluations: 0 });
    }
    if gains.h12 <= 0.0 || gains.h21 <= 0.0 {
        return Err(Error::NotApplicable("S2 bound needs h12 > 0 and h21 > 0".into()));
    }
    maximize_over_covariance(
        |cov| s2_bound_at(gains, cov, config.s2_convention),
        CovarianceSearch::FullBox,
        power,
        &config.s2_search,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Cs,
    M,
    S1,
    S2,
}

impl BoundKind {
    pub const ALL: [BoundKind; 4] = [BoundKind::Cs, BoundKind::M, BoundKind::S1, BoundKind::S2];

    pub fn label(&self) -> &'static str {
        match self {
            BoundKind::Cs => "cs",
            BoundKind::M => "m",
            BoundKind::S1 => "s1",
            BoundKind::S2 => "s2",
        }
    }
}

/// One row of a bound sweep; inapplicable bounds are `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCurvePoint {
    pub p_db: f64,
    pub r_cs: f64,
    pub r_m: f64,
    pub r_s1: f64,
    pub r_s2: f64,
    pub envelope: f64,
    pub active: Option<BoundKind>,
}

impl BoundCurvePoint {
    pub fn get(&self, kind: BoundKind) -> f64 {
        match kind {
            BoundKind::Cs => self.r_cs,
            BoundKind::M => self.r_m,
            BoundKind::S1 => self.r_s1,
            BoundKind::S2 => self.r_s2,
        }
    }
}

fn or_infinity(r: Result<f64>) -> Result<f64> {
    match r {
        Ok(v) => Ok(v),
        Err(Error::NotApplicable(_)) | Err(Error::DegenerateChannel(_)) | Err(Error::EmptyFeasibleSet) => {
            Ok(f64::INFINITY)
        }
        Err(e) => Err(e),
    }
}

/// Evaluates all four sum-rate bounds and their minimum.
pub fn bound_envelope(gains: &ChannelGains, power: f64, config: &BoundsConfig) -> Result<BoundCurvePoint> {
    gains.validate()?;
    check_power(power)?;
    let r_cs = or_infinity(cutset_sum_bound(gains, power, config).map(|b| b.value))?;
    let r_m = or_infinity(maric_sum_bound(gains, power, config).map(|b| b.value))?;
    let r_s1 = or_infinity(s1_bound_with(gains, power, config))?;
    let r_s2 = or_infinity(s2_bound(gains, power, config).map(|b| b.value))?;
    let mut point = BoundCurvePoint {
        p_db: crate::model::linear_to_db(power),
        r_cs,
        r_m,
        r_s1,
        r_s2,
        envelope: f64::INFINITY,
        active: None,
    };
    let (envelope, active) = envelope_of(&point);
    point.envelope = envelope;
    point.active = active;
    Ok(point)
}

/// Minimum of the finite entries; ties within `1e-9` go to the earliest bound
/// in the order CS, M, S1, S2.
pub fn envelope_of(point: &BoundCurvePoint) -> (f64, Option<BoundKind>) {
    let finite: Vec<(BoundKind, f64)> =
        BoundKind::ALL.iter().map(|k| (*k, point.get(*k))).filter(|(_, v)| v.is_finite()).collect();
    let Some(min) = finite.iter().map(|(_, v)| *v).reduce(f64::min) else {
        return (f64::INFINITY, None);
    };
    let active = finite.iter().find(|(_, v)| *v - min <= TIE_TOLERANCE * min.abs().max(1.0)).map(|(k, _)| *k);
    (min, active)
}

/// Full-power covariances on a polar grid of the correlation disk: the
/// origin plus `rings` circles of `spokes` points, the outermost on the
/// boundary.
pub fn covariance_samples(power: f64, rings: usize, spokes: usize) -> Vec<CovarianceParams> {
    let mut out = vec![CovarianceParams::full_power(0.0, 0.0, power)];
    for i in 1..=rings {
        let r = i as f64 / rings as f64;
        for k in 0..spokes {
            let t = std::f64::consts::TAU * k as f64 / spokes as f64;
            out.push(CovarianceParams::full_power(r * t.cos(), r * t.sin(), power));
        }
    }
    out
}

/// Outer region of one bound: per covariance, the cut-set pentagon with its
/// sum constraint tightened by the bound at that covariance, then the
/// convex hull of the union over `covs` (time sharing keeps the capacity
/// region inside it). An inapplicable bound leaves the cut-set pentagon.
pub fn outer_region(
    gains: &ChannelGains,
    kind: BoundKind,
    covs: &[CovarianceParams],
    config: &BoundsConfig,
) -> Result<RateHull> {
    gains.validate()?;
    let vertices: Vec<[[f64; 2]; 2]> = covs
        .par_iter()
        .map(|cov| {
            let cs = cutset_region_at(gains, cov)?;
            let cap = match kind {
                BoundKind::Cs => Ok(f64::INFINITY),
                BoundKind::M => maric_sum_at(gains, cov, config).map(|r| r.0),
                BoundKind::S1 => s1_at(gains, cov, config),
                BoundKind::S2 => s2_bound_at(gains, cov, config.s2_convention),
            };
            let sum = cs.sum_cap.min(or_infinity(cap)?);
            let (a, b) = (cs.r1_cap.min(sum), cs.r2_cap.min(sum));
            Ok([[a, (sum - a).clamp(0.0, b)], [(sum - b).clamp(0.0, a), b]])
        })
        .collect::<Result<_>>()?;
    let points: Vec<[f64; 2]> = vertices.into_iter().flatten().collect();
    Ok(RateHull::from_points(&points).0)
}

/// `S1` at the correlations of `cov`, which must have equal source and relay
/// powers.
fn s1_at(gains: &ChannelGains, cov: &CovarianceParams, config: &BoundsConfig) -> Result<f64> {
    if cov.p1 != cov.p2 || cov.p1 != cov.pr {
        return Err(Error::InvalidParameter("S1 region needs equal powers".into()));
    }
    let direct = s1_bound_param(gains, cov.p1, cov.rho1, cov.rho2);
    if !config.s1_relabeled {
        return direct;
    }
    smaller_of(direct, s1_bound_param(&gains.swapped(), cov.p1, cov.rho2, cov.rho1))
}

/// The smaller value when both exist, the one that exists otherwise.
fn smaller_of(a: Result<f64>, b: Result<f64>) -> Result<f64> {
    match (a, b) {
        (Ok(a), Ok(b)) => Ok(a.min(b)),
        (Ok(a), Err(_)) | (Err(_), Ok(a)) => Ok(a),
        (Err(e), Err(_)) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::db_to_linear;

    fn fig2() -> ChannelGains {
        ChannelGains {
            h11: 1.0,
            h22: 1.0,
            hr2: 1.0,
            hr1: 2.0,
            h12: 2.0,
            h21: 5f64.sqrt(),
            h1r: 10f64.sqrt(),
            h2r: 10f64.sqrt(),
        }
    }

    fn fig4() -> ChannelGains {
        ChannelGains { hr2: 1.0, ..fig2() }
    }

    #[test]
    fn zero_gains_give_zero_caps() {
        let c = cutset_region_at(&ChannelGains::zero(), &CovarianceParams::full_power(0.3, 0.2, 10.0)).unwrap();
        assert_eq!((c.r1_cap, c.r2_cap, c.sum_cap), (0.0, 0.0, 0.0));
        let cfg = BoundsConfig::default();
        assert_eq!(cutset_sum_bound(&ChannelGains::zero(), 10.0, &cfg).unwrap().value, 0.0);
        assert_eq!(maric_sum_bound(&ChannelGains::zero(), 10.0, &cfg).unwrap().value, 0.0);
        assert_eq!(s1_bound(&ChannelGains::zero(), 10.0).unwrap(), 0.0);
        assert_eq!(s2_bound(&ChannelGains::zero(), 10.0, &cfg).unwrap().value, 0.0);
    }

    #[test]
    fn disconnected_relay_reduces_to_ic_cuts() {
        let g = ChannelGains { h11: 1.5, h12: 0.7, h21: 0.4, h22: 2.0, ..ChannelGains::zero() };
        let cov = CovarianceParams::full_power(0.0, 0.0, 10.0);
        let c = cutset_region_at(&g, &cov).unwrap();
        assert!((c.r1_cap - capacity(1.5f64.powi(2) * 10.0)).abs() < 1e-12);
        assert!((c.r2_cap - capacity(4.0 * 10.0)).abs() < 1e-12);
    }

    #[test]
    fn parallel_links_cutset() {
        let g = ChannelGains { h11: 1.0, h22: 1.0, ..ChannelGains::zero() };
        let b = cutset_sum_bound(&g, 3.0, &BoundsConfig::default()).unwrap();
        assert!((b.value - 2.0).abs() < 1e-9, "{}", b.value);
    }

    #[test]
    fn rejects_invalid_covariance() {
        let cov = CovarianceParams::full_power(0.8, 0.8, 1.0);
        assert!(matches!(cutset_region_at(&fig2(), &cov), Err(Error::InvalidParameter(_))));
    }

    const VERBATIM: MaricForm = MaricForm::Verbatim;
    const SCALED: MaricForm = MaricForm::ScaledToH22;

    #[test]
    fn marić_pure_noise_genie_equals_single_receiver_information() {
        // d2 = 0 and d5 = 0 need hr1 = h21 * hr2
        let g = ChannelGains { h11: 1.0, h12: 0.5, h21: 2.0, h22: 1.0, h1r: 1.0, h2r: 1.0, hr1: 1.0, hr2: 0.5 };
        let cov = CovarianceParams::full_power(0.3, -0.4, 7.0);
        let v = 0.5;
        let d4 = (1.0 - 1.0 / (g.h21 * g.h21)).sqrt() / v;
        let p = MaricSearchPoint { v, d1: 0.0, d2: 0.0, d3: 0.0, d4 };
        assert!(p.is_feasible(&g, VERBATIM));
        assert!(p.d5(&g, VERBATIM).abs() < 1e-15);
        let mi = maric_information_at(&g, &cov, &p, VERBATIM).unwrap();
        let sys = channel_system(&g, &cov);
        let single = sys.mutual_information(&inputs(&[0, 1, 2]), &outputs(&[Y1]), &SignalSelector::empty()).unwrap();
        assert!((mi - single).abs() < 1e-12);
    }

    #[test]
    fn marić_forms_agree_for_unit_direct_gain() {
        let g = fig2();
        let p = MaricSearchPoint { v: 1.5, d1: 0.2, d2: 0.4, d3: 0.1, d4: 0.2 };
        assert_eq!(p.u(&g, VERBATIM), p.u(&g, SCALED));
        assert_eq!(p.constraint_lhs(&g, VERBATIM), p.constraint_lhs(&g, SCALED));
        let cfg = BoundsConfig::default();
        let cov = CovarianceParams::full_power(0.2, 0.1, 10.0);
        let scaled = maric_sum_at(&g, &cov, &cfg).unwrap().0;
        let verbatim = maric_sum_at(&g, &cov, &BoundsConfig { maric_form: VERBATIM, ..cfg }).unwrap().0;
        assert_eq!(scaled, verbatim);
    }

    #[test]
    fn marić_scaled_form_stays_above_interference_as_noise() {
        // h22 = 2: the verbatim genie mimics a receiver 2 with a weaker direct link
        let g = ChannelGains { h11: 2.0, h22: 2.0, hr1: 0.2, hr2: 0.2, h12: 0.5, h21: 0.5, h1r: 0.2, h2r: 0.2 };
        let p = 0.1;
        let tin = 2.0 * capacity(g.h11 * g.h11 * p / (1.0 + g.h21 * g.h21 * p));
        let cfg = BoundsConfig::default();
        let scaled = maric_sum_bound(&g, p, &cfg).unwrap().value;
        let verbatim = maric_sum_bound(&g, p, &BoundsConfig { maric_form: VERBATIM, ..cfg }).unwrap().value;
        assert!(scaled >= tin, "{scaled} < {tin}");
        assert!(verbatim < tin, "{verbatim} >= {tin}");
    }

    #[test]
    fn marić_canonical_point_is_feasible_and_value_invariant() {
        let g = ChannelGains { h22: 1.7, ..fig2() };
        let cov = CovarianceParams::full_power(0.3, 0.3, 100.0);
        for form in [VERBATIM, SCALED] {
            let p = MaricSearchPoint { v: 2.5, d1: 0.7, d2: -1.2, d3: 0.0, d4: 0.1 };
            // choose d3 so that u + v d3 = 0.3
            let p = MaricSearchPoint { d3: (0.3 - p.u(&g, form)) / p.v, ..p };
            assert!(p.is_feasible(&g, form));
            let direct = maric_information_at(&g, &cov, &p, form).unwrap();
            // v Y1g + u Y1 has X1 coefficient v d1 + u h11, Z1 coefficient 0.3, aux noise v d4
            let u = p.u(&g, form);
            let canon = MaricSearchPoint::canonical(&g, form, p.v * p.d1 + u * g.h11, 0.3, p.v * p.d4);
            assert!(canon.is_feasible(&g, form));
            assert!(canon.u(&g, form).abs() < 1e-15);
            assert!((canon.d5(&g, form) - g.hr2).abs() < 1e-15);
            let reduced = maric_information_at(&g, &cov, &canon, form).unwrap();
            assert!((direct - reduced).abs() < 1e-9, "{direct} vs {reduced}");
        }
    }

    #[test]
    fn marić_closed_form_matches_engine() {
        let g = ChannelGains { h22: 0.6, ..fig2() };
        for form in [VERBATIM, SCALED] {
            for (cov, d1, d3, d4) in [
                (CovarianceParams::full_power(0.3, 0.3, 100.0), 0.7, 0.2, 0.5),
                (CovarianceParams::new(-0.5, 0.1, 2.0, 0.3, 5.0), -4.0, -0.6, 0.1),
                (CovarianceParams::full_power(0.0, 0.99, 1e5), 12.0, 0.0, 1.0),
            ] {
                let p = MaricSearchPoint::canonical(&g, form, d1, d3, d4);
                let engine = maric_information_at(&g, &cov, &p, form).unwrap();
                let closed = canonical_information(&g, &cov.matrix(), &p);
                assert!((engine - closed).abs() < 1e-9 * engine.max(1.0), "{engine} vs {closed}");
            }
        }
        let p = MaricSearchPoint::canonical(&g, SCALED, 0.0, 1.0, 0.0);
        assert_eq!(canonical_information(&g, &CovarianceParams::full_power(0.0, 0.0, 1.0).matrix(), &p), f64::INFINITY);
    }

    #[test]
    fn marić_needs_cross_gain() {
        let g = ChannelGains { h21: 0.0, ..fig2() };
        let cov = CovarianceParams::full_power(0.0, 0.0, 1.0);
        assert!(matches!(maric_sum_at(&g, &cov, &BoundsConfig::default()), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn marić_inner_value_is_below_unminimized_information() {
        let g = fig2();
        let cov = CovarianceParams::full_power(0.3, 0.3, 100.0);
        let (v, point) = maric_sum_at(&g, &cov, &BoundsConfig::default()).unwrap();
        assert!(point.is_feasible(&g, SCALED));
        assert!((maric_information_at(&g, &cov, &point, SCALED).unwrap() - v).abs() < 1e-9);
        for (d1, d3, d4) in [(0.0, 0.6, 0.3), (3.0, 0.0, 1.0), (-1.0, 0.6, -0.8)] {
            let p = MaricSearchPoint::canonical(&g, SCALED, d1, d3, d4);
            assert!(v <= maric_information_at(&g, &cov, &p, SCALED).unwrap() + 1e-12);
        }
    }

    #[test]
    fn s1_direct_substitution() {
        let g = ChannelGains { h11: 1.0, h22: 1.0, h21: 1.0, h2r: 1.0, ..ChannelGains::zero() };
        let v = s1_bound_param(&g, 1.0, 0.0, 0.0).unwrap();
        // h22^2 P / (1 + max(h21^2, h2r^2) P) = 1/2
        assert!((v - (capacity(0.5) + capacity(1.0) + capacity(2.0))).abs() < 1e-15);
        // the receiver-1 term still carries the cross link: C(P h21^2)
        let only_cross = ChannelGains { h21: 1.7, ..ChannelGains::zero() };
        assert_eq!(s1_bound_param(&only_cross, 5.0, 0.0, 0.0).unwrap(), capacity(5.0 * 1.7 * 1.7));
        assert!(matches!(s1_bound(&ChannelGains { h21: 0.0, ..fig2() }, 1.0), Err(Error::NotApplicable(_))));
        assert!(s1_bound_param(&fig2(), 1.0, 0.9, 0.9).is_err());
    }

    #[test]
    fn s1_closed_form_ignores_correlation_without_relay_link() {
        let g = ChannelGains { hr1: 0.0, ..fig2() };
        let closed = s1_bound(&g, 30.0).unwrap();
        for (r1, r2) in [(0.0, 0.0), (0.6, -0.8), (-1.0, 0.0)] {
            assert!((s1_bound_param(&g, 30.0, r1, r2).unwrap() - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn s1_fig2_cross_term() {
        let g = fig2();
        assert!((capacity(g.h2r.powi(2) / g.h21.powi(2)) - 0.5 * 3f64.log2()).abs() < 1e-12);
        assert!((0.5 * 3f64.log2() - 0.792_481_250_360_578_1).abs() < 1e-15);
    }

    #[test]
    fn s1_fig2_at_full_relay_correlation() {
        // mpmath, 30 digits: C(100/1001) + C(2) + C(100 * (1 + 5 + 4 + 4))
        let v = s1_bound_param(&fig2(), 100.0, 1.0, 0.0).unwrap();
        assert!((v - 6.087_288_117_940_175).abs() < 1e-12, "{v}");
    }

    #[test]
    fn s2_limits() {
        // only cross links: Theta_ji = h_ji^2 P_j
        let g = ChannelGains { h12: 1.0, h21: 1.0, ..ChannelGains::zero() };
        let cov = CovarianceParams::full_power(0.0, 0.0, 3.0);
        let v = s2_bound_at(&g, &cov, S2Convention::Verbatim).unwrap();
        assert!((v - 2.0 * capacity(3.0)).abs() < 1e-12);

        // vanishing relay power
        let g = fig2();
        let cov = CovarianceParams::new(0.0, 0.0, 2.0, 3.0, 0.0);
        let s = s2_intermediates(&g, &cov, S2Convention::Verbatim);
        let expect12 = g.h12.powi(2) * 2.0 + s.sigma2_sq * g.h22.powi(2) * 3.0 / (s.sigma2_sq + g.h21.powi(2) * 3.0);
        let expect21 = g.h21.powi(2) * 3.0 + s.sigma1_sq * g.h11.powi(2) * 2.0 / (s.sigma1_sq + g.h12.powi(2) * 2.0);
        assert!((s.theta12 - expect12).abs() < 1e-12);
        assert!((s.theta21 - expect21).abs() < 1e-12);
        assert!(matches!(
            s2_bound_at(&ChannelGains { h12: 0.0, ..g }, &cov, S2Convention::Verbatim),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn outer_regions_of_fig4() {
        let g = fig2();
        let cfg = BoundsConfig::default();
        let covs = covariance_samples(100.0, 8, 24);
        assert_eq!(covs.len(), 1 + 8 * 24);
        let cs = outer_region(&g, BoundKind::Cs, &covs, &cfg).unwrap();
        let s1 = outer_region(&g, BoundKind::S1, &covs, &cfg).unwrap();
        // tightening the sum constraint can only shrink the region
        for v in &s1.vertices {
            assert!(cs.contains(*v, 1e-12));
        }
        assert!(s1.max_sum() <= s1_bound(&g, 100.0).unwrap() + 1e-12);
        assert!(cs.max_sum() <= cutset_sum_bound(&g, 100.0, &cfg).unwrap().value + 1e-6);
        let silent = outer_region(&ChannelGains::zero(), BoundKind::M, &covs, &cfg).unwrap();
        assert_eq!(silent.vertices, vec![[0.0, 0.0]]);
    }

    #[test]
    fn envelope_ties_and_infinities() {
        let p = BoundCurvePoint {
            p_db: 0.0,
            r_cs: 2.0,
            r_m: f64::INFINITY,
            r_s1: 2.0 + 1e-12,
            r_s2: 3.0,
            envelope: 0.0,
            active: None,
        };
        assert_eq!(envelope_of(&p), (2.0, Some(BoundKind::Cs)));
        let p = BoundCurvePoint { r_cs: f64::INFINITY, r_s1: f64::INFINITY, r_s2: f64::INFINITY, ..p };
        assert_eq!(envelope_of(&p), (f64::INFINITY, None));
    }

    #[test]
    fn envelope_without_interference_is_cutset() {
        let g = ChannelGains { h11: 1.0, h22: 1.0, ..ChannelGains::zero() };
        let e = bound_envelope(&g, 10.0, &BoundsConfig::default()).unwrap();
        assert!(e.r_m.is_infinite() && e.r_s1.is_infinite() && e.r_s2.is_infinite());
        assert!((e.envelope - 2.0 * capacity(10.0)).abs() < 1e-9);
        assert_eq!(e.active, Some(BoundKind::Cs));
    }

    #[test]
    fn fig4_joint_output_covariance() {
        let g = fig4();
        let cov = CovarianceParams::full_power(0.0, 0.0, 100.0);
        let sys = channel_system(&g, &cov);
        let m = sys.joint_covariance(&outputs(&[Y1, Y2])).unwrap();
        let p = 100.0;
        let y1 = 1.0 + p * (g.h11.powi(2) + g.h21.powi(2) + g.hr1.powi(2));
        let y2 = 1.0 + p * (g.h12.powi(2) + g.h22.powi(2) + g.hr2.powi(2));
        let c = p * (g.h11 * g.h12 + g.h21 * g.h22 + g.hr1 * g.hr2);
        assert!((m[0][0] - y1).abs() < 1e-9 && (m[1][1] - y2).abs() < 1e-9);
        assert!((m[0][1] - c).abs() < 1e-9 && (m[1][0] - c).abs() < 1e-9);
        assert!((db_to_linear(20.0) - p).abs() < 1e-12);
    }
}
