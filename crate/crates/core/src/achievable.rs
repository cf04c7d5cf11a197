//! Achievable rates from block Markov superposition coding at the sources,
//! decode-and-forward at the relay and backward decoding at the receivers.
//!
//! For a power allocation `zeta` the achievable split rates
//! `(rp1, rc1, rp2, rc2)` form a polytope; the region is the union over
//! `zeta` of its projections `(rp1 + rc1, rp2 + rc2)`, closed under time
//! sharing. The frontier is traced with weighted-sum linear programs over a
//! deterministic sample of `zeta`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::RateHull;
use crate::model::{capacity, ChannelGains, SymmetricChannel};
use crate::optim::{self, SearchConfig, SearchSpace};
use crate::simplex;

/// The seven power fractions. Source 1 puts `alpha` on the part the relay
/// already knows and splits each part with `gamma` (common) / `1 - gamma`
/// (private); source 2 does the same with `beta`, `delta`. The relay gives
/// `eta` of its power to user 1's messages, split by `mu`, and `1 - eta` to
/// user 2's, split by `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub eta: f64,
    pub mu: f64,
    pub nu: f64,
}

impl PowerAllocation {
    pub fn from_array(z: [f64; 7]) -> Result<Self> {
        let p = Self { alpha: z[0], beta: z[1], gamma: z[2], delta: z[3], eta: z[4], mu: z[5], nu: z[6] };
        p.validate()?;
        Ok(p)
    }

    pub fn uniform(v: f64) -> Result<Self> {
        Self::from_array([v; 7])
    }

    pub fn as_array(&self) -> [f64; 7] {
        [self.alpha, self.beta, self.gamma, self.delta, self.eta, self.mu, self.nu]
    }

    pub fn validate(&self) -> Result<()> {
        match self.as_array().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            Some(v) => Err(Error::InvalidParameter(format!("power fraction {v} outside [0, 1]"))),
            None => Ok(()),
        }
    }

    /// The allocation that plays the same role after swapping the two users.
    pub fn mirrored(&self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
            gamma: self.delta,
            delta: self.gamma,
            eta: 1.0 - self.eta,
            mu: self.nu,
            nu: self.mu,
        }
    }

    fn from_point(x: &[f64]) -> Self {
        let c = |v: f64| v.clamp(0.0, 1.0);
        Self { alpha: c(x[0]), beta: c(x[1]), gamma: c(x[2]), delta: c(x[3]), eta: c(x[4]), mu: c(x[5]), nu: c(x[6]) }
    }
}

/// Amplitudes at receiver `j` (index `j - 1`) of user 1's private / common
/// layer (`h1p`, `h1c`) and user 2's (`h2p`, `h2c`), each combining the
/// source's and the relay's coherent contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveGains {
    pub h1p: [f64; 2],
    pub h1c: [f64; 2],
    pub h2p: [f64; 2],
    pub h2c: [f64; 2],
}

pub fn effective_gains(gains: &ChannelGains, zeta: &PowerAllocation) -> EffectiveGains {
    let z = zeta;
    let (a, b, g, d, e, m, n) = (z.alpha, z.beta, z.gamma, z.delta, z.eta, z.mu, z.nu);
    let from1 = [gains.h11, gains.h12];
    let from2 = [gains.h21, gains.h22];
    let relay = [gains.hr1, gains.hr2];
    let at = |f: &dyn Fn(usize) -> f64| [f(0), f(1)];
    EffectiveGains {
        h1p: at(&|j| from1[j] * (a * (1.0 - g)).sqrt() + relay[j] * (e * (1.0 - m)).sqrt()),
        h1c: at(&|j| from1[j] * (a * g).sqrt() + relay[j] * (e * m).sqrt()),
        h2p: at(&|j| from2[j] * (b * (1.0 - d)).sqrt() + relay[j] * ((1.0 - e) * (1.0 - n)).sqrt()),
        h2c: at(&|j| from2[j] * (b * d).sqrt() + relay[j] * ((1.0 - e) * n).sqrt()),
    }
}

/// Private and common rates of both users, bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RateSplit {
    pub rp1: f64,
    pub rc1: f64,
    pub rp2: f64,
    pub rc2: f64,
}

impl RateSplit {
    pub fn from_array(x: [f64; 4]) -> Self {
        Self { rp1: x[0], rc1: x[1], rp2: x[2], rc2: x[3] }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.rp1, self.rc1, self.rp2, self.rc2]
    }

    pub fn r1(&self) -> f64 {
        self.rp1 + self.rc1
    }

    pub fn r2(&self) -> f64 {
        self.rp2 + self.rc2
    }
}

/// `mask = (a1, a2, a3, a4)` selects `(rp1, rc1, rp2, rc2)` in the relay's
/// joint decoding constraint `a1 rp1 + a2 rc1 + a3 rp2 + a4 rc2 <= cap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelayCap {
    pub mask: [u8; 4],
    pub cap: f64,
}

fn check_power(power: f64) -> Result<()> {
    if !power.is_finite() || power <= 0.0 {
        return Err(Error::InvalidParameter(format!("power P = {power} must be finite and > 0")));
    }
    Ok(())
}

/// The 15 nonzero masks in binary order of `a1 a2 a3 a4`.
pub fn relay_decode_caps(gains: &ChannelGains, zeta: &PowerAllocation, power: f64) -> Result<Vec<RelayCap>> {
    check_power(power)?;
    zeta.validate()?;
    let z = zeta;
    let (h1r2, h2r2) = (gains.h1r * gains.h1r, gains.h2r * gains.h2r);
    Ok((1u8..16)
        .map(|m| {
            let mask = [(m >> 3) & 1, (m >> 2) & 1, (m >> 1) & 1, m & 1];
            let a = mask.map(f64::from);
            let snr = power
                * ((1.0 - z.alpha) * (a[0] * (1.0 - z.gamma) + a[1] * z.gamma) * h1r2
                    + (1.0 - z.beta) * (a[2] * (1.0 - z.delta) + a[3] * z.delta) * h2r2);
            RelayCap { mask, cap: capacity(snr) }
        })
        .collect())
}

/// Origin of a row in [`rate_split_polytope`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintKind {
    Relay([u8; 4]),
    /// Common-rate constraint decoded at `receiver`: `rc1`, `rc2` or their sum.
    Common {
        receiver: u8,
        term: CommonTerm,
    },
    Private {
        user: u8,
    },
    /// `-x_index <= 0`.
    NonNegative {
        index: u8,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommonTerm {
    Rc1,
    Rc2,
    Sum,
}

/// `coeffs . (rp1, rc1, rp2, rc2) <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConstraint {
    pub coeffs: [f64; 4],
    pub rhs: f64,
    pub kind: ConstraintKind,
}

impl RateConstraint {
    /// `rhs - coeffs . x`; negative when violated.
    pub fn slack(&self, x: &RateSplit) -> f64 {
        let x = x.as_array();
        self.rhs - (0..4).map(|i| self.coeffs[i] * x[i]).sum::<f64>()
    }
}

/// All 27 constraints: 15 relay, 3 per receiver on the common rates, 2 on the
/// private rates and 4 nonnegativity rows.
pub fn rate_split_polytope(gains: &ChannelGains, zeta: &PowerAllocation, power: f64) -> Result<Vec<RateConstraint>> {
    gains.validate()?;
    let mut rows: Vec<RateConstraint> = relay_decode_caps(gains, zeta, power)?
        .into_iter()
        .map(|r| RateConstraint { coeffs: r.mask.map(f64::from), rhs: r.cap, kind: ConstraintKind::Relay(r.mask) })
        .collect();

    let e = effective_gains(gains, zeta);
    let p = power;
    let sq = |x: f64| x * x;
    // new private layer of the other user, not yet resolved by backward decoding
    let residual = [
        sq(gains.h21) * (1.0 - zeta.beta) * (1.0 - zeta.delta) * p,
        sq(gains.h12) * (1.0 - zeta.alpha) * (1.0 - zeta.gamma) * p,
    ];
    for j in 0..2 {
        let noise = 1.0 + sq(e.h1p[j]) * p + sq(e.h2p[j]) * p + residual[j];
        let (c1, c2) = (sq(e.h1c[j]) * p, sq(e.h2c[j]) * p);
        let receiver = j as u8 + 1;
        for (coeffs, snr, term) in [
            ([0.0, 1.0, 0.0, 0.0], c1, CommonTerm::Rc1),
            ([0.0, 0.0, 0.0, 1.0], c2, CommonTerm::Rc2),
            ([0.0, 1.0, 0.0, 1.0], c1 + c2, CommonTerm::Sum),
        ] {
            rows.push(RateConstraint {
                coeffs,
                rhs: capacity(snr / noise),
                kind: ConstraintKind::Common { receiver, term },
            });
        }
    }
    let private1 = sq(e.h1p[0]) * p / (1.0 + sq(e.h2p[0]) * p + residual[0]);
    let private2 = sq(e.h2p[1]) * p / (1.0 + sq(e.h1p[1]) * p + residual[1]);
    rows.push(RateConstraint {
        coeffs: [1.0, 0.0, 0.0, 0.0],
        rhs: capacity(private1),
        kind: ConstraintKind::Private { user: 1 },
    });
    rows.push(RateConstraint {
        coeffs: [0.0, 0.0, 1.0, 0.0],
        rhs: capacity(private2),
        kind: ConstraintKind::Private { user: 2 },
    });
    for i in 0..4 {
        let mut coeffs = [0.0; 4];
        coeffs[i] = -1.0;
        rows.push(RateConstraint { coeffs, rhs: 0.0, kind: ConstraintKind::NonNegative { index: i as u8 } });
    }
    Ok(rows)
}

fn check_weights(w1: f64, w2: f64) -> Result<()> {
    if !(w1 >= 0.0 && w2 >= 0.0 && w1.is_finite() && w2.is_finite()) || w1 + w2 == 0.0 {
        return Err(Error::InvalidParameter(format!("weights ({w1}, {w2}) must be >= 0 and not both 0")));
    }
    Ok(())
}

/// Maximizes `w1 R1 + w2 R2` over a polytope from [`rate_split_polytope`].
pub fn max_weighted_rate_over(rows: &[RateConstraint], w1: f64, w2: f64) -> Result<(RateSplit, f64)> {
    check_weights(w1, w2)?;
    let a: Vec<Vec<f64>> = rows.iter().map(|r| r.coeffs.to_vec()).collect();
    let b: Vec<f64> = rows.iter().map(|r| r.rhs).collect();
    let sol = simplex::maximize(&[w1, w1, w2, w2], &a, &b)?;
    Ok((RateSplit::from_array([sol.x[0], sol.x[1], sol.x[2], sol.x[3]]), sol.value))
}

pub fn max_weighted_rate(
    gains: &ChannelGains,
    zeta: &PowerAllocation,
    power: f64,
    w1: f64,
    w2: f64,
) -> Result<(RateSplit, f64)> {
    check_weights(w1, w2)?;
    max_weighted_rate_over(&rate_split_polytope(gains, zeta, power)?, w1, w2)
}

/// How the power allocations are sampled for the frontier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    /// Lattice points per axis of `[0, 1]^7`.
    pub lattice_points: usize,
    /// Shifted Halton points added after the lattice.
    pub quasi_random: usize,
    /// Pattern-search rounds per weight direction around the best sample.
    pub refine_steps: usize,
    /// Weight directions, angles uniform in `[0, pi/2]`.
    pub weights: usize,
    pub seed: u64,
    /// Also sample the user-swapped allocation of every quasi-random point.
    pub mirror: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { lattice_points: 3, quasi_random: 4096, refine_steps: 200, weights: 65, seed: 0, mirror: true }
    }
}

const HALTON_BASES: [u32; 7] = [2, 3, 5, 7, 11, 13, 17];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let (mut inv, mut f) = (0.0, 1.0 / base as f64);
    while i > 0 {
        inv += (i % b) as f64 * f;
        i /= b;
        f /= base as f64;
    }
    inv
}

/// Lattice nodes first (row-major), then the quasi-random points, then their
/// mirrors when enabled.
pub fn zeta_samples(config: &SamplerConfig) -> Vec<PowerAllocation> {
    let n = config.lattice_points;
    let mut out = Vec::new();
    if n > 0 {
        let axis: Vec<f64> = if n == 1 { vec![0.5] } else { (0..n).map(|k| k as f64 / (n - 1) as f64).collect() };
        let total = n.pow(7);
        for mut idx in 0..total {
            let mut z = [0.0; 7];
            for d in (0..7).rev() {
                z[d] = axis[idx % n];
                idx /= n;
            }
            out.push(PowerAllocation::from_point(&z));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let shift: [f64; 7] = std::array::from_fn(|_| rng.gen::<f64>());
    let quasi: Vec<PowerAllocation> = (0..config.quasi_random as u64)
        .map(|i| {
            let z: [f64; 7] = std::array::from_fn(|d| (radical_inverse(i + 1, HALTON_BASES[d]) + shift[d]).fract());
            PowerAllocation::from_point(&z)
        })
        .collect();
    if config.mirror {
        let mirrors: Vec<PowerAllocation> = quasi.iter().map(PowerAllocation::mirrored).collect();
        out.extend(quasi);
        out.extend(mirrors);
    } else {
        out.extend(quasi);
    }
    out
}

/// Unit weight vectors `(cos t, sin t)` for `count` angles uniform in `[0, pi/2]`.
pub fn weight_fan(count: usize) -> Vec<[f64; 2]> {
    match count {
        0 => Vec::new(),
        1 => vec![[std::f64::consts::FRAC_1_SQRT_2; 2]],
        _ => (0..count)
            .map(|k| {
                if k == 0 {
                    [1.0, 0.0]
                } else if k == count - 1 {
                    [0.0, 1.0]
                } else {
                    let t = std::f64::consts::FRAC_PI_2 * k as f64 / (count - 1) as f64;
                    [t.cos(), t.sin()]
                }
            })
            .collect(),
    }
}

/// One vertex of the frontier and the allocation / weight whose LP produced
/// it (`None` only for the origin of an empty region).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub r1: f64,
    pub r2: f64,
    pub zeta: Option<PowerAllocation>,
    pub weight: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionFrontier {
    pub points: Vec<FrontierPoint>,
    pub hull: RateHull,
    pub seed: u64,
    pub lp_solves: usize,
}

impl RegionFrontier {
    pub fn max_sum(&self) -> f64 {
        self.hull.max_sum()
    }

    pub fn symmetric_rate(&self) -> f64 {
        self.hull.symmetric_rate()
    }
}

fn refine_config(config: &SamplerConfig) -> SearchConfig {
    SearchConfig { max_evals: config.refine_steps * 14 + 1, min_step: 1e-6, seed: config.seed, ..Default::default() }
}

/// Best weighted value over the samples (lowest index among ties), then
/// pattern search from it. Returns the refined allocation, its LP point and
/// the number of LPs solved during the refinement.
fn refine_weight(
    gains: &ChannelGains,
    power: f64,
    w: [f64; 2],
    start: &PowerAllocation,
    config: &SamplerConfig,
) -> Result<(PowerAllocation, RateSplit, usize)> {
    let space = SearchSpace::boxed(vec![0.0; 7], vec![1.0; 7]);
    let objective = |x: &[f64]| {
        max_weighted_rate(gains, &PowerAllocation::from_point(x), power, w[0], w[1]).map_or(f64::NAN, |r| r.1)
    };
    let r = optim::refine_from(objective, &space, &start.as_array(), &[0.25; 7], &refine_config(config))?;
    let zeta = PowerAllocation::from_point(&r.point);
    let (split, _) = max_weighted_rate(gains, &zeta, power, w[0], w[1])?;
    Ok((zeta, split, r.evaluations + 1))
}

fn first_max(values: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

pub fn region_frontier(gains: &ChannelGains, power: f64, config: &SamplerConfig) -> Result<RegionFrontier> {
    gains.validate()?;
    check_power(power)?;
    let weights = weight_fan(config.weights);
    if weights.is_empty() {
        return Err(Error::InvalidParameter("sampler needs at least one weight direction".into()));
    }
    let samples = zeta_samples(config);
    // with `mirror` set the candidate set is closed under swapping the users
    let solved: Vec<Vec<(RateSplit, f64)>> = samples
        .par_iter()
        .map(|z| {
            let rows = rate_split_polytope(gains, z, power)?;
            weights.iter().map(|w| max_weighted_rate_over(&rows, w[0], w[1])).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut lp_solves = samples.len() * weights.len();

    let refined: Vec<(PowerAllocation, RateSplit, usize)> = if samples.is_empty() || config.refine_steps == 0 {
        Vec::new()
    } else {
        weights
            .par_iter()
            .enumerate()
            .map(|(k, w)| {
                let best = first_max(solved.iter().map(|s| s[k].1)).expect("nonempty samples");
                refine_weight(gains, power, *w, &samples[best], config)
            })
            .collect::<Result<_>>()?
    };
    lp_solves += refined.iter().map(|r| r.2).sum::<usize>();

    let mut coords = Vec::with_capacity(samples.len() * weights.len() + refined.len());
    let mut origin = Vec::with_capacity(coords.capacity());
    for (i, per_weight) in solved.iter().enumerate() {
        for (k, (split, _)) in per_weight.iter().enumerate() {
            coords.push([split.r1(), split.r2()]);
            origin.push((samples[i], weights[k]));
        }
    }
    let swap_invariant = gains.swapped() == *gains;
    for (k, (zeta, split, _)) in refined.iter().enumerate() {
        coords.push([split.r1(), split.r2()]);
        origin.push((*zeta, weights[k]));
        if config.mirror && !swap_invariant {
            let (mz, mw) = (zeta.mirrored(), [weights[k][1], weights[k][0]]);
            let (m, _) = max_weighted_rate(gains, &mz, power, mw[0], mw[1])?;
            coords.push([m.r1(), m.r2()]);
            origin.push((mz, mw));
            lp_solves += 1;
        }
    }
    // on a channel equal to its relabeling the mirrored allocation has the
    // mirrored polytope, so every point's swap is achievable
    if config.mirror && swap_invariant {
        for i in 0..coords.len() {
            let ([r1, r2], (zeta, w)) = (coords[i], origin[i]);
            coords.push([r2, r1]);
            origin.push((zeta.mirrored(), [w[1], w[0]]));
        }
    }
    let (hull, sources) = RateHull::from_points(&coords);
    let points = hull
        .vertices
        .iter()
        .zip(&sources)
        .map(|(v, s)| FrontierPoint {
            r1: v[0],
            r2: v[1],
            zeta: s.map(|i| origin[i].0),
            weight: s.map(|i| origin[i].1),
        })
        .collect();
    Ok(RegionFrontier { points, hull, seed: config.seed, lp_solves })
}

/// Largest `R1 + R2` over the sampled allocations, refined along the
/// `(1, 1)` direction. Cheaper than a full [`region_frontier`].
pub fn max_sum_rate(gains: &ChannelGains, power: f64, config: &SamplerConfig) -> Result<(f64, PowerAllocation)> {
    gains.validate()?;
    check_power(power)?;
    let samples = zeta_samples(config);
    if samples.is_empty() {
        return Err(Error::InvalidParameter("sampler produced no allocations".into()));
    }
    let values: Vec<f64> =
        samples.par_iter().map(|z| max_weighted_rate(gains, z, power, 1.0, 1.0).map(|r| r.1)).collect::<Result<_>>()?;
    let best = first_max(values.iter().copied()).expect("nonempty samples");
    if config.refine_steps == 0 {
        return Ok((values[best], samples[best]));
    }
    let (zeta, split, _) = refine_weight(gains, power, [1.0, 1.0], &samples[best], config)?;
    let refined = split.r1() + split.r2();
    Ok(if refined > values[best] { (refined, zeta) } else { (values[best], samples[best]) })
}

/// Intermediate quantities of the closed-form symmetric rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cor5Terms {
    pub phi: f64,
    pub psi: f64,
    pub omega: f64,
    pub ra: f64,
    pub rb: f64,
    pub rc: f64,
    /// `C(hsr^2 P) / 2`, the relay's decoding limit per user.
    pub relay_cap: f64,
    pub rate: f64,
}

fn check_symmetric(sym: &SymmetricChannel, power: f64) -> Result<()> {
    check_power(power)?;
    sym.gains().validate()
}

/// Closed-form symmetric rate of the scheme with `alpha = beta = eta = 1/2`,
/// `mu = nu` and private power fraction `2 / (hc^2 P)`. Needs `hc^2 P >= 2`
/// and `hd^2 P / 2 >= hd^2 / hc^2`; otherwise [`Error::NotApplicable`].
pub fn cor5_terms(sym: &SymmetricChannel, power: f64) -> Result<Cor5Terms> {
    check_symmetric(sym, power)?;
    let (hd2, hc2, hr2, hsr2) = (sym.hd * sym.hd, sym.hc * sym.hc, sym.hr * sym.hr, sym.hsr * sym.hsr);
    if hc2 <= 0.0 || hc2 * power < 2.0 {
        return Err(Error::NotApplicable(format!("needs hc^2 P >= 2, got {}", hc2 * power)));
    }
    let phi = hd2 / hc2;
    if hd2 * power / 2.0 < phi {
        return Err(Error::NotApplicable(format!("needs hd^2 P / 2 >= hd^2 / hc^2 = {phi}")));
    }
    let relay_amp = (hr2 * power / 2.0).sqrt();
    let psi = ((hd2 * power / 2.0 - phi).sqrt() + relay_amp).powi(2);
    let omega = ((hc2 * power / 2.0 - 1.0).sqrt() + relay_amp).powi(2);
    let ra = 0.5 * capacity(2.0 + phi) + 0.5 * capacity(2.0 + phi + psi + omega);
    let rb = capacity(2.0 + phi + psi);
    let rc = capacity(2.0 + phi + omega);
    let relay_cap = 0.5 * capacity(hsr2 * power);
    let rate = relay_cap.min(ra.min(rb).min(rc) - 0.5 * 3f64.log2()).max(0.0);
    Ok(Cor5Terms { phi, psi, omega, ra, rb, rc, relay_cap, rate })
}

pub fn symmetric_rate_cor5(sym: &SymmetricChannel, power: f64) -> Result<f64> {
    cor5_terms(sym, power).map(|t| t.rate)
}

/// Which term attains the interference-channel symmetric rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IcTerm {
    A,
    B,
    C,
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IcRate {
    pub rate: f64,
    pub active: IcTerm,
    /// The two terms of the branch in force, before the minimum.
    pub terms: [(IcTerm, f64); 2],
}

/// Symmetric rate of the two-user interference channel scheme that ignores
/// the relay, with the attaining term. Without interference (`hc = 0`) this
/// is the single-user `C(hd^2 P)`.
pub fn etw_ic_terms(hd: f64, hc: f64, power: f64) -> Result<IcRate> {
    check_power(power)?;
    if !(hd >= 0.0 && hc >= 0.0 && hd.is_finite() && hc.is_finite()) {
        return Err(Error::InvalidParameter(format!("gains hd = {hd}, hc = {hc} must be finite and >= 0")));
    }
    let (snr, inr) = (hd * hd * power, hc * hc * power);
    if hc == 0.0 {
        let single = capacity(snr);
        return Ok(IcRate { rate: single, active: IcTerm::C, terms: [(IcTerm::C, single), (IcTerm::C, single)] });
    }
    let (first, second) = if hc * hc <= hd * hd {
        let ratio = (hd * hd) / (hc * hc);
        let ra = capacity(inr + ratio) - 0.5;
        let rb = 0.5 * (capacity(snr + inr) + capacity(ratio) - 1.0);
        ((ra, IcTerm::A), (rb, IcTerm::B))
    } else {
        ((capacity(snr), IcTerm::C), (0.5 * capacity(snr + inr), IcTerm::D))
    };
    let (rate, active) = if second.0 < first.0 { second } else { first };
    Ok(IcRate { rate: rate.max(0.0), active, terms: [(first.1, first.0), (second.1, second.0)] })
}

pub fn etw_ic_rate(hd: f64, hc: f64, power: f64) -> Result<f64> {
    etw_ic_terms(hd, hc, power).map(|r| r.rate)
}

/// Which lower bound attains [`best_symmetric_lower`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerSource {
    Ic,
    Cor5,
    Region,
}

impl LowerSource {
    pub fn label(&self) -> &'static str {
        match self {
            LowerSource::Ic => "ic",
            LowerSource::Cor5 => "cor5",
            LowerSource::Region => "region",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricLower {
    pub value: f64,
    pub source: LowerSource,
    pub ic: IcRate,
    /// `None` outside the closed form's validity domain.
    pub cor5: Option<f64>,
    /// `None` when the region search is disabled.
    pub region: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerConfig {
    pub use_region: bool,
    pub sampler: SamplerConfig,
}

impl Default for LowerConfig {
    fn default() -> Self {
        Self { use_region: true, sampler: SamplerConfig::default() }
    }
}

/// Largest of the interference-channel rate, the closed-form relay rate and
/// the symmetric point of the sampled region. On a symmetric channel the
/// region's symmetric point is half its largest sum rate: time sharing
/// between an allocation and its mirror splits the sum evenly.
pub fn best_symmetric_lower(sym: &SymmetricChannel, power: f64, config: &LowerConfig) -> Result<SymmetricLower> {
    check_symmetric(sym, power)?;
    let ic = etw_ic_terms(sym.hd, sym.hc, power)?;
    let cor5 = match symmetric_rate_cor5(sym, power) {
        Ok(v) => Some(v),
        Err(Error::NotApplicable(_)) => None,
        Err(e) => return Err(e),
    };
    let region = if config.use_region {
        let sampler = SamplerConfig { mirror: true, ..config.sampler };
        Some(0.5 * max_sum_rate(&sym.gains(), power, &sampler)?.0)
    } else {
        None
    };
    let mut best = (ic.rate, LowerSource::Ic);
    for (v, s) in [(cor5, LowerSource::Cor5), (region, LowerSource::Region)] {
        if let Some(v) = v {
            if v > best.0 {
                best = (v, s);
            }
        }
    }
    Ok(SymmetricLower { value: best.0, source: best.1, ic, cor5, region })
}
