//! Gap between the symmetric-rate upper bound (half the sum-rate envelope)
//! and the best symmetric lower bound, on single channels and over the
//! `(a, b)` grid of interference and source-relay strengths.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::achievable::{
    best_symmetric_lower, cor5_terms, etw_ic_terms, IcTerm, LowerConfig, LowerSource, SymmetricLower,
};
use crate::bounds::{bound_envelope, BoundCurvePoint, BoundKind, BoundsConfig};
use crate::error::{Error, Result};
use crate::model::{capacity, SymmetricChannel};

/// Terms closer than this are treated as tied when picking a certificate case.
const CASE_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GapConfig {
    pub bounds: BoundsConfig,
    pub lower: LowerConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricUpper {
    pub value: f64,
    pub active: Option<BoundKind>,
    /// The four sum-rate bounds (not halved).
    pub sum_bounds: BoundCurvePoint,
}

/// Half of the sum-rate bound envelope of the symmetric channel.
pub fn symmetric_upper(sym: &SymmetricChannel, power: f64, config: &BoundsConfig) -> Result<SymmetricUpper> {
    let sum_bounds = bound_envelope(&sym.gains(), power, config)?;
    Ok(SymmetricUpper { value: 0.5 * sum_bounds.envelope, active: sum_bounds.active, sum_bounds })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapEvaluation {
    pub upper: SymmetricUpper,
    pub lower: SymmetricLower,
    pub delta: f64,
}

pub fn gap_at(sym: &SymmetricChannel, power: f64, config: &GapConfig) -> Result<GapEvaluation> {
    let upper = symmetric_upper(sym, power, &config.bounds)?;
    let lower = best_symmetric_lower(sym, power, &config.lower)?;
    Ok(GapEvaluation { upper, lower, delta: upper.value - lower.value })
}

/// Which analytic case a certificate comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapCase {
    /// Strong source-relay links, `R_A` attains the minimum.
    StrongA,
    StrongB,
    StrongC,
    /// Weak relay-destination links, the given IC term is the symmetric rate.
    WeakIc(IcTerm),
}

/// An analytic cap on the gap. `cap` is `+inf` when not applicable; `tie`
/// marks a case decided between numerically equal terms, where the largest
/// of the tied caps is reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub applicable: bool,
    pub cap: f64,
    pub case: Option<GapCase>,
    pub tie: bool,
}

impl GapCertificate {
    fn not_applicable() -> Self {
        Self { applicable: false, cap: f64::INFINITY, case: None, tie: false }
    }

    /// Largest cap among the candidates within tolerance of the minimum term.
    fn from_cases(cases: &[(f64, GapCase, f64)]) -> Self {
        let min = cases.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let tied: Vec<&(f64, GapCase, f64)> =
            cases.iter().filter(|c| c.0 - min <= CASE_TIE_TOLERANCE * min.abs().max(1.0)).collect();
        let best = tied.iter().max_by(|a, b| a.2.total_cmp(&b.2)).expect("at least one case");
        let distinct = tied.iter().any(|c| c.1 != best.1);
        Self { applicable: true, cap: best.2, case: Some(best.1), tie: distinct }
    }
}

/// Cap for strong source-relay links, applicable where the closed-form
/// relay rate is defined and `log2(hsr^2 P) / 2 >= min(R_A, R_B, R_C) - log2(3) / 2`.
pub fn analytic_gap_strong_sr(sym: &SymmetricChannel, power: f64) -> Result<GapCertificate> {
    let t = match cor5_terms(sym, power) {
        Ok(t) => t,
        Err(Error::NotApplicable(_)) => return Ok(GapCertificate::not_applicable()),
        Err(e) => return Err(e),
    };
    let half_log3 = 0.5 * 3f64.log2();
    let min_term = t.ra.min(t.rb).min(t.rc);
    if 0.5 * (sym.hsr * sym.hsr * power).log2() < min_term - half_log3 {
        return Ok(GapCertificate::not_applicable());
    }
    let ratio = capacity(sym.hsr * sym.hsr / (sym.hc * sym.hc));
    Ok(GapCertificate::from_cases(&[
        (t.ra, GapCase::StrongA, 0.75 + half_log3 + 0.5 * ratio),
        (t.rb, GapCase::StrongB, 1.0 + half_log3),
        (t.rc, GapCase::StrongC, 1.0 + half_log3 + 0.5 * 5f64.log2() + ratio),
    ]))
}

/// Cap for weak relay-destination links (`hr^2 <= min(hd^2, hc^2)`), keyed by
/// the term that sets the interference-channel symmetric rate.
pub fn analytic_gap_weak_rd(sym: &SymmetricChannel, power: f64) -> Result<GapCertificate> {
    let ic = etw_ic_terms(sym.hd, sym.hc, power)?;
    let hr2 = sym.hr * sym.hr;
    if hr2 > (sym.hd * sym.hd).min(sym.hc * sym.hc) {
        return Ok(GapCertificate::not_applicable());
    }
    let ratio = if sym.hc > 0.0 { capacity(sym.hsr * sym.hsr / (sym.hc * sym.hc)) } else { 0.0 };
    let cap = |term: IcTerm| match term {
        IcTerm::A => 1.5 + ratio,
        IcTerm::B => 7.0 / 8.0 + 0.5 * ratio,
        IcTerm::C => 1.0,
        IcTerm::D => 5.0 / 8.0 + 0.5 * ratio,
    };
    let cases: Vec<(f64, GapCase, f64)> = ic.terms.iter().map(|(t, v)| (*v, GapCase::WeakIc(*t), cap(*t))).collect();
    Ok(GapCertificate::from_cases(&cases))
}

/// Grid over `a = log(hc^2 P) / log(hd^2 P)` and `b = log(hsr^2 P) / log(hd^2 P)`
/// at fixed `hd`, `hr` and `P` (linear).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapGridSpec {
    pub a_min: f64,
    pub a_max: f64,
    pub a_steps: usize,
    pub b_min: f64,
    pub b_max: f64,
    pub b_steps: usize,
    pub hd: f64,
    pub hr: f64,
    pub power: f64,
}

fn axis(min: f64, max: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|k| min + (max - min) * k as f64 / (steps - 1) as f64).collect()
}

impl GapGridSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.a_steps < 2 || self.b_steps < 2 {
            return bad(format!("grid needs at least 2 steps per axis, got {} x {}", self.a_steps, self.b_steps));
        }
        let ordered = |lo: f64, hi: f64| lo.is_finite() && hi.is_finite() && lo <= hi;
        if !ordered(self.a_min, self.a_max) || !ordered(self.b_min, self.b_max) {
            return bad("grid bounds must be finite and ordered".into());
        }
        if !(self.power.is_finite() && self.power > 0.0 && self.hd.is_finite() && self.hr.is_finite()) {
            return bad("hd, hr and P must be finite with P > 0".into());
        }
        if self.hr < 0.0 || !(self.hd * self.hd * self.power > 1.0) {
            return bad(format!("need hr >= 0 and hd^2 P > 1, got hd^2 P = {}", self.hd * self.hd * self.power));
        }
        Ok(())
    }

    pub fn a_values(&self) -> Vec<f64> {
        axis(self.a_min, self.a_max, self.a_steps)
    }

    pub fn b_values(&self) -> Vec<f64> {
        axis(self.b_min, self.b_max, self.b_steps)
    }

    /// `hc = (hd^2 P)^(a/2) / sqrt(P)` and `hsr = (hd^2 P)^(b/2) / sqrt(P)`.
    pub fn channel_at(&self, a: f64, b: f64) -> SymmetricChannel {
        let snr = self.hd * self.hd * self.power;
        let root_p = self.power.sqrt();
        SymmetricChannel { hd: self.hd, hc: snr.powf(0.5 * a) / root_p, hr: self.hr, hsr: snr.powf(0.5 * b) / root_p }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapCell {
    pub a: f64,
    pub b: f64,
    pub upper: f64,
    pub lower: f64,
    pub delta: f64,
    pub active_bound: Option<BoundKind>,
    pub active_lower: LowerSource,
    /// Set when the closed-form relay rate is undefined, so the lower bound
    /// comes from the interference-channel rate (and the sampled region).
    pub cor5_missing: bool,
    pub strong: GapCertificate,
    pub weak: GapCertificate,
}

impl GapCell {
    /// The tighter applicable certificate, if any.
    pub fn primary_certificate(&self) -> Option<GapCertificate> {
        [self.strong, self.weak].into_iter().filter(|c| c.applicable).min_by(|a, b| a.cap.total_cmp(&b.cap))
    }
}

pub fn gap_cell(spec: &GapGridSpec, a: f64, b: f64, config: &GapConfig) -> Result<GapCell> {
    let sym = spec.channel_at(a, b);
    let g = gap_at(&sym, spec.power, config)?;
    Ok(GapCell {
        a,
        b,
        upper: g.upper.value,
        lower: g.lower.value,
        delta: g.delta,
        active_bound: g.upper.active,
        active_lower: g.lower.source,
        cor5_missing: g.lower.cor5.is_none(),
        strong: analytic_gap_strong_sr(&sym, spec.power)?,
        weak: analytic_gap_weak_rd(&sym, spec.power)?,
    })
}

/// All cells in row-major order (`a` outer, `b` inner).
pub fn gap_map(spec: &GapGridSpec, config: &GapConfig) -> Result<Vec<GapCell>> {
    spec.validate()?;
    let cells: Vec<(f64, f64)> =
        spec.a_values().into_iter().flat_map(|a| spec.b_values().into_iter().map(move |b| (a, b))).collect();
    cells.par_iter().map(|&(a, b)| gap_cell(spec, a, b, config)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::achievable::{etw_ic_rate, SamplerConfig};

    fn quick() -> GapConfig {
        let sampler = SamplerConfig { quasi_random: 256, refine_steps: 40, ..Default::default() };
        GapConfig { lower: LowerConfig { use_region: true, sampler }, ..Default::default() }
    }

    fn fig5() -> GapGridSpec {
        GapGridSpec {
            a_min: 0.0,
            a_max: 2.0,
            a_steps: 2,
            b_min: 0.0,
            b_max: 2.0,
            b_steps: 2,
            hd: 1.0,
            hr: 1.0,
            power: 1000.0,
        }
    }

    #[test]
    fn silent_channel() {
        let sym = SymmetricChannel { hd: 0.0, hc: 0.0, hr: 0.0, hsr: 0.0 };
        assert_eq!(symmetric_upper(&sym, 10.0, &BoundsConfig::default()).unwrap().value, 0.0);
    }

    #[test]
    fn no_interference_uses_cutset() {
        let sym = SymmetricChannel { hd: 1.0, hc: 0.0, hr: 0.5, hsr: 1.0 };
        let u = symmetric_upper(&sym, 10.0, &BoundsConfig::default()).unwrap();
        assert!(u.sum_bounds.r_s1.is_infinite() && u.sum_bounds.r_s2.is_infinite());
        assert_eq!(u.value, 0.5 * u.sum_bounds.r_cs.min(u.sum_bounds.r_m));
        assert!(u.value.is_finite());
    }

    #[test]
    fn relay_free_ic_gap() {
        let sym = SymmetricChannel { hd: 1.0, hc: 1.0, hr: 0.0, hsr: 0.0 };
        let g = gap_at(&sym, 1e4, &quick()).unwrap();
        assert_eq!(g.lower.ic.rate, etw_ic_rate(1.0, 1.0, 1e4).unwrap());
        assert!(g.lower.ic.active == IcTerm::A || g.lower.ic.active == IcTerm::B);
        assert!(g.delta >= -1e-3 && g.delta <= 1.0, "{}", g.delta);
    }

    #[test]
    fn certificate_cases() {
        let half_log3 = 0.5 * 3f64.log2();
        let c = GapCertificate::from_cases(&[
            (2.0, GapCase::StrongA, 0.75 + half_log3 + 0.25),
            (1.0, GapCase::StrongB, 1.0 + half_log3),
            (3.0, GapCase::StrongC, 9.0),
        ]);
        assert_eq!((c.case, c.tie), (Some(GapCase::StrongB), false));
        assert!((c.cap - 1.792_481_250_360_578).abs() < 1e-12);
        let tied = GapCertificate::from_cases(&[(1.0, GapCase::StrongA, 2.0), (1.0, GapCase::StrongB, 1.5)]);
        assert_eq!((tied.case, tied.cap, tied.tie), (Some(GapCase::StrongA), 2.0, true));
    }

    #[test]
    fn strong_certificate_with_equal_source_relay_and_cross_gains() {
        // hsr = hc makes C(hsr^2 / hc^2) = C(1) = 1/2
        let sym = SymmetricChannel { hd: 1.0, hc: 2.0, hr: 0.0, hsr: 2.0 };
        let c = analytic_gap_strong_sr(&sym, 100.0).unwrap();
        assert!(c.applicable);
        let t = cor5_terms(&sym, 100.0).unwrap();
        if t.ra <= t.rb.min(t.rc) {
            assert!((c.cap - (0.75 + 0.5 * 3f64.log2() + 0.25)).abs() < 1e-12);
        }
        let weak_sr = SymmetricChannel { hsr: 1e-3, ..sym };
        assert!(!analytic_gap_strong_sr(&weak_sr, 100.0).unwrap().applicable);
        let no_cross = SymmetricChannel { hc: 0.0, ..sym };
        assert!(!analytic_gap_strong_sr(&no_cross, 100.0).unwrap().applicable);
    }

    #[test]
    fn weak_certificate() {
        // hc > hd: strong interference branch; C(hd^2 P) is the smaller term at P = 100
        let sym = SymmetricChannel { hd: 1.0, hc: 20.0, hr: 0.5, hsr: 3.0 };
        let c = analytic_gap_weak_rd(&sym, 100.0).unwrap();
        assert_eq!((c.applicable, c.case, c.cap), (true, Some(GapCase::WeakIc(IcTerm::C)), 1.0));
        let strong_relay = SymmetricChannel { hr: 1.5, ..sym };
        assert!(!analytic_gap_weak_rd(&strong_relay, 100.0).unwrap().applicable);
    }

    #[test]
    fn spec_validation() {
        assert!(fig5().validate().is_ok());
        for bad in [
            GapGridSpec { power: 1.0, ..fig5() },
            GapGridSpec { a_steps: 1, ..fig5() },
            GapGridSpec { b_min: 3.0, ..fig5() },
            GapGridSpec { hr: -1.0, ..fig5() },
        ] {
            assert!(matches!(gap_map(&bad, &quick()), Err(Error::InvalidSpec(_))));
        }
    }

    #[test]
    fn channel_coordinates() {
        let s = fig5().channel_at(1.0, 0.5);
        assert!((s.hc - 1.0).abs() < 1e-12);
        assert!((s.hsr * s.hsr * 1000.0 - 1000f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn small_map_is_finite_and_nonnegative() {
        let cells = gap_map(&fig5(), &quick()).unwrap();
        assert_eq!(cells.len(), 4);
        assert_eq!((cells[1].a, cells[1].b), (0.0, 2.0));
        for c in &cells {
            assert!(c.delta.is_finite() && c.delta >= -1e-3, "{c:?}");
        }
        let single = gap_cell(&fig5(), 2.0, 0.0, &quick()).unwrap();
        assert_eq!(single, cells[2]);
    }
}
