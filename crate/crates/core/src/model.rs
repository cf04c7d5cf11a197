//! Channel description for the two-user Gaussian interference channel with a
//! full-duplex relay.
//!
//! Receivers and relay observe
//!
//! ```text
//! y1 = h11 x1 + h21 x2 + hr1 xr + z1
//! y2 = h12 x1 + h22 x2 + hr2 xr + z2
//! yr = h1r x1 + h2r x2 + zr
//! ```
//!
//! with unit-variance independent noises and a common per-node power limit `P`.
//! All rates in this crate are in bits per channel use.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack on the smallest eigenvalue when testing positive semidefiniteness.
pub const PSD_TOLERANCE: f64 = 1e-12;

/// Gaussian capacity function `C(x) = 1/2 log2(1 + x)`.
#[inline]
pub fn capacity(x: f64) -> f64 {
    0.5 * (1.0 + x).log2()
}

pub fn db_to_linear(p_db: f64) -> f64 {
    10f64.powf(p_db / 10.0)
}

pub fn linear_to_db(p: f64) -> f64 {
    10.0 * p.log10()
}

/// The eight amplitude gains of the channel. `hij` is transmitter `i` to
/// receiver `j`, `hir` source to relay, `hri` relay to destination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGains {
    pub h11: f64,
    pub h12: f64,
    pub h21: f64,
    pub h22: f64,
    pub h1r: f64,
    pub h2r: f64,
    pub hr1: f64,
    pub hr2: f64,
}

impl ChannelGains {
    pub fn new(h11: f64, h12: f64, h21: f64, h22: f64, h1r: f64, h2r: f64, hr1: f64, hr2: f64) -> Result<Self> {
        let gains = Self { h11, h12, h21, h22, h1r, h2r, hr1, hr2 };
        gains.validate()?;
        Ok(gains)
    }

    pub fn zero() -> Self {
        Self { h11: 0.0, h12: 0.0, h21: 0.0, h22: 0.0, h1r: 0.0, h2r: 0.0, hr1: 0.0, hr2: 0.0 }
    }

    pub fn as_array(&self) -> [f64; 8] {
        [self.h11, self.h12, self.h21, self.h22, self.h1r, self.h2r, self.hr1, self.hr2]
    }

    pub fn validate(&self) -> Result<()> {
        const NAMES: [&str; 8] = ["h11", "h12", "h21", "h22", "h1r", "h2r", "hr1", "hr2"];
        for (name, g) in NAMES.iter().zip(self.as_array()) {
            if !g.is_finite() || g < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} = {g} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    /// No link carries any signal, so every rate is zero.
    pub fn is_silent(&self) -> bool {
        self.as_array().iter().all(|g| *g == 0.0)
    }

    /// Relabels user 1 as user 2 and vice versa.
    pub fn swapped(&self) -> Self {
        Self {
            h11: self.h22,
            h12: self.h21,
            h21: self.h12,
            h22: self.h11,
            h1r: self.h2r,
            h2r: self.h1r,
            hr1: self.hr2,
            hr2: self.hr1,
        }
    }

    /// Coefficients of (x1, x2, xr) seen at receiver 1.
    pub fn rx1_coeffs(&self) -> [f64; 3] {
        [self.h11, self.h21, self.hr1]
    }

    /// Coefficients of (x1, x2, xr) seen at receiver 2.
    pub fn rx2_coeffs(&self) -> [f64; 3] {
        [self.h12, self.h22, self.hr2]
    }

    /// Coefficients of (x1, x2, xr) seen at the relay.
    pub fn relay_coeffs(&self) -> [f64; 3] {
        [self.h1r, self.h2r, 0.0]
    }
}

/// Common power constraint `E[X_j^2] <= P` for `j in {1, 2, r}`. Noise variance is 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub power: f64,
}

impl SystemConfig {
    pub fn new(power: f64) -> Result<Self> {
        if !power.is_finite() || power <= 0.0 {
            return Err(Error::InvalidParameter(format!("power P = {power} must be finite and > 0")));
        }
        Ok(Self { power })
    }

    pub fn from_db(p_db: f64) -> Result<Self> {
        Self::new(db_to_linear(p_db))
    }
}

/// Parameters of the input covariance
///
/// ```text
///     [ P1              0               rho1 sqrt(P1 Pr) ]
/// A = [ 0               P2              rho2 sqrt(P2 Pr) ]
///     [ rho1 sqrt(P1 Pr) rho2 sqrt(P2 Pr) Pr             ]
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceParams {
    pub rho1: f64,
    pub rho2: f64,
    pub p1: f64,
    pub p2: f64,
    pub pr: f64,
}

impl CovarianceParams {
    pub fn new(rho1: f64, rho2: f64, p1: f64, p2: f64, pr: f64) -> Self {
        Self { rho1, rho2, p1, p2, pr }
    }

    /// All nodes at the same power with the given correlations.
    pub fn full_power(rho1: f64, rho2: f64, power: f64) -> Self {
        Self::new(rho1, rho2, power, power, power)
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let c1 = self.rho1 * (self.p1 * self.pr).sqrt();
        let c2 = self.rho2 * (self.p2 * self.pr).sqrt();
        [[self.p1, 0.0, c1], [0.0, self.p2, c2], [c1, c2, self.pr]]
    }

    /// Checks the field ranges: correlations in [-1, 1] and powers in [0, P].
    pub fn check_ranges(&self, power: f64) -> Result<()> {
        for (name, r) in [("rho1", self.rho1), ("rho2", self.rho2)] {
            if !(-1.0..=1.0).contains(&r) {
                return Err(Error::InvalidParameter(format!("{name} = {r} outside [-1, 1]")));
            }
        }
        for (name, p) in [("P1", self.p1), ("P2", self.p2), ("Pr", self.pr)] {
            if !p.is_finite() || p < 0.0 || p > power * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!("{name} = {p} outside [0, {power}]")));
            }
        }
        Ok(())
    }
}

/// True iff the assembled covariance matrix is positive semidefinite, with
/// smallest eigenvalue at least `-PSD_TOLERANCE`.
pub fn is_valid_covariance(cov: &CovarianceParams) -> bool {
    smallest_eigenvalue_sym3(&cov.matrix()) >= -PSD_TOLERANCE
}

/// Smallest eigenvalue of a symmetric 3x3 matrix (trigonometric closed form).
pub fn smallest_eigenvalue_sym3(a: &[[f64; 3]; 3]) -> f64 {
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    if p1 == 0.0 {
        return a[0][0].min(a[1][1]).min(a[2][2]);
    }
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    // eigenvalues are q + 2p cos(phi + 2k pi / 3); k = 1 gives the smallest
    q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos()
}

/// Symmetric channel: `h11 = h22 = hd`, `h12 = h21 = hc`, `hr1 = hr2 = hr`,
/// `h1r = h2r = hsr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricChannel {
    pub hd: f64,
    pub hc: f64,
    pub hr: f64,
    pub hsr: f64,
}

impl SymmetricChannel {
    pub fn new(hd: f64, hc: f64, hr: f64, hsr: f64) -> Result<Self> {
        let sym = Self { hd, hc, hr, hsr };
        sym.validate()?;
        Ok(sym)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, g) in [("hd", self.hd), ("hc", self.hc), ("hr", self.hr), ("hsr", self.hsr)] {
            if !g.is_finite() || g < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} = {g} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    pub fn gains(&self) -> ChannelGains {
        ChannelGains {
            h11: self.hd,
            h12: self.hc,
            h21: self.hc,
            h22: self.hd,
            h1r: self.hsr,
            h2r: self.hsr,
            hr1: self.hr,
            hr2: self.hr,
        }
    }

    /// Recovers the symmetric description, if the gains are symmetric.
    pub fn from_gains(g: &ChannelGains) -> Option<Self> {
        let sym = g.h11 == g.h22 && g.h12 == g.h21 && g.hr1 == g.hr2 && g.h1r == g.h2r;
        sym.then_some(Self { hd: g.h11, hc: g.h12, hr: g.hr1, hsr: g.h1r })
    }
}

impl From<SymmetricChannel> for ChannelGains {
    fn from(sym: SymmetricChannel) -> Self {
        sym.gains()
    }
}
