//! Sample parameters and the `key = value` configuration format.

use crate::constants::{GAMMA_P, HBAR, K_B, MU_0};
use crate::error::{Error, Result};

/// Geometry, temperature and size of a sample of spin pairs in a lattice.
///
/// All quantities are SI. `omega0_larmor` only scales the initial state after
/// the saturating pulse, `n1` only sets the resolution of discrete mode sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConfig {
    /// Intra-pair distance, m.
    pub d: f64,
    /// Lattice spacing along the pair axis, m.
    pub a: f64,
    /// Sound speed, m/s.
    pub v_s: f64,
    /// Bath temperature, K.
    pub temperature: f64,
    /// Number of pairs in the sample.
    pub n_pairs: f64,
    /// Angle between pair axis and external field, rad.
    pub theta: f64,
    /// Larmor angular frequency, rad/s.
    pub omega0_larmor: f64,
    /// Number of modes along the pair axis used by discrete k-sums.
    pub n1: usize,
}

/// Larmor frequency used when a config file does not set one: 300 MHz protons.
pub const DEFAULT_LARMOR: f64 = 2.0 * std::f64::consts::PI * 300.0e6;
/// Mode count used when a config file does not set one.
pub const DEFAULT_N1: usize = 100_000;

const KEYS: [&str; 8] = [
    "d_m",
    "a_m",
    "v_s_mps",
    "T_K",
    "N",
    "theta_rad",
    "omega0_larmor_radps",
    "N1",
];

impl PhysicalConfig {
    /// Hydrated gypsum at room temperature, the reference sample.
    pub fn gypsum() -> Self {
        Self {
            d: 0.153e-9,
            a: 0.8e-9,
            v_s: 4570.0,
            temperature: 300.0,
            n_pairs: 1e23,
            theta: 0.0,
            omega0_larmor: DEFAULT_LARMOR,
            n1: DEFAULT_N1,
        }
    }

    /// Checks the invariants every other module relies on.
    pub fn validate(self) -> Result<Self> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.d) {
            return Err(Error::Invariant("d > 0"));
        }
        if !positive(self.a) {
            return Err(Error::Invariant("a > 0"));
        }
        if !positive(self.v_s) {
            return Err(Error::Invariant("v_s > 0"));
        }
        if !positive(self.temperature) {
            return Err(Error::Invariant("T > 0"));
        }
        if !(self.n_pairs.is_finite() && self.n_pairs >= 1.0) {
            return Err(Error::Invariant("N >= 1"));
        }
        if !self.theta.is_finite() {
            return Err(Error::Invariant("theta finite"));
        }
        if !positive(self.omega0_larmor) {
            return Err(Error::Invariant("omega0 > 0"));
        }
        if self.n1 < 2 {
            return Err(Error::Invariant("N1 >= 2"));
        }
        if self.d >= self.a {
            return Err(Error::Invariant("d < a"));
        }
        Ok(self)
    }

    /// ħ/(k_B T), seconds.
    pub fn beta(&self) -> f64 {
        HBAR / (K_B * self.temperature)
    }

    /// Secular dipolar coupling of one pair, rad/s (signed).
    pub fn dipolar_coupling(&self) -> f64 {
        dipolar_coupling(self.d, self.theta)
    }

    /// Top of the acoustic branch, 2 v_s / a.
    pub fn max_acoustic_frequency(&self) -> f64 {
        2.0 * self.v_s / self.a
    }
}

impl Default for PhysicalConfig {
    fn default() -> Self {
        Self::gypsum()
    }
}

/// Ω₀ = μ₀γ²ħ/(8π) (1 − 3cos²θ)/d³ in rad/s.
///
/// The angular factor is taken as exactly zero within a few ulps of the
/// magic angle, where it is pure roundoff.
pub fn dipolar_coupling(d: f64, theta: f64) -> f64 {
    let c = theta.cos();
    let mut angular = 1.0 - 3.0 * c * c;
    if angular.abs() < 16.0 * f64::EPSILON {
        angular = 0.0;
    }
    MU_0 * GAMMA_P * GAMMA_P * HBAR / (8.0 * std::f64::consts::PI) * angular / (d * d * d)
}

/// Parses the flat config format: one `key = value` per line, `#` starts a
/// comment. `d_m`, `a_m`, `v_s_mps`, `T_K` and `N` are required.
pub fn parse_config(text: &str) -> Result<PhysicalConfig> {
    let mut values: [Option<f64>; 8] = [None; 8];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or(Error::Malformed { line })?;
        let (key, value) = (key.trim(), value.trim());
        let slot = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| Error::UnknownKey {
                line,
                key: key.to_string(),
            })?;
        let parsed: f64 = value.parse().map_err(|_| Error::NonNumeric {
            line,
            key: key.to_string(),
            value: value.to_string(),
        })?;
        if values[slot].replace(parsed).is_some() {
            return Err(Error::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
    }
    let required = |i: usize| values[i].ok_or(Error::MissingKey(KEYS[i]));
    let n1 = match values[7] {
        None => DEFAULT_N1,
        Some(x) if x >= 0.0 && x.fract() == 0.0 && x <= usize::MAX as f64 => x as usize,
        Some(_) => return Err(Error::Invariant("N1 integer")),
    };
    PhysicalConfig {
        d: required(0)?,
        a: required(1)?,
        v_s: required(2)?,
        temperature: required(3)?,
        n_pairs: required(4)?,
        theta: values[5].unwrap_or(0.0),
        omega0_larmor: values[6].unwrap_or(DEFAULT_LARMOR),
        n1,
    }
    .validate()
}
