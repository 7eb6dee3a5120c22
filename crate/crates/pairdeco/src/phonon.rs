//! Proton pairs on a lattice sharing one acoustic phonon bath.
//!
//! Each pair couples to longitudinal phonons along its own axis through the
//! modulation of its dipolar coupling. The bath kernels of [`crate::deco`]
//! then have simple closed forms once the mode sum is replaced by an
//! integral over the Brillouin zone and the bath is hot compared with every
//! acoustic mode:
//!
//! ```text
//! γ(T,t) =  d² k_B T a t / (4 v_s³ m_p)
//! ε(t)   = −d² ħ t / (4 v_s² m_p)
//! ζ(x,t) =  d² ħ a / (2 v_s³ m_p) [φ(x,t)/(2π) − (v_s/a) t sinc(x/a)]
//! ```
//!
//! [`discrete_kernel_sums`] evaluates the same kernels as explicit mode sums.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::config::PhysicalConfig;
use crate::constants::{HBAR, K_B, M_P};
use crate::deco::{coth, one_minus_cos, sin_minus_x};
use crate::error::{Error, Result};
use crate::pair::{ModeSpec, PairLevel, ReducedPairMatrix};

pub use crate::config::dipolar_coupling;

/// Branch multiplicity in the mode normalisation (one acoustic, one optical).
pub const BRANCHES: f64 = 2.0;

/// Pair energy of `level`, Ω₀κ/2 in rad/s.
pub fn pair_energy(cfg: &PhysicalConfig, level: PairLevel) -> f64 {
    0.5 * cfg.dipolar_coupling() * level.kappa() as f64
}

/// Coupling eigenvalue of `level` per metre of lattice displacement,
/// −(3/2)(Ω₀/d)κ in rad/(s m).
pub fn pair_eigenvalue(cfg: &PhysicalConfig, level: PairLevel) -> f64 {
    -1.5 * cfg.dipolar_coupling() / cfg.d * level.kappa() as f64
}

/// Coupling amplitude of the acoustic mode with wavenumber `k`, in metres.
///
/// Purely imaginary and odd in k. The k = 0 mode carries no coupling and is
/// returned as zero.
pub fn acoustic_coupling(k: f64, cfg: &PhysicalConfig) -> Complex64 {
    if k == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let omega = cfg.v_s * k.abs();
    let u = (HBAR / (2.0 * omega * M_P * cfg.n_pairs * BRANCHES)).sqrt();
    Complex64::new(0.0, -2.0 * u * (0.5 * k * cfg.d).sin())
}

/// Acoustic mode at wavenumber `k` with linear dispersion.
pub fn acoustic_mode(k: f64, cfg: &PhysicalConfig) -> ModeSpec {
    ModeSpec {
        k,
        omega: cfg.v_s * k.abs(),
        g: acoustic_coupling(k, cfg),
    }
}

/// |g|²/ω² of an acoustic mode to leading order in kd.
pub fn acoustic_weight_small_kd(k: f64, cfg: &PhysicalConfig) -> f64 {
    HBAR * cfg.d * cfg.d / (4.0 * cfg.v_s.powi(3) * M_P * cfg.n_pairs * k.abs())
}

/// Optical to acoustic weight ratio at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchComparison {
    pub ratio: f64,
    /// Whether the optical branch may be dropped at this k.
    pub optical_negligible: bool,
}

/// Ratio below which the optical branch counts as negligible.
pub const OPTICAL_NEGLIGIBLE: f64 = 0.5;

/// δ_o/δ_a = (|k|a/2)(a/d)²(ω_a/ω_o)³ with ω_a = 2v_s/a.
pub fn optical_acoustic_ratio(
    k: f64,
    omega_o: f64,
    cfg: &PhysicalConfig,
) -> Result<BranchComparison> {
    if omega_o.is_nan() || omega_o <= 0.0 || k == 0.0 {
        return Err(Error::InvalidArgument(
            "optical frequency must be positive and k nonzero".into(),
        ));
    }
    let optical = HBAR / (omega_o.powi(3) * M_P * cfg.n_pairs);
    let ratio = optical / acoustic_weight_small_kd(k, cfg);
    Ok(BranchComparison {
        ratio,
        optical_negligible: ratio < OPTICAL_NEGLIGIBLE,
    })
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "time must be non-negative, got {t}"
        )))
    }
}

/// Earliest time at which the linear kernel forms hold, 10·a/(2v_s).
pub fn linear_regime_start(cfg: &PhysicalConfig) -> f64 {
    5.0 * cfg.a / cfg.v_s
}

/// Continuum γ and ε, both in m² s².
pub fn closed_kernels(cfg: &PhysicalConfig, t: f64) -> Result<(f64, f64)> {
    check_time(t)?;
    let d2 = cfg.d * cfg.d;
    let gamma = d2 * K_B * cfg.temperature * cfg.a / (4.0 * cfg.v_s.powi(3) * M_P) * t;
    let epsilon = -d2 * HBAR / (4.0 * cfg.v_s * cfg.v_s * M_P) * t;
    Ok((gamma, epsilon))
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// (π/2)[sgn(v_s t + x) + sgn(v_s t − x)]: π inside the sound cone, 0 outside.
pub fn phi_step(x: f64, t: f64, v_s: f64) -> f64 {
    0.5 * PI * (sgn(v_s * t + x) + sgn(v_s * t - x))
}

/// sin(πx/a)/(πx/a), exactly zero on lattice planes x = q·a.
pub fn sinc_weight(x: f64, a: f64) -> f64 {
    let u = x / a;
    if u == 0.0 {
        1.0
    } else if u.fract() == 0.0 {
        0.0
    } else {
        (PI * u).sin() / (PI * u)
    }
}

/// Continuum cross kernel between pairs separated by `x` along the axis, m² s².
pub fn zeta_closed(cfg: &PhysicalConfig, x: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let scale = cfg.d * cfg.d * HBAR * cfg.a / (2.0 * cfg.v_s.powi(3) * M_P);
    Ok(
        scale
            * (phi_step(x, t, cfg.v_s) / (2.0 * PI) - cfg.v_s / cfg.a * t * sinc_weight(x, cfg.a)),
    )
}

/// Characteristic rates and times of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConstants {
    /// Dipolar coupling, rad/s.
    pub omega0: f64,
    /// Dipolar frequency −Ω₀/(4π), Hz.
    pub nu0: f64,
    /// 3|ν₀|, Hz.
    pub nu_hat0: f64,
    /// Lattice-mediated frequency, Hz.
    pub nu_d: f64,
    /// Thermal decay time for |Δκ| = 1, s.
    pub tau_gamma: f64,
    /// Thermal decay time for |Δκ| = 3, s.
    pub tau_gamma_min: f64,
    /// Width of the partner sum over one lattice plane.
    pub sigma_x: f64,
    /// Width of the partner sum over the whole sample.
    pub sigma_x_prime: f64,
    /// Gaussian decay time for |Δκ| = 1, s.
    pub tau_x: f64,
    /// Gaussian decay time for |Δκ| = 3, s.
    pub tau_x_hat: f64,
}

/// Gaussian decay time from the dipolar frequency ν̂₀ (Hz),
/// [√2 π² ν̂₀² ħ σ_X / (v_s² m_p)]⁻¹.
pub fn tau_x_from_frequency(nu_hat0: f64, v_s: f64, n_pairs: f64) -> f64 {
    let sigma = plane_width(n_pairs);
    1.0 / (SQRT_2 * PI * PI * nu_hat0 * nu_hat0 * HBAR * sigma / (v_s * v_s * M_P))
}

/// √(3 N^{2/3} / 2): pairs in one plane of a cubic sample.
pub fn plane_width(n_pairs: f64) -> f64 {
    (1.5 * n_pairs.powf(2.0 / 3.0)).sqrt()
}

/// √(3N/2).
pub fn sample_width(n_pairs: f64) -> f64 {
    (1.5 * n_pairs).sqrt()
}

pub fn rate_constants(cfg: &PhysicalConfig) -> RateConstants {
    let omega0 = cfg.dipolar_coupling();
    let w2 = omega0 * omega0;
    let nu_d = 9.0 * w2 * HBAR / (32.0 * PI * cfg.v_s * cfg.v_s * M_P);
    let tau_gamma = 16.0 * cfg.v_s.powi(3) * M_P / (9.0 * w2 * K_B * cfg.temperature * cfg.a);
    let sigma_x = plane_width(cfg.n_pairs);
    let tau_x = 1.0 / (2.0 * SQRT_2 * PI * nu_d * sigma_x);
    RateConstants {
        omega0,
        nu0: -omega0 / (4.0 * PI),
        nu_hat0: 3.0 * (omega0 / (4.0 * PI)).abs(),
        nu_d,
        tau_gamma,
        tau_gamma_min: tau_gamma / 9.0,
        sigma_x,
        sigma_x_prime: sample_width(cfg.n_pairs),
        tau_x,
        tau_x_hat: tau_x / 3.0,
    }
}

/// Deviation matrix right after a saturating pulse, −(ħω₀/k_BT) I_x.
pub fn initial_after_pulse(omega0_larmor: f64, temperature: f64) -> ReducedPairMatrix {
    ReducedPairMatrix::spin_x().scale(-HBAR * omega0_larmor / (K_B * temperature))
}

fn kappa_gap(m: PairLevel, n: PairLevel) -> f64 {
    (m.kappa() - n.kappa()) as f64
}

fn kappa_sq_gap(m: PairLevel, n: PairLevel) -> f64 {
    (m.kappa().pow(2) - n.kappa().pow(2)) as f64
}

/// Smallest value the whole-sample Gaussian factor G′ takes (|Δκ| = 3),
/// using a width `sigma` for the whole-sample partner sum.
pub fn sample_factor_min(rates: &RateConstants, cfg: &PhysicalConfig, sigma: f64) -> f64 {
    sample_factor(rates, cfg, sigma, 3.0)
}

pub(crate) fn sample_factor(
    rates: &RateConstants,
    cfg: &PhysicalConfig,
    sigma: f64,
    gap: f64,
) -> f64 {
    let x = SQRT_2 * PI * rates.nu_d * gap * sigma * cfg.a / cfg.v_s;
    (-x * x).exp()
}

/// Free evolution of a pair's deviation matrix.
///
/// The default path keeps the dipolar precession and the Gaussian decay with
/// time constant τ_X/|Δκ|. The exact path also keeps the thermal decay, the
/// lattice-mediated phase and the whole-sample factor G′.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEvolution {
    cfg: PhysicalConfig,
    rates: RateConstants,
    exact: bool,
}

/// Lowest admissible G′ on the default path.
pub const SAMPLE_FACTOR_FLOOR: f64 = 1.0 - 1e-6;

impl FreeEvolution {
    pub fn new(cfg: &PhysicalConfig, exact: bool) -> Result<Self> {
        let rates = rate_constants(cfg);
        if !exact && sample_factor_min(&rates, cfg, rates.sigma_x_prime) < SAMPLE_FACTOR_FLOOR {
            return Err(Error::Invariant("G' >= 1 - 1e-6"));
        }
        Ok(Self {
            cfg: *cfg,
            rates,
            exact,
        })
    }

    pub fn rates(&self) -> &RateConstants {
        &self.rates
    }

    /// Multiplier of element (m, n) after time `t`.
    pub fn factor(&self, m: PairLevel, n: PairLevel, t: f64) -> Complex64 {
        let r = &self.rates;
        let gap = kappa_gap(m, n);
        let gauss = (-(gap * t / r.tau_x).powi(2)).exp();
        let precession = Complex64::from_polar(gauss, 2.0 * PI * r.nu0 * gap * t);
        if !self.exact {
            return precession;
        }
        let thermal = (-gap * gap * t / r.tau_gamma).exp();
        let lattice = Complex64::from_polar(1.0, 2.0 * PI * r.nu_d * kappa_sq_gap(m, n) * t);
        let sample = sample_factor(r, &self.cfg, r.sigma_x_prime, gap);
        precession * lattice * (thermal * sample)
    }

    pub fn sigma(&self, sigma0: &ReducedPairMatrix, t: f64) -> ReducedPairMatrix {
        sigma0.map_elements(|m, n, z| if m == n { z } else { z * self.factor(m, n, t) })
    }
}

/// Default-path free evolution of `sigma0` for time `t`.
pub fn free_sigma(
    cfg: &PhysicalConfig,
    sigma0: &ReducedPairMatrix,
    t: f64,
) -> Result<ReducedPairMatrix> {
    check_time(t)?;
    Ok(FreeEvolution::new(cfg, false)?.sigma(sigma0, t))
}

/// Where a time sits relative to the window in which discrete mode sums
/// approximate the continuum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumWindow {
    /// Not yet ten lattice transit times a/v_s.
    Early,
    Inside,
    /// Beyond a tenth of the recurrence time N₁a/v_s.
    PastRecurrence,
}

/// Kernels from explicit mode sums, m² s².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteKernels {
    pub gamma: f64,
    pub epsilon: f64,
    pub zeta: f64,
    pub window: SumWindow,
}

/// Time for sound to cross the N₁-site chain, N₁a/v_s.
pub fn recurrence_time(cfg: &PhysicalConfig) -> f64 {
    cfg.n1 as f64 * cfg.a / cfg.v_s
}

pub fn sum_window(cfg: &PhysicalConfig, t: f64) -> SumWindow {
    if t < 10.0 * cfg.a / cfg.v_s {
        SumWindow::Early
    } else if t > 0.1 * recurrence_time(cfg) {
        SumWindow::PastRecurrence
    } else {
        SumWindow::Inside
    }
}

/// Acoustic modes k_q = 2πq/(N₁a), q = ±1, …, ±⌊N₁/2⌋.
pub fn chain_modes(cfg: &PhysicalConfig) -> Vec<ModeSpec> {
    let dk = 2.0 * PI / (cfg.n1 as f64 * cfg.a);
    let half = (cfg.n1 / 2) as i64;
    (1..=half)
        .flat_map(|q| [q, -q])
        .map(|q| acoustic_mode(dk * q as f64, cfg))
        .collect()
}

/// γ, ε and ζ(x) summed over [`chain_modes`] with the exact coth.
///
/// Each chain mode stands for N/N₁ modes across the plane perpendicular to
/// the pair axis, which gives the continuum limit N·a/(2π)∫dk.
pub fn discrete_kernel_sums(cfg: &PhysicalConfig, t: f64, x: f64) -> Result<DiscreteKernels> {
    check_time(t)?;
    if cfg.n1 < 2 {
        return Err(Error::Invariant("N1 >= 2"));
    }
    let copies = cfg.n_pairs / cfg.n1 as f64;
    let beta = cfg.beta();
    let (mut gamma, mut epsilon, mut zeta) = (0.0, 0.0, 0.0);
    for mode in chain_modes(cfg) {
        let wt = mode.omega * t;
        let weight = copies * mode.g.norm_sqr() / (mode.omega * mode.omega);
        let s = (0.5 * wt).sin();
        let smx = sin_minus_x(wt);
        gamma += 2.0 * weight * s * s * coth(0.5 * beta * mode.omega);
        epsilon += weight * smx;
        let (sin_kx, cos_kx) = (mode.k * x).sin_cos();
        zeta += 2.0 * weight * (cos_kx * smx + sin_kx * one_minus_cos(wt));
    }
    Ok(DiscreteKernels {
        gamma,
        epsilon,
        zeta,
        window: sum_window(cfg, t),
    })
}
