//! Closed-form pure dephasing by a bosonic bath.
//!
//! A system eigenstate |m⟩ displaces each bath mode by an amount set by its
//! coupling eigenvalue λ_m. Coherences between |m⟩ and |n⟩ pick up the
//! overlap of the two displaced thermal states,
//!
//! ```text
//! S_mn(t) = Π_k exp(−Γ_k) exp(−iΥ_k)
//! Γ_k = 2|λ_m−λ_n|²/ω² sin²(ωt/2) coth(βω/2)
//! Υ_k = (λ_m−λ_n)(λ_m+λ_n)*/ω² [sin ωt − ωt] − 2 Im{λ_m λ_n*}/ω² ([1 − cos ωt] + i[sin ωt − ωt])
//! ```
//!
//! Υ is complex in general. Populations never change.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// sin x − x, with a series near zero where the difference cancels.
pub fn sin_minus_x(x: f64) -> f64 {
    if x.abs() < 0.05 {
        let x2 = x * x;
        -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        x.sin() - x
    }
}

/// 1 − cos x without cancellation.
pub fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

pub fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

/// Exponent pair of one mode's decoherence factor, S = exp(−Γ) exp(−iΥ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceExponent {
    pub gamma: f64,
    pub upsilon: Complex64,
}

impl DecoherenceExponent {
    pub const ZERO: Self = Self {
        gamma: 0.0,
        upsilon: Complex64 { re: 0.0, im: 0.0 },
    };

    pub fn factor(&self) -> Complex64 {
        (-self.gamma - I * self.upsilon).exp()
    }
}

impl std::ops::Add for DecoherenceExponent {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            gamma: self.gamma + rhs.gamma,
            upsilon: self.upsilon + rhs.upsilon,
        }
    }
}

pub(crate) fn check_mode(omega: f64, beta: f64, t: f64) -> Result<()> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::SingularMode);
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "beta must be positive, got {beta}"
        )));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time must be non-negative, got {t}"
        )));
    }
    Ok(())
}

/// Γ and Υ for a single mode of frequency `omega` after free evolution for `t`.
pub fn decoherence_exponent_k(
    lambda_m: Complex64,
    lambda_n: Complex64,
    omega: f64,
    beta: f64,
    t: f64,
) -> Result<DecoherenceExponent> {
    check_mode(omega, beta, t)?;
    let wt = omega * t;
    let w2 = omega * omega;
    let diff = lambda_m - lambda_n;
    let s = (0.5 * wt).sin();
    let gamma = 2.0 * diff.norm_sqr() / w2 * s * s * coth(0.5 * beta * omega);
    let smx = sin_minus_x(wt);
    let cross = (lambda_m * lambda_n.conj()).im;
    let upsilon = diff * (lambda_m + lambda_n).conj() / w2 * smx
        - 2.0 * cross / w2 * Complex64::new(one_minus_cos(wt), smx);
    Ok(DecoherenceExponent { gamma, upsilon })
}

/// Decoherence function of a set of independent modes `(ω, λ_m, λ_n)`.
pub fn s_mn(modes: &[(f64, Complex64, Complex64)], beta: f64, t: f64) -> Result<Complex64> {
    let mut total = DecoherenceExponent::ZERO;
    for &(omega, lm, ln) in modes {
        total = total + decoherence_exponent_k(lm, ln, omega, beta, t)?;
    }
    Ok(total.factor())
}

/// ρ_mn(t) = ρ_mn(0) exp(−i(E_m − E_n)t) S_mn(t).
///
/// `s_table` must carry ones on its diagonal; populations are copied through
/// untouched so the trace is preserved bit for bit.
pub fn evolve_reduced_matrix(
    rho0: &DMatrix<Complex64>,
    energies: &[f64],
    s_table: &DMatrix<Complex64>,
    t: f64,
) -> Result<DMatrix<Complex64>> {
    let dim = rho0.nrows();
    if rho0.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "rho0 is {}x{}",
            dim,
            rho0.ncols()
        )));
    }
    if energies.len() != dim || s_table.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch(format!(
            "rho0 {dim}x{dim}, {} energies, s_table {}x{}",
            energies.len(),
            s_table.nrows(),
            s_table.ncols()
        )));
    }
    if (0..dim).any(|i| s_table[(i, i)] != Complex64::new(1.0, 0.0)) {
        return Err(Error::InvalidArgument(
            "decoherence table must be one on the diagonal".into(),
        ));
    }
    Ok(DMatrix::from_fn(dim, dim, |m, n| {
        if m == n {
            rho0[(m, m)]
        } else {
            let phase = Complex64::from_polar(1.0, -(energies[m] - energies[n]) * t);
            rho0[(m, n)] * phase * s_table[(m, n)]
        }
    }))
}

/// Unit of the coupling amplitudes g, which fixes the unit of the kernels
/// (s² times unit²) and of the eigenvalues λ (rad/s per unit).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingUnit {
    Dimensionless,
    Meter,
}

impl CouplingUnit {
    fn name(self) -> &'static str {
        match self {
            Self::Dimensionless => "1",
            Self::Meter => "m",
        }
    }
}

/// Time kernels of one element after tracing out its partners.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedKernels {
    /// Multiplies (λ_m − λ_n)²; never negative.
    pub gamma: f64,
    /// Multiplies λ_m² − λ_n².
    pub epsilon: f64,
    /// Cross kernel with each partner, keyed by partner index.
    pub zeta: Vec<(usize, f64)>,
    /// Partner eigenvalues contracted with `zeta`.
    pub chi: f64,
    pub unit: CouplingUnit,
}

impl CondensedKernels {
    pub fn zero(unit: CouplingUnit) -> Self {
        Self {
            gamma: 0.0,
            epsilon: 0.0,
            zeta: Vec::new(),
            chi: 0.0,
            unit,
        }
    }
}

/// Kernels for element `target` given every element's couplings on a shared
/// mode set. `partner_lambda[j]` is the eigenvalue of partner `j` in the
/// configuration being traced; the entry at `target` is ignored.
pub fn condensed_kernels(
    couplings: &[Vec<Complex64>],
    target: usize,
    omegas: &[f64],
    partner_lambda: &[f64],
    beta: f64,
    t: f64,
    unit: CouplingUnit,
) -> Result<CondensedKernels> {
    if target >= couplings.len() {
        return Err(Error::InvalidArgument(format!(
            "target {target} not among {} elements",
            couplings.len()
        )));
    }
    if partner_lambda.len() != couplings.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} eigenvalues for {} elements",
            partner_lambda.len(),
            couplings.len()
        )));
    }
    if let Some(bad) = couplings.iter().find(|g| g.len() != omegas.len()) {
        return Err(Error::DimensionMismatch(format!(
            "{} couplings for {} modes",
            bad.len(),
            omegas.len()
        )));
    }
    let own = &couplings[target];
    let mut gamma = 0.0;
    let mut epsilon = 0.0;
    for (g, &omega) in own.iter().zip(omegas) {
        check_mode(omega, beta, t)?;
        let wt = omega * t;
        let w2 = omega * omega;
        let s = (0.5 * wt).sin();
        gamma += 2.0 * g.norm_sqr() / w2 * s * s * coth(0.5 * beta * omega);
        epsilon += g.norm_sqr() / w2 * sin_minus_x(wt);
    }
    let mut zeta = Vec::with_capacity(couplings.len().saturating_sub(1));
    let mut chi = 0.0;
    for (j, other) in couplings.iter().enumerate() {
        if j == target {
            continue;
        }
        let z: f64 = own
            .iter()
            .zip(other)
            .zip(omegas)
            .map(|((ga, gb), &omega)| {
                let wt = omega * t;
                let p = ga * gb.conj();
                2.0 / (omega * omega) * (p.re * sin_minus_x(wt) - p.im * one_minus_cos(wt))
            })
            .sum();
        chi += partner_lambda[j] * z;
        zeta.push((j, z));
    }
    Ok(CondensedKernels {
        gamma,
        epsilon,
        zeta,
        chi,
        unit,
    })
}

/// One element of the condensed reduced matrix,
/// ρ̄(0) e^{−i(E_m−E_n)t} e^{−(λ_m−λ_n)²γ} e^{−i(λ_m²−λ_n²)ε} e^{−i(λ_m−λ_n)χ}.
///
/// `unit` states what the eigenvalues are per; it must match the kernels.
#[allow(clippy::too_many_arguments)]
pub fn condensed_sigma_element(
    rho0: Complex64,
    energy_m: f64,
    energy_n: f64,
    lambda_m: f64,
    lambda_n: f64,
    unit: CouplingUnit,
    kernels: &CondensedKernels,
    t: f64,
) -> Result<Complex64> {
    if unit != kernels.unit {
        return Err(Error::UnitMismatch {
            eigen: unit.name(),
            kernel: kernels.unit.name(),
        });
    }
    let dl = lambda_m - lambda_n;
    let magnitude = -dl * dl * kernels.gamma;
    let phase = -(energy_m - energy_n) * t
        - (lambda_m * lambda_m - lambda_n * lambda_n) * kernels.epsilon
        - dl * kernels.chi;
    Ok(rho0 * Complex64::from_polar(magnitude.exp(), phase))
}
