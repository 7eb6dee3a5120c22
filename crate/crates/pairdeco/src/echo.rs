//! Magic echo: a forward stretch under the full coupling followed by a
//! backward stretch with the dipolar Hamiltonian scaled by f_B.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::config::PhysicalConfig;
use crate::constants::{HBAR, K_B};
use crate::deco::{check_mode, coth, one_minus_cos, sin_minus_x, DecoherenceExponent};
use crate::error::{Error, Result};
use crate::pair::{PairLevel, ReducedPairMatrix};
use crate::phonon::{phi_step, rate_constants, tau_x_from_frequency, RateConstants};

/// Backward scaling of the ideal magic echo.
pub const IDEAL_EFFICIENCY: f64 = -0.5;

/// Largest |φ▽/π| over all separations and times.
pub const PHASE_WEIGHT_MAX: f64 = 1.75;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReversalSchedule {
    pub t_f: f64,
    pub t_b: f64,
    pub f_b: f64,
}

impl ReversalSchedule {
    pub fn new(t_f: f64, t_b: f64, f_b: f64) -> Result<Self> {
        if !(t_f.is_finite() && t_f >= 0.0 && t_b.is_finite() && t_b >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "stretch times must be non-negative, got t_F = {t_f}, t_B = {t_b}"
            )));
        }
        if !f_b.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "f_B must be finite, got {f_b}"
            )));
        }
        Ok(Self { t_f, t_b, f_b })
    }

    /// f_B = −1/2 with t_B = 2t_F, total time `t`.
    pub fn ideal(t: f64) -> Result<Self> {
        Self::new(t / 3.0, 2.0 * t / 3.0, IDEAL_EFFICIENCY)
    }

    pub fn total(&self) -> f64 {
        self.t_f + self.t_b
    }

    /// t_F + f_B² t_B, the time the linear phase keeps growing for.
    pub fn linear_time(&self) -> f64 {
        self.t_f + self.f_b * self.f_b * self.t_b
    }

    fn weights(&self) -> [(f64, f64); 3] {
        let f = self.f_b;
        [
            (1.0 - f, self.t_f),
            (f * (f - 1.0), self.t_b),
            (f, self.t_f + self.t_b),
        ]
    }
}

/// C_δ and S_δ at frequency `omega`.
pub fn reversal_trig(omega: f64, sched: &ReversalSchedule) -> Result<(f64, f64)> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::SingularMode);
    }
    Ok(sched.weights().iter().fold((0.0, 0.0), |(c, s), &(w, t)| {
        (c + w * one_minus_cos(omega * t), s + w * (omega * t).sin())
    }))
}

/// S_δ − ω(t_F + f_B² t_B), assembled from sin x − x pieces so small ωt keeps
/// its digits.
fn reversal_sin_minus_linear(omega: f64, sched: &ReversalSchedule) -> f64 {
    sched
        .weights()
        .iter()
        .map(|&(w, t)| w * sin_minus_x(omega * t))
        .sum()
}

/// C▽ and S▽ of the ideal echo at total time `t`.
pub fn ideal_trig(omega: f64, t: f64) -> (f64, f64) {
    let x = omega * t;
    let c =
        1.5 * one_minus_cos(x / 3.0) + 0.75 * one_minus_cos(2.0 * x / 3.0) - 0.5 * one_minus_cos(x);
    let s = 1.5 * (x / 3.0).sin() + 0.75 * (2.0 * x / 3.0).sin() - 0.5 * x.sin();
    (c, s)
}

/// Γ and Υ of one mode after the forward and backward stretches.
pub fn reversal_exponent_k(
    lambda_m: Complex64,
    lambda_n: Complex64,
    omega: f64,
    beta: f64,
    sched: &ReversalSchedule,
) -> Result<DecoherenceExponent> {
    check_mode(omega, beta, sched.total())?;
    let w2 = omega * omega;
    let diff = lambda_m - lambda_n;
    let (c, _) = reversal_trig(omega, sched)?;
    let smx = reversal_sin_minus_linear(omega, sched);
    let gamma = diff.norm_sqr() / w2 * coth(0.5 * beta * omega) * c;
    let cross = (lambda_m * lambda_n.conj()).im;
    let upsilon =
        diff * (lambda_m + lambda_n).conj() / w2 * smx - 2.0 * cross / w2 * Complex64::new(c, smx);
    Ok(DecoherenceExponent { gamma, upsilon })
}

/// φ▽(x, t) = Σ j_n φ⁽ⁿ⁾ with sound cones at speeds n·v_s/3 and
/// (j₁, j₂, j₃) = (3/2, 3/4, −1/2).
pub fn phi_reversal(x: f64, t: f64, v_s: f64) -> f64 {
    [(1.0, 1.5), (2.0, 0.75), (3.0, -0.5)]
        .iter()
        .map(|&(n, j)| j * phi_step(x, t, n * v_s / 3.0))
        .sum()
}

/// Ideal magic-echo evolution of a pair's deviation matrix at total time t.
///
/// The default path is the Gaussian exp(−[Δκ t/τ▽_X]²) with τ▽_X = 2τ_X. The
/// exact path adds the thermal decay over t/2, the lattice phase over t/2 and
/// the whole-sample factor with width σ_X′ scaled by [`PHASE_WEIGHT_MAX`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoEvolution {
    cfg: PhysicalConfig,
    rates: RateConstants,
    exact: bool,
}

impl EchoEvolution {
    pub fn new(cfg: &PhysicalConfig, exact: bool) -> Self {
        Self {
            cfg: *cfg,
            rates: rate_constants(cfg),
            exact,
        }
    }

    pub fn rates(&self) -> &RateConstants {
        &self.rates
    }

    /// τ▽_X = 2τ_X.
    pub fn tau(&self) -> f64 {
        2.0 * self.rates.tau_x
    }

    /// τ̂▽_X = τ▽_X/3.
    pub fn tau_hat(&self) -> f64 {
        self.tau() / 3.0
    }

    pub fn factor(&self, m: PairLevel, n: PairLevel, t: f64) -> Complex64 {
        let r = &self.rates;
        let gap = (m.kappa() - n.kappa()) as f64;
        let gauss = (-(gap * t / self.tau()).powi(2)).exp();
        if !self.exact {
            return Complex64::new(gauss, 0.0);
        }
        let half = 0.5 * t;
        let thermal = (-gap * gap * half / r.tau_gamma).exp();
        let sq_gap = (m.kappa().pow(2) - n.kappa().pow(2)) as f64;
        let lattice = Complex64::from_polar(1.0, 2.0 * PI * r.nu_d * sq_gap * half);
        let sample = sample_factor(r, &self.cfg, gap);
        lattice * (gauss * thermal * sample)
    }

    pub fn sigma(&self, sigma0: &ReducedPairMatrix, t: f64) -> ReducedPairMatrix {
        sigma0.map_elements(|m, n, z| if m == n { z } else { z * self.factor(m, n, t) })
    }
}

fn sample_factor(r: &RateConstants, cfg: &PhysicalConfig, gap: f64) -> f64 {
    crate::phonon::sample_factor(r, cfg, r.sigma_x_prime * PHASE_WEIGHT_MAX, gap)
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

/// Default-path echo evolution of `sigma0` for total time `t`.
pub fn me_sigma(
    cfg: &PhysicalConfig,
    sigma0: &ReducedPairMatrix,
    t: f64,
) -> Result<ReducedPairMatrix> {
    check_time(t)?;
    Ok(EchoEvolution::new(cfg, false).sigma(sigma0, t))
}

/// Normalised echo amplitude exp(−[t/τ̂▽_X]²).
pub fn me_amplitude(cfg: &PhysicalConfig, t_total: f64) -> Result<f64> {
    check_time(t_total)?;
    let tau_hat = EchoEvolution::new(cfg, false).tau_hat();
    Ok((-(t_total / tau_hat).powi(2)).exp())
}

/// ⟨I_x⟩ of `n_pairs` pairs at total echo time `t`, from the closed sum.
pub fn ix_expectation(cfg: &PhysicalConfig, t: f64, n_pairs: f64) -> Result<f64> {
    check_time(t)?;
    let ix = ReducedPairMatrix::spin_x();
    let weight: f64 = ix.0.iter().map(|z| z.norm_sqr()).sum();
    let tau = EchoEvolution::new(cfg, false).tau();
    let polarisation = HBAR * cfg.omega0_larmor * n_pairs / (K_B * cfg.temperature);
    Ok(-polarisation * weight * (-(3.0 * t / tau).powi(2)).exp())
}

/// The same expectation as N·Tr[I_x Δσ▽(t)].
pub fn ix_expectation_traced(cfg: &PhysicalConfig, t: f64, n_pairs: f64) -> Result<f64> {
    let ix = ReducedPairMatrix::spin_x();
    let start = crate::phonon::initial_after_pulse(cfg.omega0_larmor, cfg.temperature);
    Ok(n_pairs * ix.trace_product(&me_sigma(cfg, &start, t)?).re)
}

fn check_frequency(nu_hat_khz: f64) -> Result<()> {
    if nu_hat_khz.is_finite() && nu_hat_khz > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "dipolar frequency must be positive, got {nu_hat_khz} kHz"
        )))
    }
}

/// τ̂▽_X (s) for each dipolar frequency ν̂₀ (kHz).
pub fn theory_curve(nu_hat_khz: &[f64], v_s: f64, n_pairs: f64) -> Result<Vec<f64>> {
    nu_hat_khz
        .iter()
        .map(|&nu| {
            check_frequency(nu)?;
            Ok(2.0 / 3.0 * tau_x_from_frequency(nu * 1e3, v_s, n_pairs))
        })
        .collect()
}

/// One measured echo decay.
#[derive(Debug, Clone, Copy, PartialEq, serde::Deserialize)]
pub struct ExperimentRecord {
    pub nu_hat_khz: f64,
    /// Measured decay time, μs.
    pub tau_exp_us: f64,
}

/// Header of the experimental CSV.
pub const EXPERIMENT_HEADER: [&str; 2] = ["nu_hat_khz", "tau_exp_us"];

/// Parses `nu_hat_khz,tau_exp_us` rows. Errors carry 1-based file lines.
pub fn parse_experiment_csv(text: &str) -> Result<Vec<ExperimentRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| csv_error(&e, 1))?.clone();
    if headers.is_empty() {
        return Err(Error::Empty);
    }
    if headers.iter().collect::<Vec<_>>() != EXPERIMENT_HEADER {
        return Err(Error::Csv {
            line: 1,
            message: format!("expected header {}", EXPERIMENT_HEADER.join(",")),
        });
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| csv_error(&e, 0))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let record: ExperimentRecord = row
            .deserialize(Some(&headers))
            .map_err(|e| csv_error(&e, line))?;
        if !(record.nu_hat_khz > 0.0 && record.tau_exp_us > 0.0 && record.tau_exp_us.is_finite()) {
            return Err(Error::Csv {
                line,
                message: "both columns must be positive".into(),
            });
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::Empty);
    }
    Ok(records)
}

fn csv_error(e: &csv::Error, fallback: u64) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(fallback);
    let message = match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => e.to_string(),
    };
    Error::Csv { line, message }
}

/// Theory and residual for one record, all times in μs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub nu_hat_khz: f64,
    pub tau_exp_us: f64,
    pub tau_theory_us: f64,
    pub residual_us: f64,
}

/// Theory curve for one (v_s, N) pair at the record frequencies, μs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeCurve {
    pub v_s: f64,
    pub n_pairs: f64,
    pub tau_us: Vec<f64>,
}

/// Bounding parameter sets drawn around the measured points.
pub const ENVELOPE_PARAMETERS: [(f64, f64); 2] = [(2800.0, 8e21), (5500.0, 8e22)];

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub envelopes: Vec<EnvelopeCurve>,
}

impl ComparisonReport {
    /// `nu_hat_khz,tau_exp_us,tau_theory_us,residual_us`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("nu_hat_khz,tau_exp_us,tau_theory_us,residual_us\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.nu_hat_khz, r.tau_exp_us, r.tau_theory_us, r.residual_us
            ));
        }
        out
    }
}

pub fn compare_experiment(
    records: &[ExperimentRecord],
    v_s: f64,
    n_pairs: f64,
) -> Result<ComparisonReport> {
    if records.is_empty() {
        return Err(Error::Empty);
    }
    let freqs: Vec<f64> = records.iter().map(|r| r.nu_hat_khz).collect();
    let to_us = |v: Vec<f64>| v.into_iter().map(|s| s * 1e6).collect::<Vec<_>>();
    let theory = to_us(theory_curve(&freqs, v_s, n_pairs)?);
    let rows = records
        .iter()
        .zip(&theory)
        .map(|(r, &th)| ComparisonRow {
            nu_hat_khz: r.nu_hat_khz,
            tau_exp_us: r.tau_exp_us,
            tau_theory_us: th,
            residual_us: r.tau_exp_us - th,
        })
        .collect();
    let envelopes = ENVELOPE_PARAMETERS
        .iter()
        .map(|&(v, n)| {
            Ok(EnvelopeCurve {
                v_s: v,
                n_pairs: n,
                tau_us: to_us(theory_curve(&freqs, v, n)?),
            })
        })
        .collect::<Result<_>>()?;
    Ok(ComparisonReport { rows, envelopes })
}
