//! Brute-force decoherence traces in a truncated Fock space.
//!
//! The closed forms in [`crate::deco`] and [`crate::echo`] come from a
//! coherent-state calculation. This module checks them the slow way: build
//! M + J = ω b†b + λ* b + λ b† on levels 0..=n_max, diagonalise, exponentiate
//! and take the thermal trace.
//!
//! M + J is tridiagonal with off-diagonal entries λ√n. Conjugating with
//! diag(e^{i n arg λ}) makes it real symmetric, so every propagator is built
//! from a real eigendecomposition and two real matrix products.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// One bosonic mode cut off above `n_max` quanta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedMode {
    n_max: usize,
    omega: f64,
}

impl TruncatedMode {
    pub fn new(n_max: usize, omega: f64) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidArgument("n_max must be at least 1".into()));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::SingularMode);
        }
        Ok(Self { n_max, omega })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// b, with √n on the first superdiagonal.
    pub fn lowering(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            if j == i + 1 {
                Complex64::new((j as f64).sqrt(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn raising(&self) -> DMatrix<Complex64> {
        self.lowering().adjoint()
    }

    pub fn number(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            Complex64::new(if i == j { i as f64 } else { 0.0 }, 0.0)
        })
    }

    /// Dense ω b†b + f(λ* b + λ b†).
    pub fn hamiltonian(&self, lambda: Complex64, f: f64) -> DMatrix<Complex64> {
        let b = self.lowering();
        let bd = self.raising();
        &bd * &b * Complex64::new(self.omega, 0.0)
            + (b * lambda.conj() + bd * lambda) * Complex64::new(f, 0.0)
    }

    /// Diagonalised M + λ* b + λ b†.
    pub fn generator(&self, lambda: Complex64) -> Generator {
        Generator::new(self.dim(), self.omega, lambda)
    }
}

/// Eigendecomposition of one displaced-oscillator generator.
#[derive(Debug, Clone)]
pub struct Generator {
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
    arg: f64,
}

impl Generator {
    fn new(dim: usize, omega: f64, lambda: Complex64) -> Self {
        let mut t = DMatrix::zeros(dim, dim);
        for n in 0..dim {
            t[(n, n)] = omega * n as f64;
        }
        let modulus = lambda.norm();
        for n in 1..dim {
            let e = modulus * (n as f64).sqrt();
            t[(n - 1, n)] = e;
            t[(n, n - 1)] = e;
        }
        let eig = SymmetricEigen::new(t);
        Self {
            energies: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
            arg: if modulus == 0.0 { 0.0 } else { lambda.arg() },
        }
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Phase of λ; the spectrum depends on |λ| alone.
    pub fn arg(&self) -> f64 {
        self.arg
    }

    /// e^{−iHt}.
    pub fn propagator(&self, t: f64) -> Propagator {
        self.bare_propagator(t).rephase(self.arg)
    }

    /// e^{−iHt} for the real coupling |λ|.
    pub fn bare_propagator(&self, t: f64) -> Propagator {
        let v = &self.vectors;
        let mut vc = v.clone();
        let mut vs = v.clone();
        for (a, &e) in self.energies.iter().enumerate() {
            let (s, c) = (e * t).sin_cos();
            vc.column_mut(a).scale_mut(c);
            vs.column_mut(a).scale_mut(-s);
        }
        Propagator {
            re: vc * v.transpose(),
            im: vs * v.transpose(),
        }
    }
}

/// A unitary stored as separate real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl Propagator {
    /// P U P† with P = diag(e^{i·arg·j}), which turns the propagator for a
    /// coupling λ into the one for λ·e^{i·arg}.
    pub fn rephase(&self, arg: f64) -> Propagator {
        if arg == 0.0 {
            return self.clone();
        }
        let phases: Vec<Complex64> = (0..self.re.nrows())
            .map(|j| Complex64::from_polar(1.0, arg * j as f64))
            .collect();
        let mut re = self.re.clone();
        let mut im = self.im.clone();
        for k in 0..re.ncols() {
            for j in 0..re.nrows() {
                let z = phases[j] * phases[k].conj() * Complex64::new(re[(j, k)], im[(j, k)]);
                re[(j, k)] = z.re;
                im[(j, k)] = z.im;
            }
        }
        Propagator { re, im }
    }

    /// self · rhs
    pub fn then_after(&self, rhs: &Propagator) -> Propagator {
        Propagator {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        self.re.zip_map(&self.im, Complex64::new)
    }

    /// max |U U† − 1|.
    pub fn unitarity_defect(&self) -> f64 {
        let rr = &self.re * self.re.transpose() + &self.im * self.im.transpose();
        let ii = &self.im * self.re.transpose() - &self.re * self.im.transpose();
        let mut worst = 0.0f64;
        for j in 0..rr.nrows() {
            for k in 0..rr.ncols() {
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max(Complex64::new(rr[(j, k)] - target, ii[(j, k)]).norm());
            }
        }
        worst
    }
}

/// Tr[A Θ B†] for diagonal Θ with entries `weights`.
pub fn weighted_trace(a: &Propagator, weights: &[f64], b: &Propagator) -> Complex64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (k, &w) in weights.iter().enumerate() {
        let (ar, ai) = (a.re.column(k), a.im.column(k));
        let (br, bi) = (b.re.column(k), b.im.column(k));
        let mut cr = 0.0;
        let mut ci = 0.0;
        for j in 0..ar.len() {
            cr += ar[j] * br[j] + ai[j] * bi[j];
            ci += ai[j] * br[j] - ar[j] * bi[j];
        }
        re += w * cr;
        im += w * ci;
    }
    Complex64::new(re, im)
}

/// Diagonal of the truncated thermal state for quanta 0..dim.
pub fn thermal_weights(dim: usize, beta_omega: f64) -> Result<Vec<f64>> {
    if !(beta_omega.is_finite() && beta_omega > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "beta*omega must be positive, got {beta_omega}"
        )));
    }
    // Anchored at the ground state, so the largest weight is exactly 1 and the
    // normalisation can neither underflow nor overflow.
    let mut w: Vec<f64> = (0..dim).map(|n| (-beta_omega * n as f64).exp()).collect();
    let z: f64 = w.iter().sum();
    for x in &mut w {
        *x /= z;
    }
    Ok(w)
}

/// e^{−βω b†b}/Z over the truncated space.
pub fn thermal_state(mode: &TruncatedMode, beta: f64) -> Result<DMatrix<Complex64>> {
    let w = thermal_weights(mode.dim(), beta * mode.omega)?;
    Ok(DMatrix::from_fn(mode.dim(), mode.dim(), |i, j| {
        Complex64::new(if i == j { w[i] } else { 0.0 }, 0.0)
    }))
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

/// Tr[e^{−i(M+J_m)t} Θ e^{+i(M+J_n)t}] at the mode's cutoff.
pub fn numeric_s_free(
    lambda_m: Complex64,
    lambda_n: Complex64,
    mode: &TruncatedMode,
    beta: f64,
    t: f64,
) -> Result<Complex64> {
    check_time(t)?;
    let w = thermal_weights(mode.dim(), beta * mode.omega)?;
    let um = mode.generator(lambda_m).propagator(t);
    if lambda_m == lambda_n {
        return Ok(weighted_trace(&um, &w, &um));
    }
    let un = mode.generator(lambda_n).propagator(t);
    Ok(weighted_trace(&um, &w, &un))
}

/// The same trace with a forward stretch `t_f` under J and a backward stretch
/// `t_b` under the scaled coupling `f_b`·J.
pub fn numeric_s_reversal(
    lambda_m: Complex64,
    lambda_n: Complex64,
    mode: &TruncatedMode,
    beta: f64,
    t_f: f64,
    t_b: f64,
    f_b: f64,
) -> Result<Complex64> {
    check_time(t_f)?;
    check_time(t_b)?;
    let w = thermal_weights(mode.dim(), beta * mode.omega)?;
    let cycle = |lambda: Complex64| {
        let forward = mode.generator(lambda).propagator(t_f);
        mode.generator(lambda * f_b)
            .propagator(t_b)
            .then_after(&forward)
    };
    let wm = cycle(lambda_m);
    let wn = if lambda_m == lambda_n {
        wm.clone()
    } else {
        cycle(lambda_n)
    };
    Ok(weighted_trace(&wm, &w, &wn))
}

/// Max-norm of (M + fJ) − (ω N̂ − f²|λ|²/ω) with N̂ = a†a, a = b + fλ/ω,
/// over the block that excludes the top level.
pub fn displaced_identity_residual(lambda: Complex64, mode: &TruncatedMode, f: f64) -> f64 {
    let dim = mode.dim();
    let omega = mode.omega;
    let shift = lambda * (f / omega);
    let a = mode.lowering() + DMatrix::identity(dim, dim) * shift;
    let displaced_number = a.adjoint() * &a;
    let lhs = mode.hamiltonian(lambda, f);
    let rhs = displaced_number * Complex64::new(omega, 0.0)
        - DMatrix::identity(dim, dim) * Complex64::new(f * f * lambda.norm_sqr() / omega, 0.0);
    let mut worst = 0.0f64;
    for i in 0..dim - 1 {
        for j in 0..dim - 1 {
            worst = worst.max((lhs[(i, j)] - rhs[(i, j)]).norm());
        }
    }
    worst
}

/// Bose-Einstein occupation 1/(e^{βω} − 1).
pub fn mean_occupation(beta_omega: f64) -> f64 {
    1.0 / beta_omega.exp_m1()
}

/// First cutoff to try: ten thermal occupations plus room for a coherent
/// displacement of |λ/ω|.
pub fn initial_cutoff(beta_omega: f64, max_ratio: f64) -> usize {
    (10.0 * mean_occupation(beta_omega) + 4.0 * max_ratio * max_ratio + 20.0).ceil() as usize
}

/// `start`, 2·`start`, 4·`start`, … (`levels` entries).
pub fn doubling_schedule(start: usize, levels: u32) -> Vec<usize> {
    (0..levels).map(|i| start << i).collect()
}

/// Walks `schedule` until two successive estimates differ by less than `tol`
/// and returns the later (larger cutoff) estimate with its cutoff.
pub fn converge<F>(mut op: F, schedule: &[usize], tol: f64) -> Result<(Complex64, usize)>
where
    F: FnMut(usize) -> Result<Complex64>,
{
    let (&first, rest) = schedule
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("empty cutoff schedule".into()))?;
    let mut previous = op(first)?;
    let mut before = previous;
    for &n in rest {
        let value = op(n)?;
        if (value - previous).norm() < tol {
            return Ok((value, n));
        }
        before = previous;
        previous = value;
    }
    Err(Error::NotConverged {
        previous: before,
        last: previous,
        n_max: *schedule.last().unwrap_or(&first),
    })
}

/// Number of doublings tried by [`converged_s_free`] and [`converged_s_reversal`].
pub const DOUBLINGS: u32 = 4;
/// Absolute change between cutoffs accepted as converged.
pub const CUTOFF_TOL: f64 = 1e-10;

/// [`numeric_s_free`] with the cutoff grown until it stops mattering.
pub fn converged_s_free(
    lambda_m: Complex64,
    lambda_n: Complex64,
    omega: f64,
    beta: f64,
    t: f64,
) -> Result<(Complex64, usize)> {
    let ratio = lambda_m.norm().max(lambda_n.norm()) / omega;
    let schedule = doubling_schedule(initial_cutoff(beta * omega, ratio), DOUBLINGS);
    converge(
        |n| numeric_s_free(lambda_m, lambda_n, &TruncatedMode::new(n, omega)?, beta, t),
        &schedule,
        CUTOFF_TOL,
    )
}

/// [`numeric_s_reversal`] with the cutoff grown until it stops mattering.
#[allow(clippy::too_many_arguments)]
pub fn converged_s_reversal(
    lambda_m: Complex64,
    lambda_n: Complex64,
    omega: f64,
    beta: f64,
    t_f: f64,
    t_b: f64,
    f_b: f64,
) -> Result<(Complex64, usize)> {
    let ratio = lambda_m.norm().max(lambda_n.norm()) / omega;
    let schedule = doubling_schedule(initial_cutoff(beta * omega, ratio), DOUBLINGS);
    converge(
        |n| {
            numeric_s_reversal(
                lambda_m,
                lambda_n,
                &TruncatedMode::new(n, omega)?,
                beta,
                t_f,
                t_b,
                f_b,
            )
        },
        &schedule,
        CUTOFF_TOL,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ladder_structure() {
        let mode = TruncatedMode::new(6, 1.0).unwrap();
        let b = mode.lowering();
        assert_eq!(b[(2, 3)], c(3f64.sqrt(), 0.0));
        assert_eq!(b[(3, 2)], c(0.0, 0.0));
        let comm = &b * mode.raising() - mode.raising() * &b;
        for i in 0..7 {
            for j in 0..7 {
                let want = match (i, j) {
                    (6, 6) => -6.0,
                    _ if i == j => 1.0,
                    _ => 0.0,
                };
                assert!((comm[(i, j)] - c(want, 0.0)).norm() < 1e-14, "{i},{j}");
            }
        }
        assert!(TruncatedMode::new(0, 1.0).is_err());
    }

    #[test]
    fn cold_thermal_state_is_vacuum() {
        let mode = TruncatedMode::new(10, 1.0).unwrap();
        let theta = thermal_state(&mode, 50.0).unwrap();
        assert!(theta[(0, 0)].re >= 1.0 - 1e-20);
        assert_eq!(theta.trace().im, 0.0);
        assert!((theta.trace().re - 1.0).abs() < 1e-15);
        assert!(thermal_state(&mode, 0.0).is_err());
    }

    #[test]
    fn hot_thermal_state_occupation() {
        let n = initial_cutoff(0.1, 0.0) * 4;
        let w = thermal_weights(n + 1, 0.1).unwrap();
        let mean: f64 = w.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        assert!((mean - mean_occupation(0.1)).abs() < 1e-6);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn generator_matches_dense_hamiltonian() {
        let mode = TruncatedMode::new(12, 1.3).unwrap();
        let lambda = c(0.2, -0.35);
        let gen = mode.generator(lambda);
        let u = gen.propagator(0.0).to_complex();
        assert!(
            (u - DMatrix::identity(13, 13))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
                < 1e-13
        );
        // Small-time expansion: U ≈ 1 − iHt.
        let dt = 1e-7;
        let u = gen.propagator(dt).to_complex();
        let h = mode.hamiltonian(lambda, 1.0);
        let approx = DMatrix::<Complex64>::identity(13, 13) - h * Complex64::new(0.0, dt);
        assert!((u - approx).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-11);
    }

    #[test]
    fn propagators_are_unitary() {
        let mode = TruncatedMode::new(80, 1.0).unwrap();
        for lambda in [c(0.5, 0.0), c(0.0, -0.2), c(0.3, 0.3)] {
            let u = mode.generator(lambda).propagator(10.0);
            assert!(u.unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn equal_real_couplings_give_unit_modulus() {
        let (s, _) = converged_s_free(c(0.3, 0.0), c(0.3, 0.0), 1.0, 1.0, 3.0).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_time_is_thermal_trace() {
        let mode = TruncatedMode::new(60, 1.0).unwrap();
        let s = numeric_s_free(c(0.3, 0.0), c(0.0, 0.2), &mode, 1.0, 0.0).unwrap();
        assert!((s - 1.0).norm() < 1e-13);
    }

    #[test]
    fn swapping_conjugates() {
        let mode = TruncatedMode::new(60, 1.0).unwrap();
        let a = numeric_s_free(c(0.3, 0.0), c(0.0, 0.2), &mode, 1.0, 2.0).unwrap();
        let b = numeric_s_free(c(0.0, 0.2), c(0.3, 0.0), &mode, 1.0, 2.0).unwrap();
        assert!((a - b.conj()).norm() < 1e-13);
    }

    #[test]
    fn reversal_degenerate_schedules() {
        let mode = TruncatedMode::new(60, 1.0).unwrap();
        let (lm, ln) = (c(0.4, 0.0), c(-0.1, 0.2));
        let free = numeric_s_free(lm, ln, &mode, 1.0, 3.0).unwrap();
        let full = numeric_s_reversal(lm, ln, &mode, 1.0, 1.2, 1.8, 1.0).unwrap();
        let no_back = numeric_s_reversal(lm, ln, &mode, 1.0, 3.0, 0.0, -0.5).unwrap();
        assert!((free - full).norm() < 1e-10);
        assert!((free - no_back).norm() < 1e-10);
    }

    #[test]
    fn displaced_identity() {
        let mode = TruncatedMode::new(40, 2.0).unwrap();
        assert_eq!(displaced_identity_residual(c(0.0, 0.0), &mode, 1.0), 0.0);
        assert!(displaced_identity_residual(c(0.8, 0.0), &mode, 1.0) <= 1e-12 * 2.0);
        assert!(displaced_identity_residual(c(0.3, -0.5), &mode, -0.5) <= 1e-12 * 2.0);
    }

    #[test]
    fn converge_edges() {
        let mut calls = 0;
        let (v, n) = converge(
            |_| {
                calls += 1;
                Ok(c(0.5, 0.0))
            },
            &[4, 8, 16],
            1e-10,
        )
        .unwrap();
        assert_eq!((v, n, calls), (c(0.5, 0.0), 8, 2));
        let err = converge(|n| Ok(c(1.0 / n as f64, 0.0)), &[4, 8], 0.0).unwrap_err();
        assert!(matches!(err, Error::NotConverged { n_max: 8, .. }));
        assert!(converge(|_| Ok(c(0.0, 0.0)), &[], 1.0).is_err());
    }

    #[test]
    fn hot_modes_need_more_levels() {
        let hot = converged_s_free(c(0.3, 0.0), c(-0.3, 0.0), 1.0, 0.05, 0.5)
            .unwrap()
            .1;
        let cold = converged_s_free(c(0.3, 0.0), c(-0.3, 0.0), 1.0, 5.0, 0.5)
            .unwrap()
            .1;
        assert!(hot > cold);
    }
}
