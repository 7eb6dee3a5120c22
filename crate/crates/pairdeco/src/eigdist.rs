//! Exact distribution of the eigenvalue sum X = Σκ over N pairs, each pair in
//! one of the four levels with κ ∈ {1, −2, 1, 0}.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::pair::PairLevel;

/// Largest N accepted by [`exact_counts`].
pub const MAX_N: u32 = 24;

/// Number of configurations α(X) for every reachable X.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EigCountTable {
    n: u32,
    counts: BTreeMap<i64, BigUint>,
}

impl EigCountTable {
    pub fn n(&self) -> u32 {
        self.n
    }

    /// α(X), zero off the support.
    pub fn count(&self, x: i64) -> BigUint {
        self.counts.get(&x).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &BigUint)> + '_ {
        self.counts.iter().map(|(&x, c)| (x, c))
    }

    pub fn total(&self) -> BigUint {
        self.counts.values().sum()
    }

    /// 4^N.
    pub fn configurations(&self) -> BigUint {
        BigUint::from(4u32).pow(self.n)
    }

    pub fn probability(&self, x: i64) -> f64 {
        ratio_f64(&self.count(x), &self.configurations())
    }

    pub fn support(&self) -> (i64, i64) {
        let lo = self.counts.keys().next().copied().unwrap_or(0);
        let hi = self.counts.keys().next_back().copied().unwrap_or(0);
        (lo, hi)
    }

    /// E[e^{iwX}].
    pub fn characteristic(&self, w: f64) -> Complex64 {
        let total = self.configurations();
        self.iter()
            .map(|(x, c)| Complex64::from_polar(ratio_f64(c, &total), w * x as f64))
            .sum()
    }
}

fn ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    BigRational::new(num.clone().into(), den.clone().into())
        .to_f64()
        .unwrap_or(f64::NAN)
}

fn check_budget(n: u32) -> Result<()> {
    if (1..=MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(Error::OutOfBudget(n))
    }
}

fn single_pair() -> BTreeMap<i64, BigUint> {
    let mut table = BTreeMap::new();
    for level in PairLevel::ALL {
        *table
            .entry(level.kappa() as i64)
            .or_insert_with(BigUint::zero) += 1u32;
    }
    table
}

/// Counts by N-fold convolution of the single-pair table {1: 2, 0: 1, −2: 1}.
pub fn exact_counts(n: u32) -> Result<EigCountTable> {
    check_budget(n)?;
    let one = single_pair();
    let mut counts = one.clone();
    for _ in 1..n {
        let mut next: BTreeMap<i64, BigUint> = BTreeMap::new();
        for (x, c) in &counts {
            for (k, m) in &one {
                *next.entry(x + k).or_insert_with(BigUint::zero) += c * m;
            }
        }
        counts = next;
    }
    Ok(EigCountTable { n, counts })
}

fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Counts from the closed multinomial sum over (n₀, n₁) with
/// X = 3n₁ + 2n₀ − 2N and weight 2^{n₁} N!/(n₀! n₁! n₋₂!).
pub fn multinomial_counts(n: u32) -> Result<EigCountTable> {
    check_budget(n)?;
    let full = factorial(n);
    let mut counts: BTreeMap<i64, BigUint> = BTreeMap::new();
    for n0 in 0..=n {
        for n1 in 0..=(n - n0) {
            let n2 = n - n0 - n1;
            let ways = &full / (factorial(n0) * factorial(n1) * factorial(n2));
            let x = 3 * n1 as i64 + 2 * n0 as i64 - 2 * n as i64;
            *counts.entry(x).or_insert_with(BigUint::zero) += (BigUint::one() << n1) * ways;
        }
    }
    Ok(EigCountTable { n, counts })
}

/// Counts by walking all 4^N level assignments. Only for small N.
pub fn enumerate_counts(n: u32) -> Result<EigCountTable> {
    if !(1..=10).contains(&n) {
        return Err(Error::OutOfBudget(n));
    }
    let mut counts: BTreeMap<i64, BigUint> = BTreeMap::new();
    for code in 0..4u64.pow(n) {
        let mut rest = code;
        let mut x = 0i64;
        for _ in 0..n {
            x += PairLevel::ALL[(rest % 4) as usize].kappa() as i64;
            rest /= 4;
        }
        *counts.entry(x).or_insert_with(BigUint::zero) += 1u32;
    }
    Ok(EigCountTable { n, counts })
}

/// Exact mean and variance of X.
pub fn dist_moments(table: &EigCountTable) -> (BigRational, BigRational) {
    let total: BigRational = BigRational::from_integer(table.configurations().into());
    let mut first = BigRational::zero();
    let mut second = BigRational::zero();
    for (x, c) in table.iter() {
        let c = BigRational::from_integer(c.clone().into());
        let xr = BigRational::from_integer(x.into());
        first += &c * &xr;
        second += c * &xr * &xr;
    }
    let mean = first / &total;
    let variance = second / &total - &mean * &mean;
    (mean, variance)
}

/// Zero-mean normal law with σ = √(3N/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLimit {
    pub sigma: f64,
}

impl GaussianLimit {
    pub fn pdf(&self, x: f64) -> f64 {
        let u = x / self.sigma;
        (-0.5 * u * u).exp() / (self.sigma * (2.0 * PI).sqrt())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        0.5 * (1.0 + libm::erf(x / (self.sigma * SQRT_2)))
    }
}

/// `n` may be a physical pair count far beyond [`MAX_N`].
pub fn gaussian_limit(n: f64) -> Result<GaussianLimit> {
    if !(n.is_finite() && n >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "N must be at least 1, got {n}"
        )));
    }
    Ok(GaussianLimit {
        sigma: (1.5 * n).sqrt(),
    })
}

/// sup_x |F(x) − Φ(x/σ)| between the exact step CDF and its normal limit.
pub fn kolmogorov_distance(table: &EigCountTable) -> f64 {
    let normal = GaussianLimit {
        sigma: (1.5 * table.n as f64).sqrt(),
    };
    let total = table.configurations();
    let mut below = BigUint::zero();
    let mut worst = 0.0f64;
    for (x, c) in table.iter() {
        let phi = normal.cdf(x as f64);
        worst = worst.max((ratio_f64(&below, &total) - phi).abs());
        below += c;
        worst = worst.max((ratio_f64(&below, &total) - phi).abs());
    }
    worst
}

/// Rows `X,count,exact_probability,gaussian_density`.
pub fn to_csv(table: &EigCountTable) -> String {
    let normal = GaussianLimit {
        sigma: (1.5 * table.n as f64).sqrt(),
    };
    let mut out = String::from("X,count,exact_probability,gaussian_density\n");
    for (x, c) in table.iter() {
        let _ = writeln!(
            out,
            "{x},{c},{:.16e},{:.16e}",
            table.probability(x),
            normal.pdf(x as f64)
        );
    }
    out
}

/// Largest gap between |E[e^{iwX}]| from the exact table and the Gaussian
/// envelope exp(−(Δκ t/τ)²), over `samples` times in [0, 2τ] and Δκ ∈ {1, 2, 3}.
///
/// The argument w = √2 Δκ t /(τσ) matches the two laws at equal width.
pub fn envelope_gap(table: &EigCountTable, samples: usize) -> f64 {
    let sigma = (1.5 * table.n as f64).sqrt();
    let mut worst = 0.0f64;
    for gap in 1..=3 {
        let gap = gap as f64;
        for i in 0..=samples {
            let s = 2.0 * i as f64 / samples as f64;
            let w = SQRT_2 * gap * s / sigma;
            let gauss = (-(gap * s).powi(2)).exp();
            worst = worst.max((table.characteristic(w).norm() - gauss).abs());
        }
    }
    worst
}
