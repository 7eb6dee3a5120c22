//! The four-level basis of one proton pair and matrices over it.

use nalgebra::Matrix4;
use num_complex::Complex64;

/// Triplet-singlet basis of a spin pair, in matrix index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairLevel {
    /// |1, 1⟩
    TPlus,
    /// |1, 0⟩
    TZero,
    /// |1, −1⟩
    TMinus,
    /// |0, 0⟩
    Singlet,
}

impl PairLevel {
    pub const ALL: [PairLevel; 4] = [Self::TPlus, Self::TZero, Self::TMinus, Self::Singlet];

    /// Row/column of this level in a [`ReducedPairMatrix`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn kappa(self) -> i32 {
        kappa_of(self)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::TPlus => "Tp",
            Self::TZero => "T0",
            Self::TMinus => "Tm",
            Self::Singlet => "S",
        }
    }
}

/// Eigenvalue of the secular dipolar operator on each level, in units of Ω₀/2.
pub fn kappa_of(level: PairLevel) -> i32 {
    match level {
        PairLevel::TPlus | PairLevel::TMinus => 1,
        PairLevel::TZero => -2,
        PairLevel::Singlet => 0,
    }
}

/// One bath mode: wavenumber, frequency and coupling amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    /// 1/m
    pub k: f64,
    /// rad/s
    pub omega: f64,
    /// m
    pub g: Complex64,
}

/// Density (or deviation) matrix of a single pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedPairMatrix(pub Matrix4<Complex64>);

impl ReducedPairMatrix {
    pub fn zeros() -> Self {
        Self(Matrix4::zeros())
    }

    /// x component of the total spin, I_x1 + I_x2, in the pair basis.
    pub fn spin_x() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut m = Matrix4::zeros();
        m[(0, 1)] = h;
        m[(1, 0)] = h;
        m[(1, 2)] = h;
        m[(2, 1)] = h;
        Self(m)
    }

    pub fn get(&self, m: PairLevel, n: PairLevel) -> Complex64 {
        self.0[(m.index(), n.index())]
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Largest |ρ − ρ†| entry.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Applies `f(m, n, value)` to every element.
    pub fn map_elements(
        &self,
        mut f: impl FnMut(PairLevel, PairLevel, Complex64) -> Complex64,
    ) -> Self {
        let mut out = self.0;
        for m in PairLevel::ALL {
            for n in PairLevel::ALL {
                out[(m.index(), n.index())] = f(m, n, self.get(m, n));
            }
        }
        Self(out)
    }

    /// Tr[A B].
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        (self.0 * other.0).trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0 * Complex64::new(factor, 0.0))
    }
}
