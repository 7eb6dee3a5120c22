//! CODATA 2018 values, SI units.

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Vacuum permeability, H/m.
pub const MU_0: f64 = 1.256_637_062_12e-6;
/// Proton gyromagnetic ratio, rad/(s T).
pub const GAMMA_P: f64 = 2.675_221_874_4e8;
/// Proton mass, kg.
pub const M_P: f64 = 1.672_621_923_69e-27;

/// The constants bundled as a value, for callers that want to pass them around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalConstants {
    pub hbar: f64,
    pub k_b: f64,
    pub mu_0: f64,
    pub gamma_p: f64,
    pub m_p: f64,
}

impl FundamentalConstants {
    pub const CODATA_2018: Self = Self {
        hbar: HBAR,
        k_b: K_B,
        mu_0: MU_0,
        gamma_p: GAMMA_P,
        m_p: M_P,
    };

    /// Inverse temperature in time units, ħ/(k_B T), seconds.
    pub fn beta(&self, temperature: f64) -> f64 {
        self.hbar / (self.k_b * temperature)
    }
}

impl Default for FundamentalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}
