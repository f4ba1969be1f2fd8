//! Sign and contraction conventions, collected in one place.
//!
//! * Christoffel symbols: `Γ^i_jk = ½ g^ih (∂_k g_hj + ∂_j g_hk - ∂_h g_jk)`.
//! * Riemann tensor: `R^i_jkl = ∂_k Γ^i_jl - ∂_l Γ^i_jk + Γ^i_km Γ^m_jl - Γ^i_lm Γ^m_jk`.
//! * Ricci tensor: `R_jl = R^i_jil`; scalar `R = g^jl R_jl`. With signature
//!   (+,-,-,-) this makes the Schwarzschild Ricci tensor vanish and gives the
//!   bundle Ricci tensor `-½ (E^i_i)_{·jl}` the Levi-Civita value at α = 0.
//! * Faraday tensor: `F_ij = ∂_i A_j - ∂_j A_i`, `F^i_j = g^ih F_hj`.
//! * Electromagnetic stress-energy (Landau sign):
//!   `T_ij = (1/4π)(-F_il F_j^l + ¼ g_ij F_lm F^lm)`.

use serde::{Deserialize, Serialize};

/// Overall sign applied to the electromagnetic stress-energy tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StressEnergySign {
    #[default]
    Landau,
    Flipped,
}

impl StressEnergySign {
    pub fn factor(self) -> f64 {
        match self {
            StressEnergySign::Landau => 1.0,
            StressEnergySign::Flipped => -1.0,
        }
    }
}

/// Horizontal derivative used in the divergence term of the Ricci scalar
/// decomposition `R = r + div + quad`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceFrame {
    /// `δ⁰_i = ∂_i - Γ^m_in y^n ∂/∂y^m` (the α = 0 connection).
    #[default]
    LeviCivita,
    /// `δ_i = ∂_i - N^m_i ∂/∂y^m` with the full α-dependent connection.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Conventions {
    pub stress_energy: StressEnergySign,
    pub divergence: DivergenceFrame,
}
