//! The pinned constants table.
//!
//! Everything in the library is Gaussian-CGS. The SI accessors exist for the
//! shield-design calculator and are derived from the same table through exact
//! unit conversions, so there is a single source of numerical truth.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// SI defining values (CODATA 2018, exact).
const C_SI: f64 = 299_792_458.0;
const H_SI: f64 = 6.626_070_15e-34;
const E_SI: f64 = 1.602_176_634e-19;
const M_E_SI: f64 = 9.109_383_701_5e-31;

pub const CM_PER_M: f64 = 100.0;
pub const ERG_PER_JOULE: f64 = 1.0e7;
pub const G_PER_KG: f64 = 1.0e3;
/// 1 C = 10 c statC, with c in m/s scaled to cm/s.
const STATC_PER_COULOMB: f64 = C_SI * 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhysicalConstants {
    /// Speed of light (cm/s).
    pub c: f64,
    /// Reduced Planck constant (erg s).
    pub hbar: f64,
    /// Planck constant (erg s).
    pub h: f64,
    /// Elementary charge (statC).
    pub e_charge: f64,
    /// Electron mass (g).
    pub m_electron: f64,
    pub erg_per_ev: f64,
    /// Superconducting flux quantum hc/2e (Mx = G cm^2).
    pub flux_quantum: f64,
}

/// CODATA 2018 values in Gaussian units.
pub const CODATA: PhysicalConstants = PhysicalConstants::derive(
    C_SI * CM_PER_M,
    H_SI * ERG_PER_JOULE,
    E_SI * STATC_PER_COULOMB,
    M_E_SI * G_PER_KG,
    E_SI * ERG_PER_JOULE,
);

impl PhysicalConstants {
    const fn derive(c: f64, h: f64, e_charge: f64, m_electron: f64, erg_per_ev: f64) -> Self {
        PhysicalConstants {
            c,
            hbar: h / (2.0 * PI),
            h,
            e_charge,
            m_electron,
            erg_per_ev,
            flux_quantum: h * c / (2.0 * e_charge),
        }
    }

    /// A constants table with arbitrary positive values, for scaled ("test
    /// unit") computations. hbar and the flux quantum are derived.
    pub fn custom(c: f64, h: f64, e_charge: f64, m_electron: f64, erg_per_ev: f64) -> Result<Self> {
        let all = [c, h, e_charge, m_electron, erg_per_ev];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInput(
                "physical constants must be finite and strictly positive".into(),
            ));
        }
        Ok(Self::derive(c, h, e_charge, m_electron, erg_per_ev))
    }

    /// c = hbar = e = m = 1.
    pub fn unit() -> Self {
        Self::derive(1.0, 2.0 * PI, 1.0, 1.0, 1.0)
    }

    pub fn c_si(&self) -> f64 {
        self.c / CM_PER_M
    }

    pub fn h_si(&self) -> f64 {
        self.h / ERG_PER_JOULE
    }

    pub fn m_electron_si(&self) -> f64 {
        self.m_electron / G_PER_KG
    }

    pub fn joule_per_ev(&self) -> f64 {
        self.erg_per_ev / ERG_PER_JOULE
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        CODATA
    }
}
