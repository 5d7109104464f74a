//! Ideal Faraday cage around a flux tube, and the adiabaticity calculator for
//! real superconducting shields.
//!
//! Cage quantities are Gaussian. [`ShieldDesign`] and everything downstream of
//! it is SI (metres, seconds, eV for the gap).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::interaction::vector_potential_symmetric;
use crate::quadrature::{periodic_trapezoid, periodic_trapezoid_adaptive};
use crate::vec3::Vec3;

pub const CAGE_REL_TOL: f64 = 1e-13;
pub const CAGE_START_NODES: usize = 16;
pub const CAGE_MAX_DOUBLINGS: u32 = 24;

/// An electron on a circular orbit of radius `a` about a superconducting
/// cylinder of radius `r_cage` that confines flux `flux`. The electron is
/// taken at azimuth 0; every quantity here is rotation invariant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CageScenario {
    pub e: f64,
    pub a: f64,
    pub r_cage: f64,
    pub omega: f64,
    pub flux: f64,
    pub n_pairs: u64,
}

impl CageScenario {
    pub fn new(e: f64, a: f64, r_cage: f64, omega: f64, flux: f64, n_pairs: u64) -> Result<Self> {
        let s = CageScenario { e, a, r_cage, omega, flux, n_pairs };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.e, self.a, self.r_cage, self.omega, self.flux].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("cage parameters must be finite".into()));
        }
        if !(self.r_cage > 0.0 && self.a > self.r_cage) {
            return Err(Error::InvalidInput(format!(
                "need a > R_cage > 0, got a = {}, R_cage = {}",
                self.a, self.r_cage
            )));
        }
        Ok(())
    }
}

/// Induced surface charge on the cage, δσ(φ) = −(e/2πR)(a²−R²)/(a²+R²−2aR cos φ).
pub fn induced_surface_density(s: &CageScenario, phi: f64) -> f64 {
    let (a, r) = (s.a, s.r_cage);
    -(s.e / (2.0 * PI * r)) * (a - r) * (a + r) / (a * a + r * r - 2.0 * a * r * phi.cos())
}

/// Azimuthal image current density Rω·δσ(φ).
pub fn image_current(s: &CageScenario, phi: f64) -> f64 {
    s.r_cage * s.omega * induced_surface_density(s, phi)
}

/// σ₀ = (2n+1)e/(2πR), the uniform background carried by the Cooper pairs.
pub fn uniform_surface_density(s: &CageScenario) -> f64 {
    (2 * s.n_pairs + 1) as f64 * s.e / (2.0 * PI * s.r_cage)
}

pub fn quantized_surface_charge(s: &CageScenario, phi: f64) -> f64 {
    uniform_surface_density(s) + induced_surface_density(s, phi)
}

fn cage_integral<F: FnMut(f64) -> f64>(f: F, scale: f64) -> Result<f64> {
    periodic_trapezoid_adaptive(f, CAGE_START_NODES, CAGE_REL_TOL, scale, CAGE_MAX_DOUBLINGS).map(|(v, _)| v)
}

/// ∮δσ R dφ.
pub fn total_induced_charge(s: &CageScenario) -> Result<f64> {
    cage_integral(|phi| induced_surface_density(s, phi) * s.r_cage, s.e.abs())
}

/// ∮σ R dφ.
pub fn total_surface_charge(s: &CageScenario) -> Result<f64> {
    cage_integral(|phi| quantized_surface_charge(s, phi) * s.r_cage, s.e.abs())
}

/// Azimuthally averaged charge transport of the image current, (1/2π)∮j_c dφ.
pub fn image_current_transport(s: &CageScenario) -> Result<f64> {
    let scale = (s.e * s.omega).abs();
    Ok(cage_integral(|phi| image_current(s, phi), scale)? / (2.0 * PI))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CageTerms {
    /// (e/c) ṙ·A for the orbiting electron, erg.
    pub l_e_phi: f64,
    /// (1/c) ∮ j_c·A R dφ for the image current, erg.
    pub l_s_phi: f64,
    pub residual: f64,
    pub nodes: usize,
}

fn image_integrand(s: &CageScenario, phi: f64) -> f64 {
    let (sin, cos) = phi.sin_cos();
    let x = Vec3::planar(s.r_cage * cos, s.r_cage * sin);
    let phi_hat = Vec3::planar(-sin, cos);
    // the cage surface is never on the flux line
    let a_vec = vector_potential_symmetric(s.flux, Vec3::ZERO, x).unwrap_or(Vec3::ZERO);
    image_current(s, phi) * phi_hat.dot(a_vec) * s.r_cage
}

/// L_eΦ in closed form and L_sΦ by adaptive periodic quadrature.
pub fn cage_interaction_terms(s: &CageScenario, consts: &PhysicalConstants) -> Result<CageTerms> {
    s.validate()?;
    let l_e_phi = electron_term(s, consts);
    let mut nodes = 0;
    let l_s_phi = {
        let (v, n) = periodic_trapezoid_adaptive(
            |phi| image_integrand(s, phi),
            CAGE_START_NODES,
            CAGE_REL_TOL,
            consts.c * l_e_phi.abs(),
            CAGE_MAX_DOUBLINGS,
        )?;
        nodes = nodes.max(n);
        v / consts.c
    };
    Ok(CageTerms { l_e_phi, l_s_phi, residual: l_e_phi + l_s_phi, nodes })
}

/// Same as [`cage_interaction_terms`] with a fixed node count, for refinement studies.
pub fn cage_interaction_terms_fixed(s: &CageScenario, nodes: usize, consts: &PhysicalConstants) -> Result<CageTerms> {
    s.validate()?;
    if nodes == 0 {
        return Err(Error::InvalidInput("node count must be positive".into()));
    }
    let l_e_phi = electron_term(s, consts);
    let l_s_phi = periodic_trapezoid(nodes, 0.0, |phi| image_integrand(s, phi)) / consts.c;
    Ok(CageTerms { l_e_phi, l_s_phi, residual: l_e_phi + l_s_phi, nodes })
}

fn electron_term(s: &CageScenario, consts: &PhysicalConstants) -> f64 {
    s.e * s.omega * s.flux / (2.0 * PI * consts.c)
}

/// Either the de Broglie wavelength or the speed of the beam electrons.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BeamKinematics {
    Wavelength(f64),
    Velocity(f64),
}

/// Superconducting shield parameters, SI.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShieldDesignDoc", into = "ShieldDesignDoc")]
pub struct ShieldDesign {
    pub d_m: f64,
    pub gap_ev: f64,
    pub beam: BeamKinematics,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShieldDesignDoc {
    d_m: f64,
    #[serde(rename = "gap_eV")]
    gap_ev: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v_e_m_per_s: Option<f64>,
}

impl TryFrom<ShieldDesignDoc> for ShieldDesign {
    type Error = Error;

    fn try_from(doc: ShieldDesignDoc) -> Result<Self> {
        let beam = match (doc.lambda_m, doc.v_e_m_per_s) {
            (Some(l), None) => BeamKinematics::Wavelength(l),
            (None, Some(v)) => BeamKinematics::Velocity(v),
            _ => {
                return Err(Error::InvalidInput(
                    "exactly one of `lambda_m` and `v_e_m_per_s` must be given".into(),
                ))
            }
        };
        ShieldDesign::new(doc.d_m, doc.gap_ev, beam)
    }
}

impl From<ShieldDesign> for ShieldDesignDoc {
    fn from(d: ShieldDesign) -> Self {
        let (lambda_m, v_e_m_per_s) = match d.beam {
            BeamKinematics::Wavelength(l) => (Some(l), None),
            BeamKinematics::Velocity(v) => (None, Some(v)),
        };
        ShieldDesignDoc { d_m: d.d_m, gap_ev: d.gap_ev, lambda_m, v_e_m_per_s }
    }
}

impl ShieldDesign {
    pub fn new(d_m: f64, gap_ev: f64, beam: BeamKinematics) -> Result<Self> {
        if !(d_m > 0.0 && d_m.is_finite()) {
            return Err(Error::InvalidInput(format!("d_m must be positive, got {d_m}")));
        }
        if !(gap_ev > 0.0 && gap_ev.is_finite()) {
            return Err(Error::InvalidInput(format!("gap_eV must be positive, got {gap_ev}")));
        }
        match beam {
            BeamKinematics::Wavelength(l) if !(l > 0.0 && l.is_finite()) => {
                return Err(Error::InvalidInput(format!("lambda_m must be positive, got {l}")))
            }
            BeamKinematics::Velocity(v) if !(v > 0.0 && v.is_finite()) => {
                return Err(Error::InvalidInput(format!("v_e_m_per_s must be positive, got {v}")))
            }
            _ => {}
        }
        Ok(ShieldDesign { d_m, gap_ev, beam })
    }

    /// (v, γ, kinetic energy in eV) of the beam.
    pub fn kinematics(&self, consts: &PhysicalConstants) -> Result<ElectronKinematics> {
        match self.beam {
            BeamKinematics::Wavelength(l) => electron_kinematics(l, consts),
            BeamKinematics::Velocity(v) => electron_from_velocity(v, consts),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectronKinematics {
    pub v_m_per_s: f64,
    pub gamma: f64,
    #[serde(rename = "kinetic_energy_eV")]
    pub kinetic_energy_ev: f64,
}

impl ElectronKinematics {
    pub fn gamma_v(&self) -> f64 {
        self.gamma * self.v_m_per_s
    }
}

/// Inverts λ = h/(γmv).
pub fn electron_kinematics(wavelength_m: f64, consts: &PhysicalConstants) -> Result<ElectronKinematics> {
    if !(wavelength_m > 0.0) {
        return Err(Error::InvalidInput(format!("wavelength must be positive, got {wavelength_m}")));
    }
    let (c, m) = (consts.c_si(), consts.m_electron_si());
    // x = γβ = p/(mc)
    let x = consts.h_si() / (wavelength_m * m * c);
    let root = x.hypot(1.0);
    let gamma = root;
    let v = c * x / root;
    let gamma_minus_one = x * x / (root + 1.0);
    Ok(ElectronKinematics {
        v_m_per_s: v,
        gamma,
        kinetic_energy_ev: gamma_minus_one * m * c * c / consts.joule_per_ev(),
    })
}

pub fn electron_from_velocity(v_m_per_s: f64, consts: &PhysicalConstants) -> Result<ElectronKinematics> {
    let c = consts.c_si();
    let beta = v_m_per_s / c;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidInput(format!("electron speed must lie in (0, c), got {v_m_per_s} m/s")));
    }
    let one_minus_b2 = (1.0 - beta) * (1.0 + beta);
    let gamma = 1.0 / one_minus_b2.sqrt();
    let gamma_minus_one = beta * beta * gamma / (1.0 + 1.0 / gamma);
    Ok(ElectronKinematics {
        v_m_per_s,
        gamma,
        kinetic_energy_ev: gamma_minus_one * consts.m_electron_si() * c * c / consts.joule_per_ev(),
    })
}

/// dΔ/h, the bound on γv for ideal shielding, in m/s.
pub fn adiabatic_threshold(d_m: f64, gap_ev: f64, consts: &PhysicalConstants) -> Result<f64> {
    if !(d_m > 0.0 && gap_ev > 0.0) {
        return Err(Error::InvalidInput("d and gap must be positive".into()));
    }
    Ok(d_m * gap_ev * consts.joule_per_ev() / consts.h_si())
}

/// Δt = d/(γv) in seconds.
pub fn transient_time(design: &ShieldDesign, consts: &PhysicalConstants) -> Result<f64> {
    Ok(design.d_m / design.kinematics(consts)?.gamma_v())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shielding {
    Shielded,
    Leaky,
}

/// Shielded only for γv strictly below the threshold. Margin is threshold/γv.
pub fn classify(gamma_v: f64, threshold: f64) -> (Shielding, f64) {
    let class = if gamma_v < threshold { Shielding::Shielded } else { Shielding::Leaky };
    (class, threshold / gamma_v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShieldReport {
    pub delta_t_s: f64,
    pub threshold_m_per_s: f64,
    pub gamma_v: f64,
    pub classification: Shielding,
    pub margin: f64,
}

pub fn classify_shielding(design: &ShieldDesign, consts: &PhysicalConstants) -> Result<ShieldReport> {
    let kin = design.kinematics(consts)?;
    let threshold = adiabatic_threshold(design.d_m, design.gap_ev, consts)?;
    let gamma_v = kin.gamma_v();
    let (classification, margin) = classify(gamma_v, threshold);
    Ok(ShieldReport {
        delta_t_s: design.d_m / gamma_v,
        threshold_m_per_s: threshold,
        gamma_v,
        classification,
        margin,
    })
}
