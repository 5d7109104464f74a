//! Field kernels for a moving point charge and a moving flux tube, the
//! Lorentz-scalar cross density of two field configurations, and field boosts.
//!
//! Fields are quasi-static: a charge carries its instantaneous Coulomb field
//! and the magnetic field B = v×E/c; a fluxon carries its tube field B and the
//! motional electric field E = -V×B/c. Gaussian units throughout.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Radius (in units of the Gaussian width) beyond which the Gaussian tube's
/// field is treated as identically zero: exp(-12.5²/2) ≈ 1e-34.
pub const GAUSSIAN_SUPPORT_SIGMAS: f64 = 12.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargeState {
    pub position: Vec3,
    pub velocity: Vec3,
    /// statC
    pub charge: f64,
    /// g
    pub mass: f64,
}

impl ChargeState {
    pub fn new(position: Vec3, velocity: Vec3, charge: f64, mass: f64) -> Result<Self> {
        let s = ChargeState {
            position,
            velocity,
            charge,
            mass,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        check_planar("charge position", self.position)?;
        check_planar("charge velocity", self.velocity)?;
        if !self.charge.is_finite() {
            return Err(Error::InvalidInput("charge must be finite".into()));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::InvalidInput(format!("charge mass must be > 0, got {}", self.mass)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TubeProfile {
    /// Infinitely thin flux line. Its field vanishes everywhere off the axis.
    PointLimit,
    /// B_z = Φ/(πw²) inside radius w.
    UniformDisk,
    /// B_z = Φ/(2πs²)·exp(-ρ²/2s²).
    GaussianTube,
}

/// A straight flux tube along z, moving in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxonState {
    pub position: Vec3,
    pub velocity: Vec3,
    /// Mx (G cm²)
    pub flux: f64,
    /// g
    pub mass: f64,
    /// cm; the disk radius or the Gaussian width depending on `profile`.
    pub tube_radius: f64,
    pub profile: TubeProfile,
}

impl FluxonState {
    pub fn new(
        position: Vec3,
        velocity: Vec3,
        flux: f64,
        mass: f64,
        tube_radius: f64,
        profile: TubeProfile,
    ) -> Result<Self> {
        let s = FluxonState {
            position,
            velocity,
            flux,
            mass,
            tube_radius,
            profile,
        };
        s.validate()?;
        Ok(s)
    }

    /// Infinitely thin fluxon.
    pub fn point(position: Vec3, velocity: Vec3, flux: f64, mass: f64) -> Result<Self> {
        Self::new(position, velocity, flux, mass, 0.0, TubeProfile::PointLimit)
    }

    pub fn validate(&self) -> Result<()> {
        check_planar("fluxon position", self.position)?;
        check_planar("fluxon velocity", self.velocity)?;
        if !self.flux.is_finite() {
            return Err(Error::InvalidInput("flux must be finite".into()));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::InvalidInput(format!("fluxon mass must be > 0, got {}", self.mass)));
        }
        if !(self.tube_radius.is_finite() && self.tube_radius >= 0.0) {
            return Err(Error::InvalidInput("tube radius must be >= 0".into()));
        }
        if self.tube_radius == 0.0 && self.profile != TubeProfile::PointLimit {
            return Err(Error::InvalidInput(
                "a zero tube radius is only allowed with the point-limit profile".into(),
            ));
        }
        Ok(())
    }

    /// Axial field at planar distance `rho` from the tube axis.
    pub fn b_z(&self, rho: f64) -> f64 {
        let w = self.tube_radius;
        match self.profile {
            TubeProfile::PointLimit => 0.0,
            TubeProfile::UniformDisk => {
                if rho <= w {
                    self.flux / (PI * w * w)
                } else {
                    0.0
                }
            }
            TubeProfile::GaussianTube => {
                if rho > GAUSSIAN_SUPPORT_SIGMAS * w {
                    0.0
                } else {
                    self.flux / (2.0 * PI * w * w) * (-0.5 * rho * rho / (w * w)).exp()
                }
            }
        }
    }

    /// dB_z/dρ, zero where the profile is flat or unsupported.
    pub fn b_z_slope(&self, rho: f64) -> f64 {
        match self.profile {
            TubeProfile::GaussianTube => -rho / (self.tube_radius * self.tube_radius) * self.b_z(rho),
            _ => 0.0,
        }
    }

    /// Fraction of the total flux inside planar radius `rho`.
    pub fn enclosed_fraction(&self, rho: f64) -> f64 {
        let w = self.tube_radius;
        match self.profile {
            TubeProfile::PointLimit => {
                if rho > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            TubeProfile::UniformDisk => (rho * rho / (w * w)).min(1.0),
            TubeProfile::GaussianTube => -(-0.5 * rho * rho / (w * w)).exp_m1(),
        }
    }

    /// Radius outside which the tube field is zero (or numerically zero).
    pub fn support_radius(&self) -> f64 {
        match self.profile {
            TubeProfile::PointLimit => 0.0,
            TubeProfile::UniformDisk => self.tube_radius,
            TubeProfile::GaussianTube => GAUSSIAN_SUPPORT_SIGMAS * self.tube_radius,
        }
    }
}

fn check_planar(what: &str, v: Vec3) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::InvalidInput(format!("{what} must be finite")));
    }
    if v.z != 0.0 {
        return Err(Error::InvalidInput(format!("{what} must lie in the z = 0 plane")));
    }
    Ok(())
}

fn check_subluminal(what: &str, v: Vec3, consts: &PhysicalConstants) -> Result<()> {
    if v.norm() >= consts.c {
        return Err(Error::InvalidInput(format!("{what} speed must be below c")));
    }
    Ok(())
}

/// Electric and magnetic field at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    /// statV/cm
    pub e: Vec3,
    /// G
    pub b: Vec3,
}

impl FieldSample {
    pub fn new(e: Vec3, b: Vec3) -> Self {
        FieldSample { e, b }
    }

    /// Space inversion: E is polar, B is axial.
    pub fn parity(self) -> Self {
        FieldSample { e: -self.e, b: self.b }
    }
}

pub fn charge_fields(charge: &ChargeState, x: Vec3, consts: &PhysicalConstants) -> Result<FieldSample> {
    check_subluminal("charge", charge.velocity, consts)?;
    let d = x - charge.position;
    let r2 = d.norm_sqr();
    if !(r2 > 0.0) {
        return Err(Error::Singularity("charge field evaluated at the charge position".into()));
    }
    let e = d * (charge.charge / (r2 * r2.sqrt()));
    let b = charge.velocity.cross(e) * (1.0 / consts.c);
    Ok(FieldSample { e, b })
}

pub fn fluxon_fields(fluxon: &FluxonState, x: Vec3, consts: &PhysicalConstants) -> Result<FieldSample> {
    check_subluminal("fluxon", fluxon.velocity, consts)?;
    let rho = (x - fluxon.position).planar_norm();
    if fluxon.profile == TubeProfile::PointLimit && !(rho > 0.0) {
        return Err(Error::Singularity("point fluxon field evaluated on its axis".into()));
    }
    let b = Vec3::Z * fluxon.b_z(rho);
    let e = fluxon.velocity.cross(b) * (-1.0 / consts.c);
    Ok(FieldSample { e, b })
}

/// (B₁·B₂ − E₁·E₂)/4π, the cross term of the invariant F_μν F^μν / 8π.
pub fn scalar_density(f1: &FieldSample, f2: &FieldSample) -> f64 {
    (f1.b.dot(f2.b) - f1.e.dot(f2.e)) / (4.0 * PI)
}

/// Fields seen in a frame moving with velocity `beta`·c.
pub fn boost_fields(f: &FieldSample, beta: Vec3) -> Result<FieldSample> {
    let b2 = beta.norm_sqr();
    if !(b2 < 1.0) {
        return Err(Error::InvalidBoost(b2.sqrt()));
    }
    let gamma = 1.0 / (1.0 - b2).sqrt();
    // γ²/(γ+1) = (γ−1)/β², written to stay finite at β = 0
    let k = gamma * gamma / (gamma + 1.0);
    let e = (f.e + beta.cross(f.b)) * gamma - beta * (k * beta.dot(f.e));
    let b = (f.b - beta.cross(f.e)) * gamma - beta * (k * beta.dot(f.b));
    Ok(FieldSample { e, b })
}

/// Contravariant field tensor F^μν, metric (+,−,−,−): F^{0i} = −E_i,
/// F^{ij} = −ε_ijk B_k.
pub fn field_tensor(f: &FieldSample) -> [[f64; 4]; 4] {
    let (e, b) = (f.e, f.b);
    [
        [0.0, -e.x, -e.y, -e.z],
        [e.x, 0.0, -b.z, b.y],
        [e.y, b.z, 0.0, -b.x],
        [e.z, -b.y, b.x, 0.0],
    ]
}

/// F₁_μν F₂^μν with indices lowered by the Minkowski metric.
pub fn tensor_contraction(t1: &[[f64; 4]; 4], t2: &[[f64; 4]; 4]) -> f64 {
    let eta = [1.0, -1.0, -1.0, -1.0];
    let mut sum = 0.0;
    for mu in 0..4 {
        for nu in 0..4 {
            sum += eta[mu] * eta[nu] * t1[mu][nu] * t2[mu][nu];
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::CODATA;
    use crate::quadrature::GaussLegendre;
    use proptest::prelude::*;

    fn unit() -> PhysicalConstants {
        PhysicalConstants::unit()
    }

    fn static_charge(q: f64) -> ChargeState {
        ChargeState::new(Vec3::ZERO, Vec3::ZERO, q, 1.0).unwrap()
    }

    #[test]
    fn coulomb_field_static() {
        let f = charge_fields(&static_charge(1.0), Vec3::X, &CODATA).unwrap();
        assert_eq!(f.e, Vec3::X);
        assert_eq!(f.b, Vec3::ZERO);
    }

    #[test]
    fn moving_charge_magnetic_field() {
        let v = 1.0e8;
        let q = ChargeState::new(Vec3::ZERO, Vec3::planar(0.0, v), 1.0, 1.0).unwrap();
        let f = charge_fields(&q, Vec3::X, &CODATA).unwrap();
        assert!((f.b - Vec3::new(0.0, 0.0, -v / CODATA.c)).norm() < 1e-18);
    }

    #[test]
    fn charge_field_at_source_is_singular() {
        let r = charge_fields(&static_charge(1.0), Vec3::ZERO, &CODATA);
        assert!(matches!(r, Err(Error::Singularity(_))));
    }

    #[test]
    fn superluminal_charge_rejected() {
        let q = ChargeState::new(Vec3::ZERO, Vec3::planar(2.0, 0.0), 1.0, 1.0).unwrap();
        assert!(charge_fields(&q, Vec3::X, &unit()).is_err());
    }

    #[test]
    fn gauss_law_sphere() {
        // Surface quadrature of E·n over spheres, one enclosing the charge and
        // one not.
        let q = ChargeState::new(Vec3::planar(0.3, -0.2), Vec3::ZERO, 1.0, 1.0).unwrap();
        let gl = GaussLegendre::new(48);
        let sphere_flux = |center: Vec3, radius: f64| {
            let nphi = 96;
            let mut total = 0.0;
            for (ct, w) in gl.mapped(-1.0, 1.0) {
                let st = (1.0 - ct * ct).sqrt();
                for k in 0..nphi {
                    let phi = 2.0 * PI * k as f64 / nphi as f64;
                    let n = Vec3::new(st * phi.cos(), st * phi.sin(), ct);
                    let x = center + n * radius;
                    let e = charge_fields(&q, x, &CODATA).unwrap().e;
                    total += w * (2.0 * PI / nphi as f64) * radius * radius * e.dot(n);
                }
            }
            total
        };
        let inside = sphere_flux(Vec3::ZERO, 2.0);
        assert!((inside - 4.0 * PI).abs() < 1e-6, "{inside}");
        let outside = sphere_flux(Vec3::planar(5.0, 0.0), 2.0);
        assert!(outside.abs() < 1e-6, "{outside}");
    }

    #[test]
    fn point_fluxon_has_no_off_axis_field() {
        let f = FluxonState::point(Vec3::ZERO, Vec3::planar(1e5, 0.0), 3.0, 1.0).unwrap();
        let s = fluxon_fields(&f, Vec3::new(0.1, 0.2, 0.3), &CODATA).unwrap();
        assert_eq!(s, FieldSample::default());
        assert!(fluxon_fields(&f, Vec3::new(0.0, 0.0, 1.0), &CODATA).is_err());
    }

    #[test]
    fn uniform_disk_field() {
        let f = FluxonState::new(Vec3::ZERO, Vec3::ZERO, PI, 1.0, 1.0, TubeProfile::UniformDisk).unwrap();
        let s = fluxon_fields(&f, Vec3::planar(0.5, 0.0), &CODATA).unwrap();
        assert!((s.b.z - 1.0).abs() < 1e-15);
        assert_eq!(fluxon_fields(&f, Vec3::planar(1.5, 0.0), &CODATA).unwrap().b, Vec3::ZERO);
    }

    #[test]
    fn moving_tube_motional_electric_field() {
        let v = Vec3::planar(2.0e9, 0.0);
        let f = FluxonState::new(Vec3::ZERO, v, PI, 1.0, 1.0, TubeProfile::UniformDisk).unwrap();
        let s = fluxon_fields(&f, Vec3::planar(0.0, 0.5), &CODATA).unwrap();
        // E = -(v x̂ × ẑ)/c = +v/c ŷ
        assert!((s.e.y - 2.0e9 / CODATA.c).abs() < 1e-15);
        assert_eq!(s.e.x, 0.0);
    }

    fn plane_flux(f: &FluxonState) -> f64 {
        let gl = GaussLegendre::new(32);
        let rmax = f.support_radius();
        let panels = 16;
        let nphi = 64;
        let mut total = 0.0;
        for k in 0..nphi {
            let phi = 2.0 * PI * k as f64 / nphi as f64;
            let radial: f64 = gl.composite(0.0, rmax, panels, |r| {
                let x = f.position + Vec3::planar(r * phi.cos(), r * phi.sin());
                r * fluxon_fields(f, x, &CODATA).unwrap().b.z
            });
            total += radial * 2.0 * PI / nphi as f64;
        }
        total
    }

    #[test]
    fn tube_flux_normalization() {
        for profile in [TubeProfile::UniformDisk, TubeProfile::GaussianTube] {
            let f = FluxonState::new(Vec3::planar(0.2, 0.1), Vec3::ZERO, 2.5, 1.0, 0.3, profile).unwrap();
            let total = plane_flux(&f);
            assert!((total / 2.5 - 1.0).abs() < 1e-6, "{profile:?}: {total}");
        }
    }

    #[test]
    fn enclosed_fraction_limits() {
        let g = FluxonState::new(Vec3::ZERO, Vec3::ZERO, 1.0, 1.0, 0.1, TubeProfile::GaussianTube).unwrap();
        assert_eq!(g.enclosed_fraction(0.0), 0.0);
        assert!(g.enclosed_fraction(1.0) >= 1.0 - 1e-20);
        let d = FluxonState::new(Vec3::ZERO, Vec3::ZERO, 1.0, 1.0, 0.1, TubeProfile::UniformDisk).unwrap();
        assert!((d.enclosed_fraction(0.05) - 0.25).abs() < 1e-15);
        assert_eq!(d.enclosed_fraction(0.2), 1.0);
    }

    #[test]
    fn zero_width_requires_point_profile() {
        assert!(FluxonState::new(Vec3::ZERO, Vec3::ZERO, 1.0, 1.0, 0.0, TubeProfile::GaussianTube).is_err());
        assert!(FluxonState::new(Vec3::new(0.0, 0.0, 1.0), Vec3::ZERO, 1.0, 1.0, 0.0, TubeProfile::PointLimit).is_err());
    }

    #[test]
    fn scalar_density_examples() {
        let pure_e = FieldSample::new(Vec3::X, Vec3::ZERO);
        let pure_b = FieldSample::new(Vec3::ZERO, Vec3::Z);
        assert_eq!(scalar_density(&pure_e, &pure_b), 0.0);
        let b2 = FieldSample::new(Vec3::ZERO, Vec3::new(0.0, 0.0, 2.0));
        assert!((scalar_density(&b2, &b2) - 1.0 / PI).abs() < 1e-15);

        let q = static_charge(1.0);
        let tube = FluxonState::new(Vec3::ZERO, Vec3::ZERO, 1.0, 1.0, 0.5, TubeProfile::GaussianTube).unwrap();
        let x = Vec3::new(0.1, 0.2, 0.3);
        let fq = charge_fields(&q, x, &CODATA).unwrap();
        let ff = fluxon_fields(&tube, x, &CODATA).unwrap();
        assert_eq!(scalar_density(&fq, &ff), 0.0);
    }

    #[test]
    fn boost_examples() {
        let f = FieldSample::new(Vec3::new(0.3, -1.0, 2.0), Vec3::new(0.5, 0.1, -0.7));
        assert_eq!(boost_fields(&f, Vec3::ZERO).unwrap(), f);

        let b = 0.6;
        let g = 1.0 / (1.0_f64 - b * b).sqrt();
        let out = boost_fields(&FieldSample::new(Vec3::Y, Vec3::ZERO), Vec3::X * b).unwrap();
        assert!((out.e - Vec3::Y * g).norm() < 1e-15);
        assert!((out.b - Vec3::Z * (-g * b)).norm() < 1e-15);

        assert!(matches!(boost_fields(&f, Vec3::X), Err(Error::InvalidBoost(_))));
    }

    #[test]
    fn inverse_boost_round_trip() {
        let f = FieldSample::new(Vec3::new(0.3, -1.0, 2.0), Vec3::new(0.5, 0.1, -0.7));
        let beta = Vec3::new(0.3, -0.4, 0.5);
        let back = boost_fields(&boost_fields(&f, beta).unwrap(), -beta).unwrap();
        assert!((back.e - f.e).norm() < 1e-13 && (back.b - f.b).norm() < 1e-13);
    }

    #[test]
    fn parity_of_charge_fields() {
        let q = ChargeState::new(Vec3::planar(0.4, 0.1), Vec3::planar(1e9, -2e9), 1.0, 1.0).unwrap();
        let qi = ChargeState::new(-q.position, -q.velocity, 1.0, 1.0).unwrap();
        let tube = FluxonState::new(Vec3::planar(-0.2, 0.3), Vec3::planar(3e8, 1e9), 1.0, 1.0, 0.5, TubeProfile::GaussianTube).unwrap();
        let ti = FluxonState { position: -tube.position, velocity: -tube.velocity, ..tube };
        let x = Vec3::new(0.1, -0.3, 0.2);
        let f = charge_fields(&q, x, &CODATA).unwrap();
        let fi = charge_fields(&qi, -x, &CODATA).unwrap();
        assert!((fi.e + f.e).norm() < 1e-12 * f.e.norm());
        assert!((fi.b - f.b).norm() < 1e-12 * f.b.norm());
        let g = fluxon_fields(&tube, x, &CODATA).unwrap();
        let gi = fluxon_fields(&ti, -x, &CODATA).unwrap();
        assert!((gi.e + g.e).norm() <= 1e-12 * g.e.norm());
        assert_eq!(gi.b, g.b);
        let d = scalar_density(&f, &g);
        assert!((scalar_density(&fi, &gi) - d).abs() <= 1e-12 * d.abs());
    }

    fn field_strategy() -> impl Strategy<Value = FieldSample> {
        prop::array::uniform6(-10.0f64..10.0).prop_map(|a| {
            FieldSample::new(Vec3::new(a[0], a[1], a[2]), Vec3::new(a[3], a[4], a[5]))
        })
    }

    proptest! {
        #[test]
        fn tensor_contraction_matches_density(f1 in field_strategy(), f2 in field_strategy()) {
            let t = tensor_contraction(&field_tensor(&f1), &field_tensor(&f2)) / (8.0 * PI);
            let d = scalar_density(&f1, &f2);
            let scale = (f1.e.norm() * f2.e.norm() + f1.b.norm() * f2.b.norm()) / (4.0 * PI);
            prop_assert!((t - d).abs() <= 4.0 * f64::EPSILON * scale.max(1e-300));
        }

        #[test]
        fn tensor_is_antisymmetric(f in field_strategy()) {
            let t = field_tensor(&f);
            for mu in 0..4 {
                for nu in 0..4 {
                    prop_assert_eq!(t[mu][nu], -t[nu][mu]);
                }
            }
        }
    }
}
