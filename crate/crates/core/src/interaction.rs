//! The charge–fluxon interaction Lagrangian and the field momentum Π.
//!
//! Π is available three ways: the closed form eΦ/(2πcρ)·φ̂, a direct 3D
//! quadrature of (1/4πc)∫E^(e)×B^(Φ) over a finite tube, and a weighted sum
//! over a sampled flux cross-section. The Lagrangian is (ṙ − Ṙ)·Π in closed
//! form, or the overlap integral ∫(B^(e)·B^(Φ) − E^(e)·E^(Φ))/4π evaluated
//! with the same quadrature grid as the numeric Π.
//!
//! Orientation: φ̂ = ẑ × (r − R)/|r − R|, i.e. counterclockwise seen from +z,
//! with positive flux pointing along +z. With this choice the numeric overlap
//! and the closed form agree in sign.

use std::f64::consts::PI;
use std::io::Read;
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::em_kernel::{charge_fields, fluxon_fields, scalar_density, ChargeState, FluxonState, TubeProfile};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, geometric_breaks, GaussLegendre};
use crate::vec3::Vec3;

/// Largest estimated relative truncation error a numeric overlap will accept.
pub const MAX_TRUNCATION_ERROR: f64 = 1e-2;

/// Relative floor added to reported tolerances for the quadrature itself.
const QUADRATURE_FLOOR: f64 = 1e-9;

/// Upper bound on angular nodes around the tube.
const MAX_ANGULAR_NODES: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    GaussLegendre,
    /// Adaptive Simpson along the axial direction; the transverse grid stays
    /// Gauss-Legendre × periodic trapezoid.
    AdaptiveSimpson,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// cm; columns closer than this to the charge are dropped.
    pub inner_cutoff: f64,
    /// cm; transverse truncation of the tube integration.
    pub outer_radius: f64,
    /// cm; the axial integral runs over [-z_extent, z_extent].
    pub z_extent: f64,
    pub points_per_dim: usize,
    pub rule: QuadratureRule,
}

impl QuadratureSpec {
    /// cutoff = tube_radius/100, outer radius and axial extent 100× the
    /// charge–fluxon distance, 16 Gauss points per panel.
    pub fn for_configuration(charge: &ChargeState, fluxon: &FluxonState) -> Self {
        let rho = (charge.position - fluxon.position).planar_norm();
        QuadratureSpec {
            inner_cutoff: fluxon.tube_radius / 100.0,
            outer_radius: 100.0 * rho,
            z_extent: 100.0 * rho,
            points_per_dim: 16,
            rule: QuadratureRule::GaussLegendre,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.inner_cutoff >= 0.0
            && self.inner_cutoff < self.outer_radius
            && self.outer_radius.is_finite()
            && self.z_extent > 0.0
            && self.z_extent.is_finite()
            && self.points_per_dim >= 8;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "quadrature spec needs 0 <= inner_cutoff < outer_radius, z_extent > 0, points_per_dim >= 8; got {self:?}"
            )))
        }
    }
}

/// Π = eΦ/(2πc|r − R|)·φ̂.
pub fn field_momentum_closed(e: f64, flux: f64, r: Vec3, big_r: Vec3, consts: &PhysicalConstants) -> Result<Vec3> {
    let d = r - big_r;
    let rho2 = d.x * d.x + d.y * d.y;
    if !(rho2 > 0.0) {
        return Err(Error::Singularity("field momentum evaluated on the flux line".into()));
    }
    let k = e * flux / (2.0 * PI * consts.c);
    Ok(Vec3::planar(-d.y, d.x) * (k / rho2))
}

/// Closed-form Π for a radially symmetric tube: only the flux enclosed within
/// the charge's radius contributes. Identical to [`field_momentum_closed`] for
/// the point limit and for a charge outside the tube.
pub fn field_momentum_tube(e: f64, fluxon: &FluxonState, r: Vec3, consts: &PhysicalConstants) -> Result<Vec3> {
    let rho = (r - fluxon.position).planar_norm();
    let flux = fluxon.flux * fluxon.enclosed_fraction(rho);
    field_momentum_closed(e, flux, r, fluxon.position, consts)
}

/// Symmetric-gauge potential of a flux line, A = Φ/(2π|x − R|)·φ̂.
pub fn vector_potential_symmetric(flux: f64, big_r: Vec3, x: Vec3) -> Result<Vec3> {
    let d = x - big_r;
    let rho2 = d.x * d.x + d.y * d.y;
    if !(rho2 > 0.0) {
        return Err(Error::Singularity("vector potential evaluated on the flux line".into()));
    }
    Ok(Vec3::planar(-d.y, d.x) * (flux / (2.0 * PI * rho2)))
}

/// A numerically integrated quantity with its error budget. The error terms
/// are relative to the magnitude of the closed-form answer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OverlapEstimate<T> {
    pub value: T,
    /// From cutting the axial integral at ±z_extent and the tube at outer_radius.
    pub truncation_error: f64,
    /// From the exclusion disk around the charge.
    pub cutoff_error: f64,
    pub evaluations: usize,
    pub excluded_columns: usize,
}

impl<T> OverlapEstimate<T> {
    pub fn relative_tolerance(&self) -> f64 {
        self.truncation_error + self.cutoff_error + QUADRATURE_FLOOR
    }
}

trait Magnitude {
    fn magnitude(&self) -> f64;
}

impl Magnitude for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Magnitude for Vec3 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Integrates `integrand` over the tube's support, extended along z.
///
/// Transverse nodes are polar about the tube axis (Gauss-Legendre panels of
/// one tube radius in ρ', periodic trapezoid in angle with the grid symmetric
/// about the charge direction); each transverse node carries an axial line
/// integral on geometrically growing panels.
fn tube_overlap<T, F>(
    charge: &ChargeState,
    fluxon: &FluxonState,
    quad: &QuadratureSpec,
    integrand: F,
) -> Result<OverlapEstimate<T>>
where
    T: Copy + Default + Send + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> + Magnitude,
    F: Fn(Vec3) -> Result<T> + Sync,
{
    quad.validate()?;
    if fluxon.profile == TubeProfile::PointLimit {
        return Err(Error::InvalidInput(
            "numeric overlap needs a finite tube profile; the point limit has no off-axis field".into(),
        ));
    }
    let offset = charge.position - fluxon.position;
    let rho = offset.planar_norm();
    let w = fluxon.tube_radius;
    if !(rho > w / 10.0) {
        return Err(Error::Singularity(format!(
            "charge is {rho:e} cm from the tube axis; must exceed tube_radius/10"
        )));
    }

    let r_max = quad.outer_radius.min(fluxon.support_radius());
    let second_moment = match fluxon.profile {
        TubeProfile::GaussianTube => 2.0 * w * w,
        TubeProfile::UniformDisk => 0.5 * w * w,
        TubeProfile::PointLimit => 0.0,
    };
    let z = quad.z_extent;
    let q2 = rho * rho + second_moment;
    let axial_truncation = 1.0 - z / (q2 + z * z).sqrt();
    let radial_truncation = 1.0 - fluxon.enclosed_fraction(r_max);
    let truncation_error = axial_truncation + radial_truncation;
    if truncation_error > MAX_TRUNCATION_ERROR {
        return Err(Error::NonConvergent {
            estimate: truncation_error,
            detail: format!(
                "z_extent = {z:e} cm and outer_radius = {:e} cm are too tight for a charge at {rho:e} cm",
                quad.outer_radius
            ),
        });
    }
    let delta = quad.inner_cutoff;
    let cutoff_error = if fluxon.flux != 0.0 && rho - delta < r_max {
        PI * delta * delta * fluxon.b_z_slope(rho).abs().max(fluxon.b_z(rho).abs() / w) * rho / fluxon.flux.abs()
    } else {
        0.0
    };

    // radial panel breaks, with one at the charge radius if it lies inside
    let mut breaks: Vec<f64> = {
        let n = ((r_max / w).ceil() as usize).max(4);
        (0..=n).map(|k| r_max * k as f64 / n as f64).collect()
    };
    if rho < r_max {
        breaks.push(rho);
        breaks.sort_by(|a, b| a.total_cmp(b));
        breaks.dedup();
    }
    let gl = GaussLegendre::new(quad.points_per_dim);
    let radial_nodes: Vec<(f64, f64)> = breaks
        .windows(2)
        .flat_map(|p| gl.mapped(p[0], p[1]).collect::<Vec<_>>())
        .collect();

    let n_theta = {
        let ratio = r_max / rho;
        let base = 4 * quad.points_per_dim;
        let needed = if ratio < 1.0 {
            (-37.0 / ratio.ln()).ceil() as usize
        } else {
            MAX_ANGULAR_NODES
        };
        needed.clamp(base, MAX_ANGULAR_NODES)
    };
    let theta0 = offset.y.atan2(offset.x);
    let dtheta = 2.0 * PI / n_theta as f64;

    let axial_gl = GaussLegendre::new(quad.points_per_dim);
    let coarse_gl = GaussLegendre::new(4);

    let column = |xp: Vec3, q: f64| -> Result<(T, usize)> {
        let zb = geometric_breaks(0.5 * q, z);
        let pair = |s: f64| -> Result<T> {
            Ok(integrand(xp + Vec3::Z * s)? + integrand(xp - Vec3::Z * s)?)
        };
        match quad.rule {
            QuadratureRule::GaussLegendre => {
                let mut acc = T::default();
                let mut n = 0;
                for p in zb.windows(2) {
                    for (s, ws) in axial_gl.mapped(p[0], p[1]) {
                        acc = acc + pair(s)? * ws;
                        n += 2;
                    }
                }
                Ok((acc, n))
            }
            QuadratureRule::AdaptiveSimpson => {
                let mut coarse = T::default();
                for p in zb.windows(2) {
                    for (s, ws) in coarse_gl.mapped(p[0], p[1]) {
                        coarse = coarse + pair(s)? * ws;
                    }
                }
                let tol = 1e-10 * coarse.magnitude() / (zb.len() - 1) as f64;
                let mut acc = T::default();
                let mut n = 0usize;
                let mut failure = None;
                for p in zb.windows(2) {
                    let mut f = |s: f64| {
                        n += 2;
                        match pair(s) {
                            Ok(v) => v,
                            Err(e) => {
                                failure.get_or_insert(e);
                                T::default()
                            }
                        }
                    };
                    acc = acc + adaptive_simpson(&mut f, p[0], p[1], tol.max(1e-300), 40, &|d: T| d.magnitude())?;
                }
                match failure {
                    Some(e) => Err(e),
                    None => Ok((acc, n)),
                }
            }
        }
    };

    let rings: Vec<Result<(T, usize, usize)>> = radial_nodes
        .par_iter()
        .map(|&(rp, wr)| {
            let mut ring = T::default();
            let mut evals = 0;
            let mut excluded = 0;
            for k in 0..n_theta {
                let th = theta0 + dtheta * k as f64;
                let xp = fluxon.position + Vec3::planar(rp * th.cos(), rp * th.sin());
                let q = (xp - charge.position).planar_norm();
                if q < delta || q == 0.0 {
                    excluded += 1;
                    continue;
                }
                let (col, n) = column(xp, q)?;
                ring = ring + col;
                evals += n;
            }
            Ok((ring * (wr * rp * dtheta), evals, excluded))
        })
        .collect();

    let mut value = T::default();
    let mut evaluations = 0;
    let mut excluded_columns = 0;
    for r in rings {
        let (v, n, x) = r?;
        value = value + v;
        evaluations += n;
        excluded_columns += x;
    }
    Ok(OverlapEstimate {
        value,
        truncation_error,
        cutoff_error,
        evaluations,
        excluded_columns,
    })
}

/// Π = (1/4πc)∫E^(e)×B^(Φ) d³x by direct quadrature over a finite tube.
pub fn field_momentum_numeric(
    charge: &ChargeState,
    fluxon: &FluxonState,
    quad: &QuadratureSpec,
    consts: &PhysicalConstants,
) -> Result<OverlapEstimate<Vec3>> {
    let k = 1.0 / (4.0 * PI * consts.c);
    tube_overlap(charge, fluxon, quad, |x| {
        let e = charge_fields(charge, x, consts)?.e;
        let b = fluxon_fields(fluxon, x, consts)?.b;
        Ok(e.cross(b) * k)
    })
}

/// ∫(B^(e)·B^(Φ) − E^(e)·E^(Φ))/4π d³x by direct quadrature over a finite tube.
pub fn overlap_lagrangian_numeric(
    charge: &ChargeState,
    fluxon: &FluxonState,
    quad: &QuadratureSpec,
    consts: &PhysicalConstants,
) -> Result<OverlapEstimate<f64>> {
    tube_overlap(charge, fluxon, quad, |x| {
        let fe = charge_fields(charge, x, consts)?;
        let ff = fluxon_fields(fluxon, x, consts)?;
        Ok(scalar_density(&fe, &ff))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LagrangianMethod {
    ClosedForm,
    NumericOverlap(QuadratureSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LagrangianValue {
    /// erg
    pub value: f64,
    /// erg; absolute bound on the method's error (zero for the closed form).
    pub tolerance: f64,
}

pub fn interaction_lagrangian(
    charge: &ChargeState,
    fluxon: &FluxonState,
    method: &LagrangianMethod,
    consts: &PhysicalConstants,
) -> Result<LagrangianValue> {
    let relative_velocity = charge.velocity - fluxon.velocity;
    match method {
        LagrangianMethod::ClosedForm => {
            let pi = field_momentum_tube(charge.charge, fluxon, charge.position, consts)?;
            Ok(LagrangianValue {
                value: relative_velocity.dot(pi),
                tolerance: 0.0,
            })
        }
        LagrangianMethod::NumericOverlap(quad) => {
            let est = overlap_lagrangian_numeric(charge, fluxon, quad, consts)?;
            let pi = field_momentum_closed(charge.charge, fluxon.flux, charge.position, fluxon.position, consts)?;
            let scale = relative_velocity.norm() * pi.norm();
            Ok(LagrangianValue {
                value: est.value,
                tolerance: est.relative_tolerance() * scale,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxSample {
    pub position: Vec3,
    /// G
    pub b_z: f64,
    /// cm²
    pub area: f64,
}

impl FluxSample {
    pub fn flux(&self) -> f64 {
        self.b_z * self.area
    }
}

/// A sampled flux cross-section.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FluxDistribution {
    samples: Vec<FluxSample>,
    total_flux: f64,
}

#[derive(Debug, Deserialize)]
struct FluxCsvRow {
    x_cm: f64,
    y_cm: f64,
    #[serde(rename = "Bz_G")]
    bz_g: f64,
    area_cm2: f64,
}

pub const FLUX_CSV_HEADER: [&str; 4] = ["x_cm", "y_cm", "Bz_G", "area_cm2"];

impl FluxDistribution {
    pub fn new(samples: Vec<FluxSample>) -> Result<Self> {
        let total_flux = samples.iter().map(FluxSample::flux).sum();
        Self::with_total(samples, total_flux)
    }

    /// Checks the stored total against the samples.
    pub fn with_total(samples: Vec<FluxSample>, total_flux: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("flux distribution has no samples".into()));
        }
        let mut scale = 0.0;
        let mut sum = 0.0;
        for (i, s) in samples.iter().enumerate() {
            if !(s.area > 0.0 && s.area.is_finite()) {
                return Err(Error::InvalidInput(format!("flux sample {i} has non-positive area")));
            }
            if !(s.position.is_finite() && s.b_z.is_finite()) || s.position.z != 0.0 {
                return Err(Error::InvalidInput(format!("flux sample {i} is not a finite planar point")));
            }
            sum += s.flux();
            scale += s.flux().abs();
        }
        if (sum - total_flux).abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidInput(format!(
                "stored total flux {total_flux:e} disagrees with the samples ({sum:e})"
            )));
        }
        Ok(FluxDistribution { samples, total_flux })
    }

    /// Uniform field over a disk, cut into `rings` annuli of equal width, each
    /// split into roughly square sectors. Samples sit at the sector centroids.
    pub fn uniform_disk(center: Vec3, radius: f64, b_z: f64, rings: usize) -> Result<Self> {
        if !(radius > 0.0) || rings == 0 {
            return Err(Error::InvalidInput("disk needs a positive radius and at least one ring".into()));
        }
        let dr = radius / rings as f64;
        let mut samples = Vec::new();
        for i in 0..rings {
            let (r1, r2) = (dr * i as f64, dr * (i + 1) as f64);
            let r_mid = 0.5 * (r1 + r2);
            let n = ((2.0 * PI * r_mid / dr).round() as usize).max(1);
            let ring_area = PI * (r2 * r2 - r1 * r1);
            let dphi = 2.0 * PI / n as f64;
            // centroid radius of an annular sector
            let half = 0.5 * dphi;
            let chord = if n == 1 { 0.0 } else { half.sin() / half };
            let rc = 2.0 / 3.0 * (r2.powi(3) - r1.powi(3)) / (r2 * r2 - r1 * r1) * chord;
            // stagger alternate rings
            let phase = if i % 2 == 0 { 0.0 } else { half };
            for j in 0..n {
                let phi = phase + dphi * j as f64;
                samples.push(FluxSample {
                    position: center + Vec3::planar(rc * phi.cos(), rc * phi.sin()),
                    b_z,
                    area: ring_area / n as f64,
                });
            }
        }
        Self::new(samples)
    }

    pub fn samples(&self) -> &[FluxSample] {
        &self.samples
    }

    pub fn total_flux(&self) -> f64 {
        self.total_flux
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Reads `x_cm,y_cm,Bz_G,area_cm2`; the header must match exactly.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.iter().ne(FLUX_CSV_HEADER.iter().copied()) {
            return Err(Error::InvalidInput(format!(
                "flux CSV header must be `{}`, got `{}`",
                FLUX_CSV_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut samples = Vec::new();
        for row in rdr.deserialize() {
            let row: FluxCsvRow = row?;
            samples.push(FluxSample {
                position: Vec3::planar(row.x_cm, row.y_cm),
                b_z: row.bz_g,
                area: row.area_cm2,
            });
        }
        Self::new(samples)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(FLUX_CSV_HEADER)?;
        for s in &self.samples {
            w.write_record(&[
                s.position.x.to_string(),
                s.position.y.to_string(),
                s.b_z.to_string(),
                s.area.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Π = (e/2πc) Σ_i B_i A_i φ̂_i / |r − R_i|.
pub fn field_momentum_distributed(
    e: f64,
    dist: &FluxDistribution,
    r: Vec3,
    consts: &PhysicalConstants,
) -> Result<Vec3> {
    let k = e / (2.0 * PI * consts.c);
    let mut acc = Vec3::ZERO;
    for (index, s) in dist.samples.iter().enumerate() {
        let d = r - s.position;
        let rho2 = d.x * d.x + d.y * d.y;
        if !(rho2 > 0.0) {
            return Err(Error::CoincidentSample { index });
        }
        acc += Vec3::planar(-d.y, d.x) * (k * s.flux() / rho2);
    }
    Ok(acc)
}
