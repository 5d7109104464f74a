//! Loop phases: (1/ħ)∮Π·dr along polygonal paths, winding numbers, and the
//! enclosed-flux (Stokes) oracle for sampled flux distributions.

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::interaction::{field_momentum_closed, field_momentum_distributed, FluxDistribution};
use crate::quadrature::GaussLegendre;
use crate::vec3::Vec3;

/// Two successive per-edge estimates must agree to this relative tolerance.
pub const EDGE_TOLERANCE: f64 = 1e-8;
pub const MAX_DOUBLINGS: u32 = 20;
pub const DEFAULT_REFINEMENT: usize = 8;

/// A closed polygon in the plane, stored without repeating the first vertex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoopPath {
    vertices: Vec<Vec3>,
    closed: bool,
    /// Gauss-Legendre nodes per panel.
    refinement: usize,
}

#[derive(Debug, Deserialize)]
struct LoopCsvRow {
    x_cm: f64,
    y_cm: f64,
}

pub const LOOP_CSV_HEADER: [&str; 2] = ["x_cm", "y_cm"];

impl LoopPath {
    pub fn new(mut vertices: Vec<Vec3>, closed: bool) -> Result<Self> {
        if closed && vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::InvalidInput("a loop needs at least three distinct vertices".into()));
        }
        if let Some(i) = vertices.iter().position(|v| !v.is_finite() || v.z != 0.0) {
            return Err(Error::InvalidInput(format!("loop vertex {i} is not a finite planar point")));
        }
        let n = vertices.len();
        let edges = if closed { n } else { n - 1 };
        if let Some(i) = (0..edges).find(|&i| vertices[i] == vertices[(i + 1) % n]) {
            return Err(Error::InvalidInput(format!("loop vertices {i} and {} coincide", (i + 1) % n)));
        }
        Ok(LoopPath {
            vertices,
            closed,
            refinement: DEFAULT_REFINEMENT,
        })
    }

    pub fn closed(vertices: Vec<Vec3>) -> Result<Self> {
        Self::new(vertices, true)
    }

    pub fn with_refinement(mut self, nodes_per_panel: usize) -> Self {
        self.refinement = nodes_per_panel.max(1);
        self
    }

    /// Regular `n`-gon inscribed in a circle, traversed counterclockwise
    /// `turns` times (clockwise for negative `turns`).
    pub fn circle(center: Vec3, radius: f64, n: usize, turns: i32) -> Result<Self> {
        Self::ellipse(center, radius, radius, 0.0, n, turns)
    }

    pub fn ellipse(center: Vec3, a: f64, b: f64, tilt: f64, n: usize, turns: i32) -> Result<Self> {
        if turns == 0 || !(a > 0.0 && b > 0.0) || n < 3 {
            return Err(Error::InvalidInput("ellipse needs positive axes, n >= 3 and nonzero turns".into()));
        }
        let sign = turns.signum() as f64;
        let total = n * turns.unsigned_abs() as usize;
        let vertices = (0..total)
            .map(|k| {
                let t = sign * 2.0 * PI * k as f64 / n as f64;
                center + Vec3::planar(a * t.cos(), b * t.sin()).rotate_z(tilt)
            })
            .collect();
        Self::closed(vertices)
    }

    /// Axis-aligned square, counterclockwise.
    pub fn square(center: Vec3, half_side: f64) -> Result<Self> {
        let h = half_side;
        Self::closed(vec![
            center + Vec3::planar(-h, -h),
            center + Vec3::planar(h, -h),
            center + Vec3::planar(h, h),
            center + Vec3::planar(-h, h),
        ])
    }

    /// Star-shaped polygon: vertex k at angle `angles[k]` and radius
    /// `radii[k]` about `center`. Angles must increase within one turn.
    pub fn star(center: Vec3, angles: &[f64], radii: &[f64]) -> Result<Self> {
        if angles.len() != radii.len() {
            return Err(Error::InvalidInput("star polygon needs one radius per angle".into()));
        }
        Self::closed(
            angles
                .iter()
                .zip(radii)
                .map(|(&t, &r)| center + Vec3::planar(r * t.cos(), r * t.sin()))
                .collect(),
        )
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn refinement(&self) -> usize {
        self.refinement
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        let n = self.vertices.len();
        let count = if self.closed { n } else { n - 1 };
        (0..count).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn reversed(&self) -> LoopPath {
        let mut v = self.vertices.clone();
        v.reverse();
        LoopPath { vertices: v, ..*self }
    }

    /// Point reflection through `p` (a rotation by π, so orientation is kept).
    pub fn reflected_through(&self, p: Vec3) -> LoopPath {
        LoopPath {
            vertices: self.vertices.iter().map(|&v| p * 2.0 - v).collect(),
            ..*self
        }
    }

    /// Traverses `self`, hops to `other`'s start, traverses `other`, and hops
    /// back. The two connecting edges cancel in any line integral.
    pub fn concat(&self, other: &LoopPath) -> Result<LoopPath> {
        let mut v = self.vertices.clone();
        v.push(self.vertices[0]);
        if other.vertices[0] != self.vertices[0] {
            v.extend_from_slice(&other.vertices);
            v.push(other.vertices[0]);
        } else {
            v.extend_from_slice(&other.vertices[1..]);
        }
        let closed = LoopPath::new(v, true)?;
        Ok(closed.with_refinement(self.refinement))
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.iter().ne(LOOP_CSV_HEADER.iter().copied()) {
            return Err(Error::InvalidInput(format!(
                "loop CSV header must be `{}`",
                LOOP_CSV_HEADER.join(",")
            )));
        }
        let mut vertices = Vec::new();
        for row in rdr.deserialize() {
            let row: LoopCsvRow = row?;
            vertices.push(Vec3::planar(row.x_cm, row.y_cm));
        }
        Self::closed(vertices)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }
}

/// Anything that can supply the field momentum Π at a point.
pub trait MomentumField: Sync {
    fn momentum(&self, x: Vec3) -> Result<Vec3>;

    /// Points where Π is singular.
    fn singular_points(&self) -> Vec<Vec3>;

    /// Loops may not pass closer than this to a singular point.
    fn exclusion_radius(&self) -> f64 {
        0.0
    }
}

/// Closed-form Π of a point fluxon.
#[derive(Clone, Copy, Debug)]
pub struct PointFluxonField {
    pub charge: f64,
    pub flux: f64,
    pub position: Vec3,
    pub consts: PhysicalConstants,
}

impl MomentumField for PointFluxonField {
    fn momentum(&self, x: Vec3) -> Result<Vec3> {
        field_momentum_closed(self.charge, self.flux, x, self.position, &self.consts)
    }

    fn singular_points(&self) -> Vec<Vec3> {
        vec![self.position]
    }
}

/// The coupling seen by a fluxon moving past a static charge: the fluxon's
/// share of (ṙ − Ṙ)·Π is −Ṙ·Π(r − R).
#[derive(Clone, Copy, Debug)]
pub struct StaticChargeField {
    pub charge: f64,
    pub flux: f64,
    pub charge_position: Vec3,
    pub consts: PhysicalConstants,
}

impl MomentumField for StaticChargeField {
    fn momentum(&self, fluxon_at: Vec3) -> Result<Vec3> {
        Ok(-field_momentum_closed(self.charge, self.flux, self.charge_position, fluxon_at, &self.consts)?)
    }

    fn singular_points(&self) -> Vec<Vec3> {
        vec![self.charge_position]
    }
}

/// Π summed over a sampled flux cross-section.
#[derive(Clone, Debug)]
pub struct DistributedField<'a> {
    pub charge: f64,
    pub distribution: &'a FluxDistribution,
    pub consts: PhysicalConstants,
}

impl MomentumField for DistributedField<'_> {
    fn momentum(&self, x: Vec3) -> Result<Vec3> {
        field_momentum_distributed(self.charge, self.distribution, x, &self.consts)
    }

    fn singular_points(&self) -> Vec<Vec3> {
        self.distribution.samples().iter().map(|s| s.position).collect()
    }
}

fn point_segment_distance(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.norm_sqr()).clamp(0.0, 1.0);
    (a + ab * t - p).norm()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineIntegral {
    pub value: f64,
    /// Largest panel count any edge needed.
    pub max_panels: usize,
}

/// ∮Π·dr with per-edge composite Gauss-Legendre, doubling the panel count
/// until successive estimates agree to [`EDGE_TOLERANCE`].
pub fn circulation<F: MomentumField + ?Sized>(path: &LoopPath, field: &F) -> Result<LineIntegral> {
    if !path.closed {
        return Err(Error::InvalidInput("phase requires a closed loop".into()));
    }
    let singular = field.singular_points();
    let excl = field.exclusion_radius();
    for (edge, (a, b)) in path.edges().enumerate() {
        let floor = excl.max(1e-12 * (b - a).norm());
        for (point, &p) in singular.iter().enumerate() {
            let distance = point_segment_distance(p, a, b);
            if distance <= floor {
                return Err(Error::PathSingularity { edge, point, distance });
            }
        }
    }

    let gl = GaussLegendre::new(path.refinement);
    let edges: Vec<(Vec3, Vec3)> = path.edges().collect();
    let per_edge: Vec<Result<(f64, usize)>> = edges
        .par_iter()
        .map(|&(a, b)| edge_integral(&gl, field, a, b))
        .collect();
    let mut value = 0.0;
    let mut max_panels = 0;
    for r in per_edge {
        let (v, n) = r?;
        value += v;
        max_panels = max_panels.max(n);
    }
    Ok(LineIntegral { value, max_panels })
}

fn edge_integral<F: MomentumField + ?Sized>(gl: &GaussLegendre, field: &F, a: Vec3, b: Vec3) -> Result<(f64, usize)> {
    let dir = b - a;
    let eval = |panels: usize| -> Result<(f64, f64)> {
        let h = 1.0 / panels as f64;
        let mut sum = 0.0;
        let mut abs = 0.0;
        for k in 0..panels {
            let lo = h * k as f64;
            for (s, w) in gl.mapped(lo, lo + h) {
                let v = field.momentum(a + dir * s)?.dot(dir) * w;
                sum += v;
                abs += v.abs();
            }
        }
        Ok((sum, abs))
    };
    let mut panels = 1;
    let (mut prev, _) = eval(panels)?;
    for _ in 0..MAX_DOUBLINGS {
        panels *= 2;
        let (cur, abs) = eval(panels)?;
        if (cur - prev).abs() <= EDGE_TOLERANCE * cur.abs().max(abs) {
            return Ok((cur, panels));
        }
        prev = cur;
    }
    Err(Error::NonConvergent {
        estimate: f64::NAN,
        detail: format!("edge from {a:?} to {b:?} did not converge after {MAX_DOUBLINGS} doublings"),
    })
}

/// (1/ħ)∮Π·dr in radians.
pub fn ab_phase<F: MomentumField + ?Sized>(path: &LoopPath, field: &F, consts: &PhysicalConstants) -> Result<f64> {
    Ok(circulation(path, field)?.value / consts.hbar)
}

/// eΦ/(ħc), the phase of one counterclockwise turn.
pub fn phase_quantum(charge: f64, flux: f64, consts: &PhysicalConstants) -> f64 {
    charge * flux / (consts.hbar * consts.c)
}

/// Signed number of turns `path` makes about `point`.
pub fn winding_number(path: &LoopPath, point: Vec3) -> Result<i64> {
    if !path.closed {
        return Err(Error::InvalidInput("winding number requires a closed loop".into()));
    }
    let mut total = 0.0;
    for (edge, (a, b)) in path.edges().enumerate() {
        let scale = (b - a).norm();
        if point_segment_distance(point, a, b) <= 1e-12 * scale {
            return Err(Error::AmbiguousWinding { edge });
        }
        let (u, v) = (a - point, b - point);
        total += (u.x * v.y - u.y * v.x).atan2(u.dot(v));
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Σ winding(sample)·B·A over the distribution.
pub fn enclosed_flux(path: &LoopPath, dist: &FluxDistribution) -> Result<f64> {
    let mut acc = 0.0;
    for s in dist.samples() {
        acc += winding_number(path, s.position)? as f64 * s.flux();
    }
    Ok(acc)
}

/// Fringe displacement in units of one fringe, phase/2π reduced to [0, 1).
pub fn fringe_shift(phase: f64) -> f64 {
    let f = (phase / (2.0 * PI)).rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative input
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub phase_rad: f64,
    pub winding: i64,
    #[serde(rename = "enclosed_flux_Mx")]
    pub enclosed_flux_mx: f64,
    pub fringe_shift: f64,
}
