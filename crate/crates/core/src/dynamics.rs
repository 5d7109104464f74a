//! Hamiltonian two-body dynamics of a charge and a fluxon in the plane.
//!
//! H = (p − Π)²/2m + (P + Π)²/2M with Π = Π(r − R). Because Π is the gradient
//! of eΦθ/(2πc) outside the flux, its Jacobian is symmetric there and the
//! kinetic accelerations vanish: m r̈ = (Jᵀ − J)(ṙ − Ṙ) = 0 and M R̈ = −m r̈.
//! Inside a finite tube the antisymmetric part of J is the Lorentz force.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::em_kernel::{ChargeState, FluxonState, TubeProfile};
use crate::error::{Error, Result};
use crate::interaction::field_momentum_tube;
use crate::vec3::Vec3;

const FIXED_POINT_TOL: f64 = 1e-15;
const FIXED_POINT_MAX_ITER: usize = 100;

/// Canonical coordinates of both bodies. All vectors are planar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalState {
    /// charge position r (cm)
    pub charge_r: Vec3,
    /// fluxon position R (cm)
    pub fluxon_r: Vec3,
    /// canonical momentum p of the charge (g cm/s)
    pub charge_p: Vec3,
    /// canonical momentum P of the fluxon (g cm/s)
    pub fluxon_p: Vec3,
    /// s
    pub t: f64,
}

impl CanonicalState {
    pub fn separation(&self) -> Vec3 {
        self.charge_r - self.fluxon_r
    }

    fn validate(&self) -> Result<()> {
        let v = [self.charge_r, self.fluxon_r, self.charge_p, self.fluxon_p];
        if v.iter().any(|x| !x.is_finite() || x.z != 0.0) || !self.t.is_finite() {
            return Err(Error::InvalidInput("canonical state must be finite and planar".into()));
        }
        Ok(())
    }

    /// The same relative motion with the roles of the bodies exchanged: the
    /// charge now sits where the fluxon was, the fluxon is placed so that
    /// r − R is unchanged, and p' = −P, P' = −p. Pair with
    /// [`TwoBody::relabeled`], which swaps the masses.
    pub fn relabeled(&self) -> CanonicalState {
        CanonicalState {
            charge_r: self.fluxon_r,
            fluxon_r: self.fluxon_r - self.separation(),
            charge_p: -self.fluxon_p,
            fluxon_p: -self.charge_p,
            t: self.t,
        }
    }

    fn to_array(self) -> [f64; 8] {
        [
            self.charge_r.x,
            self.charge_r.y,
            self.fluxon_r.x,
            self.fluxon_r.y,
            self.charge_p.x,
            self.charge_p.y,
            self.fluxon_p.x,
            self.fluxon_p.y,
        ]
    }

    fn from_array(a: [f64; 8], t: f64) -> Self {
        CanonicalState {
            charge_r: Vec3::planar(a[0], a[1]),
            fluxon_r: Vec3::planar(a[2], a[3]),
            charge_p: Vec3::planar(a[4], a[5]),
            fluxon_p: Vec3::planar(a[6], a[7]),
            t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Classical fourth-order Runge–Kutta.
    Rk4,
    /// Generalized (implicit) Störmer–Verlet for the non-separable H;
    /// second order and symplectic.
    #[serde(alias = "strormer_verlet_split", alias = "stormer_verlet_split")]
    StormerVerlet,
}

/// Kinetic velocities at a state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KineticVelocities {
    pub charge: Vec3,
    pub fluxon: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepDiagnostics {
    /// erg
    pub energy: f64,
    pub charge_accel: f64,
    pub fluxon_accel: f64,
    /// |m r̈ + M R̈|
    pub newton_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub states: Vec<CanonicalState>,
    pub kinetic_velocities: Vec<KineticVelocities>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub dt: f64,
    pub integrator: Integrator,
}

pub const TRAJECTORY_CSV_HEADER: &str = "t,rx,ry,Rx,Ry,px,py,Px,Py,H";

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{TRAJECTORY_CSV_HEADER}")?;
        for (s, d) in self.states.iter().zip(&self.diagnostics) {
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                s.t,
                s.charge_r.x,
                s.charge_r.y,
                s.fluxon_r.x,
                s.fluxon_r.y,
                s.charge_p.x,
                s.charge_p.y,
                s.fluxon_p.x,
                s.fluxon_p.y,
                d.energy
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ForceReport {
    pub max_charge_accel: f64,
    pub max_fluxon_accel: f64,
    pub max_newton_residual: f64,
    /// max |H − H₀| / |H₀| (absolute if H₀ = 0)
    pub energy_drift: f64,
    /// max |p − mṙ − Π| + |P − MṘ + Π|
    pub max_canonical_residual: f64,
}

/// A charge and a fluxon with fixed source strengths and masses. Positions and
/// velocities inside `charge`/`fluxon` are only used by [`TwoBody::initial_state`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoBody {
    pub charge: ChargeState,
    pub fluxon: FluxonState,
    pub consts: PhysicalConstants,
    /// cm; steps may not bring the bodies closer than this.
    pub exclusion_radius: f64,
}

impl TwoBody {
    pub fn new(charge: ChargeState, fluxon: FluxonState, consts: PhysicalConstants) -> Result<Self> {
        charge.validate()?;
        fluxon.validate()?;
        Ok(TwoBody {
            charge,
            fluxon,
            consts,
            exclusion_radius: 0.0,
        })
    }

    pub fn with_exclusion_radius(mut self, radius: f64) -> Self {
        self.exclusion_radius = radius;
        self
    }

    /// Mass swap for the relabeled (fluxon-moving) description.
    pub fn relabeled(&self) -> TwoBody {
        let mut out = *self;
        out.charge.mass = self.fluxon.mass;
        out.fluxon.mass = self.charge.mass;
        out
    }

    /// Canonical state from the positions and kinetic velocities stored in
    /// `charge` and `fluxon`: p = mṙ + Π, P = MṘ − Π.
    pub fn initial_state(&self) -> Result<CanonicalState> {
        let pi = self.momentum_at(self.charge.position - self.fluxon.position, 0.0)?;
        Ok(CanonicalState {
            charge_r: self.charge.position,
            fluxon_r: self.fluxon.position,
            charge_p: self.charge.velocity * self.charge.mass + pi,
            fluxon_p: self.fluxon.velocity * self.fluxon.mass - pi,
            t: 0.0,
        })
    }

    /// Π as a function of the separation d = r − R.
    pub fn field_momentum(&self, d: Vec3) -> Result<Vec3> {
        // field_momentum_tube measures from the fluxon position; pin it to the origin
        let at_origin = FluxonState {
            position: Vec3::ZERO,
            ..self.fluxon
        };
        field_momentum_tube(self.charge.charge, &at_origin, d, &self.consts)
    }

    fn momentum_at(&self, d: Vec3, t: f64) -> Result<Vec3> {
        let rho = d.planar_norm();
        if !(rho > self.exclusion_radius) {
            return Err(Error::TrajectorySingularity { t, separation: rho });
        }
        self.field_momentum(d)
            .map_err(|_| Error::TrajectorySingularity { t, separation: rho })
    }

    /// J[j][i] = ∂Π_j/∂d_i.
    pub fn momentum_jacobian(&self, d: Vec3) -> [[f64; 2]; 2] {
        let k = self.charge.charge * self.fluxon.flux / (2.0 * std::f64::consts::PI * self.consts.c);
        let rho2 = d.x * d.x + d.y * d.y;
        let rho = rho2.sqrt();
        let g = self.fluxon.enclosed_fraction(rho);
        // Π = h(ρ) (−d_y, d_x), h = k g/ρ²
        let h = k * g / rho2;
        let dg = match self.fluxon.profile {
            TubeProfile::PointLimit => 0.0,
            _ => 2.0 * std::f64::consts::PI * rho * self.fluxon.b_z(rho) / self.fluxon.flux,
        };
        let dh = if self.fluxon.flux == 0.0 {
            0.0
        } else {
            k * (dg / rho2 - 2.0 * g / (rho2 * rho))
        };
        // ∂h/∂d_i = dh · d_i/ρ
        let (hx, hy) = (dh * d.x / rho, dh * d.y / rho);
        [[-d.y * hx, -h - d.y * hy], [h + d.x * hx, d.x * hy]]
    }

    pub fn kinetic_velocities(&self, s: &CanonicalState) -> Result<KineticVelocities> {
        let pi = self.momentum_at(s.separation(), s.t)?;
        Ok(KineticVelocities {
            charge: (s.charge_p - pi) / self.charge.mass,
            fluxon: (s.fluxon_p + pi) / self.fluxon.mass,
        })
    }

    pub fn hamiltonian(&self, s: &CanonicalState) -> Result<f64> {
        let pi = self.momentum_at(s.separation(), s.t)?;
        let a = s.charge_p - pi;
        let b = s.fluxon_p + pi;
        Ok(a.norm_sqr() / (2.0 * self.charge.mass) + b.norm_sqr() / (2.0 * self.fluxon.mass))
    }

    /// (∂H/∂p, ∂H/∂P) and (∂H/∂r, ∂H/∂R), as flat planar arrays.
    fn gradients(&self, q: [f64; 4], p: [f64; 4], t: f64) -> Result<([f64; 4], [f64; 4])> {
        let d = Vec3::planar(q[0] - q[2], q[1] - q[3]);
        let pi = self.momentum_at(d, t)?;
        let v = Vec3::planar((p[0] - pi.x) / self.charge.mass, (p[1] - pi.y) / self.charge.mass);
        let w = Vec3::planar((p[2] + pi.x) / self.fluxon.mass, (p[3] + pi.y) / self.fluxon.mass);
        let u = v - w;
        let j = self.momentum_jacobian(d);
        // (Jᵀu)_i = Σ_j J[j][i] u_j
        let jtu = [j[0][0] * u.x + j[1][0] * u.y, j[0][1] * u.x + j[1][1] * u.y];
        Ok(([v.x, v.y, w.x, w.y], [-jtu[0], -jtu[1], jtu[0], jtu[1]]))
    }

    fn rhs(&self, y: [f64; 8], t: f64) -> Result<[f64; 8]> {
        let (dq, dhq) = self.gradients(split_q(y), split_p(y), t)?;
        Ok([dq[0], dq[1], dq[2], dq[3], -dhq[0], -dhq[1], -dhq[2], -dhq[3]])
    }

    pub fn step(&self, s: &CanonicalState, dt: f64, integrator: Integrator) -> Result<CanonicalState> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("time step must be > 0, got {dt}")));
        }
        s.validate()?;
        let y = s.to_array();
        let next = match integrator {
            Integrator::Rk4 => {
                let k1 = self.rhs(y, s.t)?;
                let k2 = self.rhs(axpy(y, 0.5 * dt, k1), s.t + 0.5 * dt)?;
                let k3 = self.rhs(axpy(y, 0.5 * dt, k2), s.t + 0.5 * dt)?;
                let k4 = self.rhs(axpy(y, dt, k3), s.t + dt)?;
                let mut out = y;
                for i in 0..8 {
                    out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
                out
            }
            Integrator::StormerVerlet => self.stormer_verlet(y, dt, s.t)?,
        };
        let out = CanonicalState::from_array(next, s.t + dt);
        self.check_path(s, &out)?;
        Ok(out)
    }

    fn stormer_verlet(&self, y: [f64; 8], dt: f64, t: f64) -> Result<[f64; 8]> {
        let h = 0.5 * dt;
        let q0 = split_q(y);
        let p0 = split_p(y);
        let scale = p0.iter().map(|x| x.abs()).fold(0.0, f64::max);

        // p½ = p₀ − h ∂H/∂q(q₀, p½)
        let mut p_half = p0;
        let mut converged = false;
        for _ in 0..FIXED_POINT_MAX_ITER {
            let (_, gq) = self.gradients(q0, p_half, t)?;
            let next = sub_scaled(p0, h, gq);
            let change = max_diff(&next, &p_half);
            p_half = next;
            if change <= FIXED_POINT_TOL * scale.max(max_abs(&p_half)) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(fixed_point_failure(t));
        }

        // q₁ = q₀ + h (∂H/∂p(q₀, p½) + ∂H/∂p(q₁, p½))
        let (v0, _) = self.gradients(q0, p_half, t)?;
        let mut q1 = add_scaled(q0, dt, v0);
        let qscale = max_abs(&q0).max(max_abs(&q1));
        converged = false;
        for _ in 0..FIXED_POINT_MAX_ITER {
            let (v1, _) = self.gradients(q1, p_half, t + dt)?;
            let mut next = q0;
            for i in 0..4 {
                next[i] += h * (v0[i] + v1[i]);
            }
            let change = max_diff(&next, &q1);
            q1 = next;
            if change <= FIXED_POINT_TOL * qscale.max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(fixed_point_failure(t));
        }

        let (_, gq1) = self.gradients(q1, p_half, t + dt)?;
        let p1 = sub_scaled(p_half, h, gq1);
        Ok([q1[0], q1[1], q1[2], q1[3], p1[0], p1[1], p1[2], p1[3]])
    }

    /// Rejects a step whose straight relative path dips inside the exclusion
    /// radius, which a point fluxon would otherwise let it jump across.
    fn check_path(&self, a: &CanonicalState, b: &CanonicalState) -> Result<()> {
        if self.fluxon.profile != TubeProfile::PointLimit && self.exclusion_radius == 0.0 {
            return Ok(());
        }
        let (da, db) = (a.separation(), b.separation());
        let seg = db - da;
        let len2 = seg.norm_sqr();
        let s = if len2 > 0.0 { (-da.dot(seg) / len2).clamp(0.0, 1.0) } else { 0.0 };
        let closest = (da + seg * s).planar_norm();
        if !(closest > self.exclusion_radius) {
            return Err(Error::TrajectorySingularity {
                t: a.t + s * (b.t - a.t),
                separation: closest,
            });
        }
        Ok(())
    }

    /// Integrates from `initial` for `duration` with a uniform step; the last
    /// step is shortened to land on `duration` exactly.
    pub fn simulate(&self, initial: &CanonicalState, duration: f64, dt: f64, integrator: Integrator) -> Result<Trajectory> {
        if !(duration > 0.0 && dt > 0.0) {
            return Err(Error::InvalidInput("duration and dt must be positive".into()));
        }
        let n = (duration / dt - 1e-9).ceil().max(1.0) as usize;
        let t_end = initial.t + duration;
        let mut states = Vec::with_capacity(n + 1);
        states.push(*initial);
        let mut s = *initial;
        for k in 0..n {
            let h = if k + 1 == n { t_end - s.t } else { dt };
            s = self.step(&s, h, integrator)?;
            states.push(s);
        }
        let kinetic_velocities = states
            .iter()
            .map(|s| self.kinetic_velocities(s))
            .collect::<Result<Vec<_>>>()?;
        let energies = states.iter().map(|s| self.hamiltonian(s)).collect::<Result<Vec<_>>>()?;
        let diagnostics = (0..states.len())
            .map(|i| {
                let (a, b) = accelerations(&states, &kinetic_velocities, i);
                StepDiagnostics {
                    energy: energies[i],
                    charge_accel: a.norm(),
                    fluxon_accel: b.norm(),
                    newton_residual: (a * self.charge.mass + b * self.fluxon.mass).norm(),
                }
            })
            .collect();
        Ok(Trajectory {
            states,
            kinetic_velocities,
            diagnostics,
            dt,
            integrator,
        })
    }

    pub fn force_diagnostics(&self, traj: &Trajectory) -> Result<ForceReport> {
        if traj.len() < 3 {
            return Err(Error::InvalidInput("force diagnostics need at least three samples".into()));
        }
        let h0 = traj.diagnostics[0].energy;
        let mut report = ForceReport {
            max_charge_accel: 0.0,
            max_fluxon_accel: 0.0,
            max_newton_residual: 0.0,
            energy_drift: 0.0,
            max_canonical_residual: 0.0,
        };
        for (i, d) in traj.diagnostics.iter().enumerate() {
            // endpoints only have one-sided differences; report interior points
            if i > 0 && i + 1 < traj.len() {
                report.max_charge_accel = report.max_charge_accel.max(d.charge_accel);
                report.max_fluxon_accel = report.max_fluxon_accel.max(d.fluxon_accel);
                report.max_newton_residual = report.max_newton_residual.max(d.newton_residual);
            }
            let drift = if h0 != 0.0 { ((d.energy - h0) / h0).abs() } else { d.energy.abs() };
            report.energy_drift = report.energy_drift.max(drift);
            let s = &traj.states[i];
            let v = &traj.kinetic_velocities[i];
            let pi = self.momentum_at(s.separation(), s.t)?;
            let res = (s.charge_p - v.charge * self.charge.mass - pi).norm()
                + (s.fluxon_p - v.fluxon * self.fluxon.mass + pi).norm();
            report.max_canonical_residual = report.max_canonical_residual.max(res);
        }
        Ok(report)
    }

    /// Step size at which Π changes by at most 10⁻³ of |p| per step.
    pub fn suggested_dt(&self, s: &CanonicalState) -> Result<f64> {
        let v = self.kinetic_velocities(s)?;
        self.dt_at(s, s.separation(), v.charge - v.fluxon)
    }

    /// [`Self::suggested_dt`] evaluated where the free-flight relative path
    /// comes closest to the fluxon within `duration`, which is where Π
    /// changes fastest on a flyby.
    pub fn suggested_dt_for_run(&self, s: &CanonicalState, duration: f64) -> Result<f64> {
        let v = self.kinetic_velocities(s)?;
        let u = v.charge - v.fluxon;
        let d0 = s.separation();
        let t = if u.norm_sqr() > 0.0 { (-d0.dot(u) / u.norm_sqr()).clamp(0.0, duration) } else { 0.0 };
        let closest = d0 + u * t;
        if !(closest.planar_norm() > self.exclusion_radius) || closest.planar_norm() == 0.0 {
            return Err(Error::TrajectorySingularity { t: s.t + t, separation: closest.planar_norm() });
        }
        Ok(self.dt_at(s, d0, u)?.min(self.dt_at(s, closest, u)?))
    }

    fn dt_at(&self, s: &CanonicalState, d: Vec3, u: Vec3) -> Result<f64> {
        let j = self.momentum_jacobian(d);
        let dpi = Vec3::planar(j[0][0] * u.x + j[0][1] * u.y, j[1][0] * u.x + j[1][1] * u.y).norm();
        let p = if s.charge_p.norm() > 0.0 { s.charge_p.norm() } else { s.fluxon_p.norm() };
        if dpi == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(1e-3 * p / dpi)
    }
}

fn accelerations(states: &[CanonicalState], v: &[KineticVelocities], i: usize) -> (Vec3, Vec3) {
    let n = states.len();
    if n < 2 {
        return (Vec3::ZERO, Vec3::ZERO);
    }
    let (lo, hi) = if i == 0 {
        (0, 1)
    } else if i + 1 == n {
        (n - 2, n - 1)
    } else {
        (i - 1, i + 1)
    };
    let dt = states[hi].t - states[lo].t;
    ((v[hi].charge - v[lo].charge) / dt, (v[hi].fluxon - v[lo].fluxon) / dt)
}

fn fixed_point_failure(t: f64) -> Error {
    Error::NonConvergent {
        estimate: f64::NAN,
        detail: format!("Störmer–Verlet fixed-point iteration stalled at t = {t:e} s; reduce dt"),
    }
}

fn split_q(y: [f64; 8]) -> [f64; 4] {
    [y[0], y[1], y[2], y[3]]
}

fn split_p(y: [f64; 8]) -> [f64; 4] {
    [y[4], y[5], y[6], y[7]]
}

fn axpy(y: [f64; 8], a: f64, k: [f64; 8]) -> [f64; 8] {
    let mut out = y;
    for i in 0..8 {
        out[i] += a * k[i];
    }
    out
}

fn add_scaled(a: [f64; 4], h: f64, b: [f64; 4]) -> [f64; 4] {
    [a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2], a[3] + h * b[3]]
}

fn sub_scaled(a: [f64; 4], h: f64, b: [f64; 4]) -> [f64; 4] {
    add_scaled(a, -h, b)
}

fn max_diff(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_abs(a: &[f64; 4]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}
