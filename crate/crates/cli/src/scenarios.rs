//! Scenario execution. Every scenario writes `report.json` into the output
//! directory, plus kind-specific CSV data.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use fluxlab::dynamics::{Integrator, TwoBody};
use fluxlab::em_kernel::{boost_fields, charge_fields, field_tensor, fluxon_fields, scalar_density, tensor_contraction};
use fluxlab::interaction::{
    field_momentum_closed, field_momentum_numeric, FluxDistribution, QuadratureRule, QuadratureSpec,
    MAX_TRUNCATION_ERROR,
};
use fluxlab::phase::{
    self, circulation, enclosed_flux, fringe_shift, phase_quantum, winding_number, DistributedField,
    LoopPath, PhaseReport, PointFluxonField,
};
use fluxlab::shielding::{
    self, cage_interaction_terms, classify_shielding, image_current, image_current_transport, induced_surface_density,
    quantized_surface_charge, total_induced_charge, total_surface_charge, BeamKinematics, CageScenario, ShieldDesign,
};
use fluxlab::{ChargeState, FieldSample, FluxonState, TubeProfile, Vec3, CODATA, VERSION};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::config::{ScenarioConfig, ScenarioKind};
use crate::CliError;

pub const COVARIANCE_TOLERANCE: f64 = 1e-9;
pub const CAGE_RESIDUAL_TOLERANCE: f64 = 1e-10;

/// What a run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub report_path: PathBuf,
    pub files: Vec<PathBuf>,
    pub report: Value,
}

struct Output {
    results: Value,
    tolerances: Value,
    /// (file name, contents)
    files: Vec<(String, String)>,
}

/// Runs `config`, resolving relative paths against `base_dir`.
pub fn run(config: &ScenarioConfig, base_dir: &Path) -> Result<RunOutcome, CliError> {
    let out = match config.kind {
        ScenarioKind::LoopPhase => loop_phase(config, base_dir)?,
        ScenarioKind::TwoBodyDynamics => two_body(config)?,
        ScenarioKind::CageCancellation => cage(config)?,
        ScenarioKind::ShieldDesign => shield(config)?,
        ScenarioKind::CovarianceCheck => covariance(config)?,
        ScenarioKind::OverlapConvergence => overlap(config)?,
    };

    let dir = base_dir.join(&config.output_path);
    fs::create_dir_all(&dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for (name, contents) in &out.files {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        files.push(path);
    }

    let mut report = Map::new();
    report.insert("scenario".into(), Value::from(config.kind.name()));
    report.insert("library_version".into(), Value::from(VERSION));
    report.insert("input".into(), config.to_value());
    report.insert("tolerances".into(), out.tolerances);
    report.insert("results".into(), out.results);
    report.insert(
        "data_files".into(),
        Value::Array(out.files.iter().map(|(n, _)| Value::from(n.as_str())).collect()),
    );
    let report = Value::Object(report);
    let report_path = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    fs::write(&report_path, text).map_err(|e| CliError::Output(format!("{}: {e}", report_path.display())))?;
    Ok(RunOutcome { report_path, files, report })
}

fn input_error(e: fluxlab::Error) -> CliError {
    match e {
        fluxlab::Error::InvalidInput(_) | fluxlab::Error::Io(_) | fluxlab::Error::Csv(_) => {
            CliError::Input(e.to_string())
        }
        other => CliError::Numeric(other),
    }
}

fn loop_phase(cfg: &ScenarioConfig, base: &Path) -> Result<Output, CliError> {
    let e = cfg.num("charge_statC");
    let center = Vec3::planar(cfg.num("loop_center_x_cm"), cfg.num("loop_center_y_cm"));
    let n = cfg.int("loop_vertices") as usize;
    let turns = cfg.int("loop_turns") as i32;
    let path = match cfg.text("loop_shape") {
        Some("circle") => LoopPath::circle(center, cfg.num("loop_radius_cm"), n, turns),
        Some("ellipse") => LoopPath::ellipse(
            center,
            cfg.num("loop_semi_major_cm"),
            cfg.num("loop_semi_minor_cm"),
            cfg.num("loop_tilt_rad"),
            n,
            turns,
        ),
        Some("square") => LoopPath::square(center, cfg.num("loop_radius_cm")).map(|sq| {
            if turns < 0 {
                sq.reversed()
            } else {
                sq
            }
        }),
        _ => LoopPath::from_csv_path(base.join(cfg.text("loop_csv").unwrap_or_default())),
    }
    .map_err(input_error)?
    .with_refinement(cfg.int("gl_nodes_per_panel") as usize);

    let (phase, winding, inside, total, panels) = if let Some(csv) = cfg.text("flux_csv") {
        let dist = FluxDistribution::from_csv_path(base.join(csv)).map_err(input_error)?;
        let field = DistributedField { charge: e, distribution: &dist, consts: CODATA };
        let line = circulation(&path, &field)?;
        let inside = enclosed_flux(&path, &dist)?;
        // winding about the flux-weighted centroid
        let centroid = dist
            .samples()
            .iter()
            .fold(Vec3::ZERO, |acc, s| acc + s.position * s.flux())
            / dist.total_flux();
        let winding = winding_number(&path, centroid)?;
        (line.value / CODATA.hbar, winding, inside, dist.total_flux(), line.max_panels)
    } else {
        let flux = cfg.opt_num("flux_Mx").unwrap_or_else(|| cfg.num("flux_quanta") * CODATA.flux_quantum);
        let position = Vec3::planar(cfg.num("fluxon_x_cm"), cfg.num("fluxon_y_cm"));
        let field = PointFluxonField { charge: e, flux, position, consts: CODATA };
        let line = circulation(&path, &field)?;
        let winding = winding_number(&path, position)?;
        (line.value / CODATA.hbar, winding, winding as f64 * flux, flux, line.max_panels)
    };
    let summary = PhaseReport { phase_rad: phase, winding, enclosed_flux_mx: inside, fringe_shift: fringe_shift(phase) };
    let mut results = serde_json::to_value(summary).expect("phase report serializes");
    let extra = results.as_object_mut().expect("object");
    extra.insert("total_flux_Mx".into(), json!(total));
    extra.insert("phase_quantum_rad".into(), json!(phase_quantum(e, total, &CODATA)));
    extra.insert("stokes_phase_rad".into(), json!(phase_quantum(e, inside, &CODATA)));
    extra.insert("loop_vertices".into(), json!(path.vertices().len()));
    extra.insert("max_panels_per_edge".into(), json!(panels));

    let mut csv = String::from("x_cm,y_cm\n");
    for v in path.vertices() {
        csv.push_str(&format!("{:e},{:e}\n", v.x, v.y));
    }
    Ok(Output {
        results,
        tolerances: json!({
            "edge_relative_agreement": phase::EDGE_TOLERANCE,
            "max_doublings": phase::MAX_DOUBLINGS,
            "gl_nodes_per_panel": path.refinement(),
        }),
        files: vec![("loop.csv".into(), csv)],
    })
}

fn two_body(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let charge = ChargeState::new(
        Vec3::planar(cfg.num("charge_x_cm"), cfg.num("charge_y_cm")),
        Vec3::planar(cfg.num("charge_vx_cm_per_s"), cfg.num("charge_vy_cm_per_s")),
        cfg.num("charge_statC"),
        cfg.num("charge_mass_g"),
    )
    .map_err(input_error)?;
    let profile = match cfg.text("tube_profile") {
        Some("uniform_disk") => TubeProfile::UniformDisk,
        Some("gaussian_tube") => TubeProfile::GaussianTube,
        _ => TubeProfile::PointLimit,
    };
    let fluxon = FluxonState::new(
        Vec3::planar(cfg.num("fluxon_x_cm"), cfg.num("fluxon_y_cm")),
        Vec3::planar(cfg.num("fluxon_vx_cm_per_s"), cfg.num("fluxon_vy_cm_per_s")),
        cfg.num("flux_Mx"),
        cfg.num("fluxon_mass_g"),
        cfg.num("tube_radius_cm"),
        profile,
    )
    .map_err(input_error)?;
    let sys = TwoBody::new(charge, fluxon, CODATA)
        .map_err(input_error)?
        .with_exclusion_radius(cfg.num("exclusion_radius_cm"));
    let integrator = match cfg.text("integrator") {
        Some("stormer_verlet") => Integrator::StormerVerlet,
        _ => Integrator::Rk4,
    };
    let s0 = sys.initial_state()?;
    let duration = cfg.num("duration_s");
    let (dt, dt_source) = match cfg.opt_num("dt_s") {
        Some(dt) => (dt, "input"),
        None => (sys.suggested_dt_for_run(&s0, duration)?.min(duration / 100.0), "suggested"),
    };
    let traj = sys.simulate(&s0, duration, dt, integrator)?;
    let diag = sys.force_diagnostics(&traj)?;

    let mut csv = Vec::new();
    let every = cfg.int("record_every") as usize;
    let kept = fluxlab::dynamics::Trajectory {
        states: traj
            .states
            .iter()
            .enumerate()
            .filter(|(i, _)| i % every == 0 || *i + 1 == traj.len())
            .map(|(_, s)| *s)
            .collect(),
        kinetic_velocities: Vec::new(),
        diagnostics: traj
            .diagnostics
            .iter()
            .enumerate()
            .filter(|(i, _)| i % every == 0 || *i + 1 == traj.len())
            .map(|(_, d)| *d)
            .collect(),
        dt: traj.dt,
        integrator,
    };
    kept.write_csv(&mut csv)?;
    let last = traj.states.last().expect("non-empty trajectory");
    let v0 = traj.kinetic_velocities[0];
    let v1 = traj.kinetic_velocities.last().expect("non-empty");
    let deflection = v0.charge.cross(v1.charge).z.atan2(v0.charge.dot(v1.charge));
    Ok(Output {
        results: json!({
            "steps": traj.len() - 1,
            "dt_s": dt,
            "dt_source": dt_source,
            "max_charge_accel_cm_per_s2": diag.max_charge_accel,
            "max_fluxon_accel_cm_per_s2": diag.max_fluxon_accel,
            "max_newton_residual_dyn": diag.max_newton_residual,
            "energy_drift_relative": diag.energy_drift,
            "max_canonical_residual_g_cm_per_s": diag.max_canonical_residual,
            "charge_deflection_rad": deflection,
            "final_separation_x_cm": last.separation().x,
            "final_separation_y_cm": last.separation().y,
            "initial_energy_erg": traj.diagnostics[0].energy,
        }),
        tolerances: json!({
            "fixed_point_tolerance": 1e-15,
            "suggested_dt_pi_change_fraction": 1e-3,
        }),
        files: vec![("trajectory.csv".into(), String::from_utf8(csv).expect("utf-8 csv"))],
    })
}

fn cage(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let s = CageScenario::new(
        cfg.num("charge_statC"),
        cfg.num("a_cm"),
        cfg.num("R_cage_cm"),
        cfg.num("omega_rad_per_s"),
        cfg.num("flux_Mx"),
        cfg.int("n_pairs") as u64,
    )
    .map_err(input_error)?;
    let terms = cage_interaction_terms(&s, &CODATA)?;
    let relative = if terms.l_e_phi != 0.0 { (terms.residual / terms.l_e_phi).abs() } else { terms.residual.abs() };
    let points = cfg.int("profile_points") as usize;
    let mut csv = String::from("phi_rad,delta_sigma_statC_per_cm,sigma_statC_per_cm,j_c_statA_per_cm\n");
    for k in 0..points {
        let phi = 2.0 * PI * k as f64 / points as f64;
        csv.push_str(&format!(
            "{:e},{:e},{:e},{:e}\n",
            phi,
            induced_surface_density(&s, phi),
            quantized_surface_charge(&s, phi),
            image_current(&s, phi)
        ));
    }
    Ok(Output {
        results: json!({
            "L_e_phi_erg": terms.l_e_phi,
            "L_s_phi_erg": terms.l_s_phi,
            "residual_erg": terms.residual,
            "relative_residual": relative,
            "quadrature_nodes": terms.nodes,
            "induced_charge_statC": total_induced_charge(&s)?,
            "surface_charge_statC": total_surface_charge(&s)?,
            "expected_surface_charge_statC": 2.0 * s.n_pairs as f64 * s.e,
            "image_current_transport_statA": image_current_transport(&s)?,
            "cancelled": relative < CAGE_RESIDUAL_TOLERANCE,
        }),
        tolerances: json!({
            "quadrature_relative": shielding::CAGE_REL_TOL,
            "residual_relative": CAGE_RESIDUAL_TOLERANCE,
        }),
        files: vec![("surface_profile.csv".into(), csv)],
    })
}

fn shield(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let beam = match cfg.opt_num("lambda_m") {
        Some(l) => BeamKinematics::Wavelength(l),
        None => BeamKinematics::Velocity(cfg.num("v_e_m_per_s")),
    };
    let design = ShieldDesign::new(cfg.num("d_m"), cfg.num("gap_eV"), beam).map_err(input_error)?;
    let kin = design.kinematics(&CODATA).map_err(input_error)?;
    let report = classify_shielding(&design, &CODATA).map_err(input_error)?;
    let mut results = serde_json::to_value(report).expect("shield report serializes");
    let extra = results.as_object_mut().expect("object");
    extra.insert("v_e_m_per_s".into(), json!(kin.v_m_per_s));
    extra.insert("gamma".into(), json!(kin.gamma));
    extra.insert("kinetic_energy_eV".into(), json!(kin.kinetic_energy_ev));
    Ok(Output {
        results,
        tolerances: json!({ "classification": "shielded iff gamma_v < threshold (strict)" }),
        files: Vec::new(),
    })
}

fn covariance(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cases = cfg.int("cases") as usize;
    let max_beta = cfg.num("max_beta");
    let mut worst_scalar: f64 = 0.0;
    let mut worst_tensor: f64 = 0.0;
    let mut csv = String::from("case,beta,scalar_before,scalar_after,relative_error\n");
    for i in 0..cases {
        let charge = ChargeState::new(
            Vec3::planar(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            Vec3::planar(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)) * CODATA.c,
            CODATA.e_charge,
            CODATA.m_electron,
        )
        .map_err(input_error)?;
        let fluxon = FluxonState::new(
            Vec3::ZERO,
            Vec3::planar(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)) * CODATA.c,
            CODATA.flux_quantum,
            1.0,
            0.5,
            TubeProfile::GaussianTube,
        )
        .map_err(input_error)?;
        let x = Vec3::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6), rng.gen_range(-2.0..2.0));
        let f1: FieldSample = charge_fields(&charge, x, &CODATA)?;
        let f2: FieldSample = fluxon_fields(&fluxon, x, &CODATA)?;
        let beta = loop {
            let b = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let n = b.norm();
            if n <= 1.0 && n > 0.0 {
                break b * max_beta;
            }
        };
        let before = scalar_density(&f1, &f2);
        let (g1, g2) = (boost_fields(&f1, beta)?, boost_fields(&f2, beta)?);
        let after = scalar_density(&g1, &g2);
        let rel = ((after - before) / before).abs();
        worst_scalar = worst_scalar.max(rel);
        let tensor = tensor_contraction(&field_tensor(&f1), &field_tensor(&f2)) / (8.0 * PI);
        worst_tensor = worst_tensor.max(((tensor - before) / before).abs());
        csv.push_str(&format!("{i},{:e},{before:e},{after:e},{rel:e}\n", beta.norm()));
    }
    Ok(Output {
        results: json!({
            "cases": cases,
            "max_beta": max_beta,
            "worst_relative_error": worst_scalar,
            "worst_tensor_identity_error": worst_tensor,
            "passed": worst_scalar <= COVARIANCE_TOLERANCE,
        }),
        tolerances: json!({ "relative": COVARIANCE_TOLERANCE }),
        files: vec![("boosts.csv".into(), csv)],
    })
}

fn overlap(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let e = cfg.num("charge_statC");
    let flux = cfg.num("flux_Mx");
    let rho = cfg.num("rho_cm");
    let profile = match cfg.text("tube_profile") {
        Some("uniform_disk") => TubeProfile::UniformDisk,
        _ => TubeProfile::GaussianTube,
    };
    let rule = match cfg.text("rule") {
        Some("adaptive_simpson") => QuadratureRule::AdaptiveSimpson,
        _ => QuadratureRule::GaussLegendre,
    };
    let charge = ChargeState::new(Vec3::planar(rho, 0.0), Vec3::ZERO, e, 1.0).map_err(input_error)?;
    let closed = field_momentum_closed(e, flux, charge.position, Vec3::ZERO, &CODATA)?;
    let mut rows = Vec::new();
    let mut csv = String::from(
        "tube_radius_cm,pi_numeric_g_cm_per_s,pi_closed_g_cm_per_s,relative_error,truncation_error,cutoff_error,evaluations\n",
    );
    for ratio in cfg.list("radii_over_rho") {
        let fluxon = FluxonState::new(Vec3::ZERO, Vec3::ZERO, flux, 1.0, ratio * rho, profile).map_err(input_error)?;
        let mut quad = QuadratureSpec::for_configuration(&charge, &fluxon);
        quad.z_extent = cfg.num("z_extent_over_rho") * rho;
        quad.outer_radius = cfg.num("outer_radius_over_rho") * rho;
        quad.points_per_dim = cfg.int("points_per_dim") as usize;
        quad.rule = rule;
        let est = field_momentum_numeric(&charge, &fluxon, &quad, &CODATA)?;
        let err = if closed.norm() > 0.0 { (est.value - closed).norm() / closed.norm() } else { est.value.norm() };
        csv.push_str(&format!(
            "{:e},{:e},{:e},{err:e},{:e},{:e},{}\n",
            ratio * rho,
            est.value.y,
            closed.y,
            est.truncation_error,
            est.cutoff_error,
            est.evaluations
        ));
        rows.push(json!({
            "tube_radius_cm": ratio * rho,
            "pi_numeric_y_g_cm_per_s": est.value.y,
            "pi_closed_y_g_cm_per_s": closed.y,
            "relative_error": err,
            "reported_tolerance": est.relative_tolerance(),
            "truncation_error": est.truncation_error,
            "cutoff_error": est.cutoff_error,
            "evaluations": est.evaluations,
        }));
    }
    let errs: Vec<f64> = rows.iter().filter_map(|r| r["relative_error"].as_f64()).collect();
    Ok(Output {
        results: json!({
            "rows": rows,
            "monotone": errs.windows(2).all(|w| w[1] < w[0]),
        }),
        tolerances: json!({ "max_truncation_error": MAX_TRUNCATION_ERROR }),
        files: vec![("convergence.csv".into(), csv)],
    })
}

/// Physical constants with unit-suffixed keys.
pub fn constants_json() -> Value {
    let k = CODATA;
    json!({
        "c_cm_per_s": k.c,
        "hbar_erg_s": k.hbar,
        "h_erg_s": k.h,
        "e_statC": k.e_charge,
        "m_electron_g": k.m_electron,
        "erg_per_eV": k.erg_per_ev,
        "flux_quantum_Mx": k.flux_quantum,
        "c_m_per_s": k.c_si(),
        "h_J_s": k.h_si(),
        "m_electron_kg": k.m_electron_si(),
        "J_per_eV": k.joule_per_ev(),
    })
}
