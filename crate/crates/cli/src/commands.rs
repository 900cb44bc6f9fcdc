//! Implementation of the five subcommands.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use ldg_core::energy::{
    director_dirichlet_energy, energy_compare_hedgehog_vs_perturbation, field_energy,
    monotonicity_scan, radial_energy, EnergyBreakdown,
};
use ldg_core::fields::{BallField, FieldKind, HarmonicMapField, HedgehogField};
use ldg_core::fmt::g17;
use ldg_core::identities::verification_suite;
use ldg_core::profile::{
    bounds_report, constant_profile, profile_residual, solve_profile, write_profile_csv,
    RadialProfile,
};
use ldg_core::relax::{relax_field, initial_field, RelaxConfig, RelaxInit, RelaxResult};
use ldg_core::{Error, Result};

use crate::config::RunConfig;
use crate::json::{parse_flat, Json};

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(cfg.str("out_dir", "."));
    fs::create_dir_all(&dir)
        .map_err(|e| Error::InvalidParameter(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display())))
}

fn config_json(cfg: &RunConfig) -> Json {
    Json::Obj(
        cfg.entries()
            .map(|(k, v)| (k.to_string(), Json::Str(v.to_string())))
            .collect(),
    )
}

fn energy_json(e: &EnergyBreakdown<f64>) -> Json {
    Json::Obj(vec![
        ("elastic".into(), Json::Num(e.elastic)),
        ("bulk".into(), Json::Num(e.bulk)),
        ("total".into(), Json::Num(e.total)),
        ("err_est".into(), Json::Num(e.quadrature_error_estimate)),
    ])
}

fn solve_from_config(cfg: &RunConfig, t: f64, radius: f64) -> Result<RadialProfile<f64>> {
    let n = cfg.usize("n", 2000)?;
    solve_profile(t, radius, n)
}

/// `profile`: solve the hedgehog equation, emit profile.csv and
/// bounds_report.json.
pub fn cmd_profile(cfg: &RunConfig) -> Result<()> {
    let rp = cfg.reduced_params()?;
    let dir = out_dir(cfg)?;
    let p = solve_from_config(cfg, rp.t, rp.r_t)?;

    let mut csv = Vec::new();
    write_profile_csv(&p, &mut csv)
        .map_err(|e| Error::InvalidParameter(format!("csv write failed: {e}")))?;
    write_file(&dir.join("profile.csv"), &String::from_utf8(csv).unwrap())?;

    let checks = bounds_report(&p);
    let all_pass = checks.iter().all(|c| c.pass);
    let doc = Json::Obj(vec![
        (
            "checks".into(),
            Json::Arr(
                checks
                    .iter()
                    .map(|c| {
                        Json::Obj(vec![
                            ("name".into(), Json::Str(c.name.to_string())),
                            ("margin".into(), Json::Num(c.margin)),
                            ("pass".into(), Json::Bool(c.pass)),
                        ])
                    })
                    .collect(),
            ),
        ),
        ("all_pass".into(), Json::Bool(all_pass)),
        ("d2h0".into(), Json::Num(p.d2h0)),
        ("residual".into(), Json::Num(profile_residual(&p))),
        ("t".into(), Json::Num(p.t)),
        ("R".into(), Json::Num(p.radius)),
        ("n".into(), Json::Int(p.r.len() as i64)),
        ("config".into(), config_json(cfg)),
    ]);
    write_file(&dir.join("bounds_report.json"), &doc.render())
}

/// `verify`: run the identity suite, emit verify.json; nonzero exit when a
/// check fails (handled by the caller through the returned flag).
pub fn cmd_verify(cfg: &RunConfig) -> Result<bool> {
    let rp = cfg.reduced_params()?;
    let dir = out_dir(cfg)?;
    let order = cfg.usize("order", 32)?;
    let seed = cfg.u64("seed", 0)?;
    let n_tensors = cfg.usize("n_btensors", 100)?;
    let n = cfg.usize("n", 1000)?;
    let p = solve_profile(rp.t, rp.r_t, n)?;
    let checks = verification_suite(&p, &rp, seed, order, n_tensors)?;
    let all_pass = checks.iter().all(|c| c.pass);
    let doc = Json::Obj(vec![
        (
            "checks".into(),
            Json::Arr(
                checks
                    .iter()
                    .map(|c| {
                        Json::Obj(vec![
                            ("identity_name".into(), Json::Str(c.name.clone())),
                            ("value".into(), Json::Num(c.value)),
                            ("tolerance".into(), Json::Num(c.tolerance)),
                            ("pass".into(), Json::Bool(c.pass)),
                        ])
                    })
                    .collect(),
            ),
        ),
        ("all_pass".into(), Json::Bool(all_pass)),
        ("config".into(), config_json(cfg)),
    ]);
    write_file(&dir.join("verify.json"), &doc.render())?;
    Ok(all_pass)
}

/// `energy`: radial (1-D) or lattice (3-D) energy of the selected field;
/// optional monotonicity scan CSV.
pub fn cmd_energy(cfg: &RunConfig) -> Result<()> {
    let rp = cfg.reduced_params()?;
    let dir = out_dir(cfg)?;
    let field_name = cfg.str("field", "hedgehog");
    let method = cfg.str("method", "radial");
    let grid_n = cfg.usize("grid_n", 48)?;

    let profile = match field_name.as_str() {
        "harmonic" => constant_profile(1.0, rp.t, rp.r_t, cfg.usize("n", 2000)?),
        "hedgehog" => solve_from_config(cfg, rp.t, rp.r_t)?,
        other => {
            return Err(Error::InvalidParameter(format!(
                "field must be harmonic or hedgehog, got {other}"
            )))
        }
    };

    let e = match method.as_str() {
        "radial" => radial_energy(&profile, &rp),
        "grid" => {
            let field = match field_name.as_str() {
                "harmonic" => BallField::sample(
                    &HarmonicMapField,
                    FieldKind::HarmonicMap,
                    rp.r_t,
                    rp.t,
                    grid_n,
                )?,
                _ => BallField::sample(
                    &HedgehogField::new(&profile),
                    FieldKind::Hedgehog,
                    rp.r_t,
                    rp.t,
                    grid_n,
                )?,
            };
            field_energy(&field, &rp)?
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "method must be radial or grid, got {other}"
            )))
        }
    };

    let scan_count = cfg.usize("scan_radii", 0)?;
    if scan_count > 0 {
        let radii: Vec<f64> = (1..=scan_count)
            .map(|k| rp.r_t * k as f64 / scan_count as f64)
            .collect();
        let scan = monotonicity_scan(&profile, &rp, &radii);
        let mut csv = String::from("r,E_over_r\n");
        for (r, v) in &scan {
            csv.push_str(&format!("{},{}\n", g17(*r), g17(*v)));
        }
        write_file(&dir.join("scan.csv"), &csv)?;
    }

    let twelve_pi_r = 12.0 * std::f64::consts::PI * rp.r_t;
    let doc = Json::Obj(vec![
        ("elastic".into(), Json::Num(e.elastic)),
        ("bulk".into(), Json::Num(e.bulk)),
        ("total".into(), Json::Num(e.total)),
        ("err_est".into(), Json::Num(e.quadrature_error_estimate)),
        ("R".into(), Json::Num(rp.r_t)),
        ("t".into(), Json::Num(rp.t)),
        ("grid_n".into(), Json::Int(grid_n as i64)),
        ("twelve_pi_R".into(), Json::Num(twelve_pi_r)),
        (
            "director_reference_8_pi_R".into(),
            Json::Num(director_dirichlet_energy(rp.r_t, 2000)),
        ),
        ("config".into(), config_json(cfg)),
    ]);
    write_file(&dir.join("energy.json"), &doc.render())
}

fn relax_config_from(cfg: &RunConfig, t: f64, radius: f64, init: RelaxInit) -> Result<RelaxConfig<f64>> {
    Ok(RelaxConfig {
        t,
        radius,
        grid_n: cfg.usize("grid_n", 48)?,
        dt_factor: cfg.f64("dt_factor", 7.0)?,
        max_steps: cfg.usize("max_steps", 500)?,
        tol: cfg.f64("tol", 1e-8)?,
        init,
        threads: cfg.usize("threads", 1)?,
        semi_implicit: cfg.bool("semi_implicit", false)?,
    })
}

fn relax_result_json(out: &RelaxResult<f64>, cfg: &RunConfig) -> Json {
    Json::Obj(vec![
        ("steps".into(), Json::Int(out.steps as i64)),
        ("converged".into(), Json::Bool(out.converged)),
        ("final_update".into(), Json::Num(out.final_update)),
        ("final_residual".into(), Json::Num(out.final_residual)),
        ("energy".into(), energy_json(&out.energy)),
        ("discrete_energy".into(), Json::Num(out.discrete_energy)),
        ("max_abs_q".into(), Json::Num(out.max_abs_q)),
        ("config".into(), config_json(cfg)),
    ])
}

fn write_checkpoint(
    dir: &Path,
    stem: &str,
    field: &BallField<f64>,
    step: usize,
    energy: f64,
) -> Result<()> {
    let mut csv = Vec::new();
    field
        .write_csv(&mut csv)
        .map_err(|e| Error::InvalidParameter(format!("checkpoint write failed: {e}")))?;
    write_file(&dir.join(format!("{stem}.csv")), &String::from_utf8(csv).unwrap())?;
    let meta = Json::Obj(vec![
        ("grid_n".into(), Json::Int(field.n as i64)),
        ("R".into(), Json::Num(field.radius)),
        ("t".into(), Json::Num(field.t)),
        ("dx".into(), Json::Num(field.dx)),
        ("kind".into(), Json::Str(field.kind.tag().to_string())),
        ("step".into(), Json::Int(step as i64)),
        ("energy".into(), Json::Num(energy)),
    ]);
    write_file(&dir.join(format!("{stem}.json")), &meta.render())
}

fn read_checkpoint(path_json: &Path) -> Result<(BallField<f64>, usize)> {
    let text = fs::read_to_string(path_json)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path_json.display())))?;
    let meta = parse_flat(&text)
        .ok_or_else(|| Error::InvalidParameter("unreadable checkpoint metadata".into()))?;
    let need = |k: &str| -> Result<&String> {
        meta.get(k)
            .ok_or_else(|| Error::InvalidParameter(format!("checkpoint missing key {k}")))
    };
    let n: usize = need("grid_n")?.parse().map_err(|_| {
        Error::InvalidParameter("checkpoint grid_n unreadable".into())
    })?;
    let radius: f64 = need("R")?.parse().unwrap_or(f64::NAN);
    let t: f64 = need("t")?.parse().unwrap_or(f64::NAN);
    let step: usize = need("step")?.parse().unwrap_or(0);
    let kind = FieldKind::from_tag(need("kind")?)?;
    let csv_path = path_json.with_extension("csv");
    let file = fs::File::open(&csv_path)
        .map_err(|e| Error::InvalidParameter(format!("cannot open {}: {e}", csv_path.display())))?;
    let field = BallField::read_csv(BufReader::new(file), n, radius, t, kind)?;
    Ok((field, step))
}

/// `relax`: flow to a candidate minimizer, write relax.json plus the field
/// dump; optional periodic checkpoints and resume.
pub fn cmd_relax(cfg: &RunConfig) -> Result<()> {
    let rp = cfg.reduced_params()?;
    let dir = out_dir(cfg)?;
    let init = RelaxInit::from_tag(&cfg.str("init", "hedgehog"))?;
    let rcfg = relax_config_from(cfg, rp.t, rp.r_t, init)?;
    rcfg.validate()?;

    let (mut field, mut steps_done) = match cfg.get("resume") {
        Some(path) => read_checkpoint(Path::new(path))?,
        None => {
            let p = solve_from_config(cfg, rp.t, rp.r_t)?;
            (initial_field(&rcfg, &p)?, 0)
        }
    };

    let checkpoint_every = cfg.usize("checkpoint_every", 0)?;
    let out = if checkpoint_every == 0 {
        relax_field(field, &rcfg, &rp, steps_done)?
    } else {
        // Run in checkpoint-sized legs; each leg continues the step count.
        loop {
            let mut leg_cfg = rcfg;
            leg_cfg.max_steps = rcfg.max_steps.min(steps_done + checkpoint_every);
            let leg = relax_field(field, &leg_cfg, &rp, steps_done)?;
            steps_done = leg.steps;
            write_checkpoint(
                &dir,
                &format!("checkpoint_{steps_done}"),
                &leg.field,
                steps_done,
                leg.discrete_energy,
            )?;
            if leg.converged || steps_done >= rcfg.max_steps {
                break leg;
            }
            field = leg.field;
        }
    };

    let mut csv = Vec::new();
    out.field
        .write_csv(&mut csv)
        .map_err(|e| Error::InvalidParameter(format!("field dump failed: {e}")))?;
    write_file(&dir.join("field.csv"), &String::from_utf8(csv).unwrap())?;
    let sidecar = Json::Obj(vec![
        ("grid_n".into(), Json::Int(out.field.n as i64)),
        ("R".into(), Json::Num(out.field.radius)),
        ("t".into(), Json::Num(out.field.t)),
        ("dx".into(), Json::Num(out.field.dx)),
        ("kind".into(), Json::Str(out.field.kind.tag().to_string())),
        ("step".into(), Json::Int(out.steps as i64)),
    ]);
    write_file(&dir.join("field.json"), &sidecar.render())?;
    write_file(&dir.join("relax.json"), &relax_result_json(&out, cfg).render())
}

/// `compare`: hedgehog vs perturbed-core energies on one lattice plus the
/// relaxed energy from the perturbed start.
pub fn cmd_compare(cfg: &RunConfig) -> Result<()> {
    let rp = cfg.reduced_params()?;
    let dir = out_dir(cfg)?;
    let p = solve_from_config(cfg, rp.t, rp.r_t)?;
    let grid_n = cfg.usize("grid_n", 48)?;
    let report = energy_compare_hedgehog_vs_perturbation(&p, &rp, grid_n)?;

    let rcfg = relax_config_from(cfg, rp.t, rp.r_t, RelaxInit::PerturbedHedgehog)?;
    let relaxed = relax_field(initial_field(&rcfg, &p)?, &rcfg, &rp, 0)?;

    let doc = Json::Obj(vec![
        ("E_H".into(), energy_json(&report.hedgehog)),
        ("E_Hb".into(), energy_json(&report.perturbed)),
        ("E_relaxed".into(), energy_json(&relaxed.energy)),
        ("delta".into(), Json::Num(report.delta)),
        ("err_est".into(), Json::Num(report.delta_err_est)),
        (
            "twelve_pi_R".into(),
            Json::Num(12.0 * std::f64::consts::PI * rp.r_t),
        ),
        ("relax_steps".into(), Json::Int(relaxed.steps as i64)),
        ("relax_converged".into(), Json::Bool(relaxed.converged)),
        ("max_abs_q".into(), Json::Num(relaxed.max_abs_q)),
        ("config".into(), config_json(cfg)),
    ]);
    write_file(&dir.join("compare.json"), &doc.render())
}
