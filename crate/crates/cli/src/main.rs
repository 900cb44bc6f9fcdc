//! `ldg`: command-line laboratory for Landau-de Gennes droplets.
//!
//! Subcommands: profile | verify | energy | relax | compare.
//! Exit codes: 0 success, 1 usage or configuration error, 2 solver failure,
//! 3 instability or divergence.

mod commands;
mod config;
mod json;

use std::path::Path;
use std::process::ExitCode;

use config::RunConfig;
use ldg_core::Error;

const USAGE: &str = "\
usage: ldg <profile|verify|energy|relax|compare> [--config FILE] [key=value ...]

Configuration is a flat key=value store read from --config (one pair per
line, `#` comments) and then overridden by key=value arguments.

Common keys
  t, R                  reduced temperature and radius, or instead:
  a2, b2, c2, L, R0     material constants (nondimensionalized internally)
  n                     profile grid size               (default 2000)
  grid_n                lattice nodes per axis          (default 48)
  out_dir               output directory                (default .)
  seed                  random seed                     (default 0)
  order                 sphere quadrature order         (default 32)
  threads               worker threads                  (default 1)

relax / compare keys
  init                  hedgehog | perturbed_hedgehog | frozen_boundary_extension
  dt_factor             dt = dx^2 / dt_factor           (default 7)
  max_steps, tol        stopping controls               (default 500, 1e-8)
  checkpoint_every      steps between checkpoints       (default 0 = off)
  resume                path to a checkpoint .json
  semi_implicit         treat the linear term implicitly (default false)

energy keys
  field                 harmonic | hedgehog             (default hedgehog)
  method                radial | grid                   (default radial)
  scan_radii            emit scan.csv with K radii      (default 0 = off)
";

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) | Error::Domain(_) => 1,
        Error::SolverFailure { .. } => 2,
        Error::Instability(_) | Error::Divergence(_) => 3,
    }
}

fn parse_args(args: &[String]) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::default();
    let mut file_cfg: Option<RunConfig> = None;
    let mut overrides: Vec<String> = Vec::new();
    let mut i = 0;
    while i < args.len() {
        match args[i].as_str() {
            "--config" => {
                let path = args.get(i + 1).ok_or_else(|| {
                    Error::InvalidParameter("--config needs a file path".into())
                })?;
                file_cfg = Some(RunConfig::from_file(Path::new(path))?);
                i += 2;
            }
            arg if arg.contains('=') && !arg.starts_with('-') => {
                overrides.push(arg.to_string());
                i += 1;
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unexpected argument `{other}`"
                )))
            }
        }
    }
    if let Some(f) = file_cfg {
        cfg = f;
    }
    for pair in overrides {
        cfg.set_pair(&pair)?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        eprintln!("{USAGE}");
        return ExitCode::from(1);
    };
    if command == "--help" || command == "-h" || command == "help" {
        println!("{USAGE}");
        return ExitCode::SUCCESS;
    }

    let cfg = match parse_args(&args[1..]) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("ldg: {e}");
            return ExitCode::from(1);
        }
    };

    let outcome = match command.as_str() {
        "profile" => commands::cmd_profile(&cfg).map(|()| true),
        "verify" => commands::cmd_verify(&cfg),
        "energy" => commands::cmd_energy(&cfg).map(|()| true),
        "relax" => commands::cmd_relax(&cfg).map(|()| true),
        "compare" => commands::cmd_compare(&cfg).map(|()| true),
        other => {
            eprintln!("ldg: unknown subcommand `{other}`\n{USAGE}");
            return ExitCode::from(1);
        }
    };

    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("ldg: verification checks failed (see verify.json)");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("ldg: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
