//! Subcommand implementations. Each returns a JSON value to be written to the
//! output path (or stdout) and maps library failures onto exit codes.

use std::path::Path;

use moduli::decompositions::BracketSpace;
use moduli::graph_poisson::{fr_vs_kstar, goldman_comparison, kk_goldman, pants_graph};
use moduli::holonomy::{generator_holonomies, holonomy, sigma_check, xi_map, Catalogue};
use moduli::lie_core::build_algebra;
use moduli::linalg::{eye, from_json_rows, random_sl, random_su, to_json_rows, CMat};
use moduli::orbits_moment::{gauge_fix, solve_moment_kstar, solve_moment_zero, Level, SolverOptions};
use moduli::verify::{kstar_test_pairs, run_suite, SUITES};
use moduli::ModuliError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::report::Report;
use crate::CliError;

fn lib_err(e: ModuliError) -> CliError {
    match e {
        ModuliError::SchemaError(_) | ModuliError::MissingIntersectionData(_, _) | ModuliError::InvalidRank(_) => {
            CliError::Config(e.to_string())
        }
        _ => CliError::Failure(e.to_string()),
    }
}

fn rows(m: &CMat) -> Value {
    json!(to_json_rows(m))
}

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions { tol: cfg.tolerances.constraint, ..SolverOptions::default() }
}

/// Three matrices from an input file (`matrices`, `points` or `residues`
/// key), or a gauge-fixed zero-level solution for the configured spectra.
pub fn load_point(cfg: &RunConfig, input: Option<&Path>) -> Result<Vec<CMat>, CliError> {
    let Some(path) = input else {
        let alg = build_algebra(cfg.n).map_err(lib_err)?;
        let sol = solve_moment_zero(&alg, &cfg.spectra()?, cfg.seed, &solver_options(cfg)).map_err(lib_err)?;
        return Ok(gauge_fix(&alg, None, &sol).map_err(lib_err)?.points);
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let list = ["matrices", "points", "residues"]
        .iter()
        .find_map(|k| v.get(*k))
        .ok_or_else(|| CliError::Config("input needs a `matrices`, `points` or `residues` array".into()))?;
    let mats: Vec<Vec<Vec<[f64; 2]>>> =
        serde_json::from_value(list.clone()).map_err(|e| CliError::Config(format!("input matrices: {e}")))?;
    let out: Vec<CMat> = mats
        .iter()
        .map(|m| from_json_rows(m).ok_or_else(|| CliError::Config("ragged matrix in input".into())))
        .collect::<Result<_, _>>()?;
    if out.len() != 3 || out.iter().any(|m| m.nrows() != cfg.n || m.ncols() != cfg.n) {
        return Err(CliError::Config(format!("input must hold three {0}x{0} matrices", cfg.n)));
    }
    Ok(out)
}

pub fn verify(cfg: &RunConfig) -> Result<Report, CliError> {
    let names: Vec<String> = if cfg.suites.iter().any(|s| s == "all") {
        SUITES.iter().map(|s| s.to_string()).collect()
    } else {
        cfg.suites.clone()
    };
    if let Some(bad) = names.iter().find(|s| !SUITES.contains(&s.as_str())) {
        return Err(CliError::Config(format!("unknown suite `{bad}` (known: {})", SUITES.join(", "))));
    }
    let sc = cfg.suite_config();
    let results = names.par_iter().map(|s| run_suite(s, &sc)).collect::<Result<Vec<_>, _>>().map_err(lib_err)?;
    Ok(Report::new(cfg, results))
}

pub fn solve(cfg: &RunConfig, level: Level) -> Result<Value, CliError> {
    let hs = cfg.spectra()?;
    let opts = solver_options(cfg);
    let sol = match level {
        Level::Zero => solve_moment_zero(&build_algebra(cfg.n).map_err(lib_err)?, &hs, cfg.seed, &opts),
        Level::KStar => solve_moment_kstar(&cfg.poisson_lie()?, &hs, cfg.seed, &opts),
    };
    let sol = sol.map_err(|e| match e {
        ModuliError::NoSolution { best_residual } => CliError::Failure(format!(
            "no solution: best residual {best_residual:.6e} after {} restarts",
            opts.restarts
        )),
        e => lib_err(e),
    })?;
    serde_json::to_value(sol).map_err(|e| CliError::Failure(e.to_string()))
}

pub fn map_xi(cfg: &RunConfig, input: Option<&Path>) -> Result<Value, CliError> {
    let x = load_point(cfg, input)?;
    let conn = xi_map(&x[0], &x[1], &x[2], cfg.t).map_err(lib_err)?;
    let tol = cfg.tolerances.ode;
    let holes = generator_holonomies(&conn, tol).map_err(lib_err)?;
    let fig = pants_graph();
    let a = fig.connection_from(&conn, tol).map_err(lib_err)?;
    let g = fig.g_triple(&conn, &a, tol).map_err(lib_err)?;
    Ok(json!({
        "connection": conn,
        "hole_holonomies": holes.iter().map(rows).collect::<Vec<_>>(),
        "matrices": g.iter().map(rows).collect::<Vec<_>>(),
    }))
}

pub fn map_chi(cfg: &RunConfig, input: Option<&Path>) -> Result<Value, CliError> {
    let g = load_point(cfg, input)?;
    let pl = cfg.poisson_lie()?;
    let ks = moduli::graph_poisson::chi_map(&pl, &g);
    let prod = &ks[0].matrix * &ks[1].matrix * &ks[2].matrix;
    Ok(json!({
        "kstars": ks,
        "product_residual": (prod - eye(cfg.n)).norm(),
        "matrices": ks.iter().map(|k| rows(&k.matrix)).collect::<Vec<_>>(),
    }))
}

fn entry_fn(spec: &str) -> Result<impl Fn(&CMat) -> f64, CliError> {
    let parts: Vec<&str> = spec.split(',').collect();
    let bad = || CliError::Config(format!("entry spec `{spec}` must look like `0,1,re`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let i: usize = parts[0].trim().parse().map_err(|_| bad())?;
    let j: usize = parts[1].trim().parse().map_err(|_| bad())?;
    let im = match parts[2].trim() {
        "re" => false,
        "im" => true,
        _ => return Err(bad()),
    };
    Ok(move |m: &CMat| if im { m[(i, j)].im } else { m[(i, j)].re })
}

pub fn bracket(cfg: &RunConfig, kind: &str, operands: &[String], input: Option<&Path>) -> Result<Value, CliError> {
    let need = |k: usize| {
        if operands.len() == k {
            Ok(())
        } else {
            Err(CliError::Config(format!("`{kind}` takes {k} operands, got {}", operands.len())))
        }
    };
    let tol = cfg.tolerances.ode;
    let h = cfg.tolerances.fd;
    match kind {
        "kk" | "goldman" => {
            need(2)?;
            let x = load_point(cfg, input)?;
            let conn = xi_map(&x[0], &x[1], &x[2], cfg.t).map_err(lib_err)?;
            let alg = build_algebra(cfg.n).map_err(lib_err)?;
            let cat = Catalogue::builtin();
            if kind == "kk" {
                let v = kk_goldman(
                    &alg,
                    &conn,
                    cat.get(&operands[0]).map_err(lib_err)?,
                    cat.get(&operands[1]).map_err(lib_err)?,
                    h,
                    tol,
                )
                .map_err(lib_err)?;
                Ok(json!({ "kind": "kk", "pair": operands, "value": [v.re, v.im] }))
            } else {
                let cmp = goldman_comparison(&alg, &conn, cat, &operands[0], &operands[1], h, tol).map_err(lib_err)?;
                serde_json::to_value(cmp).map_err(|e| CliError::Failure(e.to_string()))
            }
        }
        "fr" => {
            need(1)?;
            let pairs = kstar_test_pairs();
            let idx: usize = operands[0].parse().ok().filter(|i| *i < pairs.len()).ok_or_else(|| {
                CliError::Config(format!("fr operand must be a test-pair index below {}", pairs.len()))
            })?;
            let x = load_point(cfg, input)?;
            let conn = xi_map(&x[0], &x[1], &x[2], cfg.t).map_err(lib_err)?;
            let fig = pants_graph();
            let a = fig.connection_from(&conn, tol).map_err(lib_err)?;
            let g = fig.g_triple(&conn, &a, tol).map_err(lib_err)?;
            let pl = cfg.poisson_lie()?;
            let (f, q) = &pairs[idx];
            let cmp = fr_vs_kstar(&fig, &pl, &pl.stencil(h), &**f, &**q, &g).map_err(lib_err)?;
            Ok(json!({ "kind": "fr", "pair": idx, "comparison": cmp }))
        }
        "sklyanin" => {
            need(3)?;
            let space = match operands[0].as_str() {
                "compact" => BracketSpace::CompactGroup,
                "dual" => BracketSpace::DualGroup,
                "double" => BracketSpace::HeisenbergDouble,
                s => return Err(CliError::Config(format!("unknown space `{s}` (compact|dual|double)"))),
            };
            let (f, g) = (entry_fn(&operands[1])?, entry_fn(&operands[2])?);
            let pl = cfg.poisson_lie()?;
            let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
            let point = match space {
                BracketSpace::CompactGroup => random_su(cfg.n, &mut r),
                BracketSpace::DualGroup => pl.pi_r_star(&random_sl(cfg.n, &mut r)).matrix,
                BracketSpace::HeisenbergDouble => random_sl(cfg.n, &mut r),
            };
            for spec in &operands[1..] {
                let idx: Vec<usize> = spec.split(',').take(2).filter_map(|s| s.trim().parse().ok()).collect();
                if idx.iter().any(|&i| i >= cfg.n) {
                    return Err(CliError::Config(format!("entry spec `{spec}` out of range for n = {}", cfg.n)));
                }
            }
            let st = pl.stencil(h);
            let fg = pl.sklyanin_eval(space, &f, &g, &point, &st).map_err(lib_err)?;
            let gf = pl.sklyanin_eval(space, &g, &f, &point, &st).map_err(lib_err)?;
            Ok(json!({ "kind": "sklyanin", "space": space, "point": rows(&point), "value": fg, "reversed": gf }))
        }
        other => Err(CliError::Config(format!("unknown bracket kind `{other}` (kk|goldman|fr|sklyanin)"))),
    }
}

pub fn holonomy_cmd(
    cfg: &RunConfig,
    contour: &str,
    catalogue: Option<&Path>,
    input: Option<&Path>,
) -> Result<Value, CliError> {
    let owned;
    let cat = match catalogue {
        Some(p) => {
            owned = Catalogue::load(p).map_err(|e| CliError::Config(e.to_string()))?;
            &owned
        }
        None => Catalogue::builtin(),
    };
    let c = cat.get(contour).map_err(|e| CliError::Config(e.to_string()))?;
    let x = load_point(cfg, input)?;
    let conn = xi_map(&x[0], &x[1], &x[2], cfg.t).map_err(lib_err)?;
    let tol = cfg.tolerances.ode;
    let hol = holonomy(&conn, c, tol).map_err(lib_err)?;
    let sigma = sigma_check(&conn, c, tol).map_err(lib_err)?;
    let tr = hol.trace();
    Ok(json!({ "contour": contour, "holonomy": rows(&hol), "trace": [tr.re, tr.im], "sigma_residual": sigma }))
}
