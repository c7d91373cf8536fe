use std::path::PathBuf;

use anyhow::{Context, Result};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use qwalk_core::emulate::{estimate_with_errors, EmulationConfig};
use qwalk_core::spectral::{
    analyze, sweep_overlap_coin, sweep_overlap_phase, LatticeSpec, LocalizationCriterion, OverlapRow,
};
use qwalk_core::walk::{evolve, sweep_coin, sweep_phase};
use qwalk_core::{make_initial, CoinAngle, CoinState, DefectSpec, WalkConfig};

use crate::grid::parse_grid;
use crate::output::{json_num, Cell, Run, Table};
use crate::{InitCoin, OutArgs, SweepParam, Usage, WalkArgs};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn grid(spec: &str) -> Result<Vec<f64>> {
    parse_grid(spec).map_err(|e| usage(format!("--values: {e}")))
}

fn initial_coin(args: &WalkArgs) -> Result<CoinState> {
    if let Some(text) = &args.init_amps {
        let parts: Vec<f64> = text
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| usage(format!("--init-amps: {e}")))?;
        let [hr, hi, vr, vi] = parts.as_slice() else {
            return Err(usage("--init-amps takes re_h,im_h,re_v,im_v"));
        };
        return Ok(CoinState::normalized(
            Complex64::new(*hr, *hi),
            Complex64::new(*vr, *vi),
        )?);
    }
    Ok(match args.init {
        InitCoin::Antisym => CoinState::antisymmetric(),
        InitCoin::Minus => CoinState::minus(),
        InitCoin::H => CoinState::horizontal(),
        InitCoin::V => CoinState::vertical(),
    })
}

fn walk_config(args: &WalkArgs) -> Result<WalkConfig> {
    let coin = CoinAngle::from_degrees(args.theta)?;
    let mut cfg = WalkConfig::new(args.steps, coin).with_initial(args.initial_site, initial_coin(args)?);
    if let Some(phi) = args.phi {
        cfg = cfg.with_defect(DefectSpec::new(args.defect_site, phi)?);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn complex_json(z: Complex64) -> Value {
    json!([json_num(z.re), json_num(z.im)])
}

fn config_json(cfg: &WalkConfig) -> Value {
    json!({
        "steps": cfg.steps,
        "theta_deg": json_num(cfg.coin.degrees()),
        "theta_rad": json_num(cfg.coin.radians()),
        "degenerate_coin": cfg.degenerate_coin(),
        "defect": cfg.defect.map(|d| json!({
            "site": d.site(),
            "phi_deg": json_num(d.phase_deg()),
            "phi_rad": json_num(d.phase_rad()),
        })),
        "initial_site": cfg.initial_site,
        "initial_coin": {
            "h": complex_json(cfg.initial_coin.amp_h()),
            "v": complex_json(cfg.initial_coin.amp_v()),
        },
        "recurrence_site": cfg.recurrence_site(),
    })
}

fn nums(xs: &[f64]) -> Value {
    Value::from(xs.iter().map(|&x| json_num(x)).collect::<Vec<_>>())
}

pub fn walk(args: &WalkArgs, out: &OutArgs) -> Result<PathBuf> {
    let cfg = walk_config(args)?;
    let rec = evolve(&cfg)?;
    let mut run = Run::start(&out.out_dir, out.format, "walk")?;

    let mut table = Table::new(&["step", "x", "p"]);
    for (t, dist) in rec.distributions.iter().enumerate() {
        for (x, p) in dist.iter() {
            table.push(vec![Cell::Int(t as i64), Cell::Int(x), Cell::Num(p)]);
        }
    }
    run.table("walk_distribution", &table)?;

    let config = config_json(&cfg);
    run.json(
        "walk_summary",
        &json!({
            "config": config,
            "final_variance": json_num(rec.final_variance()),
            "final_recurrence": json_num(rec.final_recurrence()),
            "recurrence_site": rec.recurrence_site,
            "variance": nums(&rec.variances),
            "recurrence": nums(&rec.recurrence),
        }),
    )?;
    run.finish(config, out.seed, Map::new())
}

pub fn sweep(param: SweepParam, values: &str, args: &WalkArgs, out: &OutArgs) -> Result<PathBuf> {
    let grid = grid(values)?;
    let (rows, name) = match param {
        SweepParam::Phi => {
            if args.no_defect {
                return Err(usage("a phase sweep needs a defect; drop --no-defect"));
            }
            let mut base = walk_config(args)?;
            base = base.with_defect(DefectSpec::new(args.defect_site, 0.0)?);
            (sweep_phase(&base, &grid)?, "sweep_phi")
        }
        SweepParam::Theta => {
            let base = walk_config(args)?;
            (sweep_coin(&base, &grid)?, "sweep_theta")
        }
    };
    let mut run = Run::start(&out.out_dir, out.format, "sweep")?;
    let mut table = Table::new(&["parameter", "variance", "recurrence"]);
    for r in &rows {
        table.push(vec![
            Cell::Num(r.parameter_deg),
            Cell::Num(r.variance),
            Cell::Num(r.recurrence),
        ]);
    }
    run.table(name, &table)?;

    let mut config = config_json(&walk_config(args)?);
    config["sweep"] = json!({
        "param": name.trim_start_matches("sweep_"),
        "values": nums(&grid),
        "defect_site": args.defect_site,
    });
    run.finish(config, out.seed, Map::new())
}

pub struct SpectrumArgs {
    pub lattice: usize,
    pub radius: usize,
    pub mass_threshold: f64,
    pub sweep_phi: Option<String>,
    pub sweep_theta: Option<String>,
}

fn overlap_table(rows: &[OverlapRow]) -> Table {
    let mut table = Table::new(&["parameter", "overlap", "localized_count", "degenerate", "boundary_point"]);
    for r in rows {
        table.push(vec![
            Cell::Num(r.parameter_deg),
            Cell::Num(r.overlap),
            Cell::Int(r.localized_count as i64),
            Cell::Bool(r.degenerate),
            Cell::Bool(r.boundary_point),
        ]);
    }
    table
}

pub fn spectrum(args: &WalkArgs, spec_args: &SpectrumArgs, out: &OutArgs) -> Result<PathBuf> {
    if !(spec_args.mass_threshold > 0.0 && spec_args.mass_threshold <= 1.0) {
        return Err(usage("--mass-threshold must lie in (0, 1]"));
    }
    let coin = CoinAngle::from_degrees(args.theta)?;
    // no defect is the same lattice as a zero phase
    let phi = if args.no_defect { 0.0 } else { args.phi.unwrap_or(0.0) };
    let lattice = LatticeSpec::new(spec_args.lattice, coin, DefectSpec::new(args.defect_site, phi)?)?;
    let initial = make_initial(args.initial_site, initial_coin(args)?);
    let criterion = LocalizationCriterion {
        radius: spec_args.radius,
        mass_threshold: spec_args.mass_threshold,
    };
    let sweep = match (&spec_args.sweep_phi, &spec_args.sweep_theta) {
        (Some(g), _) => Some(("phi", grid(g)?)),
        (None, Some(g)) => Some(("theta", grid(g)?)),
        (None, None) => None,
    };

    let report = analyze(&lattice, &initial, &criterion)?;
    let mut run = Run::start(&out.out_dir, out.format, "spectrum")?;

    let mut table = Table::new(&[
        "index",
        "re",
        "im",
        "phase_deg",
        "ipr",
        "mass_near_defect",
        "localized",
        "weight",
    ]);
    for (i, z) in report.eigenvalues.iter().enumerate() {
        table.push(vec![
            Cell::Int(i as i64),
            Cell::Num(z.re),
            Cell::Num(z.im),
            Cell::Num(z.arg().to_degrees()),
            Cell::Num(report.ipr[i]),
            Cell::Num(report.mass_near_defect[i]),
            Cell::Bool(report.localized[i]),
            Cell::Num(report.weights[i]),
        ]);
    }
    run.table("spectrum_eigenvalues", &table)?;

    let config = json!({
        "lattice_sites": lattice.num_sites(),
        "first_site": lattice.first_site(),
        "last_site": lattice.last_site(),
        "theta_deg": json_num(coin.degrees()),
        "theta_rad": json_num(coin.radians()),
        "defect": {
            "site": lattice.defect().site(),
            "phi_deg": json_num(lattice.defect().phase_deg()),
            "phi_rad": json_num(lattice.defect().phase_rad()),
        },
        "initial_site": args.initial_site,
        "initial_coin": {
            "h": complex_json(initial.amp(args.initial_site, 0)),
            "v": complex_json(initial.amp(args.initial_site, 1)),
        },
        "radius": criterion.radius,
        "mass_threshold": json_num(criterion.mass_threshold),
    });
    run.json(
        "spectrum_summary",
        &json!({
            "config": config,
            "localized_count": report.localized_count(),
            "overlap": json_num(report.overlap),
            "localized_eigenvalues": report
                .localized_eigenvalues()
                .into_iter()
                .map(|z| json!({
                    "re": json_num(z.re),
                    "im": json_num(z.im),
                    "phase_deg": json_num(z.arg().to_degrees()),
                }))
                .collect::<Vec<_>>(),
            "degenerate_localized": report.degenerate_localized,
            "max_residual": report.max_residual,
        }),
    )?;

    if let Some((param, values)) = sweep {
        let rows = match param {
            "phi" => sweep_overlap_phase(&lattice, &initial, &values, &criterion)?,
            _ => sweep_overlap_coin(&lattice, &initial, &values, &criterion)?,
        };
        run.table(&format!("spectrum_sweep_{param}"), &overlap_table(&rows))?;
    }
    run.finish(config, out.seed, Map::new())
}

pub fn emulate(args: &WalkArgs, counts: u64, mc_reps: usize, visibility: f64, out: &OutArgs) -> Result<PathBuf> {
    let walk = walk_config(args)?;
    let cfg = EmulationConfig {
        walk,
        counts_per_step: counts,
        mc_reps,
        visibility,
        seed: out.seed,
    };
    cfg.validate()?;
    let table_data = estimate_with_errors(&cfg).context("count emulation")?;
    let mut run = Run::start(&out.out_dir, out.format, "emulate")?;

    let mut counts_table = Table::new(&["step", "x", "count", "p_theory", "p_model", "p_mean", "p_std"]);
    let mut summary = Table::new(&[
        "step",
        "variance_theory",
        "variance_mean",
        "variance_std",
        "recurrence_theory",
        "recurrence_mean",
        "recurrence_std",
        "tv_mean",
        "tv_std",
    ]);
    let site = table_data.recurrence_site;
    for est in &table_data.steps {
        for (i, &c) in est.counts.iter().enumerate() {
            let x = est.offset + i as i64;
            counts_table.push(vec![
                Cell::Int(est.step as i64),
                Cell::Int(x),
                Cell::Int(c as i64),
                Cell::Num(est.theory.prob(x)),
                Cell::Num(est.model.prob(x)),
                Cell::Num(est.prob_mean[i]),
                Cell::OptNum(est.prob_std.as_ref().map(|s| s[i])),
            ]);
        }
        summary.push(vec![
            Cell::Int(est.step as i64),
            Cell::Num(est.theory.variance()),
            Cell::Num(est.variance_mean),
            Cell::OptNum(est.variance_std),
            Cell::Num(est.theory.prob(site)),
            Cell::Num(est.recurrence_mean),
            Cell::OptNum(est.recurrence_std),
            Cell::Num(est.tv_mean),
            Cell::OptNum(est.tv_std),
        ]);
    }
    run.table("emulate_counts", &counts_table)?;
    run.table("emulate_summary", &summary)?;

    let mut extra = Map::new();
    extra.insert("rng_algorithm".into(), Value::from(table_data.rng_algorithm.clone()));
    let mut config = config_json(&cfg.walk);
    config["counts_per_step"] = Value::from(counts);
    config["mc_reps"] = Value::from(mc_reps);
    config["visibility"] = json_num(visibility);
    run.finish(config, out.seed, extra)
}
