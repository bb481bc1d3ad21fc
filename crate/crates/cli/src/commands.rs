use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rayon::ThreadPool;
use serde_json::{json, Map, Value};

use specmult_core::cdv::construction_report;
use specmult_core::formulas::{
    cdv_conjecture_target, chromatic_number, chromatic_number_from_euler, colbois_cdv_lower,
    diameter_lower_bound, gauss_bonnet_volume_cap, multiplicity_bound_genus,
    multiplicity_bound_volume, remark_constants, scale_free_quantity, window_bound,
};
use specmult_core::graph::{parse_graph, WeightedGraph};
use specmult_core::kernel::{
    kernel_mass, l1_tail_check, sandwich_fit, variation_ratio_check, KernelCheckReport,
    ModelPlaneParams,
};
use specmult_core::pipeline::{assemble_constants, run_pipeline, PipelineParams};
use specmult_core::spectral::{eigendecompose_default, heat_semigroup, Spectrum};
use specmult_core::suites::{interlace_suite, local_identity_suite, trace_suite, DEFAULT_SEED};
use specmult_core::Error;

use crate::args::{
    BoundArgs, ConstructArgs, FormulaArgs, FormulaName, IdentityArgs, KernelArgs, KernelCheck,
    OperatorKind, SpectrumArgs,
};
use crate::config::{parse_grid, parse_range, ConfigFile};
use crate::output::{to_value, Report, RunManifest, RunVerdict};
use crate::CliError;

/// Mass conservation tolerance for `kernel-cert`.
const MASS_TOL: f64 = 1e-5;
/// Trace-identity suite power cap.
const TRACE_N_MAX: usize = 4;

pub struct Ctx<'a> {
    pub cfg: &'a ConfigFile,
    pub pool: &'a ThreadPool,
}

/// What a command produced: the report plus any side files.
pub struct Outcome {
    pub report: Report,
    pub plain: Option<String>,
    pub extra_files: Vec<(PathBuf, String)>,
}

impl Outcome {
    fn report(report: Report) -> Self {
        Self { report, plain: None, extra_files: Vec::new() }
    }
}

fn load_graph(path: &Path) -> Result<WeightedGraph, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(parse_graph(&text)?.graph)
}

fn spectrum_json(s: &Spectrum) -> Value {
    let groups: Vec<Value> = s
        .groups()
        .into_iter()
        .map(|r| json!({ "value": s.values()[r.start], "multiplicity": r.len() }))
        .collect();
    json!({ "values": s.values(), "group_tol": s.group_tol(), "groups": groups })
}

pub fn spectrum(ctx: &Ctx, a: &SpectrumArgs) -> Result<Outcome, CliError> {
    let operator = match (a.operator, ctx.cfg.raw("operator")) {
        (Some(op), _) => op,
        (None, Some("adjacency")) => OperatorKind::Adjacency,
        (None, Some("laplacian") | None) => OperatorKind::Laplacian,
        (None, Some(other)) => return Err(CliError::Usage(format!("unknown operator {other:?}"))),
    };
    let heat: Option<f64> = ctx.cfg.pick(a.heat, "heat")?;
    if heat.is_some() && operator == OperatorKind::Adjacency {
        return Err(CliError::Usage("--heat applies to the Laplacian only".into()));
    }
    let g = load_graph(&a.graph)?;
    if !g.is_connected() {
        return Err(Error::NotConnected.into());
    }
    let op = match operator {
        OperatorKind::Laplacian => g.laplacian(),
        OperatorKind::Adjacency => g.adjacency(),
    };
    let mut config = Map::new();
    config.insert("graph".into(), json!(a.graph));
    config.insert("operator".into(), json!(format!("{operator:?}").to_lowercase()));
    config.insert("heat".into(), json!(heat));

    let result = match heat {
        None => {
            let mut v = spectrum_json(&eigendecompose_default(&op)?);
            v["dim"] = json!(g.n());
            v
        }
        Some(t) => {
            let h = heat_semigroup(&op, t)?;
            let rows: Vec<Vec<f64>> =
                h.matrix().row_iter().map(|r| r.iter().copied().collect()).collect();
            let mut v = spectrum_json(&eigendecompose_default(&h)?);
            v["dim"] = json!(g.n());
            v["t"] = json!(t);
            v["matrix"] = json!(rows);
            v
        }
    };
    Ok(Outcome::report(Report::new("spectrum", config, true, result)))
}

pub fn bound(ctx: &Ctx, a: &BoundArgs) -> Result<Outcome, CliError> {
    let cfg = ctx.cfg;
    let g = load_graph(&a.graph)?;
    let c = cfg.get(a.c, "c", 1.0)?;
    let base = PipelineParams::for_graph(&g, c)?;
    let params = PipelineParams {
        c,
        chi_cut: cfg.get(a.chi_cut, "chi-cut", base.chi_cut)?,
        heat_cut: cfg.get(a.heat_cut, "heat-cut", base.heat_cut)?,
        r1: cfg.get(a.r1, "r1", base.r1)?,
        r2: cfg.get(a.r2, "r2", base.r2)?,
        t_unit: cfg.get(a.t_unit, "t-unit", base.t_unit)?,
        cell_separation: cfg.get(a.cell_separation, "cell-separation", base.cell_separation)?,
        net_radius: cfg.pick(a.net_radius, "net-radius")?.or(base.net_radius),
        curvature_floor: cfg.get(a.curvature_floor, "curvature-floor", base.curvature_floor)?,
        vertex_diagnostics: a.diagnostics || cfg.get(None, "diagnostics", false)?,
    };
    params.validate()?;

    let mut js = a.j.clone();
    if js.is_empty() {
        js = match cfg.raw("j") {
            Some(text) => text
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Usage(format!("j: {e}")))?,
            None => vec![2],
        };
    }
    js.sort_unstable();
    js.dedup();

    // ordered collect keeps the report order independent of scheduling
    let reports = ctx
        .pool
        .install(|| js.par_iter().map(|&j| run_pipeline(&g, &params, j)).collect::<Vec<_>>())
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let pass = reports.iter().all(|r| r.verdicts.all());

    let mut config = Map::new();
    config.insert("graph".into(), json!(a.graph));
    config.insert("j".into(), json!(js));
    config.insert("params".into(), to_value(&params)?);
    let result = json!({ "reports": to_value(&reports)? });
    Ok(Outcome::report(Report::new("bound", config, pass, result)))
}

pub fn kernel_cert(ctx: &Ctx, a: &KernelArgs) -> Result<Outcome, CliError> {
    let cfg = ctx.cfg;
    let k = cfg.get(a.curvature, "curvature", -1.0)?;
    let heat_cut = cfg.get(a.heat_cut, "heat-cut", 12.0)?;
    let t_text = cfg.get(a.t_grid.clone(), "t-grid", "1,2,4,8".to_string())?;
    let eta_text = cfg.get(a.eta_grid.clone(), "eta-grid", "0:40:1".to_string())?;
    let t_grid = parse_grid(&t_text)?;
    let eta_grid = parse_grid(&eta_text)?;
    let check = match (a.check, cfg.raw("check")) {
        (Some(c), _) => c,
        (None, None) => KernelCheck::All,
        (None, Some(s)) => clap::ValueEnum::from_str(s, true)
            .map_err(|_| CliError::Usage(format!("unknown check {s:?}")))?,
    };
    let defaults = ModelPlaneParams::with_curvature(k)?;
    let params = ModelPlaneParams {
        quad_points: cfg.get(a.quad_points, "quad-points", defaults.quad_points)?,
        quad_cutoff: cfg.get(a.quad_cutoff, "quad-cutoff", defaults.quad_cutoff)?,
        ..defaults
    };
    params.validate()?;
    let csv: Option<PathBuf> = cfg.pick(a.csv.clone(), "csv")?;

    let wants = |c: KernelCheck| check == KernelCheck::All || check == c;
    let (mass, reports) = ctx.pool.install(|| -> Result<_, Error> {
        let mut mass = Vec::new();
        if wants(KernelCheck::Mass) {
            for &t in &t_grid {
                mass.push((t, kernel_mass(t, &params)?));
            }
        }
        let mut reports: Vec<KernelCheckReport> = Vec::new();
        if wants(KernelCheck::Sandwich) {
            reports.push(sandwich_fit(&params, &t_grid, &eta_grid)?);
        }
        if wants(KernelCheck::Tail) {
            reports.push(l1_tail_check(&params, heat_cut, &t_grid)?);
        }
        if wants(KernelCheck::Variation) {
            reports.push(variation_ratio_check(&params, heat_cut, &t_grid, &eta_grid)?);
        }
        Ok((mass, reports))
    })?;

    let mass_error = mass.iter().map(|(_, m)| (m - 1.0).abs()).fold(0.0, f64::max);
    let mass_ok = mass_error <= MASS_TOL;
    let pass = mass_ok && reports.iter().all(|r| r.holds);

    let mut extra_files = Vec::new();
    if let Some(path) = csv {
        if reports.len() == 1 {
            extra_files.push((path, reports[0].to_csv()));
        } else {
            for r in &reports {
                extra_files.push((suffixed(&path, &r.kind), r.to_csv()));
            }
        }
    }

    let mut config = Map::new();
    config.insert("K".into(), json!(k));
    config.insert("heat_cut".into(), json!(heat_cut));
    config.insert("t_grid".into(), json!(t_grid));
    config.insert("eta_grid".into(), json!(eta_grid));
    config.insert("check".into(), json!(format!("{check:?}").to_lowercase()));
    config.insert("model".into(), to_value(&params)?);
    let mut result = Map::new();
    if !mass.is_empty() {
        let rows: Vec<Value> = mass.iter().map(|(t, m)| json!({ "t": t, "mass": m })).collect();
        result.insert(
            "mass".into(),
            json!({ "values": rows, "max_error": mass_error, "tolerance": MASS_TOL, "holds": mass_ok }),
        );
    }
    result.insert("reports".into(), to_value(&reports)?);
    Ok(Outcome {
        report: Report::new("kernel-cert", config, pass, Value::Object(result)),
        plain: None,
        extra_files,
    })
}

/// `out.csv` + `tail` -> `out.tail.csv`.
fn suffixed(path: &Path, kind: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|s| s.to_string_lossy().into_owned()).unwrap_or("csv".into());
    path.with_file_name(format!("{stem}.{kind}.{ext}"))
}

pub fn construct(ctx: &Ctx, a: &ConstructArgs) -> Result<Outcome, CliError> {
    if a.n.is_some() && a.n_range.is_some() {
        return Err(CliError::Usage("give either --n or --n-range".into()));
    }
    // a flag of either kind overrides both config keys
    let ns = match (a.n, &a.n_range) {
        (Some(n), _) => vec![n],
        (_, Some(r)) => parse_range(r)?,
        _ => match (ctx.cfg.raw("n-range"), ctx.cfg.pick::<usize>(None, "n")?) {
            (Some(r), _) => parse_range(r)?,
            (None, Some(n)) => vec![n],
            (None, None) => vec![3],
        },
    };
    let reports = ctx
        .pool
        .install(|| ns.par_iter().map(|&n| construction_report(n)).collect::<Vec<_>>())
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let pass = reports.iter().all(|r| r.near_degenerate_count + 1 >= r.n);
    let mut config = Map::new();
    config.insert("n".into(), json!(ns));
    let result = json!({ "reports": to_value(&reports)? });
    Ok(Outcome::report(Report::new("construct", config, pass, result)))
}

pub fn identities(ctx: &Ctx, a: &IdentityArgs) -> Result<Outcome, CliError> {
    let cfg = ctx.cfg;
    let trials = cfg.get(a.trials, "trials", 1000)?;
    let dim_max = cfg.get(a.dim_max, "dim-max", 20)?;
    let seed = cfg.get(a.seed, "seed", DEFAULT_SEED)?;

    let (interlace, trace, local) = ctx.pool.install(|| -> Result<_, Error> {
        Ok((
            interlace_suite(seed, trials, dim_max)?,
            trace_suite(seed, trials, dim_max, TRACE_N_MAX)?,
            local_identity_suite(seed, trials, dim_max)?,
        ))
    })?;
    let gain_ok = local.gain.all_passed && local.min_gain >= -specmult_core::pipeline::IDENTITY_TOL;
    let manifest = RunManifest::new(vec![
        RunVerdict { name: interlace.name.clone(), pass: interlace.all_passed, detail: to_value(&interlace)? },
        RunVerdict { name: trace.name.clone(), pass: trace.all_passed, detail: to_value(&trace)? },
        RunVerdict {
            name: local.telescoping.name.clone(),
            pass: local.telescoping.all_passed,
            detail: to_value(&local.telescoping)?,
        },
        RunVerdict {
            name: local.gain.name.clone(),
            pass: gain_ok,
            detail: json!({
                "summary": to_value(&local.gain)?,
                "min_gain": local.min_gain,
                "gain_checks": local.gain_checks,
            }),
        },
    ]);
    let mut config = Map::new();
    config.insert("trials".into(), json!(trials));
    config.insert("dim_max".into(), json!(dim_max));
    config.insert("seed".into(), json!(seed));
    config.insert("trace_n_max".into(), json!(TRACE_N_MAX));
    let pass = manifest.aggregate_pass;
    Ok(Outcome::report(Report::new("identities", config, pass, to_value(&manifest)?)))
}

fn need<T>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing --{name}")))
}

pub fn formula(ctx: &Ctx, a: &FormulaArgs) -> Result<Outcome, CliError> {
    let cfg = ctx.cfg;
    let g: Option<i64> = cfg.pick(a.g, "g")?;
    let c0 = cfg.get(a.c0, "c0", 1.0)?;
    let vol: Option<f64> = cfg.pick(a.vol, "vol")?;
    let av: Option<f64> = cfg.pick(a.a, "a")?;
    let bv: Option<f64> = cfg.pick(a.b, "b")?;
    let rho: Option<f64> = cfg.pick(a.rho, "rho")?;
    let delta: Option<f64> = cfg.pick(a.delta, "delta")?;
    let kappa: Option<f64> = cfg.pick(a.kappa, "kappa")?;
    let inj: Option<f64> = cfg.pick(a.inj, "inj")?;
    let kw: Option<f64> = cfg.pick(a.k, "k")?;
    let beta: Option<f64> = cfg.pick(a.beta, "beta")?;
    let c2 = cfg.get(a.c2, "c2", (-1.0f64).exp())?;

    let mut pass = true;
    let value = match a.name {
        FormulaName::MultiplicityGenus => json!(multiplicity_bound_genus(need(g, "g")?, c0)?),
        FormulaName::MultiplicityVolume => json!(multiplicity_bound_volume(need(vol, "vol")?, c0)?),
        FormulaName::RemarkConstants => {
            to_value(&remark_constants(need(av, "a")?, need(bv, "b")?, need(rho, "rho")?, delta)?)?
        }
        FormulaName::ScaleFree => {
            json!(scale_free_quantity(need(vol, "vol")?, need(kappa, "kappa")?, need(inj, "inj")?)?)
        }
        FormulaName::GaussBonnet => json!(gauss_bonnet_volume_cap(need(g, "g")?, need(av, "a")?)?),
        FormulaName::Chromatic => {
            let g = need(g, "g")?;
            let chr = chromatic_number(g)?;
            if chr as f64 != chromatic_number_from_euler(2 - 2 * g) {
                pass = false;
            }
            json!(chr)
        }
        FormulaName::CdvTarget => to_value(&cdv_conjecture_target(need(g, "g")?)?)?,
        FormulaName::Colbois => json!(colbois_cdv_lower(need(g, "g")?)?),
        FormulaName::Diameter => json!(diameter_lower_bound(need(bv, "b")?)?),
        FormulaName::Window => {
            to_value(&window_bound(need(g, "g")?, need(kw, "k")?, need(beta, "beta")?, c0)?)?
        }
        FormulaName::Constants => {
            let choice = assemble_constants(need(bv, "b")?, c2)?;
            let verdicts = choice.verify();
            pass = verdicts.all();
            json!({ "choice": to_value(&choice)?, "verdicts": to_value(&verdicts)? })
        }
    };

    let name = clap::ValueEnum::to_possible_value(&a.name)
        .map(|p| p.get_name().to_string())
        .unwrap_or_default();
    let mut config = Map::new();
    config.insert("name".into(), json!(name));
    for (key, v) in [
        ("c0", Some(c0)),
        ("vol", vol),
        ("a", av),
        ("b", bv),
        ("rho", rho),
        ("delta", delta),
        ("kappa", kappa),
        ("inj", inj),
        ("k", kw),
        ("beta", beta),
        ("c2", Some(c2)),
    ] {
        if let Some(v) = v {
            config.insert(key.into(), json!(v));
        }
    }
    if let Some(g) = g {
        config.insert("g".into(), json!(g));
    }
    let plain = if cfg.get(None, "plain", false)? || a.plain {
        Some(match &value {
            Value::Number(n) => n.to_string(),
            other => other.to_string(),
        })
    } else {
        None
    };
    let result = json!({ "name": name, "value": value });
    Ok(Outcome { report: Report::new("formula", config, pass, result), plain, extra_files: Vec::new() })
}
