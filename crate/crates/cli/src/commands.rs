use std::fs;
use std::path::{Path, PathBuf};

use reliefnav::coverage::{best_pair, PairChoice};
use reliefnav::field::{parse_grid, parse_roads, rasterize_roads, serialize_grid, synth_field, Field, SynthSpec};
use reliefnav::fleet::{default_catalog, read_catalog, DroneSpec, RangeModel};
use reliefnav::io::{self, FieldMeta, ResultRow, RouteSummary};
use reliefnav::packing::{
    configure_container, default_package_catalog, enumerate_plans, med_units, read_destinations, read_package_catalog,
    ContainerConfig, GaConfig, PackageUnit, PlanTable, ISO_20FT_INTERIOR_IN, MED_KINDS,
};
use reliefnav::sensitivity::{
    filter_by_coverage, fit_lognormal, histogram, knn_rule_comparison, median_home_coverage, regress, run_param_study,
    FitResult, Regression, RuleSummary,
};
use reliefnav::siting::{assign_drones, select_k, AssignConfig, BaseDrones, BasePlan, SitingConfig};
use reliefnav::walker::{batch_params, run_batch, Cell, RouteResult, Scenario, WalkParams};
use serde::Serialize;

use crate::config::RunConfig;
use crate::fail::{require_file, CliError, EXIT_FEW_ROUTES, EXIT_MALFORMED, EXIT_MISSING};

type CmdResult<T = ()> = Result<T, CliError>;

fn create_dir(dir: &Path) -> CmdResult {
    fs::create_dir_all(dir).map_err(|e| CliError::new(EXIT_MISSING, format!("cannot create {}: {e}", dir.display())))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> CmdResult {
    Ok(io::write_bytes(path, bytes.as_ref())?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CmdResult {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(path, text)
}

fn read_required(path: Option<&PathBuf>, what: &str) -> CmdResult<String> {
    let path = path.ok_or_else(|| CliError::new(EXIT_MISSING, format!("{what} file not configured")))?;
    require_file(path, what)?;
    Ok(io::read_to_string(path)?)
}

fn catalog(cfg: &RunConfig) -> CmdResult<Vec<DroneSpec<f64>>> {
    match &cfg.drones {
        Some(_) => Ok(read_catalog(read_required(cfg.drones.as_ref(), "drone catalog")?.as_bytes())?),
        None => Ok(default_catalog()),
    }
}

fn package_units(cfg: &RunConfig) -> CmdResult<[PackageUnit; MED_KINDS]> {
    let catalog = match &cfg.packages {
        Some(_) => read_package_catalog(read_required(cfg.packages.as_ref(), "package catalog")?.as_bytes())?,
        None => default_package_catalog(),
    };
    Ok(med_units(&catalog)?)
}

pub fn build_field(cfg: &RunConfig) -> CmdResult<Field> {
    let field = if let Some(template) = &cfg.synth {
        synth_field(&SynthSpec {
            template: template.clone(),
            n_rows: cfg.synth_rows,
            n_cols: cfg.synth_cols,
            cell_size_m: cfg.cell_size_m,
            ..Default::default()
        })?
    } else {
        let (altitude, meta) = parse_grid(&read_required(cfg.altitude.as_ref(), "altitude")?)?;
        if cfg.importance.is_some() {
            let (importance, imp_meta) = parse_grid(&read_required(cfg.importance.as_ref(), "importance")?)?;
            if (imp_meta.n_rows, imp_meta.n_cols) != (meta.n_rows, meta.n_cols) {
                return Err(reliefnav::Error::Dimension(format!(
                    "importance grid is {}x{}, altitude grid is {}x{}",
                    imp_meta.n_rows, imp_meta.n_cols, meta.n_rows, meta.n_cols
                ))
                .into());
            }
            Field::from_importance(meta, altitude, &importance)?
        } else {
            let roads = parse_roads(&read_required(cfg.roads.as_ref(), "roads")?)?;
            let classes = rasterize_roads(&roads, &meta, cfg.buffer_m);
            Field::new(meta, altitude, classes)?
        }
    };
    let dir = cfg.field_dir();
    create_dir(&dir)?;
    write(&dir.join("altitude.asc"), serialize_grid(&field.altitude_layer(), field.meta()))?;
    write(&dir.join("importance.asc"), serialize_grid(&field.importance_layer(), field.meta()))?;
    write_json(&dir.join("meta.json"), &FieldMeta::of(&field))?;
    Ok(field)
}

fn load_field(cfg: &RunConfig) -> CmdResult<Field> {
    let dir = cfg.field_dir();
    let (alt, imp) = (dir.join("altitude.asc"), dir.join("importance.asc"));
    for p in [&alt, &imp] {
        if !p.is_file() {
            return Err(CliError::new(EXIT_MISSING, format!("field bundle not found: {} (run build-field first)", p.display())));
        }
    }
    Ok(io::load_field_bundle(alt, imp)?)
}

#[derive(Serialize)]
struct BaseReport {
    base: usize,
    lat: f64,
    lon: f64,
    destinations: Vec<String>,
    drones: BaseDrones,
    daily_demand: [f64; MED_KINDS],
    container: Option<ContainerConfig>,
}

#[derive(Serialize)]
struct PlanReport {
    plans: PlanTable,
    siting: BasePlan,
    bases: Vec<BaseReport>,
}

pub fn plan(cfg: &RunConfig) -> CmdResult<()> {
    let seed = cfg.seed()?;
    let field = load_field(cfg)?;
    let dests = read_destinations(read_required(cfg.destinations.as_ref(), "destinations")?.as_bytes())?;
    let catalog = catalog(cfg)?;
    let units = package_units(cfg)?;
    let range = RangeModel::new(cfg.range_k)?;
    let table = enumerate_plans(&dests, &catalog, &range, &units, &GaConfig { seed, ..Default::default() })?;
    let samples = field.sample_road_points(10 * dests.len());
    let siting = SitingConfig {
        seed,
        k_max: cfg.k_max,
        restarts: cfg.kmeans_restarts,
        weight_step: cfg.oversample_step,
        ..Default::default()
    };
    let sites = select_k(&dests, &samples, &table, &siting)?;
    let assign = AssignConfig { redundancy: cfg.redundancy, recon_model: Some(cfg.recon_model.clone()), ..Default::default() };
    let drones = assign_drones(&sites, &dests, &table, &catalog, &assign);

    let mut bases = Vec::with_capacity(sites.k);
    for (j, base_drones) in drones.into_iter().enumerate() {
        let mut demand = [0.0; MED_KINDS];
        for d in dests.iter().filter(|d| sites.partition.get(&d.name) == Some(&j)) {
            for (slot, &n) in demand.iter_mut().zip(&d.demand) {
                *slot += f64::from(n);
            }
        }
        let crates: Vec<(&DroneSpec<f64>, u32)> = base_drones
            .counts
            .iter()
            .filter_map(|(model, &n)| catalog.iter().find(|d| &d.model == model).map(|d| (d, n)))
            .collect();
        let container = if demand.iter().any(|&d| d > 0.0) {
            Some(configure_container(ISO_20FT_INTERIOR_IN, &crates, demand, &units, demand, cfg.fill_efficiency)?)
        } else {
            None
        };
        if let Some(w) = &base_drones.warning {
            eprintln!("warning: {w}");
        }
        bases.push(BaseReport {
            base: j,
            lat: sites.centroids[j].0,
            lon: sites.centroids[j].1,
            destinations: sites.clusters[j].clone(),
            drones: base_drones,
            daily_demand: demand,
            container,
        });
    }
    for b in &bases {
        println!(
            "base {}: ({:.4}, {:.4}) serves {} | drones {:?} | supporting days {}",
            b.base,
            b.lat,
            b.lon,
            b.destinations.join(", "),
            b.drones.counts,
            b.container.as_ref().and_then(|c| c.supporting_days).map_or("-".into(), |d| d.to_string())
        );
    }
    create_dir(&cfg.out)?;
    write_json(&cfg.plan_path(), &PlanReport { plans: table, siting: sites, bases })
}

fn origin(cfg: &RunConfig, field: &Field) -> CmdResult<Cell> {
    match (cfg.origin_row, cfg.origin_col) {
        (Some(r), Some(c)) if field.in_bounds(r as isize, c as isize) && field.is_walkable(r, c) => return Ok((r, c)),
        (Some(r), Some(c)) => return Err(CliError::new(EXIT_MALFORMED, format!("origin cell ({r}, {c}) is not walkable"))),
        (None, None) => {}
        _ => return Err(CliError::new(EXIT_MALFORMED, "origin_row and origin_col must be given together")),
    }
    let (lat, lon) = match (cfg.origin_lat, cfg.origin_lon) {
        (Some(lat), Some(lon)) => (lat, lon),
        (None, None) => {
            let path = cfg.plan_path();
            require_file(&path, "base plan")?;
            let plan: serde_json::Value = serde_json::from_str(&io::read_to_string(&path)?)?;
            let sites: BasePlan = serde_json::from_value(plan["siting"].clone())?;
            *sites.centroids.get(cfg.base).ok_or_else(|| {
                CliError::new(EXIT_MALFORMED, format!("base {} requested but the plan has {} bases", cfg.base, sites.k))
            })?
        }
        _ => return Err(CliError::new(EXIT_MALFORMED, "origin_lat and origin_lon must be given together")),
    };
    // Walkers launch from the road network; fields without roads fall back
    // to the closest walkable cell.
    match field.nearest_road(lat, lon) {
        Ok(cell) => Ok(cell),
        Err(_) => Ok(field.nearest_walkable(lat, lon)?),
    }
}

fn walk_params(cfg: &RunConfig) -> CmdResult<WalkParams> {
    let mfd_m = match cfg.mfd_m {
        Some(m) => m,
        None => catalog(cfg)?
            .iter()
            .find(|d| d.model == cfg.recon_model)
            .ok_or_else(|| CliError::new(EXIT_MALFORMED, format!("recon model `{}` is not in the catalog", cfg.recon_model)))?
            .mfd_m(),
    };
    let p = WalkParams {
        alpha: cfg.alpha,
        beta: cfg.beta,
        mfd_m,
        knn_rule: cfg.knn_rule,
        decay: cfg.decay,
        max_proposals: cfg.max_proposals,
        max_climb_m: cfg.max_climb_m,
        ..Default::default()
    };
    p.validate()?;
    Ok(p)
}

fn write_results(path: &Path, rows: &[ResultRow]) -> CmdResult {
    let mut buf = Vec::new();
    io::write_results_csv(rows, &mut buf)?;
    write(path, buf)
}

/// Home routes ranked by coverage, best first; ties keep batch order.
fn ranked_home(results: &[RouteResult]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..results.len()).filter(|&i| results[i].scenario == Scenario::Home).collect();
    idx.sort_by(|&a, &b| results[b].coverage.total_cmp(&results[a].coverage).then(a.cmp(&b)));
    idx
}

pub fn walk(cfg: &RunConfig) -> CmdResult<()> {
    let seed = cfg.seed()?;
    if cfg.batch == 0 {
        return Err(CliError::new(EXIT_MALFORMED, "batch must be at least 1"));
    }
    let field = load_field(cfg)?;
    let start = origin(cfg, &field)?;
    let base = walk_params(cfg)?;
    let results = run_batch(&field, start, &batch_params(&base, seed, cfg.batch), None)?;
    create_dir(&cfg.out)?;
    write_results(&cfg.out.join("results.csv"), &results.iter().map(ResultRow::from).collect::<Vec<_>>())?;

    let dir = cfg.routes_dir();
    create_dir(&dir)?;
    clear_routes(&dir)?;
    let top = ranked_home(&results);
    for (rank, &i) in top.iter().take(cfg.top_n).enumerate() {
        let r = &results[i];
        let stem = dir.join(format!("route_{rank:03}"));
        write(&stem.with_extension("csv"), io::route_csv(r, field.cell_size_m()))?;
        write_json(&stem.with_extension("json"), &RouteSummary::from(r))?;
        write(&stem.with_extension("pgm"), io::route_pgm(&field, &[&r.cells]))?;
    }
    let homes = top.len();
    println!(
        "{} walks from cell {:?}: {homes} home, best coverage {}",
        results.len(),
        start,
        top.first().map_or("-".into(), |&i| format!("{:.3}", results[i].coverage))
    );
    Ok(())
}

fn route_stems(dir: &Path) -> CmdResult<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::new(EXIT_MISSING, format!("routes directory not found: {}: {e}", dir.display())))?;
    let mut stems: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.file_stem().is_some_and(|s| s.to_string_lossy().starts_with("route_")))
        .map(|p| p.with_extension(""))
        .collect();
    stems.sort();
    Ok(stems)
}

fn clear_routes(dir: &Path) -> CmdResult {
    for stem in route_stems(dir)? {
        for ext in ["json", "csv", "pgm"] {
            let p = stem.with_extension(ext);
            if p.exists() {
                fs::remove_file(&p).map_err(|e| CliError::new(EXIT_MISSING, format!("cannot remove {}: {e}", p.display())))?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PairReport {
    first_route: String,
    second_route: String,
    #[serde(flatten)]
    choice: PairChoice,
    knn_rule: reliefnav::walker::KnnRule,
    ccr_area: reliefnav::coverage::CcrArea,
}

pub fn pair(cfg: &RunConfig) -> CmdResult<()> {
    let field = load_field(cfg)?;
    let stems = route_stems(&cfg.routes_dir())?;
    let mut routes = Vec::with_capacity(stems.len());
    for stem in &stems {
        let summary: RouteSummary = serde_json::from_str(&io::read_to_string(stem.with_extension("json"))?)?;
        let cells = io::read_route_csv(io::read_to_string(stem.with_extension("csv"))?.as_bytes())?;
        if let Some(&(r, c)) = cells.iter().find(|&&(r, c)| !field.in_bounds(r as isize, c as isize)) {
            return Err(CliError::new(EXIT_MALFORMED, format!("{}: cell ({r}, {c}) is outside the field", stem.display())));
        }
        routes.push(RouteResult {
            cells,
            distance_m: summary.distance_m,
            scenario: summary.scenario,
            alpha: summary.alpha,
            beta: summary.beta,
            seed: summary.seed,
            coverage: summary.coverage,
            proposals: 0,
        });
    }
    let homes = routes.iter().filter(|r| r.scenario == Scenario::Home).count();
    if homes < 2 {
        return Err(CliError::new(EXIT_FEW_ROUTES, format!("need at least 2 home routes to pair, found {homes}")));
    }
    let choice = best_pair(&routes, &field, cfg.knn_rule, cfg.ccr_area)?;
    let name = |i: usize| stems[i].file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let report = PairReport { first_route: name(choice.first), second_route: name(choice.second), choice, knn_rule: cfg.knn_rule, ccr_area: cfg.ccr_area };
    create_dir(&cfg.out)?;
    write_json(&cfg.out.join("pair.json"), &report)?;
    let cells = [routes[report.choice.first].cells.as_slice(), routes[report.choice.second].cells.as_slice()];
    write(&cfg.out.join("pair.pgm"), io::route_pgm(&field, &cells))?;
    println!(
        "best pair {} + {}: ccr {}",
        report.first_route,
        report.second_route,
        report.choice.report.ccr.map_or("undefined".into(), |v| format!("{v:.4}"))
    );
    Ok(())
}

#[derive(Serialize)]
struct ParamFits {
    alpha: Option<FitResult<f64>>,
    beta: Option<FitResult<f64>>,
}

#[derive(Serialize)]
struct Histograms {
    bins: usize,
    alpha_max: f64,
    beta_max: f64,
    alpha_all: Vec<usize>,
    alpha_kept: Vec<usize>,
    beta_all: Vec<usize>,
    beta_kept: Vec<usize>,
}

#[derive(Serialize)]
struct FitReport {
    threshold: Option<f64>,
    results: usize,
    home: usize,
    kept: usize,
    unfiltered: ParamFits,
    filtered: ParamFits,
    histograms: Histograms,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct RegressionReport {
    n: usize,
    alpha: Option<Regression<f64>>,
    beta: Option<Regression<f64>>,
    notes: Vec<String>,
}

fn try_fit(xs: &[f64], label: &str, notes: &mut Vec<String>) -> Option<FitResult<f64>> {
    fit_lognormal(xs).map_err(|e| notes.push(format!("{label}: {e}"))).ok()
}

fn try_regress(x: &[f64], y: &[f64], label: &str, notes: &mut Vec<String>) -> Option<Regression<f64>> {
    regress(x, y).map_err(|e| notes.push(format!("{label}: {e}"))).ok()
}

pub fn sensitivity(cfg: &RunConfig) -> CmdResult<()> {
    let seed = cfg.seed()?;
    let field = load_field(cfg)?;
    let start = origin(cfg, &field)?;
    let base = walk_params(cfg)?;
    create_dir(&cfg.out)?;

    let results: Vec<RouteResult> = match &cfg.results {
        Some(path) => {
            require_file(path, "results")?;
            io::read_results_csv(io::read_to_string(path)?.as_bytes())?.iter().map(ResultRow::to_route).collect()
        }
        None => {
            let n = cfg.study_size.unwrap_or(cfg.batch);
            let study = run_param_study(&field, start, &base, &cfg.param_dist(), n, seed)?;
            write_results(&cfg.out.join("study.csv"), &study.iter().map(ResultRow::from).collect::<Vec<_>>())?;
            study
        }
    };

    let threshold = cfg.threshold.or_else(|| median_home_coverage(&results));
    let kept = threshold.map_or_else(Vec::new, |t| filter_by_coverage(&results, t));
    let all_a: Vec<f64> = results.iter().map(|r| r.alpha).collect();
    let all_b: Vec<f64> = results.iter().map(|r| r.beta).collect();
    let kept_a: Vec<f64> = kept.iter().map(|r| r.alpha).collect();
    let kept_b: Vec<f64> = kept.iter().map(|r| r.beta).collect();
    let kept_cov: Vec<f64> = kept.iter().map(|r| r.coverage).collect();

    let mut notes = Vec::new();
    if threshold.is_none() {
        notes.push("no home routes, nothing passes the coverage filter".into());
    }
    let bins = cfg.histogram_bins.max(1);
    let alpha_max = all_a.iter().copied().fold(0.0, f64::max);
    let beta_max = all_b.iter().copied().fold(0.0, f64::max);
    let histograms = Histograms {
        bins,
        alpha_max,
        beta_max,
        alpha_all: histogram(&all_a, 0.0, alpha_max, bins),
        alpha_kept: histogram(&kept_a, 0.0, alpha_max, bins),
        beta_all: histogram(&all_b, 0.0, beta_max, bins),
        beta_kept: histogram(&kept_b, 0.0, beta_max, bins),
    };
    let fit = FitReport {
        threshold,
        results: results.len(),
        home: results.iter().filter(|r| r.scenario == Scenario::Home).count(),
        kept: kept.len(),
        unfiltered: ParamFits { alpha: try_fit(&all_a, "unfiltered alpha", &mut notes), beta: try_fit(&all_b, "unfiltered beta", &mut notes) },
        filtered: ParamFits { alpha: try_fit(&kept_a, "filtered alpha", &mut notes), beta: try_fit(&kept_b, "filtered beta", &mut notes) },
        histograms,
        notes,
    };
    write_json(&cfg.out.join("fit.json"), &fit)?;

    let mut notes = Vec::new();
    let reg = RegressionReport {
        n: kept.len(),
        alpha: try_regress(&kept_a, &kept_cov, "alpha", &mut notes),
        beta: try_regress(&kept_b, &kept_cov, "beta", &mut notes),
        notes,
    };
    write_json(&cfg.out.join("regression.json"), &reg)?;

    let knn: Vec<RuleSummary> = knn_rule_comparison(&field, start, &base, cfg.knn_walks, seed)?;
    write_json(&cfg.out.join("knn.json"), &knn)?;
    println!(
        "{} results, {} kept above {}; knn rows {}",
        results.len(),
        kept.len(),
        threshold.map_or("-".into(), |t| format!("{t:.3}")),
        knn.len()
    );
    Ok(())
}

