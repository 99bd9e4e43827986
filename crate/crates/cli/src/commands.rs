//! The five subcommands. Each writes its CSV and JSON reports and returns
//! whether every verdict passed.

use std::path::Path;

use anyhow::{bail, Context, Result};
use entclt::bounds::{run_suite, SuiteCell, SuiteOptions, VERDICT_NAMES};
use entclt::checks::{
    density_file_checks, run_checks, CheckResult, VerifyOptions, DENSITY_FILE_GROUP,
};
use entclt::distributions::make_density;
use entclt::functionals::profile;
use entclt::ou::{fisher_decay_check, flow_trace};
use entclt::poincare::{muckenhoupt, spectral_gap_1d};
use entclt::{DistributionSpec, Grid, GridMeta};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::report::{flag, num, write_reports, Table};

#[derive(Serialize)]
struct JsonReport<'a, R: Serialize> {
    command: &'a str,
    config: &'a ExperimentConfig,
    pass: bool,
    rows: R,
}

fn meta_header() -> [&'static str; 5] {
    ["n_points", "lo", "hi", "spacing", "tail_mass"]
}

fn meta_cells(m: &GridMeta) -> Vec<String> {
    vec![
        m.n_points.to_string(),
        num(m.lo),
        num(m.hi),
        num(m.spacing),
        num(m.tail_mass),
    ]
}

fn require_scores(cfg: &ExperimentConfig, command: &str) -> Result<()> {
    if let Some(f) = cfg.families.iter().find(|f| !f.admits_score()) {
        bail!(
            "{command} needs families with a score; {} has none",
            f.label()
        );
    }
    Ok(())
}

fn finish<R: Serialize>(
    cfg: &ExperimentConfig,
    command: &str,
    table: &Table,
    rows: R,
    pass: bool,
) -> Result<bool> {
    let json = JsonReport {
        command,
        config: cfg,
        pass,
        rows,
    };
    let [csv, js] = write_reports(&cfg.output_dir, command, table, &json)?;
    println!("wrote {} and {}", csv.display(), js.display());
    println!("{command}: {}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

// ---- profile ----------------------------------------------------------------

#[derive(Serialize)]
struct ProfileRow {
    family: DistributionSpec,
    profile: Option<entclt::Profile>,
    closed_form_rel_fisher: Option<f64>,
    error: Option<String>,
}

pub fn cmd_profile(cfg: &ExperimentConfig) -> Result<bool> {
    let rows: Vec<ProfileRow> = cfg
        .families
        .par_iter()
        .map(|f| {
            let p = make_density::<f64>(f, cfg.n_points).and_then(|g| profile(&g));
            ProfileRow {
                family: f.clone(),
                closed_form_rel_fisher: f.exact_relative_fisher(),
                error: p.as_ref().err().map(ToString::to_string),
                profile: p.ok(),
            }
        })
        .collect();
    let mut table = Table::new(["family"].into_iter().chain(meta_header()).chain([
        "mean",
        "variance",
        "diff_entropy",
        "rel_entropy",
        "fisher",
        "rel_fisher",
        "closed_form_rel_fisher",
        "error",
    ]));
    for r in &rows {
        let mut row = vec![r.family.label()];
        match &r.profile {
            Some(p) => {
                row.extend(meta_cells(&p.grid_meta));
                row.extend(
                    [
                        p.mean,
                        p.variance,
                        p.diff_entropy,
                        p.rel_entropy,
                        p.fisher,
                        p.rel_fisher,
                    ]
                    .map(num),
                );
            }
            None => row.extend(std::iter::repeat_n(String::new(), 11)),
        }
        row.push(r.closed_form_rel_fisher.map(num).unwrap_or_default());
        row.push(r.error.clone().unwrap_or_default());
        table.push(row);
    }
    let pass = rows.iter().all(|r| r.error.is_none());
    finish(cfg, "profile", &table, &rows, pass)
}

// ---- clt ----------------------------------------------------------------------

#[derive(Serialize)]
#[serde(untagged)]
enum CltRow<'a> {
    Report(&'a entclt::bounds::BoundReport<f64>),
    Failed {
        family: &'a str,
        d: usize,
        n: usize,
        error: &'a str,
    },
}

pub fn cmd_clt(cfg: &ExperimentConfig) -> Result<bool> {
    require_scores(cfg, "clt")?;
    let opts = SuiteOptions {
        n_points: cfg.n_points,
        tolerance: cfg.tolerances.bound,
    };
    let suites = cfg
        .families
        .par_iter()
        .map(|f| run_suite::<f64>(f, &cfg.d_list, &cfg.n_list, opts))
        .collect::<entclt::Result<Vec<_>>>()?;
    let cells: Vec<&SuiteCell<f64>> = suites.iter().flatten().collect();

    let mut header: Vec<String> = ["family", "d", "n"].map(String::from).to_vec();
    header.extend(meta_header().map(String::from));
    header.extend(
        [
            "tolerance",
            "ent1",
            "j1",
            "measured_ent",
            "measured_j",
            "measured_w2sq",
            "c_p",
            "c_p_converged",
            "r_used",
            "r_deflated",
            "bound_thm1",
            "bound_propfi",
            "bound_cfp19",
            "cfp19_degenerate",
            "bound_logsobolev",
            "bound_hwi",
            "bound_w2_poincare",
            "emz20_context",
        ]
        .map(String::from),
    );
    for v in VERDICT_NAMES {
        header.push(format!("{v}_slack"));
        header.push(format!("{v}_pass"));
    }
    header.extend(["pass", "error"].map(String::from));
    let mut table = Table::new(header);
    let mut rows = Vec::with_capacity(cells.len());
    for cell in &cells {
        match cell {
            SuiteCell::Report(r) => {
                let mut row = vec![r.family.clone(), r.d.to_string(), r.n.to_string()];
                row.extend(meta_cells(&r.grid_meta));
                row.extend(
                    [
                        r.tolerance,
                        r.ent1,
                        r.j1,
                        r.measured_ent,
                        r.measured_j,
                        r.measured_w2sq,
                        r.c_p,
                    ]
                    .map(num),
                );
                row.push(flag(r.c_p_converged));
                row.extend(
                    [
                        r.r_used,
                        r.r_deflated,
                        r.bound_thm1,
                        r.bound_propfi,
                        r.bound_cfp19,
                    ]
                    .map(num),
                );
                row.push(flag(r.cfp19_degenerate));
                row.extend(
                    [
                        r.bound_logsobolev,
                        r.bound_hwi,
                        r.bound_w2_poincare,
                        r.emz20_context,
                    ]
                    .map(num),
                );
                for v in &r.verdicts {
                    row.push(if v.skipped {
                        "skipped".into()
                    } else {
                        num(v.slack)
                    });
                    row.push(flag(v.pass));
                }
                row.push(flag(r.pass()));
                row.push(String::new());
                table.push(row);
                rows.push(CltRow::Report(r));
            }
            SuiteCell::Failed {
                family,
                d,
                n,
                error,
            } => {
                let mut row = vec![family.clone(), d.to_string(), n.to_string()];
                row.extend(std::iter::repeat_n(String::new(), table.header.len() - 5));
                row.push(flag(false));
                row.push(error.clone());
                table.push(row);
                rows.push(CltRow::Failed {
                    family,
                    d: *d,
                    n: *n,
                    error,
                });
            }
        }
    }
    for cell in &cells {
        match cell {
            SuiteCell::Report(r) => {
                let failed: Vec<&str> = r
                    .verdicts
                    .iter()
                    .filter(|v| !v.pass)
                    .map(|v| v.name)
                    .collect();
                if !failed.is_empty() {
                    println!(
                        "FAIL {} d={} n={}: {}",
                        r.family,
                        r.d,
                        r.n,
                        failed.join(", ")
                    );
                }
            }
            SuiteCell::Failed {
                family,
                d,
                n,
                error,
            } => println!("FAIL {family} d={d} n={n}: {error}"),
        }
    }
    let pass = cells.iter().all(|c| c.pass());
    println!(
        "{} cells, {} failing",
        cells.len(),
        cells.iter().filter(|c| !c.pass()).count()
    );
    finish(cfg, "clt", &table, &rows, pass)
}

// ---- flow -----------------------------------------------------------------------

#[derive(Serialize)]
struct FlowRow {
    family: String,
    t: f64,
    rel_entropy: f64,
    rel_fisher: f64,
    fisher_integral: f64,
    debruijn_residual: f64,
    decay_slack: f64,
    entropy_rise: f64,
    fisher_rise: f64,
    pass: bool,
    grid_meta: GridMeta,
}

fn flow_rows(
    cfg: &ExperimentConfig,
    f: &DistributionSpec,
    t_nodes: &[f64],
) -> Result<Vec<FlowRow>> {
    let g: Grid = make_density(f, cfg.n_points)?;
    let trace = flow_trace(&g, t_nodes)?;
    let decay = fisher_decay_check(&g, t_nodes)?;
    let (ent_rise, j_rise) = (trace.ent_worst_rise(), trace.j_worst_rise());
    let tol = &cfg.tolerances;
    let monotone = ent_rise <= tol.monotone && j_rise <= tol.monotone;
    Ok((0..t_nodes.len())
        .map(|k| FlowRow {
            family: f.label(),
            t: t_nodes[k],
            rel_entropy: trace.ent_values[k],
            rel_fisher: trace.j_values[k],
            fisher_integral: trace.j_integrals[k],
            debruijn_residual: trace.debruijn_residuals[k],
            decay_slack: decay[k].1,
            entropy_rise: ent_rise,
            fisher_rise: j_rise,
            pass: monotone
                && trace.debruijn_residuals[k] <= tol.debruijn
                && decay[k].1 >= -tol.fisher_decay,
            grid_meta: g.meta(),
        })
        .collect())
}

pub fn cmd_flow(cfg: &ExperimentConfig) -> Result<bool> {
    require_scores(cfg, "flow")?;
    let mut t_nodes = cfg.t_nodes.clone();
    t_nodes.sort_by(f64::total_cmp);
    t_nodes.dedup();
    let rows: Vec<FlowRow> = cfg
        .families
        .par_iter()
        .map(|f| flow_rows(cfg, f, &t_nodes).with_context(|| format!("flow of {}", f.label())))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut table = Table::new(["family", "t"].into_iter().chain(meta_header()).chain([
        "rel_entropy",
        "rel_fisher",
        "fisher_integral",
        "debruijn_residual",
        "decay_slack",
        "entropy_rise",
        "fisher_rise",
        "debruijn_tolerance",
        "decay_tolerance",
        "pass",
    ]));
    for r in &rows {
        let mut row = vec![r.family.clone(), num(r.t)];
        row.extend(meta_cells(&r.grid_meta));
        row.extend(
            [
                r.rel_entropy,
                r.rel_fisher,
                r.fisher_integral,
                r.debruijn_residual,
                r.decay_slack,
                r.entropy_rise,
                r.fisher_rise,
                cfg.tolerances.debruijn,
                cfg.tolerances.fisher_decay,
            ]
            .map(num),
        );
        row.push(flag(r.pass));
        if !r.pass {
            println!("FAIL {} t={}", r.family, r.t);
        }
        table.push(row);
    }
    let pass = rows.iter().all(|r| r.pass);
    finish(cfg, "flow", &table, &rows, pass)
}

// ---- poincare ----------------------------------------------------------------------

#[derive(Serialize)]
struct PoincareRow {
    family: String,
    c_p: f64,
    coarse_c_p: f64,
    gap: f64,
    converged: bool,
    muckenhoupt_b: f64,
    muckenhoupt_upper: f64,
    variance: f64,
    pass: bool,
    grid_meta: GridMeta,
}

fn poincare_row(cfg: &ExperimentConfig, f: &DistributionSpec) -> Result<PoincareRow> {
    let g: Grid = make_density(f, cfg.n_points)?;
    let est = spectral_gap_1d(&g)?;
    let m = muckenhoupt(&g)?;
    let var = entclt::grid::moments(&g).variance;
    let tol = cfg.tolerances.poincare;
    let sandwich = m.b <= est.c_p * (1.0 + tol) && est.c_p <= m.upper * (1.0 + tol);
    Ok(PoincareRow {
        family: f.label(),
        c_p: est.c_p,
        coarse_c_p: est.coarse_c_p,
        gap: est.gap,
        converged: est.converged,
        muckenhoupt_b: m.b,
        muckenhoupt_upper: m.upper,
        variance: var,
        pass: est.converged && sandwich && est.c_p >= var - tol,
        grid_meta: g.meta(),
    })
}

pub fn cmd_poincare(cfg: &ExperimentConfig) -> Result<bool> {
    let rows: Vec<PoincareRow> = cfg
        .families
        .par_iter()
        .map(|f| {
            poincare_row(cfg, f).with_context(|| format!("Poincaré constant of {}", f.label()))
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(["family"].into_iter().chain(meta_header()).chain([
        "c_p",
        "coarse_c_p",
        "gap",
        "converged",
        "muckenhoupt_b",
        "muckenhoupt_upper",
        "variance",
        "tolerance",
        "pass",
    ]));
    for r in &rows {
        let mut row = vec![r.family.clone()];
        row.extend(meta_cells(&r.grid_meta));
        row.extend([r.c_p, r.coarse_c_p, r.gap].map(num));
        row.push(flag(r.converged));
        row.extend(
            [
                r.muckenhoupt_b,
                r.muckenhoupt_upper,
                r.variance,
                cfg.tolerances.poincare,
            ]
            .map(num),
        );
        row.push(flag(r.pass));
        println!(
            "{} {} c_p = {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.family,
            num(r.c_p)
        );
        table.push(row);
    }
    let pass = rows.iter().all(|r| r.pass);
    finish(cfg, "poincare", &table, &rows, pass)
}

// ---- verify ----------------------------------------------------------------------------

/// Nodes and values of a density file, or the check that rejected it.
pub type DensityFile = std::result::Result<(Vec<f64>, Vec<f64>), CheckResult>;

/// Reads a two-column `x,density` CSV. Unreadable files are errors;
/// malformed contents become a failing `density_file.parse` check.
pub fn load_density_file(path: &Path) -> Result<DensityFile> {
    let text =
        std::fs::read(path).with_context(|| format!("reading density file {}", path.display()))?;
    let label = path.display().to_string();
    let parse_fail = |detail: String| {
        CheckResult::failed(DENSITY_FILE_GROUP, "parse", format!("{label}: {detail}"))
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_slice());
    let header = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Ok(Err(parse_fail(e.to_string()))),
    };
    if header.len() != 2 {
        return Ok(Err(parse_fail(format!(
            "expected 2 columns, header has {}",
            header.len()
        ))));
    }
    let (mut xs, mut ps) = (Vec::new(), Vec::new());
    for (k, rec) in reader.records().enumerate() {
        let row = k + 2;
        let rec = match rec {
            Ok(r) => r,
            Err(e) => return Ok(Err(parse_fail(format!("row {row}: {e}")))),
        };
        if rec.len() != 2 {
            return Ok(Err(parse_fail(format!(
                "row {row}: expected 2 fields, got {}",
                rec.len()
            ))));
        }
        let field = |i: usize| rec[i].trim().parse::<f64>();
        match (field(0), field(1)) {
            (Ok(x), Ok(p)) => {
                xs.push(x);
                ps.push(p);
            }
            _ => {
                return Ok(Err(parse_fail(format!(
                    "row {row}: non-numeric field in \"{}\"",
                    rec.iter().collect::<Vec<_>>().join(",")
                ))))
            }
        }
    }
    Ok(Ok((xs, ps)))
}

pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<bool> {
    let opts = VerifyOptions {
        n_points: cfg.n_points,
        bound_tolerance: cfg.tolerances.bound,
        families: cfg.smooth_families(),
        d_list: cfg.d_list.clone(),
        n_list: cfg.n_list.clone(),
        groups: cfg.verify.groups.clone(),
    };
    if opts.families.is_empty() {
        bail!("verify needs at least one family with a score");
    }
    let mut results = run_checks(&opts)?;
    for path in &cfg.verify.density_files {
        match load_density_file(path)? {
            Ok((xs, ps)) => {
                results.extend(density_file_checks(&path.display().to_string(), &xs, &ps))
            }
            Err(fail) => results.push(fail),
        }
    }
    let mut table = Table::new(["id", "group", "name", "value", "limit", "pass", "detail"]);
    for r in &results {
        table.push(vec![
            r.id(),
            r.group.clone(),
            r.name.clone(),
            num(r.value),
            num(r.limit),
            flag(r.pass),
            r.detail.clone(),
        ]);
        println!(
            "{} {:<42} {:>11} <= {:<9} {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.id(),
            format!("{:.3e}", r.value),
            format!("{:.1e}", r.limit),
            r.detail
        );
    }
    let failing: Vec<String> = results
        .iter()
        .filter(|r| !r.pass)
        .map(CheckResult::id)
        .collect();
    println!("{} checks, {} failing", results.len(), failing.len());
    if !failing.is_empty() {
        println!("failing: {}", failing.join(", "));
    }
    finish(cfg, "verify", &table, &results, failing.is_empty())
}
