//! The named invariant battery behind `entclt verify`.
//!
//! Every check reduces to one number compared against a limit
//! (`pass <=> value <= limit`, NaN fails). Heavy shared inputs (the bound
//! sweeps and the projection reports) are built once before the checks fan
//! out, so checks never block on each other.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    propfi_bound, run_suite, theorem1_bound, BoundReport, SuiteCell, SuiteOptions,
    DEFAULT_TOLERANCE, R_UNCERTAINTY, VERDICT_NAMES,
};
use crate::convolve::{clt_density, clt_density_sequential, convolve, convolve_with_stats};
use crate::distributions::{
    closed_form_j_beta, closed_form_j_theta, gamma_fn, make_density, DistributionSpec,
};
use crate::error::{Error, Result};
use crate::functionals::{
    fisher_information, relative_entropy_direct, relative_entropy_to_gaussian, relative_fisher,
    relative_fisher_direct, score_unchecked,
};
use crate::grid::{moments, normalize, scale, shift, standardize, GridDensity, ProductMeasure};
use crate::ou::{
    ent_w2_fi_bound, ent_w2_fi_rhs, entropy_cost_check, fisher_decay_check, flow_trace,
    hwi_optimal_time, hwi_value, ou_evolve,
};
use crate::poincare::{
    muckenhoupt, poincare_product, refinement_sequence, restrict_to_support, spectral_gap_1d,
};
use crate::projection::{projection_report_n2, ProjectionReport};
use crate::transport::{cdf, quantile, w2_1d, w2_1d_global};

type Grid = GridDensity<f64>;

/// Check groups in battery order.
pub const GROUPS: [&str; 9] = [
    "grid",
    "distributions",
    "functionals",
    "convolve",
    "ou",
    "transport",
    "poincare",
    "projection",
    "bounds",
];

/// Group of the checks run on user-supplied density files.
pub const DENSITY_FILE_GROUP: &str = "density_file";

/// Result of one named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub group: String,
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn id(&self) -> String {
        format!("{}.{}", self.group, self.name)
    }

    pub fn failed(group: &str, name: &str, detail: impl Into<String>) -> Self {
        Self {
            group: group.into(),
            name: name.into(),
            value: f64::NAN,
            limit: f64::NAN,
            pass: false,
            detail: detail.into(),
        }
    }

    fn from_outcome(group: &str, name: &str, outcome: Result<Outcome>) -> Self {
        match outcome {
            Ok(o) => Self {
                group: group.into(),
                name: name.into(),
                pass: o.value <= o.limit,
                value: o.value,
                limit: o.limit,
                detail: o.detail,
            },
            Err(e) => Self::failed(group, name, format!("error: {e}")),
        }
    }
}

/// Knobs of [`run_checks`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub n_points: usize,
    /// Slack on the bound verdicts of the sweep.
    pub bound_tolerance: f64,
    /// Families, dimensions and sample sizes of the bound sweep.
    pub families: Vec<DistributionSpec>,
    pub d_list: Vec<usize>,
    pub n_list: Vec<usize>,
    /// Restrict to these groups; empty runs everything.
    pub groups: Vec<String>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            n_points: crate::grid::DEFAULT_POINTS,
            bound_tolerance: DEFAULT_TOLERANCE,
            families: default_families(),
            d_list: vec![1, 2, 3],
            n_list: vec![1, 2, 4, 8, 16, 32],
            groups: Vec::new(),
        }
    }
}

/// `{q_3, q_4, t_6}`.
pub fn default_families() -> Vec<DistributionSpec> {
    vec![gg(3.0), gg(4.0), st(6.0)]
}

fn gg(beta: f64) -> DistributionSpec {
    DistributionSpec::GeneralizedGaussian { beta }
}

fn st(theta: f64) -> DistributionSpec {
    DistributionSpec::StudentT { theta }
}

fn mixture() -> DistributionSpec {
    DistributionSpec::GaussianMixture {
        weights: vec![0.5, 0.5],
        means: vec![-1.0, 1.0],
        sds: vec![0.6, 0.6],
    }
}

/// Every law with a score used by the battery.
pub fn smooth_corpus() -> Vec<DistributionSpec> {
    vec![
        DistributionSpec::Gaussian,
        gg(1.5),
        gg(3.0),
        gg(4.0),
        st(5.0),
        st(6.0),
        st(8.0),
        st(10.0),
        mixture(),
    ]
}

struct Outcome {
    value: f64,
    limit: f64,
    detail: String,
}

/// Running maximum of a violation measure, remembering where it occurred.
struct Worst {
    value: f64,
    at: String,
    seen: bool,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            at: String::new(),
            seen: false,
        }
    }

    fn add(&mut self, v: f64, at: impl Into<String>) {
        self.seen = true;
        if self.value.is_nan() {
            return;
        }
        if v.is_nan() || v > self.value {
            self.value = v;
            self.at = at.into();
        }
    }

    fn within(self, limit: f64) -> Result<Outcome> {
        if !self.seen {
            return Err(Error::InvalidParameter("check has no cases".into()));
        }
        let value = if self.value.is_nan() {
            f64::INFINITY
        } else {
            self.value
        };
        Ok(Outcome {
            value,
            limit,
            detail: format!("worst {:.3e} at {}", self.value, self.at),
        })
    }
}

fn single(value: f64, limit: f64, detail: impl Into<String>) -> Result<Outcome> {
    let mut w = Worst::new();
    w.add(value, detail);
    w.within(limit)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Inputs shared by several checks, built before the fan-out.
struct Lab {
    opts: VerifyOptions,
    suites: Vec<(DistributionSpec, Result<Vec<SuiteCell<f64>>>)>,
    projections: Vec<(DistributionSpec, Result<ProjectionReport<f64>>)>,
    /// `d = 1`, `n` in `{1, 2, 4, 8, 16, 32}` for the default families.
    suites_1d: Vec<(DistributionSpec, Result<Vec<BoundReport<f64>>>)>,
}

impl Lab {
    fn n(&self) -> usize {
        self.opts.n_points
    }

    fn density(&self, spec: &DistributionSpec) -> Result<Grid> {
        make_density(spec, self.n())
    }

    fn gauss(&self) -> Result<Grid> {
        self.density(&DistributionSpec::Gaussian)
    }

    fn reports(&self) -> Result<Vec<&BoundReport<f64>>> {
        let mut out = Vec::new();
        for (spec, cells) in &self.suites {
            let cells = cells
                .as_ref()
                .map_err(|e| Error::Construction(format!("{}: {e}", spec.label())))?;
            for cell in cells {
                match cell {
                    SuiteCell::Report(r) => out.push(r.as_ref()),
                    SuiteCell::Failed {
                        family,
                        d,
                        n,
                        error,
                    } => {
                        return Err(Error::Construction(format!(
                            "{family} d={d} n={n}: {error}"
                        )))
                    }
                }
            }
        }
        Ok(out)
    }

    fn suite_1d(&self, spec: &DistributionSpec) -> Result<&[BoundReport<f64>]> {
        let (_, r) = self
            .suites_1d
            .iter()
            .find(|(s, _)| s == spec)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("no one-dimensional sweep for {}", spec.label()))
            })?;
        r.as_deref().map_err(|e| e.clone())
    }

    fn suite_opts(&self) -> SuiteOptions {
        SuiteOptions {
            n_points: self.n(),
            tolerance: self.opts.bound_tolerance,
        }
    }

    fn projection(&self, label: &str) -> Result<&ProjectionReport<f64>> {
        let (_, r) = self
            .projections
            .iter()
            .find(|(s, _)| s.label() == label)
            .ok_or_else(|| Error::InvalidParameter(format!("no projection base {label}")))?;
        r.as_ref().map_err(|e| e.clone())
    }
}

type CheckFn = fn(&Lab) -> Result<Outcome>;

struct Check {
    group: &'static str,
    name: &'static str,
    run: CheckFn,
}

macro_rules! checks {
    ($($group:literal : $name:literal => $f:expr),* $(,)?) => {
        &[$(Check { group: $group, name: $name, run: $f }),*]
    };
}

const BATTERY: &[Check] = checks![
    "grid": "unit_mass" => grid_unit_mass,
    "grid": "normalize_idempotent" => grid_normalize_idempotent,
    "grid": "scale_roundtrip" => grid_scale_roundtrip,
    "grid": "standardize_moments" => grid_standardize_moments,
    "grid": "moment_grid_convergence" => grid_moment_convergence,
    "grid": "product_dimension" => grid_product_dimension,
    "distributions": "gamma_recurrence" => dist_gamma_recurrence,
    "distributions": "gamma_values" => dist_gamma_values,
    "distributions": "fisher_beta_1.5" => |l| dist_fisher_beta(l, 1.5),
    "distributions": "fisher_beta_2" => |l| dist_fisher_beta(l, 2.0),
    "distributions": "fisher_beta_3" => |l| dist_fisher_beta(l, 3.0),
    "distributions": "fisher_beta_4" => |l| dist_fisher_beta(l, 4.0),
    "distributions": "fisher_beta_asymptote" => dist_beta_asymptote,
    "distributions": "fisher_theta_4" => |l| dist_fisher_theta(l, 4.0),
    "distributions": "fisher_theta_5" => |l| dist_fisher_theta(l, 5.0),
    "distributions": "fisher_theta_10" => |l| dist_fisher_theta(l, 10.0),
    "distributions": "closed_form_theta_5" => dist_theta5_exact,
    "distributions": "beta_2_is_gaussian" => dist_beta2_gaussian,
    "distributions": "uniform_limit" => dist_uniform_limit,
    "functionals": "score_moments" => fun_score_moments,
    "functionals": "log_sobolev" => fun_log_sobolev,
    "functionals": "affine_invariance" => fun_affine_invariance,
    "functionals": "grid_convergence" => fun_grid_convergence,
    "functionals": "fisher_routes" => fun_fisher_routes,
    "functionals": "entropy_routes" => fun_entropy_routes,
    "functionals": "gaussian_null" => fun_gaussian_null,
    "convolve": "mass_conservation" => conv_mass,
    "convolve": "stam" => conv_stam,
    "convolve": "fisher_monotone" => conv_fisher_monotone,
    "convolve": "rate_shape" => conv_rate_shape,
    "convolve": "entropy_decreasing" => conv_entropy_decreasing,
    "convolve": "binary_vs_sequential" => conv_binary_sequential,
    "convolve": "variance_preserved" => conv_variance,
    "ou": "debruijn_q4" => |l| ou_debruijn(l, gg(4.0), 1e-3),
    "ou": "debruijn_t10" => |l| ou_debruijn(l, st(10.0), 1e-3),
    "ou": "debruijn_gaussian" => |l| ou_debruijn(l, DistributionSpec::Gaussian, 1e-8),
    "ou": "fisher_decay" => ou_fisher_decay,
    "ou": "entropy_cost" => ou_entropy_cost,
    "ou": "ent_w2_fi" => ou_ent_w2_fi,
    "ou": "hwi_optimizer" => ou_hwi_optimizer,
    "ou": "semigroup" => ou_semigroup,
    "ou": "poincare_stability" => ou_poincare_stability,
    "ou": "flow_monotone" => ou_flow_monotone,
    "ou": "gaussian_fixed_point" => ou_gaussian_fixed,
    "transport": "talagrand_fisher" => tr_talagrand_fisher,
    "transport": "talagrand_entropy" => tr_talagrand_entropy,
    "transport": "triangle" => tr_triangle,
    "transport": "w2_poincare" => tr_w2_poincare,
    "transport": "quantile_roundtrip" => tr_quantile_roundtrip,
    "transport": "cdf_endpoints" => tr_cdf_endpoints,
    "transport": "shift_distance" => tr_shift,
    "transport": "global_rule_agreement" => tr_global_rule,
    "poincare": "gaussian_constant" => poi_gaussian,
    "poincare": "uniform_constant" => poi_uniform,
    "poincare": "variance_lower_bound" => poi_variance,
    "poincare": "muckenhoupt_sandwich" => poi_sandwich,
    "poincare": "subadditivity" => poi_subadditive,
    "poincare": "refinement_convergence" => poi_refinement,
    "poincare": "product_max" => poi_product,
    "projection": "identity_residual" => |l| proj_field(l, "identity_residual", 1e-4, |r| r.identity_residual),
    "projection": "test_functions" => |l| proj_field(l, "test_functions", 1e-4, |r| r.test_gap_linear.max(r.test_gap_cubic)),
    "projection": "telescoping" => proj_telescoping,
    "projection": "m_scalar" => |l| proj_field(l, "m_scalar", 1e-3, |r| (r.m_scalar + r.fisher_z2).abs()),
    "projection": "lower_bound" => |l| proj_field(l, "lower_bound", 1e-4, |r| -r.lower_bound_slack),
    "projection": "prop_fi_chain" => |l| proj_field(l, "prop_fi_chain", 1e-4, |r| -r.prop_fi_slack),
    "projection": "pythagoras" => proj_pythagoras,
    "projection": "cauchy_schwarz" => |l| proj_field(l, "cauchy_schwarz", 1e-4, |r| -r.cauchy_schwarz_slack),
    "projection": "orthogonality" => |l| proj_field(l, "orthogonality", 1e-4, |r| r.orthogonality.abs()),
    "projection": "excluded_mass" => |l| proj_field(l, "excluded_mass", 1e-8, |r| r.excluded_mass),
    "projection": "g_routes" => |l| proj_field(l, "g_routes", 1e-3, |r| r.g_route_gap),
    "projection": "gaussian_null" => proj_gaussian_null,
    "bounds": "theorem1" => |l| bounds_verdict(l, "theorem1"),
    "bounds": "propfi" => |l| bounds_verdict(l, "propfi"),
    "bounds": "log_sobolev" => |l| bounds_verdict(l, "log_sobolev"),
    "bounds": "hwi" => |l| bounds_verdict(l, "hwi"),
    "bounds": "w2_poincare" => |l| bounds_verdict(l, "w2_poincare"),
    "bounds": "talagrand_fisher" => |l| bounds_verdict(l, "talagrand_fisher"),
    "bounds": "talagrand_entropy" => |l| bounds_verdict(l, "talagrand_entropy"),
    "bounds": "cfp19" => |l| bounds_verdict(l, "cfp19"),
    "bounds": "sweep_complete" => bounds_complete,
    "bounds": "monotonicity_lattice" => bounds_lattice,
    "bounds": "propfi_identity" => bounds_propfi_identity,
    "bounds": "first_branch_shape" => bounds_first_branch,
    "bounds": "formula_examples" => bounds_examples,
    "bounds": "gaussian_suite" => bounds_gaussian,
];

/// `(group, name)` of every check in battery order.
pub fn check_names() -> Vec<(&'static str, &'static str)> {
    BATTERY.iter().map(|c| (c.group, c.name)).collect()
}

/// Runs the battery (or the requested groups) and returns the results in
/// battery order.
pub fn run_checks(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    for g in &opts.groups {
        if !GROUPS.contains(&g.as_str()) {
            return Err(Error::InvalidParameter(format!(
                "unknown check group {g:?}; known groups: {}",
                GROUPS.join(", ")
            )));
        }
    }
    if opts.families.is_empty() || opts.d_list.is_empty() || opts.n_list.is_empty() {
        return Err(Error::InvalidParameter(
            "families, d_list and n_list must be nonempty".into(),
        ));
    }
    let selected: Vec<&Check> = BATTERY
        .iter()
        .filter(|c| opts.groups.is_empty() || opts.groups.iter().any(|g| g == c.group))
        .collect();
    let wants = |g: &str| selected.iter().any(|c| c.group == g);
    let lab = build_lab(
        opts.clone(),
        wants("bounds"),
        wants("projection"),
        wants("convolve") || wants("transport"),
    );
    Ok(selected
        .par_iter()
        .map(|c| CheckResult::from_outcome(c.group, c.name, (c.run)(&lab)))
        .collect())
}

fn build_lab(opts: VerifyOptions, suites: bool, projections: bool, suites_1d: bool) -> Lab {
    let suite_opts = SuiteOptions {
        n_points: opts.n_points,
        tolerance: opts.bound_tolerance,
    };
    let suites = if suites {
        opts.families
            .par_iter()
            .map(|s| {
                (
                    s.clone(),
                    run_suite(s, &opts.d_list, &opts.n_list, suite_opts),
                )
            })
            .collect()
    } else {
        Vec::new()
    };
    let projections = if projections {
        [DistributionSpec::Gaussian, gg(3.0), gg(4.0)]
            .into_par_iter()
            .map(|s| {
                let r = make_density::<f64>(&s, opts.n_points).and_then(|g| {
                    let r = (spectral_gap_1d(&g)?.c_p * (1.0 + R_UNCERTAINTY)).max(1.0);
                    projection_report_n2(&g, r)
                });
                (s, r)
            })
            .collect()
    } else {
        Vec::new()
    };
    let suites_1d = if suites_1d {
        default_families()
            .into_par_iter()
            .map(|s| {
                let cells =
                    run_suite(&s, &[1], &[1, 2, 4, 8, 16, 32], suite_opts).and_then(|cells| {
                        cells
                            .into_iter()
                            .map(|c| match c {
                                SuiteCell::Report(r) => Ok(*r),
                                SuiteCell::Failed { error, .. } => Err(Error::Construction(error)),
                            })
                            .collect()
                    });
                (s, cells)
            })
            .collect()
    } else {
        Vec::new()
    };
    Lab {
        opts,
        suites,
        projections,
        suites_1d,
    }
}

/// Sanity checks on a density given as samples on a grid, e.g. read from
/// a file. Names are `density_file.<check>`; `label` goes in the detail.
pub fn density_file_checks(label: &str, xs: &[f64], ps: &[f64]) -> Vec<CheckResult> {
    let g = DENSITY_FILE_GROUP;
    let mut out = Vec::new();
    let mut push = |name: &str, o: Result<Outcome>| {
        let mut r = CheckResult::from_outcome(g, name, o);
        r.detail = format!("{label}: {}", r.detail);
        out.push(r);
    };
    if xs.len() != ps.len() || xs.len() < crate::grid::MIN_POINTS {
        push(
            "shape",
            Err(Error::TooFewPoints {
                got: xs.len().min(ps.len()),
                min: crate::grid::MIN_POINTS,
            }),
        );
        return out;
    }
    let non_finite = xs.iter().chain(ps).filter(|v| !v.is_finite()).count();
    push(
        "finite",
        single(non_finite as f64, 0.0, "non-finite entries"),
    );
    let min_p = ps.iter().copied().fold(f64::INFINITY, f64::min);
    push(
        "nonnegative",
        single(-min_p, 0.0, "negated minimum density"),
    );
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    let mut w = Worst::new();
    for (i, pair) in xs.windows(2).enumerate() {
        w.add(
            ((pair[1] - pair[0]) - h).abs() / h,
            format!("row {}", i + 2),
        );
    }
    push("uniform_spacing", w.within(1e-6));
    if non_finite > 0 || !(h > 0.0) {
        push(
            "unit_mass",
            Err(Error::Construction("unusable grid".into())),
        );
        push(
            "score_moments",
            Err(Error::Construction("unusable grid".into())),
        );
        return out;
    }
    let built = GridDensity::from_values(xs[0], xs[xs.len() - 1], ps.to_vec());
    match built {
        Ok(grid) => {
            push(
                "unit_mass",
                single((grid.integral() - 1.0).abs(), 1e-6, "|mass - 1|"),
            );
            push(
                "score_moments",
                normalize(&grid).and_then(|n| {
                    let (m0, m1) = score_unchecked(&n)?.moments(&n);
                    single(
                        m0.abs().max((m1 + 1.0).abs()),
                        1e-4,
                        "max(|E rho|, |E X rho + 1|)",
                    )
                }),
            );
        }
        Err(e) => {
            push("unit_mass", Err(e.clone()));
            push("score_moments", Err(e));
        }
    }
    out
}

// ---- grid -------------------------------------------------------------

fn with_uniform() -> Vec<DistributionSpec> {
    let mut v = smooth_corpus();
    v.push(DistributionSpec::UniformSqrt3);
    v
}

fn grid_unit_mass(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in with_uniform() {
        w.add((l.density(&s)?.integral() - 1.0).abs(), s.label());
    }
    w.within(1e-12)
}

fn grid_normalize_idempotent(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in with_uniform() {
        let once = normalize(&l.density(&s)?)?;
        w.add(normalize(&once)?.sup_distance(&once), s.label());
    }
    w.within(1e-12)
}

fn grid_scale_roundtrip(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in [gg(4.0), st(6.0), mixture()] {
        let g = l.density(&s)?;
        for a in [0.5, 2.0] {
            let back = scale(&scale(&g, a)?, 1.0 / a)?;
            w.add(back.sup_distance(&g), format!("{} a={a}", s.label()));
        }
    }
    w.within(1e-6)
}

fn grid_standardize_moments(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in with_uniform() {
        let g = l.density(&s)?;
        for (tag, input) in [
            ("", g.clone()),
            (" shifted+scaled", shift(&scale(&g, 1.7)?, -0.4)),
        ] {
            let m = moments(&standardize(&input)?);
            w.add(
                m.mean.abs().max((m.variance - 1.0).abs()),
                format!("{}{tag}", s.label()),
            );
        }
    }
    w.within(1e-6)
}

fn grid_moment_convergence(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in with_uniform() {
        let a = moments(&l.density(&s)?);
        let b = moments(&make_density::<f64>(&s, 2 * l.n())?);
        w.add(
            (a.mean - b.mean).abs().max((a.variance - b.variance).abs()),
            s.label(),
        );
    }
    w.within(1e-6)
}

fn grid_product_dimension(l: &Lab) -> Result<Outcome> {
    let g = l.density(&gg(4.0))?;
    let p = ProductMeasure::iid(g.clone(), 3)?;
    let mixed = ProductMeasure::new(vec![g.clone(), l.gauss()?])?;
    let bad = (p.dim() != 3 || !p.is_iid() || mixed.is_iid() || mixed.dim() != 2) as u8;
    single(bad as f64, 0.0, "dimension and iid flags")
}

// ---- distributions ------------------------------------------------------

fn dist_gamma_recurrence(_: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for x in [0.25, 1.7, 6.3] {
        let lhs: f64 = gamma_fn(x + 1.0)?;
        w.add(rel_err(lhs, x * gamma_fn(x)?), format!("x={x}"));
    }
    w.within(1e-12)
}

fn dist_gamma_values(_: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for (x, v) in [
        (0.5, PI.sqrt()),
        (1.0, 1.0),
        (5.0, 24.0),
        (1.5, PI.sqrt() / 2.0),
    ] {
        w.add(rel_err(gamma_fn(x)?, v), format!("x={x}"));
    }
    w.within(1e-12)
}

fn dist_fisher_beta(l: &Lab, beta: f64) -> Result<Outcome> {
    let exact = closed_form_j_beta(beta)?;
    let got = relative_fisher(&l.density(&gg(beta))?)?;
    if exact.abs() < 1e-12 {
        single(got.abs(), 1e-8, format!("J = {got:.3e}, exact 0"))
    } else {
        single(
            rel_err(got, exact),
            1e-5,
            format!("J = {got:.9}, exact {exact:.9}"),
        )
    }
}

fn dist_beta_asymptote(_: &Lab) -> Result<Outcome> {
    let j = closed_form_j_beta(50.0)?;
    single(rel_err(j, 50.0 / 3.0), 0.15, format!("J(50) = {j:.4}"))
}

fn dist_fisher_theta(l: &Lab, theta: f64) -> Result<Outcome> {
    let exact = closed_form_j_theta(theta)?;
    let got = relative_fisher(&l.density(&st(theta))?)?;
    single(
        rel_err(got, exact),
        1e-4,
        format!("J = {got:.9}, exact {exact:.9}"),
    )
}

fn dist_theta5_exact(_: &Lab) -> Result<Outcome> {
    let j = closed_form_j_theta(5.0)?;
    single((j - 0.25).abs(), 1e-15, format!("J(5) = {j}"))
}

fn dist_beta2_gaussian(l: &Lab) -> Result<Outcome> {
    let g = l.density(&gg(2.0))?;
    let d = g.sup_distance_to(|x| (-x * x / 2.0).exp() / TAU.sqrt());
    single(d, 1e-8, "sup distance to the normal pdf")
}

fn dist_uniform_limit(_: &Lab) -> Result<Outcome> {
    let pdf = gg(200.0).pdf()?;
    let target = 1.0 / (2.0 * 3f64.sqrt());
    let mut w = Worst::new();
    for k in 0..=300 {
        let x = -1.5 + 0.01 * k as f64;
        w.add((pdf(x) - target).abs(), format!("x={x:.2}"));
    }
    w.within(0.02)
}

// ---- functionals ---------------------------------------------------------

fn fun_score_moments(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in smooth_corpus() {
        let g = l.density(&s)?;
        let (m0, m1) = score_unchecked(&g)?.moments(&g);
        w.add(m0.abs().max((m1 + 1.0).abs()), s.label());
    }
    w.within(1e-4)
}

fn fun_log_sobolev(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in smooth_corpus() {
        let g = standardize(&l.density(&s)?)?;
        w.add(
            relative_entropy_to_gaussian(&g) - relative_fisher(&g)? / 2.0,
            s.label(),
        );
    }
    w.within(1e-6)
}

fn fun_affine_invariance(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in [gg(3.0), gg(4.0), st(6.0), mixture()] {
        let base = standardize(&l.density(&s)?)?;
        let j0 = relative_fisher(&base)?;
        for (a, b) in [(2.0, 0.0), (0.5, 1.0)] {
            let moved = standardize(&shift(&scale(&base, a)?, b))?;
            w.add(
                (relative_fisher(&moved)? - j0).abs(),
                format!("{} a={a} b={b}", s.label()),
            );
        }
    }
    w.within(1e-4)
}

/// Relative change under grid doubling; absolute below `1e-8` for the
/// Gaussian entropy, whose exact value is 0.
fn fun_grid_convergence(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in [gg(2.0), gg(3.0), gg(4.0)] {
        let a = l.density(&s)?;
        let b = make_density::<f64>(&s, 2 * l.n())?;
        let (ia, ib) = (fisher_information(&a)?, fisher_information(&b)?);
        w.add(rel_err(ia, ib), format!("{} fisher", s.label()));
        let (ea, eb) = (
            relative_entropy_to_gaussian(&a),
            relative_entropy_to_gaussian(&b),
        );
        let change = if matches!(s, DistributionSpec::GeneralizedGaussian { beta } if beta == 2.0) {
            (ea - eb).abs() / 1e-8 * 1e-4
        } else {
            rel_err(ea, eb)
        };
        w.add(change, format!("{} rel_entropy", s.label()));
    }
    w.within(1e-4)
}

fn fun_fisher_routes(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in smooth_corpus() {
        let g = standardize(&l.density(&s)?)?;
        w.add(
            (relative_fisher(&g)? - relative_fisher_direct(&g)?).abs(),
            s.label(),
        );
    }
    w.within(1e-5)
}

fn fun_entropy_routes(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in smooth_corpus() {
        let g = standardize(&l.density(&s)?)?;
        w.add(
            (relative_entropy_to_gaussian(&g) - relative_entropy_direct(&g)).abs(),
            s.label(),
        );
    }
    w.within(1e-5)
}

fn fun_gaussian_null(l: &Lab) -> Result<Outcome> {
    let g = l.gauss()?;
    let mut w = Worst::new();
    w.add(relative_entropy_to_gaussian(&g).abs(), "rel_entropy");
    w.add(relative_fisher(&g)?.abs(), "rel_fisher");
    w.within(1e-8)
}

// ---- convolve --------------------------------------------------------------

fn stam_pairs(l: &Lab) -> Result<Vec<(String, Grid, Grid)>> {
    let fams = [DistributionSpec::Gaussian, gg(3.0), gg(4.0)];
    let mut out = Vec::new();
    for (i, a) in fams.iter().enumerate() {
        for b in &fams[i..] {
            out.push((
                format!("{}*{}", a.label(), b.label()),
                l.density(a)?,
                l.density(b)?,
            ));
        }
    }
    Ok(out)
}

fn conv_mass(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for (tag, a, b) in stam_pairs(l)? {
        let (_, stats) = convolve_with_stats(&a, &b)?;
        w.add((stats.raw_mass - 1.0).abs(), tag);
    }
    w.within(1e-9)
}

fn conv_stam(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for (tag, a, b) in stam_pairs(l)? {
        let ab = convolve(&a, &b)?;
        let gap = 1.0 / fisher_information(&ab)?
            - 1.0 / fisher_information(&a)?
            - 1.0 / fisher_information(&b)?;
        w.add(-gap, tag);
    }
    w.within(1e-4)
}

fn conv_fisher_monotone(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in default_families() {
        for r in l.suite_1d(&s)?.iter() {
            w.add(r.measured_j - r.j1, format!("{} n={}", s.label(), r.n));
        }
    }
    w.within(1e-5)
}

fn n_ent(l: &Lab) -> Result<Vec<(usize, f64)>> {
    Ok(l.suite_1d(&gg(4.0))?
        .iter()
        .map(|r| (r.n, r.measured_ent))
        .collect())
}

fn conv_rate_shape(l: &Lab) -> Result<Outcome> {
    let seq: Vec<(usize, f64)> = n_ent(l)?.into_iter().filter(|&(n, _)| n >= 4).collect();
    let mut w = Worst::new();
    for p in seq.windows(2) {
        let (a, b) = (p[0].0 as f64 * p[0].1, p[1].0 as f64 * p[1].1);
        w.add(b / a, format!("n={}->{}", p[0].0, p[1].0));
    }
    w.within(1.2)
}

fn conv_entropy_decreasing(l: &Lab) -> Result<Outcome> {
    let seq = n_ent(l)?;
    let steps: Vec<f64> = seq.windows(2).map(|p| p[1].1 - p[0].1).collect();
    // strict decrease: count the steps that fail to go down
    let rises = steps.iter().filter(|&&d| !(d < 0.0)).count();
    let largest = steps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    single(
        rises as f64,
        0.0,
        format!("largest step {largest:.3e} over n = 1..32"),
    )
}

fn conv_binary_sequential(l: &Lab) -> Result<Outcome> {
    let g = l.density(&gg(4.0))?;
    let mut w = Worst::new();
    for n in [3, 6] {
        let a = clt_density(&g, n)?;
        let b = clt_density_sequential(&g, n)?;
        w.add(a.sup_distance(&b), format!("n={n}"));
    }
    w.within(1e-9)
}

fn conv_variance(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in [gg(4.0), st(6.0)] {
        let g = l.density(&s)?;
        for n in [2, 4, 8, 16, 32] {
            let m = moments(&clt_density(&g, n)?);
            w.add(
                m.mean.abs().max((m.variance - 1.0).abs()),
                format!("{} n={n}", s.label()),
            );
        }
    }
    w.within(1e-6)
}

// ---- ou ------------------------------------------------------------------------

fn ou_debruijn(l: &Lab, s: DistributionSpec, limit: f64) -> Result<Outcome> {
    let trace = flow_trace(&l.density(&s)?, &[0.1, 0.5, 1.0])?;
    let mut w = Worst::new();
    for (t, r) in trace.t_nodes.iter().zip(&trace.debruijn_residuals) {
        w.add(*r, format!("t={t}"));
    }
    w.within(limit)
}

fn flow_families() -> [DistributionSpec; 3] {
    [gg(3.0), gg(4.0), st(8.0)]
}

fn ou_fisher_decay(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in flow_families() {
        for (t, slack) in fisher_decay_check(&l.density(&s)?, &[0.1, 0.5, 1.0, 2.0])? {
            w.add(-slack, format!("{} t={t}", s.label()));
        }
    }
    w.within(1e-5)
}

fn ou_entropy_cost(l: &Lab) -> Result<Outcome> {
    let z = l.gauss()?;
    let mut w = Worst::new();
    for s in flow_families() {
        let g = l.density(&s)?;
        let w2 = w2_1d(&g, &z)?;
        for t in [0.2, 0.5, 1.0] {
            w.add(
                -entropy_cost_check(&g, t, w2 * w2)?,
                format!("{} t={t}", s.label()),
            );
        }
    }
    w.within(1e-5)
}

fn ou_ent_w2_fi(l: &Lab) -> Result<Outcome> {
    let z = l.gauss()?;
    let mut w = Worst::new();
    for s in flow_families() {
        let g = l.density(&s)?;
        let w2 = w2_1d(&g, &z)?;
        let ent = relative_entropy_to_gaussian(&g);
        for t in [0.2, 0.5, 1.0] {
            w.add(
                ent - ent_w2_fi_bound(&g, t, w2 * w2)?,
                format!("{} t={t}", s.label()),
            );
        }
    }
    w.within(1e-5)
}

fn ou_hwi_optimizer(l: &Lab) -> Result<Outcome> {
    let z = l.gauss()?;
    let mut w = Worst::new();
    for s in flow_families() {
        let g = l.density(&s)?;
        let w2 = w2_1d(&g, &z)?;
        let j = relative_fisher(&g)?;
        let t = hwi_optimal_time(w2, j).ok_or_else(|| {
            Error::InvalidParameter(format!("{}: W2 >= sqrt J, no interior optimum", s.label()))
        })?;
        let gap = (ent_w2_fi_rhs(t, w2 * w2, j)? - hwi_value(w2, j)).abs();
        w.add(gap, s.label());
    }
    w.within(1e-5)
}

fn ou_semigroup(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in [gg(4.0), st(8.0)] {
        let g = l.density(&s)?;
        let two = ou_evolve(&ou_evolve(&g, 0.3)?, 0.7)?;
        w.add(two.sup_distance(&ou_evolve(&g, 1.0)?), s.label());
    }
    w.within(1e-5)
}

/// Compared on the law the solver actually measures (the density
/// restricted to its effective support), which has a finite constant
/// even when the untruncated family does not.
fn ou_poincare_stability(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in [gg(4.0), st(8.0)] {
        let g = restrict_to_support(&l.density(&s)?)?;
        let c0 = spectral_gap_1d(&g)?.c_p;
        for t in [0.25f64, 1.0] {
            let ct = spectral_gap_1d(&ou_evolve(&g, t)?)?.c_p;
            let decay = (-2.0 * t).exp();
            w.add(
                ct - (decay * c0 + 1.0 - decay),
                format!("{} t={t}", s.label()),
            );
        }
    }
    w.within(2e-3)
}

fn ou_flow_monotone(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in [gg(4.0), st(8.0)] {
        let trace = flow_trace(&l.density(&s)?, &[0.0, 0.1, 0.25, 0.5, 1.0, 2.0])?;
        w.add(trace.ent_worst_rise(), format!("{} entropy", s.label()));
        w.add(trace.j_worst_rise(), format!("{} fisher", s.label()));
    }
    w.within(1e-5)
}

fn ou_gaussian_fixed(l: &Lab) -> Result<Outcome> {
    let g = l.gauss()?;
    let mut w = Worst::new();
    for t in [0.5, 2.0] {
        let e = ou_evolve(&g, t)?;
        w.add(
            e.sup_distance_to(|x| (-x * x / 2.0).exp() / TAU.sqrt()),
            format!("t={t}"),
        );
    }
    w.within(1e-8)
}

// ---- transport -------------------------------------------------------------------

fn tr_talagrand_fisher(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in default_families() {
        for r in l.suite_1d(&s)?.iter() {
            w.add(
                r.measured_w2sq - r.measured_j,
                format!("{} n={}", s.label(), r.n),
            );
        }
    }
    w.within(1e-4)
}

fn tr_talagrand_entropy(l: &Lab) -> Result<Outcome> {
    let z = l.gauss()?;
    let mut w = Worst::new();
    for s in smooth_corpus() {
        let g = standardize(&l.density(&s)?)?;
        let w2 = w2_1d(&g, &z)?;
        w.add(w2 * w2 - 2.0 * relative_entropy_to_gaussian(&g), s.label());
    }
    w.within(1e-4)
}

fn tr_triangle(l: &Lab) -> Result<Outcome> {
    let (a, b, c) = (l.gauss()?, l.density(&gg(4.0))?, l.density(&st(6.0))?);
    let gap = w2_1d(&a, &c)? - w2_1d(&a, &b)? - w2_1d(&b, &c)?;
    single(gap, 1e-5, "gaussian, q_4, t_6")
}

fn tr_w2_poincare(l: &Lab) -> Result<Outcome> {
    let base = l.density(&gg(4.0))?;
    let z = l.gauss()?;
    let r = (spectral_gap_1d(&base)?.c_p * (1.0 - R_UNCERTAINTY)).max(1.0);
    let mut w = Worst::new();
    for n in [2, 4, 8, 16] {
        let w2 = w2_1d(&clt_density(&base, n)?, &z)?;
        for d in [1usize, 2] {
            let bound = d as f64 * (r - 1.0) / n as f64;
            w.add(d as f64 * w2 * w2 - bound, format!("d={d} n={n}"));
        }
    }
    w.within(1e-4)
}

fn tr_quantile_roundtrip(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in [gg(4.0), st(6.0), mixture()] {
        let t = cdf(&l.density(&s)?);
        for u in [1e-6, 0.01, 0.3, 0.5, 0.77, 0.999] {
            w.add(
                (t.eval(quantile(&t, u)?) - u).abs(),
                format!("{} u={u}", s.label()),
            );
        }
    }
    w.within(1e-10)
}

fn tr_cdf_endpoints(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in with_uniform() {
        let t = cdf(&l.density(&s)?);
        let f = t.cdf_values();
        w.add(
            f[0].abs().max((f[f.len() - 1] - 1.0).abs()),
            format!("{} endpoints", s.label()),
        );
        let drop = f.windows(2).map(|p| p[0] - p[1]).fold(0.0, f64::max);
        w.add(drop, format!("{} monotone", s.label()));
    }
    w.within(1e-10)
}

fn tr_shift(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in [DistributionSpec::Gaussian, gg(4.0)] {
        let g = l.density(&s)?;
        w.add((w2_1d(&g, &shift(&g, 0.7))? - 0.7).abs(), s.label());
    }
    w.within(1e-6)
}

fn tr_global_rule(l: &Lab) -> Result<Outcome> {
    let (z, g) = (l.gauss()?, l.density(&gg(4.0))?);
    let gap = (w2_1d(&g, &z)? - w2_1d_global(&g, &z)?).abs();
    single(gap, 2e-5, "q_4 to gaussian")
}

// ---- poincare ---------------------------------------------------------------------

/// Spectral estimate and the Richardson limit of the refinement sequence,
/// both relative to `exact`.
fn poi_constant(l: &Lab, s: DistributionSpec, exact: f64) -> Result<Outcome> {
    let g = l.density(&s)?;
    let direct = spectral_gap_1d(&g)?.c_p;
    let seq = refinement_sequence(&g, 3)?;
    let (a, b) = (seq[seq.len() - 2], seq[seq.len() - 1]);
    let extrapolated = b + (b - a) / 3.0;
    let mut w = Worst::new();
    w.add(rel_err(direct, exact), format!("spectral {direct:.6}"));
    w.add(
        rel_err(extrapolated, exact),
        format!("refined {extrapolated:.6}"),
    );
    w.within(1e-2)
}

fn poi_gaussian(l: &Lab) -> Result<Outcome> {
    poi_constant(l, DistributionSpec::Gaussian, 1.0)
}

fn poi_uniform(l: &Lab) -> Result<Outcome> {
    poi_constant(l, DistributionSpec::UniformSqrt3, 12.0 / (PI * PI))
}

fn poi_variance(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in with_uniform() {
        let g = l.density(&s)?;
        w.add(moments(&g).variance - spectral_gap_1d(&g)?.c_p, s.label());
    }
    w.within(1e-3)
}

fn poi_sandwich(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in smooth_corpus() {
        let g = l.density(&s)?;
        let cp = spectral_gap_1d(&g)?.c_p;
        let m = muckenhoupt(&g)?;
        w.add((m.b - cp) / cp, format!("{} lower", s.label()));
        w.add((cp - m.upper) / cp, format!("{} upper", s.label()));
    }
    w.within(0.0)
}

fn poi_subadditive(l: &Lab) -> Result<Outcome> {
    let g = l.density(&gg(4.0))?;
    let c1 = spectral_gap_1d(&g)?.c_p;
    let c2 = spectral_gap_1d(&convolve(&g, &g)?)?.c_p;
    single(
        c2 - 2.0 * c1,
        2e-3,
        format!("C_P(q_4*q_4) = {c2:.6}, C_P(q_4) = {c1:.6}"),
    )
}

fn poi_refinement(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for s in [gg(3.0), gg(4.0), st(8.0), mixture()] {
        let seq = refinement_sequence(&l.density(&s)?, 4)?;
        let diffs: Vec<f64> = seq.windows(2).map(|p| (p[1] - p[0]).abs()).collect();
        for p in diffs.windows(2) {
            // the shrink factor must be at least 2: report 2 - factor
            w.add(2.0 - p[0] / p[1], s.label());
        }
    }
    w.within(0.0)
}

fn poi_product(l: &Lab) -> Result<Outcome> {
    let (q, t) = (l.density(&gg(4.0))?, l.density(&st(8.0))?);
    let cq = spectral_gap_1d(&q)?.c_p;
    let ct = spectral_gap_1d(&t)?.c_p;
    let mut w = Worst::new();
    w.add(
        rel_err(poincare_product(&ProductMeasure::iid(q.clone(), 3)?)?, cq),
        "iid q_4",
    );
    w.add(
        rel_err(
            poincare_product(&ProductMeasure::new(vec![q, t])?)?,
            cq.max(ct),
        ),
        "q_4 x t_8",
    );
    w.within(1e-12)
}

// ---- projection ----------------------------------------------------------------------

const PROJECTION_BASES: [&str; 3] = ["gaussian", "q_3", "q_4"];

fn proj_field(
    l: &Lab,
    what: &str,
    limit: f64,
    f: fn(&ProjectionReport<f64>) -> f64,
) -> Result<Outcome> {
    let mut w = Worst::new();
    for b in PROJECTION_BASES {
        w.add(f(l.projection(b)?), format!("{b} {what}"));
    }
    w.within(limit)
}

fn proj_telescoping(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for b in PROJECTION_BASES {
        let r = l.projection(b)?;
        let gap = (r.delta2 - r.ridge_minus_additive).abs();
        w.add(
            gap / r.delta2.abs().max(r.ridge_minus_additive.abs()).max(1e-12),
            b,
        );
    }
    w.within(1e-3)
}

fn proj_pythagoras(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for b in PROJECTION_BASES {
        let r = l.projection(b)?;
        w.add(r.pythagoras_gap / r.v_sq.max(1e-12), b);
    }
    w.within(1e-3)
}

fn proj_gaussian_null(l: &Lab) -> Result<Outcome> {
    let r = l.projection("gaussian")?;
    let mut w = Worst::new();
    for (tag, v) in [
        ("identity_residual", r.identity_residual),
        ("delta2", r.delta2),
        ("ridge_minus_additive", r.ridge_minus_additive),
        ("hat_v_sq", r.hat_v_sq),
        ("m_scalar + I", r.m_scalar + r.fisher_z2),
        ("rel_fisher_z2", r.rel_fisher_z2),
        ("g_affine_gap", r.g_affine_gap),
        ("orthogonality", r.orthogonality),
        ("pythagoras_gap", r.pythagoras_gap),
    ] {
        w.add(v.abs(), tag);
    }
    w.within(1e-5)
}

// ---- bounds ------------------------------------------------------------------------------

fn bounds_verdict(l: &Lab, name: &str) -> Result<Outcome> {
    let mut w = Worst::new();
    for r in l.reports()? {
        let v = r
            .verdict(name)
            .ok_or_else(|| Error::InvalidParameter(format!("no verdict {name}")))?;
        if !v.skipped {
            w.add(-v.slack, format!("{} d={} n={}", r.family, r.d, r.n));
        }
    }
    if !w.seen {
        return single(0.0, 0.0, "not applicable to any cell");
    }
    w.within(l.opts.bound_tolerance)
}

fn bounds_complete(l: &Lab) -> Result<Outcome> {
    let reports = l.reports()?;
    let mut ds = l.opts.d_list.clone();
    ds.sort_unstable();
    ds.dedup();
    let mut ns = l.opts.n_list.clone();
    ns.sort_unstable();
    ns.dedup();
    let expected = l.opts.families.len() * ds.len() * ns.len();
    let missing_verdicts = reports
        .iter()
        .filter(|r| r.verdicts.len() != VERDICT_NAMES.len())
        .count();
    let bad = expected.abs_diff(reports.len()) + missing_verdicts;
    single(
        bad as f64,
        0.0,
        format!("{} of {expected} cells", reports.len()),
    )
}

fn bounds_lattice(_: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    let rs = [1.0, 1.05, 1.5, 3.0, 10.0];
    for d in [1usize, 2, 5] {
        for &(ent1, j1) in &[(0.01, 0.1), (0.3, 0.5), (1.0, 1e-3), (2.0, 4.0)] {
            for (ri, &r) in rs.iter().enumerate() {
                for n in 1..40usize {
                    let b = theorem1_bound(d, n, r, ent1, j1)?;
                    let next = theorem1_bound(d, n + 1, r, ent1, j1)?;
                    w.add(next - b, format!("n d={d} r={r} n={n}"));
                    if let Some(&r2) = rs.get(ri + 1) {
                        w.add(
                            b - theorem1_bound(d, n, r2, ent1, j1)?,
                            format!("R d={d} r={r} n={n}"),
                        );
                    }
                }
            }
        }
    }
    w.within(0.0)
}

fn bounds_propfi_identity(_: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for d in [1usize, 3, 7] {
        for n in [1usize, 2, 5, 100] {
            for r in [1.0, 1.3, 25.0] {
                let j1 = 0.37;
                let back = propfi_bound(d, n, r, j1)? * (2.0 * d as f64 * r + (n - 1) as f64)
                    / (2.0 * d as f64 * r);
                w.add(rel_err(back, j1), format!("d={d} n={n} r={r}"));
            }
        }
    }
    w.within(4.0 * f64::EPSILON)
}

fn bounds_first_branch(l: &Lab) -> Result<Outcome> {
    let mut w = Worst::new();
    for beta in [2.0, 3.0, 4.0] {
        let g = l.density(&gg(beta))?;
        let ent1 = relative_entropy_to_gaussian(&g);
        let r = spectral_gap_1d(&g)?.c_p.max(1.0);
        for d in [1usize, 2, 3] {
            for n in [1usize, 2, 4, 8, 16, 32] {
                let k = 2.0 * d as f64 * r / (2.0 * d as f64 * r + (n - 1) as f64);
                let first = k * d as f64 * ent1;
                let excess = if n == 1 {
                    (first - d as f64 * ent1).abs()
                } else {
                    first - d as f64 * ent1
                };
                w.add(excess, format!("q_{beta} d={d} n={n}"));
            }
        }
    }
    w.within(0.0)
}

fn bounds_examples(_: &Lab) -> Result<Outcome> {
    use crate::bounds::cfp19_bound;
    let mut w = Worst::new();
    w.add(
        (theorem1_bound(2, 101, 2.0f64, 1.0, 1e6)? - 2.0 / 27.0).abs(),
        "theorem1 2/27",
    );
    w.add(
        theorem1_bound(3, 7, 1.0f64, 0.0, 0.0)?.abs(),
        "theorem1 gaussian",
    );
    w.add((propfi_bound(1, 3, 1.0f64, 1.0)? - 0.5).abs(), "propfi 0.5");
    w.add(
        (cfp19_bound(1, 1, 2.0f64, 1.0)?.value - 0.5 * 2f64.ln()).abs(),
        "cfp19 log 2 / 2",
    );
    w.add(
        (cfp19_bound(2, 4, 1.5f64, 1.0)?.value - 0.125 * 5f64.ln()).abs(),
        "cfp19 log 5 / 8",
    );
    w.add(cfp19_bound(2, 4, 1.5f64, 0.0)?.value.abs(), "cfp19 j1 = 0");
    let degenerate = cfp19_bound(1, 1, 1.0f64, 1.0)?;
    w.add(
        if degenerate.degenerate && degenerate.value.is_infinite() {
            0.0
        } else {
            1.0
        },
        "cfp19 R = 1",
    );
    w.add(
        if theorem1_bound(1, 1, 0.5f64, 0.1, 0.1).is_err() {
            0.0
        } else {
            1.0
        },
        "theorem1 R < 1",
    );
    w.within(1e-15)
}

fn bounds_gaussian(l: &Lab) -> Result<Outcome> {
    let cells = run_suite::<f64>(&DistributionSpec::Gaussian, &[1], &[4], l.suite_opts())?;
    let r = cells[0]
        .report()
        .ok_or_else(|| Error::Construction(format!("{:?}", cells[0])))?;
    let mut w = Worst::new();
    w.add(r.measured_ent.abs(), "measured_ent");
    w.add(r.measured_j.abs(), "measured_j");
    w.add(r.measured_w2sq.abs(), "measured_w2sq");
    w.add(if r.pass() { 0.0 } else { 1.0 }, "verdicts");
    w.within(1e-6)
}
