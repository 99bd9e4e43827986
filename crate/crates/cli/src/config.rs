//! The JSON experiment configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use entclt::checks::{default_families, GROUPS};
use entclt::DistributionSpec;
use serde::{Deserialize, Serialize};

/// Inequality slacks; every value must be positive unless `--strict`
/// zeroes them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Bound verdicts of the `clt` sweep and the matching verify checks.
    pub bound: f64,
    /// de Bruijn residuals reported by `flow`.
    pub debruijn: f64,
    /// `J(X(t)) <= e^{-2t} J(X)` in `flow`.
    pub fisher_decay: f64,
    /// Largest rise of entropy or Fisher information along the flow.
    pub monotone: f64,
    /// `B <= c_p <= 4B` and `c_p >= Var`, relative, in `poincare`.
    pub poincare: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            bound: 1e-4,
            debruijn: 1e-3,
            fisher_decay: 1e-5,
            monotone: 1e-5,
            poincare: 1e-3,
        }
    }
}

impl Tolerances {
    fn values(&self) -> [(&'static str, f64); 5] {
        [
            ("bound", self.bound),
            ("debruijn", self.debruijn),
            ("fisher_decay", self.fisher_decay),
            ("monotone", self.monotone),
            ("poincare", self.poincare),
        ]
    }

    fn zeroed() -> Self {
        Self {
            bound: 0.0,
            debruijn: 0.0,
            fisher_decay: 0.0,
            monotone: 0.0,
            poincare: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    /// Check groups to run; empty runs all of them.
    pub groups: Vec<String>,
    /// Two-column `x,density` CSV files to validate.
    pub density_files: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub families: Vec<DistributionSpec>,
    pub d_list: Vec<usize>,
    pub n_list: Vec<usize>,
    pub t_nodes: Vec<f64>,
    pub n_points: usize,
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
    /// Reserved; every computation is deterministic.
    pub seed: u64,
    pub verify: VerifySection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            families: default_families(),
            d_list: vec![1, 2, 3],
            n_list: vec![1, 2, 4, 8, 16, 32],
            t_nodes: vec![0.1, 0.5, 1.0],
            n_points: 4096,
            tolerances: Tolerances::default(),
            output_dir: PathBuf::from("entclt-out"),
            jobs: None,
            seed: 0,
            verify: VerifySection::default(),
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub n_points: Option<usize>,
    pub strict: bool,
    pub groups: Vec<String>,
    pub density_files: Vec<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        // relative density paths are resolved against the config file
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = cfg;
        for f in &mut cfg.verify.density_files {
            if f.is_relative() {
                *f = base.join(&*f);
            }
        }
        Ok(cfg)
    }

    /// Validates the file values, then applies `o`.
    pub fn resolve(mut self, o: &Overrides) -> Result<Self> {
        if let Some(out) = &o.out {
            self.output_dir = out.clone();
        }
        if o.jobs.is_some() {
            self.jobs = o.jobs;
        }
        if let Some(n) = o.n_points {
            self.n_points = n;
        }
        self.verify.groups.extend(o.groups.iter().cloned());
        self.verify
            .density_files
            .extend(o.density_files.iter().cloned());
        self.validate()?;
        if o.strict {
            self.tolerances = Tolerances::zeroed();
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(!self.families.is_empty(), "families must be nonempty");
        ensure!(!self.d_list.is_empty(), "d_list must be nonempty");
        ensure!(!self.n_list.is_empty(), "n_list must be nonempty");
        ensure!(!self.t_nodes.is_empty(), "t_nodes must be nonempty");
        for f in &self.families {
            f.validate()
                .with_context(|| format!("family {}", f.label()))?;
        }
        ensure!(
            self.d_list.iter().all(|&d| d >= 1),
            "d_list entries must be at least 1"
        );
        ensure!(
            self.n_list.iter().all(|&n| n >= 1),
            "n_list entries must be at least 1"
        );
        ensure!(
            self.t_nodes.iter().all(|t| t.is_finite() && *t >= 0.0),
            "t_nodes must be finite and nonnegative"
        );
        ensure!(
            self.n_points >= 1024 && self.n_points.is_power_of_two(),
            "n_points must be a power of two >= 1024, got {}",
            self.n_points
        );
        for (name, v) in self.tolerances.values() {
            ensure!(
                v.is_finite() && v > 0.0,
                "tolerance {name} must be positive, got {v}"
            );
        }
        if self.jobs == Some(0) {
            bail!("jobs must be at least 1");
        }
        for g in &self.verify.groups {
            ensure!(
                GROUPS.contains(&g.as_str()),
                "unknown check group {g:?}; known groups: {}",
                GROUPS.join(", ")
            );
        }
        Ok(())
    }

    /// Families that admit a score (all commands except `poincare` need one).
    pub fn smooth_families(&self) -> Vec<DistributionSpec> {
        self.families
            .iter()
            .filter(|f| f.admits_score())
            .cloned()
            .collect()
    }
}
