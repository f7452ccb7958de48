use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::ProbeParams;
use crate::capacity::PolarParams;
use crate::discs::OptimizerParams;
use crate::envelope::SolverParams;
use crate::error::{Error, Result};
use crate::geometry::{ComplexPoint, DomainSpec, SetExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Envelope,
    DiscOpt,
    Boundary,
    Capacity,
    Verify,
}

pub const SUITES: [&str; 9] = [
    "radial",
    "poletsky-open",
    "closed-inequality",
    "twist",
    "boundary-disc",
    "cantor",
    "choquet",
    "pluripolar",
    "full",
];

/// Settings used only by the verification suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    /// Probe points for the disc-versus-envelope comparisons.
    pub probes: Vec<ComplexPoint>,
    /// Point at which the open-set disc value is scored.
    pub open_point: ComplexPoint,
    pub open_sigma_target: f64,
    pub lower_tol: f64,
    pub upper_tol: f64,
    /// Optimizer for closed sets; the top-level optimizer serves open sets.
    pub closed_optimizer: OptimizerParams,
    pub radial_h: f64,
    pub radial_tol: f64,
    pub twist_sets: usize,
    pub twist_grid: usize,
    pub boundary_pairs: usize,
    pub cantor_levels: u32,
    pub capacity_h: f64,
    pub capacity_rel_tol: f64,
    pub rays: ProbeParams,
    pub polar: PolarParams,
}

fn probe_ring() -> Vec<ComplexPoint> {
    [(0.55, 0.0), (0.6, 1.0), (0.65, 2.0), (0.7, 3.0), (0.75, 4.0), (0.8, 5.0), (0.85, 0.5), (0.9, 1.5), (0.95, 2.5), (0.7, 0.0)]
        .iter()
        .map(|&(r, a)| ComplexPoint::one(Complex64::from_polar(r, a)))
        .collect()
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            probes: probe_ring(),
            open_point: ComplexPoint::real(0.7),
            open_sigma_target: 0.46,
            lower_tol: 0.03,
            upper_tol: 0.08,
            closed_optimizer: OptimizerParams {
                degree: 24,
                restarts: 8,
                ..OptimizerParams::default()
            },
            radial_h: 1.0 / 256.0,
            radial_tol: 2e-2,
            twist_sets: 20,
            twist_grid: 1024,
            boundary_pairs: 10,
            cantor_levels: 12,
            capacity_h: 1.0 / 128.0,
            capacity_rel_tol: 0.02,
            rays: ProbeParams::default(),
            polar: PolarParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "unit_disc")]
    pub domain: DomainSpec,
    #[serde(default)]
    pub sets: Vec<SetExpr>,
    #[serde(default)]
    pub probes: Vec<ComplexPoint>,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default)]
    pub optimizer: OptimizerParams,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub suite: Option<String>,
    #[serde(default)]
    pub verify: VerifySettings,
    /// Run directory; not part of the config hash.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn unit_disc() -> DomainSpec {
    DomainSpec::UnitDisc
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub grid_h: Option<f64>,
    pub degree: Option<usize>,
    pub restarts: Option<usize>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub suite: Option<String>,
}

fn cfg_err(path: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        msg: msg.into(),
    }
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            domain: DomainSpec::UnitDisc,
            sets: Vec::new(),
            probes: Vec::new(),
            solver: SolverParams::default(),
            optimizer: OptimizerParams::default(),
            seed: None,
            suite: None,
            verify: VerifySettings::default(),
            out: None,
        }
    }

    /// Reads JSON, or TOML when the extension is `.toml`.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "toml") {
            Self::from_toml(&text)
        } else {
            Self::from_json(&text)
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| cfg_err(&e.path().to_string(), e.inner().to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| cfg_err(&e.path().to_string(), e.inner().message()))
    }

    /// TOML integers are signed 64-bit, so seeds above `i64::MAX` only
    /// round-trip through JSON.
    pub fn to_toml(&self) -> Result<String> {
        let seeds = [
            ("seed", self.seed.unwrap_or(0)),
            ("optimizer.seed", self.optimizer.seed),
            ("verify.closed_optimizer.seed", self.verify.closed_optimizer.seed),
        ];
        if let Some((path, s)) = seeds.iter().find(|(_, s)| *s > i64::MAX as u64) {
            return Err(cfg_err(path, format!("{s} exceeds the TOML integer range; use JSON")));
        }
        toml::to_string(self).map_err(|e| cfg_err(".", e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = Some(s);
        }
        if let Some(p) = &o.out {
            self.out = Some(p.clone());
        }
        if let Some(h) = o.grid_h {
            self.solver.h = Some(h);
        }
        if let Some(d) = o.degree {
            self.optimizer.degree = d;
        }
        if let Some(r) = o.restarts {
            self.optimizer.restarts = r;
        }
        if let Some(m) = o.samples {
            self.optimizer.samples = m;
        }
        if let Some(t) = o.tol {
            self.solver.tol = t;
        }
        if let Some(s) = &o.suite {
            self.suite = Some(s.clone());
        }
    }

    /// Root seed, required for stochastic kinds.
    pub fn root_seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate().map_err(|e| cfg_err("domain", e.to_string()))?;
        if !(self.solver.tol > 0.0) {
            return Err(cfg_err("solver.tol", "must be positive"));
        }
        if let Some(h) = self.solver.h {
            if !(h > 0.0 && h < 1.0) {
                return Err(cfg_err("solver.h", "must lie in (0, 1)"));
            }
        }
        if self.solver.max_iter == 0 {
            return Err(cfg_err("solver.max_iter", "must be positive"));
        }
        if self.optimizer.degree == 0 {
            return Err(cfg_err("optimizer.degree", "must be positive"));
        }
        if !(self.optimizer.min_step > 0.0 && self.optimizer.initial_step > 0.0) {
            return Err(cfg_err("optimizer.min_step", "steps must be positive"));
        }
        if self.optimizer.samples <= 2 * self.optimizer.degree {
            return Err(cfg_err("optimizer.samples", "too few samples for the degree"));
        }
        for (i, s) in self.sets.iter().enumerate() {
            s.validate().map_err(|e| cfg_err(&format!("sets[{i}]"), e.to_string()))?;
        }
        for (i, p) in self.probes.iter().enumerate() {
            match self.domain.contains(p) {
                Ok(true) => {}
                Ok(false) => return Err(cfg_err(&format!("probes[{i}]"), "outside the domain")),
                Err(e) => return Err(cfg_err(&format!("probes[{i}]"), e.to_string())),
            }
        }
        let stochastic = matches!(self.kind, ExperimentKind::DiscOpt | ExperimentKind::Verify);
        if stochastic && self.seed.is_none() {
            return Err(cfg_err("seed", "required for stochastic runs"));
        }
        match self.kind {
            ExperimentKind::Verify => {
                let s = self.suite.as_deref().ok_or_else(|| cfg_err("suite", "required for verify"))?;
                if !SUITES.contains(&s) {
                    return Err(cfg_err("suite", format!("unknown suite `{s}`; known: {}", SUITES.join(", "))));
                }
                let v = &self.verify;
                for (name, x) in [
                    ("verify.radial_h", v.radial_h),
                    ("verify.capacity_h", v.capacity_h),
                    ("verify.radial_tol", v.radial_tol),
                    ("verify.upper_tol", v.upper_tol),
                    ("verify.lower_tol", v.lower_tol),
                    ("verify.capacity_rel_tol", v.capacity_rel_tol),
                ] {
                    if !(x > 0.0) {
                        return Err(cfg_err(name, "must be positive"));
                    }
                }
            }
            _ => {
                if self.sets.is_empty() {
                    return Err(cfg_err("sets", "at least one set is required"));
                }
            }
        }
        Ok(())
    }
}
