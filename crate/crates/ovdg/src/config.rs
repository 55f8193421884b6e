//! Experiment configuration: named presets, flat key=value files, and
//! override handling with provenance tracking.
//!
//! Every preset pins the parameters its experiment states outright; values
//! the write-up leaves open (limiter threshold, step-size power for the
//! highest-order runs, plot sampling) are defaults, and the echo written
//! next to the results marks each key as pinned, default, or user so a run
//! can always be audited.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{OvdgError, Result};
use crate::exact::SolitonParams;
use crate::limiter::LimiterConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Manufactured,
    Shock,
    Peakon,
    CdOneSoliton,
    CdTwoCuspon,
    CdTwoLoop,
    Custom,
}

impl Problem {
    pub const ALL: [Problem; 7] = [
        Problem::Manufactured,
        Problem::Shock,
        Problem::Peakon,
        Problem::CdOneSoliton,
        Problem::CdTwoCuspon,
        Problem::CdTwoLoop,
        Problem::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Problem::Manufactured => "manufactured",
            Problem::Shock => "shock",
            Problem::Peakon => "peakon",
            Problem::CdOneSoliton => "cd-one-soliton",
            Problem::CdTwoCuspon => "cd-two-cuspon",
            Problem::CdTwoLoop => "cd-two-loop",
            Problem::Custom => "custom",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Problem::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| OvdgError::InvalidConfig(format!("unknown problem {s:?}")))
    }

    pub fn summary(self) -> &'static str {
        match self {
            Problem::Manufactured => "forced smooth wave on [0,2pi], gamma = 1, T = 1",
            Problem::Shock => "steepening cosine on [0,1], gamma = -1, TVB limiter, T = 36",
            Problem::Peakon => "travelling corner wave on [0,1], gamma = -1, one period",
            Problem::CdOneSoliton => "transformed-plane soliton on [-20,20], c = 2, T = 1",
            Problem::CdTwoCuspon => "two-cuspon collision, c = -2, frames to T = 40",
            Problem::CdTwoLoop => "two-loop collision, c = 0, frames to T = 40",
            Problem::Custom => "no pinned values; configure everything by hand",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    EnergyDg,
    HamiltonianDg,
    IntegrationDg,
    CdDg,
    CdIntegrationDg,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::EnergyDg,
        Scheme::HamiltonianDg,
        Scheme::IntegrationDg,
        Scheme::CdDg,
        Scheme::CdIntegrationDg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::EnergyDg => "energy-dg",
            Scheme::HamiltonianDg => "hamiltonian-dg",
            Scheme::IntegrationDg => "integration-dg",
            Scheme::CdDg => "cd-dg",
            Scheme::CdIntegrationDg => "cd-integration-dg",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| OvdgError::InvalidConfig(format!("unknown scheme {s:?}")))
    }

    /// True for the schemes that march the transformed-plane system.
    pub fn is_cd(self) -> bool {
        matches!(self, Scheme::CdDg | Scheme::CdIntegrationDg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialData {
    Sine,
    ShockCos,
    Peakon,
    Soliton,
}

impl InitialData {
    pub fn name(self) -> &'static str {
        match self {
            InitialData::Sine => "sine",
            InitialData::ShockCos => "shock-cos",
            InitialData::Peakon => "peakon",
            InitialData::Soliton => "soliton",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        [
            InitialData::Sine,
            InitialData::ShockCos,
            InitialData::Peakon,
            InitialData::Soliton,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| OvdgError::InvalidConfig(format!("unknown initial data {s:?}")))
    }
}

/// Where a configuration value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Stated by the experiment the preset reproduces.
    Pinned,
    /// Chosen here because the experiment leaves it open.
    Default,
    /// Supplied through a file or a command-line override.
    User,
}

impl Origin {
    fn marker(self) -> &'static str {
        match self {
            Origin::Pinned => "pinned",
            Origin::Default => "default",
            Origin::User => "user",
        }
    }
}

/// Echo order; also the complete set of recognized keys.
const KEYS: [&str; 23] = [
    "problem",
    "scheme",
    "initial",
    "degree",
    "n",
    "n_sweep",
    "t_end",
    "cfl",
    "dt_h_pow",
    "gamma",
    "c",
    "domain_a",
    "domain_b",
    "k1",
    "k2",
    "eta10",
    "eta20",
    "limiter",
    "limiter_m",
    "snapshot_times",
    "samples_per_cell",
    "series_stride",
    "out_dir",
];

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub scheme: Scheme,
    pub initial: InitialData,
    pub degree: usize,
    pub n: usize,
    /// Resolutions for a convergence sweep; empty means single-run only.
    pub n_sweep: Vec<usize>,
    pub t_end: f64,
    pub cfl: f64,
    /// dt = cfl * h^dt_h_pow; powers above 1 keep the stepping error below
    /// fourth- and fifth-order spatial errors.
    pub dt_h_pow: f64,
    pub gamma: f64,
    pub c: f64,
    pub domain: (f64, f64),
    pub k1: f64,
    pub k2: Option<f64>,
    pub eta10: f64,
    pub eta20: f64,
    pub limiter: bool,
    pub limiter_m: f64,
    pub snapshot_times: Vec<f64>,
    pub samples_per_cell: usize,
    pub series_stride: usize,
    pub out_dir: Option<PathBuf>,
    origins: BTreeMap<&'static str, Origin>,
}

impl ExperimentConfig {
    /// Baseline with nothing pinned; this is also the `custom` preset.
    fn base() -> Self {
        let origins = KEYS.iter().map(|&k| (k, Origin::Default)).collect();
        ExperimentConfig {
            problem: Problem::Custom,
            scheme: Scheme::EnergyDg,
            initial: InitialData::Sine,
            degree: 1,
            n: 40,
            n_sweep: Vec::new(),
            t_end: 1.0,
            cfl: 0.1,
            dt_h_pow: 1.0,
            gamma: 1.0,
            c: 0.0,
            domain: (0.0, 2.0 * std::f64::consts::PI),
            k1: 1.0,
            k2: None,
            eta10: 0.0,
            eta20: 0.0,
            limiter: false,
            limiter_m: 1.0,
            snapshot_times: Vec::new(),
            samples_per_cell: 4,
            series_stride: 1,
            out_dir: None,
            origins,
        }
    }

    pub fn preset(problem: Problem) -> Self {
        let mut cfg = ExperimentConfig::base();
        cfg.problem = problem;
        cfg.origins.insert("problem", Origin::User);
        let pin = |cfg: &mut ExperimentConfig, key: &'static str| {
            cfg.origins.insert(key, Origin::Pinned);
        };
        match problem {
            Problem::Manufactured => {
                cfg.initial = InitialData::Sine;
                cfg.t_end = 1.0;
                cfg.gamma = 1.0;
                cfg.n = 20;
                cfg.n_sweep = vec![20, 40, 80, 160, 320];
                for k in ["initial", "t_end", "cfl", "gamma", "domain_a", "domain_b"] {
                    pin(&mut cfg, k);
                }
            }
            Problem::Shock => {
                cfg.scheme = Scheme::EnergyDg;
                cfg.initial = InitialData::ShockCos;
                cfg.degree = 2;
                cfg.n = 160;
                cfg.t_end = 36.0;
                cfg.gamma = -1.0;
                cfg.domain = (0.0, 1.0);
                cfg.limiter = true;
                cfg.snapshot_times = vec![0.0, 6.0, 12.0, 18.0, 24.0, 30.0, 36.0];
                for k in [
                    "scheme", "initial", "degree", "n", "t_end", "cfl", "gamma", "domain_a",
                    "domain_b", "limiter",
                ] {
                    pin(&mut cfg, k);
                }
            }
            Problem::Peakon => {
                cfg.scheme = Scheme::EnergyDg;
                cfg.initial = InitialData::Peakon;
                cfg.degree = 2;
                cfg.n = 80;
                cfg.n_sweep = vec![20, 40, 80, 160];
                cfg.t_end = 36.0;
                cfg.gamma = -1.0;
                cfg.domain = (0.0, 1.0);
                cfg.snapshot_times = vec![0.0, 36.0];
                for k in [
                    "scheme", "initial", "n_sweep", "t_end", "cfl", "gamma", "domain_a",
                    "domain_b",
                ] {
                    pin(&mut cfg, k);
                }
            }
            Problem::CdOneSoliton => {
                cfg.scheme = Scheme::CdDg;
                cfg.initial = InitialData::Soliton;
                cfg.degree = 2;
                cfg.n = 80;
                cfg.n_sweep = vec![20, 40, 80, 160, 320];
                cfg.t_end = 1.0;
                cfg.gamma = -3.0;
                cfg.c = 2.0;
                cfg.domain = (-20.0, 20.0);
                cfg.k1 = 1.0;
                cfg.snapshot_times = vec![0.0, 1.0];
                for k in [
                    "initial", "n_sweep", "t_end", "cfl", "gamma", "c", "domain_a", "domain_b",
                    "k1", "k2",
                ] {
                    pin(&mut cfg, k);
                }
            }
            Problem::CdTwoCuspon => {
                cfg.scheme = Scheme::CdDg;
                cfg.initial = InitialData::Soliton;
                cfg.degree = 2;
                cfg.n = 320;
                cfg.t_end = 40.0;
                cfg.gamma = -3.0;
                cfg.c = -2.0;
                cfg.domain = (-20.0, 20.0);
                cfg.k1 = 2.0;
                cfg.k2 = Some(2.6);
                cfg.eta10 = -40.0;
                cfg.eta20 = -52.0;
                cfg.snapshot_times = vec![0.0, 10.0, 20.0, 40.0];
                for k in [
                    "initial",
                    "degree",
                    "n",
                    "t_end",
                    "cfl",
                    "gamma",
                    "c",
                    "k1",
                    "k2",
                    "eta10",
                    "eta20",
                    "snapshot_times",
                ] {
                    pin(&mut cfg, k);
                }
            }
            Problem::CdTwoLoop => {
                cfg.scheme = Scheme::CdDg;
                cfg.initial = InitialData::Soliton;
                cfg.degree = 2;
                cfg.n = 320;
                cfg.t_end = 40.0;
                cfg.gamma = -3.0;
                cfg.c = 0.0;
                cfg.domain = (-20.0, 20.0);
                cfg.k1 = 1.2;
                cfg.k2 = Some(1.5);
                cfg.eta10 = -24.0;
                cfg.eta20 = -30.0;
                cfg.snapshot_times = vec![0.0, 10.0, 20.0, 40.0];
                for k in [
                    "initial",
                    "degree",
                    "n",
                    "t_end",
                    "cfl",
                    "gamma",
                    "c",
                    "k1",
                    "k2",
                    "eta10",
                    "eta20",
                    "snapshot_times",
                ] {
                    pin(&mut cfg, k);
                }
            }
            Problem::Custom => {}
        }
        cfg
    }

    pub fn origin(&self, key: &str) -> Option<Origin> {
        self.origins.get(key).copied()
    }

    /// Applies one key=value pair; `origin` records who supplied it.
    pub fn apply(&mut self, key: &str, value: &str, origin: Origin) -> Result<()> {
        let bad = |what: &str| OvdgError::InvalidConfig(format!("{key} = {value:?}: {what}"));
        let f = |v: &str| -> Result<f64> { v.parse().map_err(|_| bad("expected a number")) };
        let u = |v: &str| -> Result<usize> { v.parse().map_err(|_| bad("expected an integer")) };
        match key {
            "problem" => self.problem = Problem::from_name(value)?,
            "scheme" => self.scheme = Scheme::from_name(value)?,
            "initial" => self.initial = InitialData::from_name(value)?,
            "degree" => self.degree = u(value)?,
            "n" => self.n = u(value)?,
            "n_sweep" => self.n_sweep = parse_list(value, u)?,
            "t_end" => self.t_end = f(value)?,
            "cfl" => self.cfl = f(value)?,
            "dt_h_pow" => self.dt_h_pow = f(value)?,
            "gamma" => self.gamma = f(value)?,
            "c" => self.c = f(value)?,
            "domain_a" => self.domain.0 = f(value)?,
            "domain_b" => self.domain.1 = f(value)?,
            "k1" => self.k1 = f(value)?,
            "k2" => self.k2 = if value == "none" { None } else { Some(f(value)?) },
            "eta10" => self.eta10 = f(value)?,
            "eta20" => self.eta20 = f(value)?,
            "limiter" => {
                self.limiter = match value {
                    "on" | "true" => true,
                    "off" | "false" => false,
                    _ => return Err(bad("expected on or off")),
                }
            }
            "limiter_m" => self.limiter_m = f(value)?,
            "snapshot_times" => self.snapshot_times = parse_list(value, f)?,
            "samples_per_cell" => self.samples_per_cell = u(value)?,
            "series_stride" => self.series_stride = u(value)?,
            "out_dir" => {
                self.out_dir = if value == "none" {
                    None
                } else {
                    Some(PathBuf::from(value))
                }
            }
            _ => return Err(OvdgError::InvalidConfig(format!("unknown key {key:?}"))),
        }
        if let Some(k) = KEYS.iter().find(|&&k| k == key) {
            self.origins.insert(k, origin);
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, pairs: &[(String, String)]) -> Result<()> {
        for (k, v) in pairs {
            self.apply(k, v, Origin::User)?;
        }
        Ok(())
    }

    /// Reads a flat key=value file. The `problem` key selects the preset;
    /// every other key overrides it, in file order.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| OvdgError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                OvdgError::InvalidConfig(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    idx + 1
                ))
            })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let problem = pairs
            .iter()
            .find(|(k, _)| k == "problem")
            .map(|(_, v)| Problem::from_name(v))
            .transpose()?
            .ok_or_else(|| {
                OvdgError::InvalidConfig(format!("{}: missing problem key", path.display()))
            })?;
        let mut cfg = ExperimentConfig::preset(problem);
        for (k, v) in &pairs {
            if k != "problem" {
                cfg.apply(k, v, Origin::User)?;
            }
        }
        Ok(cfg)
    }

    fn value_text(&self, key: &str) -> String {
        match key {
            "problem" => self.problem.name().to_string(),
            "scheme" => self.scheme.name().to_string(),
            "initial" => self.initial.name().to_string(),
            "degree" => self.degree.to_string(),
            "n" => self.n.to_string(),
            "n_sweep" => join_list(self.n_sweep.iter()),
            "t_end" => self.t_end.to_string(),
            "cfl" => self.cfl.to_string(),
            "dt_h_pow" => self.dt_h_pow.to_string(),
            "gamma" => self.gamma.to_string(),
            "c" => self.c.to_string(),
            "domain_a" => self.domain.0.to_string(),
            "domain_b" => self.domain.1.to_string(),
            "k1" => self.k1.to_string(),
            "k2" => self.k2.map_or("none".to_string(), |v| v.to_string()),
            "eta10" => self.eta10.to_string(),
            "eta20" => self.eta20.to_string(),
            "limiter" => if self.limiter { "on" } else { "off" }.to_string(),
            "limiter_m" => self.limiter_m.to_string(),
            "snapshot_times" => join_list(self.snapshot_times.iter()),
            "samples_per_cell" => self.samples_per_cell.to_string(),
            "series_stride" => self.series_stride.to_string(),
            "out_dir" => self
                .out_dir
                .as_ref()
                .map_or("none".to_string(), |p| p.display().to_string()),
            _ => unreachable!("unlisted key {key}"),
        }
    }

    /// Fully resolved configuration, one key per line, each marked with its
    /// provenance. The text parses back through `from_file`.
    pub fn echo(&self) -> String {
        let mut s = String::from(
            "# resolved configuration; pinned = stated by the experiment,\n\
             # default = left open, user = file or flag override\n",
        );
        for key in KEYS {
            let origin = self.origins[key].marker();
            let _ = writeln!(s, "{key} = {}  # {origin}", self.value_text(key));
        }
        s
    }

    pub fn limiter_config(&self) -> LimiterConfig {
        if self.limiter {
            LimiterConfig::tvb(self.limiter_m)
        } else {
            LimiterConfig::off()
        }
    }

    pub fn soliton_params(&self) -> SolitonParams {
        match self.k2 {
            Some(k2) => SolitonParams::two(self.k1, k2, self.c, self.eta10, self.eta20),
            None => SolitonParams::one(self.k1, self.c, self.eta10),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |what: String| Err(OvdgError::InvalidConfig(what));
        if self.degree > 8 {
            return fail(format!("degree {} exceeds the supported 8", self.degree));
        }
        if self.n == 0 {
            return fail("n must be positive".to_string());
        }
        if !(self.t_end >= 0.0) {
            return fail(format!("t_end {} must be nonnegative", self.t_end));
        }
        if !(self.cfl > 0.0) {
            return fail(format!("cfl {} must be positive", self.cfl));
        }
        if !(self.dt_h_pow >= 0.5 && self.dt_h_pow <= 3.0) {
            return fail(format!("dt_h_pow {} outside [0.5, 3]", self.dt_h_pow));
        }
        if !(self.domain.0 < self.domain.1) {
            return fail(format!(
                "domain [{}, {}] is empty",
                self.domain.0, self.domain.1
            ));
        }
        if self.samples_per_cell == 0 || self.series_stride == 0 {
            return fail("samples_per_cell and series_stride must be positive".to_string());
        }
        if self.limiter && self.limiter_m < 0.0 {
            return fail(format!("limiter_m {} must be nonnegative", self.limiter_m));
        }
        let wants_cd = self.initial == InitialData::Soliton;
        if self.scheme.is_cd() != wants_cd {
            return fail(format!(
                "scheme {} does not march {} initial data",
                self.scheme.name(),
                self.initial.name()
            ));
        }
        if wants_cd {
            if (self.k1 * self.k1 - self.c).abs() < 1e-12 {
                return fail("k1^2 - c vanishes; the phase slope is undefined".to_string());
            }
            if let Some(k2) = self.k2 {
                if (k2 * k2 - self.c).abs() < 1e-12 {
                    return fail("k2^2 - c vanishes; the phase slope is undefined".to_string());
                }
            }
        }
        if self.limiter && self.scheme.is_cd() {
            return fail("the limiter applies to the physical-plane schemes only".to_string());
        }
        for t in &self.snapshot_times {
            if *t < 0.0 || *t > self.t_end {
                return fail(format!("snapshot time {t} outside [0, {}]", self.t_end));
            }
        }
        Ok(())
    }
}

fn parse_list<T>(value: &str, one: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    if value == "none" || value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|p| one(p.trim())).collect()
}

fn join_list<T: ToString>(items: impl ExactSizeIterator<Item = T>) -> String {
    if items.len() == 0 {
        return "none".to_string();
    }
    items
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
