//! TOML run configuration, command-line overrides and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use rmean_core::curvature::ConstantMode;
use rmean_core::stability::Branch;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyAlgebra,
    Oscillate,
    CheckTheorem1,
    CheckTheorem2,
    ProbeGauss,
    ProbeEnvelope,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::VerifyAlgebra => "verify-algebra",
            Command::Oscillate => "oscillate",
            Command::CheckTheorem1 => "check-theorem1",
            Command::CheckTheorem2 => "check-theorem2",
            Command::ProbeGauss => "probe-gauss",
            Command::ProbeEnvelope => "probe-envelope",
        }
    }

    /// Name of the config table holding this command's settings.
    pub fn section(self) -> &'static str {
        match self {
            Command::VerifyAlgebra => "verify_algebra",
            Command::Oscillate => "oscillate",
            Command::CheckTheorem1 => "theorem1",
            Command::CheckTheorem2 => "theorem2",
            Command::ProbeGauss => "probe_gauss",
            Command::ProbeEnvelope => "probe_envelope",
        }
    }
}

/// A radial map `t ↦ value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapConfig {
    Constant {
        value: f64,
    },
    /// `coef · t^exponent`
    Power {
        #[serde(default = "one")]
        coef: f64,
        exponent: f64,
    },
    /// `coef · e^{rate t}`
    Exponential {
        #[serde(default = "one")]
        coef: f64,
        rate: f64,
    },
    /// Two-column `(t, value)` CSV.
    Csv {
        path: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    Cylinder {
        radius: f64,
        range: [f64; 2],
    },
    Catenoid {
        range: [f64; 2],
    },
    Sphere {
        range: [f64; 2],
    },
    /// Columns `s, rho, h` and optionally `rho', h'`.
    Csv {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub m: usize,
    pub profile: ProfileConfig,
    #[serde(default)]
    pub flip: bool,
}

/// Radial data for the theorem checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataConfig {
    Synthetic {
        m: usize,
        j: usize,
        /// Constant `H_{j+1}`; zero when omitted.
        #[serde(default)]
        hj1: f64,
        v_j: MapConfig,
        /// Defaults to the zero map.
        v_1: Option<MapConfig>,
        exact_potential: Option<MapConfig>,
    },
    Surface {
        surface: SurfaceConfig,
        j: usize,
        /// Treat the first profile point as a pole although `ρ > 0` there.
        #[serde(default)]
        assert_pole_chart: bool,
        r0: Option<f64>,
    },
}

impl DataConfig {
    pub fn indices(&self) -> (usize, usize) {
        match self {
            DataConfig::Synthetic { m, j, .. } => (*m, *j),
            DataConfig::Surface { surface, j, .. } => (surface.m, *j),
        }
    }

    fn index_path(&self) -> (&'static str, &'static str) {
        match self {
            DataConfig::Synthetic { .. } => ("data.m", "data.j"),
            DataConfig::Surface { .. } => ("data.surface.m", "data.j"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StartConfig {
    /// `z(0+) = z0`, `z'` bounded.
    Singular {
        #[serde(default = "one")]
        z0: f64,
    },
    /// `z(t0) = z0`, `z'(t0) = zp0`.
    Interior {
        #[serde(default)]
        t0: f64,
        #[serde(default = "one")]
        z0: f64,
        #[serde(default)]
        zp0: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyAlgebra {
    /// Smallest dimension drawn.
    pub m: usize,
    /// Largest dimension drawn; equal to `m` when omitted.
    pub m_max: Option<usize>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Oscillate {
    pub v: MapConfig,
    pub a: MapConfig,
    /// Singular when `v` vanishes at the origin, else interior at 0.
    pub start: Option<StartConfig>,
    /// Lower limit of `∫_T^t √A`; defaults to `min(1, t_max/20)`.
    pub t_lower: Option<f64>,
    /// Prefactor of the Rayleigh numerator.
    #[serde(default = "one")]
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem {
    pub data: DataConfig,
    /// Hypothesis branch, Theorem 1 only.
    pub branch: Option<BranchConfig>,
    /// Certificates are issued for zero pairs beyond this radius.
    #[serde(default)]
    pub radius: f64,
    #[serde(default = "one")]
    pub z0: f64,
    /// Start of the solve when `v_j` does not vanish at the origin.
    #[serde(default)]
    pub interior_start: f64,
    pub t_lower: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchConfig {
    I,
    Ii,
}

impl From<BranchConfig> for Branch {
    fn from(b: BranchConfig) -> Self {
        match b {
            BranchConfig::I => Branch::I,
            BranchConfig::Ii => Branch::Ii,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    pub surface: SurfaceConfig,
    /// Equator normal `a` or envelope point `q`, in `R^{m+1}`.
    pub vector: Vec<f64>,
    pub window: [f64; 2],
    #[serde(default = "default_probe_samples")]
    pub samples: usize,
}

fn default_probe_samples() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_report")]
    pub report: String,
}

impl Default for Output {
    fn default() -> Self {
        Self { dir: default_out_dir(), report: default_report() }
    }
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_report() -> String {
    "report.json".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Mandatory for `verify-algebra`.
    pub seed: Option<u64>,
    #[serde(default)]
    pub constant_mode: ConstantMode,
    /// Solver tolerance, or the residual bound of `verify-algebra`.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Radial extent; surface data default to the profile length.
    pub t_max: Option<f64>,
    #[serde(default)]
    pub output: Output,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify_algebra: Option<VerifyAlgebra>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oscillate: Option<Oscillate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem1: Option<Theorem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem2: Option<Theorem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_gauss: Option<Probe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_envelope: Option<Probe>,
    /// Directory against which relative input paths resolve.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_tol() -> f64 {
    1e-10
}

/// Command-line values that replace their config counterparts.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub constant_mode: Option<ConstantMode>,
    pub t_max: Option<f64>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Every problem found in a config, each naming its field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<FieldError>);

impl ConfigErrors {
    pub fn paths(&self) -> Vec<&str> {
        self.0.iter().map(|e| e.path.as_str()).collect()
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for e in &self.0 {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

struct Checker<'a> {
    errors: Vec<FieldError>,
    base: &'a Path,
}

impl Checker<'_> {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.errors.push(FieldError { path: path.into(), message: message.into() });
    }

    fn positive(&mut self, path: &str, x: f64) {
        if !(x > 0.0 && x.is_finite()) {
            self.push(path, format!("must be positive, got {x}"));
        }
    }

    fn file(&mut self, path: &str, p: &Path) {
        let full = self.base.join(p);
        if !full.is_file() {
            self.push(path, format!("file {} does not exist", full.display()));
        }
    }

    fn map(&mut self, path: &str, def: &MapConfig) {
        match def {
            MapConfig::Constant { value } if !value.is_finite() => self.push(path, "value must be finite"),
            MapConfig::Power { coef, exponent } if !(coef.is_finite() && exponent.is_finite()) => {
                self.push(path, "coef and exponent must be finite")
            }
            MapConfig::Exponential { coef, rate } if !(coef.is_finite() && rate.is_finite()) => {
                self.push(path, "coef and rate must be finite")
            }
            MapConfig::Csv { path: p } => self.file(&format!("{path}.path"), p),
            _ => {}
        }
    }

    fn range(&mut self, path: &str, [lo, hi]: [f64; 2]) {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            self.push(path, format!("[{lo}, {hi}] is not an increasing interval"));
        }
    }

    fn surface(&mut self, path: &str, s: &SurfaceConfig) {
        if s.m < 2 {
            self.push(format!("{path}.m"), format!("dimension must be at least 2, got {}", s.m));
        }
        let p = format!("{path}.profile");
        match &s.profile {
            ProfileConfig::Cylinder { radius, range } => {
                self.positive(&format!("{p}.radius"), *radius);
                self.range(&format!("{p}.range"), *range);
            }
            ProfileConfig::Catenoid { range } | ProfileConfig::Sphere { range } => {
                self.range(&format!("{p}.range"), *range)
            }
            ProfileConfig::Csv { path: f } => self.file(&format!("{p}.path"), f),
        }
    }

    fn indices(&mut self, section: &str, data: &DataConfig) {
        let (m, j) = data.indices();
        let (mp, jp) = data.index_path();
        if m < 2 {
            self.push(format!("{section}.{mp}"), format!("dimension must be at least 2, got {m}"));
        } else if j + 2 > m {
            self.push(format!("{section}.{jp}"), format!("must satisfy 0 <= j <= m-2 = {}, got {j}", m - 2));
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, ConfigErrors> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| {
            ConfigErrors(vec![FieldError { path: "<document>".into(), message: e.message().to_string() }])
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    /// Reads a config file; relative input paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigErrors> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigErrors(vec![FieldError { path: "--config".into(), message: format!("{}: {e}", path.display()) }])
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(dir) = &o.out {
            self.output.dir = dir.clone();
        }
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if let Some(mode) = o.constant_mode {
            self.constant_mode = mode;
        }
        if o.t_max.is_some() {
            self.t_max = o.t_max;
        }
        if let Some(tol) = o.tol {
            self.tol = tol;
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let mut c = Checker { errors: Vec::new(), base: &self.base_dir };
        c.positive("tol", self.tol);
        if let Some(t) = self.t_max {
            c.positive("t_max", t);
        }
        if self.output.report.is_empty() {
            c.push("output.report", "file name is empty");
        }
        let section = self.command.section();
        let missing = |c: &mut Checker| c.push(section, format!("table required by {}", self.command.as_str()));
        match self.command {
            Command::VerifyAlgebra => {
                if self.seed.is_none() {
                    c.push("seed", "required by verify-algebra");
                }
                match &self.verify_algebra {
                    None => missing(&mut c),
                    Some(v) => {
                        if v.m < 2 {
                            c.push("verify_algebra.m", format!("dimension must be at least 2, got {}", v.m));
                        }
                        if let Some(hi) = v.m_max {
                            if hi < v.m {
                                c.push("verify_algebra.m_max", format!("must be at least m = {}, got {hi}", v.m));
                            }
                        }
                        if v.samples == 0 {
                            c.push("verify_algebra.samples", "must be at least 1");
                        }
                    }
                }
            }
            Command::Oscillate => match &self.oscillate {
                None => missing(&mut c),
                Some(o) => {
                    if self.t_max.is_none() {
                        c.push("t_max", "required by oscillate");
                    }
                    c.map("oscillate.v", &o.v);
                    c.map("oscillate.a", &o.a);
                    if let Some(t) = o.t_lower {
                        c.positive("oscillate.t_lower", t);
                    }
                    c.positive("oscillate.factor", o.factor);
                    match o.start {
                        Some(StartConfig::Singular { z0 }) => c.positive("oscillate.start.z0", z0),
                        Some(StartConfig::Interior { t0, .. }) if !(t0 >= 0.0) => {
                            c.push("oscillate.start.t0", format!("must be nonnegative, got {t0}"))
                        }
                        _ => {}
                    }
                }
            },
            Command::CheckTheorem1 | Command::CheckTheorem2 => {
                let th = if self.command == Command::CheckTheorem1 { &self.theorem1 } else { &self.theorem2 };
                match th {
                    None => missing(&mut c),
                    Some(t) => self.check_theorem(&mut c, section, t),
                }
            }
            Command::ProbeGauss | Command::ProbeEnvelope => {
                let p = if self.command == Command::ProbeGauss { &self.probe_gauss } else { &self.probe_envelope };
                match p {
                    None => missing(&mut c),
                    Some(p) => {
                        c.surface(&format!("{section}.surface"), &p.surface);
                        if p.vector.len() != p.surface.m + 1 {
                            c.push(
                                format!("{section}.vector"),
                                format!("needs m+1 = {} entries, got {}", p.surface.m + 1, p.vector.len()),
                            );
                        }
                        c.range(&format!("{section}.window"), p.window);
                        if p.samples < 2 {
                            c.push(format!("{section}.samples"), "must be at least 2");
                        }
                    }
                }
            }
        }
        if c.errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(c.errors))
        }
    }

    fn check_theorem(&self, c: &mut Checker, section: &str, t: &Theorem) {
        c.indices(section, &t.data);
        match &t.data {
            DataConfig::Synthetic { hj1, v_j, v_1, exact_potential, .. } => {
                if self.t_max.is_none() {
                    c.push("t_max", "required for synthetic data");
                }
                c.map(&format!("{section}.data.v_j"), v_j);
                if let Some(v1) = v_1 {
                    c.map(&format!("{section}.data.v_1"), v1);
                }
                if let Some(e) = exact_potential {
                    c.map(&format!("{section}.data.exact_potential"), e);
                }
                if self.command == Command::CheckTheorem1 && !(*hj1 > 0.0) {
                    c.push(format!("{section}.data.hj1"), format!("must be a positive constant, got {hj1}"));
                }
                if self.command == Command::CheckTheorem2 {
                    if *hj1 != 0.0 {
                        c.push(format!("{section}.data.hj1"), format!("must be 0, got {hj1}"));
                    }
                    if exact_potential.is_none() {
                        c.push(format!("{section}.data.exact_potential"), "required by check-theorem2");
                    }
                }
            }
            DataConfig::Surface { surface, r0, .. } => {
                c.surface(&format!("{section}.data.surface"), surface);
                if let Some(r) = r0 {
                    c.positive(&format!("{section}.data.r0"), *r);
                }
            }
        }
        match (self.command, t.branch) {
            (Command::CheckTheorem1, None) => c.push(format!("{section}.branch"), "required: \"i\" or \"ii\""),
            (Command::CheckTheorem2, Some(_)) => {
                c.push(format!("{section}.branch"), "check-theorem2 runs both branches; remove this field")
            }
            _ => {}
        }
        c.positive(&format!("{section}.z0"), t.z0);
        if !(t.radius >= 0.0) {
            c.push(format!("{section}.radius"), format!("must be nonnegative, got {}", t.radius));
        }
        if !(t.interior_start >= 0.0) {
            c.push(format!("{section}.interior_start"), format!("must be nonnegative, got {}", t.interior_start));
        }
        if let Some(tl) = t.t_lower {
            c.positive(&format!("{section}.t_lower"), tl);
        }
    }
}
