//! Run configuration: a TOML file with named sections.
//!
//! ```toml
//! dim = 60
//! hbar = 1.0
//! omega_ref = "auto"
//!
//! [schedule]
//! kind = "exponential"
//! k0 = 1.0
//! rate = 0.2
//!
//! [time]
//! t1 = 5.0
//! n_steps = 5000
//! record_every = 50
//!
//! [state]
//! kind = "ground"
//!
//! [output]
//! path = "reference.csv"
//! format = "csv"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::evolution::{ground_state, thermal_state, DensityMatrix};
use crate::operators::{build_ladder_basis, LadderBasis, ScheduleKind, SpringSchedule, DEFAULT_FLOOR_FRACTION};

/// Smallest accepted truncation for a simulation run.
pub const MIN_RUN_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default)]
    pub omega_ref: OmegaRef,
    pub schedule: ScheduleConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub state: StateConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Reference frequency of the Fock basis; `"auto"` means `√k0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaRef {
    Value(f64),
    Keyword(Auto),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Auto {
    Auto,
}

impl Default for OmegaRef {
    fn default() -> Self {
        OmegaRef::Keyword(Auto::Auto)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub kind: ScheduleKind,
    pub k0: f64,
    #[serde(default)]
    pub rate: f64,
    /// Floor of linear schedules as a fraction of `k0`.
    #[serde(default = "default_floor")]
    pub t_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    pub n_steps: usize,
    #[serde(default = "one_usize")]
    pub record_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    #[default]
    Ground,
    Thermal,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    #[serde(default)]
    pub kind: StateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_path")]
    pub path: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { path: default_path(), format: OutputFormat::Csv }
    }
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn default_floor() -> f64 {
    DEFAULT_FLOOR_FRACTION
}

fn default_path() -> PathBuf {
    PathBuf::from("trajectory.csv")
}

/// Config problem, with the offending line when it came from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config line {line}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// A validation failure tied to a `section.key` path.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub section: Option<&'static str>,
    pub key: &'static str,
    pub message: String,
}

impl FieldError {
    fn new(section: Option<&'static str>, key: &'static str, message: impl Into<String>) -> Self {
        FieldError { section, key, message: message.into() }
    }

    pub fn path(&self) -> String {
        match self.section {
            Some(s) => format!("{s}.{}", self.key),
            None => self.key.to_string(),
        }
    }
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub dim: Option<usize>,
    pub hbar: Option<f64>,
    pub omega_ref: Option<OmegaRef>,
    pub kind: Option<ScheduleKind>,
    pub k0: Option<f64>,
    pub rate: Option<f64>,
    pub t_floor: Option<f64>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub n_steps: Option<usize>,
    pub record_every: Option<usize>,
    pub state: Option<StateKind>,
    pub beta: Option<f64>,
    pub path: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl Overrides {
    fn touches(&self, field: &FieldError) -> bool {
        match (field.section, field.key) {
            (None, "dim") => self.dim.is_some(),
            (None, "hbar") => self.hbar.is_some(),
            (None, "omega_ref") => self.omega_ref.is_some(),
            (Some("schedule"), "kind") => self.kind.is_some(),
            (Some("schedule"), "k0") => self.k0.is_some(),
            (Some("schedule"), "rate") => self.rate.is_some(),
            (Some("schedule"), "t_floor") => self.t_floor.is_some(),
            (Some("time"), "t0") => self.t0.is_some(),
            (Some("time"), "t1") => self.t1.is_some(),
            (Some("time"), "n_steps") => self.n_steps.is_some(),
            (Some("time"), "record_every") => self.record_every.is_some(),
            (Some("state"), "kind") => self.state.is_some(),
            (Some("state"), "beta") => self.beta.is_some(),
            _ => false,
        }
    }
}

impl RunConfig {
    /// The reference protocol: `k(t) = e^{−0.2t}` on `[0, 5]`, 60 levels,
    /// 5000 RK4 steps from the ground state.
    pub fn reference() -> Self {
        RunConfig {
            dim: 60,
            hbar: 1.0,
            omega_ref: OmegaRef::default(),
            schedule: ScheduleConfig {
                kind: ScheduleKind::Exponential,
                k0: 1.0,
                rate: 0.2,
                t_floor: DEFAULT_FLOOR_FRACTION,
            },
            time: TimeConfig { t0: 0.0, t1: 5.0, n_steps: 5000, record_every: 50 },
            state: StateConfig::default(),
            output: OutputConfig { path: PathBuf::from("reference.csv"), format: OutputFormat::Csv },
        }
    }

    /// Parses and validates a config file's contents.
    pub fn parse(src: &str) -> Result<Self, ConfigError> {
        Self::parse_with(src, &Overrides::default())
    }

    /// Parses, applies flag overrides, then validates.
    pub fn parse_with(src: &str, overrides: &Overrides) -> Result<Self, ConfigError> {
        let mut config: RunConfig = toml::from_str(src).map_err(|e| ConfigError {
            line: e.span().map(|s| line_at(src, s.start)),
            message: e.message().trim_end().to_string(),
        })?;
        config.apply(overrides);
        config.validate().map_err(|f| {
            let line = if overrides.touches(&f) { None } else { locate(src, f.section, f.key) };
            ConfigError { line, message: format!("{}: {}", f.path(), f.message) }
        })?;
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| ConfigError { line: None, message: format!("cannot read {}: {e}", path.display()) })?;
        Self::parse_with(&src, overrides)
    }

    /// Canonical TOML form; parsing it returns an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn apply(&mut self, o: &Overrides) {
        fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        set(&mut self.dim, &o.dim);
        set(&mut self.hbar, &o.hbar);
        set(&mut self.omega_ref, &o.omega_ref);
        set(&mut self.schedule.kind, &o.kind);
        set(&mut self.schedule.k0, &o.k0);
        set(&mut self.schedule.rate, &o.rate);
        set(&mut self.schedule.t_floor, &o.t_floor);
        set(&mut self.time.t0, &o.t0);
        set(&mut self.time.t1, &o.t1);
        set(&mut self.time.n_steps, &o.n_steps);
        set(&mut self.time.record_every, &o.record_every);
        set(&mut self.state.kind, &o.state);
        if o.beta.is_some() {
            self.state.beta = o.beta;
        }
        set(&mut self.output.path, &o.path);
        set(&mut self.output.format, &o.format);
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        let top = None;
        let sch = Some("schedule");
        let time = Some("time");
        let state = Some("state");
        if self.dim < MIN_RUN_DIM {
            return Err(FieldError::new(top, "dim", format!("must be at least {MIN_RUN_DIM}, got {}", self.dim)));
        }
        positive(top, "hbar", self.hbar)?;
        if let OmegaRef::Value(w) = self.omega_ref {
            positive(top, "omega_ref", w)?;
        }
        positive(sch, "k0", self.schedule.k0)?;
        let rate = self.schedule.rate;
        if !rate.is_finite() {
            return Err(FieldError::new(sch, "rate", "must be finite"));
        }
        if rate < 0.0 {
            return Err(FieldError::new(
                sch,
                "rate",
                format!("rate = {rate} makes k(t) grow; complete positivity requires dk/dt <= 0, so rate must be >= 0"),
            ));
        }
        let floor = self.schedule.t_floor;
        if !(0.0..1.0).contains(&floor) {
            return Err(FieldError::new(sch, "t_floor", format!("must lie in [0, 1), got {floor}")));
        }
        let (t0, t1) = (self.time.t0, self.time.t1);
        if !t0.is_finite() || t0 < 0.0 {
            return Err(FieldError::new(time, "t0", format!("must be finite and >= 0, got {t0}")));
        }
        if !t1.is_finite() || t1 <= t0 {
            return Err(FieldError::new(time, "t1", format!("must be finite and greater than t0 = {t0}, got {t1}")));
        }
        if self.time.n_steps == 0 {
            return Err(FieldError::new(time, "n_steps", "must be at least 1"));
        }
        if self.time.record_every == 0 {
            return Err(FieldError::new(time, "record_every", "must be at least 1"));
        }
        let k1 = self.schedule().k(t1);
        if !(k1 > 0.0) {
            return Err(FieldError::new(sch, "rate", format!("unstable potential: k({t1}) = {k1} is not positive")));
        }
        match (self.state.kind, self.state.beta) {
            (StateKind::Thermal, None) => {
                return Err(FieldError::new(state, "beta", "thermal states need beta"));
            }
            (StateKind::Thermal, Some(b)) => positive(state, "beta", b)?,
            (StateKind::Ground, Some(_)) => {
                return Err(FieldError::new(state, "beta", "beta only applies to thermal states"));
            }
            (StateKind::Ground, None) => {}
        }
        Ok(())
    }

    /// Spring schedule; call after [`RunConfig::validate`].
    pub fn schedule(&self) -> SpringSchedule {
        let s = &self.schedule;
        SpringSchedule::new(s.kind, s.k0, s.rate, s.t_floor).expect("validated schedule")
    }

    pub fn omega_ref(&self) -> f64 {
        match self.omega_ref {
            OmegaRef::Value(w) => w,
            OmegaRef::Keyword(Auto::Auto) => self.schedule.k0.sqrt(),
        }
    }

    pub fn basis(&self) -> crate::Result<LadderBasis> {
        build_ladder_basis(self.dim, self.hbar, self.omega_ref())
    }

    pub fn initial_state(&self, basis: &LadderBasis) -> crate::Result<DensityMatrix> {
        let schedule = self.schedule();
        match self.state.kind {
            StateKind::Ground => ground_state(basis, &schedule, self.time.t0),
            StateKind::Thermal => {
                thermal_state(basis, &schedule, self.time.t0, self.state.beta.expect("validated beta"))
            }
        }
    }
}

fn positive(section: Option<&'static str>, key: &'static str, v: f64) -> Result<(), FieldError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(FieldError::new(section, key, format!("must be positive and finite, got {v}")))
    }
}

fn line_at(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

/// 1-based line of `key` inside `[section]` (or before any section).
fn locate(src: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<&str> = None;
    let mut header_line = None;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = rest.split(']').next().map(str::trim);
            if current == section {
                header_line = Some(i + 1);
            }
            continue;
        }
        if current != section {
            continue;
        }
        if let Some(rest) = line.strip_prefix(key) {
            if rest.trim_start().starts_with('=') {
                return Some(i + 1);
            }
        }
    }
    header_line
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = r#"dim = 60
hbar = 1.0
omega_ref = "auto"

[schedule]
kind = "exponential"
k0 = 1.0
rate = 0.2

[time]
t0 = 0.0
t1 = 5.0
n_steps = 5000
record_every = 50

[state]
kind = "ground"

[output]
path = "reference.csv"
format = "csv"
"#;

    #[test]
    fn reference_file_matches_constructor() {
        assert_eq!(RunConfig::parse(REFERENCE).unwrap(), RunConfig::reference());
    }

    #[test]
    fn canonical_form_round_trips() {
        let c = RunConfig::reference();
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
        let mut thermal = c.clone();
        thermal.omega_ref = OmegaRef::Value(1.5);
        thermal.state = StateConfig { kind: StateKind::Thermal, beta: Some(2.0) };
        assert_eq!(RunConfig::parse(&thermal.to_toml()).unwrap(), thermal);
    }

    #[test]
    fn negative_rate_cites_complete_positivity() {
        let src = REFERENCE.replace("rate = 0.2", "rate = -0.1");
        let err = RunConfig::parse(&src).unwrap_err();
        assert_eq!(err.line, Some(8));
        assert!(err.message.contains("complete positivity"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let src = REFERENCE.replace("n_steps = 5000", "n_steps = five");
        assert_eq!(RunConfig::parse(&src).unwrap_err().line, Some(13));
        let src = REFERENCE.replace("k0 = 1.0", "k0 = 1.0\nspring = 2");
        assert_eq!(RunConfig::parse(&src).unwrap_err().line, Some(8));
    }

    #[test]
    fn range_checks() {
        let err = RunConfig::parse(&REFERENCE.replace("dim = 60", "dim = 6")).unwrap_err();
        assert_eq!(err.line, Some(1));
        let err = RunConfig::parse(&REFERENCE.replace("t1 = 5.0", "t1 = 0.0")).unwrap_err();
        assert_eq!(err.line, Some(12));
        let err = RunConfig::parse(&REFERENCE.replace("kind = \"ground\"", "kind = \"thermal\"")).unwrap_err();
        assert!(err.message.contains("beta"), "{err}");
    }

    #[test]
    fn linear_schedule_without_floor_must_stay_confining() {
        let src = REFERENCE
            .replace("kind = \"exponential\"", "kind = \"linear\"")
            .replace("rate = 0.2", "rate = 0.2\nt_floor = 0.0");
        let err = RunConfig::parse(&src).unwrap_err();
        assert!(err.message.contains("unstable potential"), "{err}");
    }

    #[test]
    fn overrides_take_precedence() {
        let o = Overrides { dim: Some(12), rate: Some(-1.0), ..Default::default() };
        let err = RunConfig::parse_with(REFERENCE, &o).unwrap_err();
        assert_eq!(err.line, None);
        let o = Overrides { dim: Some(12), state: Some(StateKind::Thermal), beta: Some(0.5), ..Default::default() };
        let c = RunConfig::parse_with(REFERENCE, &o).unwrap();
        assert_eq!((c.dim, c.state.beta), (12, Some(0.5)));
    }

    #[test]
    fn auto_frequency_is_sqrt_k0() {
        let c = RunConfig::parse(&REFERENCE.replace("k0 = 1.0", "k0 = 4.0")).unwrap();
        assert_eq!(c.omega_ref(), 2.0);
    }
}
