use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use folner::io::{read_model, read_operator, ElementSpec, ModelRef, ModelSpec};
use folner::Backend;
use serde::Deserialize;

/// A configuration problem, tagged with the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError { field, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Verify,
    Kernel,
    Density,
    Dimreport,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(PathBuf),
    Many(Vec<PathBuf>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ScheduleSpec {
    List(Vec<usize>),
    Range { from: usize, to: usize, #[serde(default)] step: Option<usize> },
    Text(String),
}

/// The on-disk run description. Every field can be overridden by a flag.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<CommandName>,
    pub model: Option<ModelRef>,
    #[serde(alias = "operator")]
    pub operators: Option<OneOrMany>,
    pub schedule: Option<ScheduleSpec>,
    pub eps: Option<f64>,
    pub probes: Option<Vec<ElementSpec>>,
    pub backend: Option<String>,
    pub tolerance: Option<f64>,
    pub bins: Option<usize>,
    pub range: Option<[f64; 2]>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub jobs: Option<usize>,
    pub extrapolate: Option<bool>,
    pub timing: Option<bool>,
}

/// Values given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<String>,
    pub operators: Vec<PathBuf>,
    pub n: Option<String>,
    pub eps: Option<f64>,
    pub backend: Option<String>,
    pub tolerance: Option<f64>,
    pub bins: Option<usize>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub extrapolate: bool,
    pub timing: bool,
}

/// A validated run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandName,
    pub model: ModelSpec,
    pub operators: Vec<PathBuf>,
    pub schedule: Vec<usize>,
    pub eps: Option<f64>,
    pub probes: Option<Vec<ElementSpec>>,
    pub backend: Backend,
    pub tolerance: f64,
    pub bins: usize,
    pub range: Option<(f64, f64)>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub jobs: Option<usize>,
    pub extrapolate: bool,
    pub timing: bool,
}

/// Parses `"50"`, `"2,4,8"`, `"2..20"` (inclusive) or `"2..20:2"`.
pub fn parse_schedule(text: &str) -> Result<Vec<usize>, ConfigError> {
    let bad = || err("schedule", format!("cannot parse `{text}`; use `n`, `a,b,c`, `a..b` or `a..b:step`"));
    let text = text.trim();
    if let Some((from, rest)) = text.split_once("..") {
        let (to, step) = match rest.split_once(':') {
            Some((to, step)) => (to, step.trim().parse::<usize>().map_err(|_| bad())?),
            None => (rest, 1),
        };
        let from: usize = from.trim().parse().map_err(|_| bad())?;
        let to: usize = to.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if step == 0 {
            return Err(err("schedule", "step must be positive"));
        }
        return Ok((from..=to).step_by(step).collect());
    }
    text.split(',').map(|s| s.trim().parse::<usize>().map_err(|_| bad())).collect()
}

fn resolve(base: Option<&Path>, p: &Path) -> PathBuf {
    match base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

fn model_from_text(text: &str, base: Option<&Path>) -> Result<ModelSpec, ConfigError> {
    if let Ok(spec) = ModelSpec::named(text) {
        return Ok(spec);
    }
    let path = resolve(base, Path::new(text));
    if !path.exists() {
        return Err(err("model", format!("`{text}` is neither a built-in model name nor an existing file")));
    }
    read_model(&path).map_err(|e| err("model", e.to_string()))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<FileConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| err("config", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| err("config", format!("{}: {e}", path.display())))
    }

    /// Merges the file (paths relative to `base`) with the flags and checks
    /// the result.
    pub fn resolve(
        command: CommandName,
        file: FileConfig,
        base: Option<&Path>,
        flags: Overrides,
    ) -> Result<RunConfig, ConfigError> {
        if let Some(c) = file.command {
            if c != command {
                return Err(err("command", format!("config is for `{c:?}`, invoked as `{command:?}`").to_lowercase()));
            }
        }
        let operators: Vec<PathBuf> = if !flags.operators.is_empty() {
            flags.operators
        } else {
            match file.operators {
                Some(OneOrMany::One(p)) => vec![resolve(base, &p)],
                Some(OneOrMany::Many(ps)) => ps.iter().map(|p| resolve(base, p)).collect(),
                None => Vec::new(),
            }
        };
        for p in &operators {
            if !p.is_file() {
                return Err(err("operators", format!("{} does not exist", p.display())));
            }
        }
        let model = match (flags.model, file.model) {
            (Some(text), _) => model_from_text(&text, None)?,
            (None, Some(ModelRef::Name(text))) => model_from_text(&text, base)?,
            (None, Some(ModelRef::Inline(spec))) => spec,
            (None, None) => match operators.first().map(|p| read_operator(p)) {
                Some(Ok(spec)) => match spec.model {
                    Some(m) => m.resolve().map_err(|e| err("model", e.to_string()))?,
                    None => return Err(err("model", "missing, and the first operator document names none")),
                },
                Some(Err(e)) => return Err(err("operators", e.to_string())),
                None => return Err(err("model", "missing")),
            },
        };
        match command {
            CommandName::Dimreport => {}
            CommandName::Verify if operators.is_empty() => return Err(err("operators", "at least one operator file is needed")),
            CommandName::Kernel | CommandName::Density if operators.len() != 1 => {
                return Err(err("operators", format!("exactly one operator file is needed, got {}", operators.len())))
            }
            _ => {}
        }
        let schedule = match (flags.n, file.schedule) {
            (Some(text), _) => parse_schedule(&text)?,
            (None, Some(ScheduleSpec::Text(text))) => parse_schedule(&text)?,
            (None, Some(ScheduleSpec::List(v))) => v,
            (None, Some(ScheduleSpec::Range { from, to, step })) => {
                let step = step.unwrap_or(1);
                if step == 0 {
                    return Err(err("schedule", "step must be positive"));
                }
                (from..=to).step_by(step).collect()
            }
            (None, None) => return Err(err("schedule", "missing")),
        };
        if schedule.is_empty() {
            return Err(err("schedule", "empty"));
        }
        if schedule.windows(2).any(|p| p[0] >= p[1]) {
            return Err(err("schedule", format!("{schedule:?} is not strictly increasing")));
        }
        let eps = flags.eps.or(file.eps);
        match eps {
            Some(e) if !(e > 0.0 && e.is_finite()) => return Err(err("eps", format!("{e} must be positive"))),
            None if command == CommandName::Verify => return Err(err("eps", "missing")),
            _ => {}
        }
        let backend = match flags.backend.or(file.backend) {
            Some(b) => b.parse().map_err(|e: folner::Error| err("backend", e.to_string()))?,
            None => Backend::Exact,
        };
        let tolerance = flags.tolerance.or(file.tolerance).unwrap_or(1e-10);
        if !(tolerance > 0.0 && tolerance < 1.0) {
            return Err(err("tolerance", format!("{tolerance} outside (0, 1)")));
        }
        let bins = flags.bins.or(file.bins).unwrap_or(64);
        if bins == 0 {
            return Err(err("bins", "must be positive"));
        }
        let range = file.range.map(|[lo, hi]| (lo, hi));
        if let Some((lo, hi)) = range {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(err("range", format!("[{lo}, {hi}] is not an interval")));
            }
        }
        let jobs = flags.jobs.or(file.jobs);
        if jobs == Some(0) {
            return Err(err("jobs", "must be positive"));
        }
        Ok(RunConfig {
            command,
            model,
            operators,
            schedule,
            eps,
            probes: file.probes,
            backend,
            tolerance,
            bins,
            range,
            out: flags.out.or_else(|| file.out.map(|p| resolve(base, &p))),
            format: flags.format.or(file.format).unwrap_or(Format::Csv),
            jobs,
            extrapolate: flags.extrapolate || file.extrapolate.unwrap_or(false),
            timing: flags.timing || file.timing.unwrap_or(false),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        assert_eq!(parse_schedule("50").unwrap(), vec![50]);
        assert_eq!(parse_schedule("2, 4,8").unwrap(), vec![2, 4, 8]);
        assert_eq!(parse_schedule("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_schedule("2..=6:2").unwrap(), vec![2, 4, 6]);
        assert!(parse_schedule("2..x").is_err());
    }

    #[test]
    fn flags_override_file_fields() {
        let file: FileConfig = serde_json::from_str(r#"{"model": "z2", "schedule": [2, 3], "eps": 0.5}"#).unwrap();
        let flags = Overrides { n: Some("7".into()), eps: Some(0.1), ..Default::default() };
        let cfg = RunConfig::resolve(CommandName::Dimreport, file, None, flags).unwrap();
        assert_eq!(cfg.schedule, vec![7]);
        assert_eq!(cfg.eps, Some(0.1));
    }

    #[test]
    fn invalid_fields_are_named() {
        let file: FileConfig = serde_json::from_str(r#"{"model": "z2", "schedule": [3, 2]}"#).unwrap();
        let e = RunConfig::resolve(CommandName::Dimreport, file, None, Overrides::default()).unwrap_err();
        assert_eq!(e.field, "schedule");
        let file: FileConfig = serde_json::from_str(r#"{"model": "z2", "schedule": [2], "eps": -1}"#).unwrap();
        let e = RunConfig::resolve(CommandName::Dimreport, file, None, Overrides::default()).unwrap_err();
        assert_eq!(e.field, "eps");
        let file: FileConfig = serde_json::from_str(r#"{"model": "z2", "schedule": [2], "operators": "nope.json"}"#).unwrap();
        let e = RunConfig::resolve(CommandName::Kernel, file, None, Overrides::default()).unwrap_err();
        assert_eq!(e.field, "operators");
    }
}
