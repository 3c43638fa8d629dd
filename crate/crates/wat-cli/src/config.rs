//! Tool configuration.
//!
//! Defaults < config file < `WAT_*` environment variables < command-line
//! flags. The config file uses the same key = value section format as the
//! rules file; decimal values are parsed exactly so configured weights and
//! cutpoints stay rational.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use wat_core::analysis::{parse_decimal, DistanceWeights, Rational, SeverityPolicy};
use wat_core::http::DecodeConfig;
use wat_core::taxonomy::{Axis, ValidationMode};

/// Output shape for classification records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    JsonLines,
}

impl OutputFormat {
    fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(OutputFormat::Text),
            "jsonl" | "jsonlines" => Ok(OutputFormat::JsonLines),
            other => bail!("unknown output format {other:?} (want text or jsonl)"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Config {
    pub rules_path: Option<PathBuf>,
    pub corpus_path: Option<PathBuf>,
    pub store_path: Option<PathBuf>,
    pub length_threshold: Option<usize>,
    pub decode_iterations: Option<u32>,
    pub validation: Option<ValidationMode>,
    pub output: Option<OutputFormat>,
    pub weights: DistanceWeights,
    pub severity: SeverityPolicy,
}

impl Config {
    pub fn length_threshold(&self) -> usize {
        self.length_threshold.unwrap_or(128)
    }

    pub fn validation(&self) -> ValidationMode {
        self.validation.unwrap_or_default()
    }

    pub fn output(&self) -> OutputFormat {
        self.output.unwrap_or_default()
    }

    pub fn classifier_config(&self) -> wat_core::classifier::ClassifierConfig {
        wat_core::classifier::ClassifierConfig {
            length_threshold: self.length_threshold(),
            decode: DecodeConfig {
                max_iterations: self.decode_iterations.unwrap_or(2),
            },
        }
    }

    /// Loads configuration: optional file, then environment overrides.
    pub fn load(config_flag: Option<&Path>) -> Result<Config> {
        let mut config = Config::default();
        let env_config = std::env::var_os("WAT_CONFIG").map(PathBuf::from);
        if let Some(path) = config_flag.map(Path::to_path_buf).or(env_config) {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            config
                .apply_file(&text)
                .with_context(|| format!("in config file {}", path.display()))?;
        }
        config.apply_env()?;
        Ok(config)
    }

    fn apply_file(&mut self, text: &str) -> Result<()> {
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {line_no}: expected key = value"))?;
            self.apply_key(&section, key.trim(), value.trim())
                .with_context(|| format!("line {line_no}"))?;
        }
        Ok(())
    }

    fn apply_key(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        match (section, key) {
            ("paths", "rules") => self.rules_path = Some(PathBuf::from(value)),
            ("paths", "corpus") => self.corpus_path = Some(PathBuf::from(value)),
            ("paths", "store") => self.store_path = Some(PathBuf::from(value)),
            ("classifier", "length_threshold") => {
                self.length_threshold = Some(parse_positive(value)?)
            }
            ("classifier", "decode_iterations") => {
                self.decode_iterations = Some(value.parse().context("decode_iterations")?)
            }
            ("classifier", "validation") => self.validation = Some(parse_validation(value)?),
            ("classifier", "output") => self.output = Some(OutputFormat::parse(value)?),
            ("weights", "absence_penalty") => {
                self.weights.absence_penalty = parse_rational(value)?
            }
            ("weights", axis_name) => {
                let axis = Axis::from_name(axis_name)
                    .ok_or_else(|| anyhow!("unknown weight axis {axis_name:?}"))?;
                self.weights.axis_weights[axis.index()] = parse_rational(value)?;
            }
            ("severity", "scale") => self.severity.scale = parse_rational(value)?,
            ("severity", "low_cut") => self.severity.low_cut = parse_rational(value)?,
            ("severity", "high_cut") => self.severity.high_cut = parse_rational(value)?,
            ("severity", key) if key.starts_with("base.") => {
                let threat = &key[5..];
                let code = wat_core::taxonomy::Threat::from_name(threat)
                    .ok_or_else(|| anyhow!("unknown threat {threat:?}"))?
                    .code();
                self.severity.base[code as usize] = parse_rational(value)?;
            }
            ("severity", "bonus.platform") => self.severity.bonus_platform = parse_rational(value)?,
            ("severity", "bonus.universal") => {
                self.severity.bonus_universal = parse_rational(value)?
            }
            ("severity", "bonus.admin") => self.severity.bonus_admin = parse_rational(value)?,
            ("severity", "bonus.long") => self.severity.bonus_long = parse_rational(value)?,
            (section, key) => bail!("unknown config key {key:?} in section [{section}]"),
        }
        Ok(())
    }

    fn apply_env(&mut self) -> Result<()> {
        if let Some(v) = env_string("WAT_RULES") {
            self.rules_path = Some(PathBuf::from(v));
        }
        if let Some(v) = env_string("WAT_CORPUS") {
            self.corpus_path = Some(PathBuf::from(v));
        }
        if let Some(v) = env_string("WAT_STORE") {
            self.store_path = Some(PathBuf::from(v));
        }
        if let Some(v) = env_string("WAT_THRESHOLD") {
            self.length_threshold = Some(parse_positive(&v).context("WAT_THRESHOLD")?);
        }
        if let Some(v) = env_string("WAT_DECODE_ITERATIONS") {
            self.decode_iterations = Some(v.parse().context("WAT_DECODE_ITERATIONS")?);
        }
        if let Some(v) = env_string("WAT_VALIDATION") {
            self.validation = Some(parse_validation(&v).context("WAT_VALIDATION")?);
        }
        if let Some(v) = env_string("WAT_OUTPUT") {
            self.output = Some(OutputFormat::parse(&v).context("WAT_OUTPUT")?);
        }
        Ok(())
    }
}

fn env_string(name: &str) -> Option<String> {
    std::env::var(name).ok().filter(|v| !v.is_empty())
}

fn parse_positive(value: &str) -> Result<usize> {
    let n: usize = value.parse().with_context(|| format!("not an integer: {value:?}"))?;
    if n == 0 {
        bail!("value must be positive");
    }
    Ok(n)
}

fn parse_validation(value: &str) -> Result<ValidationMode> {
    match value.to_ascii_lowercase().as_str() {
        "lenient" => Ok(ValidationMode::Lenient),
        "strict" => Ok(ValidationMode::Strict),
        other => bail!("unknown validation mode {other:?} (want lenient or strict)"),
    }
}

fn parse_rational(value: &str) -> Result<Rational> {
    parse_decimal(value).ok_or_else(|| anyhow!("not a decimal value: {value:?}"))
}
