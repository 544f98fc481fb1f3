//! TOML training configuration.
//!
//! ```toml
//! topology = [2, 16, 2]
//! epochs = 200
//! batch_size = 32
//! lr = 0.1
//! momentum = 0.9
//! mode = "essop"          # or "exact"
//! seq_len = 16            # essop only
//! lr_folded = false
//! lr_schedule = "constant" # or "step"
//!
//! [seeds]
//! data = 7
//! init = 1
//! essop = 0xACE1
//!
//! [dataset]
//! kind = "two-moons"      # or "digits8x8" with `path = "digits.csv"`
//! n = 2000
//! noise = 0.1
//! ```
//!
//! Omitted keys take the values shown. A relative dataset path is resolved
//! against the config file's directory.

use std::path::Path;

use essop_core::train::{DatasetSpec, LrSchedule, Seeds, TrainingConfig, UpdateMode};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    topology: Option<Vec<usize>>,
    epochs: Option<usize>,
    batch_size: Option<usize>,
    lr: Option<f64>,
    momentum: Option<f64>,
    mode: Option<String>,
    seq_len: Option<usize>,
    lr_folded: Option<bool>,
    lr_schedule: Option<String>,
    #[serde(default)]
    seeds: RawSeeds,
    #[serde(default)]
    dataset: RawDataset,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSeeds {
    data: Option<u64>,
    init: Option<u64>,
    essop: Option<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    kind: Option<String>,
    n: Option<usize>,
    noise: Option<f64>,
    path: Option<String>,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("invalid `{field}`: {msg}"))
}

pub fn parse_config(text: &str, base_dir: &Path) -> CliResult<TrainingConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Input(format!("config: {}", e.to_string().trim_end())))?;
    let defaults = TrainingConfig::two_moons(UpdateMode::Exact, 1);

    let mode = match raw.mode.as_deref().unwrap_or("exact") {
        "exact" => {
            if raw.seq_len.is_some() {
                return Err(invalid("seq_len", "only meaningful with mode = \"essop\""));
            }
            UpdateMode::Exact
        }
        "essop" => UpdateMode::Essop { seq_len: raw.seq_len.unwrap_or(16) },
        other => return Err(invalid("mode", format!("expected \"exact\" or \"essop\", got \"{other}\""))),
    };
    let lr_schedule = match raw.lr_schedule.as_deref().unwrap_or("constant") {
        "constant" => LrSchedule::Constant,
        "step" => LrSchedule::StepDecay,
        other => return Err(invalid("lr_schedule", format!("expected \"constant\" or \"step\", got \"{other}\""))),
    };
    let essop_seed = match raw.seeds.essop {
        None => 0xACE1,
        Some(s) if (1..=0xFFFF).contains(&s) => s as u16,
        Some(s) => return Err(invalid("seeds.essop", format!("must be a nonzero 16-bit value, got {s}"))),
    };
    let dataset = match raw.dataset.kind.as_deref().unwrap_or("two-moons") {
        "two-moons" => {
            if raw.dataset.path.is_some() {
                return Err(invalid("dataset.path", "not used by two-moons"));
            }
            DatasetSpec::TwoMoons { n: raw.dataset.n.unwrap_or(2000), noise: raw.dataset.noise.unwrap_or(0.1) }
        }
        "digits8x8" => {
            if raw.dataset.n.is_some() || raw.dataset.noise.is_some() {
                return Err(invalid("dataset", "digits8x8 takes only `path`"));
            }
            let path = raw.dataset.path.ok_or_else(|| invalid("dataset.path", "required for digits8x8"))?;
            DatasetSpec::Digits8x8 { path: base_dir.join(path).to_string_lossy().into_owned() }
        }
        other => return Err(invalid("dataset.kind", format!("expected \"two-moons\" or \"digits8x8\", got \"{other}\""))),
    };

    let config = TrainingConfig {
        topology: raw.topology.unwrap_or(defaults.topology),
        epochs: raw.epochs.unwrap_or(defaults.epochs),
        batch_size: raw.batch_size.unwrap_or(defaults.batch_size),
        lr: raw.lr.unwrap_or(defaults.lr),
        momentum: raw.momentum.unwrap_or(defaults.momentum),
        mode,
        lr_folded: raw.lr_folded.unwrap_or(false),
        lr_schedule,
        seeds: Seeds { data: raw.seeds.data.unwrap_or(7), init: raw.seeds.init.unwrap_or(1), essop: essop_seed },
        dataset,
    };
    config.validate().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(config)
}

pub fn load_config(path: &Path) -> CliResult<TrainingConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}
