//! Plain-text `key=value` configuration with flag overrides.
//!
//! Unset keys keep the reference defaults; `#` starts a comment; unknown
//! keys and out-of-range values are rejected with the offending line
//! number. Values passed as `--set key=value` are applied after the file
//! and win.

use std::fmt;
use std::path::Path;

use vodsim_core::analytic::ServiceClass;
use vodsim_core::engine::{HoldingModel, SimConfig};

/// A configuration problem, with the 1-based source line when it came from
/// a file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "config line {n}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError { line, message: message.into() }
}

/// Every accepted key, for the unknown-key message.
const KNOWN_KEYS: &[&str] = &[
    "ports_per_partition",
    "partition_count",
    "port_access_time",
    "levels",
    "peers_per_level",
    "frame_rate",
    "gop_frames",
    "viewers_min",
    "viewers_max",
    "sim_time",
    "proxy_count",
    "archive_count",
    "adjacency_size",
    "link_jitter",
    "arrival_rates",
    "holding_times",
    "playback_rates",
    "popularity_exponent",
    "asset_count",
    "asset_duration",
    "share_fraction",
    "holding_model",
    "cache_capacity",
    "cache_half_life",
    "disk_bandwidth",
    "admission_threshold",
    "session_duration",
    "probe_latency",
    "propagation_delay",
    "throughput_bucket",
    "seed",
];

#[derive(Default)]
struct ClassFields {
    arrival_rates: Option<Vec<f64>>,
    holding_times: Option<Vec<f64>>,
    playback_rates: Option<Vec<f64>>,
}

fn parse_scalar<T: std::str::FromStr>(
    value: &str,
    key: &str,
    line: Option<usize>,
) -> Result<T, ConfigError> {
    value
        .trim()
        .parse()
        .map_err(|_| err(line, format!("invalid value '{value}' for {key}")))
}

fn parse_list(value: &str, key: &str, line: Option<usize>) -> Result<Vec<f64>, ConfigError> {
    let items: Result<Vec<f64>, _> = value.split(',').map(|v| v.trim().parse::<f64>()).collect();
    items.map_err(|_| err(line, format!("invalid list '{value}' for {key} (comma-separated numbers)")))
}

fn apply_key(
    config: &mut SimConfig,
    classes: &mut ClassFields,
    key: &str,
    value: &str,
    line: Option<usize>,
) -> Result<(), ConfigError> {
    match key {
        "ports_per_partition" => config.ports_per_partition = parse_scalar(value, key, line)?,
        "partition_count" => config.partition_count = parse_scalar(value, key, line)?,
        "port_access_time" => config.port_access_time_s = parse_scalar(value, key, line)?,
        "levels" => config.levels = parse_scalar(value, key, line)?,
        "peers_per_level" => config.peers_per_level = parse_scalar(value, key, line)?,
        "frame_rate" => config.frame_rate = parse_scalar(value, key, line)?,
        "gop_frames" => config.gop_frames = parse_scalar(value, key, line)?,
        "viewers_min" => config.viewers_per_proxy.0 = parse_scalar(value, key, line)?,
        "viewers_max" => config.viewers_per_proxy.1 = parse_scalar(value, key, line)?,
        "sim_time" => config.sim_time_s = parse_scalar(value, key, line)?,
        "proxy_count" => config.proxy_count = parse_scalar(value, key, line)?,
        "archive_count" => config.archive_count = parse_scalar(value, key, line)?,
        "adjacency_size" => {
            let size: u32 = parse_scalar(value, key, line)?;
            if !(1..=6).contains(&size) {
                return Err(err(line, format!("adjacency_size must lie in [1,6], got {size}")));
            }
            config.adjacency_size = size;
        }
        "link_jitter" => config.link_jitter_kbps = parse_scalar(value, key, line)?,
        "arrival_rates" => classes.arrival_rates = Some(parse_list(value, key, line)?),
        "holding_times" => classes.holding_times = Some(parse_list(value, key, line)?),
        "playback_rates" => classes.playback_rates = Some(parse_list(value, key, line)?),
        "popularity_exponent" => config.popularity_exponent = parse_scalar(value, key, line)?,
        "asset_count" => config.asset_count = parse_scalar(value, key, line)?,
        "asset_duration" => config.asset_duration_s = parse_scalar(value, key, line)?,
        "share_fraction" => {
            let share: f64 = parse_scalar(value, key, line)?;
            if !(share > 0.0 && share < 1.0) {
                return Err(err(line, format!("share_fraction must lie in (0,1), got {share}")));
            }
            config.share_fraction = share;
        }
        "holding_model" => {
            config.holding = match value.trim() {
                "exponential" => HoldingModel::Exponential,
                "fixed" => HoldingModel::Fixed,
                other => {
                    return Err(err(
                        line,
                        format!("holding_model must be 'exponential' or 'fixed', got '{other}'"),
                    ))
                }
            }
        }
        "cache_capacity" => config.cache_capacity = parse_scalar(value, key, line)?,
        "cache_half_life" => config.cache_half_life_s = parse_scalar(value, key, line)?,
        "disk_bandwidth" => config.disk_bandwidth_kbps = parse_scalar(value, key, line)?,
        "admission_threshold" => config.admission_threshold = parse_scalar(value, key, line)?,
        "session_duration" => config.session_duration_s = parse_scalar(value, key, line)?,
        "probe_latency" => config.probe_latency_s = parse_scalar(value, key, line)?,
        "propagation_delay" => config.propagation_delay_s = parse_scalar(value, key, line)?,
        "throughput_bucket" => config.throughput_bucket_s = parse_scalar(value, key, line)?,
        "seed" => config.seed = parse_scalar(value, key, line)?,
        unknown => {
            return Err(err(
                line,
                format!("unknown key '{unknown}' (known keys: {})", KNOWN_KEYS.join(", ")),
            ))
        }
    }
    Ok(())
}

fn split_pair(text: &str, line: Option<usize>) -> Result<(&str, &str), ConfigError> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| err(line, format!("expected key=value, got '{text}'")))?;
    Ok((key.trim(), value.trim()))
}

fn build_classes(
    config: &mut SimConfig,
    fields: ClassFields,
) -> Result<(), ConfigError> {
    let Some(rates) = fields.arrival_rates else {
        // No class keys at all: keep defaults, but still reject stray
        // holding/playback lists with mismatched intent.
        if fields.holding_times.is_some() || fields.playback_rates.is_some() {
            return Err(err(
                None,
                "holding_times/playback_rates require arrival_rates to define the class count",
            ));
        }
        return Ok(());
    };
    let k = rates.len();
    let holdings = fields
        .holding_times
        .unwrap_or_else(|| vec![config.port_access_time_s; k]);
    let playbacks = fields.playback_rates.unwrap_or_else(|| vec![600.0; k]);
    if holdings.len() != k || playbacks.len() != k {
        return Err(err(
            None,
            format!(
                "class lists must agree in length: {k} arrival rates, {} holding times, {} playback rates",
                holdings.len(),
                playbacks.len()
            ),
        ));
    }
    config.classes = rates
        .into_iter()
        .zip(holdings)
        .zip(playbacks)
        .map(|((arrival_rate, holding_time), playback_rate)| ServiceClass {
            arrival_rate,
            holding_time,
            playback_rate,
        })
        .collect();
    Ok(())
}

/// Parses file text plus `--set key=value` overrides into a validated
/// config.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<SimConfig, ConfigError> {
    let mut config = SimConfig::default();
    let mut classes = ClassFields::default();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = split_pair(content, Some(line))?;
        apply_key(&mut config, &mut classes, key, value, Some(line))?;
    }
    for item in overrides {
        let (key, value) = split_pair(item, None)?;
        apply_key(&mut config, &mut classes, key, value, None)?;
    }
    build_classes(&mut config, classes)?;
    config.validate().map_err(|e| err(None, e.to_string()))?;
    Ok(config)
}

/// Loads an optional config file and applies overrides on top.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<SimConfig, ConfigError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| err(None, format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    parse_config(&text, overrides)
}
