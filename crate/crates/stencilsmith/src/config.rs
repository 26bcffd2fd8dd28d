//! Run configuration: a flat `key = value` file overlaid by command-line
//! flags.
//!
//! Blank lines and lines starting with `#` are ignored. Later assignments
//! of the same key win, and flags win over the file.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use stencilsmith_core::autotune::SearchMode;
use stencilsmith_core::perfmodel::MachineModel;
use stencilsmith_core::tiling::TileSpec;
use stencilsmith_core::{Dims3, Kernel, Precision};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected key = value")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("missing required setting `{0}`")]
    Missing(&'static str),
    #[error("cannot read config file {path}: {reason}")]
    Read { path: String, reason: String },
}

/// Recognised keys and what they set.
pub const KEYS: &[(&str, &str)] = &[
    ("kernel", "hdiff | vadvc | copy"),
    ("dims", "grid size NXxNYxNZ, halo included"),
    ("tile", "tile TXxTYxTZ in interior points"),
    ("workers", "executor threads"),
    ("precision", "f32 | f64"),
    ("seed", "pseudo-random seed"),
    ("preset", "machine preset name"),
    ("out", "output path"),
    ("input", "grid file to read instead of generating one (run)"),
    ("reps", "timed repetitions (bench)"),
    ("c1", "hdiff diffusion coefficient"),
    ("dtr_stage", "vadvc inverse time step"),
    ("beta_v", "vadvc implicit weight"),
    ("pe_max", "largest PE count to model"),
    (
        "bytes_per_elem",
        "element size for the cost model (2, 4 or 8)",
    ),
    ("n_pe", "PE count the tuner models"),
    ("budget", "tuner footprint budget in bytes"),
    ("mode", "exhaustive | random | hillclimb"),
    ("samples", "random search draws"),
    ("starts", "hill-climb starting points"),
    ("channel_bw", "GB/s per channel"),
    ("channels_total", "channels on the board"),
    ("channels_per_pe", "channels per PE"),
    ("shared_channel", "true | false"),
    ("host_link_bw_read", "GB/s"),
    ("host_link_bw_write", "GB/s"),
    (
        "host_traffic_fraction",
        "share of traffic crossing the host link",
    ),
    ("pe_rate", "GFLOP/s per PE"),
    ("invocation_overhead", "seconds per launch"),
    ("power_base", "W"),
    ("power_per_channel", "W"),
    ("power_per_pe", "W"),
];

/// Raw settings before typing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut s = Settings::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: n + 1 })?;
            s.set(k.trim(), v.trim())?;
        }
        Ok(s)
    }

    pub fn load(path: &str) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_string(),
            reason: e.to_string(),
        })?;
        Settings::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        self.0.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// `KEY=VALUE` as given to `--set`.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (k, v) = pair.split_once('=').ok_or_else(|| ConfigError::BadValue {
            key: "--set".into(),
            value: pair.into(),
            reason: "expected KEY=VALUE".into(),
        })?;
        self.set(k.trim(), v.trim())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn typed<T>(
        &self,
        key: &str,
        parse: impl FnOnce(&str) -> Result<T, String>,
    ) -> Result<Option<T>, ConfigError> {
        self.raw(key)
            .map(|v| {
                parse(v).map_err(|reason| ConfigError::BadValue {
                    key: key.into(),
                    value: v.into(),
                    reason,
                })
            })
            .transpose()
    }

    fn number<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.typed(key, |v| v.parse::<T>().map_err(|e| e.to_string()))
    }
}

/// Parses `AxBxC`.
pub fn parse_triple(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    if parts.len() != 3 {
        return Err("expected AxBxC".into());
    }
    let mut out = [0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p
            .trim()
            .parse()
            .map_err(|_| format!("`{p}` is not a non-negative integer"))?;
    }
    Ok(out)
}

fn finite_f64(v: &str) -> Result<f64, String> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        Ok(_) => Err("must be finite".into()),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kernel: Option<Kernel>,
    pub dims: Dims3,
    pub tile: Option<TileSpec>,
    pub workers: Option<usize>,
    pub precision: Precision,
    pub seed: u64,
    pub preset: String,
    pub out: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub reps: usize,
    pub c1: f64,
    pub dtr_stage: f64,
    pub beta_v: f64,
    pub pe_max: Option<usize>,
    pub bytes_per_elem: Option<u64>,
    pub n_pe: usize,
    pub budget: Option<u64>,
    pub mode: SearchMode,
    /// Machine-model fields to replace in the preset.
    pub model_overrides: Vec<(String, String)>,
}

pub const DEFAULT_DIMS: [usize; 3] = [68, 68, 64];

impl RunConfig {
    pub fn from_settings(s: &Settings) -> Result<Self, ConfigError> {
        let kernel = s.typed("kernel", |v| v.parse::<Kernel>().map_err(|e| e.to_string()))?;
        let dims = s
            .typed("dims", |v| {
                let [x, y, z] = parse_triple(v)?;
                Dims3::new(x, y, z).map_err(|e| e.to_string())
            })?
            .unwrap_or_else(|| {
                let [x, y, z] = DEFAULT_DIMS;
                Dims3::new(x, y, z).expect("default dims are valid")
            });
        let tile = s.typed("tile", |v| {
            parse_triple(v).map(|[x, y, z]| TileSpec::new(x, y, z))
        })?;
        let workers: Option<usize> = s.number("workers")?;
        if workers == Some(0) {
            return Err(bad("workers", "0", "must be at least 1"));
        }
        let precision = s
            .typed("precision", |v| {
                v.parse::<Precision>()
                    .map_err(|_| "expected f32 or f64".to_string())
            })?
            .unwrap_or(Precision::F32);
        let bytes_per_elem: Option<u64> = s.number("bytes_per_elem")?;
        if let Some(b) = bytes_per_elem {
            if ![2, 4, 8].contains(&b) {
                return Err(bad("bytes_per_elem", &b.to_string(), "expected 2, 4 or 8"));
            }
        }
        let seed = s.number("seed")?.unwrap_or(1);
        let samples = s.number("samples")?.unwrap_or(32);
        let starts = s.number("starts")?.unwrap_or(4);
        let mode = match s.raw("mode").unwrap_or("exhaustive") {
            "exhaustive" => SearchMode::Exhaustive,
            "random" => SearchMode::Random { samples, seed },
            "hillclimb" => SearchMode::HillClimb { starts, seed },
            other => {
                return Err(bad(
                    "mode",
                    other,
                    "expected exhaustive, random or hillclimb",
                ))
            }
        };
        let reps = s.number("reps")?.unwrap_or(5);
        if reps == 0 {
            return Err(bad("reps", "0", "must be at least 1"));
        }
        let n_pe = s.number("n_pe")?.unwrap_or(1);
        if n_pe == 0 {
            return Err(bad("n_pe", "0", "must be at least 1"));
        }
        let pe_max = s.number("pe_max")?;
        if pe_max == Some(0) {
            return Err(bad("pe_max", "0", "must be at least 1"));
        }
        let model_overrides = MODEL_KEYS
            .iter()
            .filter_map(|k| s.raw(k).map(|v| (k.to_string(), v.to_string())))
            .collect::<Vec<_>>();
        let cfg = RunConfig {
            kernel,
            dims,
            tile,
            workers,
            precision,
            seed,
            preset: s.raw("preset").unwrap_or("hbm_ocapi").to_string(),
            out: s.raw("out").map(PathBuf::from),
            input: s.raw("input").map(PathBuf::from),
            reps,
            c1: s.typed("c1", finite_f64)?.unwrap_or(0.025),
            dtr_stage: s.typed("dtr_stage", finite_f64)?.unwrap_or(3.0 / 20.0),
            beta_v: s.typed("beta_v", finite_f64)?.unwrap_or(0.0),
            pe_max,
            bytes_per_elem,
            n_pe,
            budget: s.number("budget")?,
            mode,
            model_overrides,
        };
        // Type-check overrides now rather than after work has started.
        cfg.apply_model_overrides(MachineModel {
            channel_bw: 1.0,
            channels_total: 1,
            channels_per_pe: 1,
            shared_channel: false,
            host_link_bw_read: 1.0,
            host_link_bw_write: 1.0,
            host_traffic_fraction: 0.0,
            pe_rate: 1.0,
            invocation_overhead: 0.0,
            power_base: 1.0,
            power_per_channel: 0.0,
            power_per_pe: 0.0,
            cpu: None,
        })?;
        Ok(cfg)
    }

    pub fn kernel(&self) -> Result<Kernel, ConfigError> {
        self.kernel.ok_or(ConfigError::Missing("kernel"))
    }

    /// Element size used by the cost model.
    pub fn model_bytes(&self) -> u64 {
        self.bytes_per_elem.unwrap_or(self.precision.bytes() as u64)
    }

    pub fn apply_model_overrides(&self, mut m: MachineModel) -> Result<MachineModel, ConfigError> {
        for (k, v) in &self.model_overrides {
            let float = || finite_f64(v).map_err(|r| bad(k, v, &r));
            let count = || v.parse::<usize>().map_err(|e| bad(k, v, &e.to_string()));
            match k.as_str() {
                "channel_bw" => m.channel_bw = float()?,
                "channels_total" => m.channels_total = count()?,
                "channels_per_pe" => m.channels_per_pe = count()?,
                "shared_channel" => {
                    m.shared_channel = v.parse().map_err(|_| bad(k, v, "expected true or false"))?
                }
                "host_link_bw_read" => m.host_link_bw_read = float()?,
                "host_link_bw_write" => m.host_link_bw_write = float()?,
                "host_traffic_fraction" => m.host_traffic_fraction = float()?,
                "pe_rate" => m.pe_rate = float()?,
                "invocation_overhead" => m.invocation_overhead = float()?,
                "power_base" => m.power_base = float()?,
                "power_per_channel" => m.power_per_channel = float()?,
                "power_per_pe" => m.power_per_pe = float()?,
                _ => return Err(ConfigError::UnknownKey(k.clone())),
            }
        }
        Ok(m)
    }
}

const MODEL_KEYS: [&str; 12] = [
    "channel_bw",
    "channels_total",
    "channels_per_pe",
    "shared_channel",
    "host_link_bw_read",
    "host_link_bw_write",
    "host_traffic_fraction",
    "pe_rate",
    "invocation_overhead",
    "power_base",
    "power_per_channel",
    "power_per_pe",
];

fn bad(key: &str, value: &str, reason: &str) -> ConfigError {
    ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: reason.into(),
    }
}
