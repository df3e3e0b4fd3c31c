//! Run configuration: a flat `key = value` file merged with command-line
//! flags. Flags win.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use decay_core::amplitude::{Engine, TimeGrid};
use decay_core::asymptotics::lifetime;
use decay_core::params::{hydrogen_params, ModelParams, PhysicalConstants};
use decay_core::spectral::{SpectralDensity, TabulatedDensity};

use crate::CliError;

const MAX_COUNT: usize = 10_000_000;

/// Flags shared by every command. Each one may also be given in the
/// config file under the same name (without dashes).
#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    /// key=value file; command-line flags override its entries
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// hydrogen | generic | table
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// generic family: power-law | hydrogen
    #[arg(long, global = true)]
    pub family: Option<String>,
    /// CSV of `omega,density` in units of the cutoff (model table)
    #[arg(long, global = true)]
    pub table: Option<PathBuf>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// cutoff in rad/s
    #[arg(long, global = true)]
    pub cutoff: Option<f64>,
    /// level energy in rad/s
    #[arg(long, global = true)]
    pub omega0: Option<f64>,
    /// threshold exponent
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// spectral | pole_cut | volterra | vanhove_limit
    #[arg(long, global = true)]
    pub engine: Option<String>,
    #[arg(long, global = true)]
    pub tmin: Option<f64>,
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    #[arg(long, global = true)]
    pub tcount: Option<usize>,
    /// linear | log
    #[arg(long, global = true)]
    pub tspacing: Option<String>,
    /// unit of --tmin/--tmax: internal | seconds | lifetime
    #[arg(long, global = true)]
    pub tunit: Option<String>,
    /// csv | json
    #[arg(long, global = true)]
    pub format: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Volterra step in internal time units
    #[arg(long, global = true)]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeUnit {
    Internal,
    Seconds,
    Lifetime,
}

#[derive(Debug, Clone)]
pub enum ModelSource {
    Hydrogen,
    Generic { family: String, eta: f64 },
    Table(PathBuf),
}

#[derive(Debug, Clone)]
pub struct GridSpec {
    pub tmin: Option<f64>,
    pub tmax: Option<f64>,
    pub count: usize,
    pub log: bool,
    pub unit: TimeUnit,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: ModelSource,
    pub params: ModelParams,
    pub sd: SpectralDensity,
    pub engine: Engine,
    pub grid: GridSpec,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub step: Option<f64>,
    /// Entries of the config file, for command-specific keys.
    pub extra: BTreeMap<String, String>,
}

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parse `key = value` lines. `#` starts a comment.
pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(config_err(format!("config line {}: expected key=value", n + 1)));
        };
        let key = k.trim().to_string();
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(config_err(format!("config line {}: duplicate key {key}", n + 1)));
        }
    }
    Ok(map)
}

/// Merged lookup: flag first, then file.
struct Lookup<'a> {
    file: &'a BTreeMap<String, String>,
}

impl Lookup<'_> {
    fn get<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| config_err(format!("config key {key}: cannot parse {v:?}"))),
        }
    }
}

/// Keys read by `RunConfig`; command-specific keys are read elsewhere.
const KNOWN: &[&str] = &[
    "model", "family", "table", "lambda", "cutoff", "omega0", "eta", "engine", "tmin", "tmax", "tcount",
    "tspacing", "tunit", "format", "out", "step",
];

impl RunConfig {
    pub fn build(flags: &Flags, command_keys: &[&str]) -> Result<RunConfig, CliError> {
        let file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
                parse_file(&text)?
            }
            None => BTreeMap::new(),
        };
        if let Some(k) = file.keys().find(|k| !KNOWN.contains(&k.as_str()) && !command_keys.contains(&k.as_str())) {
            return Err(config_err(format!("unknown config key {k}")));
        }
        let l = Lookup { file: &file };

        let model = l.get(flags.model.clone(), "model")?.unwrap_or_else(|| "hydrogen".into());
        let lambda = l.get(flags.lambda, "lambda")?;
        let cutoff = l.get(flags.cutoff, "cutoff")?;
        let omega0 = l.get(flags.omega0, "omega0")?;
        let eta = l.get(flags.eta, "eta")?;
        let family = l.get(flags.family.clone(), "family")?;
        let table = l.get(flags.table.as_ref().map(|p| p.display().to_string()), "table")?;

        let (source, params, sd) = match model.as_str() {
            "hydrogen" => {
                if cutoff.is_some() || omega0.is_some() || eta.is_some() || table.is_some() || family.is_some() {
                    return Err(config_err(
                        "model hydrogen takes only --lambda; cutoff, omega0, eta, family and table are fixed",
                    ));
                }
                let mut p = hydrogen_params(PhysicalConstants::CODATA);
                if let Some(l) = lambda {
                    p = p.with_lambda(l)?;
                }
                (ModelSource::Hydrogen, p, SpectralDensity::hydrogen())
            }
            "generic" | "table" => {
                let need = |v: Option<f64>, name: &str| {
                    v.ok_or_else(|| config_err(format!("model {model} needs --{name}")))
                };
                let p = ModelParams::new(need(lambda, "lambda")?, need(cutoff, "cutoff")?, need(omega0, "omega0")?)?;
                if model == "generic" {
                    if table.is_some() {
                        return Err(config_err("--table belongs to model table"));
                    }
                    let family = family.unwrap_or_else(|| "power-law".into());
                    let (sd, eta) = match family.as_str() {
                        "power-law" => {
                            let eta = need(eta, "eta")?;
                            (SpectralDensity::power_law(eta, 1.0)?, eta)
                        }
                        "hydrogen" => {
                            if eta.is_some() {
                                return Err(config_err("family hydrogen fixes eta = 2"));
                            }
                            (SpectralDensity::hydrogen(), 2.0)
                        }
                        other => return Err(config_err(format!("unknown family {other:?}"))),
                    };
                    (ModelSource::Generic { family, eta }, p, sd)
                } else {
                    if family.is_some() {
                        return Err(config_err("--family belongs to model generic"));
                    }
                    let path = PathBuf::from(table.ok_or_else(|| config_err("model table needs --table"))?);
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
                    let sd = SpectralDensity::tabulated(TabulatedDensity::from_csv(&text, eta)?);
                    (ModelSource::Table(path), p, sd)
                }
            }
            other => return Err(config_err(format!("unknown model {other:?}"))),
        };

        let engine = match l.get(flags.engine.clone(), "engine")?.as_deref().unwrap_or("pole_cut") {
            "spectral" => Engine::Spectral,
            "pole_cut" | "pole-cut" => Engine::PoleCut,
            "volterra" => Engine::Volterra,
            "vanhove_limit" | "vanhove-limit" => Engine::VanHoveLimit,
            other => return Err(config_err(format!("unknown engine {other:?}"))),
        };

        let count = l.get(flags.tcount, "tcount")?.unwrap_or(201);
        if !(1..=MAX_COUNT).contains(&count) {
            return Err(config_err(format!("tcount must lie in [1, {MAX_COUNT}], got {count}")));
        }
        let log = match l.get(flags.tspacing.clone(), "tspacing")?.as_deref().unwrap_or("linear") {
            "linear" => false,
            "log" => true,
            other => return Err(config_err(format!("unknown spacing {other:?}"))),
        };
        let unit = match l.get(flags.tunit.clone(), "tunit")?.as_deref().unwrap_or("internal") {
            "internal" => TimeUnit::Internal,
            "seconds" => TimeUnit::Seconds,
            "lifetime" => TimeUnit::Lifetime,
            other => return Err(config_err(format!("unknown time unit {other:?}"))),
        };
        let grid = GridSpec {
            tmin: l.get(flags.tmin, "tmin")?,
            tmax: l.get(flags.tmax, "tmax")?,
            count,
            log,
            unit,
        };

        let format = match l.get(flags.format.clone(), "format")?.as_deref().unwrap_or("csv") {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(config_err(format!("unknown format {other:?}"))),
        };
        let out = l.get(flags.out.as_ref().map(|p| p.display().to_string()), "out")?.map(PathBuf::from);
        let step = l.get(flags.step, "step")?;
        if step.is_some_and(|s| !(s > 0.0 && s.is_finite())) {
            return Err(config_err("step must be positive"));
        }

        let extra = file
            .into_iter()
            .filter(|(k, _)| command_keys.contains(&k.as_str()))
            .collect();
        Ok(RunConfig {
            source,
            params,
            sd,
            engine,
            grid,
            format,
            out,
            step,
            extra,
        })
    }

    /// Command-specific value: flag, then config file.
    pub fn extra<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        Lookup { file: &self.extra }.get(flag, key)
    }

    /// Internal time per unit of `--tmin/--tmax`.
    fn time_scale(&self) -> Result<f64, CliError> {
        Ok(match self.grid.unit {
            TimeUnit::Internal => 1.0,
            TimeUnit::Seconds => self.params.unit_scale,
            TimeUnit::Lifetime => lifetime(&self.params, &self.sd)?,
        })
    }

    /// The time grid in internal units. Defaults: `[0, 10 tau_E]`, or
    /// `[0, 10]` when the level does not decay.
    pub fn time_grid(&self) -> Result<TimeGrid, CliError> {
        let scale = self.time_scale()?;
        let tmax = match self.grid.tmax {
            Some(t) => t * scale,
            None => match lifetime(&self.params, &self.sd) {
                Ok(tau) => 10.0 * tau,
                Err(_) => 10.0,
            },
        };
        let tmin = self.grid.tmin.map_or(if self.grid.log { tmax * 1e-4 } else { 0.0 }, |t| t * scale);
        let grid = if self.grid.log {
            TimeGrid::log(tmin, tmax, self.grid.count)?
        } else {
            TimeGrid::linear(tmin, tmax, self.grid.count)?
        };
        Ok(grid)
    }
}
