//! Flat `key = value` run configuration.
//!
//! Lines are `dotted.key = value`; everything after `#` is a comment. A JSON
//! summary written by any command is also accepted: its `config` object is
//! read back as the same flat map.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use semiclassic::{
    BvpProblem, DVector, Drive, HamiltonianSpec, PhaseState, PotentialFamily, ShootingConfig, Tolerance,
};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const KNOWN_KEYS: &[&str] = &[
    "mass",
    "potential.kind",
    "potential.omega",
    "potential.lambda",
    "potential.coefficients",
    "drive.kind",
    "drive.value",
    "drive.amplitude",
    "drive.frequency",
    "drive.phase",
    "drive.coefficients",
    "problem.x0",
    "problem.x1",
    "problem.y0",
    "problem.t0",
    "problem.t1",
    "numerics.atol",
    "numerics.rtol",
    "numerics.hbar",
    "numerics.grid",
    "shooting.max_iter",
    "shooting.residual_tol",
    "kernel.x_min",
    "kernel.x_max",
    "kernel.points",
    "evolve.x_min",
    "evolve.x_max",
    "evolve.points",
    "evolve.center",
    "evolve.sigma",
    "evolve.momentum",
    "evolve.times",
    "evolve.table_nodes",
    "output.dir",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlatConfig {
    entries: BTreeMap<String, String>,
}

impl FlatConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        if text.trim_start().starts_with('{') {
            return Self::from_json(text);
        }
        let mut entries = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}", no + 1), "expected `key = value`"))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::config(format!("line {}", no + 1), "empty key"));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(CliError::config(key, "duplicate key"));
            }
        }
        let cfg = Self { entries };
        cfg.check_keys()?;
        Ok(cfg)
    }

    fn from_json(text: &str) -> CliResult<Self> {
        let doc: Value =
            serde_json::from_str(text).map_err(|e| CliError::config("config", format!("invalid JSON: {e}")))?;
        let obj = doc.get("config").unwrap_or(&doc);
        let obj = obj
            .as_object()
            .ok_or_else(|| CliError::config("config", "expected a JSON object of settings"))?;
        let mut entries = BTreeMap::new();
        for (k, v) in obj {
            let value = match v {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                Value::Bool(b) => b.to_string(),
                _ => return Err(CliError::config(k, "values must be strings or numbers")),
            };
            entries.insert(k.clone(), value);
        }
        let cfg = Self { entries };
        cfg.check_keys()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn check_keys(&self) -> CliResult<()> {
        match self.entries.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            Some(k) => Err(CliError::config(k, "unknown key")),
            None => Ok(()),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn to_json(&self) -> Value {
        Value::Object(
            self.entries
                .iter()
                .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                .collect(),
        )
    }

    fn parse_value<T: FromStr>(key: &str, s: &str) -> CliResult<T> {
        s.trim()
            .parse()
            .map_err(|_| CliError::config(key, format!("cannot parse `{s}`")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.raw(key).map(|s| Self::parse_value(key, s)).transpose()
    }

    pub fn require<T: FromStr>(&self, key: &str) -> CliResult<T> {
        self.get(key)?
            .ok_or_else(|| CliError::config(key, "missing required key"))
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn list(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        self.raw(key)
            .map(|s| s.split(',').map(|p| Self::parse_value(key, p)).collect())
            .transpose()
    }

    pub fn require_list(&self, key: &str) -> CliResult<Vec<f64>> {
        self.list(key)?
            .ok_or_else(|| CliError::config(key, "missing required key"))
    }
}

fn positive(key: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(key, format!("must be positive and finite, got {v}")))
    }
}

/// Uniform grid of positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl Grid {
    fn read(flat: &FlatConfig, prefix: &str) -> CliResult<Option<Self>> {
        let key = |k: &str| format!("{prefix}.{k}");
        let Some(points) = flat.get::<usize>(&key("points"))? else {
            return Ok(None);
        };
        if points < 2 {
            return Err(CliError::config(key("points"), "at least two points are required"));
        }
        let x_min: f64 = flat.require(&key("x_min"))?;
        let x_max: f64 = flat.require(&key("x_max"))?;
        if !(x_max > x_min) {
            return Err(CliError::config(key("x_max"), "must exceed x_min"));
        }
        Ok(Some(Self { x_min, x_max, points }))
    }

    pub fn coords(&self) -> Vec<f64> {
        let dx = (self.x_max - self.x_min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.x_max
                } else {
                    self.x_min + dx * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveConfig {
    pub grid: Grid,
    pub center: f64,
    pub sigma: f64,
    pub momentum: f64,
    pub times: Vec<f64>,
    pub table_nodes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub flat: FlatConfig,
    pub spec: HamiltonianSpec,
    pub x0: DVector<f64>,
    pub x1: Option<DVector<f64>>,
    pub y0: Option<DVector<f64>>,
    pub t0: f64,
    pub t1: Option<f64>,
    pub tol: Tolerance,
    pub hbar: f64,
    pub grid: Option<usize>,
    pub shooting: ShootingConfig,
    pub output: PathBuf,
}

fn read_potential(flat: &FlatConfig) -> CliResult<PotentialFamily> {
    let kind: String = flat.require("potential.kind")?;
    Ok(match kind.as_str() {
        "free" => PotentialFamily::Free,
        "harmonic" => PotentialFamily::Harmonic {
            omega: flat.require("potential.omega")?,
        },
        "cubic" => PotentialFamily::Cubic {
            lambda: flat.require("potential.lambda")?,
        },
        "quartic" => PotentialFamily::Quartic {
            lambda: flat.require("potential.lambda")?,
        },
        "polynomial" => PotentialFamily::Polynomial {
            coefficients: flat.require_list("potential.coefficients")?,
        },
        other => {
            return Err(CliError::config(
                "potential.kind",
                format!("unknown potential `{other}`"),
            ))
        }
    })
}

fn read_drive(flat: &FlatConfig) -> CliResult<Option<Drive>> {
    let kind = flat.get_or("drive.kind", "none".to_string())?;
    Ok(match kind.as_str() {
        "none" => None,
        "constant" => Some(Drive::Constant {
            value: flat.require("drive.value")?,
        }),
        "sinusoidal" => Some(Drive::Sinusoidal {
            amplitude: flat.require("drive.amplitude")?,
            frequency: flat.require("drive.frequency")?,
            phase: flat.get_or("drive.phase", 0.0)?,
        }),
        "polynomial" => Some(Drive::Polynomial {
            coefficients: flat.require_list("drive.coefficients")?,
        }),
        other => return Err(CliError::config("drive.kind", format!("unknown drive `{other}`"))),
    })
}

fn sized(key: &str, v: Option<Vec<f64>>, n: usize) -> CliResult<Option<DVector<f64>>> {
    match v {
        None => Ok(None),
        Some(v) if v.len() == n => Ok(Some(DVector::from_vec(v))),
        Some(v) => Err(CliError::config(
            key,
            format!("expected {n} components, got {}", v.len()),
        )),
    }
}

impl RunConfig {
    pub fn from_flat(flat: FlatConfig) -> CliResult<Self> {
        let mass = flat.require_list("mass")?;
        let spec = HamiltonianSpec::new(mass, read_potential(&flat)?, read_drive(&flat)?)?;
        let n = spec.n();
        let x0 = sized("problem.x0", Some(flat.require_list("problem.x0")?), n)?.expect("present");
        let x1 = sized("problem.x1", flat.list("problem.x1")?, n)?;
        let y0 = sized("problem.y0", flat.list("problem.y0")?, n)?;
        let atol = positive(
            "numerics.atol",
            flat.get_or("numerics.atol", Tolerance::default().atol)?,
        )?;
        let rtol = positive(
            "numerics.rtol",
            flat.get_or("numerics.rtol", Tolerance::default().rtol)?,
        )?;
        let tol = Tolerance::new(atol, rtol);
        let hbar = positive("numerics.hbar", flat.get_or("numerics.hbar", 1.0)?)?;
        let grid = flat.get::<usize>("numerics.grid")?;
        if grid.is_some_and(|g| g < 2) {
            return Err(CliError::config("numerics.grid", "at least two points are required"));
        }
        let defaults = ShootingConfig::default();
        let shooting = ShootingConfig {
            y0_guess: None,
            max_iter: flat.get_or("shooting.max_iter", defaults.max_iter)?,
            residual_tol: positive(
                "shooting.residual_tol",
                flat.get_or("shooting.residual_tol", defaults.residual_tol)?,
            )?,
            ivp_tol: tol,
        };
        let output = PathBuf::from(flat.get_or("output.dir", ".".to_string())?);
        Ok(Self {
            t0: flat.get_or("problem.t0", 0.0)?,
            t1: flat.get("problem.t1")?,
            flat,
            spec,
            x0,
            x1,
            y0,
            tol,
            hbar,
            grid,
            shooting,
            output,
        })
    }

    pub fn t1(&self) -> CliResult<f64> {
        self.t1
            .ok_or_else(|| CliError::config("problem.t1", "missing required key"))
    }

    pub fn bvp(&self) -> CliResult<BvpProblem> {
        let x1 = self
            .x1
            .clone()
            .ok_or_else(|| CliError::config("problem.x1", "missing required key"))?;
        Ok(BvpProblem::new(self.x0.clone(), x1, self.t0, self.t1()?)?)
    }

    /// Initial state for initial-value runs (no `problem.x1`).
    pub fn initial_state(&self) -> CliResult<PhaseState> {
        let y0 = self
            .y0
            .clone()
            .ok_or_else(|| CliError::config("problem.y0", "set problem.x1 or problem.y0"))?;
        Ok(PhaseState::new(self.x0.clone(), y0, self.t0))
    }

    pub fn kernel_grid(&self) -> CliResult<Option<Grid>> {
        Grid::read(&self.flat, "kernel")
    }

    pub fn evolve(&self) -> CliResult<EvolveConfig> {
        let grid = Grid::read(&self.flat, "evolve")?
            .ok_or_else(|| CliError::config("evolve.points", "missing required key"))?;
        let times = self.flat.require_list("evolve.times")?;
        if let Some(t) = times.iter().find(|&&t| !(t > self.t0)) {
            return Err(CliError::config(
                "evolve.times",
                format!("output time {t} must exceed problem.t0"),
            ));
        }
        let table_nodes = self.flat.get_or("evolve.table_nodes", 33usize)?;
        if table_nodes < 2 {
            return Err(CliError::config(
                "evolve.table_nodes",
                "at least two nodes are required",
            ));
        }
        Ok(EvolveConfig {
            grid,
            center: self.flat.get_or("evolve.center", 0.0)?,
            sigma: positive("evolve.sigma", self.flat.require("evolve.sigma")?)?,
            momentum: self.flat.get_or("evolve.momentum", 0.0)?,
            times,
            table_nodes,
        })
    }
}
