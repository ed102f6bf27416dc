//! Run configuration and its plain-text `key=value` format.
//!
//! ```text
//! # single peakon, second order
//! scheme=second
//! ic=single_peakon
//! k=9
//! t_final=20
//! ```
//!
//! One key per line, `#` starts a comment. Required keys are `scheme`,
//! `ic`, `t_final` and one of `k`/`nx`. Everything else has a default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::cfl::{CflMode, CflPolicy, PracticalRule};
use crate::error::{Error, Result};
use crate::mesh::{GridFn, GridSpec, Site};
use crate::peakons::{antipeakon_initial, single_peakon, two_peakon};
use crate::scheme2::{FluxPressure, PressureNode};

/// Default number of evenly spaced output times.
pub const DEFAULT_SNAPSHOTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    First,
    Second,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::First => "first",
            Scheme::Second => "second",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    SinglePeakon,
    TwoPeakon,
    AntipeakonPair,
    /// Two-column `x,u` table, linearly interpolated onto the grid.
    File(PathBuf),
}

impl InitialCondition {
    pub fn name(&self) -> &'static str {
        match self {
            InitialCondition::SinglePeakon => "single_peakon",
            InitialCondition::TwoPeakon => "two_peakon",
            InitialCondition::AntipeakonPair => "antipeakon_pair",
            InitialCondition::File(_) => "file",
        }
    }

    /// Domain used when the config does not name one.
    pub fn default_domain(&self) -> Option<(f64, f64)> {
        match self {
            InitialCondition::SinglePeakon => Some((-10.0, 30.0)),
            InitialCondition::TwoPeakon => Some((-15.0, 25.0)),
            InitialCondition::AntipeakonPair => Some((-12.0, 12.0)),
            InitialCondition::File(_) => None,
        }
    }

    /// Exact solution `u(t, x)` if known.
    pub fn exact(&self) -> Option<fn(f64, f64) -> f64> {
        match self {
            InitialCondition::SinglePeakon => Some(single_peakon),
            InitialCondition::TwoPeakon => Some(two_peakon),
            _ => None,
        }
    }

    /// Initial profile `u_0(x)`.
    pub fn profile(&self) -> Result<Box<dyn Fn(f64) -> f64>> {
        Ok(match self {
            InitialCondition::SinglePeakon => Box::new(|x| single_peakon(0.0, x)),
            InitialCondition::TwoPeakon => Box::new(|x| two_peakon(0.0, x)),
            InitialCondition::AntipeakonPair => Box::new(antipeakon_initial),
            InitialCondition::File(path) => {
                let table = ProfileTable::load(path)?;
                Box::new(move |x| table.eval(x))
            }
        })
    }
}

/// How second-order cell values are initialised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CellInit {
    #[default]
    Point,
    Average,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scheme: Scheme,
    pub a: f64,
    pub b: f64,
    pub nx: usize,
    pub t_final: f64,
    pub cfl: CflPolicy,
    pub ic: InitialCondition,
    pub snapshot_times: Vec<f64>,
    pub output: PathBuf,
    /// Step the companion `q` scheme alongside `u` (first order only).
    pub track_q: bool,
    pub cell_init: CellInit,
    pub flux_pressure: FluxPressure,
    pub pressure_node: PressureNode,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::First,
            a: -10.0,
            b: 30.0,
            nx: 512,
            t_final: 1.0,
            cfl: CflPolicy::default(),
            ic: InitialCondition::SinglePeakon,
            snapshot_times: Vec::new(),
            output: PathBuf::from("output"),
            track_q: true,
            cell_init: CellInit::Point,
            flux_pressure: FluxPressure::HalfLevel,
            pressure_node: PressureNode::Left,
        }
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.a, self.b, self.nx)
    }

    /// Initial data on the sites the configured scheme evolves.
    pub fn initial_data(&self, g: &GridSpec) -> Result<GridFn> {
        let f = self.ic.profile()?;
        match (self.scheme, self.cell_init) {
            (Scheme::First, _) => crate::mesh::sample_half_nodes(&f, g),
            (Scheme::Second, CellInit::Point) => crate::mesh::sample_nodes(&f, g),
            (Scheme::Second, CellInit::Average) => {
                crate::mesh::sample_cell_averages(&f, g, Site::Integer, 16)
            }
        }
    }

    /// `n` evenly spaced times on `[0, t_final]`, both ends included.
    pub fn even_snapshots(t_final: f64, n: usize) -> Vec<f64> {
        if n == 0 {
            return vec![t_final];
        }
        (0..=n).map(|i| t_final * i as f64 / n as f64).collect()
    }
}

/// Tabulated `u_0` read from a file.
#[derive(Debug, Clone)]
pub struct ProfileTable {
    xs: Vec<f64>,
    us: Vec<f64>,
}

impl ProfileTable {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Lines of `x,u` (commas or whitespace); a non-numeric first line is
    /// taken as a header.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty());
            let (Some(xs), Some(us)) = (cols.next(), cols.next()) else {
                return Err(Error::config(Some(i + 1), "expected two columns `x,u`"));
            };
            match (xs.parse::<f64>(), us.parse::<f64>()) {
                (Ok(x), Ok(u)) if x.is_finite() && u.is_finite() => rows.push((x, u)),
                _ if rows.is_empty() => continue,
                _ => return Err(Error::config(Some(i + 1), "non-numeric profile row")),
            }
        }
        if rows.len() < 2 {
            return Err(Error::config(None, "profile table needs at least two rows"));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            xs: rows.iter().map(|r| r.0).collect(),
            us: rows.iter().map(|r| r.1).collect(),
        })
    }

    /// Piecewise-linear interpolation, constant beyond the ends.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.us[0];
        }
        if x >= self.xs[n - 1] {
            return self.us[n - 1];
        }
        let i = self.xs.partition_point(|&v| v <= x);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (u0, u1) = (self.us[i - 1], self.us[i]);
        if x1 == x0 {
            return u1;
        }
        u0 + (u1 - u0) * (x - x0) / (x1 - x0)
    }
}

const KEYS: &[&str] = &[
    "scheme",
    "a",
    "b",
    "k",
    "nx",
    "t_final",
    "cfl",
    "theta",
    "big_c",
    "nu",
    "ic",
    "ic_file",
    "snapshot_times",
    "snapshots",
    "output",
    "track_q",
    "cell_init",
    "flux_pressure",
    "pressure_node",
    "cfl_rule",
];

/// Raw key/value pairs with the line each came from; later entries win.
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    entries: BTreeMap<String, (String, Option<usize>)>,
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut b = Self::new();
        b.merge_text(text)?;
        Ok(b)
    }

    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(Some(line_no), format!("expected key=value, got `{line}`")));
            };
            self.insert(key.trim(), value.trim(), Some(line_no))?;
        }
        Ok(())
    }

    /// Sets a key from outside a file (command-line flags).
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        self.insert(key, &value.into(), None)
    }

    fn insert(&mut self, key: &str, value: &str, line: Option<usize>) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(Error::config(line, format!("unknown key `{key}`")));
        }
        if value.is_empty() {
            return Err(Error::config(line, format!("empty value for key `{key}`")));
        }
        self.entries
            .insert(key.to_string(), (value.to_string(), line));
        Ok(())
    }

    fn get(&self, key: &str) -> Option<(&str, Option<usize>)> {
        self.entries.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn require(&self, key: &str) -> Result<(&str, Option<usize>)> {
        self.get(key)
            .ok_or_else(|| Error::config(None, format!("missing required key `{key}`")))
    }

    fn number(&self, key: &str) -> Result<Option<(f64, Option<usize>)>> {
        let Some((v, line)) = self.get(key) else {
            return Ok(None);
        };
        let x: f64 = v
            .parse()
            .map_err(|_| Error::config(line, format!("`{key}` is not a number: `{v}`")))?;
        if !x.is_finite() {
            return Err(Error::config(line, format!("`{key}` must be finite")));
        }
        Ok(Some((x, line)))
    }

    fn integer(&self, key: &str) -> Result<Option<(u64, Option<usize>)>> {
        let Some((v, line)) = self.get(key) else {
            return Ok(None);
        };
        let x = v
            .parse()
            .map_err(|_| Error::config(line, format!("`{key}` is not a non-negative integer: `{v}`")))?;
        Ok(Some((x, line)))
    }

    fn flag(&self, key: &str) -> Result<Option<bool>> {
        let Some((v, line)) = self.get(key) else {
            return Ok(None);
        };
        match v {
            "true" | "1" | "yes" => Ok(Some(true)),
            "false" | "0" | "no" => Ok(Some(false)),
            _ => Err(Error::config(line, format!("`{key}` must be true or false"))),
        }
    }

    pub fn build(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();

        let (scheme, line) = self.require("scheme")?;
        cfg.scheme = match scheme {
            "first" | "1" => Scheme::First,
            "second" | "2" => Scheme::Second,
            other => return Err(Error::config(line, format!("unknown scheme `{other}`"))),
        };

        let (ic, line) = self.require("ic")?;
        cfg.ic = match ic {
            "single_peakon" => InitialCondition::SinglePeakon,
            "two_peakon" => InitialCondition::TwoPeakon,
            "antipeakon_pair" => InitialCondition::AntipeakonPair,
            "file" => {
                let (path, _) = self.get("ic_file").ok_or_else(|| {
                    Error::config(line, "ic=file needs an `ic_file` path")
                })?;
                InitialCondition::File(PathBuf::from(path))
            }
            other => return Err(Error::config(line, format!("unknown initial condition `{other}`"))),
        };

        let domain = cfg.ic.default_domain();
        match (self.number("a")?, self.number("b")?, domain) {
            (Some((a, _)), Some((b, line)), _) => {
                if b <= a {
                    return Err(Error::config(line, format!("domain needs b > a, got [{a}, {b}]")));
                }
                cfg.a = a;
                cfg.b = b;
            }
            (None, None, Some((a, b))) => {
                cfg.a = a;
                cfg.b = b;
            }
            (None, None, None) => {
                return Err(Error::config(None, "missing required keys `a` and `b` for ic=file"))
            }
            _ => return Err(Error::config(None, "`a` and `b` must be given together")),
        }

        cfg.nx = match (self.integer("k")?, self.integer("nx")?) {
            (Some(_), Some((_, line))) => {
                return Err(Error::config(line, "give either `k` or `nx`, not both"))
            }
            (Some((k, line)), None) => {
                if !(2..=30).contains(&k) {
                    return Err(Error::config(line, format!("`k` must lie in 2..=30, got {k}")));
                }
                1usize << k
            }
            (None, Some((nx, line))) => {
                if nx < crate::mesh::MIN_CELLS as u64 {
                    return Err(Error::config(line, format!("`nx` must be at least 4, got {nx}")));
                }
                nx as usize
            }
            (None, None) => return Err(Error::config(None, "missing required key `k` (or `nx`)")),
        };

        let (t_final, line) = self
            .number("t_final")?
            .ok_or_else(|| Error::config(None, "missing required key `t_final`"))?;
        if t_final < 0.0 {
            return Err(Error::config(line, format!("`t_final` must be >= 0, got {t_final}")));
        }
        cfg.t_final = t_final;

        if let Some((mode, line)) = self.get("cfl") {
            cfg.cfl.mode = match mode {
                "strict" => CflMode::Strict,
                "practical" => CflMode::Practical,
                other => return Err(Error::config(line, format!("unknown cfl mode `{other}`"))),
            };
        }
        if let Some((theta, line)) = self.number("theta")? {
            if theta <= 0.0 {
                return Err(Error::config(line, format!("`theta` must be > 0, got {theta}")));
            }
            cfg.cfl.theta = theta;
        }
        if let Some((c, line)) = self.number("big_c")? {
            if c <= 0.0 {
                return Err(Error::config(line, format!("`big_c` must be > 0, got {c}")));
            }
            cfg.cfl.big_c = c;
        }
        if let Some((nu, line)) = self.number("nu")? {
            if !(nu > 0.0 && nu <= 1.0) {
                return Err(Error::config(line, format!("`nu` must lie in (0, 1], got {nu}")));
            }
            cfg.cfl.nu = nu;
        }
        if let Some((rule, line)) = self.get("cfl_rule") {
            cfg.cfl.rule = match rule {
                "speed" => PracticalRule::Speed,
                "amplitude" => PracticalRule::Amplitude,
                other => return Err(Error::config(line, format!("unknown cfl_rule `{other}`"))),
            };
        }

        cfg.snapshot_times = match (self.get("snapshot_times"), self.integer("snapshots")?) {
            (Some((list, line)), _) => {
                let mut times = Vec::new();
                for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let t: f64 = item.parse().map_err(|_| {
                        Error::config(line, format!("bad snapshot time `{item}`"))
                    })?;
                    if !(0.0..=t_final).contains(&t) {
                        return Err(Error::config(
                            line,
                            format!("snapshot time {t} lies outside [0, {t_final}]"),
                        ));
                    }
                    times.push(t);
                }
                times
            }
            (None, Some((n, _))) => RunConfig::even_snapshots(t_final, n as usize),
            (None, None) => RunConfig::even_snapshots(t_final, DEFAULT_SNAPSHOTS),
        };

        if let Some((out, _)) = self.get("output") {
            cfg.output = PathBuf::from(out);
        }
        if let Some(track) = self.flag("track_q")? {
            cfg.track_q = track;
        }
        if let Some((v, line)) = self.get("cell_init") {
            cfg.cell_init = match v {
                "point" => CellInit::Point,
                "average" => CellInit::Average,
                other => return Err(Error::config(line, format!("unknown cell_init `{other}`"))),
            };
        }
        if let Some((v, line)) = self.get("flux_pressure") {
            cfg.flux_pressure = match v {
                "half_level" => FluxPressure::HalfLevel,
                "predictor" => FluxPressure::Predictor,
                other => {
                    return Err(Error::config(line, format!("unknown flux_pressure `{other}`")))
                }
            };
        }
        if let Some((v, line)) = self.get("pressure_node") {
            cfg.pressure_node = match v {
                "left" => PressureNode::Left,
                "right" => PressureNode::Right,
                other => {
                    return Err(Error::config(line, format!("unknown pressure_node `{other}`")))
                }
            };
        }
        Ok(cfg)
    }
}

/// Parses and validates a complete config file.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    ConfigBuilder::from_text(text)?.build()
}
