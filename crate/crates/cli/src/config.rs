//! Flat `key = value` configuration with per-experiment defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ssh_revival::analysis::{InitialState, UniversalityCriterion};
use ssh_revival::entanglement::EntropyOrder;
use ssh_revival::fock::Statistics;

use crate::experiments::Experiment;

/// Every recognised key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("experiment", "which experiment to run"),
    ("statistics", "fermi or bose"),
    ("chain.length", "number of sites L (odd) for single-length experiments"),
    ("chain.lengths", "comma-separated list of odd L for multi-length experiments"),
    ("chain.g1", "intra-cell coupling"),
    ("chain.g2", "inter-cell coupling, the unit of energy"),
    ("chain.gamma", "loss rate on odd sites"),
    ("partition", "comma-separated sites of subsystem A"),
    ("initial", "ground (negative band plus edge mode) or all (every mode)"),
    ("scan.ratios", "comma-separated g1/g2 values for scans"),
    ("grid.t_max", "horizon in units of 1/gamma"),
    ("grid.n_steps", "number of time steps"),
    ("criterion.epsilon", "relative tolerance of the universality test"),
    ("criterion.horizon", "integration horizon in units of 1/gamma"),
    ("criterion.reference_length", "odd L standing in for the infinite chain"),
    ("criterion.sensitivity", "extra horizons reported by length scans"),
    ("mi.order", "Renyi order of the mutual information (1 is von Neumann)"),
    ("oracle.tolerance", "maximum allowed oracle mismatch"),
    ("limits.fock_dim", "largest dense Fock space"),
    ("limits.amplitudes", "largest number of stored ensemble amplitudes"),
    ("output.path", "output file, - for stdout"),
    ("output.format", "csv or json"),
    ("output.timing", "include wall time in the metadata"),
    ("output.sidecar", "also write <path>.meta.json with the metadata"),
];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("malformed override {0:?}, expected key=value")]
    Override(String),
    #[error("{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

/// Raw key/value entries in the order they were given.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: line.to_string(),
            })?;
            raw.set(k, v);
        }
        Ok(raw)
    }

    /// Applies a `key=value` override.
    pub fn apply(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::Override(assignment.to_string()))?;
        self.set(k, v);
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries
            .insert(key.trim().to_string(), value.trim().to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

fn defaults(experiment: Experiment, statistics: Statistics) -> BTreeMap<&'static str, String> {
    let mut d: BTreeMap<&'static str, String> = [
        ("experiment", experiment.name()),
        ("statistics", statistics.name()),
        ("chain.length", "7"),
        ("chain.lengths", "51,201,1001"),
        ("chain.g1", "0.1"),
        ("chain.g2", "1"),
        ("chain.gamma", "0.1"),
        ("partition", "2"),
        ("initial", "ground"),
        ("scan.ratios", "0.1,0.3,0.5,0.7,0.9"),
        ("grid.t_max", "20"),
        ("grid.n_steps", "400"),
        ("criterion.epsilon", "0.05"),
        ("criterion.horizon", "20"),
        ("criterion.reference_length", "301"),
        ("criterion.sensitivity", "15,30"),
        ("mi.order", "1"),
        ("oracle.tolerance", "1e-8"),
        ("limits.fock_dim", "4096"),
        ("limits.amplitudes", "50000000"),
        ("output.path", "-"),
        ("output.format", "csv"),
        ("output.timing", "false"),
        ("output.sidecar", "false"),
    ]
    .into_iter()
    .map(|(k, v)| (k, v.to_string()))
    .collect();
    let bose = statistics == Statistics::Bose;
    let mut set = |k: &'static str, v: &str| {
        d.insert(k, v.to_string());
    };
    match experiment {
        Experiment::Populations => {
            set("grid.t_max", "10");
            set("grid.n_steps", "100");
        }
        Experiment::Revival if bose => set("chain.lengths", "3,5,7"),
        Experiment::Visibility => {
            set("chain.length", "301");
            let ratios: Vec<String> = (1..=19)
                .map(|i| format!("{:.2}", i as f64 * 0.05))
                .map(|s| s.trim_end_matches('0').to_string())
                .chain(["0.98".to_string()])
                .collect();
            set("scan.ratios", &ratios.join(","));
        }
        Experiment::MutualInformation if bose => {
            set("chain.lengths", "11,15");
            set("mi.order", "2");
            set("grid.n_steps", "200");
        }
        Experiment::EntropyDensity => {
            set("chain.lengths", "5,7,9");
            set("grid.t_max", "10");
            set("grid.n_steps", "100");
            set("oracle.tolerance", "1e-10");
        }
        Experiment::OracleCheck => {
            set("chain.lengths", "3,5,7");
            set("scan.ratios", "0.1,0.5,0.9");
            set("grid.n_steps", "9");
        }
        _ => {}
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}, expected csv or json")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Fully resolved, typed configuration.
#[derive(Debug, Clone)]
pub struct Settings {
    pub experiment: Experiment,
    pub statistics: Statistics,
    pub length: usize,
    pub lengths: Vec<usize>,
    pub g1: f64,
    pub g2: f64,
    pub gamma: f64,
    pub partition: Vec<usize>,
    pub initial: InitialState,
    pub ratios: Vec<f64>,
    pub t_max: f64,
    pub n_steps: usize,
    pub criterion: UniversalityCriterion,
    pub sensitivity: Vec<f64>,
    pub order: EntropyOrder,
    pub oracle_tolerance: f64,
    pub fock_cap: usize,
    pub amplitude_cap: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub timing: bool,
    pub sidecar: bool,
    /// Every key with its resolved value, sorted by key.
    pub echo: BTreeMap<String, String>,
}

impl Settings {
    pub fn ratio(&self) -> f64 {
        self.g1 / self.g2
    }

    pub fn gamma_over_g2(&self) -> f64 {
        self.gamma / self.g2
    }
}

struct Reader<'a> {
    values: &'a BTreeMap<String, String>,
    problems: Vec<String>,
}

impl Reader<'_> {
    fn parse<T: FromStr>(&mut self, key: &str) -> Option<T>
    where
        T::Err: fmt::Display,
    {
        let raw = &self.values[key];
        match raw.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                self.problems.push(format!("{key}: cannot parse {raw:?}: {e}"));
                None
            }
        }
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Option<Vec<T>>
    where
        T::Err: fmt::Display,
    {
        let raw = &self.values[key];
        let mut out = Vec::new();
        for item in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.parse() {
                Ok(v) => out.push(v),
                Err(e) => {
                    self.problems.push(format!("{key}: cannot parse {item:?}: {e}"));
                    return None;
                }
            }
        }
        if out.is_empty() {
            self.problems.push(format!("{key}: empty list"));
            return None;
        }
        Some(out)
    }

    fn flag(&mut self, key: &str) -> Option<bool> {
        self.parse(key)
    }
}

fn parse_initial(s: &str) -> Result<InitialState, String> {
    match s {
        "ground" => Ok(InitialState::Ground),
        "all" => Ok(InitialState::AllOccupied),
        other => Err(format!("unknown initial state {other:?}, expected ground or all")),
    }
}

/// Merges defaults with the given entries and checks every constraint that
/// does not need a computation.
pub fn resolve(raw: &RawConfig) -> Result<Settings, ConfigError> {
    let mut problems = Vec::new();
    for key in raw.entries.keys() {
        if !KEYS.iter().any(|(k, _)| k == key) {
            problems.push(format!("unknown key {key:?}"));
        }
    }
    let experiment = match raw.get("experiment").map(str::parse::<Experiment>) {
        None => Experiment::Revival,
        Some(Ok(e)) => e,
        Some(Err(e)) => {
            problems.push(format!("experiment: {e}"));
            Experiment::Revival
        }
    };
    let statistics = match raw.get("statistics").map(str::parse::<Statistics>) {
        None => Statistics::Fermi,
        Some(Ok(s)) => s,
        Some(Err(e)) => {
            problems.push(format!("statistics: {e}"));
            Statistics::Fermi
        }
    };
    let mut values: BTreeMap<String, String> = defaults(experiment, statistics)
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    for (k, v) in &raw.entries {
        if values.contains_key(k) {
            values.insert(k.clone(), v.clone());
        }
    }

    let mut r = Reader {
        values: &values,
        problems,
    };
    let length = r.parse::<usize>("chain.length");
    let lengths = r.list::<usize>("chain.lengths");
    let g1 = r.parse::<f64>("chain.g1");
    let g2 = r.parse::<f64>("chain.g2");
    let gamma = r.parse::<f64>("chain.gamma");
    let partition = r.list::<usize>("partition");
    let initial = match parse_initial(&values["initial"]) {
        Ok(i) => Some(i),
        Err(e) => {
            r.problems.push(format!("initial: {e}"));
            None
        }
    };
    let ratios = r.list::<f64>("scan.ratios");
    let t_max = r.parse::<f64>("grid.t_max");
    let n_steps = r.parse::<usize>("grid.n_steps");
    let epsilon = r.parse::<f64>("criterion.epsilon");
    let horizon = r.parse::<f64>("criterion.horizon");
    let reference_length = r.parse::<usize>("criterion.reference_length");
    let sensitivity = r.list::<f64>("criterion.sensitivity");
    let order = r.parse::<f64>("mi.order");
    let oracle_tolerance = r.parse::<f64>("oracle.tolerance");
    let fock_cap = r.parse::<usize>("limits.fock_dim");
    let amplitude_cap = r.parse::<usize>("limits.amplitudes");
    let format = r.parse::<Format>("output.format");
    let timing = r.flag("output.timing");
    let sidecar = r.flag("output.sidecar");
    let mut problems = r.problems;

    let odd = |l: usize| l >= 3 && l % 2 == 1;
    if let Some(l) = length {
        if experiment.uses_single_length() && !odd(l) {
            problems.push(format!("chain.length: L = {l} must be odd and at least 3"));
        }
    }
    if let Some(ls) = &lengths {
        if experiment.uses_length_list() {
            for &l in ls.iter().filter(|&&l| !odd(l)) {
                problems.push(format!("chain.lengths: L = {l} must be odd and at least 3"));
            }
        }
    }
    if let (Some(g1), Some(g2)) = (g1, g2) {
        if !(g2 > 0.0 && g2.is_finite()) {
            problems.push(format!("chain.g2: must be positive, got {g2}"));
        } else if !(g1 >= 0.0 && g1 < g2) {
            problems.push(format!(
                "chain.g1: need 0 <= g1 < g2 (topological phase), got g1 = {g1}, g2 = {g2}"
            ));
        }
    }
    if let Some(gamma) = gamma {
        if !(gamma > 0.0 && gamma.is_finite()) {
            problems.push(format!("chain.gamma: must be positive, got {gamma}"));
        }
    }
    if let Some(rs) = &ratios {
        if experiment.uses_ratio_list() {
            for &q in rs.iter().filter(|&&q| !(q > 0.0 && q < 1.0)) {
                problems.push(format!("scan.ratios: g1/g2 = {q} outside (0, 1)"));
            }
        }
    }
    if let Some(p) = &partition {
        let smallest = if experiment.uses_length_list() {
            lengths.as_ref().and_then(|l| l.iter().min().copied())
        } else {
            length
        };
        if let Some(l) = smallest {
            if p.iter().any(|&s| s >= l) || p.len() >= l {
                problems.push(format!("partition: sites {p:?} do not fit a chain of {l} sites"));
            }
        }
        let mut sorted = p.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != p.len() {
            problems.push(format!("partition: repeated site in {p:?}"));
        }
    }
    if let Some(t) = t_max {
        if !(t > 0.0 && t.is_finite()) {
            problems.push(format!("grid.t_max: must be positive, got {t}"));
        }
    }
    if n_steps == Some(0) {
        problems.push("grid.n_steps: must be at least 1".into());
    }
    let criterion = match (epsilon, horizon, reference_length) {
        (Some(epsilon), Some(horizon), Some(reference_length)) => {
            let c = UniversalityCriterion {
                epsilon,
                horizon,
                reference_length,
            };
            if let Err(e) = c.validate() {
                problems.push(format!("criterion: {e}"));
            }
            Some(c)
        }
        _ => None,
    };
    if let (Some(h), Some(t)) = (horizon, t_max) {
        if experiment.compares_curves() && h > t {
            problems.push(format!("criterion.horizon = {h} exceeds grid.t_max = {t}"));
        }
    }
    if let Some(s) = &sensitivity {
        for &h in s.iter().filter(|&&h| !(h > 0.0 && h.is_finite())) {
            problems.push(format!("criterion.sensitivity: horizon {h} must be positive"));
        }
    }
    let order = order.and_then(|o| match EntropyOrder::new(o) {
        Ok(o) => Some(o),
        Err(e) => {
            problems.push(format!("mi.order: {e}"));
            None
        }
    });
    if let Some(t) = oracle_tolerance {
        if !(t > 0.0) {
            problems.push(format!("oracle.tolerance: must be positive, got {t}"));
        }
    }
    if experiment == Experiment::Populations && initial == Some(InitialState::AllOccupied) {
        problems.push("initial: the closed-form populations assume the ground initial state".into());
    }
    if statistics == Statistics::Bose && experiment.fermionic_only() {
        problems.push(format!(
            "statistics: experiment {} is defined for fermions only",
            experiment.name()
        ));
    }
    if !problems.is_empty() {
        return Err(ConfigError::Invalid(problems));
    }
    let output = match values["output.path"].as_str() {
        "-" | "" => None,
        p => Some(PathBuf::from(p)),
    };
    Ok(Settings {
        experiment,
        statistics,
        length: length.unwrap(),
        lengths: lengths.unwrap(),
        g1: g1.unwrap(),
        g2: g2.unwrap(),
        gamma: gamma.unwrap(),
        partition: partition.unwrap(),
        initial: initial.unwrap(),
        ratios: ratios.unwrap(),
        t_max: t_max.unwrap(),
        n_steps: n_steps.unwrap(),
        criterion: criterion.unwrap(),
        sensitivity: sensitivity.unwrap(),
        order: order.unwrap(),
        oracle_tolerance: oracle_tolerance.unwrap(),
        fock_cap: fock_cap.unwrap(),
        amplitude_cap: amplitude_cap.unwrap(),
        output,
        format: format.unwrap(),
        timing: timing.unwrap(),
        sidecar: sidecar.unwrap(),
        echo: values,
    })
}
