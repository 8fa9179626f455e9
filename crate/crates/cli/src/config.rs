//! Run configuration: defaults, then a flat `key = value` file, then flags.
//!
//! File grammar: one `key = value` per line; blank lines and lines whose
//! first non-blank character is `#` are ignored; keys are the names listed
//! in [`KEYS`]; a repeated key keeps its last value.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::CliError;

pub const KEYS: [&str; 17] = [
    "model",
    "radius",
    "d",
    "D",
    "budget_vertices",
    "cache_dir",
    "out",
    "seed",
    "schedule",
    "margin",
    "scales",
    "n_used",
    "max_factors",
    "max_nodes",
    "geodesic_cap",
    "exact_limit",
    "time_cap",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub model: String,
    pub radius: u32,
    pub d: Option<u64>,
    pub bound: Option<u64>,
    pub budget_vertices: usize,
    pub cache_dir: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    /// `(inner, outer)` windows for the ends estimate.
    pub schedule: Vec<(u32, u32)>,
    pub margin: u32,
    pub scales: Vec<u64>,
    pub n_used: u64,
    pub max_factors: usize,
    pub max_nodes: usize,
    pub geodesic_cap: usize,
    pub exact_limit: usize,
    /// Wall-clock seconds before the run stops with the budget exit code.
    pub time_cap: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: "z^2".into(),
            radius: 8,
            d: None,
            bound: None,
            budget_vertices: 4_000_000,
            cache_dir: None,
            out: PathBuf::from("coarse-lab-out"),
            seed: 0,
            schedule: vec![(1, 8), (2, 12), (3, 16)],
            margin: 0,
            scales: vec![2, 4, 8, 16],
            n_used: 24,
            max_factors: 8,
            max_nodes: 2_000_000,
            geodesic_cap: 100_000,
            exact_limit: 40,
            time_cap: 3600,
        }
    }
}

pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(CliError::Usage(format!("config line {}: unknown key {k:?}", i + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn parse_schedule(s: &str) -> Result<Vec<(u32, u32)>, CliError> {
    let bad = || CliError::Usage(format!("schedule {s:?}: expected r:R,r:R,..."));
    let out: Vec<(u32, u32)> = s
        .split(',')
        .map(|w| {
            let (a, b) = w.trim().split_once(':').ok_or_else(bad)?;
            Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
        })
        .collect::<Result<_, CliError>>()?;
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

pub fn parse_list(s: &str) -> Result<Vec<u64>, CliError> {
    let out: Vec<u64> = s
        .split(',')
        .map(|x| x.trim().parse().map_err(|_| CliError::Usage(format!("list {s:?}: expected integers"))))
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(CliError::Usage("empty list".into()));
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Usage(format!("{k}: bad value {v:?}")))
}

impl RunConfig {
    /// Applies `key = value` settings on top of `self`.
    pub fn apply(&mut self, kv: &BTreeMap<String, String>) -> Result<(), CliError> {
        for (k, v) in kv {
            match k.as_str() {
                "model" => self.model = v.clone(),
                "radius" => self.radius = num(k, v)?,
                "d" => self.d = Some(num(k, v)?),
                "D" => self.bound = Some(num(k, v)?),
                "budget_vertices" => self.budget_vertices = num(k, v)?,
                "cache_dir" => self.cache_dir = Some(PathBuf::from(v)),
                "out" => self.out = PathBuf::from(v),
                "seed" => self.seed = num(k, v)?,
                "schedule" => self.schedule = parse_schedule(v)?,
                "margin" => self.margin = num(k, v)?,
                "scales" => self.scales = parse_list(v)?,
                "n_used" => self.n_used = num(k, v)?,
                "max_factors" => self.max_factors = num(k, v)?,
                "max_nodes" => self.max_nodes = num(k, v)?,
                "geodesic_cap" => self.geodesic_cap = num(k, v)?,
                "exact_limit" => self.exact_limit = num(k, v)?,
                "time_cap" => self.time_cap = num(k, v)?,
                _ => return Err(CliError::Usage(format!("unknown key {k:?}"))),
            }
        }
        self.validate()
    }

    fn validate(&self) -> Result<(), CliError> {
        let budgets = [
            self.budget_vertices,
            self.max_factors,
            self.max_nodes,
            self.geodesic_cap,
            self.time_cap as usize,
        ];
        if budgets.contains(&0) {
            return Err(CliError::Usage("budgets must be positive".into()));
        }
        if self.schedule.is_empty() || self.scales.is_empty() {
            return Err(CliError::Usage("schedules must be nonempty".into()));
        }
        Ok(())
    }

    /// The effective configuration as a sorted `key = value` file.
    pub fn render(&self) -> String {
        let mut kv: BTreeMap<&str, String> = BTreeMap::new();
        kv.insert("model", self.model.clone());
        kv.insert("radius", self.radius.to_string());
        if let Some(d) = self.d {
            kv.insert("d", d.to_string());
        }
        if let Some(b) = self.bound {
            kv.insert("D", b.to_string());
        }
        kv.insert("budget_vertices", self.budget_vertices.to_string());
        if let Some(c) = &self.cache_dir {
            kv.insert("cache_dir", c.display().to_string());
        }
        kv.insert("out", self.out.display().to_string());
        kv.insert("seed", self.seed.to_string());
        let sched: Vec<String> = self.schedule.iter().map(|(a, b)| format!("{a}:{b}")).collect();
        kv.insert("schedule", sched.join(","));
        kv.insert("margin", self.margin.to_string());
        let scales: Vec<String> = self.scales.iter().map(u64::to_string).collect();
        kv.insert("scales", scales.join(","));
        kv.insert("n_used", self.n_used.to_string());
        kv.insert("max_factors", self.max_factors.to_string());
        kv.insert("max_nodes", self.max_nodes.to_string());
        kv.insert("geodesic_cap", self.geodesic_cap.to_string());
        kv.insert("exact_limit", self.exact_limit.to_string());
        kv.insert("time_cap", self.time_cap.to_string());
        kv.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
