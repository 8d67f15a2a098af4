use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fem::SourceSpec;
use crate::geometry::Domain;
use crate::rearrange::{check_k, LorentzScale};
use crate::verify::Theorem;

/// One `[domains]` entry: a shape, optionally paired with an imported mesh file.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainEntry {
    pub domain: Domain,
    pub mesh: Option<PathBuf>,
}

impl DomainEntry {
    pub fn label(&self) -> String {
        match &self.mesh {
            Some(p) => format!("{} mesh={}", self.domain, p.display()),
            None => self.domain.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub h: f64,
    /// Uniform refinements of the base mesh; the last two levels form the Richardson pair.
    pub refinements: u32,
    /// Levels used for the level-set diagnostic.
    pub tgrid: usize,
    pub out: PathBuf,
    pub betas: Vec<f64>,
    pub ks: Vec<f64>,
    pub sources: Vec<String>,
    pub theorems: Vec<Theorem>,
    pub gamma2: f64,
    pub gamma_provenance: String,
    pub domains: Vec<DomainEntry>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            h: 0.05,
            refinements: 1,
            tgrid: 512,
            out: PathBuf::from("results"),
            betas: vec![1.0],
            ks: vec![1.0, 0.5],
            sources: vec!["constant".into()],
            theorems: Theorem::ALL.to_vec(),
            gamma2: f64::NAN,
            gamma_provenance: String::new(),
            domains: Vec::new(),
        }
    }
}

fn cfg_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Config {
        line,
        reason: reason.into(),
    }
}

fn number(line: usize, key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| cfg_err(line, format!("`{key}`: bad number `{}`", v.trim())))?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(cfg_err(line, format!("`{key}` must be positive, got {x}")));
    }
    Ok(x)
}

fn positive_override(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive, got {x}")))
    }
}

fn list(v: &str) -> Vec<&str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

/// Command-line values that replace config entries before validation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub h: Option<f64>,
    pub beta: Option<f64>,
    pub gamma2: Option<f64>,
    pub seed: Option<u64>,
}

/// Parses sectioned `key = value` text. Sections: `[run]`, `[physics]`, `[gamma]`, `[domains]`.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, &Overrides::default())
}

pub fn parse_config_with(text: &str, over: &Overrides) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut section = String::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut k_line = 0;
    let mut gamma_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(name) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let name = name.trim();
            if !matches!(name, "run" | "physics" | "gamma" | "domains") {
                return Err(cfg_err(line, format!("unknown section `[{name}]`")));
            }
            section = name.to_string();
            continue;
        }
        if section == "domains" {
            cfg.domains.push(parse_domain_line(line, s)?);
            continue;
        }
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| cfg_err(line, format!("expected `key = value`, got `{s}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if section.is_empty() {
            return Err(cfg_err(line, format!("`{key}` appears before any section")));
        }
        if !seen.insert((section.clone(), key.to_string())) {
            return Err(cfg_err(line, format!("duplicate key `{key}` in [{section}]")));
        }
        match (section.as_str(), key) {
            ("run", "seed") => {
                cfg.seed = value
                    .parse()
                    .map_err(|_| cfg_err(line, format!("`seed`: bad integer `{value}`")))?
            }
            ("run", "h") => cfg.h = number(line, key, value)?,
            ("run", "refinements") => {
                cfg.refinements = value
                    .parse()
                    .ok()
                    .filter(|r| *r >= 1)
                    .ok_or_else(|| cfg_err(line, format!("`refinements` must be an integer ≥ 1, got `{value}`")))?
            }
            ("run", "tgrid") => {
                cfg.tgrid = value
                    .parse()
                    .ok()
                    .filter(|t| *t >= 64)
                    .ok_or_else(|| cfg_err(line, format!("`tgrid` must be an integer ≥ 64, got `{value}`")))?
            }
            ("run", "out") => cfg.out = PathBuf::from(value),
            ("physics", "beta") => {
                cfg.betas = list(value).into_iter().map(|v| number(line, key, v)).collect::<Result<_>>()?
            }
            ("physics", "k") => {
                cfg.ks = list(value).into_iter().map(|v| number(line, key, v)).collect::<Result<_>>()?;
                k_line = line;
            }
            ("physics", "sources") => {
                cfg.sources = list(value).into_iter().map(String::from).collect();
                for s in &cfg.sources {
                    SourceSpec::from_name(s).map_err(|e| cfg_err(line, e.to_string()))?;
                }
            }
            ("physics", "theorems") => {
                cfg.theorems = list(value)
                    .into_iter()
                    .map(|t| Theorem::from_name(t).ok_or_else(|| cfg_err(line, format!("unknown theorem `{t}`"))))
                    .collect::<Result<_>>()?
            }
            ("gamma", "gamma2") => {
                cfg.gamma2 = number(line, key, value)?;
                gamma_line = line;
            }
            ("gamma", "provenance") => cfg.gamma_provenance = value.to_string(),
            _ => return Err(cfg_err(line, format!("unknown key `{key}` in [{section}]"))),
        }
    }
    if let Some(h) = over.h {
        positive_override("h", h)?;
        cfg.h = h;
    }
    if let Some(b) = over.beta {
        positive_override("beta", b)?;
        cfg.betas = vec![b];
    }
    if let Some(seed) = over.seed {
        cfg.seed = seed;
    }
    if let Some(g) = over.gamma2 {
        positive_override("gamma2", g)?;
        cfg.gamma2 = g;
        cfg.gamma_provenance = format!("command line --gamma2 {g}");
        gamma_line = 0;
    }
    if cfg.gamma2.is_nan() {
        return Err(Error::param("config", "[gamma] gamma2 is required"));
    }
    if cfg.gamma_provenance.is_empty() {
        return Err(if gamma_line > 0 {
            cfg_err(gamma_line, "[gamma] provenance is required alongside gamma2")
        } else {
            Error::param("config", "[gamma] provenance is required alongside gamma2")
        });
    }
    if cfg.domains.is_empty() {
        return Err(Error::param("config", "[domains] lists no domain"));
    }
    for key in ["beta", "k", "sources", "theorems"] {
        let empty = match key {
            "beta" => cfg.betas.is_empty(),
            "k" => cfg.ks.is_empty(),
            "sources" => cfg.sources.is_empty(),
            _ => cfg.theorems.is_empty(),
        };
        if empty {
            return Err(Error::param("config", format!("[physics] `{key}` is empty")));
        }
    }
    check_k_lists(&cfg, k_line)?;
    Ok(cfg)
}

fn parse_domain_line(line: usize, s: &str) -> Result<DomainEntry> {
    let (shape, mesh) = match s.split_once(" mesh=") {
        Some((a, b)) => (a.trim(), Some(PathBuf::from(b.trim()))),
        None => (s, None),
    };
    let domain: Domain = shape.parse().map_err(|e: Error| cfg_err(line, e.to_string()))?;
    Ok(DomainEntry { domain, mesh })
}

/// Every k must be admissible for every Lorentz theorem and source in the run.
fn check_k_lists(cfg: &RunConfig, line: usize) -> Result<()> {
    for t in &cfg.theorems {
        let scale = match t {
            Theorem::LorentzK1 => LorentzScale::K1,
            Theorem::Lorentz2k2 => LorentzScale::TwoK2,
            _ => continue,
        };
        for s in &cfg.sources {
            let constant = SourceSpec::from_name(s)?.is_constant();
            for &k in &cfg.ks {
                check_k(scale, k, 2, constant).map_err(|e| cfg_err(line, format!("{t} with source {s}: {e}")))?;
            }
        }
    }
    Ok(())
}

impl RunConfig {
    /// Normalized rendering; two configs with equal canonical text run identically.
    pub fn canonical(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "h = {:?}", self.h);
        let _ = writeln!(s, "refinements = {}", self.refinements);
        let _ = writeln!(s, "tgrid = {}", self.tgrid);
        let _ = writeln!(s, "[physics]");
        let _ = writeln!(s, "beta = {}", join(&self.betas));
        let _ = writeln!(s, "k = {}", join(&self.ks));
        let _ = writeln!(s, "sources = {}", self.sources.join(", "));
        let names: Vec<&str> = self.theorems.iter().map(|t| t.name()).collect();
        let _ = writeln!(s, "theorems = {}", names.join(", "));
        let _ = writeln!(s, "[gamma]");
        let _ = writeln!(s, "gamma2 = {:?}", self.gamma2);
        let _ = writeln!(s, "provenance = {}", self.gamma_provenance);
        let _ = writeln!(s, "[domains]");
        for d in &self.domains {
            let _ = writeln!(s, "{}", d.label());
        }
        s
    }

    /// First 16 hex digits of SHA-256 over the canonical text.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(digest)[..16].to_string()
    }
}
