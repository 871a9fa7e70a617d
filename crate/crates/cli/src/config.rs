//! Run configuration: a TOML file, then command-line overrides.

use std::path::{Path, PathBuf};

use gtzw_core::coupling::FiniteBinaryDistribution;
use gtzw_core::growth::{bernoulli_envelope, HookEvent};
use gtzw_core::zw::{SamplerConfig, SamplerMode, ZwParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Complex number as `[re, im]`.
pub type Pair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub z: Pair,
    pub w: Pair,
    pub zp: Option<Pair>,
    pub wp: Option<Pair>,
    pub seed: u64,
    /// Worker threads. Results do not depend on it.
    pub workers: usize,
    /// Output directory.
    pub out: PathBuf,
    pub n_levels: usize,
    pub n_paths: usize,
    pub k: Option<i64>,
    pub delta: Option<f64>,
    pub eps_tail: f64,
    pub sampler: SamplerMode,
    pub gibbs_sweeps: usize,
    pub burn_in: usize,
    pub cell_budget: usize,
    /// Fluctuation windows; empty means doubling from `first_window`.
    pub windows: Vec<usize>,
    pub first_window: usize,
    /// Thick-hook event `(i, j, l, m, t)` tracked by `growth`.
    pub hook: Option<[u64; 5]>,
    /// Level range of the `c1` fit; defaults to `[2, n_levels]`.
    pub c1_levels: Option<[usize; 2]>,
    pub c1_paths: usize,
    pub coupling: CouplingSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sampler = SamplerConfig::default();
        Self {
            z: [0.5, 0.0],
            w: [0.3, 0.0],
            zp: None,
            wp: None,
            seed: 1,
            workers: 1,
            out: PathBuf::from("out"),
            n_levels: 50,
            n_paths: 100,
            k: None,
            delta: None,
            eps_tail: sampler.eps_tail,
            sampler: sampler.mode,
            gibbs_sweeps: sampler.gibbs_sweeps,
            burn_in: sampler.burn_in,
            cell_budget: sampler.cell_budget,
            windows: Vec::new(),
            first_window: 4,
            hook: None,
            c1_levels: None,
            c1_paths: 50,
            coupling: CouplingSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    pub mu: DistSpec,
    pub nu: DistSpec,
}

impl Default for CouplingSpec {
    fn default() -> Self {
        Self {
            mu: DistSpec::Product { marginals: vec![0.3] },
            nu: DistSpec::Product { marginals: vec![0.5] },
        }
    }
}

/// A law on `{0,1}^n`. Dense probabilities are indexed by the bitmask with
/// coordinate 1 in the lowest bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistSpec {
    Product { marginals: Vec<f64> },
    Dense { probs: Vec<f64> },
    /// Bernoulli `min(1, c1 / N)` for `N = 1..=n`.
    Envelope { c1: f64, n: usize },
}

pub const MAX_COUPLING_BITS: usize = 24;

impl DistSpec {
    pub fn build(&self) -> CliResult<FiniteBinaryDistribution> {
        let n = match self {
            DistSpec::Product { marginals } => marginals.len(),
            DistSpec::Envelope { n, .. } => *n,
            DistSpec::Dense { probs } => probs.len().trailing_zeros() as usize,
        };
        if n > MAX_COUPLING_BITS {
            return Err(CliError::Config(format!("{n} coordinates, at most {MAX_COUPLING_BITS} supported")));
        }
        let dist = match self {
            DistSpec::Product { marginals } => FiniteBinaryDistribution::product(marginals.clone()),
            DistSpec::Dense { probs } => FiniteBinaryDistribution::dense(n, probs.clone()),
            DistSpec::Envelope { c1, n } => bernoulli_envelope(*c1, *n),
        };
        dist.map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Command-line values that replace the file's.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub z: Option<Pair>,
    pub w: Option<Pair>,
    pub zp: Option<Pair>,
    pub wp: Option<Pair>,
    pub k: Option<i64>,
    pub delta: Option<f64>,
    pub n_levels: Option<usize>,
    pub n_paths: Option<usize>,
    pub eps_tail: Option<f64>,
    pub gibbs_sweeps: Option<usize>,
}

/// Parses `re` or `re,im`.
pub fn parse_pair(s: &str) -> Result<Pair, String> {
    let mut parts = s.split(',').map(|p| p.trim().parse::<f64>());
    let re = parts.next().ok_or("empty value")?.map_err(|e| format!("{s:?}: {e}"))?;
    let im = parts.next().transpose().map_err(|e| format!("{s:?}: {e}"))?.unwrap_or(0.0);
    if parts.next().is_some() {
        return Err(format!("{s:?}: expected re or re,im"));
    }
    Ok([re, im])
}

fn params_of(z: Pair, w: Pair) -> CliResult<ZwParams> {
    ZwParams::new(Complex64::new(z[0], z[1]), Complex64::new(w[0], w[1])).map_err(|e| CliError::Config(e.to_string()))
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> CliResult<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(CliError::io(p))?;
                toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = o.$field.clone() { self.$target = v; })*
            };
        }
        set!(seed => seed, workers => workers, out => out, z => z, w => w, n_levels => n_levels,
             n_paths => n_paths, eps_tail => eps_tail, gibbs_sweeps => gibbs_sweeps);
        if o.zp.is_some() {
            self.zp = o.zp;
        }
        if o.wp.is_some() {
            self.wp = o.wp;
        }
        if o.k.is_some() {
            self.k = o.k;
        }
        if o.delta.is_some() {
            self.delta = o.delta;
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        self.params()?;
        self.params_prime()?;
        if self.n_paths == 0 {
            return Err(CliError::Config("n_paths must be at least 1".into()));
        }
        if self.n_levels == 0 {
            return Err(CliError::Config("n_levels must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0) {
                return Err(CliError::Config(format!("delta = {d} must be positive")));
            }
        }
        self.sampler_config().validate().map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(h) = self.hook {
            self.hook_event().map_err(|e| CliError::Config(format!("hook {h:?}: {e}")))?;
        }
        Ok(())
    }

    pub fn params(&self) -> CliResult<ZwParams> {
        params_of(self.z, self.w)
    }

    /// The second pair, if both halves are set.
    pub fn params_prime(&self) -> CliResult<Option<ZwParams>> {
        match (self.zp, self.wp) {
            (Some(z), Some(w)) => params_of(z, w).map(Some),
            (None, None) => Ok(None),
            _ => Err(CliError::Config("zp and wp must be given together".into())),
        }
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig {
            eps_tail: self.eps_tail,
            mode: self.sampler,
            gibbs_sweeps: self.gibbs_sweeps,
            burn_in: self.burn_in,
            seed: self.seed,
            cell_budget: self.cell_budget,
        }
    }

    pub fn hook_event(&self) -> gtzw_core::Result<Option<HookEvent>> {
        self.hook
            .map(|[i, j, l, m, t]| HookEvent::new(i as usize, j, l as usize, m, t as usize))
            .transpose()
    }

    /// The configuration minus the fields that do not change results
    /// (`workers`, `out`).
    pub fn provenance(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let obj = v.as_object_mut().unwrap();
        obj.remove("workers");
        obj.remove("out");
        v
    }

    /// SHA-256 of the canonical JSON of [`provenance`](Self::provenance).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.provenance().to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
