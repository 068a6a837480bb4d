//! Run configuration: TOML file, then command-line overrides, then derived
//! values (permeabilities from the rate, default interleaver spread).

use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sctc::codec::DecoderSchedule;
use sctc::construction::{
    nested_pattern, s_random_interleaver, ChainCode, CouplingConfig, InterleaverMode, Puncturers,
    PuncturingPattern, SplitMode,
};
use sctc::density::{rho1_for, DeConfig, EnsembleKind, RunLimits};
use sctc::sim::StopRule;
use sctc::transfer::TransferFunction;
use sctc::trellis::{GeneratorPair, Trellis};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub code: CodeSection,
    pub coupling: CouplingSection,
    pub de: DeSection,
    pub finite: FiniteSection,
    pub sim: SimSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodeSection {
    /// Component code, e.g. `1,5/7`.
    pub generators: String,
    pub ensemble: EnsembleKind,
    /// Target rate as `a/b` or a decimal; fixes the permeabilities.
    pub rate: Option<String>,
    pub rho1: Option<f64>,
    pub rho2: Option<f64>,
}

impl Default for CodeSection {
    fn default() -> Self {
        Self {
            generators: "1,5/7".into(),
            ensemble: EnsembleKind::Scc,
            rate: None,
            rho1: None,
            rho2: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingSection {
    pub length: usize,
    /// Coupling memories; empty means uncoupled.
    pub memory: Vec<usize>,
}

impl Default for CouplingSection {
    fn default() -> Self {
        Self {
            length: 100,
            memory: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeSection {
    pub bisect_tol: f64,
    pub exit_step: f64,
    pub rho_step: f64,
    pub max_iters: usize,
    /// Channel parameter for `de-trace`.
    pub epsilon: Option<f64>,
    /// Record every n-th iteration in `de-trace`.
    pub trace_every: usize,
}

impl Default for DeSection {
    fn default() -> Self {
        Self {
            bisect_tol: 1e-4,
            exit_step: 1e-3,
            rho_step: 1.0 / 48.0,
            max_iters: RunLimits::default().max_iters,
            epsilon: None,
            trace_every: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiniteSection {
    /// Information bits per position.
    pub k: usize,
    pub coupled: bool,
    /// Interleaver spread; defaults to `floor(sqrt(K))`.
    pub spread: Option<usize>,
    pub split: SplitMode,
    pub interleaver: String,
    pub code_seed: u64,
    pub order1: Vec<usize>,
    pub order2: Vec<usize>,
}

impl Default for FiniteSection {
    fn default() -> Self {
        Self {
            k: 1024,
            coupled: true,
            spread: None,
            split: SplitMode::EvenOdd,
            interleaver: "s-random".into(),
            code_seed: 1,
            order1: Vec::new(),
            order2: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub epsilons: Vec<f64>,
    pub seed: u64,
    pub min_errors: u64,
    pub max_trials: u64,
    pub batch: u64,
    /// Window size; 0 decodes the full chain.
    pub window: usize,
    pub max_iters: usize,
}

impl Default for SimSection {
    fn default() -> Self {
        let stop = StopRule::default();
        Self {
            epsilons: Vec::new(),
            seed: 1,
            min_errors: stop.min_errors,
            max_trials: stop.max_trials,
            batch: stop.batch,
            window: 0,
            max_iters: DecoderSchedule::full().max_iters,
        }
    }
}

/// Parses `1/2`, `0.5` or `1`.
pub fn parse_rate(s: &str) -> Result<f64> {
    let s = s.trim();
    let r = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a
                .trim()
                .parse()
                .with_context(|| format!("bad rate numerator in `{s}`"))?;
            let b: f64 = b
                .trim()
                .parse()
                .with_context(|| format!("bad rate denominator in `{s}`"))?;
            a / b
        }
        None => s.parse().with_context(|| format!("bad rate `{s}`"))?,
    };
    if !(r > 0.0 && r <= 1.0) || !r.is_finite() {
        bail!("rate {s} must lie in (0, 1]");
    }
    Ok(r)
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }

    /// `(rho1, rho2)` after applying the rate, if any.
    pub fn permeabilities(&self) -> Result<(f64, f64)> {
        let c = &self.code;
        let (rho1, rho2) = match &c.rate {
            None => (c.rho1.unwrap_or(1.0), c.rho2.unwrap_or(1.0)),
            Some(r) => {
                let rate = parse_rate(r)?;
                match c.ensemble {
                    EnsembleKind::Pcc => {
                        let rho2 = (1.0 / rate - 1.0) / 2.0;
                        if let Some(given) = c.rho2 {
                            if (given - rho2).abs() > 1e-9 {
                                bail!(
                                    "rho2 = {given} contradicts rate {r} for the parallel ensemble"
                                );
                            }
                        }
                        (c.rho1.unwrap_or(0.0), rho2)
                    }
                    EnsembleKind::Scc => {
                        let rho2 = c
                            .rho2
                            .unwrap_or_else(|| ((1.0 / rate - 1.0) / 2.0).min(1.0));
                        let rho1 = rho1_for(rate, rho2);
                        if let Some(given) = c.rho1 {
                            if (given - rho1).abs() > 1e-9 {
                                bail!("rho1 = {given} contradicts rate {r} with rho2 = {rho2}");
                            }
                        }
                        (rho1, rho2)
                    }
                }
            }
        };
        for (name, v) in [("rho1", rho1), ("rho2", rho2)] {
            if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                bail!("{name} = {v} is infeasible (must lie in [0, 1])");
            }
        }
        Ok((rho1.clamp(0.0, 1.0), rho2.clamp(0.0, 1.0)))
    }

    pub fn generators(&self) -> Result<GeneratorPair> {
        Ok(self.code.generators.parse()?)
    }

    pub fn transfer(&self) -> Result<Arc<TransferFunction>> {
        Ok(TransferFunction::shared(Trellis::new(self.generators()?)?))
    }

    /// Uncoupled DE template.
    pub fn de_template(&self, tf: Arc<TransferFunction>) -> Result<DeConfig> {
        let (rho1, rho2) = self.permeabilities()?;
        let mut cfg = DeConfig::uncoupled(self.code.ensemble, tf, rho1, rho2);
        cfg.limits.max_iters = self.de.max_iters;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn coupled_template(&self, base: &DeConfig, memory: usize) -> Result<DeConfig> {
        let cfg = DeConfig {
            coupled: true,
            length: self.coupling.length,
            memory,
            ..base.clone()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn puncturers(&self) -> Result<Puncturers> {
        let (rho1, rho2) = self.permeabilities()?;
        let pattern = |order: &[usize], rho: f64, name: &str| -> Result<PuncturingPattern> {
            if order.is_empty() {
                if rho == 0.0 {
                    return Ok(nested_pattern(&[1], 0.0)?);
                }
                if rho < 1.0 {
                    bail!("permeability {rho} needs a puncturing order `finite.{name}`");
                }
                return Ok(PuncturingPattern::all_ones(1));
            }
            Ok(nested_pattern(order, rho)?)
        };
        Ok(Puncturers {
            p0: PuncturingPattern::all_ones(1),
            p1: pattern(&self.finite.order1, rho1, "order1")?,
            p2: pattern(&self.finite.order2, rho2, "order2")?,
        })
    }

    pub fn spread(&self) -> usize {
        self.finite
            .spread
            .unwrap_or_else(|| (self.finite.k as f64).sqrt().floor() as usize)
    }

    pub fn code(&self) -> Result<ChainCode> {
        let f = &self.finite;
        let trellis = Arc::new(Trellis::new(self.generators()?)?);
        let punct = self.puncturers()?;
        if !f.coupled {
            let perm = s_random_interleaver(2 * f.k, self.spread(), f.code_seed)?;
            return Ok(ChainCode::block(trellis, &perm, punct)?);
        }
        let memory = match self.coupling.memory.as_slice() {
            [] => 1,
            [m] => *m,
            many => bail!("finite-length chains take one coupling memory, got {many:?}"),
        };
        let interleaver = match f.interleaver.as_str() {
            "s-random" => InterleaverMode::SRandom {
                spread: self.spread(),
            },
            "fully-random" => InterleaverMode::FullyRandom,
            other => bail!("unknown interleaver `{other}` (expected s-random or fully-random)"),
        };
        let cfg = CouplingConfig {
            k: f.k,
            length: self.coupling.length,
            memory,
            seed: f.code_seed,
            split: f.split,
            interleaver,
        };
        Ok(ChainCode::chain(trellis, &cfg, punct)?)
    }

    pub fn schedule(&self) -> Result<DecoderSchedule> {
        let mut s = match self.sim.window {
            0 => DecoderSchedule::full(),
            w if w < 2 => bail!("window size {w} must be at least m + 1 = 2"),
            w => DecoderSchedule::window(w),
        };
        s.max_iters = self.sim.max_iters;
        Ok(s)
    }

    pub fn stop_rule(&self) -> StopRule {
        StopRule {
            min_errors: self.sim.min_errors,
            max_trials: self.sim.max_trials,
            batch: self.sim.batch,
        }
    }
}
