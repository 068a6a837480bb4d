//! `sctc`: thresholds, EXIT curves, density-evolution traces and finite-length
//! simulation of spatially coupled turbo-like codes on the erasure channel.

mod config;
mod output;

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use sctc::codec::{decode_chain_traced, observe, ErasureMessage, TraceRow};
use sctc::construction::{read_codeword, write_codeword, ChainCode, CodewordHeader};
use sctc::density::{
    bp_exit, bp_threshold, bp_threshold_in, de_run_traced, map_threshold, optimize_rho2,
};
use sctc::sim::{bec_transmit, run_ber_sweep};

use config::{parse_rate, Config};
use output::Output;

#[derive(Parser, Debug)]
#[command(name = "sctc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// BP threshold of the uncoupled ensemble, or of the coupled one for each `--m`.
    Threshold(Common),
    /// BP and MAP thresholds of the uncoupled ensemble (area theorem).
    MapThreshold(Common),
    /// BP EXIT curve of the uncoupled ensemble on a grid over [0, 1].
    ExitCurve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Per-position erasure probabilities of a density evolution run.
    DeTrace {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        every: Option<usize>,
    },
    /// Inner parity permeability maximising the MAP threshold at a rate.
    OptimizeRho2 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rho_step: Option<f64>,
    },
    /// Monte Carlo BER sweep of a finite-length code.
    Ber {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        finite: FiniteArgs,
        /// Comma-separated erasure probabilities.
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
        #[arg(long)]
        max_trials: Option<u64>,
        #[arg(long)]
        min_errors: Option<u64>,
    },
    /// Encode random information into a packed codeword file.
    Encode {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        finite: FiniteArgs,
    },
    /// Pass a codeword file through the erasure channel and decode it.
    Decode {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        finite: FiniteArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Also write per-sweep residual erasures.
        #[arg(long)]
        trace: bool,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Reuse the configuration recorded in a previous run's manifest.
    #[arg(long, conflicts_with = "config")]
    manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "SCTC_OUT_DIR", default_value = "sctc-out")]
    out: PathBuf,
    #[arg(long)]
    generators: Option<String>,
    #[arg(long)]
    ensemble: Option<sctc::density::EnsembleKind>,
    #[arg(long)]
    rate: Option<String>,
    #[arg(long)]
    rho1: Option<f64>,
    #[arg(long)]
    rho2: Option<f64>,
    /// Coupling memories (comma-separated).
    #[arg(long = "m", value_delimiter = ',')]
    memory: Option<Vec<usize>>,
    /// Coupling length.
    #[arg(long = "L")]
    length: Option<usize>,
    #[arg(long)]
    bisect_tol: Option<f64>,
    #[arg(long)]
    exit_step: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Default)]
struct FiniteArgs {
    /// Information bits per position.
    #[arg(long = "K")]
    k: Option<usize>,
    /// Uncoupled block instead of a chain.
    #[arg(long)]
    uncoupled: bool,
    #[arg(long)]
    spread: Option<usize>,
    #[arg(long)]
    code_seed: Option<u64>,
    /// Sliding window size (0 = full chain).
    #[arg(long)]
    window: Option<usize>,
}

impl Common {
    fn resolve(&self, command: &str) -> Result<Config> {
        let mut cfg = if let Some(path) = &self.config {
            Config::load(path)?
        } else if let Some(path) = &self.manifest {
            output::config_from_manifest(path, command)?
        } else {
            Config::default()
        };
        let c = &mut cfg.code;
        if let Some(g) = &self.generators {
            c.generators = g.clone();
        }
        if let Some(e) = self.ensemble {
            c.ensemble = e;
        }
        if let Some(r) = &self.rate {
            parse_rate(r)?;
            c.rate = Some(r.clone());
        }
        c.rho1 = self.rho1.or(c.rho1);
        c.rho2 = self.rho2.or(c.rho2);
        if let Some(m) = &self.memory {
            cfg.coupling.memory = m.clone();
        }
        if let Some(l) = self.length {
            cfg.coupling.length = l;
        }
        if let Some(t) = self.bisect_tol {
            cfg.de.bisect_tol = t;
        }
        if let Some(s) = self.exit_step {
            cfg.de.exit_step = s;
        }
        if let Some(s) = self.seed {
            cfg.sim.seed = s;
        }
        Ok(cfg)
    }
}

impl FiniteArgs {
    fn apply(&self, cfg: &mut Config) {
        let f = &mut cfg.finite;
        if let Some(k) = self.k {
            f.k = k;
        }
        if self.uncoupled {
            f.coupled = false;
        }
        f.spread = self.spread.or(f.spread);
        if let Some(s) = self.code_seed {
            f.code_seed = s;
        }
        if let Some(w) = self.window {
            cfg.sim.window = w;
        }
    }
}

#[derive(Serialize)]
struct ThresholdRow {
    ensemble: String,
    rate: f64,
    rho1: f64,
    rho2: f64,
    coupled: bool,
    memory: usize,
    length: usize,
    threshold: f64,
    delta_sh: f64,
}

#[derive(Serialize)]
struct MapRow {
    ensemble: String,
    rate: f64,
    rho1: f64,
    rho2: f64,
    eps_bp: f64,
    eps_map: f64,
    gap_map: f64,
}

#[derive(Serialize)]
struct ExitRow {
    epsilon: f64,
    h: f64,
}

#[derive(Serialize)]
struct DeTraceRow {
    iteration: usize,
    position: isize,
    outer_sys: f64,
    outer_par: f64,
    inner_sys: f64,
    inner_par: f64,
    p_app: f64,
}

#[derive(Serialize)]
struct Rho2Row {
    rate: f64,
    rho2: f64,
    rho1: f64,
    eps_map: f64,
}

#[derive(Serialize)]
struct DecodedRow {
    position: usize,
    resolved: bool,
    erased: usize,
    wrong: usize,
    bits: String,
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Threshold(common) => threshold(&common),
        Command::MapThreshold(common) => map(&common),
        Command::ExitCurve { common, step } => exit_curve(&common, step),
        Command::DeTrace {
            common,
            epsilon,
            every,
        } => de_trace(&common, epsilon, every),
        Command::OptimizeRho2 { common, rho_step } => rho2(&common, rho_step),
        Command::Ber {
            common,
            finite,
            epsilons,
            max_trials,
            min_errors,
        } => {
            let mut cfg = common.resolve("ber")?;
            finite.apply(&mut cfg);
            if let Some(e) = epsilons {
                cfg.sim.epsilons = e;
            }
            if let Some(t) = max_trials {
                cfg.sim.max_trials = t;
            }
            if let Some(e) = min_errors {
                cfg.sim.min_errors = e;
            }
            ber(&common, cfg)
        }
        Command::Encode { common, finite } => {
            let mut cfg = common.resolve("encode")?;
            finite.apply(&mut cfg);
            encode(&common, cfg)
        }
        Command::Decode {
            common,
            finite,
            input,
            epsilon,
            trace,
        } => {
            let mut cfg = common.resolve("decode")?;
            finite.apply(&mut cfg);
            cfg.de.epsilon = epsilon.or(cfg.de.epsilon);
            decode(&common, cfg, &input, trace)
        }
    }
}

fn threshold(common: &Common) -> Result<()> {
    let cfg = common.resolve("threshold")?;
    let out = Output::create(&common.out, "threshold", &cfg)?;
    let base = cfg.de_template(cfg.transfer()?)?;
    let rate = base.rate();
    let tol = cfg.de.bisect_tol;
    let eps_bp = bp_threshold(&base, tol)?;
    let row = |coupled, memory, length, threshold| ThresholdRow {
        ensemble: cfg.code.ensemble.to_string(),
        rate,
        rho1: base.rho1,
        rho2: base.rho2,
        coupled,
        memory,
        length,
        threshold,
        delta_sh: 1.0 - rate - threshold,
    };
    let mut rows = Vec::new();
    if cfg.coupling.memory.is_empty() {
        rows.push(row(false, 0, 1, eps_bp));
    }
    for &m in &cfg.coupling.memory {
        let coupled = cfg.coupled_template(&base, m)?;
        let t = bp_threshold_in(&coupled, (eps_bp - 2.0 * tol).max(0.0), 1.0 - rate, tol)?;
        rows.push(row(true, m, cfg.coupling.length, t));
    }
    out.csv("thresholds.csv", &rows)?;
    out.finish()
}

fn map(common: &Common) -> Result<()> {
    let cfg = common.resolve("map-threshold")?;
    let out = Output::create(&common.out, "map-threshold", &cfg)?;
    let base = cfg.de_template(cfg.transfer()?)?;
    let m = map_threshold(&base, cfg.de.bisect_tol, cfg.de.exit_step)?;
    let rate = base.rate();
    out.csv(
        "map_threshold.csv",
        &[MapRow {
            ensemble: cfg.code.ensemble.to_string(),
            rate,
            rho1: base.rho1,
            rho2: base.rho2,
            eps_bp: m.eps_bp,
            eps_map: m.eps_map,
            gap_map: 1.0 - rate - m.eps_map,
        }],
    )?;
    out.finish()
}

fn exit_curve(common: &Common, step: Option<f64>) -> Result<()> {
    let mut cfg = common.resolve("exit-curve")?;
    if let Some(s) = step {
        cfg.de.exit_step = s;
    }
    let out = Output::create(&common.out, "exit-curve", &cfg)?;
    let step = cfg.de.exit_step;
    ensure!(
        step > 0.0 && step <= 1.0,
        "grid step {step} must lie in (0, 1]"
    );
    let base = cfg.de_template(cfg.transfer()?)?;
    let n = (1.0 / step).round() as usize;
    let rows = (0..=n)
        .map(|i| {
            let epsilon = (i as f64 * step).min(1.0);
            Ok(ExitRow {
                epsilon,
                h: bp_exit(&base, epsilon)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.csv("exit_curve.csv", &rows)?;
    out.finish()
}

fn de_trace(common: &Common, epsilon: Option<f64>, every: Option<usize>) -> Result<()> {
    let mut cfg = common.resolve("de-trace")?;
    cfg.de.epsilon = epsilon.or(cfg.de.epsilon);
    if let Some(e) = every {
        cfg.de.trace_every = e;
    }
    let out = Output::create(&common.out, "de-trace", &cfg)?;
    let Some(eps) = cfg.de.epsilon else {
        bail!("de-trace needs --epsilon");
    };
    let every = cfg.de.trace_every.max(1);
    let base = cfg.de_template(cfg.transfer()?)?;
    let de = match cfg.coupling.memory.as_slice() {
        [] => base,
        [m] => cfg.coupled_template(&base, *m)?,
        many => bail!("de-trace takes one coupling memory, got {many:?}"),
    }
    .with_epsilon(eps);
    let mut rows = Vec::new();
    let push = |rows: &mut Vec<DeTraceRow>, s: &sctc::density::DeState| {
        for (i, &p) in s.p_app.iter().enumerate() {
            rows.push(DeTraceRow {
                iteration: s.iteration,
                position: s.first_position + i as isize,
                outer_sys: s.outer_sys[i],
                outer_par: s.outer_par[i],
                inner_sys: s.inner_sys[i],
                inner_par: s.inner_par[i],
                p_app: p,
            });
        }
    };
    let outcome = de_run_traced(&de, |s| {
        if s.iteration % every == 0 {
            push(&mut rows, s);
        }
    })?;
    if outcome.state.iteration % every != 0 {
        push(&mut rows, &outcome.state);
    }
    out.csv("de_trace.csv", &rows)?;
    out.finish()
}

fn rho2(common: &Common, rho_step: Option<f64>) -> Result<()> {
    let mut cfg = common.resolve("optimize-rho2")?;
    if let Some(s) = rho_step {
        cfg.de.rho_step = s;
    }
    let out = Output::create(&common.out, "optimize-rho2", &cfg)?;
    let Some(rate) = &cfg.code.rate else {
        bail!("optimize-rho2 needs --rate");
    };
    let rate = parse_rate(rate)?;
    let best = optimize_rho2(
        cfg.transfer()?,
        rate,
        cfg.de.rho_step,
        cfg.de.bisect_tol,
        cfg.de.exit_step,
    )?;
    out.csv(
        "rho2.csv",
        &[Rho2Row {
            rate,
            rho2: best.rho2,
            rho1: best.rho1,
            eps_map: best.eps_map,
        }],
    )?;
    out.finish()
}

fn ber(common: &Common, cfg: Config) -> Result<()> {
    let out = Output::create(&common.out, "ber", &cfg)?;
    ensure!(!cfg.sim.epsilons.is_empty(), "ber needs --epsilons");
    let code = cfg.code()?;
    let points = run_ber_sweep(
        &code,
        &cfg.schedule()?,
        &cfg.sim.epsilons,
        &cfg.stop_rule(),
        cfg.sim.seed,
    )?;
    out.csv("ber.csv", &points)?;
    out.finish()
}

fn random_info(code: &ChainCode, seed: u64) -> Vec<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..code.info_blocks())
        .map(|_| (0..code.k()).map(|_| rng.gen::<bool>() as u8).collect())
        .collect()
}

fn encode(common: &Common, cfg: Config) -> Result<()> {
    let out = Output::create(&common.out, "encode", &cfg)?;
    let code = cfg.code()?;
    let info = random_info(&code, cfg.sim.seed);
    let bits = code.encode(&info)?.transmitted(&code);
    let header = CodewordHeader::new(&code, cfg.finite.code_seed, cfg.sim.seed);
    let mut buf = Vec::new();
    write_codeword(&mut buf, &header, &bits)?;
    out.bytes("codeword.bin", &buf)?;
    out.finish()
}

fn decode(common: &Common, cfg: Config, input: &Path, trace: bool) -> Result<()> {
    let out = Output::create(&common.out, "decode", &cfg)?;
    let file =
        std::fs::File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let (header, bits) =
        read_codeword(file).with_context(|| format!("reading {}", input.display()))?;
    let code = cfg.code()?;
    let expected = CodewordHeader::new(&code, header.code_seed, header.info_seed);
    ensure!(
        header == expected,
        "codeword file does not match the configured code (K, L, puncturing or code seed differ)"
    );
    ensure!(
        header.code_seed == cfg.finite.code_seed,
        "codeword was built with code seed {}, configuration has {}",
        header.code_seed,
        cfg.finite.code_seed
    );
    let eps = cfg.de.epsilon.unwrap_or(0.0);
    let rx = bec_transmit(&bits, eps, cfg.sim.seed)?;
    let obs = observe(&code, &rx)?;
    let mut rows: Vec<TraceRow> = Vec::new();
    let mut sink = |r: TraceRow| rows.push(r);
    let decoded = decode_chain_traced(
        &code,
        &obs,
        &cfg.schedule()?,
        if trace { Some(&mut sink) } else { None },
    )?;
    let truth = random_info(&code, header.info_seed);
    let table: Vec<DecodedRow> = decoded
        .info
        .iter()
        .zip(&truth)
        .enumerate()
        .map(|(t, (est, u))| DecodedRow {
            position: t + 1,
            resolved: decoded.resolved[t],
            erased: est.iter().filter(|m| m.is_erased()).count(),
            wrong: est
                .iter()
                .zip(u)
                .filter(|(m, &b)| m.bit().is_some_and(|x| x != b))
                .count(),
            bits: est
                .iter()
                .map(|m| match m {
                    ErasureMessage::Zero => '0',
                    ErasureMessage::One => '1',
                    ErasureMessage::Erased => '?',
                })
                .collect(),
        })
        .collect();
    out.csv("decoded.csv", &table)?;
    if trace {
        out.csv("trace.csv", &rows)?;
    }
    out.finish()
}
