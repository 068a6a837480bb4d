//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Numeric arguments select criteria:
//! `cargo test -p sctc-tests --test acceptance -- 5 6`.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use sctc::codec::{bcjr_erasure, decode_scc_block, observe, DecoderSchedule, ErasureMessage};
use sctc::construction::{
    s_random_interleaver, ChainCode, CouplingConfig, InterleaverMode, Puncturers, SplitMode,
};
use sctc::density::{bp_threshold, bp_threshold_in, map_threshold, DeConfig, EnsembleKind};
use sctc::gf2::{generator_rows, ml_erasure_decode};
use sctc::sim::{bec_transmit_with, ber_point, StopRule};
use sctc::transfer::{mc_extrinsic, TransferFunction};
use sctc::trellis::{GeneratorPair, Trellis};

const RATES: [&str; 6] = ["1/3", "1/2", "2/3", "3/4", "4/5", "9/10"];
const MEMORIES: [usize; 3] = [1, 3, 5];

const SCC_BP: [f64; 6] = [0.5405, 0.3594, 0.2038, 0.1337, 0.0942, 0.0269];
const PCC_BP: [f64; 6] = [0.6428, 0.4606, 0.2732, 0.1854, 0.1376, 0.0578];
const SCC_MAP: [f64; 6] = [0.6654, 0.4981, 0.3316, 0.2486, 0.1990, 0.0996];
const PCC_MAP: [f64; 6] = [0.6553, 0.4689, 0.2772, 0.1876, 0.1391, 0.0582];
const SCC_SC: [[f64; 3]; 6] = [
    [0.6437, 0.6650, 0.6654],
    [0.4708, 0.4975, 0.4981],
    [0.3303, 0.3305, 0.3315],
    [0.2155, 0.2471, 0.2486],
    [0.1644, 0.1968, 0.1989],
    [0.0624, 0.0930, 0.0988],
];
const SCC_GAP: [f64; 6] = [0.0012, 0.0019, 0.0018, 0.0014, 0.0011, 0.0012];
const PCC_GAP: [f64; 6] = [0.0113, 0.0311, 0.0561, 0.0624, 0.0609, 0.0418];

const BISECT_TOL: f64 = 1e-4;
const COUPLED_TOL: f64 = 5e-5;
const EXIT_STEP: f64 = 1e-3;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(failures: Vec<String>, summary: String) -> Self {
        if failures.is_empty() {
            Self {
                pass: true,
                detail: summary,
            }
        } else {
            Self {
                pass: false,
                detail: format!("{summary}; failed: {}", failures.join(", ")),
            }
        }
    }
}

fn rate_value(r: &str) -> f64 {
    let (n, d) = r.split_once('/').unwrap();
    n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap()
}

/// Inner permeability of the table rows: every parity bit of the outer code
/// is punctured and the rate is set by the inner parity alone.
fn rho2_for(rate: f64) -> f64 {
    (1.0 / rate - 1.0) / 2.0
}

fn tf_5_7() -> Arc<TransferFunction> {
    TransferFunction::shared(Trellis::new(GeneratorPair::rsc_5_7()).unwrap())
}

/// Density evolution results shared by criteria 1 to 4.
struct Thresholds {
    bp: HashMap<(EnsembleKind, usize), f64>,
    map: HashMap<(EnsembleKind, usize), f64>,
    coupled: HashMap<(EnsembleKind, usize, usize, usize), f64>,
}

impl Thresholds {
    fn compute(need_long: bool) -> Self {
        let tf = tf_5_7();
        let kinds = [EnsembleKind::Scc, EnsembleKind::Pcc];
        let uncoupled: Vec<_> = kinds
            .iter()
            .flat_map(|&k| (0..6).map(move |r| (k, r)))
            .collect();
        let maps: Vec<_> = uncoupled
            .par_iter()
            .map(|&(kind, r)| {
                let cfg =
                    DeConfig::uncoupled(kind, tf.clone(), 0.0, rho2_for(rate_value(RATES[r])));
                let map = map_threshold(&cfg, BISECT_TOL, EXIT_STEP).unwrap();
                ((kind, r), map)
            })
            .collect();
        let bp: HashMap<_, _> = maps.iter().map(|&(key, m)| (key, m.eps_bp)).collect();
        let map: HashMap<_, _> = maps.iter().map(|&(key, m)| (key, m.eps_map)).collect();

        let mut jobs = Vec::new();
        for &(kind, r) in &uncoupled {
            for m in MEMORIES {
                jobs.push((kind, r, m, 100));
                if need_long && kind == EnsembleKind::Scc {
                    jobs.push((kind, r, m, 200));
                }
            }
        }
        let coupled = jobs
            .par_iter()
            .map(|&(kind, r, m, length)| {
                let rate = rate_value(RATES[r]);
                let cfg = DeConfig::coupled(kind, tf.clone(), 0.0, rho2_for(rate), length, m);
                let lo = bp[&(kind, r)] - 2.0 * BISECT_TOL;
                let eps = bp_threshold_in(&cfg, lo, 1.0 - rate, COUPLED_TOL).unwrap();
                ((kind, r, m, length), eps)
            })
            .collect();
        Self { bp, map, coupled }
    }

    fn print(&self) {
        for kind in [EnsembleKind::Scc, EnsembleKind::Pcc] {
            for (r, rate) in RATES.iter().enumerate() {
                let sc: Vec<String> = MEMORIES
                    .iter()
                    .map(|&m| format!("m={m} {:.5}", self.sc(kind, r, m, 100)))
                    .collect();
                println!(
                    "  {kind} R={rate}: BP {:.5} MAP {:.5} coupled L=100 {}",
                    self.bp[&(kind, r)],
                    self.map[&(kind, r)],
                    sc.join(" ")
                );
            }
        }
    }

    fn sc(&self, kind: EnsembleKind, r: usize, m: usize, length: usize) -> f64 {
        self.coupled[&(kind, r, m, length)]
    }
}

fn criterion_1(th: &Thresholds) -> Outcome {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (kind, table) in [(EnsembleKind::Scc, SCC_BP), (EnsembleKind::Pcc, PCC_BP)] {
        for r in 0..6 {
            let got = th.bp[&(kind, r)];
            let dev = (got - table[r]).abs();
            worst = worst.max(dev);
            if dev > 0.001 {
                failures.push(format!(
                    "{kind} R={} got {got:.4} want {:.4}",
                    RATES[r], table[r]
                ));
            }
        }
    }
    Outcome::new(failures, format!("12 thresholds, max deviation {worst:.5}"))
}

fn criterion_2(th: &Thresholds) -> Outcome {
    let mut failures = Vec::new();
    let (mut worst, mut worst_shift): (f64, f64) = (0.0, 0.0);
    for r in 0..6 {
        for (i, m) in MEMORIES.into_iter().enumerate() {
            let got = th.sc(EnsembleKind::Scc, r, m, 100);
            let dev = (got - SCC_SC[r][i]).abs();
            worst = worst.max(dev);
            if dev > 0.002 {
                failures.push(format!(
                    "R={} m={m} got {got:.4} want {:.4}",
                    RATES[r], SCC_SC[r][i]
                ));
            }
            let shift = (th.sc(EnsembleKind::Scc, r, m, 200) - got).abs();
            worst_shift = worst_shift.max(shift);
            if shift >= 0.0005 {
                failures.push(format!(
                    "R={} m={m} moved {shift:.5} from L=100 to L=200",
                    RATES[r]
                ));
            }
        }
    }
    Outcome::new(
        failures,
        format!(
            "18 coupled thresholds, max deviation {worst:.5}, max L=200 shift {worst_shift:.5}"
        ),
    )
}

fn criterion_3(th: &Thresholds) -> Outcome {
    let mut failures = Vec::new();
    let (mut worst_map, mut worst_gap): (f64, f64) = (0.0, 0.0);
    for (kind, maps, gaps) in [
        (EnsembleKind::Scc, SCC_MAP, SCC_GAP),
        (EnsembleKind::Pcc, PCC_MAP, PCC_GAP),
    ] {
        for r in 0..6 {
            let got = th.map[&(kind, r)];
            let dev = (got - maps[r]).abs();
            worst_map = worst_map.max(dev);
            if dev > 0.002 {
                failures.push(format!(
                    "{kind} R={} MAP {got:.4} want {:.4}",
                    RATES[r], maps[r]
                ));
            }
            let gap = 1.0 - rate_value(RATES[r]) - th.sc(kind, r, 5, 100);
            let dev = (gap - gaps[r]).abs();
            worst_gap = worst_gap.max(dev);
            if dev > 0.002 {
                failures.push(format!(
                    "{kind} R={} gap {gap:.4} want {:.4}",
                    RATES[r], gaps[r]
                ));
            }
        }
    }
    Outcome::new(
        failures,
        format!("MAP max deviation {worst_map:.5}, Shannon gap max deviation {worst_gap:.5}"),
    )
}

fn criterion_4(th: &Thresholds) -> Outcome {
    let mut failures = Vec::new();
    for kind in [EnsembleKind::Scc, EnsembleKind::Pcc] {
        for (r, rate) in RATES.iter().enumerate() {
            let [e1, e3, e5] = MEMORIES.map(|m| th.sc(kind, r, m, 100));
            let map = th.map[&(kind, r)];
            if !(e1 <= e3 && e3 <= e5 && e5 <= map + 0.002 && e5 >= map - 0.002) {
                failures.push(format!(
                    "{kind} R={rate}: {e1:.4} {e3:.4} {e5:.4} vs MAP {map:.4}"
                ));
            }
        }
    }
    Outcome::new(failures, "12 rate/ensemble pairs".into())
}

fn criterion_5() -> Outcome {
    let grid = [0.1, 0.3, 0.5, 0.7, 0.9];
    let codes = [
        ("2-state 1/3", GeneratorPair::new(0o1, 0o3).unwrap()),
        ("4-state 5/7", GeneratorPair::rsc_5_7()),
    ];
    let mut points = Vec::new();
    for (ci, _) in codes.iter().enumerate() {
        for (i, &ps) in grid.iter().enumerate() {
            for (j, &pp) in grid.iter().enumerate() {
                points.push((ci, ps, pp, 1000 + (ci * 25 + i * 5 + j) as u64));
            }
        }
    }
    let tfs: Vec<_> = codes
        .iter()
        .map(|(_, g)| TransferFunction::new(Trellis::new(*g).unwrap()))
        .collect();
    let results: Vec<_> = points
        .par_iter()
        .map(|&(ci, ps, pp, seed)| {
            let exact = tfs[ci].evaluate(ps, pp).unwrap();
            let mc = mc_extrinsic(tfs[ci].trellis(), ps, pp, 1_000_000, seed).unwrap();
            (ci, ps, pp, exact, mc)
        })
        .collect();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (ci, ps, pp, exact, mc) in results {
        for (what, e, m, s) in [
            ("f_s", exact.sys, mc.sys, mc.sys_stderr),
            ("f_p", exact.par, mc.par, mc.par_stderr),
        ] {
            let z = if s > 0.0 {
                (e - m).abs() / s
            } else if e == m {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
            if z > 3.0 {
                failures.push(format!(
                    "{} {what}({ps}, {pp}): exact {e:.5} mc {m:.5} z={z:.2}",
                    codes[ci].0
                ));
            }
        }
    }
    Outcome::new(failures, format!("100 comparisons, max |z| {worst:.2}"))
}

/// Exhaustive check of the set-propagation BCJR on terminated blocks. The
/// reference uses linearity: given the observed positions, a bit is
/// undetermined iff some codeword is one there and zero on every other
/// observed position.
fn criterion_6() -> Outcome {
    let trellis = Trellis::new(GeneratorPair::rsc_5_7()).unwrap();
    let mut failures = Vec::new();
    let mut patterns = 0u64;
    for k in 1..=8usize {
        let words: Vec<u32> = (0..1u32 << k)
            .map(|m| {
                let u: Vec<u8> = (0..k).map(|i| (m >> i & 1) as u8).collect();
                pack(&trellis.encode(&u, true))
            })
            .collect();
        let steps = k + trellis.memory();
        let n = 2 * steps;
        // transmit a codeword with ones scattered over both rows
        let reference = words[(1usize << k) - 1 - (k > 1) as usize];
        let bit = |j: usize| (reference >> j & 1) as u8;
        let mismatched = (0..1u32 << n)
            .into_par_iter()
            .filter(|&observed| {
                let mut ambiguous = 0u32;
                for &c in &words {
                    let hit = c & observed;
                    if hit == 0 {
                        ambiguous |= c;
                    } else if hit & (hit - 1) == 0 {
                        ambiguous |= hit;
                    }
                }
                let msg = |j: usize| {
                    if observed >> j & 1 == 1 {
                        ErasureMessage::known(bit(j))
                    } else {
                        ErasureMessage::Erased
                    }
                };
                let expect = |j: usize| {
                    if ambiguous >> j & 1 == 1 {
                        ErasureMessage::Erased
                    } else {
                        ErasureMessage::known(bit(j))
                    }
                };
                let sys: Vec<_> = (0..steps).map(msg).collect();
                let par: Vec<_> = (steps..n).map(msg).collect();
                let ext = bcjr_erasure(&trellis, &sys, &par, true).unwrap();
                let want_sys: Vec<_> = (0..steps).map(expect).collect();
                let want_par: Vec<_> = (steps..n).map(expect).collect();
                ext.sys != want_sys || ext.par != want_par
            })
            .count();
        patterns += 1 << n;
        if mismatched > 0 {
            failures.push(format!("K={k}: {mismatched} patterns differ"));
        }
    }
    Outcome::new(failures, format!("{patterns} erasure patterns over K=1..8"))
}

/// Codeword as a bit mask: systematic row then parity row.
fn pack(e: &sctc::trellis::Encoded) -> u32 {
    e.systematic
        .iter()
        .chain(&e.parity)
        .enumerate()
        .fold(0, |acc, (j, &b)| acc | (b as u32) << j)
}

fn criterion_7() -> Outcome {
    let k = 64;
    let perm = s_random_interleaver(2 * k, 6, 11).unwrap();
    let code = ChainCode::block(
        Arc::new(Trellis::new(GeneratorPair::rsc_5_7()).unwrap()),
        &perm,
        Puncturers::none(),
    )
    .unwrap();
    let rows = generator_rows(&code).unwrap();
    let epsilons = [0.55, 0.6, 0.65, 0.7, 0.75];
    let trials = 1000u64;
    let mut failures = Vec::new();
    let (mut bp_known, mut ml_only) = (0usize, 0usize);
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(7000 + t);
        let u: Vec<u8> = (0..k).map(|_| rng.gen::<bool>() as u8).collect();
        let bits = code
            .encode(std::slice::from_ref(&u))
            .unwrap()
            .transmitted(&code);
        let rx = bec_transmit_with(&bits, epsilons[t as usize % epsilons.len()], &mut rng);
        let obs = observe(&code, &rx).unwrap();
        let bp = decode_scc_block(&code, &obs[0], &DecoderSchedule::full()).unwrap();
        let ml = ml_erasure_decode(&rows, k, &rx).unwrap();
        for i in 0..k {
            match (bp.info[i].bit(), ml[i].bit()) {
                (Some(b), Some(m)) if b == m && b == u[i] => bp_known += 1,
                (Some(_), _) => failures.push(format!("trial {t} bit {i}")),
                (None, Some(_)) => ml_only += 1,
                (None, None) => {}
            }
        }
    }
    failures.truncate(5);
    Outcome::new(
        failures,
        format!("{trials} trials, {bp_known} BP-resolved bits all ML-resolved, {ml_only} resolved by ML only"),
    )
}

fn criterion_8() -> Outcome {
    let trellis = Arc::new(Trellis::new(GeneratorPair::rsc_5_7()).unwrap());
    let tf = TransferFunction::shared((*trellis).clone());
    let eps_bp = bp_threshold(
        &DeConfig::uncoupled(EnsembleKind::Scc, tf.clone(), 1.0, 1.0),
        BISECT_TOL,
    )
    .unwrap();
    let sc_cfg = DeConfig::coupled(EnsembleKind::Scc, tf, 1.0, 1.0, 100, 1);
    let eps_sc = bp_threshold_in(&sc_cfg, eps_bp - 2.0 * BISECT_TOL, 0.75, BISECT_TOL).unwrap();

    let cfg = CouplingConfig {
        k: 256,
        length: 20,
        memory: 1,
        seed: 1,
        split: SplitMode::EvenOdd,
        interleaver: InterleaverMode::SRandom { spread: 12 },
    };
    let chain = ChainCode::chain(trellis.clone(), &cfg, Puncturers::none()).unwrap();
    let perm = s_random_interleaver(2 * 768, 20, 1).unwrap();
    let block = ChainCode::block(trellis, &perm, Puncturers::none()).unwrap();
    let stop = StopRule {
        min_errors: u64::MAX,
        max_trials: 400,
        batch: 50,
    };
    let seed = 7;
    let mut failures = Vec::new();
    let mut points = Vec::new();
    let mut eps = eps_bp - 0.02;
    while eps <= eps_sc - 0.02 + 1e-12 {
        let a = ber_point(&chain, &DecoderSchedule::full(), eps, &stop, seed).unwrap();
        let b = ber_point(&block, &DecoderSchedule::full(), eps, &stop, seed).unwrap();
        points.push(format!("{eps:.4}: {:.2e} vs {:.2e}", a.ber, b.ber));
        if a.ber >= b.ber {
            failures.push(format!(
                "eps={eps:.4} chain {:.3e} block {:.3e}",
                a.ber, b.ber
            ));
        }
        eps += 0.01;
    }
    let window = DecoderSchedule::window(3);
    assert_eq!(window.latency(&chain), 768);
    let w = ber_point(&chain, &window, eps_bp, &stop, seed).unwrap();
    let b = ber_point(&block, &DecoderSchedule::full(), eps_bp, &stop, seed).unwrap();
    if w.ber >= b.ber {
        failures.push(format!(
            "window at eps_BP {:.3e} block {:.3e}",
            w.ber, b.ber
        ));
    }
    Outcome::new(
        failures,
        format!(
            "eps_BP={eps_bp:.4}, eps_SC={eps_sc:.4}; chain vs block [{}]; W=3 {:.2e} vs block {:.2e}",
            points.join("; "),
            w.ber,
            b.ber
        ),
    )
}

fn criterion_9() -> Outcome {
    let order = [5, 2, 8, 1, 7, 3, 6, 4];
    let trellis = Arc::new(Trellis::new(GeneratorPair::rsc_5_7()).unwrap());
    let tail = 2 * trellis.memory();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut failures = Vec::new();
    let mut configs = Vec::new();
    let k = 128;
    for _ in 0..5 {
        let rho1 = rng.gen_range(0..=8) as f64 / 8.0;
        let rho2 = rng.gen_range(1..=8) as f64 / 8.0;
        let length = rng.gen_range(3..=60);
        let punct = Puncturers::from_orders(&order, rho1, &order, rho2).unwrap();
        let cfg = CouplingConfig {
            k,
            length,
            memory: 1,
            seed: rng.gen(),
            split: SplitMode::EvenOdd,
            interleaver: InterleaverMode::SRandom { spread: 8 },
        };
        let code = ChainCode::chain(trellis.clone(), &cfg, punct).unwrap();
        let cw = code.encode(&vec![vec![0; k]; length - 1]).unwrap();
        let tails = tail * (length - 1) + tail * length;
        let sent = cw.transmitted(&code).len() - tails;
        let rate = 1.0 / ((1.0 + rho1 + 2.0 * rho2) + 2.0 / (length as f64 - 1.0));
        let expected = code.info_bits() as f64 / rate;
        let dev = (sent as f64 - expected).abs();
        configs.push(format!("({rho1}, {rho2}, L={length}) off by {dev:.1}"));
        if dev > length as f64 {
            failures.push(format!(
                "rho1={rho1} rho2={rho2} L={length}: {sent} bits, expected {expected:.1}"
            ));
        }
    }
    let reference = CouplingConfig {
        k: 1024,
        length: 100,
        memory: 1,
        seed: 1,
        split: SplitMode::EvenOdd,
        interleaver: InterleaverMode::SRandom { spread: 22 },
    };
    let info = ChainCode::chain(trellis, &reference, Puncturers::none())
        .unwrap()
        .info_bits();
    if info != 101_376 {
        failures.push(format!("K_SC = {info}"));
    }
    Outcome::new(failures, format!("{}; K_SC = {info}", configs.join(", ")))
}

fn run_cli(bin: &Path, args: &[&str], out: &Path) {
    let status = Command::new(bin)
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "sctc {args:?}: {}",
        String::from_utf8_lossy(&status.stderr)
    );
}

fn criterion_10() -> Outcome {
    let Some(bin) = sctc_tests::sctc_binary() else {
        return Outcome::new(
            vec!["sctc binary not found next to the test executable".into()],
            "build it with `cargo build -p sctc-cli`".into(),
        );
    };
    let root = std::env::temp_dir().join(format!("sctc-acceptance-{}", std::process::id()));
    let runs: [(&str, &[&str], &str); 4] = [
        (
            "threshold",
            &["threshold", "--ensemble", "pcc", "--rate", "1/2"],
            "thresholds.csv",
        ),
        (
            "exit-curve",
            &["exit-curve", "--rate", "2/3", "--step", "0.01"],
            "exit_curve.csv",
        ),
        (
            "ber",
            &[
                "ber",
                "--K",
                "64",
                "--L",
                "6",
                "--m",
                "1",
                "--epsilons",
                "0.55,0.65",
                "--max-trials",
                "64",
                "--seed",
                "3",
            ],
            "ber.csv",
        ),
        (
            "de-trace",
            &[
                "de-trace",
                "--m",
                "1",
                "--L",
                "12",
                "--epsilon",
                "0.6",
                "--every",
                "5",
            ],
            "de_trace.csv",
        ),
    ];
    let mut failures = Vec::new();
    for (name, args, file) in runs {
        let first = root.join(name).join("first");
        let second = root.join(name).join("second");
        let third = root.join(name).join("third");
        run_cli(&bin, args, &first);
        let manifest = first.join("manifest.json");
        let command = args[0];
        run_cli(
            &bin,
            &[command, "--manifest", manifest.to_str().unwrap()],
            &second,
        );
        run_cli(
            &bin,
            &[command, "--manifest", manifest.to_str().unwrap()],
            &third,
        );
        let read = |dir: &Path| std::fs::read(dir.join(file)).unwrap();
        let (a, b, c) = (read(&first), read(&second), read(&third));
        if a != b || b != c {
            failures.push(format!("{command} output differs"));
        }
    }
    let _ = std::fs::remove_dir_all(&root);
    Outcome::new(
        failures,
        "threshold, exit-curve, ber, de-trace rerun from manifest".into(),
    )
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let wants = |n: usize| selected.is_empty() || selected.contains(&n);

    let mut results: Vec<(usize, &str, Outcome, f64)> = Vec::new();
    let mut record = |n: usize, name: &'static str, f: &dyn Fn() -> Outcome| {
        if wants(n) {
            let start = Instant::now();
            let outcome = f();
            let secs = start.elapsed().as_secs_f64();
            println!(
                "{} criterion {n}: {name}: {} [{secs:.1}s]",
                if outcome.pass { "PASS" } else { "FAIL" },
                outcome.detail
            );
            results.push((n, name, outcome, secs));
        }
    };

    if (1..=4).any(&wants) {
        let start = Instant::now();
        let th = Thresholds::compute(wants(2));
        println!(
            "density evolution thresholds computed in {:.1}s",
            start.elapsed().as_secs_f64()
        );
        th.print();
        record(1, "uncoupled BP thresholds", &|| criterion_1(&th));
        record(2, "coupled SCC thresholds", &|| criterion_2(&th));
        record(3, "MAP thresholds and Shannon gaps", &|| criterion_3(&th));
        record(4, "threshold saturation ordering", &|| criterion_4(&th));
    }
    record(5, "exact vs Monte Carlo transfer functions", &criterion_5);
    record(6, "BCJR vs exhaustive enumeration", &criterion_6);
    record(7, "BP within ML", &criterion_7);
    record(8, "finite-length ordering", &criterion_8);
    record(9, "rate accounting", &criterion_9);
    record(10, "CLI determinism", &criterion_10);

    let failed: Vec<_> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        results.len() - failed.len(),
        failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" ({failed:?})")
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
