//! Erasure channel and Monte Carlo BER estimation.
//!
//! Trial `i` of a sweep draws everything (information bits and channel) from a
//! generator seeded with `seed + i`, so results don't depend on how trials are
//! spread over threads. The channel compares one uniform draw per bit with
//! `epsilon`; with a common seed the erasure sets are nested in `epsilon`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{decode_chain, observe, DecoderSchedule, ErasureMessage};
use crate::construction::ChainCode;
use crate::Error;

/// Erases each bit independently with probability `epsilon`.
pub fn bec_transmit_with(bits: &[u8], epsilon: f64, rng: &mut impl Rng) -> Vec<ErasureMessage> {
    bits.iter()
        .map(|&b| {
            if rng.gen::<f64>() < epsilon {
                ErasureMessage::Erased
            } else {
                ErasureMessage::known(b)
            }
        })
        .collect()
}

pub fn bec_transmit(bits: &[u8], epsilon: f64, seed: u64) -> Result<Vec<ErasureMessage>, Error> {
    check_epsilon(epsilon)?;
    Ok(bec_transmit_with(
        bits,
        epsilon,
        &mut ChaCha8Rng::seed_from_u64(seed),
    ))
}

fn check_epsilon(epsilon: f64) -> Result<(), Error> {
    if (0.0..=1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "erasure probability {epsilon} outside [0, 1]"
        )))
    }
}

#[inline]
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    base.wrapping_add(trial)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialResult {
    pub seed: u64,
    /// Information bits left erased.
    pub bit_errors: usize,
    pub resolved: bool,
    pub iterations: usize,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Encode random information, send it over the channel, decode.
pub fn run_trial(
    code: &ChainCode,
    schedule: &DecoderSchedule,
    epsilon: f64,
    seed: u64,
) -> Result<TrialResult, Error> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let info: Vec<Vec<u8>> = (0..code.info_blocks())
        .map(|_| (0..code.k()).map(|_| rng.gen::<bool>() as u8).collect())
        .collect();
    let bits = code.encode(&info)?.transmitted(code);
    let rx = bec_transmit_with(&bits, epsilon, &mut rng);
    let decoded = decode_chain(code, &observe(code, &rx)?, schedule)?;
    let mut bit_errors = 0;
    for (est, truth) in decoded.info.iter().zip(&info) {
        for (m, &b) in est.iter().zip(truth) {
            match m.bit() {
                None => bit_errors += 1,
                Some(x) if x != b => return Err(Error::Inconsistent("decoder output a wrong bit")),
                Some(_) => {}
            }
        }
    }
    Ok(TrialResult {
        seed,
        bit_errors,
        resolved: bit_errors == 0,
        iterations: decoded.iterations,
        wall_time: start.elapsed(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_trials: u64,
    /// Trials run between checks of the rule.
    pub batch: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_errors: 100,
            max_trials: 10_000,
            batch: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub epsilon: f64,
    pub trials: u64,
    pub info_bits: u64,
    pub bit_errors: u64,
    pub block_errors: u64,
    pub ber: f64,
    /// 95% normal-approximation half-width.
    pub ci_half_width: f64,
    /// Upper confidence bound; `3 / info_bits` when no error was seen.
    pub ber_upper: f64,
}

impl BerPoint {
    pub fn from_counts(
        epsilon: f64,
        trials: u64,
        info_bits: u64,
        bit_errors: u64,
        block_errors: u64,
    ) -> Self {
        let n = info_bits.max(1) as f64;
        let ber = bit_errors as f64 / n;
        let ci_half_width = 1.96 * (ber * (1.0 - ber) / n).sqrt();
        let ber_upper = if bit_errors == 0 {
            (3.0 / n).min(1.0)
        } else {
            (ber + ci_half_width).min(1.0)
        };
        Self {
            epsilon,
            trials,
            info_bits,
            bit_errors,
            block_errors,
            ber,
            ci_half_width,
            ber_upper,
        }
    }
}

/// Runs trials in batches until the stop rule is met. Batches run in
/// parallel; the outcome is independent of the thread count.
pub fn ber_point(
    code: &ChainCode,
    schedule: &DecoderSchedule,
    epsilon: f64,
    stop: &StopRule,
    seed: u64,
) -> Result<BerPoint, Error> {
    check_epsilon(epsilon)?;
    if stop.batch == 0 || stop.max_trials == 0 {
        return Err(Error::InvalidParameter(
            "stop rule needs positive batch and trial cap".into(),
        ));
    }
    let (mut trials, mut bit_errors, mut block_errors) = (0u64, 0u64, 0u64);
    while trials < stop.max_trials && bit_errors < stop.min_errors {
        let end = (trials + stop.batch).min(stop.max_trials);
        let results: Vec<TrialResult> = (trials..end)
            .into_par_iter()
            .map(|i| run_trial(code, schedule, epsilon, trial_seed(seed, i)))
            .collect::<Result<_, _>>()?;
        for r in &results {
            bit_errors += r.bit_errors as u64;
            block_errors += (!r.resolved) as u64;
        }
        trials = end;
    }
    let info_bits = trials * code.info_bits() as u64;
    Ok(BerPoint::from_counts(
        epsilon,
        trials,
        info_bits,
        bit_errors,
        block_errors,
    ))
}

/// One BER point per channel parameter; every point reuses the same trial
/// seeds.
pub fn run_ber_sweep(
    code: &ChainCode,
    schedule: &DecoderSchedule,
    epsilons: &[f64],
    stop: &StopRule,
    seed: u64,
) -> Result<Vec<BerPoint>, Error> {
    epsilons
        .iter()
        .map(|&e| ber_point(code, schedule, e, stop, seed))
        .collect()
}
