//! Exact extrinsic erasure probabilities of a BCJR component decoder.
//!
//! On the erasure channel the forward (and backward) BCJR metric is the
//! indicator of a set of feasible states. Because the code is linear and the
//! erasure pattern is independent of the codeword, the all-zero codeword can be
//! assumed, and the feasible set evolves as a Markov chain over the reachable
//! subsets of states. Each step observes the systematic bit with probability
//! `1 - p_sys` and the parity bit with probability `1 - p_par`, independently.
//!
//! The stationary laws of the forward and backward chains describe the steady
//! state in the middle of an infinitely long trellis. The extrinsic output of a
//! step is erased iff a surviving branch carries the opposite bit value, which
//! only depends on the forward set before the step, the backward set after it,
//! and the companion observation of the step. Averaging over the two
//! independent stationary laws gives the transfer functions.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use parking_lot::RwLock;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{Bcjr, ErasureMessage, Extrinsic};
use crate::trellis::Trellis;
use crate::Error;

/// Residual (L1) accepted for a stationary distribution.
pub const STATIONARY_RESIDUAL: f64 = 1e-10;
const DOUBLING_CAP: usize = 64;
/// Memo keys are rounded to this resolution.
const MEMO_RESOLUTION: f64 = 1e-12;
/// The memo is cleared when it grows past this many entries.
const MEMO_CAPACITY: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

/// Observation pattern of one trellis step: bit 0 set if the systematic bit is
/// observed, bit 1 set if the parity bit is observed.
fn pattern_probability(pattern: usize, p_sys: f64, p_par: f64) -> f64 {
    let s = if pattern & 1 != 0 { 1.0 - p_sys } else { p_sys };
    let p = if pattern & 2 != 0 { 1.0 - p_par } else { p_par };
    s * p
}

/// Structure of the set-valued chain that does not depend on the erasure
/// probabilities: the reachable subsets and where each observation pattern
/// sends them.
#[derive(Clone, Debug)]
struct ChainGraph {
    nodes: Vec<u64>,
    /// `successor[node][pattern]`
    successor: Vec<[usize; 4]>,
}

impl ChainGraph {
    fn build(trellis: &Trellis, direction: Direction) -> Self {
        let all = trellis.all_states();
        let mut index: HashMap<u64, usize> = HashMap::new();
        let mut nodes = vec![all];
        index.insert(all, 0);
        let mut successor: Vec<[usize; 4]> = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let set = nodes[i];
            let mut row = [0usize; 4];
            for (pattern, slot) in row.iter_mut().enumerate() {
                let next = match direction {
                    Direction::Forward => forward_step(trellis, set, pattern),
                    Direction::Backward => backward_step(trellis, set, pattern),
                };
                *slot = *index.entry(next).or_insert_with(|| {
                    nodes.push(next);
                    queue.push_back(nodes.len() - 1);
                    nodes.len() - 1
                });
            }
            if successor.len() <= i {
                successor.resize(i + 1, [0; 4]);
            }
            successor[i] = row;
        }
        Self { nodes, successor }
    }

    fn transition_matrix(&self, p_sys: f64, p_par: f64) -> Vec<f64> {
        let n = self.nodes.len();
        let probs: [f64; 4] = std::array::from_fn(|pat| pattern_probability(pat, p_sys, p_par));
        let mut m = vec![0.0; n * n];
        for (i, row) in self.successor.iter().enumerate() {
            for (pat, &j) in row.iter().enumerate() {
                m[i * n + j] += probs[pat];
            }
        }
        m
    }
}

/// Under the all-zero codeword an observed bit must be 0.
fn forward_step(trellis: &Trellis, set: u64, pattern: usize) -> u64 {
    let mut next = 0u64;
    for s in (0..trellis.num_states()).filter(|s| set >> s & 1 == 1) {
        for u in 0..2u8 {
            if pattern & 1 != 0 && u != 0 {
                continue;
            }
            let b = trellis.branch(s, u);
            if pattern & 2 != 0 && b.parity != 0 {
                continue;
            }
            next |= 1 << b.next;
        }
    }
    next
}

fn backward_step(trellis: &Trellis, set: u64, pattern: usize) -> u64 {
    let mut prev = 0u64;
    for s in 0..trellis.num_states() {
        for u in 0..2u8 {
            if pattern & 1 != 0 && u != 0 {
                continue;
            }
            let b = trellis.branch(s, u);
            if pattern & 2 != 0 && b.parity != 0 {
                continue;
            }
            if set >> b.next & 1 == 1 {
                prev |= 1 << s;
            }
        }
    }
    prev
}

/// Set-valued forward or backward metric chain at fixed erasure probabilities.
#[derive(Clone, Debug)]
pub struct MetricChain {
    pub direction: Direction,
    /// Reachable state subsets as bitmasks; index 0 is the all-states subset.
    pub nodes: Vec<u64>,
    /// Row-stochastic, row-major `nodes.len()^2` matrix.
    pub transition: Vec<f64>,
    pub stationary: Vec<f64>,
}

impl MetricChain {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// L1 norm of `stationary * P - stationary`.
    pub fn residual(&self) -> f64 {
        residual(&self.transition, &self.stationary)
    }

    /// Stationary mass grouped by subset size (index = number of states).
    pub fn size_distribution(&self, num_states: usize) -> Vec<f64> {
        let mut out = vec![0.0; num_states + 1];
        for (node, &mass) in self.nodes.iter().zip(&self.stationary) {
            out[node.count_ones() as usize] += mass;
        }
        out
    }
}

fn check_probability(name: &str, p: f64) -> Result<(), Error> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} = {p} is not a probability"
        )))
    }
}

fn residual(m: &[f64], pi: &[f64]) -> f64 {
    let n = pi.len();
    (0..n)
        .map(|j| {
            let v: f64 = (0..n).map(|i| pi[i] * m[i * n + j]).sum();
            (v - pi[j]).abs()
        })
        .sum()
}

fn mat_mul(a: &[f64], b: &[f64], n: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
}

/// Long-run law of the chain started in the all-states subset (node 0).
///
/// When every observation pattern has positive probability the chain is
/// irreducible and the law is computed by Grassmann-Taksar-Heyman state
/// reduction, which needs no subtractions and stays accurate for nearly
/// decomposable chains. On the boundary of the probability square the chain
/// may be reducible, and the law is obtained by power iteration from node 0
/// using repeated squaring.
fn stationary_law(m: &[f64], n: usize, interior: bool) -> Result<Vec<f64>, Error> {
    let pi = if interior {
        gth(m, n).map_or_else(|| doubling_from_all_states(m, n), Ok)?
    } else {
        doubling_from_all_states(m, n)?
    };
    let r = residual(m, &pi);
    if r <= STATIONARY_RESIDUAL {
        Ok(pi)
    } else {
        Err(Error::StationaryNotConverged { residual: r })
    }
}

fn gth(m: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut a = m.to_vec();
    for k in (1..n).rev() {
        let s: f64 = a[k * n..k * n + k].iter().sum();
        if s <= 0.0 {
            return None;
        }
        for i in 0..k {
            a[i * n + k] /= s;
        }
        for i in 0..k {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..k {
                a[i * n + j] += aik * a[k * n + j];
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for j in 1..n {
        pi[j] = (0..j).map(|i| pi[i] * a[i * n + j]).sum();
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= total);
    Some(pi)
}

/// After `k` squarings the first row of the power holds the law after `2^k`
/// steps. Stops once consecutive laws agree to 1e-13.
fn doubling_from_all_states(m: &[f64], n: usize) -> Result<Vec<f64>, Error> {
    let mut power = m.to_vec();
    let mut scratch = vec![0.0; n * n];
    let mut prev: Vec<f64> = power[..n].to_vec();
    for _ in 0..DOUBLING_CAP {
        mat_mul(&power, &power, n, &mut scratch);
        std::mem::swap(&mut power, &mut scratch);
        let row = &power[..n];
        let delta: f64 = row.iter().zip(&prev).map(|(a, b)| (a - b).abs()).sum();
        prev.copy_from_slice(row);
        if delta <= 1e-13 {
            let total: f64 = prev.iter().sum();
            prev.iter_mut().for_each(|v| *v /= total);
            return Ok(prev);
        }
    }
    Err(Error::StationaryNotConverged {
        residual: residual(m, &prev),
    })
}

fn is_interior(p_sys: f64, p_par: f64) -> bool {
    p_sys > 0.0 && p_sys < 1.0 && p_par > 0.0 && p_par < 1.0
}

/// Builds the forward or backward set chain and its stationary law.
pub fn build_metric_chain(
    trellis: &Trellis,
    p_sys: f64,
    p_par: f64,
    direction: Direction,
) -> Result<MetricChain, Error> {
    check_probability("p_sys", p_sys)?;
    check_probability("p_par", p_par)?;
    let graph = ChainGraph::build(trellis, direction);
    let transition = graph.transition_matrix(p_sys, p_par);
    let stationary = stationary_law(&transition, graph.nodes.len(), is_interior(p_sys, p_par))?;
    Ok(MetricChain {
        direction,
        nodes: graph.nodes,
        transition,
        stationary,
    })
}

/// Extrinsic erasure probabilities `(systematic, parity)`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ExtrinsicPair {
    pub sys: f64,
    pub par: f64,
}

/// Exact transfer function of a component decoder with memoised evaluation.
#[derive(Debug)]
pub struct TransferFunction {
    trellis: Trellis,
    forward: ChainGraph,
    backward: ChainGraph,
    /// `sys_erased[f][b]`: bit 0 set if the systematic extrinsic is erased when
    /// the parity of the step is not observed, bit 1 when it is observed.
    sys_erased: Vec<Vec<u8>>,
    /// Same for the parity extrinsic, keyed by whether the systematic bit is
    /// observed.
    par_erased: Vec<Vec<u8>>,
    memo: RwLock<HashMap<(i64, i64), ExtrinsicPair>>,
}

impl TransferFunction {
    pub fn new(trellis: Trellis) -> Self {
        let forward = ChainGraph::build(&trellis, Direction::Forward);
        let backward = ChainGraph::build(&trellis, Direction::Backward);
        let mut sys_erased = vec![vec![0u8; backward.nodes.len()]; forward.nodes.len()];
        let mut par_erased = sys_erased.clone();
        for (fi, &f) in forward.nodes.iter().enumerate() {
            for (bi, &b) in backward.nodes.iter().enumerate() {
                for observed in 0..2u8 {
                    let mut sys_one = false;
                    let mut par_one = false;
                    for s in (0..trellis.num_states()).filter(|s| f >> s & 1 == 1) {
                        for u in 0..2u8 {
                            let br = trellis.branch(s, u);
                            if b >> br.next & 1 == 0 {
                                continue;
                            }
                            if u == 1 && (observed == 0 || br.parity == 0) {
                                sys_one = true;
                            }
                            if br.parity == 1 && (observed == 0 || u == 0) {
                                par_one = true;
                            }
                        }
                    }
                    sys_erased[fi][bi] |= (sys_one as u8) << observed;
                    par_erased[fi][bi] |= (par_one as u8) << observed;
                }
            }
        }
        Self {
            trellis,
            forward,
            backward,
            sys_erased,
            par_erased,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn shared(trellis: Trellis) -> Arc<Self> {
        Arc::new(Self::new(trellis))
    }

    pub fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    /// Number of reachable forward and backward subsets.
    pub fn chain_sizes(&self) -> (usize, usize) {
        (self.forward.nodes.len(), self.backward.nodes.len())
    }

    /// Memoised [`TransferFunction::compute`].
    pub fn evaluate(&self, p_sys: f64, p_par: f64) -> Result<ExtrinsicPair, Error> {
        let key = (
            (p_sys / MEMO_RESOLUTION).round() as i64,
            (p_par / MEMO_RESOLUTION).round() as i64,
        );
        if let Some(v) = self.memo.read().get(&key) {
            return Ok(*v);
        }
        let v = self.compute(p_sys, p_par)?;
        let mut memo = self.memo.write();
        if memo.len() >= MEMO_CAPACITY {
            memo.clear();
        }
        Ok(*memo.entry(key).or_insert(v))
    }

    /// Exact steady-state extrinsic erasure probabilities.
    pub fn compute(&self, p_sys: f64, p_par: f64) -> Result<ExtrinsicPair, Error> {
        check_probability("p_sys", p_sys)?;
        check_probability("p_par", p_par)?;
        let nf = self.forward.nodes.len();
        let nb = self.backward.nodes.len();
        let interior = is_interior(p_sys, p_par);
        let pi_f = stationary_law(&self.forward.transition_matrix(p_sys, p_par), nf, interior)?;
        let pi_b = stationary_law(&self.backward.transition_matrix(p_sys, p_par), nb, interior)?;
        let mut sys = 0.0;
        let mut par = 0.0;
        for (fi, &wf) in pi_f.iter().enumerate() {
            if wf == 0.0 {
                continue;
            }
            for (bi, &wb) in pi_b.iter().enumerate() {
                let w = wf * wb;
                if w == 0.0 {
                    continue;
                }
                let se = self.sys_erased[fi][bi];
                let pe = self.par_erased[fi][bi];
                sys += w * (p_par * f64::from(se & 1) + (1.0 - p_par) * f64::from(se >> 1));
                par += w * (p_sys * f64::from(pe & 1) + (1.0 - p_sys) * f64::from(pe >> 1));
            }
        }
        Ok(ExtrinsicPair {
            sys: sys.clamp(0.0, 1.0),
            par: par.clamp(0.0, 1.0),
        })
    }

    pub fn memo_len(&self) -> usize {
        self.memo.read().len()
    }
}

/// Monte Carlo estimate of the extrinsic erasure rates with standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub sys: f64,
    pub par: f64,
    pub sys_stderr: f64,
    pub par_stderr: f64,
    pub samples: usize,
}

/// Runs actual BCJR set propagation over a random codeword of `n_steps`
/// steps with i.i.d. erasures and counts erased extrinsic outputs. Both trellis
/// ends are unconstrained and `10 * memory` steps are discarded at each end.
///
/// Standard errors use batch means over 100 contiguous batches, since
/// neighbouring extrinsic outputs are correlated.
pub fn mc_extrinsic(
    trellis: &Trellis,
    p_sys: f64,
    p_par: f64,
    n_steps: usize,
    seed: u64,
) -> Result<McEstimate, Error> {
    check_probability("p_sys", p_sys)?;
    check_probability("p_par", p_par)?;
    if n_steps < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "mc_extrinsic needs at least 10^4 steps, got {n_steps}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input: Vec<u8> = (0..n_steps).map(|_| rng.gen_range(0..2u8)).collect();
    let start = rng.gen_range(0..trellis.num_states());
    let enc = trellis.encode_from(start, &input, false);
    let erase = |bits: &[u8], p: f64, rng: &mut ChaCha8Rng| -> Vec<ErasureMessage> {
        bits.iter()
            .map(|&b| {
                if rng.gen::<f64>() < p {
                    ErasureMessage::Erased
                } else {
                    ErasureMessage::known(b)
                }
            })
            .collect()
    };
    let sys_obs = erase(&enc.systematic, p_sys, &mut rng);
    let par_obs = erase(&enc.parity, p_par, &mut rng);
    let mut out = Extrinsic::default();
    let all = trellis.all_states();
    Bcjr::new().run(trellis, &sys_obs, &par_obs, all, all, &mut out)?;

    let burn = 10 * trellis.memory();
    let kept = &(burn..n_steps - burn);
    let samples = kept.len();
    let batches = 100;
    let per_batch = samples / batches;
    let mut sys_batches = Vec::with_capacity(batches);
    let mut par_batches = Vec::with_capacity(batches);
    let (mut sys_total, mut par_total) = (0usize, 0usize);
    for (i, k) in kept.clone().enumerate() {
        let s = out.sys[k].is_erased() as usize;
        let p = out.par[k].is_erased() as usize;
        sys_total += s;
        par_total += p;
        if i % per_batch == 0 && i / per_batch < batches {
            sys_batches.push(0usize);
            par_batches.push(0usize);
        }
        if i / per_batch < batches {
            *sys_batches.last_mut().unwrap() += s;
            *par_batches.last_mut().unwrap() += p;
        }
    }
    let sys = sys_total as f64 / samples as f64;
    let par = par_total as f64 / samples as f64;
    let batch_stderr = |counts: &[usize], mean: f64| {
        let b = counts.len() as f64;
        let var = counts
            .iter()
            .map(|&c| (c as f64 / per_batch as f64 - mean).powi(2))
            .sum::<f64>()
            / (b - 1.0);
        (var / b).sqrt()
    };
    Ok(McEstimate {
        sys,
        par,
        sys_stderr: batch_stderr(&sys_batches, sys),
        par_stderr: batch_stderr(&par_batches, par),
        samples,
    })
}

/// Binomial standard error of an empirical rate.
pub fn binomial_stderr(rate: f64, samples: usize) -> f64 {
    (rate * (1.0 - rate) / samples as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trellis::GeneratorPair;

    fn tf_5_7() -> TransferFunction {
        TransferFunction::new(Trellis::new(GeneratorPair::rsc_5_7()).unwrap())
    }

    #[test]
    fn endpoints() {
        let tf = tf_5_7();
        let a = tf.compute(0.0, 0.0).unwrap();
        assert_eq!((a.sys, a.par), (0.0, 0.0));
        let b = tf.compute(1.0, 1.0).unwrap();
        assert!((b.sys - 1.0).abs() < 1e-12 && (b.par - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chain_rows_are_stochastic() {
        let t = Trellis::new(GeneratorPair::rsc_5_7()).unwrap();
        for dir in [Direction::Forward, Direction::Backward] {
            let c = build_metric_chain(&t, 0.3, 0.7, dir).unwrap();
            let n = c.len();
            for i in 0..n {
                let row: f64 = c.transition[i * n..(i + 1) * n].iter().sum();
                assert!((row - 1.0).abs() < 1e-12);
            }
            assert!(c.residual() <= STATIONARY_RESIDUAL);
            assert_eq!(c.nodes[0], t.all_states());
        }
    }

    #[test]
    fn no_erasures_pin_the_state() {
        let t = Trellis::new(GeneratorPair::rsc_5_7()).unwrap();
        let c = build_metric_chain(&t, 0.0, 0.0, Direction::Forward).unwrap();
        let single: f64 = c
            .nodes
            .iter()
            .zip(&c.stationary)
            .filter(|(n, _)| n.count_ones() == 1)
            .map(|(_, m)| m)
            .sum();
        assert!((single - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_observations_keep_all_states() {
        let t = Trellis::new(GeneratorPair::rsc_5_7()).unwrap();
        let c = build_metric_chain(&t, 1.0, 1.0, Direction::Backward).unwrap();
        assert!((c.stationary[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_probabilities() {
        let tf = tf_5_7();
        assert!(tf.compute(-0.1, 0.5).is_err());
        assert!(tf.compute(0.5, 1.5).is_err());
    }

    #[test]
    fn memo_returns_same_value() {
        let tf = tf_5_7();
        let a = tf.evaluate(0.42, 0.17).unwrap();
        let b = tf.evaluate(0.42, 0.17).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, tf.compute(0.42, 0.17).unwrap());
        assert_eq!(tf.memo_len(), 1);
    }

    #[test]
    fn mc_is_deterministic_and_trivial_at_the_corners() {
        let t = Trellis::new(GeneratorPair::rsc_5_7()).unwrap();
        let a = mc_extrinsic(&t, 0.0, 0.0, 100_000, 3).unwrap();
        assert_eq!((a.sys, a.par), (0.0, 0.0));
        let b = mc_extrinsic(&t, 1.0, 1.0, 100_000, 3).unwrap();
        assert_eq!((b.sys, b.par), (1.0, 1.0));
        let c1 = mc_extrinsic(&t, 0.4, 0.6, 20_000, 11).unwrap();
        let c2 = mc_extrinsic(&t, 0.4, 0.6, 20_000, 11).unwrap();
        assert_eq!(c1, c2);
        assert!(mc_extrinsic(&t, 0.4, 0.6, 9_999, 11).is_err());
    }
}
