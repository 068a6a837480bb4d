//! Finite-length code construction: S-random interleavers, nested puncturing
//! patterns, the serially concatenated block encoder and the coupled chain
//! encoder.
//!
//! Every position of a chain carries one outer and one inner encoder, both
//! terminated. The outer codeword of a position is the multiplexed sequence
//! `v[2i] = u[i]`, `v[2i+1] = parity[i]` of length `2K`; its `2 nu` tail bits
//! are sent over the channel directly and never enter the inner encoder. The
//! inner encoder of position `t` reads `2K` bits, each taken either from the
//! outer codeword of position `t` (lag 0) or of position `t - 1` (lag 1).
//!
//! Transmission per position: information bits through `P0`, outer parity
//! through `P1`, inner parity through `P2`, tails unpunctured. The last position
//! of a chain has an all-zero information block, so only its inner parity (left
//! unpunctured) and inner tail are sent.

use std::io::{BufRead, Read, Write};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::trellis::Trellis;
use crate::Error;

/// Builds an S-random permutation: for all `i != j` with `|i - j| <= spread`,
/// `|perm[i] - perm[j]| >= spread`.
///
/// Positions are filled in order from a shuffled pool. At a dead end the
/// builder tries to swap an earlier entry into the current slot, moving a pool
/// value into that entry's place; if no such swap exists the attempt restarts.
pub fn s_random_interleaver(len: usize, spread: usize, seed: u64) -> Result<Vec<usize>, Error> {
    const ATTEMPTS: usize = 200;
    if len == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ATTEMPTS {
        if let Some(p) = s_random_attempt(len, spread, &mut rng) {
            return Ok(p);
        }
    }
    Err(Error::Interleaver { len, spread })
}

fn s_random_attempt(len: usize, spread: usize, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    // `fits(perm, j, v)` ignores position j itself and unfilled positions
    let fits = |perm: &[usize], j: usize, v: usize| {
        let lo = j.saturating_sub(spread);
        let hi = (j + spread + 1).min(perm.len());
        (lo..hi).all(|i| i == j || perm[i].abs_diff(v) >= spread)
    };
    let mut pool: Vec<usize> = (0..len).collect();
    pool.shuffle(rng);
    let mut perm: Vec<usize> = Vec::with_capacity(len);
    while !pool.is_empty() {
        let i = perm.len();
        if let Some(k) = pool.iter().position(|&c| fits(&perm, i, c)) {
            perm.push(pool.swap_remove(k));
            continue;
        }
        // repair: perm[i] = perm[j], perm[j] = pool[k]
        let mut js: Vec<usize> = (0..i.saturating_sub(spread)).collect();
        js.shuffle(rng);
        let swap = js.into_iter().find_map(|j| {
            if !fits(&perm, i, perm[j]) {
                return None;
            }
            pool.iter().position(|&c| fits(&perm, j, c)).map(|k| (j, k))
        });
        let (j, k) = swap?;
        let moved = perm[j];
        perm[j] = pool.swap_remove(k);
        perm.push(moved);
    }
    Some(perm)
}

/// True if `perm` has the S-random property for `spread` (exhaustive check).
pub fn is_s_random(perm: &[usize], spread: usize) -> bool {
    (0..perm.len()).all(|i| {
        (i + 1..perm.len().min(i + spread + 1)).all(|j| perm[i].abs_diff(perm[j]) >= spread)
    })
}

/// Uniformly random permutation.
pub fn random_permutation(len: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..len).collect();
    p.shuffle(rng);
    p
}

/// Periodic puncturing pattern defined by a puncturing order and permeability.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuncturingPattern {
    /// 1 = transmitted, 0 = punctured.
    pub pattern: Vec<u8>,
    /// 1-based positions in the order they get punctured.
    pub order: Vec<usize>,
    /// Set when `rho * period` was not close to an integer and got rounded down.
    pub rounded_down: bool,
}

impl PuncturingPattern {
    /// Pattern of the given period that punctures nothing.
    pub fn all_ones(period: usize) -> Self {
        Self {
            pattern: vec![1; period],
            order: (1..=period).collect(),
            rounded_down: false,
        }
    }

    pub fn period(&self) -> usize {
        self.pattern.len()
    }

    pub fn permeability(&self) -> f64 {
        self.survivors_per_period() as f64 / self.period() as f64
    }

    pub fn survivors_per_period(&self) -> usize {
        self.pattern.iter().filter(|&&b| b == 1).count()
    }

    #[inline]
    pub fn keeps(&self, index: usize) -> bool {
        self.pattern[index % self.pattern.len()] == 1
    }

    /// Number of surviving bits among the first `len` of a stream.
    pub fn survivors(&self, len: usize) -> usize {
        (0..len).filter(|&i| self.keeps(i)).count()
    }

    pub fn puncture(&self, bits: &[u8]) -> Vec<u8> {
        bits.iter()
            .enumerate()
            .filter(|(i, _)| self.keeps(*i))
            .map(|(_, &b)| b)
            .collect()
    }
}

/// Pattern `{order, rho}`: punctures the first `N_p - round(rho N_p)` positions
/// listed in `order` (1-based).
pub fn nested_pattern(order: &[usize], rho: f64) -> Result<PuncturingPattern, Error> {
    let period = order.len();
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if period == 0 || sorted != (1..=period).collect::<Vec<_>>() {
        return Err(Error::InvalidParameter(format!(
            "puncturing order {order:?} is not a permutation of 1..={period}"
        )));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!(
            "permeability {rho} outside [0, 1]"
        )));
    }
    let exact = rho * period as f64;
    let nearest = exact.round();
    let (survivors, rounded_down) = if (exact - nearest).abs() <= 1.0 / (2.0 * period as f64) {
        (nearest as usize, false)
    } else {
        (exact.floor() as usize, true)
    };
    let mut pattern = vec![1u8; period];
    for &pos in &order[..period - survivors] {
        pattern[pos - 1] = 0;
    }
    Ok(PuncturingPattern {
        pattern,
        order: order.to_vec(),
        rounded_down,
    })
}

/// Puncturers for information bits, outer parity and inner parity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Puncturers {
    pub p0: PuncturingPattern,
    pub p1: PuncturingPattern,
    pub p2: PuncturingPattern,
}

impl Puncturers {
    pub fn none() -> Self {
        Self {
            p0: PuncturingPattern::all_ones(1),
            p1: PuncturingPattern::all_ones(1),
            p2: PuncturingPattern::all_ones(1),
        }
    }

    /// Nested patterns from user-supplied orders; information bits unpunctured.
    pub fn from_orders(
        order1: &[usize],
        rho1: f64,
        order2: &[usize],
        rho2: f64,
    ) -> Result<Self, Error> {
        Ok(Self {
            p0: PuncturingPattern::all_ones(1),
            p1: nested_pattern(order1, rho1)?,
            p2: nested_pattern(order2, rho2)?,
        })
    }
}

/// How the outer codeword of a position is split between the inner encoders
/// of positions `t` and `t + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    /// Even-indexed interleaved bits stay, odd-indexed ones move on.
    EvenOdd,
    /// A seeded random half stays.
    Random,
}

/// Interleaving used by the chain encoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InterleaverMode {
    /// One S-random permutation shared by every position; the inner input
    /// alternates bits of the kept half and the previous position's moved half.
    SRandom { spread: usize },
    /// Fresh uniform permutations before the split and before the inner
    /// encoder at every position.
    FullyRandom,
}

/// Where the inner encoder's input bit comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Source {
    /// 0: outer codeword of the same position; 1: of the previous position.
    pub lag: u8,
    /// Index in that outer codeword (`2i` systematic, `2i+1` parity).
    pub index: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingConfig {
    /// Information bits per position.
    pub k: usize,
    /// Coupling length `L`; `L - 1` positions carry information.
    pub length: usize,
    pub memory: usize,
    pub seed: u64,
    pub split: SplitMode,
    pub interleaver: InterleaverMode,
}

impl CouplingConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.k == 0 || !self.k.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "K = {} must be even and positive",
                self.k
            )));
        }
        if self.length < 2 {
            return Err(Error::InvalidParameter(format!(
                "L = {} must be at least 2",
                self.length
            )));
        }
        if self.memory != 1 {
            return Err(Error::InvalidParameter(format!(
                "finite-length chains support coupling memory 1 only (got {})",
                self.memory
            )));
        }
        Ok(())
    }
}

/// A concrete finite-length code: either a single serially concatenated block
/// or a coupled chain of them.
#[derive(Clone, Debug)]
pub struct ChainCode {
    trellis: Arc<Trellis>,
    k: usize,
    length: usize,
    coupled: bool,
    puncturers: Puncturers,
    /// Inner-input map per position (shared when the interleaver is shared).
    maps: Vec<Arc<Vec<Source>>>,
}

impl ChainCode {
    /// Uncoupled block of `K` information bits with interleaver `perm` over the
    /// `2K` outer code bits.
    pub fn block(
        trellis: Arc<Trellis>,
        perm: &[usize],
        puncturers: Puncturers,
    ) -> Result<Self, Error> {
        let n = perm.len();
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "interleaver length {n} must be twice the block length"
            )));
        }
        check_permutation(perm)?;
        let map = perm
            .iter()
            .map(|&p| Source {
                lag: 0,
                index: p as u32,
            })
            .collect();
        Ok(Self {
            trellis,
            k: n / 2,
            length: 1,
            coupled: false,
            puncturers,
            maps: vec![Arc::new(map)],
        })
    }

    /// Coupled chain with memory 1.
    pub fn chain(
        trellis: Arc<Trellis>,
        cfg: &CouplingConfig,
        puncturers: Puncturers,
    ) -> Result<Self, Error> {
        cfg.validate()?;
        let n = 2 * cfg.k;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let split = |rng: &mut ChaCha8Rng| -> (Vec<usize>, Vec<usize>) {
            match cfg.split {
                SplitMode::EvenOdd => (
                    (0..cfg.k).map(|i| 2 * i).collect(),
                    (0..cfg.k).map(|i| 2 * i + 1).collect(),
                ),
                SplitMode::Random => {
                    let p = random_permutation(n, rng);
                    let mut a = p[..cfg.k].to_vec();
                    let mut b = p[cfg.k..].to_vec();
                    a.sort_unstable();
                    b.sort_unstable();
                    (a, b)
                }
            }
        };
        let maps = match cfg.interleaver {
            InterleaverMode::SRandom { spread } => {
                let perm = s_random_interleaver(n, spread, rng.gen())?;
                let (a, b) = split(&mut rng);
                let map: Vec<Source> = (0..cfg.k)
                    .flat_map(|i| {
                        [
                            Source {
                                lag: 0,
                                index: perm[a[i]] as u32,
                            },
                            Source {
                                lag: 1,
                                index: perm[b[i]] as u32,
                            },
                        ]
                    })
                    .collect();
                // one map shared by every position
                let shared = Arc::new(map);
                vec![shared; cfg.length]
            }
            InterleaverMode::FullyRandom => {
                // part B of position t-1 must use that position's permutation
                let firsts: Vec<Vec<usize>> = (0..cfg.length)
                    .map(|_| random_permutation(n, &mut rng))
                    .collect();
                let splits: Vec<(Vec<usize>, Vec<usize>)> =
                    (0..cfg.length).map(|_| split(&mut rng)).collect();
                (0..cfg.length)
                    .map(|t| {
                        let (a, _) = &splits[t];
                        let mut concat: Vec<Source> = a
                            .iter()
                            .map(|&j| Source {
                                lag: 0,
                                index: firsts[t][j] as u32,
                            })
                            .collect();
                        if t > 0 {
                            let (_, b_prev) = &splits[t - 1];
                            concat.extend(b_prev.iter().map(|&j| Source {
                                lag: 1,
                                index: firsts[t - 1][j] as u32,
                            }));
                        } else {
                            concat.extend((0..cfg.k).map(|i| Source {
                                lag: 1,
                                index: i as u32,
                            }));
                        }
                        let second = random_permutation(n, &mut rng);
                        Arc::new(second.iter().map(|&j| concat[j]).collect())
                    })
                    .collect()
            }
        };
        Ok(Self {
            trellis,
            k: cfg.k,
            length: cfg.length,
            coupled: true,
            puncturers,
            maps,
        })
    }

    pub fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of positions (1 for a block).
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn is_coupled(&self) -> bool {
        self.coupled
    }

    pub fn puncturers(&self) -> &Puncturers {
        &self.puncturers
    }

    /// Positions are 1-based.
    pub fn inner_map(&self, t: usize) -> &[Source] {
        &self.maps[t - 1]
    }

    /// Number of information blocks (`L - 1` for a chain, 1 for a block).
    pub fn info_blocks(&self) -> usize {
        if self.coupled {
            self.length - 1
        } else {
            1
        }
    }

    /// Total information bits, `K_SC = (L - 1) K` for a chain.
    pub fn info_bits(&self) -> usize {
        self.info_blocks() * self.k
    }

    /// Whether position `t` carries an outer codeword.
    pub fn has_outer(&self, t: usize) -> bool {
        !self.coupled || t < self.length
    }

    /// Whether inner parity at position `t` goes through `P2`.
    pub fn inner_punctured(&self, t: usize) -> bool {
        !self.coupled || t < self.length
    }

    /// Rate of the code counting tail bits as overhead outside the rate.
    pub fn nominal_rate(&self) -> f64 {
        self.info_bits() as f64 / self.payload_bits() as f64
    }

    /// Transmitted bits excluding termination tails.
    pub fn payload_bits(&self) -> usize {
        let p = &self.puncturers;
        (1..=self.length)
            .map(|t| {
                let mut n = if self.inner_punctured(t) {
                    p.p2.survivors(2 * self.k)
                } else {
                    2 * self.k
                };
                if self.has_outer(t) {
                    n += p.p0.survivors(self.k) + p.p1.survivors(self.k);
                }
                n
            })
            .sum()
    }

    /// Encodes `info` (one block of `K` bits per information position).
    pub fn encode(&self, info: &[Vec<u8>]) -> Result<ChainCodeword, Error> {
        if info.len() != self.info_blocks() {
            return Err(Error::LengthMismatch {
                what: "information blocks",
                expected: self.info_blocks(),
                actual: info.len(),
            });
        }
        if let Some(bad) = info.iter().find(|b| b.len() != self.k) {
            return Err(Error::LengthMismatch {
                what: "information block",
                expected: self.k,
                actual: bad.len(),
            });
        }
        let nu = self.trellis.memory();
        let mut sections: Vec<SectionCodeword> = Vec::with_capacity(self.length);
        let mut prev_outer: Vec<u8> = vec![0; 2 * self.k];
        for t in 1..=self.length {
            let mut sec = SectionCodeword::default();
            let outer_word: Vec<u8> = if self.has_outer(t) {
                let u = &info[t - 1];
                let enc = self.trellis.encode(u, true);
                sec.info = u.clone();
                sec.outer_parity = enc.parity[..self.k].to_vec();
                sec.outer_tail_sys = enc.systematic[self.k..].to_vec();
                sec.outer_tail_par = enc.parity[self.k..].to_vec();
                (0..self.k)
                    .flat_map(|i| [enc.systematic[i], enc.parity[i]])
                    .collect()
            } else {
                vec![0; 2 * self.k]
            };
            let input: Vec<u8> = self
                .inner_map(t)
                .iter()
                .map(|s| {
                    if s.lag == 0 {
                        outer_word[s.index as usize]
                    } else {
                        prev_outer[s.index as usize]
                    }
                })
                .collect();
            let inner = self.trellis.encode(&input, true);
            sec.inner_parity = inner.parity[..2 * self.k].to_vec();
            sec.inner_tail_sys = inner.systematic[2 * self.k..].to_vec();
            sec.inner_tail_par = inner.parity[2 * self.k..].to_vec();
            debug_assert_eq!(sec.inner_tail_sys.len(), nu);
            sections.push(sec);
            prev_outer = outer_word;
        }
        Ok(ChainCodeword { sections })
    }

    /// Bits actually sent for one section, in class order: information,
    /// outer parity, outer tail (systematic then parity), inner parity, inner
    /// tail (systematic then parity).
    pub fn transmitted(&self, t: usize, sec: &SectionCodeword) -> Vec<u8> {
        let p = &self.puncturers;
        let mut out = Vec::new();
        if self.has_outer(t) {
            out.extend(p.p0.puncture(&sec.info));
            out.extend(p.p1.puncture(&sec.outer_parity));
            out.extend(&sec.outer_tail_sys);
            out.extend(&sec.outer_tail_par);
        }
        if self.inner_punctured(t) {
            out.extend(p.p2.puncture(&sec.inner_parity));
        } else {
            out.extend(&sec.inner_parity);
        }
        out.extend(&sec.inner_tail_sys);
        out.extend(&sec.inner_tail_par);
        out
    }

    /// Number of transmitted bits of section `t` (including tails).
    pub fn transmitted_len(&self, t: usize) -> usize {
        let p = &self.puncturers;
        let nu = self.trellis.memory();
        let mut n = 2 * nu;
        if self.has_outer(t) {
            n += p.p0.survivors(self.k) + p.p1.survivors(self.k) + 2 * nu;
        }
        n + if self.inner_punctured(t) {
            p.p2.survivors(2 * self.k)
        } else {
            2 * self.k
        }
    }
}

fn check_permutation(perm: &[usize]) -> Result<(), Error> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidParameter(
                "interleaver is not a permutation".into(),
            ));
        }
    }
    Ok(())
}

/// Unpunctured code bits of one position, grouped by class.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SectionCodeword {
    pub info: Vec<u8>,
    pub outer_parity: Vec<u8>,
    pub outer_tail_sys: Vec<u8>,
    pub outer_tail_par: Vec<u8>,
    pub inner_parity: Vec<u8>,
    pub inner_tail_sys: Vec<u8>,
    pub inner_tail_par: Vec<u8>,
}

/// The punctured payload classes of one section.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PuncturedSection {
    pub outer_sys: Vec<u8>,
    pub outer_par: Vec<u8>,
    pub inner_par: Vec<u8>,
}

impl SectionCodeword {
    pub fn punctured(&self, p: &Puncturers) -> PuncturedSection {
        PuncturedSection {
            outer_sys: p.p0.puncture(&self.info),
            outer_par: p.p1.puncture(&self.outer_parity),
            inner_par: p.p2.puncture(&self.inner_parity),
        }
    }

    pub fn xor(&self, other: &Self) -> Self {
        let x = |a: &[u8], b: &[u8]| a.iter().zip(b).map(|(x, y)| x ^ y).collect();
        Self {
            info: x(&self.info, &other.info),
            outer_parity: x(&self.outer_parity, &other.outer_parity),
            outer_tail_sys: x(&self.outer_tail_sys, &other.outer_tail_sys),
            outer_tail_par: x(&self.outer_tail_par, &other.outer_tail_par),
            inner_parity: x(&self.inner_parity, &other.inner_parity),
            inner_tail_sys: x(&self.inner_tail_sys, &other.inner_tail_sys),
            inner_tail_par: x(&self.inner_tail_par, &other.inner_tail_par),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChainCodeword {
    /// `sections[t - 1]` is position `t`.
    pub sections: Vec<SectionCodeword>,
}

impl ChainCodeword {
    pub fn xor(&self, other: &Self) -> Self {
        Self {
            sections: self
                .sections
                .iter()
                .zip(&other.sections)
                .map(|(a, b)| a.xor(b))
                .collect(),
        }
    }

    /// Full transmitted sequence, section after section.
    pub fn transmitted(&self, code: &ChainCode) -> Vec<u8> {
        self.sections
            .iter()
            .enumerate()
            .flat_map(|(i, s)| code.transmitted(i + 1, s))
            .collect()
    }
}

/// Encodes one uncoupled block and returns the punctured classes
/// `(outer systematic, outer parity, inner parity)` together with the full
/// section.
pub fn encode_scc_block(
    code: &ChainCode,
    u: &[u8],
) -> Result<(PuncturedSection, SectionCodeword), Error> {
    if code.is_coupled() {
        return Err(Error::InvalidParameter(
            "encode_scc_block needs a block code".into(),
        ));
    }
    let cw = code.encode(&[u.to_vec()])?;
    let sec = cw.sections.into_iter().next().expect("one section");
    Ok((sec.punctured(code.puncturers()), sec))
}

/// Header of a packed codeword file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodewordHeader {
    pub format: String,
    pub version: u32,
    pub k: usize,
    pub length: usize,
    pub coupled: bool,
    /// Transmitted bits per section.
    pub section_bits: Vec<usize>,
    /// Class order inside a section.
    pub classes: Vec<String>,
    pub code_seed: u64,
    pub info_seed: u64,
}

pub const CODEWORD_FORMAT: &str = "sctc-codeword";

pub const SECTION_CLASSES: [&str; 7] = [
    "info",
    "outer_parity",
    "outer_tail_sys",
    "outer_tail_par",
    "inner_parity",
    "inner_tail_sys",
    "inner_tail_par",
];

impl CodewordHeader {
    pub fn new(code: &ChainCode, code_seed: u64, info_seed: u64) -> Self {
        Self {
            format: CODEWORD_FORMAT.to_string(),
            version: 1,
            k: code.k(),
            length: code.length(),
            coupled: code.is_coupled(),
            section_bits: (1..=code.length())
                .map(|t| code.transmitted_len(t))
                .collect(),
            classes: SECTION_CLASSES.iter().map(|s| s.to_string()).collect(),
            code_seed,
            info_seed,
        }
    }

    pub fn total_bits(&self) -> usize {
        self.section_bits.iter().sum()
    }
}

/// Writes a one-line JSON header followed by the transmitted bits packed
/// MSB-first, eight per byte, zero-padded.
pub fn write_codeword(
    mut w: impl Write,
    header: &CodewordHeader,
    bits: &[u8],
) -> std::io::Result<()> {
    if bits.len() != header.total_bits() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            format!(
                "header announces {} bits, got {}",
                header.total_bits(),
                bits.len()
            ),
        ));
    }
    serde_json::to_writer(&mut w, header)?;
    w.write_all(b"\n")?;
    w.write_all(&pack_bits(bits))
}

pub fn read_codeword(r: impl Read) -> std::io::Result<(CodewordHeader, Vec<u8>)> {
    let mut r = std::io::BufReader::new(r);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: CodewordHeader = serde_json::from_str(line.trim_end())
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
    if header.format != CODEWORD_FORMAT {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("unknown codeword format `{}`", header.format),
        ));
    }
    let mut packed = Vec::new();
    r.read_to_end(&mut packed)?;
    let n = header.total_bits();
    if packed.len() != n.div_ceil(8) {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!(
                "expected {} payload bytes, found {}",
                n.div_ceil(8),
                packed.len()
            ),
        ));
    }
    Ok((header, unpack_bits(&packed, n)))
}

pub fn pack_bits(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | ((b & 1) << (7 - i)))
        })
        .collect()
}

pub fn unpack_bits(bytes: &[u8], n: usize) -> Vec<u8> {
    (0..n).map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1).collect()
}
