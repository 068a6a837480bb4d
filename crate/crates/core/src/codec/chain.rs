//! Iterative decoding of coupled chains (and of uncoupled blocks, which are
//! chains with a single position and no lag).
//!
//! Each position runs an inner and, if it carries information, an outer BCJR
//! decoder. The inner decoder of position `t` takes priors on its input bits
//! from the outer codewords of positions `t` and `t - 1`; the outer decoder of
//! `t` takes priors from the inner decoders of `t` and `t + 1`. Sweeps are
//! Gauss-Seidel: positions left to right, inner then outer, each activation
//! seeing the newest messages.

use serde::{Deserialize, Serialize};

use super::{Bcjr, ErasureMessage, Extrinsic};
use crate::construction::{ChainCode, PuncturingPattern};
use crate::Error;

use ErasureMessage::Erased;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleMode {
    Full,
    Window,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderSchedule {
    pub mode: ScheduleMode,
    /// Positions per window (window mode only).
    pub window: usize,
    /// Inner/outer alternations per position visit.
    pub inner_iterations: usize,
    /// Cap on sweeps (per window in window mode).
    pub max_iters: usize,
}

impl DecoderSchedule {
    pub fn full() -> Self {
        Self {
            mode: ScheduleMode::Full,
            window: 0,
            inner_iterations: 1,
            max_iters: 10_000,
        }
    }

    pub fn window(w: usize) -> Self {
        Self {
            mode: ScheduleMode::Window,
            window: w,
            ..Self::full()
        }
    }

    /// Decoding latency in information bits.
    pub fn latency(&self, code: &ChainCode) -> usize {
        match self.mode {
            ScheduleMode::Full => code.info_bits(),
            ScheduleMode::Window => self.window * code.k(),
        }
    }
}

/// Channel observations of one position, depunctured to full length.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SectionObservation {
    pub info: Vec<ErasureMessage>,
    pub outer_parity: Vec<ErasureMessage>,
    pub outer_tail_sys: Vec<ErasureMessage>,
    pub outer_tail_par: Vec<ErasureMessage>,
    pub inner_parity: Vec<ErasureMessage>,
    pub inner_tail_sys: Vec<ErasureMessage>,
    pub inner_tail_par: Vec<ErasureMessage>,
}

fn depuncture(
    it: &mut impl Iterator<Item = ErasureMessage>,
    len: usize,
    pattern: Option<&PuncturingPattern>,
) -> Vec<ErasureMessage> {
    (0..len)
        .map(|i| match pattern {
            Some(p) if !p.keeps(i) => Erased,
            _ => it.next().unwrap_or(Erased),
        })
        .collect()
}

/// Splits the received sequence of the whole code into per-position
/// observations; punctured bits come back erased.
pub fn observe(
    code: &ChainCode,
    received: &[ErasureMessage],
) -> Result<Vec<SectionObservation>, Error> {
    let expected: usize = (1..=code.length()).map(|t| code.transmitted_len(t)).sum();
    if received.len() != expected {
        return Err(Error::LengthMismatch {
            what: "received sequence",
            expected,
            actual: received.len(),
        });
    }
    let (k, nu) = (code.k(), code.trellis().memory());
    let p = code.puncturers();
    let mut it = received.iter().copied();
    Ok((1..=code.length())
        .map(|t| {
            let mut s = SectionObservation::default();
            if code.has_outer(t) {
                s.info = depuncture(&mut it, k, Some(&p.p0));
                s.outer_parity = depuncture(&mut it, k, Some(&p.p1));
                s.outer_tail_sys = depuncture(&mut it, nu, None);
                s.outer_tail_par = depuncture(&mut it, nu, None);
            }
            let p2 = code.inner_punctured(t).then_some(&p.p2);
            s.inner_parity = depuncture(&mut it, 2 * k, p2);
            s.inner_tail_sys = depuncture(&mut it, nu, None);
            s.inner_tail_par = depuncture(&mut it, nu, None);
            s
        })
        .collect())
}

/// Per-sweep residual erasures of the information estimate at one position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    /// First position of the active window (1 in full mode).
    pub window_start: usize,
    pub iteration: usize,
    pub position: usize,
    pub erased_info: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainDecoded {
    /// Information estimates per information position.
    pub info: Vec<Vec<ErasureMessage>>,
    pub resolved: Vec<bool>,
    /// Total sweeps (summed over windows in window mode).
    pub iterations: usize,
}

impl ChainDecoded {
    pub fn erased_bits(&self) -> usize {
        self.info.iter().map(|b| super::count_erased(b)).sum()
    }

    pub fn all_resolved(&self) -> bool {
        self.resolved.iter().all(|&r| r)
    }
}

/// Where an outer code bit is read by an inner decoder.
#[derive(Clone, Copy)]
struct Reader {
    position: usize,
    step: u32,
}

struct Decoder<'a> {
    code: &'a ChainCode,
    obs: &'a [SectionObservation],
    /// Extrinsic on the inner input bits, per position.
    inner_ext: Vec<Vec<ErasureMessage>>,
    /// Extrinsic on the multiplexed outer codeword, per position.
    outer_ext: Vec<Vec<ErasureMessage>>,
    /// `readers[t - 1][idx]`: inner position and step reading outer bit `idx` of `t`.
    readers: Vec<Vec<Reader>>,
    bcjr: Bcjr,
    sys: Vec<ErasureMessage>,
    par: Vec<ErasureMessage>,
    out: Extrinsic,
    /// Activation order, `(is_inner, position)`.
    #[cfg(test)]
    log: Vec<(bool, usize)>,
}

impl<'a> Decoder<'a> {
    fn new(code: &'a ChainCode, obs: &'a [SectionObservation]) -> Self {
        let (n, len) = (2 * code.k(), code.length());
        let mut readers = vec![
            vec![
                Reader {
                    position: 0,
                    step: 0
                };
                n
            ];
            len
        ];
        for t in 1..=len {
            for (j, s) in code.inner_map(t).iter().enumerate() {
                let src = t - s.lag as usize;
                if src >= 1 {
                    readers[src - 1][s.index as usize] = Reader {
                        position: t,
                        step: j as u32,
                    };
                }
            }
        }
        Self {
            code,
            obs,
            inner_ext: vec![vec![Erased; n]; len],
            outer_ext: vec![vec![Erased; n]; len],
            readers,
            bcjr: Bcjr::new(),
            sys: Vec::new(),
            par: Vec::new(),
            out: Extrinsic::default(),
            #[cfg(test)]
            log: Vec::new(),
        }
    }

    /// Channel observation of outer bit `idx` at position `t`.
    fn outer_channel(&self, t: usize, idx: usize) -> ErasureMessage {
        let o = &self.obs[t - 1];
        if idx.is_multiple_of(2) {
            o.info[idx / 2]
        } else {
            o.outer_parity[idx / 2]
        }
    }

    /// Returns the number of messages that became known.
    fn inner(&mut self, t: usize) -> Result<usize, Error> {
        let code = self.code;
        #[cfg(test)]
        self.log.push((true, t));
        let o = &self.obs[t - 1];
        self.sys.clear();
        for s in code.inner_map(t) {
            let src = t - s.lag as usize;
            let m = if src == 0 || !code.has_outer(src) {
                ErasureMessage::Zero
            } else {
                let idx = s.index as usize;
                self.outer_channel(src, idx)
                    .combine(self.outer_ext[src - 1][idx])?
            };
            self.sys.push(m);
        }
        self.sys.extend_from_slice(&o.inner_tail_sys);
        self.par.clear();
        self.par.extend_from_slice(&o.inner_parity);
        self.par.extend_from_slice(&o.inner_tail_par);
        self.bcjr
            .run(code.trellis(), &self.sys, &self.par, 1, 1, &mut self.out)?;
        Ok(absorb(&mut self.inner_ext[t - 1], &self.out.sys))
    }

    fn outer(&mut self, t: usize) -> Result<usize, Error> {
        let code = self.code;
        if !code.has_outer(t) {
            return Ok(0);
        }
        #[cfg(test)]
        self.log.push((false, t));
        let o = &self.obs[t - 1];
        let k = code.k();
        self.sys.clear();
        self.par.clear();
        for i in 0..k {
            let rs = self.readers[t - 1][2 * i];
            let rp = self.readers[t - 1][2 * i + 1];
            self.sys
                .push(o.info[i].combine(self.inner_ext[rs.position - 1][rs.step as usize])?);
            self.par.push(
                o.outer_parity[i].combine(self.inner_ext[rp.position - 1][rp.step as usize])?,
            );
        }
        self.sys.extend_from_slice(&o.outer_tail_sys);
        self.par.extend_from_slice(&o.outer_tail_par);
        self.bcjr
            .run(code.trellis(), &self.sys, &self.par, 1, 1, &mut self.out)?;
        let ext = &mut self.outer_ext[t - 1];
        let mut gained = 0;
        for i in 0..k {
            gained += absorb(&mut ext[2 * i..2 * i + 1], &self.out.sys[i..i + 1]);
            gained += absorb(&mut ext[2 * i + 1..2 * i + 2], &self.out.par[i..i + 1]);
        }
        Ok(gained)
    }

    fn info_estimate(&self, t: usize) -> Result<Vec<ErasureMessage>, Error> {
        let o = &self.obs[t - 1];
        (0..self.code.k())
            .map(|i| {
                let r = self.readers[t - 1][2 * i];
                o.info[i]
                    .combine(self.outer_ext[t - 1][2 * i])?
                    .combine(self.inner_ext[r.position - 1][r.step as usize])
            })
            .collect()
    }

    fn erased_info(&self, t: usize) -> Result<usize, Error> {
        Ok(super::count_erased(&self.info_estimate(t)?))
    }

    /// Sweeps `first..=last` until nothing changes, every information bit in
    /// the range is known, or the cap is hit. Returns the sweep count.
    fn converge(
        &mut self,
        first: usize,
        last: usize,
        schedule: &DecoderSchedule,
        trace: &mut Option<&mut dyn FnMut(TraceRow)>,
    ) -> Result<usize, Error> {
        let info_last = last.min(self.code.info_blocks());
        let mut sweeps = 0;
        while sweeps < schedule.max_iters {
            sweeps += 1;
            let mut gained = 0;
            for t in first..=last {
                for _ in 0..schedule.inner_iterations.max(1) {
                    gained += self.inner(t)?;
                    gained += self.outer(t)?;
                }
            }
            let mut erased = 0;
            for t in first..=info_last {
                let e = self.erased_info(t)?;
                erased += e;
                if let Some(f) = trace.as_mut() {
                    f(TraceRow {
                        window_start: first,
                        iteration: sweeps,
                        position: t,
                        erased_info: e,
                    });
                }
            }
            if gained == 0 || erased == 0 {
                break;
            }
        }
        Ok(sweeps)
    }
}

fn absorb(dst: &mut [ErasureMessage], src: &[ErasureMessage]) -> usize {
    let mut gained = 0;
    for (d, &s) in dst.iter_mut().zip(src) {
        if d.is_erased() && s.is_known() {
            *d = s;
            gained += 1;
        }
    }
    gained
}

/// Decodes a chain (or block) from depunctured observations.
pub fn decode_chain(
    code: &ChainCode,
    obs: &[SectionObservation],
    schedule: &DecoderSchedule,
) -> Result<ChainDecoded, Error> {
    decode_chain_traced(code, obs, schedule, None)
}

/// As [`decode_chain`], reporting residual information erasures per position
/// after every sweep.
pub fn decode_chain_traced(
    code: &ChainCode,
    obs: &[SectionObservation],
    schedule: &DecoderSchedule,
    mut trace: Option<&mut dyn FnMut(TraceRow)>,
) -> Result<ChainDecoded, Error> {
    validate(code, obs)?;
    let len = code.length();
    let mut dec = Decoder::new(code, obs);
    let mut info = Vec::with_capacity(code.info_blocks());
    let iterations = match schedule.mode {
        ScheduleMode::Full => {
            let sweeps = dec.converge(1, len, schedule, &mut trace)?;
            for t in 1..=code.info_blocks() {
                info.push(dec.info_estimate(t)?);
            }
            sweeps
        }
        ScheduleMode::Window => {
            if schedule.window < 2 {
                return Err(Error::InvalidParameter(format!(
                    "window size {} must be at least m + 1 = 2",
                    schedule.window
                )));
            }
            let mut sweeps = 0;
            for start in 1..=code.info_blocks() {
                let last = (start + schedule.window - 1).min(len);
                sweeps += dec.converge(start, last, schedule, &mut trace)?;
                info.push(dec.info_estimate(start)?);
            }
            sweeps
        }
    };
    let resolved = info
        .iter()
        .map(|b| b.iter().all(|m| m.is_known()))
        .collect();
    Ok(ChainDecoded {
        info,
        resolved,
        iterations,
    })
}

fn validate(code: &ChainCode, obs: &[SectionObservation]) -> Result<(), Error> {
    if obs.len() != code.length() {
        return Err(Error::LengthMismatch {
            what: "observed positions",
            expected: code.length(),
            actual: obs.len(),
        });
    }
    let (k, nu) = (code.k(), code.trellis().memory());
    for (i, o) in obs.iter().enumerate() {
        let outer = if code.has_outer(i + 1) { k } else { 0 };
        let outer_tail = if code.has_outer(i + 1) { nu } else { 0 };
        let checks = [
            ("information observations", outer, o.info.len()),
            ("outer parity observations", outer, o.outer_parity.len()),
            (
                "outer tail observations",
                outer_tail,
                o.outer_tail_sys.len(),
            ),
            (
                "outer tail observations",
                outer_tail,
                o.outer_tail_par.len(),
            ),
            ("inner parity observations", 2 * k, o.inner_parity.len()),
            ("inner tail observations", nu, o.inner_tail_sys.len()),
            ("inner tail observations", nu, o.inner_tail_par.len()),
        ];
        for (what, expected, actual) in checks {
            if expected != actual {
                return Err(Error::LengthMismatch {
                    what,
                    expected,
                    actual,
                });
            }
        }
    }
    Ok(())
}
