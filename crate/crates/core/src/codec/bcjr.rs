use super::ErasureMessage;
use crate::trellis::Trellis;
use crate::Error;

/// Extrinsic messages for every trellis step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Extrinsic {
    pub sys: Vec<ErasureMessage>,
    pub par: Vec<ErasureMessage>,
}

/// Reusable BCJR erasure decoder. Holds the forward/backward state-set buffers
/// so repeated activations don't allocate.
#[derive(Debug, Default)]
pub struct Bcjr {
    forward: Vec<u64>,
    backward: Vec<u64>,
}

#[inline]
fn allows(obs: ErasureMessage, bit: u8) -> bool {
    match obs {
        ErasureMessage::Erased => true,
        m => m as u8 == bit,
    }
}

impl Bcjr {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs set propagation over `sys.len()` steps. `start` and `end` are the
    /// state sets allowed at the trellis boundaries. Extrinsic output for a step
    /// uses the forward set before it, the backward set after it, and the other
    /// observation of the same step, never the step's own observation.
    pub fn run(
        &mut self,
        trellis: &Trellis,
        sys: &[ErasureMessage],
        par: &[ErasureMessage],
        start: u64,
        end: u64,
        out: &mut Extrinsic,
    ) -> Result<(), Error> {
        if sys.len() != par.len() {
            return Err(Error::LengthMismatch {
                what: "parity observations",
                expected: sys.len(),
                actual: par.len(),
            });
        }
        let n = sys.len();
        self.forward.clear();
        self.forward.resize(n + 1, 0);
        self.backward.clear();
        self.backward.resize(n + 1, 0);

        self.forward[0] = start;
        for k in 0..n {
            let mut next = 0u64;
            let mut set = self.forward[k];
            while set != 0 {
                let s = set.trailing_zeros() as usize;
                set &= set - 1;
                for u in 0..2u8 {
                    if !allows(sys[k], u) {
                        continue;
                    }
                    let b = trellis.branch(s, u);
                    if allows(par[k], b.parity) {
                        next |= 1 << b.next;
                    }
                }
            }
            if next == 0 {
                return Err(Error::Inconsistent("empty forward state set"));
            }
            self.forward[k + 1] = next;
        }

        self.backward[n] = end;
        for k in (0..n).rev() {
            let after = self.backward[k + 1];
            let mut prev = 0u64;
            for s in 0..trellis.num_states() {
                for u in 0..2u8 {
                    if !allows(sys[k], u) {
                        continue;
                    }
                    let b = trellis.branch(s, u);
                    if allows(par[k], b.parity) && after >> b.next & 1 == 1 {
                        prev |= 1 << s;
                        break;
                    }
                }
            }
            if prev == 0 {
                return Err(Error::Inconsistent("empty backward state set"));
            }
            self.backward[k] = prev;
        }
        if self.forward[n] & end == 0 {
            return Err(Error::Inconsistent("no path reaches the end states"));
        }

        out.sys.clear();
        out.par.clear();
        out.sys.reserve(n);
        out.par.reserve(n);
        for k in 0..n {
            let (before, after) = (self.forward[k], self.backward[k + 1]);
            // bit 0 / bit 1 of these masks: value 0 / value 1 seen on a survivor
            let mut sys_seen = 0u8;
            let mut par_seen = 0u8;
            let mut set = before;
            while set != 0 {
                let s = set.trailing_zeros() as usize;
                set &= set - 1;
                for u in 0..2u8 {
                    let b = trellis.branch(s, u);
                    if after >> b.next & 1 == 0 {
                        continue;
                    }
                    if allows(par[k], b.parity) {
                        sys_seen |= 1 << u;
                    }
                    if allows(sys[k], u) {
                        par_seen |= 1 << b.parity;
                    }
                }
            }
            out.sys.push(seen_to_message(sys_seen)?);
            out.par.push(seen_to_message(par_seen)?);
        }
        Ok(())
    }
}

fn seen_to_message(seen: u8) -> Result<ErasureMessage, Error> {
    match seen {
        0b01 => Ok(ErasureMessage::Zero),
        0b10 => Ok(ErasureMessage::One),
        0b11 => Ok(ErasureMessage::Erased),
        _ => Err(Error::Inconsistent("no surviving transition")),
    }
}

/// Exact BCJR erasure decoding of one trellis section. With `terminated` the
/// trellis starts and ends in state 0; otherwise both ends are unconstrained.
pub fn bcjr_erasure(
    trellis: &Trellis,
    sys: &[ErasureMessage],
    par: &[ErasureMessage],
    terminated: bool,
) -> Result<Extrinsic, Error> {
    let (start, end) = if terminated {
        (1, 1)
    } else {
        (trellis.all_states(), trellis.all_states())
    };
    let mut out = Extrinsic::default();
    Bcjr::new().run(trellis, sys, par, start, end, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trellis::GeneratorPair;
    use ErasureMessage::*;

    fn trellis() -> Trellis {
        Trellis::new(GeneratorPair::rsc_5_7()).unwrap()
    }

    fn known(bits: &[u8]) -> Vec<ErasureMessage> {
        bits.iter().map(|&b| ErasureMessage::known(b)).collect()
    }

    #[test]
    fn full_observation_gives_codeword() {
        let t = trellis();
        let enc = t.encode(&[1, 0, 1, 1, 0, 0, 1], true);
        let ext = bcjr_erasure(&t, &known(&enc.systematic), &known(&enc.parity), true).unwrap();
        assert_eq!(ext.sys, known(&enc.systematic));
        assert_eq!(ext.par, known(&enc.parity));
    }

    #[test]
    fn nothing_observed_gives_nothing() {
        let t = trellis();
        let ext = bcjr_erasure(&t, &[Erased; 9], &[Erased; 9], true).unwrap();
        assert!(ext.sys.iter().chain(&ext.par).all(|m| m.is_erased()));
    }

    #[test]
    fn conflicting_observations_abort() {
        let t = trellis();
        // from state 0, input 0 always yields parity 0
        let err = bcjr_erasure(&t, &[Zero, Erased, Erased], &[One, Erased, Erased], true);
        assert!(err.is_err());
    }

    #[test]
    fn rejects_mismatched_lengths() {
        let t = trellis();
        assert!(bcjr_erasure(&t, &[Erased; 3], &[Erased; 2], false).is_err());
    }
}
