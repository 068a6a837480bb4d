//! Finite-length iterative erasure decoding.
//!
//! On the erasure channel every message is either a known bit or an erasure,
//! so BCJR reduces to propagating sets of feasible trellis states and the
//! iterative decoder is monotone: known messages never become erased again.

mod bcjr;
mod block;
mod chain;

pub use bcjr::{bcjr_erasure, Bcjr, Extrinsic};
pub use block::{decode_scc_block, BlockDecoded};
pub use chain::{
    decode_chain, decode_chain_traced, observe, ChainDecoded, DecoderSchedule, ScheduleMode,
    SectionObservation, TraceRow,
};

use crate::Error;

/// A bit as seen by the decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
#[repr(u8)]
pub enum ErasureMessage {
    Zero = 0,
    One = 1,
    #[default]
    Erased = 2,
}

impl ErasureMessage {
    #[inline]
    pub fn known(bit: u8) -> Self {
        if bit & 1 == 0 {
            Self::Zero
        } else {
            Self::One
        }
    }

    #[inline]
    pub fn is_erased(self) -> bool {
        self == Self::Erased
    }

    #[inline]
    pub fn is_known(self) -> bool {
        self != Self::Erased
    }

    #[inline]
    pub fn bit(self) -> Option<u8> {
        match self {
            Self::Zero => Some(0),
            Self::One => Some(1),
            Self::Erased => None,
        }
    }

    /// Combines two independent observations of the same bit. Two known values
    /// that disagree cannot happen on an erasure channel.
    #[inline]
    pub fn combine(self, other: Self) -> Result<Self, Error> {
        match (self, other) {
            (Self::Erased, m) | (m, Self::Erased) => Ok(m),
            (a, b) if a == b => Ok(a),
            _ => Err(Error::Inconsistent("conflicting known messages")),
        }
    }
}

/// Erasure count of a message slice.
pub fn count_erased(msgs: &[ErasureMessage]) -> usize {
    msgs.iter().filter(|m| m.is_erased()).count()
}

#[cfg(test)]
mod tests {
    use super::ErasureMessage::*;

    #[test]
    fn combine_rules() {
        assert_eq!(Erased.combine(Erased), Ok(Erased));
        assert_eq!(Zero.combine(Erased), Ok(Zero));
        assert_eq!(Erased.combine(One), Ok(One));
        assert_eq!(One.combine(One), Ok(One));
        assert!(One.combine(Zero).is_err());
    }
}
