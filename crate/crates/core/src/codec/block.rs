use super::chain::{decode_chain, DecoderSchedule, SectionObservation};
use super::ErasureMessage;
use crate::construction::ChainCode;
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockDecoded {
    pub info: Vec<ErasureMessage>,
    pub resolved: bool,
    pub iterations: usize,
}

/// Iterative decoding of one uncoupled serially concatenated block.
pub fn decode_scc_block(
    code: &ChainCode,
    obs: &SectionObservation,
    schedule: &DecoderSchedule,
) -> Result<BlockDecoded, Error> {
    if code.is_coupled() {
        return Err(Error::InvalidParameter(
            "decode_scc_block needs a block code".into(),
        ));
    }
    let mut d = decode_chain(code, std::slice::from_ref(obs), schedule)?;
    Ok(BlockDecoded {
        info: d.info.pop().unwrap_or_default(),
        resolved: d.resolved[0],
        iterations: d.iterations,
    })
}
