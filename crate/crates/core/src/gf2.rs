//! Maximum-likelihood erasure decoding by Gaussian elimination over GF(2).
//!
//! On the erasure channel ML decoding of a linear code reduces to solving the
//! linear system formed by the unerased code bits. An information bit is
//! determined iff its unit vector lies in the row space of that system.

use crate::codec::ErasureMessage;
use crate::construction::ChainCode;
use crate::Error;

/// Dense GF(2) row with bit-packed storage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitRow {
    words: Vec<u64>,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &Self) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }
}

/// Generator of a code as one row per transmitted bit: row `n` holds the
/// coefficients of transmitted bit `n` in the information bits.
pub fn generator_rows(code: &ChainCode) -> Result<Vec<BitRow>, Error> {
    let (blocks, k) = (code.info_blocks(), code.k());
    let total = blocks * k;
    let zero = vec![vec![0u8; k]; blocks];
    let n = code.encode(&zero)?.transmitted(code).len();
    let mut rows = vec![BitRow::zeros(total); n];
    for b in 0..blocks {
        for i in 0..k {
            let mut info = zero.clone();
            info[b][i] = 1;
            let bits = code.encode(&info)?.transmitted(code);
            for (row, &bit) in rows.iter_mut().zip(&bits) {
                if bit == 1 {
                    row.set(b * k + i, true);
                }
            }
        }
    }
    Ok(rows)
}

/// ML estimate of the `unknowns` information bits given the generator rows and
/// the received sequence.
pub fn ml_erasure_decode(
    rows: &[BitRow],
    unknowns: usize,
    received: &[ErasureMessage],
) -> Result<Vec<ErasureMessage>, Error> {
    if rows.len() != received.len() {
        return Err(Error::LengthMismatch {
            what: "received sequence",
            expected: rows.len(),
            actual: received.len(),
        });
    }
    // augmented system: unknown columns followed by the right-hand side
    let mut sys: Vec<BitRow> = rows
        .iter()
        .zip(received)
        .filter_map(|(r, m)| {
            m.bit().map(|b| {
                let mut row = BitRow::zeros(unknowns + 1);
                for i in 0..unknowns {
                    if r.get(i) {
                        row.set(i, true);
                    }
                }
                row.set(unknowns, b == 1);
                row
            })
        })
        .collect();

    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut next = 0;
    for col in 0..unknowns {
        let Some(p) = (next..sys.len()).find(|&r| sys[r].get(col)) else {
            continue;
        };
        sys.swap(next, p);
        let pivot = sys[next].clone();
        for (r, row) in sys.iter_mut().enumerate() {
            if r != next && row.get(col) {
                row.xor_assign(&pivot);
            }
        }
        pivots.push((col, next));
        next += 1;
    }
    if sys[next..].iter().any(|r| r.get(unknowns)) {
        return Err(Error::Inconsistent("received bits are not a codeword"));
    }

    let mut is_pivot = vec![false; unknowns];
    for &(c, _) in &pivots {
        is_pivot[c] = true;
    }
    let free: Vec<usize> = (0..unknowns).filter(|&c| !is_pivot[c]).collect();
    let mut out = vec![ErasureMessage::Erased; unknowns];
    for &(col, r) in &pivots {
        let row = &sys[r];
        if free.iter().all(|&f| !row.get(f)) {
            out[col] = ErasureMessage::known(row.get(unknowns) as u8);
        }
    }
    Ok(out)
}
