//! Set-propagation BCJR against brute-force codeword enumeration.

use proptest::prelude::*;
use sctc::codec::{bcjr_erasure, ErasureMessage};
use sctc::trellis::{GeneratorPair, Trellis};

/// Every terminated codeword as `(sys, par)` bit vectors.
fn codewords(trellis: &Trellis, k: usize) -> Vec<(Vec<u8>, Vec<u8>)> {
    (0..1u32 << k)
        .map(|m| {
            let u: Vec<u8> = (0..k).map(|i| (m >> i & 1) as u8).collect();
            let e = trellis.encode(&u, true);
            (e.systematic, e.parity)
        })
        .collect()
}

fn consistent(cw: &(Vec<u8>, Vec<u8>), sys: &[ErasureMessage], par: &[ErasureMessage]) -> bool {
    let ok = |bits: &[u8], obs: &[ErasureMessage]| {
        bits.iter()
            .zip(obs)
            .all(|(&b, o)| o.bit().is_none_or(|x| x == b))
    };
    ok(&cw.0, sys) && ok(&cw.1, par)
}

/// Extrinsic by enumeration: drop the bit's own observation, keep the
/// codewords that agree with everything else, report the bit if they agree.
fn oracle(
    words: &[(Vec<u8>, Vec<u8>)],
    sys: &[ErasureMessage],
    par: &[ErasureMessage],
) -> (Vec<ErasureMessage>, Vec<ErasureMessage>) {
    let n = sys.len();
    let decide = |own_sys: bool, i: usize| {
        let (mut s, mut p) = (sys.to_vec(), par.to_vec());
        if own_sys {
            s[i] = ErasureMessage::Erased;
        } else {
            p[i] = ErasureMessage::Erased;
        }
        let mut seen = 0u8;
        for cw in words.iter().filter(|cw| consistent(cw, &s, &p)) {
            let b = if own_sys { cw.0[i] } else { cw.1[i] };
            seen |= 1 << b;
        }
        match seen {
            0b01 => ErasureMessage::Zero,
            0b10 => ErasureMessage::One,
            _ => ErasureMessage::Erased,
        }
    };
    (
        (0..n).map(|i| decide(true, i)).collect(),
        (0..n).map(|i| decide(false, i)).collect(),
    )
}

fn observe(bits: &[u8], erased: &[bool]) -> Vec<ErasureMessage> {
    bits.iter()
        .zip(erased)
        .map(|(&b, &e)| {
            if e {
                ErasureMessage::Erased
            } else {
                ErasureMessage::known(b)
            }
        })
        .collect()
}

#[test]
fn six_bit_block_with_three_erasures() {
    let t = Trellis::new(GeneratorPair::rsc_5_7()).unwrap();
    let u = [1, 0, 1, 1, 0, 1];
    let e = t.encode(&u, true);
    let words = codewords(&t, 6);
    // erase u1, the parity of step 2 and u4
    let mut es = vec![false; 8];
    let mut ep = vec![false; 8];
    es[1] = true;
    ep[2] = true;
    es[4] = true;
    let sys = observe(&e.systematic, &es);
    let par = observe(&e.parity, &ep);
    let ext = bcjr_erasure(&t, &sys, &par, true).unwrap();
    let (os, op) = oracle(&words, &sys, &par);
    assert_eq!(ext.sys, os);
    assert_eq!(ext.par, op);
    // with this little erased, every extrinsic is known
    assert!(ext.sys.iter().chain(&ext.par).all(|m| m.is_known()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_enumeration(
        k in 1usize..=10,
        seed in any::<u64>(),
        density in 0.0f64..1.0,
        code in 0usize..3,
    ) {
        let gen = [GeneratorPair::rsc_5_7(), GeneratorPair::new(0o1, 0o3).unwrap(), GeneratorPair::new(0o15, 0o13).unwrap()][code];
        let t = Trellis::new(gen).unwrap();
        let n = k + t.memory();
        let mut x = seed | 1;
        let mut next = || { x ^= x << 13; x ^= x >> 7; x ^= x << 17; x };
        let u: Vec<u8> = (0..k).map(|_| (next() & 1) as u8).collect();
        let e = t.encode(&u, true);
        let es: Vec<bool> = (0..n).map(|_| (next() % 1000) as f64 / 1000.0 < density).collect();
        let ep: Vec<bool> = (0..n).map(|_| (next() % 1000) as f64 / 1000.0 < density).collect();
        let sys = observe(&e.systematic, &es);
        let par = observe(&e.parity, &ep);
        let ext = bcjr_erasure(&t, &sys, &par, true).unwrap();
        let (os, op) = oracle(&codewords(&t, k), &sys, &par);
        prop_assert_eq!(ext.sys, os);
        prop_assert_eq!(ext.par, op);
    }
}
