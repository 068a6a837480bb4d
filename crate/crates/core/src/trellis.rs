//! Rate-1/2 systematic recursive convolutional encoders and their trellises.
//!
//! Generator polynomials use the usual octal notation: the digit string is read
//! MSB-first and the lowest bit is the constant term, so `(1, 5/7)` is the code
//! with feedforward `1 + D^2` and feedback `1 + D + D^2`.
//!
//! The state realization is controller canonical form. For memory `nu` the
//! state holds the last `nu` register values `a_{k-1} .. a_{k-nu}` with
//! `a_{k-1}` in bit 0.

use std::fmt;
use std::str::FromStr;

use crate::Error;

/// Largest supported encoder memory. State sets are stored as `u64` bitmasks.
pub const MAX_MEMORY: usize = 6;

/// Feedforward/feedback pair of a rate-1/2 recursive systematic encoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GeneratorPair {
    pub feedforward: u32,
    pub feedback: u32,
}

impl GeneratorPair {
    pub fn new(feedforward: u32, feedback: u32) -> Result<Self, Error> {
        let gen = Self {
            feedforward,
            feedback,
        };
        gen.validate()?;
        Ok(gen)
    }

    /// Parses octal digits, e.g. `GeneratorPair::from_octal("5", "7")`.
    pub fn from_octal(feedforward: &str, feedback: &str) -> Result<Self, Error> {
        let parse = |s: &str| {
            u32::from_str_radix(s.trim(), 8)
                .map_err(|_| Error::InvalidGenerator(format!("`{s}` is not an octal polynomial")))
        };
        Self::new(parse(feedforward)?, parse(feedback)?)
    }

    /// The `(1, 5/7)` code used throughout.
    pub fn rsc_5_7() -> Self {
        Self {
            feedforward: 0o5,
            feedback: 0o7,
        }
    }

    pub fn memory(&self) -> usize {
        let deg = |p: u32| 31 - p.leading_zeros() as usize;
        deg(self.feedforward).max(deg(self.feedback))
    }

    fn validate(&self) -> Result<(), Error> {
        if self.feedback == 0 || self.feedforward == 0 {
            return Err(Error::InvalidGenerator("zero polynomial".into()));
        }
        if self.feedback & 1 == 0 {
            return Err(Error::InvalidGenerator(format!(
                "feedback {:o} has no constant term",
                self.feedback
            )));
        }
        let nu = self.memory();
        if nu == 0 {
            return Err(Error::InvalidGenerator(
                "encoder memory must be at least 1".into(),
            ));
        }
        if nu > MAX_MEMORY {
            return Err(Error::InvalidGenerator(format!(
                "memory {nu} exceeds the supported maximum {MAX_MEMORY}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for GeneratorPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1,{:o}/{:o}", self.feedforward, self.feedback)
    }
}

impl FromStr for GeneratorPair {
    type Err = Error;

    /// Accepts `"1,5/7"` or `"5/7"`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let body = match s.split_once(',') {
            Some((sys, rest)) => {
                if sys.trim() != "1" {
                    return Err(Error::InvalidGenerator(format!(
                        "`{s}`: only systematic encoders (leading `1,`) are supported"
                    )));
                }
                rest
            }
            None => s,
        };
        let (ff, fb) = body.split_once('/').ok_or_else(|| {
            Error::InvalidGenerator(format!("`{s}`: expected feedforward/feedback"))
        })?;
        Self::from_octal(ff, fb)
    }
}

/// One trellis branch leaving a state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Branch {
    pub next: usize,
    pub parity: u8,
}

/// Precomputed, immutable trellis of a recursive systematic encoder.
#[derive(Clone, Debug)]
pub struct Trellis {
    gen: GeneratorPair,
    memory: usize,
    /// `branches[state][input]`; the systematic output always equals `input`.
    branches: Vec<[Branch; 2]>,
    /// Input bits driving each state to zero in `memory` steps.
    termination: Vec<Vec<u8>>,
}

impl Trellis {
    pub fn new(gen: GeneratorPair) -> Result<Self, Error> {
        gen.validate()?;
        let nu = gen.memory();
        let num_states = 1usize << nu;
        let mut branches = Vec::with_capacity(num_states);
        for state in 0..num_states {
            branches.push([0u8, 1].map(|u| {
                let (next, parity, _) = step(&gen, nu, state, u);
                Branch { next, parity }
            }));
        }
        let termination = (0..num_states)
            .map(|start| {
                let mut s = start;
                let mut tail = Vec::with_capacity(nu);
                for _ in 0..nu {
                    let u = feedback_sum(&gen, nu, s);
                    tail.push(u);
                    s = branches[s][u as usize].next;
                }
                debug_assert_eq!(s, 0);
                tail
            })
            .collect();
        Ok(Self {
            gen,
            memory: nu,
            branches,
            termination,
        })
    }

    pub fn generators(&self) -> GeneratorPair {
        self.gen
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn num_states(&self) -> usize {
        self.branches.len()
    }

    /// Bitmask with every state set.
    pub fn all_states(&self) -> u64 {
        if self.num_states() == 64 {
            u64::MAX
        } else {
            (1u64 << self.num_states()) - 1
        }
    }

    #[inline]
    pub fn branch(&self, state: usize, input: u8) -> Branch {
        self.branches[state][input as usize]
    }

    pub fn termination_inputs(&self, state: usize) -> &[u8] {
        &self.termination[state]
    }

    /// Encodes `input` starting from state 0. With `terminate`, `memory()` tail
    /// inputs are appended so the encoder ends in state 0; they show up in the
    /// systematic output.
    pub fn encode(&self, input: &[u8], terminate: bool) -> Encoded {
        self.encode_from(0, input, terminate)
    }

    pub fn encode_from(&self, start: usize, input: &[u8], terminate: bool) -> Encoded {
        let n = input.len() + if terminate { self.memory } else { 0 };
        let mut systematic = Vec::with_capacity(n);
        let mut parity = Vec::with_capacity(n);
        let mut state = start;
        for &u in input {
            let b = self.branch(state, u & 1);
            systematic.push(u & 1);
            parity.push(b.parity);
            state = b.next;
        }
        if terminate {
            let tail = &self.termination[state];
            for &u in tail {
                let b = self.branch(state, u);
                systematic.push(u);
                parity.push(b.parity);
                state = b.next;
            }
        }
        Encoded {
            systematic,
            parity,
            final_state: state,
        }
    }
}

/// Output of [`Trellis::encode`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Encoded {
    pub systematic: Vec<u8>,
    pub parity: Vec<u8>,
    pub final_state: usize,
}

fn coeff(poly: u32, i: usize) -> u8 {
    ((poly >> i) & 1) as u8
}

/// `sum_{i=1..nu} g_fb[i] a_{k-i}` for the register contents in `state`.
fn feedback_sum(gen: &GeneratorPair, nu: usize, state: usize) -> u8 {
    (1..=nu).fold(0, |acc, i| {
        acc ^ (coeff(gen.feedback, i) & ((state >> (i - 1)) & 1) as u8)
    })
}

fn step(gen: &GeneratorPair, nu: usize, state: usize, u: u8) -> (usize, u8, u8) {
    let a = u ^ feedback_sum(gen, nu, state);
    let mut parity = coeff(gen.feedforward, 0) & a;
    for i in 1..=nu {
        parity ^= coeff(gen.feedforward, i) & ((state >> (i - 1)) & 1) as u8;
    }
    let mask = (1usize << nu) - 1;
    let next = ((state << 1) | a as usize) & mask;
    (next, parity, a)
}
