#![allow(dead_code)]

use gf_flush::{BitVector, CircuitSpec, LfsrSpec, MisrSpec, ScanChainSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_bits(rng: &mut impl Rng, len: usize) -> BitVector {
    BitVector::from_fn(len, |_| rng.random())
}

/// Taps with `c_0 = 1` and the rest fair coin flips.
pub fn random_lfsr(rng: &mut impl Rng, lambda: usize) -> LfsrSpec {
    let mut taps = random_bits(rng, lambda);
    taps.set(0, true);
    LfsrSpec::new(taps).unwrap()
}

pub fn random_direct(rng: &mut impl Rng, lambda: usize, b: usize, shadow: bool) -> CircuitSpec {
    let lfsr = random_lfsr(rng, lambda);
    CircuitSpec::direct(lfsr, ScanChainSpec::new(lambda, b, shadow).unwrap()).unwrap()
}

pub fn random_compressed(rng: &mut impl Rng, h: usize, n: usize, shadow: bool, random_d: bool) -> CircuitSpec {
    let lfsr = random_lfsr(rng, h * n);
    let misr = if random_d {
        let mut d = random_bits(rng, h);
        d.set(0, true);
        MisrSpec::new(d).unwrap()
    } else {
        MisrSpec::all_ones(h).unwrap()
    };
    CircuitSpec::compressed(lfsr, misr, shadow).unwrap()
}
