mod common;

use common::{random_bits, random_compressed, random_direct, random_lfsr, rng};
use gf_flush::attack::{coefficient_row, misr_signature_rows};
use gf_flush::{BitVector, CircuitSpec, LfsrSpec, Oracle};
use rand::Rng;

#[test]
fn state_at_matches_iterated_steps() {
    let mut r = rng(1);
    for _ in 0..1000 {
        let lambda = r.random_range(2..=24);
        let spec = random_lfsr(&mut r, lambda);
        let seed = random_bits(&mut r, lambda);
        let t = r.random_range(0..=256u64);
        let mut s = seed.clone();
        for _ in 0..t {
            s = spec.step(&s);
        }
        assert_eq!(spec.state_at(&seed, t).unwrap(), s);
    }
}

#[test]
fn step_is_linear() {
    let mut r = rng(2);
    for _ in 0..500 {
        let lambda = r.random_range(2..=130);
        let spec = random_lfsr(&mut r, lambda);
        let u = random_bits(&mut r, lambda);
        let v = random_bits(&mut r, lambda);
        let lhs = spec.step(&u.xor(&v).unwrap());
        let rhs = spec.step(&u).xor(&spec.step(&v)).unwrap();
        assert_eq!(lhs, rhs);
    }
}

fn period(spec: &LfsrSpec, seed: &BitVector) -> u64 {
    let mut s = spec.step(seed);
    let mut p = 1;
    while s != *seed {
        s = spec.step(&s);
        p += 1;
    }
    p
}

#[test]
fn primitive_taps_visit_every_nonzero_state() {
    // x^4 + x + 1 and x^5 + x^2 + 1 are primitive; feedback taps c_0 and
    // c_1 resp. c_0 and c_2.
    for taps in ["1100", "10100"] {
        let spec = LfsrSpec::new(taps.parse().unwrap()).unwrap();
        let lambda = spec.lambda();
        let full = (1u64 << lambda) - 1;
        for k in 1..=full {
            let seed = BitVector::from_fn(lambda, |i| (k >> i) & 1 == 1);
            assert_eq!(period(&spec, &seed), full, "taps {taps} seed {seed}");
        }
    }
    // x^4 + x^2 + 1 = (x^2 + x + 1)^2 is not.
    let spec = LfsrSpec::new("1010".parse().unwrap()).unwrap();
    assert!(period(&spec, &"1000".parse().unwrap()) < 15);
}

#[test]
fn flush_is_linear_in_seed() {
    let mut r = rng(3);
    for _ in 0..200 {
        let lambda = r.random_range(2..=40);
        let b = [1, 2, 4][r.random_range(0..3)];
        let spec = random_direct(&mut r, lambda, b, false);
        let seed = random_bits(&mut r, lambda);
        let outputs = 2 * lambda;
        let mut zero = Oracle::new(spec.clone(), BitVector::zeros(lambda)).unwrap();
        assert!(zero.flush_scan(outputs).unwrap().is_zero());
        let mut oracle = Oracle::new(spec.clone(), seed.clone()).unwrap();
        let observed = oracle.flush_scan(outputs).unwrap();
        let predicted = BitVector::from_fn(outputs, |m| coefficient_row(&spec, m).unwrap().dot(&seed).unwrap());
        assert_eq!(observed, predicted);
    }
}

#[test]
fn shadow_only_hides_early_inputs() {
    let mut r = rng(4);
    for _ in 0..200 {
        let lambda = r.random_range(2..=32);
        let b = r.random_range(1..=3);
        let spec = random_direct(&mut r, lambda, b, true);
        let n = spec.chain.len();
        let seed = random_bits(&mut r, lambda);
        let with = Oracle::new(spec.clone(), seed.clone())
            .unwrap()
            .flush_scan(n + 2 * lambda)
            .unwrap();
        let open = CircuitSpec {
            chain: spec.chain.with_shadow(false),
            ..spec.clone()
        };
        let without = Oracle::new(open, seed).unwrap().flush_scan(n + 2 * lambda).unwrap();
        for m in 0..n + 2 * lambda {
            if m < n {
                assert!(!with.get(m), "unkeyed output {m} must be zero");
            } else {
                assert_eq!(with.get(m), without.get(m), "output {m}");
            }
        }
    }
}

#[test]
fn misr_signature_is_linear_in_seed() {
    let mut r = rng(5);
    for _ in 0..100 {
        let h = [1, 2, 3, 4][r.random_range(0..4)];
        let n = r.random_range(2usize.div_ceil(h)..=6);
        let shadow = r.random();
        let spec = random_compressed(&mut r, h, n, shadow, true);
        let lambda = h * n;
        let s1 = random_bits(&mut r, lambda);
        let s2 = random_bits(&mut r, lambda);
        let run = |s: &BitVector| Oracle::new(spec.clone(), s.clone()).unwrap().run_rounds(3).unwrap();
        let (a, b, ab) = (run(&s1), run(&s2), run(&s1.xor(&s2).unwrap()));
        for k in 0..3 {
            assert_eq!(ab[k], a[k].xor(&b[k]).unwrap());
        }
    }
}

#[test]
fn rounds_keep_lfsr_running() {
    let mut r = rng(6);
    for _ in 0..50 {
        let h = r.random_range(1..=4);
        let n = r.random_range(2usize.div_ceil(h)..=5);
        let spec = random_compressed(&mut r, h, n, false, false);
        let seed = random_bits(&mut r, h * n);
        let k = r.random_range(0..=4);
        let mut oracle = Oracle::new(spec.clone(), seed.clone()).unwrap();
        let sigs = oracle.run_rounds(k).unwrap();
        assert_eq!(sigs.len(), k);
        assert_eq!(oracle.cycle(), (2 * n * k) as u64);
        assert_eq!(
            oracle.state().lfsr,
            spec.lfsr.state_at(&seed, (2 * n * k) as u64).unwrap()
        );
    }
}

#[test]
fn n_rounds_yield_lambda_signature_bits() {
    let mut r = rng(7);
    let spec = random_compressed(&mut r, 4, 3, false, false);
    let mut oracle = Oracle::new(spec, random_bits(&mut r, 12)).unwrap();
    let total: usize = oracle.run_rounds(3).unwrap().iter().map(BitVector::len).sum();
    assert_eq!(total, 12);
}

#[test]
fn misr_simulation_matches_symbolic_rows() {
    let mut r = rng(8);
    for _ in 0..300 {
        let h = r.random_range(1..=4);
        let n = r.random_range(2usize.div_ceil(h)..=12 / h);
        let (shadow, random_d) = (r.random(), r.random());
        let spec = random_compressed(&mut r, h, n, shadow, random_d);
        let seed = random_bits(&mut r, h * n);
        let rounds = n + 1;
        let sigs = Oracle::new(spec.clone(), seed.clone())
            .unwrap()
            .run_rounds(rounds)
            .unwrap();
        let rows = misr_signature_rows(&spec, rounds).unwrap();
        for (round, sig) in sigs.iter().enumerate() {
            for i in 0..h {
                assert_eq!(
                    rows.row(round * h + i).dot(&seed).unwrap(),
                    sig.get(i),
                    "round {round} stage {i}"
                );
            }
        }
    }
}
