use seedscan::search::mse_prefix;
use seedscan::secure::{bench_overhead, keystream};
use seedscan::{chacha_randn, Error, SecureSeed};

fn seed(fill: u8) -> SecureSeed {
    SecureSeed::new([fill; 32])
}

#[test]
fn every_key_bit_changes_the_first_block() {
    let base = seed(0x5a);
    let first = keystream(&base, 64);
    let z = chacha_randn(&base, &[8]).unwrap();
    for bit in 0..256 {
        let flipped = base.flip_bit(bit);
        assert_ne!(keystream(&flipped, 64), first, "bit {bit}");
        assert!(!chacha_randn(&flipped, &[8]).unwrap().bit_eq(&z), "bit {bit}");
    }
}

#[test]
fn single_bit_flips_give_independent_noise() {
    let base = seed(0x13);
    let a = chacha_randn(&base, &[1 << 14]).unwrap();
    for bit in (0..100).map(|i| i * 256 / 100) {
        let b = chacha_randn(&base.flip_bit(bit), &[1 << 14]).unwrap();
        let mse = mse_prefix(&a, &b, a.len()).unwrap();
        assert!((mse - 2.0).abs() <= 0.1, "bit {bit}: {mse}");
    }
}

#[test]
fn deterministic_and_standard_normal() {
    let k: SecureSeed = "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f"
        .parse()
        .unwrap();
    let a = chacha_randn(&k, &[16, 64, 64]).unwrap();
    assert!(a.bit_eq(&chacha_randn(&k, &[16, 64, 64]).unwrap()));
    for fill in 0..20 {
        let (mean, var) = chacha_randn(&seed(fill), &[1 << 16]).unwrap().moments();
        assert!(mean.abs() < 0.02 && (var - 1.0).abs() < 0.03, "{mean} {var}");
    }
}

#[test]
fn odd_counts_are_a_prefix_of_even_counts() {
    let k = seed(9);
    let long = chacha_randn(&k, &[10]).unwrap();
    let short = chacha_randn(&k, &[9]).unwrap();
    assert_eq!(&long.data()[..9], short.data());
}

#[test]
fn malformed_keys_are_rejected() {
    assert!(matches!(
        SecureSeed::from_key_bytes(&[0; 31]),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!("abcd".parse::<SecureSeed>(), Err(Error::InvalidArgument(_))));
    assert!(matches!(
        "zz".repeat(32).parse::<SecureSeed>(),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(chacha_randn(&seed(1), &[0]), Err(Error::InvalidArgument(_))));
}

#[test]
fn overhead_scales_linearly() {
    let small = bench_overhead(1 << 16).unwrap();
    let large = bench_overhead(1 << 20).unwrap();
    assert!(small.mt_seconds > 0.0 && small.chacha_seconds > 0.0);
    let per = |o: &seedscan::secure::Overhead| o.chacha_seconds / o.elements as f64;
    let r = per(&small) / per(&large);
    assert!((0.5..=2.0).contains(&r), "per-element cost ratio {r}");
    assert!(large.ratio < 32.0, "{}", large.ratio);
}
