mod common;

use sha2::{Digest, Sha256};

use common::{fixture_dir, manifest};
use seedscan::{mt_init, next_u32, randn, read_npy, Seed};

#[test]
fn manifest_checksums_match_files() {
    let m = manifest();
    assert_eq!(m.dtype, "<f4");
    assert!(m.generator.starts_with("torch"));
    assert!(m.entries.len() >= 12);
    for e in &m.entries {
        let path = fixture_dir().join(&e.file);
        let bytes = std::fs::read(&path).unwrap();
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(hex, e.sha256, "{}", e.file);

        let v = read_npy(&path).unwrap();
        assert_eq!(v.shape(), e.shape.as_slice(), "{}", e.file);
        let sum: f64 = v.data().iter().map(|&x| x as f64).sum();
        assert!(
            (sum - e.sum).abs() <= 1e-9 * e.sum.abs().max(1.0),
            "{}: {sum} vs {}",
            e.file,
            e.sum
        );
    }
}

#[test]
fn randn_matches_every_fixture_bitwise() {
    for e in manifest().entries {
        let want = read_npy(fixture_dir().join(&e.file)).unwrap();
        let got = randn(Seed(e.seed), &e.shape).unwrap();
        let mismatches = got
            .data()
            .iter()
            .zip(want.data())
            .filter(|(a, b)| a.to_bits() != b.to_bits())
            .count();
        assert_eq!(mismatches, 0, "{} ({} elements)", e.file, want.len());
        assert!(got.bit_eq(&want), "{}", e.file);
    }
}

#[test]
fn mt19937_matches_reference_outputs() {
    for c in manifest().mt19937.cases {
        let mut st = mt_init(Seed(c.seed));
        let mut v = 0;
        for _ in 0..c.index {
            v = next_u32(&mut st);
        }
        assert_eq!(v, c.value, "seed {} output #{}", c.seed, c.index);
    }
}
