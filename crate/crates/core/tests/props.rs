//! Randomized round-trip and invariant checks.

use obfusc::image::minmax_normalize;
use obfusc::obf1::{decode_obf1, encode_obf1};
use obfusc::obfuscate::make_permutation;
use obfusc::pgm::{encode_pgm, parse_pgm};
use obfusc::ImageMatrix;
use proptest::prelude::*;

fn arb_image() -> impl Strategy<Value = ImageMatrix> {
    (1usize..12, 1usize..12)
        .prop_flat_map(|(h, w)| {
            (
                Just(h),
                Just(w),
                proptest::collection::vec(-10.0f64..10.0, h * w),
                any::<bool>(),
            )
        })
        .prop_map(|(h, w, values, unbounded)| {
            let mut img = ImageMatrix::from_vec(h, w, values).unwrap();
            img.unbounded = unbounded;
            img
        })
}

proptest! {
    #[test]
    fn obf1_round_trips_bit_exactly(img in arb_image()) {
        let bytes = encode_obf1(&img);
        let back = decode_obf1(&bytes).unwrap();
        prop_assert!(img.bit_eq(&back));
        prop_assert_eq!(img.unbounded, back.unbounded);
    }

    #[test]
    fn pgm_round_trips_quantized_images(h in 1usize..10, w in 1usize..10, bytes in proptest::collection::vec(any::<u8>(), 100)) {
        let values: Vec<f64> = bytes[..h * w].iter().map(|&b| b as f64 / 255.0).collect();
        let img = ImageMatrix::from_vec(h, w, values).unwrap();
        let encoded = encode_pgm(&img);
        let back = parse_pgm(&encoded).unwrap();
        prop_assert!(img.bit_eq(&back));
    }

    #[test]
    fn permutations_are_bijections(n in 1usize..200, seed in any::<u64>()) {
        let perm = make_permutation(n, seed);
        let mut seen = vec![false; n];
        for &target in &perm.mapping {
            prop_assert!(target < n);
            prop_assert!(!seen[target]);
            seen[target] = true;
        }
        let inv = perm.inverse();
        let coeffs: Vec<f64> = (0..n).map(|i| i as f64).collect();
        prop_assert_eq!(inv.apply(&perm.apply(&coeffs)), coeffs);
    }

    #[test]
    fn minmax_output_stays_in_unit_range(img in arb_image()) {
        let norm = minmax_normalize(&img);
        prop_assert!(!norm.unbounded);
        for &v in &norm.values {
            prop_assert!((0.0..=1.0).contains(&v), "value {} out of range", v);
        }
    }
}
