mod common;

use polyscot::lora::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

fn shape() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (2usize..10, 2usize..10, any::<u64>())
        .prop_flat_map(|(d, k, s)| (Just(d), Just(k), 1..d.min(k), Just(s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn zero_onset_is_bitwise(( d, k, r, seed) in shape()) {
        let ad = init_adapter(d, k, r, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let w0 = random(&mut rng, d, k);
        let merged = merge(&ad, &w0).unwrap();
        prop_assert!(merged.data().iter().zip(w0.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn forward_matches_merged_product((d, k, r, seed) in shape(), m in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ad = init_adapter(d, k, r, seed).unwrap();
        ad.b = random(&mut rng, d, r);
        ad.scale = rng.gen_range(0.0..2.0);
        let w0 = random(&mut rng, d, k);
        let x = random(&mut rng, k, m);
        let lhs = forward(&ad, &w0, &x).unwrap();
        let merged = merge(&ad, &w0).unwrap();
        let rhs = common::matmul(merged.data(), x.data(), d, k, m);
        let diff = lhs.data().iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(diff <= 1e-9, "{diff}");
    }

    #[test]
    fn delta_rank_is_at_most_r((d, k, r, seed) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ad = init_adapter(d, k, r, seed).unwrap();
        ad.b = random(&mut rng, d, r);
        let w0 = random(&mut rng, d, k);
        let delta = merge(&ad, &w0).unwrap().add_scaled(&w0, -1.0).unwrap();
        prop_assert!(common::rank(d, k, delta.data(), 1e-9) <= r);
    }
}

#[test]
fn rank_oracle_sanity() {
    assert_eq!(common::rank(2, 2, &[1.0, 0.0, 0.0, 1.0], 1e-9), 2);
    assert_eq!(common::rank(2, 2, &[1.0, 2.0, 2.0, 4.0], 1e-9), 1);
    assert_eq!(common::rank(3, 3, &[0.0; 9], 1e-9), 0);
}
