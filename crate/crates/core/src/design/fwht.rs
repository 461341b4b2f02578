use crate::error::{Error, Result};

/// Unnormalized in-place Walsh–Hadamard transform in Sylvester (natural)
/// order: `v ← H_m·v` with `H_m[i][j] = (−1)^{popcount(i & j)}`.
///
/// Applying it twice multiplies the input by its length.
pub fn fwht_in_place(v: &mut [f64]) -> Result<()> {
    let len = v.len();
    if !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    // The stages act on different index bits and commute, so the short
    // strides run block by block while each block sits in cache.
    let block = len.min(CACHE_BLOCK);
    for chunk in v.chunks_exact_mut(block) {
        let mut half = 1;
        while half < block {
            if 4 * half <= block {
                radix4_stage(chunk, half);
                half *= 4;
            } else {
                radix2_stage(chunk, half);
                half *= 2;
            }
        }
    }
    let mut half = block;
    while half < len {
        if 4 * half <= len {
            radix4_stage(v, half);
            half *= 4;
        } else {
            radix2_stage(v, half);
            half *= 2;
        }
    }
    Ok(())
}

/// Elements per cache-resident block (32 KiB of `f64`).
const CACHE_BLOCK: usize = 1 << 12;

fn radix2_stage(v: &mut [f64], half: usize) {
    for block in v.chunks_exact_mut(2 * half) {
        let (lo, hi) = block.split_at_mut(half);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = x + y;
            *b = x - y;
        }
    }
}

/// Two consecutive stages, strides `half` and `2·half`, in one pass.
fn radix4_stage(v: &mut [f64], half: usize) {
    for block in v.chunks_exact_mut(4 * half) {
        let (q01, q23) = block.split_at_mut(2 * half);
        let (q0, q1) = q01.split_at_mut(half);
        let (q2, q3) = q23.split_at_mut(half);
        for (((a, b), c), d) in q0
            .iter_mut()
            .zip(q1.iter_mut())
            .zip(q2.iter_mut())
            .zip(q3.iter_mut())
        {
            let (s0, d0) = (*a + *b, *a - *b);
            let (s1, d1) = (*c + *d, *c - *d);
            *a = s0 + s1;
            *b = d0 + d1;
            *c = s0 - s1;
            *d = d0 - d1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive(v: &[f64]) -> Vec<f64> {
        (0..v.len())
            .map(|i| {
                v.iter()
                    .enumerate()
                    .map(|(j, &x)| if (i & j).count_ones() % 2 == 0 { x } else { -x })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn two_point() {
        let mut v = [1.0, 0.0];
        fwht_in_place(&mut v).unwrap();
        assert_eq!(v, [1.0, 1.0]);
        let mut v = [1.0, 1.0];
        fwht_in_place(&mut v).unwrap();
        assert_eq!(v, [2.0, 0.0]);
    }

    #[test]
    fn length_one_is_identity() {
        let mut v = [3.5];
        fwht_in_place(&mut v).unwrap();
        assert_eq!(v, [3.5]);
    }

    #[test]
    fn involution_up_to_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let orig: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut v = orig.clone();
        fwht_in_place(&mut v).unwrap();
        let brute = naive(&orig);
        for (a, b) in v.iter().zip(&brute) {
            assert!((a - b).abs() < 1e-12);
        }
        fwht_in_place(&mut v).unwrap();
        for (a, b) in v.iter().zip(&orig) {
            assert!((a - 16.0 * b).abs() < 1e-10);
        }
    }

    #[test]
    fn matches_naive_up_to_1024() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for m in 0..=10 {
            let orig: Vec<f64> = (0..1usize << m)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let mut v = orig.clone();
            fwht_in_place(&mut v).unwrap();
            for (a, b) in v.iter().zip(naive(&orig)) {
                assert!((a - b).abs() < 1e-9, "m={m}");
            }
        }
    }

    #[test]
    fn blocked_lengths_match_entrywise() {
        // beyond one cache block, spot-check entries against the definition
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for m in [12, 13, 15, 17] {
            let len = 1usize << m;
            let orig: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut v = orig.clone();
            fwht_in_place(&mut v).unwrap();
            for _ in 0..20 {
                let i = rng.random_range(0..len);
                let want: f64 = orig
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| if (i & j).count_ones() % 2 == 0 { x } else { -x })
                    .sum();
                assert!((v[i] - want).abs() < 1e-8, "m={m} i={i}");
            }
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert_eq!(fwht_in_place(&mut [0.0; 6]), Err(Error::NotPowerOfTwo(6)));
        assert_eq!(fwht_in_place(&mut []), Err(Error::NotPowerOfTwo(0)));
    }
}
