//! One-time-pad layer of the chosen-secret model.
//!
//! The embedded key is added to a generated key modulo the key-space size
//! and the decoder subtracts its estimate of the generated key. Keys are
//! plain indices in `[0, |S|)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KeySpace {
    size: usize,
}

impl KeySpace {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Empty("key space"));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn check(&self, index: usize) -> Result<()> {
        if index < self.size {
            Ok(())
        } else {
            Err(Error::KeyIndex {
                index,
                size: self.size,
            })
        }
    }
}

/// Masks the chosen key `s` with the generated key `s_gen`.
pub fn otp_wrap(s: usize, s_gen: usize, ks: KeySpace) -> Result<usize> {
    ks.check(s)?;
    ks.check(s_gen)?;
    Ok((s_gen + s) % ks.size)
}

/// Removes the mask using the decoder's estimate `s_gen_hat`.
pub fn otp_unwrap(masked: usize, s_gen_hat: usize, ks: KeySpace) -> Result<usize> {
    ks.check(masked)?;
    ks.check(s_gen_hat)?;
    Ok((masked + ks.size - s_gen_hat) % ks.size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wrap_examples() {
        let ks = KeySpace::new(7).unwrap();
        for k in 0..7 {
            assert_eq!(otp_wrap(0, k, ks).unwrap(), k);
        }
        assert_eq!(otp_wrap(3, 5, ks).unwrap(), 1);
        assert_eq!(otp_unwrap(1, 5, ks).unwrap(), 3);
    }

    #[test]
    fn out_of_range_indices() {
        let ks = KeySpace::new(4).unwrap();
        assert_eq!(otp_wrap(4, 0, ks), Err(Error::KeyIndex { index: 4, size: 4 }));
        assert!(otp_wrap(0, 9, ks).is_err());
        assert!(otp_unwrap(5, 0, ks).is_err());
        assert!(otp_unwrap(0, 4, ks).is_err());
        assert!(KeySpace::new(0).is_err());
    }

    #[test]
    fn wrong_generated_key_gives_wrong_key() {
        let ks = KeySpace::new(16).unwrap();
        for s in 0..16 {
            for k in 0..16 {
                let masked = otp_wrap(s, k, ks).unwrap();
                for k_hat in 0..16 {
                    let recovered = otp_unwrap(masked, k_hat, ks).unwrap();
                    assert_eq!(recovered == s, k_hat == k);
                }
            }
        }
    }

    #[test]
    fn sampled_masked_key_is_uniform() {
        let ks = KeySpace::new(10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 100_000;
        let mut counts = [0usize; 10];
        for _ in 0..draws {
            let s = rng.gen_range(0..10);
            // A skewed generated key: the pad still hides it.
            let k = if rng.gen_bool(0.7) { 0 } else { rng.gen_range(0..10) };
            counts[otp_wrap(s, k, ks).unwrap()] += 1;
        }
        for c in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 0.1).abs() < 0.01, "{freq}");
        }
    }

    #[test]
    fn exhaustive_round_trip() {
        for n in 1..=64 {
            let ks = KeySpace::new(n).unwrap();
            for s in 0..n {
                for k in 0..n {
                    assert_eq!(otp_unwrap(otp_wrap(s, k, ks).unwrap(), k, ks).unwrap(), s);
                }
            }
        }
    }

    #[test]
    fn exact_masking_is_perfect() {
        // Count (s, k) pairs behind every (masked, k): with s uniform each
        // pair has mass 1/n², so independence means a count of exactly 1.
        for n in 1..=16 {
            let ks = KeySpace::new(n).unwrap();
            let mut joint = vec![vec![0u32; n]; n];
            for s in 0..n {
                for k in 0..n {
                    joint[otp_wrap(s, k, ks).unwrap()][k] += 1;
                }
            }
            assert!(joint.iter().flatten().all(|&c| c == 1), "size {n}");
        }
    }
}
