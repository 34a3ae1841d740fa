//! Average information content (Shannon entropy in bits) of a gray-level
//! distribution.

use crate::histogram::ProbabilityHistogram;
use crate::imagio::GrayImage;

/// `−Σ p·log₂ p` over levels with non-zero probability.
pub fn aic(p: &ProbabilityHistogram) -> f64 {
    p.values()
        .iter()
        .filter(|&&v| v > 0.0)
        .fold(0.0, |acc, &v| acc - v * v.log2())
}

pub fn aic_of_image(img: &GrayImage) -> f64 {
    aic(&ProbabilityHistogram::of_image(img))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Series, LEVELS};
    use proptest::prelude::*;

    fn prob(values: Series) -> ProbabilityHistogram {
        ProbabilityHistogram::new(values).unwrap()
    }

    fn normalize(w: &[f64]) -> Series {
        let s: f64 = w.iter().sum();
        let mut p = [0.0; LEVELS];
        for (g, v) in w.iter().enumerate() {
            p[g] = v / s;
        }
        p
    }

    #[test]
    fn anchors() {
        assert_eq!(aic(&prob([1.0 / 256.0; LEVELS])), 8.0);
        let mut d = [0.0; LEVELS];
        d[42] = 1.0;
        assert_eq!(aic(&prob(d)), 0.0);
        let mut h = [0.0; LEVELS];
        h[3] = 0.5;
        h[200] = 0.5;
        assert_eq!(aic(&prob(h)), 1.0);
    }

    #[test]
    fn image_entropy() {
        let img = GrayImage::new(256, 1, (0..=255).collect()).unwrap();
        assert_eq!(aic_of_image(&img), 8.0);
        assert_eq!(aic_of_image(&GrayImage::filled(3, 3, 9).unwrap()), 0.0);
    }

    proptest! {
        #[test]
        fn matches_surprisal_accumulation(w in proptest::collection::vec(0.0f64..5.0, LEVELS)) {
            prop_assume!(w.iter().sum::<f64>() > 0.0);
            let p = normalize(&w);
            // average surprisal h = log2(1/p), weighted by occurrence
            let mut expected = 0.0;
            for &v in &p {
                if v > 0.0 {
                    expected += v * (1.0 / v).log2();
                }
            }
            prop_assert!((aic(&prob(p)) - expected).abs() < 1e-12);
        }

        #[test]
        fn bounded_by_support(w in proptest::collection::vec(0.0f64..5.0, LEVELS), zeros in 0usize..255) {
            let mut w = w;
            for v in w.iter_mut().take(zeros) {
                *v = 0.0;
            }
            prop_assume!(w.iter().sum::<f64>() > 0.0);
            let p = normalize(&w);
            let support = p.iter().filter(|&&v| v > 0.0).count() as f64;
            let e = aic(&prob(p));
            prop_assert!(e >= 0.0);
            prop_assert!(e <= support.log2() + 1e-12);
        }

        #[test]
        fn permutation_invariant(w in proptest::collection::vec(0.0f64..5.0, LEVELS), shift in 0usize..256) {
            prop_assume!(w.iter().sum::<f64>() > 0.0);
            let p = normalize(&w);
            let mut rotated = [0.0; LEVELS];
            for g in 0..LEVELS {
                rotated[(g + shift) % LEVELS] = p[g];
            }
            let mut reversed = p;
            reversed.reverse();
            let e = aic(&prob(p));
            prop_assert!((aic(&prob(rotated)) - e).abs() < 1e-12);
            prop_assert!((aic(&prob(reversed)) - e).abs() < 1e-12);
        }
    }

    #[test]
    fn merging_equal_masses_loses_information() {
        let w: Vec<f64> = (0..LEVELS).map(|g| 1.0 + (g % 5) as f64).collect();
        let mut p = normalize(&w);
        // levels 10 and 15 both carry weight 1
        assert_eq!(p[10], p[15]);
        let before = aic(&prob(p));
        p[10] += p[15];
        p[15] = 0.0;
        let after = aic(&prob(p));
        assert!(after < before);
        // two masses q merged into 2q cost exactly 2q bits
        assert!((before - after - p[10]).abs() < 1e-12);
    }
}
