//! Footprint of uncertainty: upper and lower Gaussian-sum membership
//! functions bounding the smoothed histogram.

use crate::error::Result;
use crate::gaussfit::{fit_mixture, FitConfig, MixtureFit, MAX_HEIGHT};
use crate::histogram::NormalizedHistogram;
use crate::{Series, LEVELS};

#[derive(Debug, Clone, PartialEq)]
pub struct Fou {
    /// Mixture fitted to `U(g) = max(G(g), H(g))`.
    pub umf_fit: MixtureFit,
    /// Mixture fitted to `L(g) = min(G(g), H(g))`.
    pub lmf_fit: MixtureFit,
    /// `umf_fit` evaluated per level, after ordering enforcement.
    pub umf: Series,
    /// `lmf_fit` evaluated per level, after ordering enforcement.
    pub lmf: Series,
    /// Levels at which the independently fitted curves crossed and were swapped.
    pub swapped_levels: usize,
}

/// `(U, L)` with `U = max(G, H)` and `L = min(G, H)` at every level, where
/// `G` is the stage-one mixture.
pub fn bound_functions(h: &NormalizedHistogram, fit: &MixtureFit) -> (Series, Series) {
    let g = fit.series();
    let mut upper = [0.0; LEVELS];
    let mut lower = [0.0; LEVELS];
    for k in 0..LEVELS {
        upper[k] = g[k].max(h.values()[k]);
        lower[k] = g[k].min(h.values()[k]);
    }
    (upper, lower)
}

/// Fits the UMF and LMF, warm-started from the stage-one parameters, and
/// swaps the evaluated series pointwise wherever `lmf > umf`. Both series
/// are capped at the component height limit.
pub fn extract_fou(h: &NormalizedHistogram, fit: &MixtureFit, cfg: &FitConfig) -> Result<Fou> {
    let (upper, lower) = bound_functions(h, fit);
    let umf_fit = fit_mixture(&upper, fit, cfg)?;
    let lmf_fit = fit_mixture(&lower, fit, cfg)?;
    let mut umf = umf_fit.series().map(|v| v.min(MAX_HEIGHT));
    let mut lmf = lmf_fit.series().map(|v| v.min(MAX_HEIGHT));
    let mut swapped_levels = 0;
    for g in 0..LEVELS {
        if lmf[g] > umf[g] {
            std::mem::swap(&mut lmf[g], &mut umf[g]);
            swapped_levels += 1;
        }
    }
    Ok(Fou {
        umf_fit,
        lmf_fit,
        umf,
        lmf,
        swapped_levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussfit::{heuristic_init, Gaussian1D};
    use proptest::prelude::*;

    fn hist(values: Series) -> NormalizedHistogram {
        NormalizedHistogram::from_values(values).unwrap()
    }

    #[test]
    fn equal_curves_give_equal_bounds() {
        let fit = MixtureFit::from_gaussians(vec![Gaussian1D::new(0.9, 120.0, 20.0)]).unwrap();
        let h = hist(fit.series());
        let (u, l) = bound_functions(&h, &fit);
        assert_eq!(u, *h.values());
        assert_eq!(l, *h.values());
    }

    #[test]
    fn zero_histogram_bounds() {
        let fit = MixtureFit::from_gaussians(vec![Gaussian1D::new(0.9, 120.0, 20.0)]).unwrap();
        let h = hist([0.0; LEVELS]);
        let (u, l) = bound_functions(&h, &fit);
        assert_eq!(u, fit.series());
        assert!(l.iter().all(|&v| v == 0.0));
    }

    proptest! {
        #[test]
        fn bounds_sandwich(
            values in proptest::collection::vec(0.0f64..=1.0, LEVELS),
            a in 0.1f64..1.5, mu in 0.0f64..255.0, sigma in 2.0f64..80.0,
        ) {
            let mut arr = [0.0; LEVELS];
            arr.copy_from_slice(&values);
            let h = hist(arr);
            let fit = MixtureFit::from_gaussians(vec![Gaussian1D::new(a, mu, sigma)]).unwrap();
            let g = fit.series();
            let (u, l) = bound_functions(&h, &fit);
            for k in 0..LEVELS {
                prop_assert_eq!(u[k], if arr[k] > g[k] { arr[k] } else { g[k] });
                prop_assert_eq!(l[k], if arr[k] < g[k] { arr[k] } else { g[k] });
                prop_assert!(u[k] >= arr[k] && arr[k] >= l[k]);
                prop_assert!(u[k] >= g[k] && g[k] >= l[k]);
            }
        }
    }

    #[test]
    fn exact_fit_collapses_the_footprint() {
        let truth = Gaussian1D::new(0.95, 110.0, 18.0);
        let h = hist(truth.series());
        let cfg = FitConfig::default();
        let init = heuristic_init(&h, &cfg).unwrap();
        let fit = fit_mixture(h.values(), &init, &cfg).unwrap();
        let fou = extract_fou(&h, &fit, &cfg).unwrap();
        let g = truth.series();
        for k in 0..LEVELS {
            let tol = 0.02 * truth.a;
            assert!((fou.umf[k] - g[k]).abs() <= tol, "umf at {k}");
            assert!((fou.lmf[k] - g[k]).abs() <= tol, "lmf at {k}");
        }
    }

    #[test]
    fn positive_bumps_leave_lower_bound_on_the_fit() {
        let base = Gaussian1D::new(0.8, 100.0, 20.0);
        let fit = MixtureFit::from_gaussians(vec![base]).unwrap();
        let mut values = base.series();
        for k in 60..140 {
            values[k] = (values[k] + 0.05 * ((k as f64) * 0.3).sin().abs()).min(1.0);
        }
        let h = hist(values);
        let cfg = FitConfig::default();
        let (_, lower) = bound_functions(&h, &fit);
        assert_eq!(lower, fit.series());
        let fou = extract_fou(&h, &fit, &cfg).unwrap();
        for k in 0..LEVELS {
            assert!((fou.lmf[k] - lower[k]).abs() < 0.01, "level {k}");
        }
    }

    #[test]
    fn ordering_and_component_counts() {
        let comps = [
            Gaussian1D::new(0.9, 70.0, 15.0),
            Gaussian1D::new(0.6, 170.0, 25.0),
        ];
        let mut values = [0.0; LEVELS];
        for (k, v) in values.iter_mut().enumerate() {
            let noise = 0.04 * ((k * 7919 % 97) as f64 / 97.0 - 0.5);
            *v = (comps.iter().map(|c| c.eval(k as f64)).sum::<f64>() + noise).clamp(0.0, 1.0);
        }
        let h = hist(values);
        let cfg = FitConfig::default();
        let init = heuristic_init(&h, &cfg).unwrap();
        let fit = fit_mixture(h.values(), &init, &cfg).unwrap();
        let fou = extract_fou(&h, &fit, &cfg).unwrap();
        assert_eq!(fou.umf_fit.len(), fit.len());
        assert_eq!(fou.lmf_fit.len(), fit.len());
        for k in 0..LEVELS {
            assert!(fou.lmf[k] <= fou.umf[k]);
            assert!((0.0..=1.5).contains(&fou.umf[k]));
            assert!((0.0..=1.5).contains(&fou.lmf[k]));
        }
    }
}
