//! Desired-PDF generation from membership values.
//!
//! Within the reach of component `i` (center `μ`, crossovers `c₁ ≤ c₂`) the
//! un-normalized probability is piecewise linear in `g`:
//!
//! ```text
//! P(g) = T + 2·mv(g)·((μ + c₁)/2 − g)   if g < μ
//! P(g) = T − 2·mv(g)·((μ + c₂)/2 − g)   otherwise
//! ```
//!
//! with `T = 255`, so levels far from a peak receive more probability than
//! levels near it. The KM variant uses the cluster center and bounds instead.

use crate::error::{Error, Result};
use crate::gaussfit::MixtureFit;
use crate::membership::KmMembershipValues;
use crate::{Series, LEVELS, MAX_LEVEL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdfSource {
    It2Upper,
    It2Lower,
    It2Mean,
    Km,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawPdf {
    pub values: Series,
    pub source: PdfSource,
}

/// Normalized, non-negative target distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DesiredPdf {
    p: Series,
}

impl DesiredPdf {
    pub fn values(&self) -> &Series {
        &self.p
    }

    /// Clamps negative weights to zero and normalizes to unit mass.
    pub fn from_weights(weights: &Series) -> Result<Self> {
        if weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("raw PDF contains non-finite values"));
        }
        let clamped = weights.map(|v| v.max(0.0));
        let sum: f64 = clamped.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::contract("raw PDF has no positive mass"));
        }
        Ok(Self {
            p: clamped.map(|v| v / sum),
        })
    }

    pub fn uniform() -> Self {
        Self {
            p: [1.0 / LEVELS as f64; LEVELS],
        }
    }
}

fn arm_value(mv: f64, g: f64, center: f64, lo: f64, hi: f64) -> f64 {
    if g < center {
        MAX_LEVEL + 2.0 * mv * ((center + lo) / 2.0 - g)
    } else {
        MAX_LEVEL - 2.0 * mv * ((center + hi) / 2.0 - g)
    }
}

/// Upper or lower raw PDF; `fit` supplies the centers and crossovers.
pub fn raw_pdf_it2(mv: &Series, fit: &MixtureFit, source: PdfSource) -> Result<RawPdf> {
    if !matches!(source, PdfSource::It2Upper | PdfSource::It2Lower) {
        return Err(Error::contract("raw_pdf_it2 produces upper or lower PDFs only"));
    }
    let mut values = [0.0; LEVELS];
    for (g, v) in values.iter_mut().enumerate() {
        let reach = fit.domain_reach(g);
        let mu = fit.gaussians[reach.component].mu;
        *v = arm_value(mv[g], g as f64, mu, reach.start as f64, reach.end as f64);
    }
    Ok(RawPdf { values, source })
}

pub fn raw_pdf_km(km: &KmMembershipValues) -> RawPdf {
    let mut values = [0.0; LEVELS];
    for c in &km.clusters {
        for g in c.start..=c.end {
            values[g] = arm_value(km.mv[g], g as f64, c.center, c.start as f64, c.end as f64);
        }
    }
    RawPdf {
        values,
        source: PdfSource::Km,
    }
}

/// `½ (P^U + P^L)`.
pub fn defuzzify_mean(upper: &RawPdf, lower: &RawPdf) -> Result<RawPdf> {
    if upper.source != PdfSource::It2Upper || lower.source != PdfSource::It2Lower {
        return Err(Error::contract(format!(
            "mean defuzzification needs an upper and a lower PDF, got {:?} and {:?}",
            upper.source, lower.source
        )));
    }
    let mut values = [0.0; LEVELS];
    for (g, v) in values.iter_mut().enumerate() {
        *v = 0.5 * (upper.values[g] + lower.values[g]);
    }
    Ok(RawPdf {
        values,
        source: PdfSource::It2Mean,
    })
}

/// Clamps negatives to zero and scales to unit sum.
pub fn finalize_pdf(raw: &RawPdf) -> Result<DesiredPdf> {
    DesiredPdf::from_weights(&raw.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussfit::Gaussian1D;
    use crate::membership::KmCluster;

    fn wide_single() -> MixtureFit {
        MixtureFit::from_gaussians(vec![Gaussian1D::new(1.0, 128.0, 40.0)]).unwrap()
    }

    fn km_one_cluster(center: f64, mv: f64) -> KmMembershipValues {
        KmMembershipValues {
            mv: [mv; LEVELS],
            clusters: vec![KmCluster {
                start: 0,
                end: 255,
                v_left: center,
                v_right: center,
                center,
                left_memberships: vec![mv; LEVELS],
                right_memberships: vec![mv; LEVELS],
            }],
            fuzzifier: 2.0,
        }
    }

    #[test]
    fn bracket_vanishes_at_arm_midpoint() {
        let fit = wide_single();
        let pdf = raw_pdf_it2(&[0.7; LEVELS], &fit, PdfSource::It2Upper).unwrap();
        // (128 + 0) / 2 = 64 < 128
        assert_eq!(pdf.values[64], 255.0);
    }

    #[test]
    fn zero_membership_is_flat() {
        let fit = wide_single();
        let pdf = raw_pdf_it2(&[0.0; LEVELS], &fit, PdfSource::It2Lower).unwrap();
        assert!(pdf.values.iter().all(|&v| v == 255.0));
        let km = raw_pdf_km(&km_one_cluster(100.0, 0.0));
        assert!(km.values.iter().all(|&v| v == 255.0));
    }

    #[test]
    fn full_membership_endpoints() {
        let fit = wide_single();
        let pdf = raw_pdf_it2(&[1.0; LEVELS], &fit, PdfSource::It2Upper).unwrap();
        assert_eq!(pdf.values[0], 255.0 + 2.0 * 64.0);
        assert_eq!(pdf.values[0], 383.0);
        assert_eq!(pdf.values[255], 255.0 - 2.0 * (191.5 - 255.0));
        assert_eq!(pdf.values[255], 382.0);

        let km = raw_pdf_km(&km_one_cluster(128.0, 1.0));
        assert_eq!(km.values[0], 383.0);
        assert_eq!(km.values[255], 382.0);
    }

    #[test]
    fn km_bracket_vanishes() {
        let km = raw_pdf_km(&km_one_cluster(100.0, 0.6));
        assert_eq!(km.values[50], 255.0);
    }

    #[test]
    fn piecewise_linear_with_one_slope_change_at_center() {
        let fit = wide_single();
        let pdf = raw_pdf_it2(&[0.5; LEVELS], &fit, PdfSource::It2Upper).unwrap();
        for g in 1..127 {
            assert!((pdf.values[g] - pdf.values[g - 1] + 1.0).abs() < 1e-12);
        }
        for g in 129..256 {
            assert!((pdf.values[g] - pdf.values[g - 1] - 1.0).abs() < 1e-12);
        }
        // decreasing towards the peak from the left, increasing after it
        assert!(pdf.values[127] < pdf.values[0]);
        assert!(pdf.values[128] < pdf.values[255]);
    }

    #[test]
    fn mean_defuzzification() {
        let up = RawPdf {
            values: [383.0; LEVELS],
            source: PdfSource::It2Upper,
        };
        let lo = RawPdf {
            values: [255.0; LEVELS],
            source: PdfSource::It2Lower,
        };
        let mean = defuzzify_mean(&up, &lo).unwrap();
        assert!(mean.values.iter().all(|&v| v == 319.0));
        let same = defuzzify_mean(&up, &RawPdf { source: PdfSource::It2Lower, ..up.clone() }).unwrap();
        assert_eq!(same.values, up.values);
        assert!(defuzzify_mean(&lo, &up).is_err());
    }

    #[test]
    fn mean_matches_elementwise_oracle() {
        let mut a = [0.0; LEVELS];
        let mut b = [0.0; LEVELS];
        for g in 0..LEVELS {
            a[g] = 200.0 + (g as f64 * 0.37).sin() * 90.0;
            b[g] = 260.0 + (g as f64 * 0.11).cos() * 70.0;
        }
        let mean = defuzzify_mean(
            &RawPdf { values: a, source: PdfSource::It2Upper },
            &RawPdf { values: b, source: PdfSource::It2Lower },
        )
        .unwrap();
        for g in 0..LEVELS {
            assert!((mean.values[g] - (a[g] + b[g]) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn finalize_cases() {
        let flat = finalize_pdf(&RawPdf { values: [255.0; LEVELS], source: PdfSource::Km }).unwrap();
        assert!(flat.values().iter().all(|&p| (p - 1.0 / 256.0).abs() < 1e-15));

        let mut two = [0.0; LEVELS];
        two[0] = 2.0;
        two[1] = 2.0;
        let p = finalize_pdf(&RawPdf { values: two, source: PdfSource::Km }).unwrap();
        assert_eq!(p.values()[0], 0.5);
        assert_eq!(p.values()[1], 0.5);

        let mut neg = [10.0; LEVELS];
        neg[3] = -5.0;
        let p = finalize_pdf(&RawPdf { values: neg, source: PdfSource::Km }).unwrap();
        assert_eq!(p.values()[3], 0.0);
        assert!((p.values().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((p.values()[0] - 1.0 / 255.0).abs() < 1e-15);

        assert!(finalize_pdf(&RawPdf { values: [-1.0; LEVELS], source: PdfSource::Km }).is_err());
    }

    #[test]
    fn raw_values_are_bounded() {
        let fit = MixtureFit::from_gaussians(vec![
            Gaussian1D::new(0.9, 30.0, 8.0),
            Gaussian1D::new(0.5, 120.0, 70.0),
            Gaussian1D::new(1.2, 240.0, 5.0),
        ])
        .unwrap();
        let pdf = raw_pdf_it2(&[1.0; LEVELS], &fit, PdfSource::It2Upper).unwrap();
        for v in pdf.values {
            assert!((v - 255.0).abs() <= 2.0 * 256.0);
        }
    }
}
