//! Gray-level histograms: raw counts, the probability form used by
//! equalization/specification, and the smoothed peak-normalized form that
//! serves as the fuzzy data source.

use crate::error::{Error, Result};
use crate::imagio::GrayImage;
use crate::{Series, LEVELS};

/// Default moving-average width.
pub const DEFAULT_WINDOW: usize = 5;

/// Largest accepted moving-average width.
pub const MAX_WINDOW: usize = 31;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawHistogram {
    counts: [u64; LEVELS],
    total: u64,
}

impl RawHistogram {
    pub fn from_counts(counts: [u64; LEVELS]) -> Self {
        let total = counts.iter().sum();
        Self { counts, total }
    }

    pub fn counts(&self) -> &[u64; LEVELS] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn as_series(&self) -> Series {
        let mut s = [0.0; LEVELS];
        for (dst, &c) in s.iter_mut().zip(&self.counts) {
            *dst = c as f64;
        }
        s
    }
}

/// `p[g] = n(g) / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityHistogram {
    p: Series,
}

impl ProbabilityHistogram {
    /// Wraps an arbitrary distribution. Entries must be non-negative and sum to 1.
    pub fn new(p: Series) -> Result<Self> {
        if p.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::contract("probabilities must be finite and non-negative"));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::contract(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self { p })
    }

    pub fn values(&self) -> &Series {
        &self.p
    }

    pub fn of_image(img: &GrayImage) -> Self {
        to_probability(&compute_histogram(img)).expect("images have at least one pixel")
    }

    /// Running sum `Σ_{k ≤ g} p[k]`.
    pub fn cdf(&self) -> Series {
        cumulative(&self.p)
    }
}

pub(crate) fn cumulative(p: &Series) -> Series {
    let mut out = [0.0; LEVELS];
    let mut acc = 0.0;
    for (o, &v) in out.iter_mut().zip(p) {
        acc += v;
        *o = acc;
    }
    out
}

/// Smoothed histogram scaled so that its peak is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedHistogram {
    h: Series,
    window: usize,
}

impl NormalizedHistogram {
    /// Wraps precomputed membership-scale values, e.g. a synthetic curve.
    /// Values must lie in `[0, 1]`.
    pub fn from_values(h: Series) -> Result<Self> {
        if h.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::contract("normalized histogram values must lie in [0, 1]"));
        }
        Ok(Self { h, window: 1 })
    }

    pub fn values(&self) -> &Series {
        &self.h
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn peak(&self) -> f64 {
        self.h.iter().copied().fold(0.0, f64::max)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for g in 1..LEVELS {
            if self.h[g] > self.h[best] {
                best = g;
            }
        }
        best
    }
}

pub fn compute_histogram(img: &GrayImage) -> RawHistogram {
    let mut counts = [0u64; LEVELS];
    for &p in img.pixels() {
        counts[p as usize] += 1;
    }
    RawHistogram {
        counts,
        total: img.len() as u64,
    }
}

pub fn to_probability(raw: &RawHistogram) -> Result<ProbabilityHistogram> {
    if raw.total == 0 {
        return Err(Error::contract("histogram is empty"));
    }
    let n = raw.total as f64;
    let mut p = [0.0; LEVELS];
    for (dst, &c) in p.iter_mut().zip(&raw.counts) {
        *dst = c as f64 / n;
    }
    Ok(ProbabilityHistogram { p })
}

/// Centered moving average without normalization. Windows shrink at the
/// edges to the bins that exist.
pub fn moving_average(values: &Series, window: usize) -> Series {
    let half = window / 2;
    let mut out = [0.0; LEVELS];
    // prefix sums keep this O(L)
    let mut prefix = [0.0; LEVELS + 1];
    for g in 0..LEVELS {
        prefix[g + 1] = prefix[g] + values[g];
    }
    for (g, o) in out.iter_mut().enumerate() {
        let lo = g.saturating_sub(half);
        let hi = (g + half).min(LEVELS - 1);
        *o = (prefix[hi + 1] - prefix[lo]) / (hi - lo + 1) as f64;
    }
    out
}

pub fn smooth_and_normalize(raw: &RawHistogram, window: usize) -> Result<NormalizedHistogram> {
    if window == 0 || window % 2 == 0 || window > MAX_WINDOW {
        return Err(Error::contract(format!(
            "smoothing window must be odd and in 1..={MAX_WINDOW}, got {window}"
        )));
    }
    let mut h = moving_average(&raw.as_series(), window);
    let peak = h.iter().copied().fold(0.0, f64::max);
    if peak > 0.0 {
        for v in h.iter_mut() {
            *v /= peak;
        }
    }
    Ok(NormalizedHistogram { h, window })
}
