//! Gray-level transformations: equalization, specification against a target
//! PDF, and recursive mean-separate equalization (RMSHE).

use crate::error::{Error, Result};
use crate::histogram::{compute_histogram, cumulative, ProbabilityHistogram};
use crate::imagio::GrayImage;
use crate::pdfgen::DesiredPdf;
use crate::{LEVELS, MAX_LEVEL};

/// Deepest supported RMSHE recursion (`2^4 = 16` segments).
pub const MAX_RMSHE_DEPTH: u32 = 4;

const INVERSE_EPS: f64 = 1e-12;

/// Output level per input level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelMap([u8; LEVELS]);

impl LevelMap {
    pub fn identity() -> Self {
        let mut m = [0u8; LEVELS];
        for (g, v) in m.iter_mut().enumerate() {
            *v = g as u8;
        }
        Self(m)
    }

    pub fn from_array(map: [u8; LEVELS]) -> Self {
        Self(map)
    }

    pub fn as_array(&self) -> &[u8; LEVELS] {
        &self.0
    }

    pub fn get(&self, g: u8) -> u8 {
        self.0[g as usize]
    }

    pub fn is_monotone(&self) -> bool {
        self.0.windows(2).all(|w| w[0] <= w[1])
    }
}

/// `map[g] = round(255 · CDF(g))`, halves rounded up.
pub fn equalize_map(p: &ProbabilityHistogram) -> LevelMap {
    let cdf = p.cdf();
    let mut map = [0u8; LEVELS];
    for g in 0..LEVELS {
        map[g] = (MAX_LEVEL * cdf[g] + 0.5).floor().clamp(0.0, MAX_LEVEL) as u8;
    }
    LevelMap(map)
}

/// Maps each input level to the smallest output level whose target CDF
/// reaches the input CDF.
pub fn specify_map(p_in: &ProbabilityHistogram, target: &DesiredPdf) -> LevelMap {
    let t = p_in.cdf();
    let g_cdf = cumulative(target.values());
    let mut map = [0u8; LEVELS];
    let mut gf = 0usize;
    // T is non-decreasing, so the search pointer never moves back.
    for gi in 0..LEVELS {
        while gf < LEVELS - 1 && g_cdf[gf] < t[gi] - INVERSE_EPS {
            gf += 1;
        }
        map[gi] = gf as u8;
    }
    LevelMap(map)
}

pub fn apply_map(img: &GrayImage, map: &LevelMap) -> GrayImage {
    img.map_pixels(|v| map.get(v))
}

/// Plain histogram equalization of an image.
pub fn equalize(img: &GrayImage) -> GrayImage {
    let p = ProbabilityHistogram::of_image(img);
    apply_map(img, &equalize_map(&p))
}

/// RMSHE with `r` levels of mean splitting; `r = 0` is plain equalization.
pub fn rmshe(img: &GrayImage, r: u32) -> Result<GrayImage> {
    Ok(apply_map(img, &rmshe_map(img, r)?))
}

pub fn rmshe_map(img: &GrayImage, r: u32) -> Result<LevelMap> {
    if r > MAX_RMSHE_DEPTH {
        return Err(Error::contract(format!(
            "RMSHE depth {r} exceeds the maximum of {MAX_RMSHE_DEPTH}"
        )));
    }
    if r == 0 {
        return Ok(equalize_map(&ProbabilityHistogram::of_image(img)));
    }
    let raw = compute_histogram(img);
    let counts = raw.counts();
    let mut segments = vec![(0usize, LEVELS - 1)];
    for _ in 0..r {
        let mut next = Vec::with_capacity(segments.len() * 2);
        for &(lo, hi) in &segments {
            match segment_mean(counts, lo, hi) {
                Some(mean) if lo < hi => {
                    let split = (mean.floor() as usize).clamp(lo, hi - 1);
                    next.push((lo, split));
                    next.push((split + 1, hi));
                }
                _ => next.push((lo, hi)),
            }
        }
        segments = next;
    }

    let mut map = LevelMap::identity().0;
    for (lo, hi) in segments {
        let n: u64 = counts[lo..=hi].iter().sum();
        if n == 0 || lo == hi {
            continue;
        }
        let width = (hi - lo) as f64;
        let mut acc = 0u64;
        for g in lo..=hi {
            acc += counts[g];
            let cdf = acc as f64 / n as f64;
            map[g] = (lo as f64 + (width * cdf + 0.5).floor()).min(hi as f64) as u8;
        }
    }
    Ok(LevelMap(map))
}

fn segment_mean(counts: &[u64; LEVELS], lo: usize, hi: usize) -> Option<f64> {
    let n: u64 = counts[lo..=hi].iter().sum();
    if n == 0 {
        return None;
    }
    let s: f64 = (lo..=hi).map(|g| g as f64 * counts[g] as f64).sum();
    Some(s / n as f64)
}
