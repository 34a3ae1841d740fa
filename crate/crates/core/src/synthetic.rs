//! Seeded synthetic images and histograms for tests, examples and the
//! comparison corpus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::gaussfit::Gaussian1D;
use crate::imagio::GrayImage;
use crate::{Series, LEVELS};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn to_level(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Independent uniformly distributed pixels.
pub fn uniform_noise(width: u32, height: u32, seed: u64) -> GrayImage {
    let mut r = rng(seed);
    let pixels = (0..width as usize * height as usize).map(|_| r.gen()).collect();
    GrayImage::new(width, height, pixels).expect("dimensions are positive")
}

/// Two Gaussian pixel populations of equal size, randomly interleaved.
pub fn bimodal(width: u32, height: u32, mu: (f64, f64), sd: f64, seed: u64) -> GrayImage {
    let mut r = rng(seed);
    let lo = Normal::new(mu.0, sd).expect("finite parameters");
    let hi = Normal::new(mu.1, sd).expect("finite parameters");
    let pixels = (0..width as usize * height as usize)
        .map(|_| {
            let d = if r.gen_bool(0.5) { &lo } else { &hi };
            to_level(d.sample(&mut r))
        })
        .collect();
    GrayImage::new(width, height, pixels).expect("dimensions are positive")
}

/// Parameters for [`natural_scene`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneConfig {
    /// Mean brightness of the scene.
    pub base: f64,
    /// Peak-to-peak span of the smooth luminance field.
    pub span: f64,
    /// Number of soft blobs composing the field.
    pub blobs: usize,
    /// Standard deviation of per-pixel sensor noise.
    pub noise: f64,
    /// Fraction of pixels replaced by sparse highlights and shadows.
    pub outliers: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            base: 110.0,
            span: 60.0,
            blobs: 6,
            noise: 3.0,
            outliers: 0.02,
        }
    }
}

/// Smooth random scene: a gradient plus soft blobs, squeezed into
/// `base ± span/2`, with sensor noise and a thin scattering of far-off
/// highlight and shadow pixels. Histograms are peaked with long sparse
/// tails, like an underexposed photograph.
pub fn natural_scene(width: u32, height: u32, cfg: &SceneConfig, seed: u64) -> GrayImage {
    let mut r = rng(seed);
    let (w, h) = (width as f64, height as f64);
    let gx: f64 = r.gen_range(-1.0..1.0);
    let gy: f64 = r.gen_range(-1.0..1.0);
    let blobs: Vec<(f64, f64, f64, f64)> = (0..cfg.blobs)
        .map(|_| {
            (
                r.gen_range(0.0..w),
                r.gen_range(0.0..h),
                r.gen_range(0.08..0.35) * w.max(h),
                r.gen_range(-1.0..1.0),
            )
        })
        .collect();

    let mut field = Vec::with_capacity(width as usize * height as usize);
    for y in 0..height {
        for x in 0..width {
            let (xf, yf) = (x as f64, y as f64);
            let mut v = gx * xf / w + gy * yf / h;
            for &(cx, cy, s, amp) in &blobs {
                let d2 = (xf - cx).powi(2) + (yf - cy).powi(2);
                v += amp * (-d2 / (2.0 * s * s)).exp();
            }
            field.push(v);
        }
    }
    let lo = field.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = field.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = (hi - lo).max(1e-9);

    let noise = Normal::new(0.0, cfg.noise.max(1e-9)).expect("finite parameters");
    let pixels = field
        .iter()
        .map(|&v| {
            if r.gen_bool(cfg.outliers.clamp(0.0, 1.0)) {
                return r.gen();
            }
            let t = (v - lo) / range - 0.5;
            to_level(cfg.base + cfg.span * t + noise.sample(&mut r))
        })
        .collect();
    GrayImage::new(width, height, pixels).expect("dimensions are positive")
}

/// Ten low-contrast scenes with varied brightness, span and clutter.
pub fn low_contrast_corpus(width: u32, height: u32, seed: u64) -> Vec<GrayImage> {
    let mut r = rng(seed);
    (0..10)
        .map(|k| {
            let cfg = SceneConfig {
                base: r.gen_range(60.0..190.0),
                span: r.gen_range(30.0..80.0),
                blobs: r.gen_range(3..10),
                noise: r.gen_range(1.5..5.0),
                outliers: r.gen_range(0.005..0.04),
            };
            natural_scene(width, height, &cfg, seed.wrapping_add(1000 + k))
        })
        .collect()
}

/// Sum of the given components plus uniform noise in `[-amp, amp]`,
/// clamped to `[0, 1]`.
pub fn mixture_histogram(components: &[Gaussian1D], amp: f64, seed: u64) -> Series {
    let mut r = rng(seed);
    let mut out = [0.0; LEVELS];
    for (g, v) in out.iter_mut().enumerate() {
        let clean: f64 = components.iter().map(|c| c.eval(g as f64)).sum();
        let jitter = if amp > 0.0 { r.gen_range(-amp..=amp) } else { 0.0 };
        *v = (clean + jitter).clamp(0.0, 1.0);
    }
    out
}

/// Random 1 to 3 component mixture with `a ∈ [0.4, 1]`, `σ ∈ [10, 30]`
/// and centers at least `min_gap` levels apart inside `[margin, 255 − margin]`.
pub fn random_mixture(min_gap: f64, margin: f64, seed: u64) -> Vec<Gaussian1D> {
    let mut r = rng(seed);
    let n = r.gen_range(1..=3);
    loop {
        let mut mus: Vec<f64> = (0..n).map(|_| r.gen_range(margin..=255.0 - margin)).collect();
        mus.sort_by(f64::total_cmp);
        if mus.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            return mus
                .into_iter()
                .map(|mu| Gaussian1D::new(r.gen_range(0.4..=1.0), mu, r.gen_range(10.0..=30.0)))
                .collect();
        }
    }
}
