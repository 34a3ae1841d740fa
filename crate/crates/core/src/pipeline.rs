//! End-to-end enhancement and baseline comparison.

use std::time::Instant;

use crate::error::{Error, Result, Stage, StageExt};
use crate::fou::{extract_fou, Fou};
use crate::gaussfit::{fit_mixture, heuristic_init, FitConfig, MixtureFit};
use crate::histogram::{
    compute_histogram, smooth_and_normalize, to_probability, NormalizedHistogram,
    ProbabilityHistogram, DEFAULT_WINDOW,
};
use crate::hspec::{apply_map, equalize_map, rmshe, specify_map, LevelMap};
use crate::imagio::{GrayImage, SeriesExport};
use crate::membership::{
    it2_membership, mv_km, It2MembershipValues, KmMembershipValues, MvMethod, DEFAULT_FUZZIFIER,
};
use crate::metrics::aic;
use crate::pdfgen::{
    defuzzify_mean, finalize_pdf, raw_pdf_it2, raw_pdf_km, DesiredPdf, PdfSource, RawPdf,
};
use crate::Series;

/// RMSHE depth used by [`run_compare`].
pub const DEFAULT_RMSHE_DEPTH: u32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub method: MvMethod,
    pub window: usize,
    pub fit: FitConfig,
    /// KM fuzzifier `m`; must exceed 1.
    pub fuzzifier: f64,
    pub export_intermediates: bool,
    /// Replaces every membership value with this constant after the MV
    /// stage. `Some(0.0)` turns the target into the uniform PDF.
    pub mv_override: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            method: MvMethod::Km,
            window: DEFAULT_WINDOW,
            fit: FitConfig::default(),
            fuzzifier: DEFAULT_FUZZIFIER,
            export_intermediates: false,
            mv_override: None,
        }
    }
}

impl PipelineConfig {
    pub fn with_method(method: MvMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.fit.validate()?;
        if !(self.fuzzifier > 1.0 && self.fuzzifier.is_finite()) {
            return Err(Error::contract(format!(
                "fuzzifier must exceed 1, got {}",
                self.fuzzifier
            )));
        }
        if let Some(v) = self.mv_override {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::contract(format!("membership override {v} is outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MembershipOutcome {
    It2(It2MembershipValues),
    Km(KmMembershipValues),
}

/// Per-level series captured when `export_intermediates` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct Intermediates {
    pub histogram: Series,
    pub smoothed: Series,
    pub mixture: Series,
    pub umf: Series,
    pub lmf: Series,
    pub mv_upper: Option<Series>,
    pub mv_lower: Option<Series>,
    pub mv_km: Option<Series>,
    pub raw_pdf: Series,
    pub pdf: Series,
}

impl Intermediates {
    /// `(file name, columns)` pairs, one CSV per entry.
    pub fn csv_files(&self) -> Vec<(&'static str, Vec<SeriesExport>)> {
        let mut files = vec![
            ("histogram.csv", vec![SeriesExport::new("probability", &self.histogram)]),
            ("smoothed.csv", vec![SeriesExport::new("smoothed", &self.smoothed)]),
            ("mixture.csv", vec![SeriesExport::new("mixture", &self.mixture)]),
            ("umf.csv", vec![SeriesExport::new("umf", &self.umf)]),
            ("lmf.csv", vec![SeriesExport::new("lmf", &self.lmf)]),
        ];
        if let Some(v) = &self.mv_upper {
            files.push(("mv_upper.csv", vec![SeriesExport::new("mv_upper", v)]));
        }
        if let Some(v) = &self.mv_lower {
            files.push(("mv_lower.csv", vec![SeriesExport::new("mv_lower", v)]));
        }
        if let Some(v) = &self.mv_km {
            files.push(("mv_km.csv", vec![SeriesExport::new("mv_km", v)]));
        }
        files.push((
            "pdf.csv",
            vec![
                SeriesExport::new("raw", &self.raw_pdf),
                SeriesExport::new("pdf", &self.pdf),
            ],
        ));
        files
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub enhanced: GrayImage,
    pub desired_pdf: DesiredPdf,
    pub raw_pdf: RawPdf,
    pub map: LevelMap,
    pub histogram: NormalizedHistogram,
    pub fit: MixtureFit,
    pub fou: Fou,
    pub mv: MembershipOutcome,
    pub aic_in: f64,
    pub aic_out: f64,
    pub warnings: Vec<String>,
    pub intermediates: Option<Intermediates>,
}

fn override_bound(values: &mut Series, v: Option<f64>) {
    if let Some(v) = v {
        values.fill(v);
    }
}

/// Runs all five stages on `img`. Errors carry the stage they came from.
pub fn run_enhance(img: &GrayImage, cfg: &PipelineConfig) -> Result<PipelineResult> {
    cfg.validate()?;
    let mut warnings = Vec::new();

    let raw = compute_histogram(img);
    let p_in = to_probability(&raw).at(Stage::Histogram)?;
    let h = smooth_and_normalize(&raw, cfg.window).at(Stage::Smoothing)?;

    let init = heuristic_init(&h, &cfg.fit).at(Stage::Initialization)?;
    let fit = fit_mixture(h.values(), &init, &cfg.fit).at(Stage::Fitting)?;
    if fit.diverged {
        warnings.push("mixture fit diverged; best parameters kept".to_string());
    }

    let fou = extract_fou(&h, &fit, &cfg.fit).at(Stage::Footprint)?;
    if fou.umf_fit.diverged || fou.lmf_fit.diverged {
        warnings.push("membership function fit diverged; best parameters kept".to_string());
    }
    if fou.swapped_levels > 0 {
        warnings.push(format!(
            "lower and upper membership functions crossed at {} levels and were swapped",
            fou.swapped_levels
        ));
    }

    let (mv, raw_pdf) = match cfg.method {
        MvMethod::Km => {
            let mut km = mv_km(&fou, &fit.partition_points, cfg.fuzzifier).at(Stage::Membership)?;
            override_bound(&mut km.mv, cfg.mv_override);
            let pdf = raw_pdf_km(&km);
            (MembershipOutcome::Km(km), pdf)
        }
        method => {
            let mut it2 = it2_membership(method, &fou, &h).at(Stage::Membership)?;
            override_bound(&mut it2.upper.values, cfg.mv_override);
            override_bound(&mut it2.lower.values, cfg.mv_override);
            for (name, bound) in [("upper", &it2.upper), ("lower", &it2.lower)] {
                if !bound.zero_overlap.is_empty() {
                    warnings.push(format!(
                        "{name} components {:?} do not overlap the histogram",
                        bound.zero_overlap
                    ));
                }
            }
            let upper = raw_pdf_it2(&it2.upper.values, &fou.umf_fit, PdfSource::It2Upper)
                .at(Stage::PdfGeneration)?;
            let lower = raw_pdf_it2(&it2.lower.values, &fou.lmf_fit, PdfSource::It2Lower)
                .at(Stage::PdfGeneration)?;
            let mean = defuzzify_mean(&upper, &lower).at(Stage::PdfGeneration)?;
            (MembershipOutcome::It2(it2), mean)
        }
    };
    let desired_pdf = finalize_pdf(&raw_pdf).at(Stage::PdfGeneration)?;

    let map = specify_map(&p_in, &desired_pdf);
    let enhanced = apply_map(img, &map);
    let p_out = ProbabilityHistogram::of_image(&enhanced);

    let intermediates = cfg.export_intermediates.then(|| {
        let (mv_upper, mv_lower, mv_km) = match &mv {
            MembershipOutcome::It2(v) => (Some(v.upper.values), Some(v.lower.values), None),
            MembershipOutcome::Km(v) => (None, None, Some(v.mv)),
        };
        Intermediates {
            histogram: *p_in.values(),
            smoothed: *h.values(),
            mixture: fit.series(),
            umf: fou.umf,
            lmf: fou.lmf,
            mv_upper,
            mv_lower,
            mv_km,
            raw_pdf: raw_pdf.values,
            pdf: *desired_pdf.values(),
        }
    });

    Ok(PipelineResult {
        enhanced,
        desired_pdf,
        raw_pdf,
        map,
        histogram: h,
        fit,
        fou,
        mv,
        aic_in: aic(&p_in),
        aic_out: aic(&p_out),
        warnings,
        intermediates,
    })
}

/// Which transformation produced a comparison entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Technique {
    Input,
    He,
    Rmshe,
    Proposed(MvMethod),
}

impl Technique {
    pub const COMPARED: [Technique; 6] = [
        Technique::He,
        Technique::Rmshe,
        Technique::Proposed(MvMethod::Pointwise),
        Technique::Proposed(MvMethod::Cow),
        Technique::Proposed(MvMethod::Area),
        Technique::Proposed(MvMethod::Km),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Technique::Input => "input",
            Technique::He => "he",
            Technique::Rmshe => "rmshe",
            Technique::Proposed(m) => m.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub technique: Technique,
    /// `Err` holds the rendered error; other entries are unaffected.
    pub output: std::result::Result<GrayImage, String>,
    pub aic: Option<f64>,
    pub ms: f64,
    pub warnings: Vec<String>,
}

/// Input plus every compared technique, in [`Technique::COMPARED`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub aic_in: f64,
    pub outcomes: Vec<MethodOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AicEntry {
    pub name: &'static str,
    pub aic: Option<f64>,
    pub error: Option<String>,
}

/// Seven entries: input, HE, RMSHE and the four membership methods.
#[derive(Debug, Clone, PartialEq)]
pub struct AicReport {
    pub entries: Vec<AicEntry>,
}

impl AicReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).and_then(|e| e.aic)
    }
}

impl Comparison {
    pub fn outcome(&self, technique: Technique) -> Option<&MethodOutcome> {
        self.outcomes.iter().find(|o| o.technique == technique)
    }

    pub fn aic_report(&self) -> AicReport {
        let mut entries = vec![AicEntry {
            name: Technique::Input.name(),
            aic: Some(self.aic_in),
            error: None,
        }];
        entries.extend(self.outcomes.iter().map(|o| AicEntry {
            name: o.technique.name(),
            aic: o.aic,
            error: o.output.as_ref().err().cloned(),
        }));
        AicReport { entries }
    }

    /// `(best proposed − HE) / HE`, when both are available.
    pub fn rel_improvement_vs_he(&self) -> Option<f64> {
        let he = self.outcome(Technique::He)?.aic?;
        let best = self
            .outcomes
            .iter()
            .filter(|o| matches!(o.technique, Technique::Proposed(_)))
            .filter_map(|o| o.aic)
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))?;
        (he > 0.0).then(|| (best - he) / he)
    }
}

fn run_technique(img: &GrayImage, cfg: &PipelineConfig, rmshe_depth: u32, t: Technique) -> MethodOutcome {
    let start = Instant::now();
    let result: Result<(GrayImage, Vec<String>)> = match t {
        Technique::Input => Ok((img.clone(), Vec::new())),
        Technique::He => {
            let map = equalize_map(&ProbabilityHistogram::of_image(img));
            Ok((apply_map(img, &map), Vec::new()))
        }
        Technique::Rmshe => rmshe(img, rmshe_depth)
            .at(Stage::Specification)
            .map(|o| (o, Vec::new())),
        Technique::Proposed(method) => {
            let cfg = PipelineConfig {
                method,
                export_intermediates: false,
                ..cfg.clone()
            };
            run_enhance(img, &cfg).map(|r| (r.enhanced, r.warnings))
        }
    };
    let ms = start.elapsed().as_secs_f64() * 1e3;
    match result {
        Ok((out, warnings)) => MethodOutcome {
            technique: t,
            aic: Some(aic(&ProbabilityHistogram::of_image(&out))),
            output: Ok(out),
            ms,
            warnings,
        },
        Err(e) => MethodOutcome {
            technique: t,
            output: Err(e.to_string()),
            aic: None,
            ms,
            warnings: Vec::new(),
        },
    }
}

/// Runs HE, RMSHE at `rmshe_depth`, and all four membership methods on the
/// same input, concurrently. A failing technique is recorded, not raised.
pub fn compare_techniques(img: &GrayImage, cfg: &PipelineConfig, rmshe_depth: u32) -> Comparison {
    let outcomes = std::thread::scope(|s| {
        let handles: Vec<_> = Technique::COMPARED
            .iter()
            .map(|&t| s.spawn(move || run_technique(img, cfg, rmshe_depth, t)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("comparison worker panicked"))
            .collect()
    });
    Comparison {
        aic_in: aic(&ProbabilityHistogram::of_image(img)),
        outcomes,
    }
}

pub fn run_compare(img: &GrayImage, cfg: &PipelineConfig) -> AicReport {
    compare_techniques(img, cfg, DEFAULT_RMSHE_DEPTH).aic_report()
}
