//! JSON run reports written by the command-line front end.
//!
//! ```text
//! {
//!   "images": [{ "input", "methods": { name: { "aic", "output_path", "ms" } }, "warnings": [] }],
//!   "summary": { "mean_rel_improvement_vs_he" }
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::MvMethod;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub aic: Option<f64>,
    pub output_path: Option<String>,
    pub ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageReport {
    pub input: String,
    pub aic_in: Option<f64>,
    /// Output entropy of the enhanced image; set by single-image runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aic_out: Option<f64>,
    pub methods: BTreeMap<String, MethodReport>,
    pub warnings: Vec<String>,
    /// Set when the image could not be processed at all.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ImageReport {
    pub fn failed(input: impl Into<String>, error: impl Into<String>) -> Self {
        Self {
            input: input.into(),
            aic_in: None,
            aic_out: None,
            methods: BTreeMap::new(),
            warnings: Vec::new(),
            error: Some(error.into()),
        }
    }

    /// `(best proposed − HE) / HE` from the recorded entries.
    pub fn rel_improvement_vs_he(&self) -> Option<f64> {
        let he = self.methods.get("he")?.aic?;
        let best = MvMethod::ALL
            .iter()
            .filter_map(|m| self.methods.get(m.name())?.aic)
            .reduce(f64::max)?;
        (he > 0.0).then(|| (best - he) / he)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Mean over images of `(best proposed − HE) / HE`; `null` when no
    /// image has both.
    pub mean_rel_improvement_vs_he: Option<f64>,
    pub images_ok: usize,
    pub images_failed: usize,
}

impl Summary {
    pub fn from_images(images: &[ImageReport]) -> Self {
        let rel: Vec<f64> = images.iter().filter_map(ImageReport::rel_improvement_vs_he).collect();
        let failed = images.iter().filter(|i| i.error.is_some()).count();
        Self {
            mean_rel_improvement_vs_he: (!rel.is_empty())
                .then(|| rel.iter().sum::<f64>() / rel.len() as f64),
            images_ok: images.len() - failed,
            images_failed: failed,
        }
    }
}

/// Flags the run was made with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<MvMethod>,
    pub window: usize,
    pub rho: f64,
    pub iters: usize,
    pub m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rmshe_depth: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub images: Vec<ImageReport>,
    pub summary: Summary,
}

impl RunReport {
    pub fn new(config: ConfigEcho, images: Vec<ImageReport>) -> Self {
        let summary = Summary::from_images(&images);
        Self {
            config,
            images,
            summary,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are serializable")
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| crate::Error::format("report", e.to_string()))
    }

    /// Copy with every timing field zeroed, for comparing runs.
    pub fn without_timings(&self) -> Self {
        let mut out = self.clone();
        for img in &mut out.images {
            for m in img.methods.values_mut() {
                m.ms = 0.0;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(aic: f64) -> MethodReport {
        MethodReport {
            aic: Some(aic),
            output_path: None,
            ms: 1.5,
            error: None,
        }
    }

    fn image(he: f64, proposed: &[(&str, f64)]) -> ImageReport {
        let mut methods = BTreeMap::new();
        methods.insert("he".to_string(), entry(he));
        methods.insert("rmshe".to_string(), entry(he + 1.0));
        for &(n, v) in proposed {
            methods.insert(n.to_string(), entry(v));
        }
        ImageReport {
            input: "x.pgm".into(),
            aic_in: Some(7.0),
            aic_out: None,
            methods,
            warnings: vec![],
            error: None,
        }
    }

    fn echo() -> ConfigEcho {
        ConfigEcho {
            method: None,
            window: 5,
            rho: 1e-4,
            iters: 2000,
            m: 2.0,
            rmshe_depth: Some(2),
        }
    }

    #[test]
    fn improvement_uses_best_proposed_and_ignores_baselines() {
        let img = image(5.0, &[("pointwise", 5.5), ("km", 6.0), ("area", 4.0)]);
        assert!((img.rel_improvement_vs_he().unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(image(5.0, &[]).rel_improvement_vs_he(), None);
    }

    #[test]
    fn summary_averages_and_counts_failures() {
        let images = vec![
            image(5.0, &[("cow", 5.5)]),
            image(4.0, &[("km", 3.0)]),
            ImageReport::failed("missing.pgm", "i/o error"),
        ];
        let s = Summary::from_images(&images);
        assert!((s.mean_rel_improvement_vs_he.unwrap() - (0.1 - 0.25) / 2.0).abs() < 1e-15);
        assert_eq!((s.images_ok, s.images_failed), (2, 1));
    }

    #[test]
    fn json_round_trip_keeps_precision() {
        let report = RunReport::new(echo(), vec![image(5.977_123_456_789, &[("area", 7.303_512_345_678_9)])]);
        let text = report.to_json();
        let back: RunReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["images"][0]["methods"]["he"]["aic"].is_f64());
        assert!(v["images"][0]["warnings"].is_array());
        assert!(v["summary"]["mean_rel_improvement_vs_he"].is_f64());
    }

    #[test]
    fn timings_can_be_masked() {
        let report = RunReport::new(echo(), vec![image(5.0, &[("km", 6.0)])]);
        assert!(report.without_timings().images[0].methods.values().all(|m| m.ms == 0.0));
    }
}
