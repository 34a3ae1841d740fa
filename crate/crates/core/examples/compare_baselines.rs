//! Entropy comparison of every technique over a directory of PGM images, or
//! over a generated low-contrast corpus.
//!
//!     cargo run --release --example compare_baselines -- crates/core/tests/data/lowcontrast

use fuzzy_histspec::pipeline::{compare_techniques, PipelineConfig, DEFAULT_RMSHE_DEPTH};
use fuzzy_histspec::{imagio, synthetic, GrayImage};

fn main() -> fuzzy_histspec::Result<()> {
    let images: Vec<(String, GrayImage)> = match std::env::args().nth(1) {
        Some(dir) => {
            let mut paths: Vec<_> = std::fs::read_dir(&dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "pgm"))
                .collect();
            paths.sort();
            paths
                .into_iter()
                .map(|p| Ok((p.file_stem().unwrap().to_string_lossy().into_owned(), imagio::load_image(&p)?)))
                .collect::<fuzzy_histspec::Result<_>>()?
        }
        None => synthetic::low_contrast_corpus(192, 192, 1)
            .into_iter()
            .enumerate()
            .map(|(i, img)| (format!("scene{i}"), img))
            .collect(),
    };

    let cfg = PipelineConfig::default();
    let mut header = false;
    let mut rel = Vec::new();
    for (name, img) in &images {
        let cmp = compare_techniques(img, &cfg, DEFAULT_RMSHE_DEPTH);
        let report = cmp.aic_report();
        if !header {
            print!("{:<20}", "image");
            report.entries.iter().for_each(|e| print!(" {:>9}", e.name));
            println!();
            header = true;
        }
        print!("{name:<20}");
        for e in &report.entries {
            match e.aic {
                Some(v) => print!(" {v:9.4}"),
                None => print!(" {:>9}", "failed"),
            }
        }
        println!();
        rel.extend(cmp.rel_improvement_vs_he());
    }
    if !rel.is_empty() {
        let mean = rel.iter().sum::<f64>() / rel.len() as f64;
        println!("\nmean relative change of best membership method vs HE: {:+.3}%", mean * 100.0);
    }
    Ok(())
}
