//! Histogram specification against an arbitrary target, next to plain
//! equalization and RMSHE.

use fuzzy_histspec::histogram::{compute_histogram, to_probability};
use fuzzy_histspec::hspec::{apply_map, equalize, rmshe, specify_map};
use fuzzy_histspec::metrics::aic_of_image;
use fuzzy_histspec::pdfgen::DesiredPdf;
use fuzzy_histspec::{synthetic, LEVELS};

fn main() -> fuzzy_histspec::Result<()> {
    let img = synthetic::natural_scene(256, 256, &Default::default(), 2);
    let p_in = to_probability(&compute_histogram(&img))?;

    // Triangular target peaking at mid-gray.
    let mut t = [0.0; LEVELS];
    for (g, v) in t.iter_mut().enumerate() {
        *v = 128.0 - (g as f64 - 127.5).abs();
    }
    let target = DesiredPdf::from_weights(&t)?;

    let map = specify_map(&p_in, &target);
    println!("map monotone: {}", map.is_monotone());
    println!("map samples: {:?}", [64u8, 96, 128, 160, 192].map(|g| (g, map.get(g))));

    let specified = apply_map(&img, &map);
    println!("\n{:<10} {:>7}", "image", "aic");
    println!("{:<10} {:7.4}", "input", aic_of_image(&img));
    println!("{:<10} {:7.4}", "he", aic_of_image(&equalize(&img)));
    for r in 1..=3 {
        println!("{:<10} {:7.4}", format!("rmshe r={r}"), aic_of_image(&rmshe(&img, r)?));
    }
    println!("{:<10} {:7.4}", "triangle", aic_of_image(&specified));
    Ok(())
}
