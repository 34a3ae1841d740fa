//! Interval type-2 footprint of uncertainty around a mixture fit.

use fuzzy_histspec::fou::{bound_functions, extract_fou};
use fuzzy_histspec::gaussfit::{fit_mixture, heuristic_init, FitConfig};
use fuzzy_histspec::histogram::{compute_histogram, smooth_and_normalize};
use fuzzy_histspec::synthetic;

fn main() -> fuzzy_histspec::Result<()> {
    let img = synthetic::natural_scene(256, 256, &Default::default(), 11);
    let h = smooth_and_normalize(&compute_histogram(&img), 5)?;
    let cfg = FitConfig::default();
    let fit = fit_mixture(h.values(), &heuristic_init(&h, &cfg)?, &cfg)?;
    let (upper, lower) = bound_functions(&h, &fit);
    let fou = extract_fou(&h, &fit, &cfg)?;

    println!("umf components {}, lmf components {}", fou.umf_fit.len(), fou.lmf_fit.len());
    println!("swapped levels {}", fou.swapped_levels);
    let width: f64 = fou.umf.iter().zip(&fou.lmf).map(|(u, l)| u - l).sum();
    println!("footprint area {width:.3}\n");

    println!("{:>5} {:>7} {:>7} {:>7} {:>7} {:>7}", "g", "H", "U", "L", "umf", "lmf");
    for g in (0..256).step_by(16) {
        println!(
            "{g:5} {:7.4} {:7.4} {:7.4} {:7.4} {:7.4}",
            h.values()[g], upper[g], lower[g], fou.umf[g], fou.lmf[g]
        );
    }
    Ok(())
}
