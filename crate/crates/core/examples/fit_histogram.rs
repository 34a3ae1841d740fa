//! Gaussian-mixture fit of a smoothed histogram: polynomial heuristic
//! initialization, then gradient descent.

use fuzzy_histspec::gaussfit::{fit_mixture, heuristic_init, objective, FitConfig, StepRule};
use fuzzy_histspec::histogram::{compute_histogram, smooth_and_normalize};
use fuzzy_histspec::synthetic;

fn main() -> fuzzy_histspec::Result<()> {
    let img = synthetic::bimodal(256, 256, (90.0, 170.0), 14.0, 3);
    let h = smooth_and_normalize(&compute_histogram(&img), 5)?;
    println!("peak at level {}, window {}", h.argmax(), h.window());

    let cfg = FitConfig::default();
    let init = heuristic_init(&h, &cfg)?;
    println!("\ninitial components (objective {:.5}):", objective(&init.gaussians, h.values()));
    for g in &init.gaussians {
        println!("  a={:.3} mu={:7.2} sigma={:6.2}", g.a, g.mu, g.sigma);
    }

    for rule in [StepRule::Scaled, StepRule::Fixed] {
        let fit = fit_mixture(h.values(), &init, &FitConfig { step_rule: rule, ..cfg.clone() })?;
        println!(
            "\n{rule:?}: objective {:.5} after {} iterations{}",
            fit.final_objective,
            fit.iterations,
            if fit.diverged { " (diverged)" } else { "" }
        );
        for (g, r) in fit.gaussians.iter().zip(&fit.reaches) {
            println!(
                "  a={:.3} mu={:7.2} sigma={:6.2}  reach [{:3}, {:3}]",
                g.a, g.mu, g.sigma, r.start, r.end
            );
        }
        println!("  partition points {:?}", fit.partition_points);
    }
    Ok(())
}
