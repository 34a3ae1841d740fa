//! The four membership-value methods side by side, and the target PDF each one
//! produces.

use fuzzy_histspec::pipeline::{run_enhance, MembershipOutcome, PipelineConfig};
use fuzzy_histspec::{synthetic, MvMethod};

fn main() -> fuzzy_histspec::Result<()> {
    let img = synthetic::bimodal(256, 256, (80.0, 150.0), 12.0, 5);
    println!("{:<10} {:>8} {:>8} {:>10} {:>9}", "method", "mv@mu1", "mv@mid", "pdf max", "aic out");
    for method in MvMethod::ALL {
        let r = run_enhance(&img, &PipelineConfig::with_method(method))?;
        let mv = match &r.mv {
            MembershipOutcome::It2(v) => {
                let mean = |g: usize| 0.5 * (v.upper.values[g] + v.lower.values[g]);
                [mean(80), mean(115)]
            }
            MembershipOutcome::Km(v) => [v.mv[80], v.mv[115]],
        };
        let pdf_max = r.desired_pdf.values().iter().cloned().fold(0.0, f64::max);
        println!(
            "{:<10} {:8.4} {:8.4} {:10.6} {:9.4}",
            method.name(), mv[0], mv[1], pdf_max, r.aic_out
        );
    }
    Ok(())
}
