//! Enhance a PGM file, or a synthetic low-contrast scene when no path is given.
//!
//!     cargo run --release --example enhance_image -- input.pgm out.pgm km

use fuzzy_histspec::pipeline::{run_enhance, PipelineConfig};
use fuzzy_histspec::{imagio, synthetic, MvMethod};

fn main() -> fuzzy_histspec::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let img = match args.first() {
        Some(path) => imagio::load_image(path)?,
        None => synthetic::natural_scene(320, 240, &Default::default(), 7),
    };
    let out_path = args.get(1).map(String::as_str).unwrap_or("enhanced.pgm");
    let method: MvMethod = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(MvMethod::Km);

    let result = run_enhance(&img, &PipelineConfig::with_method(method))?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    println!("method      {}", method.name());
    println!("components  {}", result.fit.len());
    println!("aic         {:.4} -> {:.4}", result.aic_in, result.aic_out);

    let span = |img: &fuzzy_histspec::GrayImage| {
        let px = img.pixels();
        (px.iter().min().copied().unwrap_or(0), px.iter().max().copied().unwrap_or(0))
    };
    println!("range       {:?} -> {:?}", span(&img), span(&result.enhanced));
    imagio::save_image(&result.enhanced, out_path)?;
    println!("wrote {out_path}");
    Ok(())
}
