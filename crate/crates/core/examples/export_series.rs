//! Writes every intermediate per-level series as CSV, then reads one back.

use fuzzy_histspec::imagio::{export_series, read_series};
use fuzzy_histspec::pipeline::{run_enhance, PipelineConfig};
use fuzzy_histspec::{synthetic, MvMethod};

fn main() -> fuzzy_histspec::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "series".into());
    let img = synthetic::natural_scene(256, 256, &Default::default(), 4);
    let cfg = PipelineConfig {
        export_intermediates: true,
        ..PipelineConfig::with_method(MvMethod::Area)
    };
    let result = run_enhance(&img, &cfg)?;
    let series = result.intermediates.expect("export_intermediates was set");

    std::fs::create_dir_all(&dir)?;
    for (name, columns) in series.csv_files() {
        let path = std::path::Path::new(&dir).join(name);
        export_series(&columns, &path)?;
        let cols: Vec<_> = columns.iter().map(|c| c.name.as_str()).collect();
        println!("{:<15} {}", name, cols.join(","));
    }

    let pdf = read_series(std::path::Path::new(&dir).join("pdf.csv"))?;
    let total: f64 = pdf.iter().find(|c| c.name == "pdf").unwrap().values.iter().sum();
    println!("\npdf.csv sums to {total:.9}");
    Ok(())
}
