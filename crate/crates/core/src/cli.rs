//! Command-line front end behind the `fuzzy-histspec` binary.
//!
//! Exit codes: 0 on success, 1 when processing fails, 2 for usage errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::Result;
use crate::gaussfit::FitConfig;
use crate::histogram::MAX_WINDOW;
use crate::imagio::{export_series, load_image, save_image};
use crate::pipeline::{compare_techniques, run_enhance, PipelineConfig, Technique};
use crate::report::{ConfigEcho, ImageReport, MethodReport, RunReport};
use crate::MvMethod;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fuzzy-histspec", version, about = "Contrast enhancement by histogram specification against an automatically generated fuzzy target PDF")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enhance one PGM image.
    Enhance(EnhanceArgs),
    /// Compare HE, RMSHE and the four membership methods by entropy.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct Tuning {
    /// Odd moving-average window for histogram smoothing.
    #[arg(long, default_value_t = 5)]
    window: usize,
    /// Initial learning constant for the Gaussian fit.
    #[arg(long, default_value_t = 1e-4)]
    rho: f64,
    /// Gradient-descent iteration cap.
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    /// KM fuzzifier.
    #[arg(long, default_value_t = 2.0)]
    m: f64,
}

#[derive(Debug, Args)]
struct EnhanceArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum)]
    method: MvMethod,
    #[command(flatten)]
    tuning: Tuning,
    /// Directory for per-level CSV series.
    #[arg(long)]
    export_dir: Option<PathBuf>,
    /// JSON report path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long, num_args = 1.., required = true)]
    input: Vec<PathBuf>,
    #[arg(long)]
    report: PathBuf,
    #[arg(long, default_value_t = 2)]
    rmshe_depth: u32,
    /// Write every technique's output image here.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
}

impl Tuning {
    fn config(&self, method: MvMethod) -> std::result::Result<PipelineConfig, String> {
        if self.window == 0 || self.window % 2 == 0 || self.window > MAX_WINDOW {
            return Err(format!("--window must be odd and at most {MAX_WINDOW}"));
        }
        let cfg = PipelineConfig {
            method,
            window: self.window,
            fit: FitConfig {
                rho: self.rho,
                max_iters: self.iters,
                ..FitConfig::default()
            },
            fuzzifier: self.m,
            ..PipelineConfig::default()
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    fn echo(&self, method: Option<MvMethod>, rmshe_depth: Option<u32>) -> ConfigEcho {
        ConfigEcho {
            method,
            window: self.window,
            rho: self.rho,
            iters: self.iters,
            m: self.m,
            rmshe_depth,
        }
    }
}

/// Parses `args` (program name first) and runs the chosen subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Enhance(a) => cmd_enhance(&a),
        Command::Compare(a) => cmd_compare(&a),
    }
}

fn usage_error(msg: &str) -> i32 {
    eprintln!("error: {msg}\n\nFor more information, try '--help'.");
    EXIT_USAGE
}

fn cmd_enhance(a: &EnhanceArgs) -> i32 {
    let cfg = match a.tuning.config(a.method) {
        Ok(cfg) => PipelineConfig {
            export_intermediates: a.export_dir.is_some(),
            ..cfg
        },
        Err(msg) => return usage_error(&msg),
    };
    match enhance(a, &cfg) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn enhance(a: &EnhanceArgs, cfg: &PipelineConfig) -> Result<()> {
    let img = load_image(&a.input)?;
    let start = Instant::now();
    let result = run_enhance(&img, cfg)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    save_image(&result.enhanced, &a.output)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }

    if let (Some(dir), Some(series)) = (&a.export_dir, &result.intermediates) {
        std::fs::create_dir_all(dir)?;
        for (name, columns) in series.csv_files() {
            export_series(&columns, dir.join(name))?;
        }
    }

    if let Some(path) = &a.report {
        let mut methods = BTreeMap::new();
        methods.insert(
            a.method.name().to_string(),
            MethodReport {
                aic: Some(result.aic_out),
                output_path: Some(display(&a.output)),
                ms,
                error: None,
            },
        );
        let image = ImageReport {
            input: display(&a.input),
            aic_in: Some(result.aic_in),
            aic_out: Some(result.aic_out),
            methods,
            warnings: result.warnings.clone(),
            error: None,
        };
        RunReport::new(a.tuning.echo(Some(a.method), None), vec![image]).write(path)?;
    }
    println!("aic_in {:.6} aic_out {:.6}", result.aic_in, result.aic_out);
    Ok(())
}

fn cmd_compare(a: &CompareArgs) -> i32 {
    let cfg = match a.tuning.config(MvMethod::Km) {
        Ok(cfg) => cfg,
        Err(msg) => return usage_error(&msg),
    };
    if a.rmshe_depth > crate::hspec::MAX_RMSHE_DEPTH {
        return usage_error(&format!(
            "--rmshe-depth must be at most {}",
            crate::hspec::MAX_RMSHE_DEPTH
        ));
    }
    if let Some(dir) = &a.output_dir {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("error: cannot create {}: {e}", dir.display());
            return EXIT_FAILURE;
        }
    }

    let images: Vec<ImageReport> = a
        .input
        .iter()
        .map(|path| compare_one(path, &cfg, a.rmshe_depth, a.output_dir.as_deref()))
        .collect();
    for img in &images {
        if let Some(e) = &img.error {
            eprintln!("error: {}: {e}", img.input);
        }
    }
    let report = RunReport::new(a.tuning.echo(None, Some(a.rmshe_depth)), images);
    if let Err(e) = report.write(&a.report) {
        eprintln!("error: cannot write report: {e}");
        return EXIT_FAILURE;
    }
    if let Some(rel) = report.summary.mean_rel_improvement_vs_he {
        println!("mean relative AIC change of best method vs HE: {:+.3}%", rel * 100.0);
    }
    if report.summary.images_ok == 0 {
        EXIT_FAILURE
    } else {
        EXIT_OK
    }
}

fn compare_one(path: &Path, cfg: &PipelineConfig, depth: u32, out_dir: Option<&Path>) -> ImageReport {
    let img = match load_image(path) {
        Ok(img) => img,
        Err(e) => return ImageReport::failed(display(path), e.to_string()),
    };
    let cmp = compare_techniques(&img, cfg, depth);
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into());
    let mut methods = BTreeMap::new();
    let mut warnings = Vec::new();
    for o in &cmp.outcomes {
        let name = o.technique.name();
        let mut output_path = None;
        let mut error = o.output.as_ref().err().cloned();
        if let (Some(dir), Ok(out)) = (out_dir, &o.output) {
            let p = dir.join(format!("{stem}_{name}.pgm"));
            match save_image(out, &p) {
                Ok(()) => output_path = Some(display(&p)),
                Err(e) => error = Some(e.to_string()),
            }
        }
        if matches!(o.technique, Technique::Proposed(_)) {
            warnings.extend(o.warnings.iter().map(|w| format!("{name}: {w}")));
        }
        methods.insert(
            name.to_string(),
            MethodReport {
                aic: o.aic,
                output_path,
                ms: o.ms,
                error,
            },
        );
    }
    ImageReport {
        input: display(path),
        aic_in: Some(cmp.aic_in),
        aic_out: None,
        methods,
        warnings,
        error: None,
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}
