#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polymerge::map_model::map_to_json;
use polymerge::synth::{instance_file_name, pose_path, poses_manifest_json};
use polymerge::{
    evaluate_map, generate_instances, load_map, merge_maps_with_report, Error, ExtensionPoint,
    ExtensionRule, Label, MergeConfig, NoiseConfig, VectorMap,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "polymerge",
    version,
    about = "Merge overlapping vector map instances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Merge secondary maps into a main map.
    Merge(MergeArgs),
    /// Score an estimated map against ground truth as CSV.
    Eval(EvalArgs),
    /// Generate noisy instances of a ground-truth map.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Extension {
    Foot,
    Source,
}

#[derive(Args)]
struct MergeArgs {
    /// Main map file.
    #[arg(
        long,
        required_unless_present = "bootstrap",
        conflicts_with = "bootstrap"
    )]
    main: Option<PathBuf>,
    /// Secondary map files.
    #[arg(long, num_args = 1.., required = true)]
    secondary: Vec<PathBuf>,
    /// Start from an empty main map.
    #[arg(long)]
    bootstrap: bool,
    #[arg(long, default_value_t = 1.0)]
    th_prox: f64,
    #[arg(long, default_value_t = 0.5)]
    th_cov: f64,
    #[arg(long, default_value_t = 0.1)]
    cell_size: f64,
    /// Coverage blur sigma in cells.
    #[arg(long, default_value_t = 2.0)]
    blur_sigma: f64,
    /// Moving-average smoothing of merged polylines.
    #[arg(long)]
    smooth: bool,
    #[arg(long, default_value_t = 5)]
    smooth_window: usize,
    /// Point appended past a polyline end.
    #[arg(long, value_enum, default_value_t = Extension::Source)]
    extension: Extension,
    /// Length in meters of the end stretch that defines "past the end".
    #[arg(long, default_value_t = 2.0)]
    extension_span: f64,
    /// Merged map file; the report goes next to it as `<stem>.report.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    est: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    th_prox: f64,
    #[arg(long)]
    out: PathBuf,
    /// Overlay of ground truth and estimate.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    gt: PathBuf,
    /// Number of instances.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    dropout: f64,
    /// Crop window as WIDTHxHEIGHT in meters.
    #[arg(long, default_value = "30x60", value_parser = parse_window)]
    window: (f64, f64),
    #[arg(long)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got \"{s}\""))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad window extent \"{v}\": {e}"))
    };
    Ok((parse(w)?, parse(h)?))
}

enum Failure {
    Input(String),
    Internal(String),
}

impl Failure {
    fn from_core(context: &str, e: Error) -> Self {
        let msg = format!("{context}: {e}");
        if e.is_input_error() {
            Failure::Input(msg)
        } else {
            Failure::Internal(msg)
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn read_map(path: &Path) -> Outcome<VectorMap> {
    // unreadable inputs are the caller's problem too
    load_map(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_atomic(path: &Path, contents: &str) -> Outcome<()> {
    let fail = |e: &dyn std::fmt::Display| Failure::Internal(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(&e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e))?;
    Ok(())
}

fn report_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    out.with_file_name(format!("{stem}.report.json"))
}

fn run_merge(args: MergeArgs) -> Outcome<()> {
    let config = MergeConfig {
        th_prox: args.th_prox,
        th_cov: args.th_cov,
        cell_size: args.cell_size,
        blur_sigma_cells: args.blur_sigma,
        smoothing_enabled: args.smooth,
        smoothing_window: args.smooth_window,
        extension: ExtensionRule {
            point: match args.extension {
                Extension::Foot => ExtensionPoint::Foot,
                Extension::Source => ExtensionPoint::Source,
            },
            span: args.extension_span,
        },
        ..MergeConfig::default()
    };
    config
        .validate()
        .map_err(|e| Failure::from_core("configuration", e))?;
    let main = match &args.main {
        Some(path) => read_map(path)?,
        None => VectorMap::empty_world(),
    };
    let secondaries = args
        .secondary
        .iter()
        .map(|p| read_map(p))
        .collect::<Outcome<Vec<_>>>()?;
    let (merged, report) = merge_maps_with_report(&main, &secondaries, &config)
        .map_err(|e| Failure::from_core("merge", e))?;

    let sidecar = json!({
        "main": args.main.as_ref().map(|p| p.display().to_string()),
        "secondary": args.secondary.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "config": {
            "th_prox": config.th_prox,
            "th_cov": config.th_cov,
            "cell_size": config.cell_size,
            "blur_sigma_cells": config.blur_sigma_cells,
            "smoothing_enabled": config.smoothing_enabled,
            "smoothing_window": config.smoothing_window,
            "extension": config.extension,
        },
        "fallbacks": report.fallbacks(),
        "report": report,
    });
    let mut text = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Failure::Internal(format!("report: {e}")))?;
    text.push('\n');

    write_atomic(&args.out, &map_to_json(&merged))?;
    write_atomic(&report_path(&args.out), &text)?;
    eprintln!(
        "merged {} elements into {} ({} chains, {} passes)",
        report.input_elements,
        report.output_elements,
        report.chains.len(),
        report.passes
    );
    Ok(())
}

fn run_eval(args: EvalArgs) -> Outcome<()> {
    if !(args.th_prox > 0.0) {
        return Err(Failure::Input(format!(
            "th_prox must be positive, got {}",
            args.th_prox
        )));
    }
    let est = read_map(&args.est)?
        .to_world()
        .map_err(|e| Failure::from_core("est", e))?;
    let gt = read_map(&args.gt)?
        .to_world()
        .map_err(|e| Failure::from_core("gt", e))?;
    let report =
        evaluate_map(&est, &gt, args.th_prox).map_err(|e| Failure::from_core("eval", e))?;
    write_atomic(&args.out, &report.to_csv())?;
    if let Some(plot) = &args.plot {
        write_atomic(plot, &overlay_svg(&gt, &est))?;
    }
    Ok(())
}

fn label_color(label: Label) -> &'static str {
    match label {
        Label::Divider => "#d62728",
        Label::Boundary => "#1f77b4",
        Label::PedCrossing => "#2ca02c",
    }
}

/// Ground truth in grey underneath the estimate colored by label. One path
/// per element; y points up.
fn overlay_svg(gt: &VectorMap, est: &VectorMap) -> String {
    let all = gt.elements.iter().chain(&est.elements);
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in all.flat_map(|e| e.polyline.points()) {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    if x0 > x1 {
        (x0, y0, x1, y1) = (0.0, 0.0, 1.0, 1.0);
    }
    let margin = 2.0;
    let (w, h) = (x1 - x0 + 2.0 * margin, y1 - y0 + 2.0 * margin);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.3} {:.3} {:.3} {:.3}">"#,
        x0 - margin,
        -(y1 + margin),
        w,
        h
    );
    let stroke = (w.max(h) / 500.0).max(0.02);
    let mut path = |e: &polymerge::MapElement, color: &str, width: f64, class: &str| {
        let mut d = String::new();
        for (i, p) in e.polyline.points().iter().enumerate() {
            let _ = write!(
                d,
                "{}{:.3},{:.3} ",
                if i == 0 { 'M' } else { 'L' },
                p.x,
                -p.y
            );
        }
        if e.label.is_closed() {
            d.push('Z');
        }
        let _ = writeln!(
            svg,
            r#"  <path class="{class}" data-id="{}" d="{}" fill="none" stroke="{color}" stroke-width="{width:.3}"/>"#,
            xml_escape(&e.id),
            d.trim_end()
        );
    };
    for e in &gt.elements {
        path(e, "#999999", stroke * 3.0, "gt");
    }
    for e in &est.elements {
        path(e, label_color(e.label), stroke, "est");
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn run_synth(args: SynthArgs) -> Outcome<()> {
    let cfg = NoiseConfig {
        sigma: args.sigma,
        dropout: args.dropout,
        window: args.window,
        n_instances: args.n,
        seed: args.seed,
    };
    cfg.validate().map_err(|e| Failure::from_core("synth", e))?;
    let gt = read_map(&args.gt)?
        .to_world()
        .map_err(|e| Failure::from_core("gt", e))?;
    let poses = pose_path(&gt, args.n).map_err(|e| Failure::from_core("gt", e))?;
    let instances =
        generate_instances(&gt, &poses, &cfg).map_err(|e| Failure::from_core("synth", e))?;
    fs::create_dir_all(&args.out)
        .map_err(|e| Failure::Internal(format!("{}: {e}", args.out.display())))?;
    for (k, inst) in instances.iter().enumerate() {
        write_atomic(&args.out.join(instance_file_name(k)), &map_to_json(inst))?;
    }
    write_atomic(
        &args.out.join("poses.json"),
        &poses_manifest_json(&poses, &cfg),
    )?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Merge(a) => run_merge(a),
        Command::Eval(a) => run_eval(a),
        Command::Synth(a) => run_synth(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
