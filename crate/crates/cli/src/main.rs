use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use somtool_core::{
    activation_histogram, build_report, classify, fit_and_train, from_json_str, load_csv, quantization_error,
    render_bars, render_codebook_tiles, render_heatmap, summarize, surface_json, to_json_string, u_matrix,
    Assignments, ColorScale, CsvOptions, Dataset, GridValues, LabelColumn, PlotKind, PlotSpec, Sampling, SomError,
    SomModel, TrainingConfig,
};

/// Train, apply and inspect self-organizing maps.
#[derive(Parser)]
#[command(name = "somtool", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print per-feature min, max, mean and standard deviation.
    Stats {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Fit normalization on a CSV file and train a map.
    Train(TrainArgs),
    /// Assign every row of a CSV file to its best-matching neuron.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        output: PathBuf,
    },
    /// Compute quality metrics and per-neuron statistics.
    Report {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        /// Assignments CSV from `classify`; recomputed when omitted.
        #[arg(long)]
        assignments: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        /// Print a text table instead of the JSON summary.
        #[arg(long)]
        text: bool,
    },
    /// Render a plot or export surface data.
    Plot(PlotArgs),
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    input: PathBuf,
    /// Label column, by header name or zero-based index. A name implies --header.
    #[arg(long)]
    label_column: Option<String>,
    /// Treat the first line as a header.
    #[arg(long)]
    header: bool,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    side: usize,
    #[arg(long)]
    presentations: u64,
    #[arg(long)]
    learning_rate: f64,
    /// Initial neighborhood radius; defaults to half the side.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = SamplingArg::Random)]
    sampling: SamplingArg,
    #[arg(long)]
    output: PathBuf,
    /// Write the training trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    assignments: Option<PathBuf>,
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, value_enum, default_value_t = ScaleArg::Linear)]
    scale: ScaleArg,
    /// Pixels per grid cell or bar.
    #[arg(long, default_value_t = 24)]
    cell_size: u32,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplingArg {
    Cyclic,
    #[value(alias = "uniform-random")]
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    ActivationHeatmap,
    UmatrixHeatmap,
    ActivationBars,
    SurfaceData,
    CodebookTiles,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Linear,
    Log1p,
}

enum Failure {
    Usage(String),
    Lib(SomError),
}

impl From<SomError> for Failure {
    fn from(e: SomError) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Stats { data } => stats(&data),
        Command::Train(args) => train(&args),
        Command::Classify { model, data, output } => classify_cmd(&model, &data, &output),
        Command::Report {
            model,
            data,
            assignments,
            output,
            text,
        } => report(&model, &data, assignments.as_deref(), &output, text),
        Command::Plot(args) => plot(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("\nFor more information, try '--help'.");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, SomError::Invariant(_)) { 3 } else { 2 })
        }
    }
}

fn load_data(args: &DataArgs) -> Result<Dataset, Failure> {
    if !args.delimiter.is_ascii() {
        return Err(Failure::Usage(format!("delimiter `{}` is not a single ASCII character", args.delimiter)));
    }
    let label_column = args.label_column.as_deref().map(|s| s.parse::<LabelColumn>().unwrap());
    let options = CsvOptions {
        has_header: args.header || matches!(label_column, Some(LabelColumn::Name(_))),
        label_column,
        delimiter: args.delimiter as u8,
    };
    Ok(load_csv(&args.input, &options)?)
}

fn read_model(path: &Path) -> Result<(SomModel, Vec<u8>), Failure> {
    let bytes = fs::read(path).map_err(|e| SomError::io(path, e))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| SomError::MalformedJson { line: 0, column: 0, message: "model file is not UTF-8".into() })?;
    Ok((from_json_str(&text)?, bytes))
}

fn read_assignments(path: &Path, side: usize) -> Result<Assignments, Failure> {
    let file = fs::File::open(path).map_err(|e| SomError::io(path, e))?;
    Ok(Assignments::read_csv(file, side)?)
}

/// Writes every file or none: on a failed write the files already written
/// are removed again.
fn write_outputs(outputs: &[(&Path, Vec<u8>)]) -> Result<(), SomError> {
    for (i, (path, bytes)) in outputs.iter().enumerate() {
        if let Err(e) = fs::write(path, bytes) {
            for (done, _) in &outputs[..i] {
                let _ = fs::remove_file(done);
            }
            return Err(SomError::io(path, e));
        }
    }
    Ok(())
}

fn print_json(value: &serde_json::Value) {
    println!("{value:#}");
}

fn stats(data: &DataArgs) -> Outcome {
    let ds = load_data(data)?;
    print_json(&json!({ "samples": ds.len(), "features": summarize(&ds)? }));
    Ok(())
}

fn train(args: &TrainArgs) -> Outcome {
    let ds = load_data(&args.data)?;
    let mut cfg = TrainingConfig::new(args.side, args.presentations, args.learning_rate)
        .with_seed(args.seed)
        .with_sampling(match args.sampling {
            SamplingArg::Cyclic => Sampling::Cyclic,
            SamplingArg::Random => Sampling::Random,
        });
    if let Some(r) = args.radius {
        cfg = cfg.with_radius(r);
    }
    let (model, trace) = fit_and_train(&ds, &cfg)?;
    let qe = quantization_error(&model, &ds)?;

    let mut outputs = vec![(args.output.as_path(), to_json_string(&model)?.into_bytes())];
    if let Some(path) = &args.trace {
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        outputs.push((path.as_path(), buf));
    }
    write_outputs(&outputs)?;
    print_json(&json!({
        "quantization_error": qe,
        "presentations": cfg.presentations,
        "side": cfg.side,
        "dim": model.dim(),
        "model": args.output,
    }));
    Ok(())
}

fn classify_cmd(model_path: &Path, data: &DataArgs, output: &Path) -> Outcome {
    let (model, before) = read_model(model_path)?;
    let ds = load_data(data)?;
    let assignments = classify(&model, &ds)?;
    let after = fs::read(model_path).map_err(|e| SomError::io(model_path, e))?;
    if before != after {
        return Err(SomError::Invariant("model changed during classification".into()).into());
    }
    let mut buf = Vec::new();
    assignments.write_csv(&mut buf)?;
    write_outputs(&[(output, buf)])?;
    print_json(&json!({
        "samples": assignments.len(),
        "activation_density": somtool_core::activation_density(&assignments),
        "output": output,
    }));
    Ok(())
}

fn report(model_path: &Path, data: &DataArgs, assignments: Option<&Path>, output: &Path, text: bool) -> Outcome {
    let (model, _) = read_model(model_path)?;
    let ds = load_data(data)?;
    let a = match assignments {
        Some(path) => read_assignments(path, model.side())?,
        None => classify(&model, &ds)?,
    };
    let report = build_report(&model, &a, &ds)?;
    write_outputs(&[(output, report.to_json_pretty()?.into_bytes())])?;
    if text {
        print!("{report}");
    } else {
        print_json(&json!({ "metrics": report.metrics, "output": output }));
    }
    Ok(())
}

fn plot(args: &PlotArgs) -> Outcome {
    let kind = match args.kind {
        KindArg::ActivationHeatmap => PlotKind::ActivationHeatmap,
        KindArg::UmatrixHeatmap => PlotKind::UMatrixHeatmap,
        KindArg::ActivationBars => PlotKind::ActivationBars,
        KindArg::SurfaceData => PlotKind::SurfaceData,
        KindArg::CodebookTiles => PlotKind::CodebookTiles,
    };
    if kind.needs_assignments() && args.assignments.is_none() {
        return Err(Failure::Usage("this plot kind requires --assignments".into()));
    }
    let (model, _) = read_model(&args.model)?;
    let assignments = match &args.assignments {
        Some(path) => Some(read_assignments(path, model.side())?),
        None => None,
    };
    let counts = || GridValues::from_counts(model.side(), assignments.as_ref().unwrap().activation_counts());
    let spec = PlotSpec {
        kind,
        color_scale: match args.scale {
            ScaleArg::Linear => ColorScale::Linear,
            ScaleArg::Log1p => ColorScale::Log1p,
        },
        cell_size: args.cell_size,
    };
    let body = match kind {
        PlotKind::ActivationHeatmap => render_heatmap(&counts()?, &spec)?,
        PlotKind::UMatrixHeatmap => render_heatmap(&u_matrix(&model), &spec)?,
        PlotKind::ActivationBars => render_bars(&activation_histogram(assignments.as_ref().unwrap()), &spec)?,
        PlotKind::SurfaceData => match &assignments {
            Some(_) => surface_json(&counts()?)?,
            None => surface_json(&u_matrix(&model))?,
        },
        PlotKind::CodebookTiles => render_codebook_tiles(&model, &spec)?,
    };
    write_outputs(&[(&args.output, body.into_bytes())])?;
    print_json(&json!({ "kind": args.kind.to_possible_value().unwrap().get_name(), "output": args.output }));
    Ok(())
}
