//! `aperture-dsm` command line.
//!
//! Exit codes: 0 success, 1 usage, 2 data or validation error, 3 numeric
//! failure (degenerate data, truncation, kernel domain).

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aperture_dsm::io::{
    export_map, import_external, load_dataset, load_scenario, parse_complex, preset, save_dataset,
    AngleConvention, FieldColumns, FrequencySelector, ImportMapping, MapFormat, PRESETS,
};
use aperture_dsm::structure::{max_series_argument, SeriesTruncation};
use aperture_dsm::{
    f1_f2_profile, image, structure_vs_direct, synthesize, Complex64, Error, ErrorClass, ForwardModel,
    ImagingGrid, ImagingMode, IndicatorMap, MeasurementConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

const THREADS_ENV: &str = "APERTURE_DSM_THREADS";

#[derive(Parser)]
#[command(name = "aperture-dsm", version, about = "Direct sampling imaging from limited-aperture bistatic data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a built-in scenario file.
    Preset(PresetArgs),
    /// Synthesize a dataset from a scenario.
    Simulate(SimulateArgs),
    /// Evaluate an indicator map from a dataset.
    Image(ImageArgs),
    /// Compare direct inner products with their Bessel-series forms.
    Structure(StructureArgs),
    /// Tabulate the f1/f2 sidelobe profiles.
    Profile(ProfileArgs),
    /// Convert an external measurement table into a dataset.
    Import(ImportArgs),
}

#[derive(Args)]
struct PresetArgs {
    /// Preset name.
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    name: String,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(short, long)]
    scenario: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Override the conversion constant, `RE` or `RE,IM`.
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    constant: Option<Complex64>,
    /// Override the bistatic angle in degrees.
    #[arg(long)]
    alpha: Option<f64>,
    /// Override the forward model: `point`, `disk` or `disk:Q`.
    #[arg(long, value_parser = model_arg)]
    model: Option<ForwardModel>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Single,
    Multi,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Pgm,
}

#[derive(Args)]
struct GridArgs {
    /// Cells along x and y.
    #[arg(long, num_args = 2, value_names = ["NX", "NY"], default_values_t = [101, 101])]
    grid: Vec<usize>,
    /// Half-width of the square imaging region in metres.
    #[arg(long, default_value_t = 0.1)]
    extent: f64,
}

impl GridArgs {
    fn grid(&self) -> Result<ImagingGrid, Error> {
        let e = self.extent;
        ImagingGrid::new(-e, e, -e, e, self.grid[0], self.grid[1])
    }
}

#[derive(Args)]
struct ModeArgs {
    #[arg(long, value_enum, default_value_t = Mode::Single)]
    mode: Mode,
    /// Transmitter index (1-based) for single-source mode.
    #[arg(long, default_value_t = 1)]
    source: usize,
}

impl ModeArgs {
    fn mode(&self) -> ImagingMode {
        match self.mode {
            Mode::Single => ImagingMode::Single { source: self.source },
            Mode::Multi => ImagingMode::Multi,
        }
    }
}

#[derive(Args)]
struct ImageArgs {
    #[arg(short, long)]
    data: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    mode: ModeArgs,
    /// Replace the conversion constant, `RE` or `RE,IM`.
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    constant: Option<Complex64>,
    #[command(flatten)]
    grid: GridArgs,
    /// Map format; inferred from the extension when absent.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Keep raw indicator values instead of dividing by the grid maximum.
    #[arg(long)]
    no_normalize: bool,
    /// Accept a bistatic angle of 180°, where each source has one receiver.
    #[arg(long)]
    allow_degenerate: bool,
}

#[derive(Args)]
struct StructureArgs {
    #[arg(short, long)]
    data: PathBuf,
    /// Scenario the dataset was synthesized from; supplies the objects.
    #[arg(short, long)]
    scenario: PathBuf,
    #[command(flatten)]
    mode: ModeArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Highest Bessel order; defaults to the largest argument plus 40.
    #[arg(long)]
    order: Option<usize>,
    /// Report file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the normalized series modulus map as CSV.
    #[arg(long)]
    series_map: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long, default_value_t = -0.1, allow_hyphen_values = true)]
    from: f64,
    #[arg(long, default_value_t = 0.1)]
    to: f64,
    #[arg(long, default_value_t = 401)]
    samples: usize,
    #[arg(long, default_value_t = 4e9)]
    frequency: f64,
    #[arg(long)]
    order: Option<usize>,
    /// Writes `PREFIX.f1.csv` and `PREFIX.f2.csv`; stdout gets `x,f1,f2` when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Angles {
    Index1,
    Index0,
    Degrees,
}

#[derive(Args)]
struct ImportArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Scenario or preset file providing the measurement geometry.
    #[arg(short, long)]
    config: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// 0-based column of the transmitter id.
    #[arg(long, default_value_t = 0)]
    tx_col: usize,
    /// 0-based column of the receiver id.
    #[arg(long, default_value_t = 1)]
    rx_col: usize,
    /// Scattered-field columns `RE,IM`.
    #[arg(long, value_parser = column_pair, conflicts_with_all = ["total", "incident"])]
    scattered: Option<(usize, usize)>,
    /// Total-field columns `RE,IM`; requires --incident.
    #[arg(long, value_parser = column_pair, requires = "incident")]
    total: Option<(usize, usize)>,
    /// Incident-field columns `RE,IM`; requires --total.
    #[arg(long, value_parser = column_pair, requires = "total")]
    incident: Option<(usize, usize)>,
    #[arg(long, value_enum, default_value_t = Angles::Index1)]
    angles: Angles,
    /// Column holding the frequency in Hz; rows not at --frequency are skipped.
    #[arg(long, requires = "frequency")]
    frequency_col: Option<usize>,
    #[arg(long, requires = "frequency_col")]
    frequency: Option<f64>,
    #[arg(long, default_value = ",")]
    delimiter: char,
    /// The first record is data, not a header.
    #[arg(long)]
    no_header: bool,
    /// Conversion constant for absent rows; defaults to the scenario's.
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    constant: Option<Complex64>,
}

fn complex_arg(s: &str) -> Result<Complex64, String> {
    parse_complex(s).ok_or_else(|| format!("`{s}` is not RE or RE,IM"))
}

fn column_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("`{s}` is not COL,COL"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("`{v}` is not a column index"));
    Ok((parse(a)?, parse(b)?))
}

fn model_arg(s: &str) -> Result<ForwardModel, String> {
    match s {
        "point" => Ok(ForwardModel::Point),
        "disk" => Ok(ForwardModel::Disk { quad_points: ForwardModel::DEFAULT_QUAD_POINTS }),
        _ => s
            .strip_prefix("disk:")
            .and_then(|q| q.parse().ok())
            .map(|quad_points| ForwardModel::Disk { quad_points })
            .ok_or_else(|| format!("`{s}` is not point, disk or disk:Q")),
    }
}

/// Failures that are the caller's fault rather than the data's.
enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Lib(Error::Io { path: p.into(), source: e })),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| Failure::Lib(Error::Io { path: "<stdout>".into(), source: e }))
        }
    }
}

fn run_preset(args: PresetArgs) -> Result<(), Failure> {
    let scenario = preset(&args.name)?;
    write_output(args.output.as_deref(), &scenario.to_text())
}

fn run_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let mut scenario = load_scenario(&args.scenario)?;
    if let Some(alpha) = args.alpha {
        scenario.config = scenario.config.with_bistatic_angle_deg(alpha);
        scenario.config.validate()?;
    }
    let constant = args.constant.unwrap_or(scenario.constant);
    let model = args.model.unwrap_or(scenario.model);
    let matrix = synthesize(&scenario.config, &scenario.objects, constant, model)?;
    save_dataset(&matrix, &args.output)?;
    log::info!("wrote {} entries to {}", matrix.entries().len(), args.output.display());
    Ok(())
}

fn check_alpha(config: &MeasurementConfig, allow_degenerate: bool) -> Result<(), Failure> {
    if config.is_degenerate() && !allow_degenerate {
        return Err(Failure::Lib(Error::InvalidConfig(
            "bistatic angle of 180 deg leaves one receiver per source; pass --allow-degenerate to image anyway"
                .into(),
        )));
    }
    Ok(())
}

fn run_image(args: ImageArgs) -> Result<(), Failure> {
    let mut matrix = load_dataset(&args.data)?;
    check_alpha(matrix.config(), args.allow_degenerate)?;
    if let Some(c) = args.constant {
        matrix = matrix.with_constant(c);
    }
    let grid = args.grid.grid()?;
    let map = image(&matrix, &grid, args.mode.mode(), !args.no_normalize)?;
    let format = match args.format {
        Some(Format::Csv) => MapFormat::Csv,
        Some(Format::Pgm) => MapFormat::Pgm,
        None => MapFormat::from_path(&args.output),
    };
    export_map(&map, &args.output, format)?;
    let peak = map.argmax();
    log::info!("argmax {:.4} at ({:.4}, {:.4})", peak.value, peak.point.x, peak.point.y);
    Ok(())
}

fn run_structure(args: StructureArgs) -> Result<(), Failure> {
    let matrix = load_dataset(&args.data)?;
    let scenario = load_scenario(&args.scenario)?;
    let config = *matrix.config();
    let geometry_matches = |a: &MeasurementConfig, b: &MeasurementConfig| {
        MeasurementConfig { bistatic_angle_deg: 0.0, ..*a } == MeasurementConfig { bistatic_angle_deg: 0.0, ..*b }
    };
    if !geometry_matches(&config, &scenario.config) {
        return Err(Failure::Lib(Error::InvalidConfig(
            "scenario geometry differs from the dataset header".into(),
        )));
    }
    let grid = args.grid.grid()?;
    let x_max = max_series_argument(&config, &scenario.objects, &grid);
    let trunc = match args.order {
        Some(order) => SeriesTruncation::with_order(order, x_max),
        None => SeriesTruncation::for_argument(x_max),
    };
    let mode = args.mode.mode();
    let eval = structure_vs_direct(&matrix, &scenario.objects, &grid, mode, &trunc)?;

    let mut report = String::new();
    let mode_text = match mode {
        ImagingMode::Single { source } => format!("single {source}"),
        ImagingMode::Multi => "multi".into(),
    };
    let c = matrix.constant();
    let _ = writeln!(report, "mode = {mode_text}");
    let _ = writeln!(report, "alpha_deg = {}", config.bistatic_angle_deg);
    let _ = writeln!(report, "constant = {}, {}", c.re, c.im);
    let _ = writeln!(report, "grid = {} x {}", grid.nx, grid.ny);
    let _ = writeln!(report, "max_order = {}", trunc.max_order);
    let _ = writeln!(report, "max_argument = {x_max:.6}");
    let _ = writeln!(report, "tail_bound = {:.3e}", trunc.tail_bound);
    let _ = writeln!(report, "cells_compared = {}", eval.stats.cells_compared);
    let _ = writeln!(report, "correlation = {:.12}", eval.stats.correlation);
    let _ = writeln!(report, "max_deviation = {:.12}", eval.stats.max_deviation);
    let series = eval.normalized_series();
    let (lo, hi) = series.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let _ = writeln!(report, "series_flatness = {:.6e}", (hi - lo) / hi);
    write_output(args.output.as_deref(), &report)?;

    if let Some(path) = args.series_map {
        let map = IndicatorMap {
            grid,
            values: series,
            mode,
            constant: c,
            bistatic_angle_deg: config.bistatic_angle_deg,
            normalized: true,
        };
        export_map(&map, &path, MapFormat::from_path(&path))?;
    }
    Ok(())
}

fn run_profile(args: ProfileArgs) -> Result<(), Failure> {
    if args.samples < 2 || !(args.from < args.to) {
        return Err(Failure::Usage("profile needs --from < --to and at least 2 samples".into()));
    }
    let config = MeasurementConfig { frequency_hz: args.frequency, ..MeasurementConfig::fresnel() };
    config.validate()?;
    let k = config.wavenumber();
    let xs: Vec<f64> = (0..args.samples)
        .map(|i| args.from + (args.to - args.from) * i as f64 / (args.samples - 1) as f64)
        .collect();
    let x_max = k * args.from.abs().max(args.to.abs());
    let trunc = match args.order {
        Some(order) => SeriesTruncation::with_order(order, x_max),
        None => SeriesTruncation::for_argument(x_max),
    };
    let (f1, f2) = f1_f2_profile(&xs, k, &trunc)?;
    let curve = |values: &[f64]| {
        let mut out = String::from("x,value\n");
        for (x, v) in xs.iter().zip(values) {
            let _ = writeln!(out, "{x:.16e},{v:.16e}");
        }
        out
    };
    match args.output {
        Some(prefix) => {
            let with_suffix = |suffix: &str| {
                let mut name = prefix.clone().into_os_string();
                name.push(suffix);
                PathBuf::from(name)
            };
            write_output(Some(&with_suffix(".f1.csv")), &curve(&f1))?;
            write_output(Some(&with_suffix(".f2.csv")), &curve(&f2))?;
        }
        None => {
            let mut out = String::from("x,f1,f2\n");
            for i in 0..xs.len() {
                let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", xs[i], f1[i], f2[i]);
            }
            write_output(None, &out)?;
        }
    }
    Ok(())
}

fn run_import(args: ImportArgs) -> Result<(), Failure> {
    let scenario = load_scenario(&args.config)?;
    let fields = match (args.scattered, args.total, args.incident) {
        (Some((re, im)), None, None) => FieldColumns::Scattered { re, im },
        (None, Some((total_re, total_im)), Some((incident_re, incident_im))) => {
            FieldColumns::TotalIncident { total_re, total_im, incident_re, incident_im }
        }
        (None, None, None) => FieldColumns::Scattered { re: 2, im: 3 },
        _ => return Err(Failure::Usage("give either --scattered or both --total and --incident".into())),
    };
    if !args.delimiter.is_ascii() {
        return Err(Failure::Usage("delimiter must be a single ASCII character".into()));
    }
    let mapping = ImportMapping {
        tx_column: args.tx_col,
        rx_column: args.rx_col,
        fields,
        angles: match args.angles {
            Angles::Index1 => AngleConvention::Index1,
            Angles::Index0 => AngleConvention::Index0,
            Angles::Degrees => AngleConvention::Degrees,
        },
        frequency: args.frequency_col.zip(args.frequency).map(|(column, hz)| FrequencySelector { column, hz }),
        delimiter: args.delimiter as u8,
        has_header: !args.no_header,
    };
    let constant = args.constant.unwrap_or(scenario.constant);
    let matrix = import_external(&args.input, &mapping, &scenario.config, constant)?;
    save_dataset(&matrix, &args.output)?;
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot configure {threads} threads: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Preset(a) => run_preset(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Image(a) => run_image(a),
        Command::Structure(a) => run_structure(a),
        Command::Profile(a) => run_profile(a),
        Command::Import(a) => run_import(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            match e.class() {
                ErrorClass::Data => ExitCode::from(2),
                ErrorClass::Numeric => ExitCode::from(3),
            }
        }
    }
}
