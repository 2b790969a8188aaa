use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use phoenixmap::io::{load_outline, load_points, InputError, PointFormat};
use phoenixmap::pipeline::{run_pipeline, Config, HullMode, PipelineError, Sidecar};
use phoenixmap::render::Rgb;
use phoenixmap::synth::{generate_synthetic, SyntheticKind};
use phoenixmap::Error;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "phoenixmap",
    version,
    about = "Outline maps whose stroke width follows point density"
)]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a map from a point file.
    Render(Box<RenderArgs>),
    /// Write a reproducible synthetic point set as CSV.
    Synth(SynthArgs),
    /// Redraw the SVG recorded by a sidecar file.
    Rerender(RerenderArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Hull {
    Concave,
    Convex,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Geojson,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// Points as CSV (x, y and optional series, time columns) or GeoJSON.
    #[arg(long)]
    input: PathBuf,
    /// Input format; guessed from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Use this polygon (GeoJSON or x,y CSV) instead of a computed hull.
    #[arg(long)]
    outline: Option<PathBuf>,
    /// Start from a config file, or from the config recorded in a sidecar.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    segments: Option<usize>,
    /// Smoothing half-window in segments (default: segments / 10).
    #[arg(long)]
    window: Option<usize>,
    /// Fixed density-to-width scale.
    #[arg(long, conflicts_with = "max_width")]
    scale: Option<f64>,
    /// Width of the widest band when the scale is chosen automatically.
    #[arg(long)]
    max_width: Option<f64>,
    /// Neighbour count for the concave hull.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, conflicts_with = "outline")]
    hull: Option<Hull>,
    /// Outline offset in map units.
    #[arg(long)]
    offset: Option<f64>,
    /// qual6, set1, or a comma-separated list of #rrggbb colours.
    #[arg(long)]
    palette: Option<String>,
    #[arg(long)]
    legend_bins: Option<usize>,
    #[arg(long)]
    legend_bars: Option<usize>,
    #[arg(long)]
    no_legend: bool,
    /// Earliest colour of the time ramp.
    #[arg(long)]
    time_start: Option<Rgb>,
    /// Latest colour of the time ramp.
    #[arg(long)]
    time_end: Option<Rgb>,
    /// Map width in render units.
    #[arg(long)]
    width: Option<f64>,
    #[arg(long)]
    opacity: Option<f64>,
    /// Also draw the input points.
    #[arg(long)]
    dots: bool,
    /// Add a kernel density layer with this bandwidth in map units.
    #[arg(long)]
    heat: Option<f64>,
    #[arg(long, default_value = "map.svg")]
    out: PathBuf,
    /// Write the JSON sidecar here.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value = "gaussian")]
    kind: SyntheticKind,
    #[arg(long, default_value_t = 10_000)]
    count: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RerenderArgs {
    #[arg(long)]
    sidecar: PathBuf,
    #[arg(long, default_value = "map.svg")]
    out: PathBuf,
}

fn init_logging(verbose: u8) {
    let default = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let mut builder =
        env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(default));
    if std::env::var_os("PHOENIXMAP_NO_COLOR").is_some() {
        builder.write_style(env_logger::WriteStyle::Never);
    }
    builder.format_timestamp(None).init();
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(|source| Error::Output {
        path: path.to_owned(),
        source,
    })
}

fn read_json(path: &Path) -> Result<serde_json::Value, Error> {
    let text = fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| {
        InputError::Parse {
            location: path.display().to_string(),
            message: e.to_string(),
        }
        .into()
    })
}

fn base_config(path: &Path) -> Result<Config, Error> {
    let mut value = read_json(path)?;
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    serde_json::from_value(value).map_err(|e| {
        InputError::Parse {
            location: path.display().to_string(),
            message: e.to_string(),
        }
        .into()
    })
}

fn build_config(args: &RenderArgs) -> Result<Config, Error> {
    let mut c = match &args.config {
        Some(path) => base_config(path)?,
        None => Config::default(),
    };
    macro_rules! set {
        ($($field:ident <- $arg:expr),* $(,)?) => {
            $(if let Some(v) = $arg.clone() { c.$field = v; })*
        };
    }
    set!(
        segments <- args.segments,
        max_width <- args.max_width,
        hull_k <- args.k,
        palette <- args.palette,
        legend_bins <- args.legend_bins,
        legend_bars <- args.legend_bars,
        time_start <- args.time_start,
        time_end <- args.time_end,
        canvas_width <- args.width,
        opacity <- args.opacity,
    );
    if args.window.is_some() {
        c.window = args.window;
    } else if args.segments.is_some() {
        c.window = None;
    }
    if args.scale.is_some() {
        c.scale = args.scale;
    } else if args.max_width.is_some() {
        c.scale = None;
    }
    if args.offset.is_some() {
        c.offset = args.offset;
    }
    if args.heat.is_some() {
        c.heat_bandwidth = args.heat;
    }
    if args.no_legend {
        c.legend = false;
    }
    if args.dots {
        c.dots = true;
    }
    match (args.hull, &args.outline) {
        (_, Some(_)) => c.hull_mode = HullMode::Predefined,
        (Some(Hull::Concave), None) => c.hull_mode = HullMode::Concave,
        (Some(Hull::Convex), None) => c.hull_mode = HullMode::Convex,
        (None, None) => {
            if c.hull_mode == HullMode::Predefined {
                c.hull_mode = HullMode::Concave;
            }
        }
    }
    c.input = Some(args.input.clone());
    c.outline = args.outline.clone();
    c.out = Some(args.out.clone());
    c.sidecar = args.sidecar.clone();
    Ok(c)
}

fn render(args: &RenderArgs) -> Result<(), Error> {
    let config = build_config(args)?;
    config.validate()?;
    let format = match args.format {
        Some(Format::Csv) => PointFormat::Csv,
        Some(Format::Geojson) => PointFormat::Geojson,
        None => PointFormat::from_path(&args.input),
    };
    let table = load_points(&args.input, format)?;
    if table.is_empty() {
        return Err(PipelineError::NoGroups.into());
    }
    let outline = args.outline.as_deref().map(load_outline).transpose()?;
    info!("{} points from {}", table.len(), args.input.display());
    let output = run_pipeline(&table, &config, outline.as_ref())?;
    write_file(&args.out, &output.svg)?;
    info!("wrote {}", args.out.display());
    if let Some(path) = &args.sidecar {
        let json = serde_json::to_string_pretty(&output.sidecar).expect("sidecar serializes");
        write_file(path, &json)?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<(), Error> {
    let table = generate_synthetic(args.kind, args.count, args.seed);
    let result = match &args.out {
        Some(path) => File::create(path)
            .and_then(|f| {
                let mut w = BufWriter::new(f);
                table.write_csv(&mut w).map_err(io::Error::other)?;
                w.flush()
            })
            .map_err(|source| (path.clone(), source)),
        None => table
            .write_csv(io::stdout().lock())
            .map_err(|e| (PathBuf::from("<stdout>"), io::Error::other(e))),
    };
    result.map_err(|(path, source)| Error::Output { path, source })
}

fn rerender(args: &RerenderArgs) -> Result<(), Error> {
    let value = read_json(&args.sidecar)?;
    let sidecar: Sidecar = serde_json::from_value(value).map_err(|e| InputError::Parse {
        location: args.sidecar.display().to_string(),
        message: e.to_string(),
    })?;
    let svg = sidecar.render_svg().map_err(PipelineError::from)?;
    write_file(&args.out, &svg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    init_logging(cli.verbose);
    let result = match &cli.command {
        Command::Render(args) => render(args),
        Command::Synth(args) => synth(args),
        Command::Rerender(args) => rerender(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
