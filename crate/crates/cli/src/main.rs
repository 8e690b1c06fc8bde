use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use wavelift_cli::commands::{self, BenchOptions, Format, SimulateOptions, TransformOptions};
use wavelift_core::parsim::Buffering;
use wavelift_core::schemes::SchemeKind;
use wavelift_core::transform::BoundaryMode;
use wavelift_core::wavelets::WaveletName;

/// Lifting-scheme 2-D wavelet transforms: verification, cost tables,
/// image transforms and a tiled execution simulator.
///
/// Set WAVELIFT_THREADS to cap the worker threads (0 = all cores).
#[derive(Parser)]
#[command(name = "wavelift", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TextOrJson {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Markdown,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Table {
    /// Barriers and operations per scheme.
    Costs,
    /// Shared-memory reads, writes and cells per quadruple.
    Memory,
}

#[derive(Clone, Copy, ValueEnum)]
enum TextOrCsv {
    Text,
    Csv,
}

#[derive(clap::Args)]
struct TransformArgs {
    #[arg(long, default_value = "cdf53")]
    wavelet: WaveletName,
    #[arg(long, default_value = "sweldens")]
    scheme: SchemeKind,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=30))]
    levels: u32,
    #[arg(long, default_value = "periodic")]
    boundary: BoundaryMode,
    /// Apply the final scaling step.
    #[arg(long)]
    scaling: bool,
    /// Symmetrically pad the image to a multiple of 2^levels.
    #[arg(long)]
    pad: bool,
}

impl TransformArgs {
    fn options(&self) -> TransformOptions {
        TransformOptions {
            wavelet: self.wavelet,
            scheme: self.scheme,
            levels: self.levels as usize,
            boundary: self.boundary,
            scaling: self.scaling,
            pad: self.pad,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check that every scheme's step product equals the full polyphase matrix.
    Verify {
        #[arg(long)]
        wavelet: Option<WaveletName>,
        #[arg(long)]
        scheme: Option<SchemeKind>,
        #[arg(long, value_enum, default_value = "text")]
        format: TextOrJson,
    },
    /// Print the cost or memory table for all wavelets and schemes.
    Report {
        #[arg(long, value_enum, default_value = "csv")]
        format: TableFormat,
        #[arg(long, value_enum, default_value = "costs")]
        table: Table,
    },
    /// Transform a PGM image into a subband file.
    Transform {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        args: TransformArgs,
    },
    /// Reconstruct a PGM image from a subband file.
    Inverse {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 255)]
        maxval: u16,
    },
    /// Transform and reconstruct an image, reporting the largest error.
    Roundtrip {
        input: PathBuf,
        #[command(flatten)]
        args: TransformArgs,
    },
    /// Run a scheme on the simulated tiled machine and print the trace as JSON.
    Simulate {
        input: PathBuf,
        #[arg(long, default_value = "cdf53")]
        wavelet: WaveletName,
        #[arg(long, default_value = "monolithic")]
        scheme: SchemeKind,
        /// Tile size in quadruples, e.g. 8x8.
        #[arg(long, default_value = "8x8", value_parser = parse_size)]
        tile: (usize, usize),
        /// Halo width in quadruples; defaults to the scheme's total reach.
        #[arg(long)]
        halo: Option<usize>,
        #[arg(long, default_value = "double")]
        buffering: Buffering,
        #[arg(long, default_value = "periodic")]
        boundary: BoundaryMode,
        /// Remove the Nth barrier (1-based) to provoke hazards.
        #[arg(long)]
        break_barrier: Option<usize>,
        /// Maximum number of hazards listed in the output.
        #[arg(long, default_value_t = 20)]
        max_hazards: usize,
    },
    /// Time the forward transform.
    Bench {
        /// Image size, e.g. 1024x1024.
        #[arg(long, default_value = "1024x1024", value_parser = parse_size)]
        size: (usize, usize),
        #[arg(long, default_value = "cdf53")]
        wavelet: WaveletName,
        /// Scheme to time; all schemes when omitted.
        #[arg(long)]
        scheme: Option<SchemeKind>,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        reps: u64,
        #[arg(long, default_value = "periodic")]
        boundary: BoundaryMode,
        #[arg(long, value_enum, default_value = "text")]
        format: TextOrCsv,
    },
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got '{s}'"))?;
    let w: usize = w.parse().map_err(|_| format!("bad width in '{s}'"))?;
    let h: usize = h.parse().map_err(|_| format!("bad height in '{s}'"))?;
    if w == 0 || h == 0 {
        return Err(format!("size '{s}' must be positive"));
    }
    Ok((w, h))
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("WAVELIFT_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().with_context(|| format!("WAVELIFT_THREADS='{v}' is not a number"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    configure_threads()?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = match cli.command {
        Command::Verify { wavelet, scheme, format } => {
            let f = match format {
                TextOrJson::Text => Format::Text,
                TextOrJson::Json => Format::Json,
            };
            commands::verify(wavelet, scheme, f, &mut out)?
        }
        Command::Report { format, table } => {
            let f = match format {
                TableFormat::Csv => Format::Csv,
                TableFormat::Markdown => Format::Markdown,
                TableFormat::Json => Format::Json,
            };
            match table {
                Table::Costs => commands::report_costs(f, &mut out, &mut std::io::stderr())?,
                Table::Memory => commands::report_memory(f, &mut out)?,
            }
        }
        Command::Transform { input, output, args } => commands::transform(&input, &output, &args.options(), &mut out)?,
        Command::Inverse { input, output, maxval } => commands::inverse(&input, &output, maxval, &mut out)?,
        Command::Roundtrip { input, args } => commands::roundtrip(&input, &args.options(), &mut out)?,
        Command::Simulate {
            input,
            wavelet,
            scheme,
            tile,
            halo,
            buffering,
            boundary,
            break_barrier,
            max_hazards,
        } => {
            let opts = SimulateOptions {
                wavelet,
                scheme,
                tile,
                halo,
                buffering,
                boundary,
                break_barrier,
                max_hazards,
            };
            commands::simulate(&input, &opts, &mut out)?
        }
        Command::Bench {
            size,
            wavelet,
            scheme,
            reps,
            boundary,
            format,
        } => {
            let opts = BenchOptions {
                size,
                wavelet,
                scheme,
                reps: reps as usize,
                boundary,
            };
            let f = match format {
                TextOrCsv::Text => Format::Text,
                TextOrCsv::Csv => Format::Csv,
            };
            commands::bench(&opts, f, &mut out)?
        }
    };
    out.flush()?;
    Ok(code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
