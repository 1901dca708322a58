use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use avbench_core::matching::MatchKind;
use avbench_core::model::DetectionClass;
use avbench_core::pipeline::{
    compare_matchers_text, evaluate_detection_text, evaluate_tracking_text, generate_synth_text,
    EvalOptions,
};
use clap::{Args, Parser, Subcommand};

const EXIT_VALIDATION: u8 = 2;
const EXIT_IO: u8 = 3;

/// Evaluation engine for 3D object detection and multi-object tracking.
#[derive(Parser)]
#[command(name = "avbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a detection submission: mAP, TP errors and NDS.
    EvalDetection {
        #[command(flatten)]
        inputs: Inputs,
        /// Results file.
        #[arg(long, default_value = "detection_metrics.json")]
        output: PathBuf,
        #[arg(long, default_value = "cd")]
        matcher: MatchKind,
    },
    /// Score a tracking submission: AMOTA, AMOTP, CLEAR-MOT, TID and LGD.
    EvalTracking {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value = "tracking_metrics.json")]
        output: PathBuf,
    },
    /// Generate a synthetic scenario with noisy detection and tracking
    /// submissions.
    Synth {
        /// Scenario and noise description (JSON).
        config: PathBuf,
        out_dir: PathBuf,
    },
    /// AP per class under center-distance and IOU matching, as CSV.
    CompareMatchers {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value = "matching_study.csv")]
        output: PathBuf,
        /// IOU flavor to compare against.
        #[arg(long, default_value = "iou_3d")]
        matcher: MatchKind,
    },
}

#[derive(Args)]
struct Inputs {
    /// Ground-truth file.
    gt: PathBuf,
    /// Submission file.
    submission: PathBuf,
    /// Evaluation configuration (JSON); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Raster map mask (JSON) used to drop boxes far from the mapped area.
    #[arg(long)]
    map_mask: Option<PathBuf>,
    /// Comma-separated subset of classes to evaluate.
    #[arg(long, value_delimiter = ',')]
    categories: Option<Vec<DetectionClass>>,
}

enum Failure {
    Io(String),
    Invalid(String),
}

impl From<avbench_core::Error> for Failure {
    fn from(e: avbench_core::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_opt(path: Option<&PathBuf>) -> Result<Option<String>, Failure> {
    path.map(|p| read(p)).transpose()
}

/// Writes through a temporary file in the target directory, so a failed
/// run never leaves a partial file behind.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(fs::Permissions::from_mode(0o644))
            .map_err(io)?;
    }
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

struct Loaded {
    gt: String,
    submission: String,
    config: Option<String>,
    map_mask: Option<String>,
}

fn load(inputs: &Inputs) -> Result<Loaded, Failure> {
    Ok(Loaded {
        gt: read(&inputs.gt)?,
        submission: read(&inputs.submission)?,
        config: read_opt(inputs.config.as_ref())?,
        map_mask: read_opt(inputs.map_mask.as_ref())?,
    })
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::EvalDetection {
            inputs,
            output,
            matcher,
        } => {
            let t = load(&inputs)?;
            let options = EvalOptions {
                categories: inputs.categories,
                matcher,
            };
            let eval = evaluate_detection_text(
                &t.gt,
                &t.submission,
                t.config.as_deref(),
                t.map_mask.as_deref(),
                &options,
            )?;
            write_atomic(&output, &eval.json)?;
            print!("{}", eval.table);
        }
        Command::EvalTracking { inputs, output } => {
            let t = load(&inputs)?;
            let options = EvalOptions {
                categories: inputs.categories,
                ..Default::default()
            };
            let eval = evaluate_tracking_text(
                &t.gt,
                &t.submission,
                t.config.as_deref(),
                t.map_mask.as_deref(),
                &options,
            )?;
            write_atomic(&output, &eval.json)?;
            print!("{}", eval.table);
        }
        Command::Synth { config, out_dir } => {
            let files = generate_synth_text(&read(&config)?)?;
            fs::create_dir_all(&out_dir)
                .map_err(|e| Failure::Io(format!("{}: {e}", out_dir.display())))?;
            for (name, contents) in files.named() {
                write_atomic(&out_dir.join(name), contents)?;
            }
            println!("wrote {}", out_dir.display());
        }
        Command::CompareMatchers {
            inputs,
            output,
            matcher,
        } => {
            let t = load(&inputs)?;
            let csv = compare_matchers_text(
                &t.gt,
                &t.submission,
                t.config.as_deref(),
                t.map_mask.as_deref(),
                inputs.categories.as_deref(),
                matcher,
            )?;
            write_atomic(&output, &csv)?;
            print!("{csv}");
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("AVBENCH_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Invalid(format!("AVBENCH_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Invalid(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}
