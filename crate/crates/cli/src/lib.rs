//! `annet`: train, cross-validate and analyse networks whose weights are
//! solved layer by layer with pseudoinverses.
//!
//! Every command resolves its settings from defaults, an optional JSON file
//! (`--config`) and flags, in increasing precedence, and writes its reports
//! plus a `manifest.json` under `--out`.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub mod config;
pub mod cv;
pub mod error;
pub mod manifest;
pub mod selfcheck;
pub mod synth;
pub mod train;
pub mod variance;

pub use error::{CliError, Result};
pub use manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(name = "annet", version, about = "Gradient-free network training by pseudoinverse projections")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train one network on a CSV dataset.
    Train(train::TrainArgs),
    /// Nested cross-validation over hidden sizes and structure templates.
    Cv(cv::CvArgs),
    /// Generate synthetic datasets.
    Synth(synth::SynthArgs),
    /// Monte Carlo output variance against network depth.
    Variance(variance::VarianceArgs),
    /// Check the pseudoinverse against its defining conditions and a
    /// normal-equation oracle.
    Selfcheck(selfcheck::SelfcheckArgs),
}

/// Options every command accepts. Not part of the echoed configuration.
#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// JSON settings file; a previous run's manifest.json also works.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for reports and the run manifest.
    #[arg(long, global = true, default_value = "annet-out")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MissingArg {
    #[default]
    Drop,
    MeanImpute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskArg {
    Classification,
    Regression,
}

/// CSV layout settings shared by the commands that read datasets.
pub(crate) fn csv_schema(
    label_column: &str,
    no_header: bool,
    missing: MissingArg,
    task: Option<TaskArg>,
) -> annet_core::data::CsvSchema {
    use annet_core::data::{CsvSchema, LabelColumn, MissingPolicy};
    let label_column = match label_column.trim() {
        "last" => LabelColumn::Last,
        s => match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        },
    };
    CsvSchema {
        label_column,
        header: !no_header,
        missing_policy: match missing {
            MissingArg::Drop => MissingPolicy::Drop,
            MissingArg::MeanImpute => MissingPolicy::MeanImpute,
        },
        task: task.map(|t| match t {
            TaskArg::Classification => annet_core::TaskKind::Classification,
            TaskArg::Regression => annet_core::TaskKind::Regression,
        }),
        ..Default::default()
    }
}

/// `"auto"` or a non-negative cutoff for singular values.
pub(crate) fn pinv_options(tolerance: &str, ridge: f64) -> Result<annet_core::PinvOptions> {
    use annet_core::{PinvOptions, Tolerance};
    let tolerance = match tolerance.trim() {
        "auto" => Tolerance::Automatic,
        s => Tolerance::Explicit(
            s.parse()
                .map_err(|_| CliError::Usage(format!("tolerance must be `auto` or a number, got {s:?}")))?,
        ),
    };
    let opts = PinvOptions { tolerance, ridge };
    opts.validate()?;
    Ok(opts)
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(a) => train::run(a).map(|_| ()),
        Command::Cv(a) => cv::run(a).map(|_| ()),
        Command::Synth(a) => synth::run(a).map(|_| ()),
        Command::Variance(a) => variance::run(a).map(|_| ()),
        Command::Selfcheck(a) => selfcheck::run(a).map(|_| ()),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 on success, 2 for usage errors and missing files,
/// 1 otherwise.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            e.exit_code()
        }
    }
}
