use std::path::PathBuf;

use annet_core::data::{accuracy, load_csv, TargetEncoding};
use annet_core::learner::{SolveOrder, TrainConfig};
use annet_core::{forward, seed, sse, train, ActivationKind, NetworkSpec, TaskKind};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::config::resolve;
use crate::error::{CliError, Result};
use crate::manifest::{Run, RunManifest};
use crate::{csv_schema, pinv_options, MissingArg, RunArgs, TaskArg};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    /// Uniform placeholders in `[-c, c]`.
    #[default]
    Random,
    /// Hidden weights from pseudoinverses of the data; hidden widths must
    /// equal the sample count.
    DataMatrix,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    /// Training CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Optional held-out CSV with the same columns.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Layer widths such as `8-1` or `150^r3-250-6`.
    #[arg(long)]
    pub structure: Option<String>,
    /// identity, softplus, softplus08, exp or exp:<alpha>.
    #[arg(long)]
    pub activation: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub linear_output: Option<bool>,
    #[arg(long)]
    pub init: Option<InitKind>,
    /// Scale of the random placeholders.
    #[arg(long = "c")]
    pub c: Option<f64>,
    /// 1-based order in which the inner layers are solved, e.g. `2,1`.
    #[arg(long, value_delimiter = ',')]
    pub solve_order: Option<Vec<usize>>,
    /// Singular-value cutoff: `auto` or a number.
    #[arg(long)]
    pub tolerance: Option<String>,
    #[arg(long)]
    pub ridge: Option<f64>,
    /// Distance above an inverse's domain bound that clamped targets get.
    #[arg(long)]
    pub clamp_margin: Option<f64>,
    /// Fail instead of clamping targets outside an inverse's domain.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub reject_domain_violations: Option<bool>,
    /// `last`, a 0-based column index or a header name.
    #[arg(long)]
    pub label_column: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub no_header: Option<bool>,
    #[arg(long)]
    pub missing: Option<MissingArg>,
    /// Overrides task detection from the label column.
    #[arg(long)]
    pub task: Option<TaskArg>,
    /// Write every weight matrix as CSV under `weights/`.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dump_weights: Option<bool>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    pub run: RunArgs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSettings {
    pub data: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub structure: Option<String>,
    pub activation: ActivationKind,
    pub linear_output: bool,
    pub init: InitKind,
    pub c: f64,
    pub solve_order: Option<Vec<usize>>,
    pub tolerance: String,
    pub ridge: f64,
    pub clamp_margin: f64,
    pub reject_domain_violations: bool,
    pub label_column: String,
    pub no_header: bool,
    pub missing: MissingArg,
    pub task: Option<TaskArg>,
    pub dump_weights: bool,
    pub seed: u64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            data: None,
            test: None,
            structure: None,
            activation: ActivationKind::Softplus08,
            linear_output: false,
            init: InitKind::Random,
            c: 1.0,
            solve_order: None,
            tolerance: "auto".into(),
            ridge: 0.0,
            clamp_margin: annet_core::activation::DEFAULT_CLAMP_MARGIN,
            reject_domain_violations: false,
            label_column: "last".into(),
            no_header: false,
            missing: MissingArg::Drop,
            task: None,
            dump_weights: false,
            seed: 0,
        }
    }
}

impl TrainSettings {
    pub fn train_config(&self) -> Result<TrainConfig> {
        let cfg = match self.init {
            InitKind::Random => TrainConfig::random(seed::derive(self.seed, "init"), self.c),
            InitKind::DataMatrix => TrainConfig::data_matrix(),
        };
        let mut cfg = cfg.with_pinv(pinv_options(&self.tolerance, self.ridge)?);
        if let Some(order) = &self.solve_order {
            if order.contains(&0) {
                return Err(CliError::Usage("--solve-order layers are numbered from 1".into()));
            }
            cfg = cfg.with_solve_order(SolveOrder::Custom(order.iter().map(|k| k - 1).collect()));
        }
        cfg.clamp_margin = (!self.reject_domain_violations).then_some(self.clamp_margin);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Classification targets sit strictly inside the output inverse's
    /// domain unless the output layer is linear.
    pub fn encoding(&self) -> TargetEncoding {
        if self.linear_output {
            TargetEncoding::OneHot01
        } else {
            TargetEncoding::SOFT
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub structure: String,
    pub activation: ActivationKind,
    pub linear_output: bool,
    pub task: TaskKind,
    pub classes: Option<Vec<String>>,
    pub input_dim: usize,
    pub output_dim: usize,
    pub samples: usize,
    pub train_sse: f64,
    pub train_accuracy: Option<f64>,
    pub test_samples: Option<usize>,
    pub test_sse: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub per_layer_solve_residuals: Vec<f64>,
    pub clamped_entry_counts: Vec<usize>,
    pub weight_files: Vec<String>,
}

pub const REPORT_FILE: &str = "train_report.json";

pub fn run(args: TrainArgs) -> Result<RunManifest> {
    let s: TrainSettings = resolve(args.run.config.as_deref(), "train", &args)?;
    let data = s.data.clone().ok_or_else(|| CliError::Usage("--data is required".into()))?;
    let structure = s
        .structure
        .clone()
        .ok_or_else(|| CliError::Usage("--structure is required".into()))?;
    let cfg = s.train_config()?;
    let mut run = Run::new(&args.run.out)?;

    let mut schema = csv_schema(&s.label_column, s.no_header, s.missing, s.task);
    schema.encoding = s.encoding();
    let ds = run.time("load", || Ok(load_csv(&data, &schema)?))?;
    let test = match &s.test {
        Some(path) => {
            let mut schema = schema.clone();
            schema.task = Some(ds.kind);
            schema.classes = ds.class_labels.clone();
            Some(run.time("load", || Ok(load_csv(path, &schema)?))?)
        }
        None => None,
    };

    let spec = NetworkSpec::from_structure(&structure, ds.x.cols(), s.activation, s.linear_output)?;
    let report = run.time("train", || Ok(train(&spec, &ds.x, &ds.y, &cfg)?))?;

    let classify = ds.kind == TaskKind::Classification;
    let (train_accuracy, test_eval) = run.time("evaluate", || {
        let train_accuracy = if classify {
            Some(accuracy(&forward(&spec, &report.weights, &ds.x)?, &ds)?)
        } else {
            None
        };
        let test_eval = match &test {
            Some(t) => {
                let pred = forward(&spec, &report.weights, &t.x)?;
                let acc = if classify { Some(accuracy(&pred, t)?) } else { None };
                Some((t.len(), sse(&pred, &t.y)?, acc))
            }
            None => None,
        };
        Ok((train_accuracy, test_eval))
    })?;

    let mut weight_files = Vec::new();
    if s.dump_weights {
        for (k, w) in report.weights.weights().iter().enumerate() {
            let rel = format!("weights/layer_{}.csv", k + 1);
            run.write(&rel, &w.to_csv_string())?;
            weight_files.push(rel);
        }
    }
    let summary = TrainSummary {
        structure: spec.structure_string(),
        activation: s.activation,
        linear_output: s.linear_output,
        task: ds.kind,
        classes: ds.class_labels.clone(),
        input_dim: ds.x.cols(),
        output_dim: spec.output_dim(),
        samples: ds.len(),
        train_sse: report.train_sse,
        train_accuracy,
        test_samples: test_eval.map(|t| t.0),
        test_sse: test_eval.map(|t| t.1),
        test_accuracy: test_eval.and_then(|t| t.2),
        per_layer_solve_residuals: report.per_layer_solve_residuals.clone(),
        clamped_entry_counts: report.clamped_entry_counts.clone(),
        weight_files,
    };
    run.write_json(REPORT_FILE, &summary)?;

    println!("train_sse = {:e}", summary.train_sse);
    if let Some(a) = summary.train_accuracy {
        println!("train_accuracy = {a:.4}");
    }
    if let Some(e) = summary.test_sse {
        println!("test_sse = {e:e}");
    }
    if let Some(a) = summary.test_accuracy {
        println!("test_accuracy = {a:.4}");
    }
    run.finish("train", &s, s.seed)
}
