use std::path::PathBuf;

use annet_core::cv::{cv_search, CvPlan, Metric, ModelSettings, StructureTemplate, DEFAULT_H_GRID};
use annet_core::data::{load_csv, TargetEncoding};
use annet_core::learner::TrainConfig;
use annet_core::{seed, ActivationKind, TaskKind};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::config::resolve;
use crate::error::{CliError, Result};
use crate::manifest::{Run, RunManifest};
use crate::{csv_schema, pinv_options, MissingArg, RunArgs, TaskArg};

#[derive(Args, Debug, Serialize)]
pub struct CvArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Structure templates such as `h-q` or `h-h-q`; `h` is the searched
    /// width, `q` the output width. Repeat or separate with commas.
    #[arg(long = "template", value_delimiter = ',')]
    pub templates: Option<Vec<String>>,
    /// Hidden sizes to search, e.g. `1,2,3,5,10`.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Keep class proportions in every fold (classification only).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub stratified: Option<bool>,
    #[arg(long)]
    pub activation: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub linear_output: Option<bool>,
    #[arg(long = "c")]
    pub c: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<String>,
    #[arg(long)]
    pub ridge: Option<f64>,
    #[arg(long)]
    pub label_column: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub no_header: Option<bool>,
    #[arg(long)]
    pub missing: Option<MissingArg>,
    #[arg(long)]
    pub task: Option<TaskArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    pub run: RunArgs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvSettings {
    pub data: Option<PathBuf>,
    pub templates: Vec<String>,
    pub grid: Vec<usize>,
    pub folds: usize,
    pub trials: usize,
    /// Unset means stratified for classification.
    pub stratified: Option<bool>,
    pub activation: ActivationKind,
    pub linear_output: bool,
    pub c: f64,
    pub tolerance: String,
    pub ridge: f64,
    pub label_column: String,
    pub no_header: bool,
    pub missing: MissingArg,
    pub task: Option<TaskArg>,
    pub seed: u64,
}

impl Default for CvSettings {
    fn default() -> Self {
        CvSettings {
            data: None,
            templates: vec!["h-q".into()],
            grid: DEFAULT_H_GRID.to_vec(),
            folds: 10,
            trials: 10,
            stratified: None,
            activation: ActivationKind::Softplus08,
            linear_output: false,
            c: 1.0,
            tolerance: "auto".into(),
            ridge: 0.0,
            label_column: "last".into(),
            no_header: false,
            missing: MissingArg::Drop,
            task: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub h: usize,
    pub template: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub metric: Metric,
    pub templates: Vec<String>,
    pub grid: Vec<usize>,
    pub folds: usize,
    pub trials: usize,
    pub stratified: bool,
    pub samples: usize,
    /// `scores[trial][fold]` on the outer held-out folds.
    pub scores: Vec<Vec<f64>>,
    pub selected: Vec<Vec<Selection>>,
    pub per_trial_mean: Vec<f64>,
    pub mean_score: f64,
    pub best_h: usize,
    pub best_template: String,
}

pub const REPORT_FILE: &str = "cv_report.json";

pub fn run(args: CvArgs) -> Result<RunManifest> {
    let s: CvSettings = resolve(args.run.config.as_deref(), "cv", &args)?;
    let data = s.data.clone().ok_or_else(|| CliError::Usage("--data is required".into()))?;
    let templates = s
        .templates
        .iter()
        .map(|t| StructureTemplate::parse(t))
        .collect::<annet_core::Result<Vec<_>>>()?;
    let train_cfg = TrainConfig::random(seed::derive(s.seed, "init"), s.c).with_pinv(pinv_options(&s.tolerance, s.ridge)?);
    train_cfg.validate()?;
    let mut run = Run::new(&args.run.out)?;

    let mut schema = csv_schema(&s.label_column, s.no_header, s.missing, s.task);
    schema.encoding = if s.linear_output {
        TargetEncoding::OneHot01
    } else {
        TargetEncoding::SOFT
    };
    let ds = run.time("load", || Ok(load_csv(&data, &schema)?))?;

    let stratified = match (ds.kind, s.stratified) {
        (TaskKind::Regression, Some(true)) => {
            eprintln!("warning: stratified folds need class labels; using unstratified folds for this regression dataset");
            false
        }
        (TaskKind::Regression, _) => false,
        (TaskKind::Classification, flag) => flag.unwrap_or(true),
    };
    let plan = CvPlan {
        folds: s.folds,
        trials: s.trials,
        seed: seed::derive(s.seed, "data"),
        stratified,
    };
    let settings = ModelSettings {
        activation: s.activation,
        linear_output: s.linear_output,
        train: train_cfg,
    };
    let report = run.time("search", || Ok(cv_search(&ds, &templates, &s.grid, &plan, &settings)?))?;

    let name = |t: usize| s.templates[t].clone();
    let summary = CvSummary {
        metric: report.metric,
        templates: s.templates.clone(),
        grid: s.grid.clone(),
        folds: s.folds,
        trials: s.trials,
        stratified,
        samples: ds.len(),
        scores: report.scores.clone(),
        selected: report
            .selected
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| Selection {
                        h: c.h,
                        template: name(c.template),
                    })
                    .collect()
            })
            .collect(),
        per_trial_mean: report.per_trial_mean.clone(),
        mean_score: report.mean_score,
        best_h: report.best_h,
        best_template: name(report.best_template),
    };
    run.write_json(REPORT_FILE, &summary)?;
    let label = match summary.metric {
        Metric::Accuracy => "accuracy",
        Metric::Mse => "mse",
    };
    println!("mean_{label} = {:.4}", summary.mean_score);
    println!("best_h = {} ({})", summary.best_h, summary.best_template);
    run.finish("cv", &s, s.seed)
}
