use annet_core::activation::DEFAULT_EXP_ALPHA;
use annet_core::{mc_output_variance, seed, ActivationKind, VarianceConfig};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::config::resolve;
use crate::error::Result;
use crate::manifest::{Run, RunManifest};
use crate::RunArgs;

#[derive(Args, Debug, Serialize)]
pub struct VarianceArgs {
    /// Samples per simulated dataset.
    #[arg(long)]
    pub m: Option<usize>,
    /// Input dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Input interval as `lo,hi`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub range: Option<Vec<f64>>,
    #[arg(long)]
    pub noise_scale: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub activation: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    pub run: RunArgs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarianceSettings {
    pub m: usize,
    pub d: usize,
    pub range: (f64, f64),
    pub noise_scale: f64,
    pub trials: usize,
    pub max_depth: usize,
    pub activation: ActivationKind,
    pub seed: u64,
}

impl Default for VarianceSettings {
    fn default() -> Self {
        let cfg = VarianceConfig::default();
        VarianceSettings {
            m: cfg.m,
            d: cfg.d,
            range: cfg.input_range,
            noise_scale: cfg.noise_scale,
            trials: cfg.trials,
            max_depth: cfg.max_depth,
            activation: ActivationKind::ExpScaled(DEFAULT_EXP_ALPHA),
            seed: 0,
        }
    }
}

pub const REPORT_FILE: &str = "variance.csv";

pub fn run(args: VarianceArgs) -> Result<RunManifest> {
    let s: VarianceSettings = resolve(args.run.config.as_deref(), "variance", &args)?;
    let cfg = VarianceConfig {
        m: s.m,
        d: s.d,
        input_range: s.range,
        noise_scale: s.noise_scale,
        trials: s.trials,
        max_depth: s.max_depth,
        activation: s.activation,
        seed: seed::derive(s.seed, "mc"),
    };
    cfg.validate()?;
    let mut run = Run::new(&args.run.out)?;
    let report = run.time("simulate", || Ok(mc_output_variance(&cfg)?))?;
    run.write(REPORT_FILE, &report.to_csv_string())?;
    for (k, (mean, std)) in report.per_depth_mean.iter().zip(&report.per_depth_std).enumerate() {
        println!("depth {}: mean {mean:.6e} std {std:.6e}", k + 1);
    }
    run.finish("variance", &s, s.seed)
}
