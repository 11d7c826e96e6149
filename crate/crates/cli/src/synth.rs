use annet_core::data::{gen_regression, gen_spiral};
use annet_core::seed;
use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};

use crate::config::resolve;
use crate::error::Result;
use crate::manifest::{Run, RunManifest};
use crate::RunArgs;

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[command(subcommand)]
    pub generator: Generator,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Subcommand, Debug)]
pub enum Generator {
    /// Interleaved spiral arms, one class per arm; alternate points go to
    /// the training and test files.
    Spiral(SpiralArgs),
    /// `sin(2x)/(2x)` sampled at x = 1..8, noisy copies and a dense test grid.
    Regression(RegressionArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct SpiralArgs {
    #[arg(long)]
    pub arms: Option<usize>,
    /// Points per arm before the train/test split.
    #[arg(long)]
    pub per_arm: Option<usize>,
    /// Angular jitter.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpiralSettings {
    pub arms: usize,
    pub per_arm: usize,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SpiralSettings {
    fn default() -> Self {
        SpiralSettings {
            arms: 6,
            per_arm: 500,
            noise: 0.3,
            seed: 0,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct RegressionArgs {
    #[arg(long)]
    pub noisy_sets: Option<usize>,
    /// Noise amplitude as a fraction of the target range.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionSettings {
    pub noisy_sets: usize,
    pub noise: f64,
    pub seed: u64,
}

impl Default for RegressionSettings {
    fn default() -> Self {
        RegressionSettings {
            noisy_sets: 10,
            noise: 0.2,
            seed: 0,
        }
    }
}

pub fn run(args: SynthArgs) -> Result<RunManifest> {
    let config = args.run.config.as_deref();
    match args.generator {
        Generator::Spiral(flags) => {
            let s: SpiralSettings = resolve(config, "synth spiral", &flags)?;
            let mut run = Run::new(&args.run.out)?;
            let (train, test) = run.time("generate", || {
                Ok(gen_spiral(s.arms, s.per_arm, s.noise, seed::derive(s.seed, "data"))?)
            })?;
            run.write("spiral_train.csv", &train.to_labelled_csv_string())?;
            run.write("spiral_test.csv", &test.to_labelled_csv_string())?;
            println!("spiral: {} train rows, {} test rows", train.len(), test.len());
            run.finish("synth spiral", &s, s.seed)
        }
        Generator::Regression(flags) => {
            let s: RegressionSettings = resolve(config, "synth regression", &flags)?;
            let mut run = Run::new(&args.run.out)?;
            let (sets, test) = run.time("generate", || {
                Ok(gen_regression(s.noisy_sets, s.noise, seed::derive(s.seed, "data"))?)
            })?;
            for (i, set) in sets.iter().enumerate() {
                run.write(&format!("regression_train_{i:02}.csv"), &set.to_labelled_csv_string())?;
            }
            run.write("regression_test.csv", &test.to_labelled_csv_string())?;
            println!(
                "regression: {} training sets (set 00 is noise-free), {} test rows",
                sets.len(),
                test.len()
            );
            run.finish("synth regression", &s, s.seed)
        }
    }
}
