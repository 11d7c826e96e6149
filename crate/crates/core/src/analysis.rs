//! Representation checks, the output-variance recursion with its Monte
//! Carlo estimate, and feasible-solution counting.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::{self, ActivationKind, DEFAULT_EXP_ALPHA};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::pinv::{self, pinv, PinvOptions};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepresentationReport {
    /// `||A A^+ Y - Y||_F / max(1, ||Y||_F)`
    pub residual: f64,
    pub rank_estimate: usize,
    pub is_representative: bool,
}

/// Whether `y` lies in the column space of `a`.
pub fn representation_check(a: &Matrix, y: &Matrix, tol: f64) -> Result<RepresentationReport> {
    if a.rows() != y.rows() {
        return Err(Error::invalid(format!("a has {} rows but y has {}", a.rows(), y.rows())));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid(format!("tolerance must be > 0, got {tol}")));
    }
    let (a_dag, rank) = pinv::pinv_with_rank(a, &PinvOptions::default())?;
    let projected = a.matmul(&a_dag.matmul(y)?)?;
    let residual = projected.sub(y)?.frobenius_norm() / y.frobenius_norm().max(1.0);
    Ok(RepresentationReport {
        residual,
        rank_estimate: rank,
        is_representative: residual <= tol,
    })
}

/// `[H_1, ..., H_depth]` with `H_1 = X` and `H_{k+1} = f(H_k H_k^+)`.
pub fn variance_chain(x: &Matrix, activation: ActivationKind, max_depth: usize) -> Result<Vec<Matrix>> {
    Ok(chain_with_pinvs(x, activation, max_depth)?.into_iter().map(|(h, _)| h).collect())
}

fn chain_with_pinvs(x: &Matrix, activation: ActivationKind, max_depth: usize) -> Result<Vec<(Matrix, Matrix)>> {
    if max_depth == 0 {
        return Err(Error::invalid("max_depth must be >= 1"));
    }
    let mut out = Vec::with_capacity(max_depth);
    let mut h = x.clone();
    for k in 0..max_depth {
        let h_dag = pinv(&h, &PinvOptions::default())?;
        let next = (k + 1 < max_depth)
            .then(|| h.matmul(&h_dag).map(|p| activation::apply(activation, &p)))
            .transpose()?;
        out.push((h, h_dag));
        match next {
            Some(n) => h = n,
            None => break,
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceConfig {
    pub m: usize,
    pub d: usize,
    pub input_range: (f64, f64),
    pub noise_scale: f64,
    pub trials: usize,
    pub max_depth: usize,
    pub activation: ActivationKind,
    pub seed: u64,
}

impl Default for VarianceConfig {
    fn default() -> Self {
        VarianceConfig {
            m: 100,
            d: 10,
            input_range: (-5.0, 5.0),
            noise_scale: 1.0,
            trials: 1000,
            max_depth: 8,
            activation: ActivationKind::ExpScaled(DEFAULT_EXP_ALPHA),
            seed: 0,
        }
    }
}

impl VarianceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.d == 0 {
            return Err(Error::config("m and d must be >= 1"));
        }
        if self.trials == 0 || self.max_depth == 0 {
            return Err(Error::config("trials and max_depth must be >= 1"));
        }
        let (lo, hi) = self.input_range;
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::config(format!("input_range ({lo}, {hi}) is not a finite interval")));
        }
        if !(self.noise_scale > 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::config(format!("noise_scale must be > 0, got {}", self.noise_scale)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    /// Mean of `(x_0^T H_k^+ eps)^2` over trials, depth `k = 1..=max_depth`.
    pub per_depth_mean: Vec<f64>,
    /// Sample standard deviation across trials.
    pub per_depth_std: Vec<f64>,
    /// Length of `x_0` at each depth: `d` at depth 1, `m` after.
    pub x0_dim: Vec<usize>,
}

impl VarianceReport {
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("depth,mean,std,x0_dim\n");
        for k in 0..self.per_depth_mean.len() {
            s.push_str(&format!(
                "{},{:.16e},{:.16e},{}\n",
                k + 1,
                self.per_depth_mean[k],
                self.per_depth_std[k],
                self.x0_dim[k]
            ));
        }
        s
    }
}

fn uniform_matrix(rng: &mut impl Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(lo..hi))
}

/// Squared output noise `(x_0^T H_k^+ eps)^2` at every depth for one trial.
/// One `x_0` of length `d` serves depth 1 and one of length `m` is shared by
/// all deeper levels, so depths are compared on the same query point.
fn one_trial(cfg: &VarianceConfig, trial: u64) -> Result<Vec<f64>> {
    let mut rng = seed::rng(seed::derive_index(cfg.seed, trial));
    let (lo, hi) = cfg.input_range;
    let x = uniform_matrix(&mut rng, cfg.m, cfg.d, lo, hi);
    let x0_input = uniform_matrix(&mut rng, 1, cfg.d, lo, hi);
    let x0_hidden = uniform_matrix(&mut rng, 1, cfg.m, lo, hi);
    let eps = uniform_matrix(&mut rng, cfg.m, 1, -cfg.noise_scale, cfg.noise_scale);
    chain_with_pinvs(&x, cfg.activation, cfg.max_depth)?
        .iter()
        .enumerate()
        .map(|(k, (_, h_dag))| {
            let x0 = if k == 0 { &x0_input } else { &x0_hidden };
            let v = x0.matmul(h_dag)?.matmul(&eps)?.get(0, 0);
            Ok(v * v)
        })
        .collect()
}

/// Trials run in parallel, each on its own derived seed, and are combined
/// in trial order so the result does not depend on scheduling.
pub fn mc_output_variance(cfg: &VarianceConfig) -> Result<VarianceReport> {
    cfg.validate()?;
    let samples = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| one_trial(cfg, t))
        .collect::<Result<Vec<_>>>()?;
    let n = samples.len() as f64;
    let mut mean = vec![0.0; cfg.max_depth];
    let mut std = vec![0.0; cfg.max_depth];
    for k in 0..cfg.max_depth {
        mean[k] = samples.iter().map(|s| s[k]).sum::<f64>() / n;
        if samples.len() > 1 {
            let ss: f64 = samples.iter().map(|s| (s[k] - mean[k]).powi(2)).sum();
            std[k] = (ss / (n - 1.0)).sqrt();
        }
    }
    let x0_dim = (0..cfg.max_depth).map(|k| if k == 0 { cfg.d } else { cfg.m }).collect();
    Ok(VarianceReport {
        per_depth_mean: mean,
        per_depth_std: std,
        x0_dim,
    })
}

/// Squared bias and variance of an ensemble of predictions against a known
/// ground truth on the same test points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasVariance {
    pub bias_squared: f64,
    pub variance: f64,
}

/// `predictions` holds one m x q output per trained model. Bias is the
/// squared gap between the ensemble mean and `truth(x_i)`, averaged over
/// points; variance is the spread around the ensemble mean.
pub fn empirical_bias_variance(
    predictions: &[Matrix],
    x_test: &Matrix,
    truth: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<BiasVariance> {
    let first = predictions
        .first()
        .ok_or_else(|| Error::invalid("need at least one prediction matrix"))?;
    let (m, q) = first.shape();
    if predictions.iter().any(|p| p.shape() != (m, q)) || x_test.rows() != m {
        return Err(Error::invalid("prediction shapes disagree with each other or with x_test"));
    }
    let n = predictions.len() as f64;
    let mut bias = 0.0;
    let mut var = 0.0;
    for i in 0..m {
        let t = truth(&x_test.row(i));
        if t.len() != q {
            return Err(Error::invalid(format!("truth returned {} values, expected {q}", t.len())));
        }
        for (j, tj) in t.iter().enumerate() {
            let mean = predictions.iter().map(|p| p.get(i, j)).sum::<f64>() / n;
            bias += (mean - tj).powi(2);
            var += predictions.iter().map(|p| (p.get(i, j) - mean).powi(2)).sum::<f64>() / n;
        }
    }
    let cells = (m * q) as f64;
    Ok(BiasVariance {
        bias_squared: bias / cells,
        variance: var / cells,
    })
}

/// Number of feasible weight-set families for an `n`-layer network,
/// expressed as `N^exponent * multiplier` with `N` the (infinite) number of
/// choices per free layer.
pub fn solution_count(n: usize) -> Result<(usize, usize)> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "solution_count needs at least two layers, got {n}; a single layer has a unique solution"
        )));
    }
    // C(n, n-1) = n
    Ok((n - 1, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_representative() {
        let y = Matrix::from_rows(&[[1.0, -2.0], [3.0, 0.5], [4.0, 1.0]]).unwrap();
        let r = representation_check(&Matrix::identity(3), &y, 1e-9).unwrap();
        assert!(r.residual < 1e-15);
        assert!(r.is_representative);
        assert_eq!(r.rank_estimate, 3);
    }

    #[test]
    fn orthogonal_target_is_not_representative() {
        let a = Matrix::from_rows(&[[1.0], [0.0]]).unwrap();
        let y = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        let r = representation_check(&a, &y, 1e-9).unwrap();
        assert!((r.residual - 1.0).abs() < 1e-15);
        assert!(!r.is_representative);
        assert!(representation_check(&a, &Matrix::zeros(3, 1), 1e-9).is_err());
    }

    #[test]
    fn depth_one_chain_is_input() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 7.0]]).unwrap();
        let chain = variance_chain(&x, ActivationKind::Identity, 1).unwrap();
        assert_eq!(chain, vec![x]);
    }

    #[test]
    fn identity_chain_reaches_projector() {
        // wide X has full row rank, so X X^+ = I
        let x = Matrix::from_rows(&[[1.0, 2.0, 0.0, 1.0], [3.0, -1.0, 2.0, 0.0], [0.5, 4.0, 1.0, 2.0]]).unwrap();
        let chain = variance_chain(&x, ActivationKind::Identity, 4).unwrap();
        for h in &chain[1..] {
            assert!(h.max_abs_diff(&Matrix::identity(3)) < 1e-12);
        }
    }

    #[test]
    fn solution_counts() {
        assert_eq!(solution_count(2).unwrap(), (1, 2));
        assert_eq!(solution_count(3).unwrap(), (2, 3));
        assert_eq!(solution_count(4).unwrap(), (3, 4));
        assert!(solution_count(1).is_err());
        assert!(solution_count(0).is_err());
    }

    #[test]
    fn single_trial_is_reproducible() {
        let cfg = VarianceConfig {
            m: 12,
            d: 3,
            trials: 1,
            max_depth: 3,
            seed: 5,
            ..Default::default()
        };
        let a = mc_output_variance(&cfg).unwrap();
        let b = mc_output_variance(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.x0_dim, vec![3, 12, 12]);
        assert_eq!(a.per_depth_std, vec![0.0; 3]);
    }

    #[test]
    fn bias_variance_of_constant_ensemble() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        let preds = vec![
            Matrix::from_rows(&[[1.0], [1.0]]).unwrap(),
            Matrix::from_rows(&[[3.0], [3.0]]).unwrap(),
        ];
        let bv = empirical_bias_variance(&preds, &x, |_| vec![0.0]).unwrap();
        assert!((bv.bias_squared - 4.0).abs() < 1e-15);
        assert!((bv.variance - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let r = VarianceReport {
            per_depth_mean: vec![1.0, 0.5],
            per_depth_std: vec![0.1, 0.2],
            x0_dim: vec![10, 100],
        };
        let csv = r.to_csv_string();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("depth,mean,std,x0_dim\n1,"));
    }
}
