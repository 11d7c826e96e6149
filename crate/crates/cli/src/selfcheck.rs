//! Randomized checks of the pseudoinverse: the four Penrose conditions on
//! arbitrary matrices, and agreement with the normal-equation closed forms
//! on full-rank ones.

use annet_core::pinv::{penrose_residual, pinv, pinv_with_flipped_singular_value};
use annet_core::{seed, Matrix, PinvOptions};
use clap::Args;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::resolve;
use crate::error::{CliError, Result};
use crate::manifest::{Run, RunManifest};
use crate::RunArgs;

pub const PENROSE_LIMIT: f64 = 1e-8;
pub const ORACLE_LIMIT: f64 = 1e-8;
const MAX_ROWS: usize = 200;
const MAX_COLS: usize = 100;

#[derive(Args, Debug, Serialize)]
pub struct SelfcheckArgs {
    /// Shapes such as `200x100,30x40`; random shapes up to 200x100 when
    /// omitted.
    #[arg(long, value_delimiter = ',')]
    pub shapes: Option<Vec<String>>,
    /// Number of Penrose-condition checks.
    #[arg(long)]
    pub count: Option<usize>,
    /// Number of oracle comparisons.
    #[arg(long)]
    pub oracle_count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Corrupt the pseudoinverse under test.
    #[arg(long, hide = true, num_args = 0..=1, default_missing_value = "true")]
    pub inject_fault: Option<bool>,
    #[command(flatten)]
    #[serde(skip)]
    pub run: RunArgs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelfcheckSettings {
    pub shapes: Vec<String>,
    pub count: usize,
    pub oracle_count: usize,
    pub seed: u64,
    pub inject_fault: bool,
}

impl Default for SelfcheckSettings {
    fn default() -> Self {
        SelfcheckSettings {
            shapes: Vec::new(),
            count: 100,
            oracle_count: 50,
            seed: 0,
            inject_fault: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub checks: usize,
    pub failures: usize,
    pub worst: f64,
    pub limit: f64,
    /// Shapes of the failing matrices.
    pub failed_shapes: Vec<(usize, usize)>,
}

impl SuiteResult {
    fn new(limit: f64) -> Self {
        SuiteResult {
            checks: 0,
            failures: 0,
            worst: 0.0,
            limit,
            failed_shapes: Vec::new(),
        }
    }

    fn record(&mut self, shape: (usize, usize), value: f64) {
        self.checks += 1;
        if value.is_nan() || value > self.worst {
            self.worst = value;
        }
        if value.is_nan() || value > self.limit {
            self.failures += 1;
            self.failed_shapes.push(shape);
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfcheckReport {
    pub penrose: SuiteResult,
    pub oracle: SuiteResult,
    pub passed: bool,
}

pub fn parse_shape(s: &str) -> Result<(usize, usize)> {
    let bad = || CliError::Usage(format!("shape must look like 200x100, got {s:?}"));
    let (m, n) = s.trim().split_once('x').ok_or_else(bad)?;
    let m: usize = m.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    if m == 0 || n == 0 {
        return Err(bad());
    }
    Ok((m, n))
}

fn uniform(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
}

/// Matrix of the given shape; `variant` cycles through full rank, a
/// low-rank product, a duplicated column with a zero row, and rank one.
pub fn test_matrix(rng: &mut ChaCha8Rng, (m, n): (usize, usize), variant: usize) -> DMatrix<f64> {
    let k = m.min(n);
    match variant % 4 {
        1 if k >= 2 => {
            let r = rng.random_range(1..k);
            uniform(rng, m, r) * uniform(rng, r, n)
        }
        2 if n >= 2 => {
            let mut a = uniform(rng, m, n);
            let col = a.column(0).into_owned();
            a.set_column(n - 1, &col);
            a.row_mut(m / 2).fill(0.0);
            a
        }
        3 => uniform(rng, m, 1) * uniform(rng, 1, n),
        _ => uniform(rng, m, n),
    }
}

fn candidate(a: &Matrix, fault: bool) -> Result<Matrix> {
    let opts = PinvOptions::default();
    Ok(if fault {
        pinv_with_flipped_singular_value(a, &opts)?
    } else {
        pinv(a, &opts)?
    })
}

/// `(A^T A)^-1 A^T` for tall matrices, `A^T (A A^T)^-1` for wide ones,
/// through a Cholesky factorization. `None` if the Gram matrix is not
/// positive definite.
pub fn normal_equation_pinv(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let at = a.transpose();
    if a.nrows() >= a.ncols() {
        let chol = (&at * a).cholesky()?;
        Some(chol.solve(&at))
    } else {
        let chol = (a * &at).cholesky()?;
        Some(chol.solve(a).transpose())
    }
}

fn random_shape(rng: &mut ChaCha8Rng) -> (usize, usize) {
    (rng.random_range(1..=MAX_ROWS), rng.random_range(1..=MAX_COLS))
}

/// A full-rank shape: tall on even `i`, wide on odd `i`.
fn oracle_shape(rng: &mut ChaCha8Rng, i: usize) -> (usize, usize) {
    let small = rng.random_range(1..MAX_COLS);
    let large = rng.random_range(small + 1..=MAX_ROWS);
    if i.is_multiple_of(2) {
        (large, small)
    } else {
        (small, large)
    }
}

pub fn run_checks(s: &SelfcheckSettings) -> Result<SelfcheckReport> {
    let shapes = s.shapes.iter().map(|x| parse_shape(x)).collect::<Result<Vec<_>>>()?;
    let mut rng = seed::rng(seed::derive(s.seed, "selfcheck"));

    let mut penrose = SuiteResult::new(PENROSE_LIMIT);
    for i in 0..s.count {
        let shape = if shapes.is_empty() {
            random_shape(&mut rng)
        } else {
            shapes[i % shapes.len()]
        };
        let a = Matrix::from_dmatrix(test_matrix(&mut rng, shape, i))?;
        let p = candidate(&a, s.inject_fault)?;
        penrose.record(shape, penrose_residual(&a, &p)?);
    }

    let mut oracle = SuiteResult::new(ORACLE_LIMIT);
    for i in 0..s.oracle_count {
        let shape = if shapes.is_empty() {
            oracle_shape(&mut rng, i)
        } else {
            shapes[i % shapes.len()]
        };
        let a = uniform(&mut rng, shape.0, shape.1);
        let Some(expected) = normal_equation_pinv(&a) else {
            oracle.record(shape, f64::INFINITY);
            continue;
        };
        let p = candidate(&Matrix::from_dmatrix(a)?, s.inject_fault)?;
        let err = (p.as_dmatrix() - &expected).norm() / expected.norm();
        oracle.record(shape, err);
    }

    let passed = penrose.passed() && oracle.passed();
    Ok(SelfcheckReport {
        penrose,
        oracle,
        passed,
    })
}

pub const REPORT_FILE: &str = "selfcheck.json";

pub fn run(args: SelfcheckArgs) -> Result<RunManifest> {
    let s: SelfcheckSettings = resolve(args.run.config.as_deref(), "selfcheck", &args)?;
    let mut run = Run::new(&args.run.out)?;
    let report = run.time("checks", || run_checks(&s))?;
    run.write_json(REPORT_FILE, &report)?;
    for (name, r) in [("penrose", &report.penrose), ("oracle", &report.oracle)] {
        println!(
            "{name}: {}/{} passed, worst {:.3e} (limit {:e})",
            r.checks - r.failures,
            r.checks,
            r.worst,
            r.limit
        );
    }
    let manifest = run.finish("selfcheck", &s, s.seed)?;
    if report.passed {
        Ok(manifest)
    } else {
        Err(CliError::ChecksFailed(format!(
            "{} Penrose and {} oracle checks failed",
            report.penrose.failures, report.oracle.failures
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_parse() {
        assert_eq!(parse_shape("200x100").unwrap(), (200, 100));
        assert!(parse_shape("200*100").is_err());
        assert!(parse_shape("0x3").is_err());
    }

    #[test]
    fn oracle_inverts_known_matrix() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        let p = normal_equation_pinv(&a).unwrap();
        assert!((p - DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.25])).norm() < 1e-15);
        let wide = DMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        let p = normal_equation_pinv(&wide).unwrap();
        assert!((p - DMatrix::from_row_slice(2, 1, &[3.0 / 25.0, 4.0 / 25.0])).norm() < 1e-15);
    }

    #[test]
    fn variants_have_expected_rank() {
        let mut rng = seed::rng(1);
        let rank = |a: &DMatrix<f64>| annet_core::pinv::rank(&Matrix::from_dmatrix(a.clone()).unwrap()).unwrap();
        assert_eq!(rank(&test_matrix(&mut rng, (20, 10), 0)), 10);
        assert!(rank(&test_matrix(&mut rng, (20, 10), 1)) < 10);
        assert!(rank(&test_matrix(&mut rng, (20, 10), 2)) < 10);
        assert_eq!(rank(&test_matrix(&mut rng, (20, 10), 3)), 1);
    }

    #[test]
    fn small_suite_passes_and_fault_fails() {
        let s = SelfcheckSettings {
            count: 12,
            oracle_count: 6,
            ..Default::default()
        };
        assert!(run_checks(&s).unwrap().passed);
        let faulty = SelfcheckSettings { inject_fault: true, ..s };
        let r = run_checks(&faulty).unwrap();
        assert!(!r.passed);
        assert_eq!(r.penrose.failures, 12);
    }
}
