//! Gradient-free training. Each layer's weights are the least-squares
//! solution `A_{k-1}^+ g_k(T_k)`, where `A_{k-1}` is the forward activation
//! feeding the layer and `T_k` is the target peeled back from `Y` through
//! the downstream layers by alternating activation inverses and right
//! pseudoinverses. Downstream layers that have not been solved yet stand
//! in as random placeholders.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::activation::{self, ActivationKind, DomainPolicy, DEFAULT_CLAMP_MARGIN};
use crate::error::{Error, Result};
use crate::matrix::{sse, Matrix};
use crate::network::{augment, layer_output, Mask, NetworkSpec, WeightSet};
use crate::pinv::{pinv, PinvOptions};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Init {
    /// Placeholders drawn uniformly from `[-scale, scale]`.
    Random { seed: u64, scale: f64 },
    /// `W_1 = X^+`, `W_k = A_{k-1}^+`; every hidden width must equal the
    /// sample count.
    DataMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolveOrder {
    #[default]
    Forward,
    /// Order in which the inner layers (0-based) are solved. The output
    /// layer is always solved last and may be omitted.
    Custom(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitScheme {
    pub init: Init,
    #[serde(default)]
    pub solve_order: SolveOrder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub init: InitScheme,
    #[serde(default)]
    pub pinv: PinvOptions,
    /// `None` turns inverse-domain violations into errors.
    #[serde(default = "default_clamp")]
    pub clamp_margin: Option<f64>,
    #[serde(default)]
    pub record_intermediates: bool,
}

fn default_clamp() -> Option<f64> {
    Some(DEFAULT_CLAMP_MARGIN)
}

impl TrainConfig {
    pub fn random(seed: u64, scale: f64) -> Self {
        TrainConfig {
            init: InitScheme {
                init: Init::Random { seed, scale },
                solve_order: SolveOrder::Forward,
            },
            pinv: PinvOptions::default(),
            clamp_margin: default_clamp(),
            record_intermediates: false,
        }
    }

    pub fn data_matrix() -> Self {
        TrainConfig {
            init: InitScheme {
                init: Init::DataMatrix,
                solve_order: SolveOrder::Forward,
            },
            ..TrainConfig::random(0, 1.0)
        }
    }

    pub fn with_pinv(mut self, pinv: PinvOptions) -> Self {
        self.pinv = pinv;
        self
    }

    pub fn with_solve_order(mut self, order: SolveOrder) -> Self {
        self.init.solve_order = order;
        self
    }

    pub fn domain_policy(&self) -> DomainPolicy {
        match self.clamp_margin {
            Some(margin) => DomainPolicy::Clamp { margin },
            None => DomainPolicy::Reject,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pinv.validate()?;
        if let Some(margin) = self.clamp_margin {
            if !(margin >= 0.0 && margin.is_finite()) {
                return Err(Error::config(format!("clamp_margin must be >= 0, got {margin}")));
            }
        }
        if let Init::Random { scale, .. } = self.init.init {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::config(format!("scale must be > 0, got {scale}")));
            }
        }
        Ok(())
    }
}

/// Design matrix and transformed target a layer was solved against.
#[derive(Clone, Debug)]
pub struct LayerTrace {
    pub design: Matrix,
    pub target: Matrix,
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub weights: WeightSet,
    pub train_sse: f64,
    /// `||A_{k-1} W_k - target_k||_F` per layer.
    pub per_layer_solve_residuals: Vec<f64>,
    /// Entries clamped into the inverse domain while forming each layer's target.
    pub clamped_entry_counts: Vec<usize>,
    pub wall_time: f64,
    pub intermediates: Option<Vec<LayerTrace>>,
}

#[derive(Clone, Debug)]
pub struct BackTarget {
    pub target: Matrix,
    pub clamped: usize,
}

/// Peels `y` back through downstream layers given output-first:
/// `T = g_{k+1}(... g_n(Y) W_n^+ ...) W_{k+1}^+`. With `linear_output` the
/// outermost inverse is skipped.
pub fn back_target(
    y: &Matrix,
    weights_after: &[Matrix],
    activations_after: &[ActivationKind],
    linear_output: bool,
    opts: &PinvOptions,
    policy: DomainPolicy,
) -> Result<BackTarget> {
    if weights_after.len() != activations_after.len() {
        return Err(Error::invalid(format!(
            "{} downstream weights but {} activations",
            weights_after.len(),
            activations_after.len()
        )));
    }
    let pinvs = weights_after.iter().map(|w| pinv(w, opts)).collect::<Result<Vec<_>>>()?;
    let mut acts = activations_after.to_vec();
    if linear_output {
        if let Some(first) = acts.first_mut() {
            *first = ActivationKind::Identity;
        }
    }
    back_target_with(y, &pinvs.iter().collect::<Vec<_>>(), &acts, policy)
}

fn back_target_with(y: &Matrix, pinvs: &[&Matrix], acts: &[ActivationKind], policy: DomainPolicy) -> Result<BackTarget> {
    let mut t = y.clone();
    let mut clamped = 0;
    for (p, &act) in pinvs.iter().zip(acts) {
        let inv = activation::invert(act, &t, policy)?;
        clamped += inv.clamped;
        if inv.values.cols() != p.rows() {
            return Err(Error::invalid(format!(
                "target has {} columns but downstream weight has {}",
                inv.values.cols(),
                p.rows()
            )));
        }
        t = inv.values.matmul(p)?;
    }
    Ok(BackTarget { target: t, clamped })
}

/// Least squares with a support constraint: column `j` of the result is
/// `a[:, S_j]^+ t[:, j]` on its support `S_j` and zero elsewhere.
pub fn solve_masked_layer(a: &Matrix, t: &Matrix, mask: &Mask, opts: &PinvOptions) -> Result<Matrix> {
    if a.rows() != t.rows() || mask.shape() != (a.cols(), t.cols()) {
        return Err(Error::invalid(format!(
            "solve_masked_layer: a is {}x{}, t is {}x{}, mask is {}x{}",
            a.rows(),
            a.cols(),
            t.rows(),
            t.cols(),
            mask.rows(),
            mask.cols()
        )));
    }
    let mut w = Matrix::zeros(a.cols(), t.cols()).into_dmatrix();
    let mut last: Option<(Vec<usize>, Matrix)> = None;
    for j in 0..t.cols() {
        let support = mask.support(j);
        if support.is_empty() {
            continue;
        }
        // neighbouring columns often share a window
        let sub_pinv = match &last {
            Some((s, p)) if *s == support => p.clone(),
            _ => {
                let p = pinv(&a.select_columns(&support)?, opts)?;
                last = Some((support.clone(), p.clone()));
                p
            }
        };
        let col = sub_pinv.matmul(&Matrix::column_vector(&t.column(j))?)?;
        for (r, &i) in support.iter().enumerate() {
            w[(i, j)] = col.get(r, 0);
        }
    }
    Matrix::from_dmatrix(w)
}

fn solve_layer(a: &Matrix, t: &Matrix, mask: Option<&Mask>, opts: &PinvOptions) -> Result<Matrix> {
    match mask {
        Some(m) => solve_masked_layer(a, t, m, opts),
        None => pinv(a, opts)?.matmul(t),
    }
}

fn residual(a: &Matrix, w: &Matrix, t: &Matrix) -> Result<f64> {
    Ok(a.matmul(w)?.sub(t)?.frobenius_norm())
}

fn solve_sequence(spec: &NetworkSpec, order: &SolveOrder) -> Result<Vec<usize>> {
    let n = spec.depth();
    match order {
        SolveOrder::Forward => Ok((0..n).collect()),
        SolveOrder::Custom(perm) => {
            let mut seq = perm.clone();
            if seq.last() == Some(&(n - 1)) {
                seq.pop();
            }
            let mut sorted = seq.clone();
            sorted.sort_unstable();
            if sorted != (0..n - 1).collect::<Vec<_>>() {
                return Err(Error::config(format!(
                    "solve order {perm:?} is not a permutation of the {} inner layers followed by the output layer",
                    n - 1
                )));
            }
            seq.push(n - 1);
            Ok(seq)
        }
    }
}

fn draw_placeholder(rng: &mut impl Rng, shape: (usize, usize), scale: f64, mask: Option<&Mask>) -> Result<Matrix> {
    let w = Matrix::from_fn(shape.0, shape.1, |_, _| rng.random_range(-1.0..=1.0) * scale);
    match mask {
        Some(m) => m.apply(&w),
        None => Ok(w),
    }
}

pub fn train(spec: &NetworkSpec, x_raw: &Matrix, y: &Matrix, cfg: &TrainConfig) -> Result<TrainReport> {
    let started = Instant::now();
    spec.validate()?;
    cfg.validate()?;
    if x_raw.cols() != spec.input_dim {
        return Err(Error::invalid(format!(
            "network expects {} input columns, got {}",
            spec.input_dim,
            x_raw.cols()
        )));
    }
    if y.rows() != x_raw.rows() {
        return Err(Error::invalid(format!("x has {} rows but y has {}", x_raw.rows(), y.rows())));
    }
    if y.cols() != spec.output_dim() {
        return Err(Error::invalid(format!(
            "network outputs {} columns but y has {}",
            spec.output_dim(),
            y.cols()
        )));
    }
    let masks = spec.masks()?;
    let mut solved = match &cfg.init.init {
        Init::Random { seed, scale } => train_random(spec, x_raw, y, cfg, &masks, *seed, *scale)?,
        Init::DataMatrix => train_data_matrix(spec, x_raw, y, cfg, &masks)?,
    };
    let weights = WeightSet::new(std::mem::take(&mut solved.weights), masks)?;
    let g = crate::network::forward(spec, &weights, x_raw)?;
    Ok(TrainReport {
        train_sse: sse(&g, y)?,
        weights,
        per_layer_solve_residuals: solved.residuals,
        clamped_entry_counts: solved.clamped,
        wall_time: started.elapsed().as_secs_f64(),
        intermediates: solved.traces,
    })
}

struct Solved {
    weights: Vec<Matrix>,
    residuals: Vec<f64>,
    clamped: Vec<usize>,
    traces: Option<Vec<LayerTrace>>,
}

impl Solved {
    fn new(n: usize, record: bool) -> Self {
        Solved {
            weights: Vec::with_capacity(n),
            residuals: vec![0.0; n],
            clamped: vec![0; n],
            traces: record.then(Vec::new),
        }
    }
}

fn train_random(
    spec: &NetworkSpec,
    x_raw: &Matrix,
    y: &Matrix,
    cfg: &TrainConfig,
    masks: &[Option<Mask>],
    seed: u64,
    scale: f64,
) -> Result<Solved> {
    let n = spec.depth();
    let order = solve_sequence(spec, &cfg.init.solve_order)?;
    let policy = cfg.domain_policy();
    let mut rng = seed::rng(seed);
    let mut current = (0..n)
        .map(|k| draw_placeholder(&mut rng, spec.weight_shape(k), scale, masks[k].as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let mut pinvs: Vec<Option<Matrix>> = vec![None; n];
    let mut out = Solved::new(n, cfg.record_intermediates);
    let mut traces: Vec<Option<LayerTrace>> = vec![None; n];
    let x = augment(x_raw);

    for &k in &order {
        let mut a = x.clone();
        for (j, w) in current.iter().enumerate().take(k) {
            a = layer_output(spec, j, &a, w)?;
        }
        for j in k + 1..n {
            if pinvs[j].is_none() {
                pinvs[j] = Some(pinv(&current[j], &cfg.pinv)?);
            }
        }
        let downstream: Vec<&Matrix> = (k + 1..n).rev().map(|j| pinvs[j].as_ref().unwrap()).collect();
        let acts: Vec<ActivationKind> = (k + 1..n).rev().map(|j| spec.effective_activation(j)).collect();
        let bt = back_target_with(y, &downstream, &acts, policy)?;
        let t = activation::invert(spec.effective_activation(k), &bt.target, policy)?;
        let w = solve_layer(&a, &t.values, masks[k].as_ref(), &cfg.pinv)?;
        out.residuals[k] = residual(&a, &w, &t.values)?;
        out.clamped[k] = bt.clamped + t.clamped;
        if cfg.record_intermediates {
            traces[k] = Some(LayerTrace {
                design: a,
                target: t.values,
            });
        }
        current[k] = w;
        pinvs[k] = None;
    }
    out.weights = current;
    if let Some(all) = out.traces.as_mut() {
        all.extend(traces.into_iter().flatten());
    }
    Ok(out)
}

fn train_data_matrix(
    spec: &NetworkSpec,
    x_raw: &Matrix,
    y: &Matrix,
    cfg: &TrainConfig,
    masks: &[Option<Mask>],
) -> Result<Solved> {
    let n = spec.depth();
    let m = x_raw.rows();
    if let Some(k) = spec.layers[..n - 1].iter().position(|l| l.width != m) {
        return Err(Error::config(format!(
            "data-matrix initialization needs every hidden width equal to the sample count {m}, layer {} has width {}",
            k + 1,
            spec.layers[k].width
        )));
    }
    if masks.iter().any(Option::is_some) {
        return Err(Error::config("data-matrix initialization does not support banded layers"));
    }
    let mut out = Solved::new(n, cfg.record_intermediates);
    let mut a = augment(x_raw);
    for k in 0..n - 1 {
        let w = pinv(&a, &cfg.pinv)?;
        let eye = Matrix::identity(m);
        out.residuals[k] = residual(&a, &w, &eye)?;
        if let Some(t) = out.traces.as_mut() {
            t.push(LayerTrace {
                design: a.clone(),
                target: eye,
            });
        }
        a = layer_output(spec, k, &a, &w)?;
        out.weights.push(w);
    }
    let t = activation::invert(spec.effective_activation(n - 1), y, cfg.domain_policy())?;
    let w = pinv(&a, &cfg.pinv)?.matmul(&t.values)?;
    out.residuals[n - 1] = residual(&a, &w, &t.values)?;
    out.clamped[n - 1] = t.clamped;
    if let Some(tr) = out.traces.as_mut() {
        tr.push(LayerTrace {
            design: a,
            target: t.values,
        });
    }
    out.weights.push(w);
    Ok(out)
}
