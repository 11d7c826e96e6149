//! Network topology, receptive-field masks and the forward pass.
//!
//! A network maps raw inputs `X` (m x d) through `n` layers:
//! `G = f_n(... f_2(f_1([1 X] W_1) W_2) ... W_n)`. Only the input carries a
//! bias column; inner layers have none.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::activation::{self, ActivationKind};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReceptiveField {
    Full,
    /// Each output column sees `r` consecutive inputs.
    Banded(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub width: usize,
    pub receptive_field: ReceptiveField,
    pub activation: ActivationKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    /// Raw input dimension, before the bias column is added.
    pub input_dim: usize,
    pub layers: Vec<LayerSpec>,
    /// Skip the last layer's activation on output.
    pub linear_output: bool,
}

impl NetworkSpec {
    pub fn new(input_dim: usize, layers: Vec<LayerSpec>, linear_output: bool) -> Result<Self> {
        let spec = NetworkSpec {
            input_dim,
            layers,
            linear_output,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds a spec from a structure string such as `"150^r3-250-6"`,
    /// using one activation for every layer.
    pub fn from_structure(
        structure: &str,
        input_dim: usize,
        activation: ActivationKind,
        linear_output: bool,
    ) -> Result<Self> {
        let layers = parse_structure(structure)?
            .into_iter()
            .map(|(width, receptive_field)| LayerSpec {
                width,
                receptive_field,
                activation,
            })
            .collect();
        NetworkSpec::new(input_dim, layers, linear_output)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::invalid("input_dim must be >= 1"));
        }
        if self.layers.is_empty() {
            return Err(Error::invalid("a network needs at least one layer"));
        }
        for (k, layer) in self.layers.iter().enumerate() {
            if layer.width == 0 {
                return Err(Error::invalid(format!("layer {} has zero width", k + 1)));
            }
            if let ReceptiveField::Banded(r) = layer.receptive_field {
                check_radius(r)?;
            }
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.width)
    }

    /// Rows of layer `k`'s weight matrix (0-based `k`).
    pub fn layer_input_dim(&self, k: usize) -> usize {
        if k == 0 {
            self.input_dim + 1
        } else {
            self.layers[k - 1].width
        }
    }

    pub fn weight_shape(&self, k: usize) -> (usize, usize) {
        (self.layer_input_dim(k), self.layers[k].width)
    }

    /// Activation applied at layer `k`'s output, `Identity` for the last
    /// layer of a linear-output network.
    pub fn effective_activation(&self, k: usize) -> ActivationKind {
        if self.linear_output && k + 1 == self.depth() {
            ActivationKind::Identity
        } else {
            self.layers[k].activation
        }
    }

    pub fn mask(&self, k: usize) -> Result<Option<Mask>> {
        match self.layers[k].receptive_field {
            ReceptiveField::Full => Ok(None),
            ReceptiveField::Banded(r) => receptive_mask(self.layer_input_dim(k), self.layers[k].width, r, k == 0).map(Some),
        }
    }

    pub fn masks(&self) -> Result<Vec<Option<Mask>>> {
        (0..self.depth()).map(|k| self.mask(k)).collect()
    }

    pub fn structure_string(&self) -> String {
        self.layers
            .iter()
            .map(|l| match l.receptive_field {
                ReceptiveField::Full => l.width.to_string(),
                ReceptiveField::Banded(r) => format!("{}^r{}", l.width, r),
            })
            .collect::<Vec<_>>()
            .join("-")
    }
}

impl fmt::Display for NetworkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.structure_string())
    }
}

fn check_radius(r: usize) -> Result<()> {
    if r == 0 || r.is_multiple_of(2) {
        return Err(Error::invalid(format!("receptive field must be odd and >= 1, got {r}")));
    }
    Ok(())
}

/// Parses `"w[^r<k>]-w[^r<k>]-..."` into widths and receptive fields.
pub fn parse_structure(s: &str) -> Result<Vec<(usize, ReceptiveField)>> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::invalid("empty structure string"));
    }
    s.split('-')
        .map(|part| {
            let bad = || Error::invalid(format!("bad layer {part:?} in structure {s:?}"));
            let (width, field) = match part.split_once('^') {
                None => (part, ReceptiveField::Full),
                Some((w, band)) => {
                    let r: usize = band.strip_prefix('r').ok_or_else(bad)?.parse().map_err(|_| bad())?;
                    check_radius(r)?;
                    (w, ReceptiveField::Banded(r))
                }
            };
            let width: usize = width.parse().map_err(|_| bad())?;
            if width == 0 {
                return Err(bad());
            }
            Ok((width, field))
        })
        .collect()
}

/// Row-major boolean matrix marking the weights a layer may use.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mask {
    rows: usize,
    cols: usize,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(rows: usize, cols: usize, data: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::invalid(format!("mask data of length {} does not fit {rows}x{cols}", data.len())));
        }
        Ok(Mask { rows, cols, data })
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        Mask {
            rows,
            cols,
            data: vec![true; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[row * self.cols + col]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Allowed rows of column `j`, ascending.
    pub fn support(&self, j: usize) -> Vec<usize> {
        (0..self.rows).filter(|&i| self.get(i, j)).collect()
    }

    /// Zeroes every entry of `w` outside the mask.
    pub fn apply(&self, w: &Matrix) -> Result<Matrix> {
        if w.shape() != self.shape() {
            return Err(Error::invalid(format!(
                "mask is {}x{} but matrix is {}x{}",
                self.rows,
                self.cols,
                w.rows(),
                w.cols()
            )));
        }
        Ok(Matrix::from_fn(self.rows, self.cols, |i, j| if self.get(i, j) { w.get(i, j) } else { 0.0 }))
    }
}

/// Banded mask of shape `in_dim x width`. Column `j` allows the `r`
/// consecutive inputs centred on `round(j (d-1)/(width-1))`, where `d` is
/// the number of non-bias inputs. Windows that would run past either edge
/// are shifted inward so every column keeps exactly `r` rows. With a biased
/// input the bias occupies row 0 and takes part in the first window.
pub fn receptive_mask(in_dim: usize, width: usize, r: usize, biased_input: bool) -> Result<Mask> {
    check_radius(r)?;
    if in_dim == 0 || width == 0 {
        return Err(Error::invalid("receptive_mask needs in_dim and width >= 1"));
    }
    let offset = usize::from(biased_input);
    let d = in_dim.saturating_sub(offset);
    if d == 0 || r > d {
        return Ok(Mask::full(in_dim, width));
    }
    let mut data = vec![false; in_dim * width];
    for j in 0..width {
        let center = if width == 1 {
            0
        } else {
            (j as f64 * (d - 1) as f64 / (width - 1) as f64).round() as usize
        } + offset;
        let start = center.saturating_sub(r / 2).min(in_dim - r);
        for i in start..start + r {
            data[i * width + j] = true;
        }
    }
    Mask::new(in_dim, width, data)
}

/// One weight matrix per layer, with optional masks whose excluded entries
/// are held at exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSet {
    weights: Vec<Matrix>,
    masks: Vec<Option<Mask>>,
}

impl WeightSet {
    /// Masked-out entries are forced to zero.
    pub fn new(weights: Vec<Matrix>, masks: Vec<Option<Mask>>) -> Result<Self> {
        if weights.len() != masks.len() {
            return Err(Error::invalid(format!("{} weights but {} masks", weights.len(), masks.len())));
        }
        if weights.is_empty() {
            return Err(Error::invalid("a weight set needs at least one matrix"));
        }
        for k in 1..weights.len() {
            if weights[k - 1].cols() != weights[k].rows() {
                return Err(Error::invalid(format!(
                    "weight {} has {} columns but weight {} has {} rows",
                    k,
                    weights[k - 1].cols(),
                    k + 1,
                    weights[k].rows()
                )));
            }
        }
        let weights = weights
            .into_iter()
            .zip(&masks)
            .map(|(w, m)| match m {
                Some(m) => m.apply(&w),
                None => Ok(w),
            })
            .collect::<Result<_>>()?;
        Ok(WeightSet { weights, masks })
    }

    pub fn dense(weights: Vec<Matrix>) -> Result<Self> {
        let masks = vec![None; weights.len()];
        WeightSet::new(weights, masks)
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn masks(&self) -> &[Option<Mask>] {
        &self.masks
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn into_weights(self) -> Vec<Matrix> {
        self.weights
    }

    fn check_against(&self, spec: &NetworkSpec) -> Result<()> {
        if self.len() != spec.depth() {
            return Err(Error::invalid(format!(
                "network has {} layers but weight set has {}",
                spec.depth(),
                self.len()
            )));
        }
        for (k, w) in self.weights.iter().enumerate() {
            if w.shape() != spec.weight_shape(k) {
                let (r, c) = spec.weight_shape(k);
                return Err(Error::invalid(format!(
                    "weight {} is {}x{}, expected {r}x{c}",
                    k + 1,
                    w.rows(),
                    w.cols()
                )));
            }
        }
        Ok(())
    }
}

/// Prepends a column of ones.
pub fn augment(x: &Matrix) -> Matrix {
    Matrix::from_fn(x.rows(), x.cols() + 1, |i, j| if j == 0 { 1.0 } else { x.get(i, j - 1) })
}

fn check_input(spec: &NetworkSpec, x_raw: &Matrix) -> Result<()> {
    if x_raw.cols() != spec.input_dim {
        return Err(Error::invalid(format!(
            "network expects {} input columns, got {}",
            spec.input_dim,
            x_raw.cols()
        )));
    }
    Ok(())
}

/// Output of layer `k` (0-based) given its input.
pub(crate) fn layer_output(spec: &NetworkSpec, k: usize, input: &Matrix, w: &Matrix) -> Result<Matrix> {
    let z = input.matmul(w)?;
    Ok(activation::apply(spec.effective_activation(k), &z))
}

/// `f_upto(... f_1([1 X] W_1) ... W_upto)`; `upto_layer = 0` gives the
/// augmented input.
pub fn hidden_activation(spec: &NetworkSpec, w: &WeightSet, x_raw: &Matrix, upto_layer: usize) -> Result<Matrix> {
    spec.validate()?;
    check_input(spec, x_raw)?;
    w.check_against(spec)?;
    if upto_layer > spec.depth() {
        return Err(Error::invalid(format!(
            "upto_layer {upto_layer} exceeds network depth {}",
            spec.depth()
        )));
    }
    let mut a = augment(x_raw);
    for k in 0..upto_layer {
        a = layer_output(spec, k, &a, &w.weights[k])?;
    }
    Ok(a)
}

pub fn forward(spec: &NetworkSpec, w: &WeightSet, x_raw: &Matrix) -> Result<Matrix> {
    hidden_activation(spec, w, x_raw, spec.depth())
}
