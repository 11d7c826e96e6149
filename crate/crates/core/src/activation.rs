//! Invertible elementwise activations.
//!
//! Every variant is strictly increasing, so the inverse exists on the image
//! of the forward map. The inverse of each variant is only defined above a
//! lower bound `L`; [`invert`] either rejects entries at or below it or
//! raises them to `L + margin` and reports how many it touched.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

const SOFTPLUS08_OFFSET: f64 = 0.8;
/// Above this the softplus variants switch to the overflow-safe form.
const LARGE: f64 = 30.0;
/// Largest exponent whose `exp` is still finite.
const EXP_CAP: f64 = 709.0;

pub const DEFAULT_EXP_ALPHA: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ActivationKind {
    Identity,
    /// `log(1 + e^x)`
    Softplus,
    /// `log(0.8 + e^x)`
    Softplus08,
    /// `e^(alpha x)`
    ExpScaled(f64),
}

impl ActivationKind {
    pub fn exp_scaled(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("exp_scaled alpha must be > 0, got {alpha}")));
        }
        Ok(ActivationKind::ExpScaled(alpha))
    }

    /// Every variant here has an inverse.
    pub fn is_invertible(&self) -> bool {
        true
    }

    /// Lower bound of the inverse's domain; `-inf` when unbounded.
    pub fn inverse_lower_bound(&self) -> f64 {
        match self {
            ActivationKind::Identity => f64::NEG_INFINITY,
            ActivationKind::Softplus => 0.0,
            ActivationKind::Softplus08 => SOFTPLUS08_OFFSET.ln(),
            ActivationKind::ExpScaled(_) => 0.0,
        }
    }

    pub fn forward(&self, x: f64) -> f64 {
        match *self {
            ActivationKind::Identity => x,
            ActivationKind::Softplus => softplus_c(x, 1.0),
            ActivationKind::Softplus08 => softplus_c(x, SOFTPLUS08_OFFSET),
            ActivationKind::ExpScaled(alpha) => (alpha * x).min(EXP_CAP).exp(),
        }
    }

    /// Inverse for `y` strictly inside the domain. Values at or below the
    /// bound yield `-inf` or NaN; use [`invert`] for checked evaluation.
    pub fn inverse(&self, y: f64) -> f64 {
        match *self {
            ActivationKind::Identity => y,
            ActivationKind::Softplus => softplus_c_inv(y, 1.0),
            ActivationKind::Softplus08 => softplus_c_inv(y, SOFTPLUS08_OFFSET),
            ActivationKind::ExpScaled(alpha) => y.ln() / alpha,
        }
    }
}

/// `log(c + e^x)`, rewritten as `x + log1p(c e^-x)` for large `x`.
fn softplus_c(x: f64, c: f64) -> f64 {
    if x > LARGE {
        x + (c * (-x).exp()).ln_1p()
    } else {
        c.ln() + (x.exp() / c).ln_1p()
    }
}

/// `log(e^y - c)`. Near the bound `ln c` the difference is formed as
/// `c * expm1(y - ln c)` to avoid cancellation.
fn softplus_c_inv(y: f64, c: f64) -> f64 {
    if y > LARGE {
        y + (-c * (-y).exp()).ln_1p()
    } else {
        c.ln() + (y - c.ln()).exp_m1().ln()
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActivationKind::Identity => f.write_str("identity"),
            ActivationKind::Softplus => f.write_str("softplus"),
            ActivationKind::Softplus08 => f.write_str("softplus08"),
            ActivationKind::ExpScaled(alpha) => write!(f, "exp:{alpha}"),
        }
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "identity" => Ok(ActivationKind::Identity),
            "softplus" => Ok(ActivationKind::Softplus),
            "softplus08" => Ok(ActivationKind::Softplus08),
            "exp" => Ok(ActivationKind::ExpScaled(DEFAULT_EXP_ALPHA)),
            other => match other.strip_prefix("exp:") {
                Some(alpha) => {
                    let alpha: f64 = alpha
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad exp alpha in {other:?}")))?;
                    ActivationKind::exp_scaled(alpha)
                }
                None => Err(Error::invalid(format!("unknown activation {other:?}"))),
            },
        }
    }
}

impl Serialize for ActivationKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ActivationKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How [`invert`] treats entries outside the inverse's domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainPolicy {
    Reject,
    /// Raise entries `<= L + margin` to `L + margin`.
    Clamp { margin: f64 },
}

pub const DEFAULT_CLAMP_MARGIN: f64 = 1e-9;

impl Default for DomainPolicy {
    fn default() -> Self {
        DomainPolicy::Clamp {
            margin: DEFAULT_CLAMP_MARGIN,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Inverted {
    pub values: Matrix,
    /// Entries raised to the domain floor.
    pub clamped: usize,
}

pub fn apply(kind: ActivationKind, a: &Matrix) -> Matrix {
    // every forward map is finite on finite input
    Matrix::wrap(a.as_dmatrix().map(|x| kind.forward(x)))
}

pub fn invert(kind: ActivationKind, y: &Matrix, policy: DomainPolicy) -> Result<Inverted> {
    let bound = kind.inverse_lower_bound();
    let mut clamped = 0;
    let src = y.as_dmatrix();
    let mut out = src.clone();
    for j in 0..src.ncols() {
        for i in 0..src.nrows() {
            let mut v = src[(i, j)];
            if v <= bound {
                match policy {
                    DomainPolicy::Reject => {
                        return Err(Error::DomainViolation {
                            row: i,
                            col: j,
                            value: v,
                            bound,
                        })
                    }
                    DomainPolicy::Clamp { margin } => {
                        v = bound + margin;
                        clamped += 1;
                    }
                }
            } else if let DomainPolicy::Clamp { margin } = policy {
                if v <= bound + margin {
                    v = bound + margin;
                    clamped += 1;
                }
            }
            let x = kind.inverse(v);
            if !x.is_finite() {
                return Err(Error::DomainViolation {
                    row: i,
                    col: j,
                    value: v,
                    bound,
                });
            }
            out[(i, j)] = x;
        }
    }
    Ok(Inverted {
        values: Matrix::wrap(out),
        clamped,
    })
}
