//! Bounded mixed search spaces and their continuous carrier encoding.
//!
//! Every dimension kind rides a plain continuous interval (the "carrier") so
//! the wolf update equations never special-case integers or categories:
//!
//! * `Continuous(lo, hi)` — carrier `[lo, hi]`, decoded as identity. With
//!   `log_scaled`, the carrier holds log10 values in `[log10 lo, log10 hi]`
//!   and decoding raises 10 to the coordinate.
//! * `Integer(lo, hi)` — carrier `[lo, hi+1)`, decoded by flooring, so every
//!   integer in the range owns an equal-width slice of the carrier.
//! * `Categorical(k)` — carrier `[0, k)`, decoded by flooring to an option
//!   index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DimensionSpec {
    Continuous { lo: f64, hi: f64, log_scaled: bool },
    Integer { lo: i64, hi: i64 },
    Categorical { options: usize },
}

impl DimensionSpec {
    pub fn continuous(lo: f64, hi: f64) -> Self {
        DimensionSpec::Continuous {
            lo,
            hi,
            log_scaled: false,
        }
    }

    pub fn log_continuous(lo: f64, hi: f64) -> Self {
        DimensionSpec::Continuous {
            lo,
            hi,
            log_scaled: true,
        }
    }

    pub fn integer(lo: i64, hi: i64) -> Self {
        DimensionSpec::Integer { lo, hi }
    }

    pub fn categorical(options: usize) -> Self {
        DimensionSpec::Categorical { options }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            DimensionSpec::Continuous { lo, hi, log_scaled } => {
                if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                    return Err(Error::invalid_argument(format!(
                        "continuous dimension requires finite lo < hi, got [{lo}, {hi}]"
                    )));
                }
                if log_scaled && lo <= 0.0 {
                    return Err(Error::invalid_argument(format!(
                        "log-scaled dimension requires lo > 0, got {lo}"
                    )));
                }
            }
            DimensionSpec::Integer { lo, hi } => {
                if hi < lo + 1 {
                    return Err(Error::invalid_argument(format!(
                        "integer dimension requires hi >= lo + 1, got [{lo}, {hi}]"
                    )));
                }
            }
            DimensionSpec::Categorical { options } => {
                if options < 2 {
                    return Err(Error::invalid_argument(format!(
                        "categorical dimension requires at least 2 options, got {options}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Closed carrier interval `[lo, hi]` that position coordinates live in.
    /// Upper ends that decode by flooring sit one representable step below
    /// the first out-of-range value.
    pub fn carrier(&self) -> (f64, f64) {
        match *self {
            DimensionSpec::Continuous { lo, hi, log_scaled } => {
                if log_scaled {
                    (lo.log10(), hi.log10())
                } else {
                    (lo, hi)
                }
            }
            DimensionSpec::Integer { lo, hi } => (lo as f64, ((hi + 1) as f64).next_down()),
            DimensionSpec::Categorical { options } => (0.0, (options as f64).next_down()),
        }
    }

    /// Clip one coordinate into the carrier interval.
    pub fn clamp_coord(&self, coord: f64) -> f64 {
        let (lo, hi) = self.carrier();
        if coord.is_nan() {
            return lo;
        }
        coord.clamp(lo, hi)
    }

    /// Decode one carrier coordinate into a parameter value. Expects a
    /// clamped coordinate; output is additionally clipped into the declared
    /// bounds to absorb floating-point edge cases like `10^log10(x)`
    /// landing one ulp outside.
    pub fn decode_coord(&self, coord: f64) -> DecodedValue {
        match *self {
            DimensionSpec::Continuous { lo, hi, log_scaled } => {
                let v = if log_scaled { 10f64.powf(coord) } else { coord };
                DecodedValue::Real(v.clamp(lo, hi))
            }
            DimensionSpec::Integer { lo, hi } => {
                DecodedValue::Int((coord.floor() as i64).clamp(lo, hi))
            }
            DimensionSpec::Categorical { options } => {
                let idx = coord.floor().max(0.0) as usize;
                DecodedValue::Index(idx.min(options - 1))
            }
        }
    }

    /// Carrier coordinate that decodes to the given parameter value.
    pub fn encode(&self, value: &DecodedValue) -> Result<f64> {
        match (*self, value) {
            (DimensionSpec::Continuous { log_scaled, .. }, DecodedValue::Real(v)) => {
                Ok(self.clamp_coord(if log_scaled { v.log10() } else { *v }))
            }
            (DimensionSpec::Integer { .. }, DecodedValue::Int(v)) => {
                Ok(self.clamp_coord(*v as f64))
            }
            (DimensionSpec::Categorical { .. }, DecodedValue::Index(i)) => {
                Ok(self.clamp_coord(*i as f64))
            }
            _ => Err(Error::invalid_argument(format!(
                "value {value:?} does not match dimension {self:?}"
            ))),
        }
    }
}

/// Ordered list of dimensions; the order defines the position-vector layout
/// and is fixed for the lifetime of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    dims: Vec<DimensionSpec>,
}

impl SearchSpace {
    pub fn new(dims: Vec<DimensionSpec>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::invalid_argument("search space must be non-empty"));
        }
        for d in &dims {
            d.validate()?;
        }
        Ok(SearchSpace { dims })
    }

    /// Uniform box of `n` continuous dimensions, handy for benchmarks.
    pub fn continuous_box(n: usize, lo: f64, hi: f64) -> Result<Self> {
        SearchSpace::new(vec![DimensionSpec::continuous(lo, hi); n])
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dims(&self) -> &[DimensionSpec] {
        &self.dims
    }
}

/// Internal continuous encoding of one candidate across all dimension kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub coords: Vec<f64>,
}

impl Position {
    pub fn new(coords: Vec<f64>) -> Self {
        Position { coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// A decoded point of the search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DecodedValue {
    Real(f64),
    Int(i64),
    Index(usize),
}

impl DecodedValue {
    pub fn as_real(&self) -> Result<f64> {
        match self {
            DecodedValue::Real(v) => Ok(*v),
            other => Err(Error::invalid_argument(format!("expected real, got {other:?}"))),
        }
    }

    pub fn as_int(&self) -> Result<i64> {
        match self {
            DecodedValue::Int(v) => Ok(*v),
            other => Err(Error::invalid_argument(format!("expected integer, got {other:?}"))),
        }
    }

    pub fn as_index(&self) -> Result<usize> {
        match self {
            DecodedValue::Index(v) => Ok(*v),
            other => Err(Error::invalid_argument(format!("expected index, got {other:?}"))),
        }
    }
}

pub type DecodedSolution = Vec<DecodedValue>;

/// Clip every coordinate of `p` into its dimension's carrier interval.
pub fn clamp(p: &Position, space: &SearchSpace) -> Result<Position> {
    if p.len() != space.len() {
        return Err(Error::invalid_argument(format!(
            "position has {} coords, space has {} dims",
            p.len(),
            space.len()
        )));
    }
    Ok(Position::new(
        p.coords
            .iter()
            .zip(space.dims())
            .map(|(&c, d)| d.clamp_coord(c))
            .collect(),
    ))
}

/// Decode a clamped position into parameter values.
pub fn decode(p: &Position, space: &SearchSpace) -> Result<DecodedSolution> {
    if p.len() != space.len() {
        return Err(Error::invalid_argument(format!(
            "position has {} coords, space has {} dims",
            p.len(),
            space.len()
        )));
    }
    Ok(p.coords
        .iter()
        .zip(space.dims())
        .map(|(&c, d)| d.decode_coord(c))
        .collect())
}

/// Check a decoded solution against the declared bounds.
pub fn in_bounds(solution: &DecodedSolution, space: &SearchSpace) -> bool {
    solution.len() == space.len()
        && solution.iter().zip(space.dims()).all(|(v, d)| match (v, d) {
            (DecodedValue::Real(x), DimensionSpec::Continuous { lo, hi, .. }) => {
                *x >= *lo && *x <= *hi
            }
            (DecodedValue::Int(x), DimensionSpec::Integer { lo, hi }) => *x >= *lo && *x <= *hi,
            (DecodedValue::Index(x), DimensionSpec::Categorical { options }) => *x < *options,
            _ => false,
        })
}
