//! Truncated spatial grid on `[1, y_max]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Node spacing rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing<T> {
    /// Equal cell widths.
    Uniform,
    /// Geometrically growing cells, finest near `y = 1`; `ratio > 1` is the
    /// width ratio of the last cell to the first.
    GeometricNearOne { ratio: T },
}

/// Grid specification: truncation point, node count and spacing.
///
/// Node 0 is exactly `y = 1`, the last node exactly `y_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    pub y_max: T,
    pub n: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing<T>,
}

fn default_spacing<T>() -> Spacing<T> {
    Spacing::Uniform
}

impl<T: Real> GridSpec<T> {
    /// Default production grid: 2000 uniform nodes on `[1, 6]`.
    ///
    /// The solver enlarges the domain on its own whenever the dividend
    /// barrier comes close to `y_max`, so 6 is a starting point rather than
    /// a bound.
    pub fn default_grid() -> Self {
        GridSpec {
            y_max: T::of(6.0),
            n: 2000,
            spacing: Spacing::Uniform,
        }
    }

    pub fn uniform(y_max: T, n: usize) -> Self {
        GridSpec {
            y_max,
            n,
            spacing: Spacing::Uniform,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.y_max > T::one()) {
            return Err(Error::InvalidParameter(format!(
                "y_max must exceed 1, got {}",
                self.y_max
            )));
        }
        if self.n < 200 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 200 nodes, got {}",
                self.n
            )));
        }
        if let Spacing::GeometricNearOne { ratio } = self.spacing {
            if !(ratio > T::one()) {
                return Err(Error::InvalidParameter(format!(
                    "geometric spacing ratio must exceed 1, got {ratio}"
                )));
            }
        }
        Ok(())
    }

    /// Node coordinates; `nodes()[0] == 1` and `nodes()[n-1] == y_max`.
    pub fn nodes(&self) -> Vec<T> {
        let one = T::one();
        let n = self.n;
        let span = self.y_max - one;
        let mut ys = Vec::with_capacity(n);
        match self.spacing {
            Spacing::Uniform => {
                let nm1 = T::from_usize(n - 1).unwrap();
                for i in 0..n {
                    ys.push(one + span * T::from_usize(i).unwrap() / nm1);
                }
            }
            Spacing::GeometricNearOne { ratio } => {
                // Cell widths w_k = w_0 * q^k with q^(n-2) = ratio.
                let q = ratio.powf(one / T::from_usize(n - 2).unwrap());
                let mut weights = Vec::with_capacity(n);
                let mut acc = T::zero();
                let mut w = one;
                weights.push(T::zero());
                for _ in 0..n - 1 {
                    acc = acc + w;
                    weights.push(acc);
                    w = w * q;
                }
                for i in 0..n {
                    ys.push(one + span * weights[i] / acc);
                }
            }
        }
        ys[0] = one;
        ys[n - 1] = self.y_max;
        ys
    }

    /// Refined copy: doubled domain at constant resolution.
    pub(crate) fn doubled(&self) -> Self {
        GridSpec {
            y_max: T::one() + (self.y_max - T::one()) * T::of(2.0),
            n: (self.n - 1) * 2 + 1,
            spacing: self.spacing,
        }
    }
}
