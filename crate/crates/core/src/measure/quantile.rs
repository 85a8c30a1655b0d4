use serde::{Deserialize, Serialize};

use super::Grid;
use crate::{Error, Result, TOL_MONO};

/// Quantile function sampled at the nodes of a [`Grid`].
///
/// Values are only required to be finite so that arbitrary elements of
/// `L2(0,1)` (perturbations, directions) can be represented; membership in the
/// cone of nondecreasing functions is checked with [`QuantileVector::is_monotone`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuantile", into = "RawQuantile")]
pub struct QuantileVector {
    grid: Grid,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawQuantile {
    values: Vec<f64>,
}

impl TryFrom<RawQuantile> for QuantileVector {
    type Error = Error;

    fn try_from(raw: RawQuantile) -> Result<Self> {
        let grid = Grid::new(raw.values.len())?;
        QuantileVector::new(grid, raw.values)
    }
}

impl From<QuantileVector> for RawQuantile {
    fn from(q: QuantileVector) -> Self {
        RawQuantile { values: q.values }
    }
}

impl QuantileVector {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    /// Like [`QuantileVector::new`] but also requires cone membership.
    pub fn monotone(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let q = Self::new(grid, values)?;
        q.ensure_monotone()?;
        Ok(q)
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.nodes().map(f).collect(),
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self::from_fn(grid, |_| c)
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest drop `g_i - g_{i+1}` and where it happens (zero when monotone).
    pub fn worst_drop(&self) -> (usize, f64) {
        self.values
            .windows(2)
            .enumerate()
            .map(|(i, w)| (i, w[0] - w[1]))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc })
    }

    pub fn is_monotone(&self) -> bool {
        self.worst_drop().1 <= TOL_MONO
    }

    pub fn ensure_monotone(&self) -> Result<()> {
        let (index, drop) = self.worst_drop();
        if drop > TOL_MONO {
            Err(Error::NotMonotone { index, drop })
        } else {
            Ok(())
        }
    }

    pub fn check_same_grid(&self, other: &QuantileVector) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.len(),
                right: other.grid.len(),
            });
        }
        Ok(())
    }

    /// Componentwise `self - other`.
    pub fn sub(&self, other: &QuantileVector) -> Result<QuantileVector> {
        self.check_same_grid(other)?;
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    /// `self + t * dir`.
    pub fn axpy(&self, t: f64, dir: &QuantileVector) -> Result<QuantileVector> {
        self.check_same_grid(dir)?;
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&dir.values)
                .map(|(a, d)| a + t * d)
                .collect(),
        ))
    }

    /// Midpoint-rule `L2(0,1)` inner product.
    pub fn dot(&self, other: &QuantileVector) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.grid.spacing() * dot(&self.values, &other.values))
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.spacing() * dot(&self.values, &self.values)).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs_diff(&self, other: &QuantileVector) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(max_abs_diff(&self.values, &other.values))
    }

    /// Slopes by central differences inside and one-sided differences at the
    /// two end cells.
    pub fn finite_difference_slopes(&self) -> Vec<f64> {
        finite_difference_slopes(&self.values, self.grid.spacing())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn finite_difference_slopes(values: &[f64], h: f64) -> Vec<f64> {
    let m = values.len();
    if m < 2 {
        return vec![0.0; m];
    }
    (0..m)
        .map(|i| {
            if i == 0 {
                (values[1] - values[0]) / h
            } else if i == m - 1 {
                (values[m - 1] - values[m - 2]) / h
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// 2-Wasserstein distance of the two measures, computed as the `L2(0,1)`
/// distance of their quantiles with the midpoint rule.
pub fn wasserstein2(u: &QuantileVector, v: &QuantileVector) -> Result<f64> {
    Ok(u.sub(v)?.l2_norm())
}

/// Discrete squared `H1` seminorm `sum (g_{i+1} - g_i)^2 / h`.
pub fn h1_energy(g: &QuantileVector) -> f64 {
    let h = g.grid.spacing();
    g.values
        .windows(2)
        .map(|w| (w[1] - w[0]).powi(2))
        .sum::<f64>()
        / h
}
