//! Grids, quantile/CDF evaluation, the quantile isometry for `W2`, and
//! reconstruction of measures from sampled quantiles.

mod density;
mod grid;
mod normal;
mod quantile;
mod target;

pub use density::{
    density_from_quantile, Atom, DensityProfile, DensitySample, DEFAULT_ATOM_TOL,
    DEFAULT_SLOPE_FLOOR,
};
pub use grid::{build_grid, Grid};
pub use quantile::{finite_difference_slopes, h1_energy, wasserstein2, QuantileVector};
pub use target::{
    cdf_eval, quantile_eval, Empirical, MeasureSpec, PiecewiseQuantile, TargetMeasure,
    TruncatedGaussian,
};

pub(crate) use quantile::max_abs_diff;
