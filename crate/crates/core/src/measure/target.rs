use serde::{Deserialize, Serialize};

use super::normal;
use super::{Grid, QuantileVector};
use crate::{Error, Result, TOL_MONO};

/// Serializable description of a measure on the line.
///
/// This is the on-disk form of [`TargetMeasure`]; conversion validates and
/// precomputes the derived data each variant needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Dirac {
        at: f64,
    },
    Uniform {
        a: f64,
        b: f64,
    },
    /// Normal law `N(mean, stdev^2)` restricted to the quantile levels
    /// `[cut_lo, cut_hi]` and renormalized.
    TruncatedGaussian {
        mean: f64,
        stdev: f64,
        cut_lo: f64,
        cut_hi: f64,
    },
    Empirical {
        atoms: Vec<f64>,
        weights: Vec<f64>,
    },
    /// Quantile values on a cell-centered grid with `values.len()` cells.
    GridSampled {
        values: Vec<f64>,
    },
}

/// A target (or reference) probability measure with analytic access to its
/// CDF pair `R^-`, `R^+` and its quantile function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureSpec", into = "MeasureSpec")]
pub enum TargetMeasure {
    Dirac(f64),
    Uniform { lo: f64, hi: f64 },
    TruncatedGaussian(TruncatedGaussian),
    Empirical(Empirical),
    GridSampled(PiecewiseQuantile),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedGaussian {
    mean: f64,
    stdev: f64,
    cut_lo: f64,
    cut_hi: f64,
    z_lo: f64,
    z_hi: f64,
}

/// Finitely many atoms, sorted and merged, with positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Empirical {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    /// `cum[k]` = total weight of atoms `0..=k`; the last entry is exactly 1.
    cum: Vec<f64>,
    /// `moment[k]` = sum of `w_j x_j` over `j < k` (length `K + 1`).
    moment: Vec<f64>,
}

/// Continuous, piecewise-linear quantile function through knots
/// `(t_j, y_j)` with `t_0 = 0`, `t_K = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseQuantile {
    cells: usize,
    t: Vec<f64>,
    y: Vec<f64>,
    /// Prefix sums over segments of `Δt` and `Δt * mean(y)`.
    mass: Vec<f64>,
    moment: Vec<f64>,
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidMeasure(format!("{name} must be finite")))
    }
}

impl TruncatedGaussian {
    pub fn new(mean: f64, stdev: f64, cut_lo: f64, cut_hi: f64) -> Result<Self> {
        check_finite("mean", mean)?;
        check_finite("stdev", stdev)?;
        if stdev <= 0.0 {
            return Err(Error::InvalidMeasure("stdev must be positive".into()));
        }
        if !(cut_lo > 0.0 && cut_lo < cut_hi && cut_hi < 1.0) {
            return Err(Error::InvalidMeasure(
                "cut levels must satisfy 0 < cut_lo < cut_hi < 1".into(),
            ));
        }
        Ok(Self {
            mean,
            stdev,
            cut_lo,
            cut_hi,
            z_lo: normal::inv_cdf(cut_lo),
            z_hi: normal::inv_cdf(cut_hi),
        })
    }

    fn level(&self, s: f64) -> f64 {
        self.cut_lo + (self.cut_hi - self.cut_lo) * s
    }

    fn width(&self) -> f64 {
        self.cut_hi - self.cut_lo
    }

    fn z_at(&self, s: f64) -> f64 {
        normal::inv_cdf(self.level(s)).clamp(self.z_lo, self.z_hi)
    }

    pub fn support(&self) -> (f64, f64) {
        (
            self.mean + self.stdev * self.z_lo,
            self.mean + self.stdev * self.z_hi,
        )
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.stdev;
        if z <= self.z_lo {
            return 0.0;
        }
        if z >= self.z_hi {
            return 1.0;
        }
        ((normal::cdf(z) - self.cut_lo) / self.width()).clamp(0.0, 1.0)
    }

    /// Density of the truncated law at `x` (zero outside the support).
    pub fn density(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.stdev;
        if z < self.z_lo || z > self.z_hi {
            return 0.0;
        }
        normal::pdf(z) / (self.stdev * self.width())
    }

    fn quantile(&self, s: f64) -> f64 {
        self.mean + self.stdev * self.z_at(s)
    }

    fn quantile_slope(&self, s: f64) -> f64 {
        self.stdev * self.width() / normal::pdf(self.z_at(s))
    }

    fn quantile_curvature(&self, s: f64) -> f64 {
        let z = self.z_at(s);
        let f = normal::pdf(z);
        self.stdev * self.width() * self.width() * z / (f * f)
    }

    /// `E|x - Y|` in closed form.
    fn expected_distance(&self, x: f64) -> f64 {
        let p = self.width();
        let z = (x - self.mean) / self.stdev;
        let mean_z = (normal::pdf(self.z_lo) - normal::pdf(self.z_hi)) / p;
        let c = z.max(self.z_lo);
        let upper_part = if c >= self.z_hi {
            0.0
        } else {
            let phi_c = if z <= self.z_lo {
                self.cut_lo
            } else {
                normal::cdf(c)
            };
            (normal::pdf(c) - normal::pdf(self.z_hi) - z * (self.cut_hi - phi_c)) / p
        };
        self.stdev * ((z - mean_z) + 2.0 * upper_part).max(0.0)
    }

    pub fn params(&self) -> (f64, f64, f64, f64) {
        (self.mean, self.stdev, self.cut_lo, self.cut_hi)
    }
}

impl Empirical {
    pub fn new(atoms: &[f64], weights: &[f64]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("empirical measure needs atoms".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (&x, &w) in atoms.iter().zip(weights) {
            check_finite("atom", x)?;
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidMeasure("weights must be positive".into()));
            }
            pairs.push((x, w));
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += w,
                _ => merged.push((x, w / total)),
            }
        }
        let (atoms, weights): (Vec<f64>, Vec<f64>) = merged.into_iter().unzip();
        let mut cum = Vec::with_capacity(atoms.len());
        let mut moment = Vec::with_capacity(atoms.len() + 1);
        let (mut c, mut m) = (0.0, 0.0);
        moment.push(0.0);
        for (&x, &w) in atoms.iter().zip(&weights) {
            c += w;
            m += w * x;
            cum.push(c);
            moment.push(m);
        }
        *cum.last_mut().unwrap() = 1.0;
        Ok(Self {
            atoms,
            weights,
            cum,
            moment,
        })
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Cumulative weights through each atom.
    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    fn below_count(&self, x: f64) -> usize {
        self.atoms.partition_point(|&a| a < x)
    }

    fn at_or_below_count(&self, x: f64) -> usize {
        self.atoms.partition_point(|&a| a <= x)
    }

    fn mass_of_first(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    fn quantile(&self, s: f64) -> f64 {
        let k = self.cum.partition_point(|&c| c < s);
        self.atoms[k.min(self.atoms.len() - 1)]
    }

    fn expected_distance(&self, x: f64) -> f64 {
        let k = self.at_or_below_count(x);
        let w_below = self.mass_of_first(k);
        let m_below = self.moment[k];
        let m_total = self.moment[self.atoms.len()];
        (x * w_below - m_below) + ((m_total - m_below) - x * (1.0 - w_below))
    }
}

impl PiecewiseQuantile {
    /// Interpolates grid values linearly and extends the end segments to
    /// `s = 0` and `s = 1`.
    pub fn from_grid_values(values: &[f64]) -> Result<Self> {
        let grid = Grid::new(values.len())
            .map_err(|_| Error::InvalidMeasure("grid-sampled measure needs at least 2 values".into()))?;
        let mut y = Vec::with_capacity(values.len() + 2);
        let mut running = f64::NEG_INFINITY;
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(i));
            }
            if v < running - TOL_MONO {
                return Err(Error::NotMonotone {
                    index: i - 1,
                    drop: running - v,
                });
            }
            running = running.max(v);
            y.push(running);
        }
        let m = values.len();
        let half = 0.5 * grid.spacing();
        let first = y[0] - (y[1] - y[0]) * 0.5;
        let last = y[m - 1] + (y[m - 1] - y[m - 2]) * 0.5;
        let mut t = Vec::with_capacity(m + 2);
        t.push(0.0);
        t.extend(grid.nodes());
        t.push(1.0);
        debug_assert!(t[1] == half);
        y.insert(0, first);
        y.push(last);
        let mut mass = Vec::with_capacity(m + 2);
        let mut moment = Vec::with_capacity(m + 2);
        let (mut a, mut b) = (0.0, 0.0);
        mass.push(0.0);
        moment.push(0.0);
        for j in 0..t.len() - 1 {
            let dt = t[j + 1] - t[j];
            a += dt;
            b += dt * 0.5 * (y[j] + y[j + 1]);
            mass.push(a);
            moment.push(b);
        }
        Ok(Self {
            cells: m,
            t,
            y,
            mass,
            moment,
        })
    }

    /// Quantile values at the cell centers this measure was built from.
    pub fn grid_values(&self) -> &[f64] {
        &self.y[1..self.y.len() - 1]
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.t, &self.y)
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    fn quantile(&self, s: f64) -> f64 {
        let j = (self.t.partition_point(|&t| t < s)).clamp(1, self.t.len() - 1);
        let (t0, t1) = (self.t[j - 1], self.t[j]);
        let (y0, y1) = (self.y[j - 1], self.y[j]);
        y0 + (y1 - y0) * (s - t0) / (t1 - t0)
    }

    fn cdf_plus(&self, x: f64) -> f64 {
        let k_end = self.y.len() - 1;
        if x < self.y[0] {
            return 0.0;
        }
        if x >= self.y[k_end] {
            return 1.0;
        }
        let k = self.y.partition_point(|&y| y <= x) - 1;
        let (y0, y1) = (self.y[k], self.y[k + 1]);
        self.t[k] + (self.t[k + 1] - self.t[k]) * (x - y0) / (y1 - y0)
    }

    fn cdf_minus(&self, x: f64) -> f64 {
        let k_end = self.y.len() - 1;
        if x <= self.y[0] {
            return 0.0;
        }
        if x > self.y[k_end] {
            return 1.0;
        }
        let k = self.y.partition_point(|&y| y < x);
        let (y0, y1) = (self.y[k - 1], self.y[k]);
        self.t[k - 1] + (self.t[k] - self.t[k - 1]) * (x - y0) / (y1 - y0)
    }

    fn end_slopes(&self) -> (f64, f64) {
        let n = self.t.len();
        (
            (self.y[1] - self.y[0]) / (self.t[1] - self.t[0]),
            (self.y[n - 1] - self.y[n - 2]) / (self.t[n - 1] - self.t[n - 2]),
        )
    }

    fn expected_distance(&self, x: f64) -> f64 {
        let k_end = self.y.len() - 1;
        let j = self.y.partition_point(|&y| y < x);
        // segments 0..j-1 (exclusive of the straddling one) lie below x
        let below = j.saturating_sub(1);
        let mut total = x * self.mass[below] - self.moment[below];
        let above_from = j.min(k_end);
        total += (self.moment[k_end] - self.moment[above_from])
            - x * (self.mass[k_end] - self.mass[above_from]);
        if j >= 1 && j <= k_end {
            let (ya, yb) = (self.y[j - 1], self.y[j]);
            let dt = self.t[j] - self.t[j - 1];
            let spread = yb - ya;
            let e = if spread > 0.0 {
                ((x - ya).powi(2) + (yb - x).powi(2)) / (2.0 * spread)
            } else {
                (x - ya).abs()
            };
            total += dt * e;
        }
        total
    }
}

impl TryFrom<MeasureSpec> for TargetMeasure {
    type Error = Error;

    fn try_from(spec: MeasureSpec) -> Result<Self> {
        Ok(match spec {
            MeasureSpec::Dirac { at } => {
                check_finite("at", at)?;
                TargetMeasure::Dirac(at)
            }
            MeasureSpec::Uniform { a, b } => {
                check_finite("a", a)?;
                check_finite("b", b)?;
                if a >= b {
                    return Err(Error::InvalidMeasure("uniform needs a < b".into()));
                }
                TargetMeasure::Uniform { lo: a, hi: b }
            }
            MeasureSpec::TruncatedGaussian {
                mean,
                stdev,
                cut_lo,
                cut_hi,
            } => TargetMeasure::TruncatedGaussian(TruncatedGaussian::new(
                mean, stdev, cut_lo, cut_hi,
            )?),
            MeasureSpec::Empirical { atoms, weights } => {
                TargetMeasure::Empirical(Empirical::new(&atoms, &weights)?)
            }
            MeasureSpec::GridSampled { values } => {
                TargetMeasure::GridSampled(PiecewiseQuantile::from_grid_values(&values)?)
            }
        })
    }
}

impl From<TargetMeasure> for MeasureSpec {
    fn from(t: TargetMeasure) -> Self {
        match t {
            TargetMeasure::Dirac(at) => MeasureSpec::Dirac { at },
            TargetMeasure::Uniform { lo, hi } => MeasureSpec::Uniform { a: lo, b: hi },
            TargetMeasure::TruncatedGaussian(g) => MeasureSpec::TruncatedGaussian {
                mean: g.mean,
                stdev: g.stdev,
                cut_lo: g.cut_lo,
                cut_hi: g.cut_hi,
            },
            TargetMeasure::Empirical(e) => MeasureSpec::Empirical {
                atoms: e.atoms,
                weights: e.weights,
            },
            TargetMeasure::GridSampled(p) => MeasureSpec::GridSampled {
                values: p.grid_values().to_vec(),
            },
        }
    }
}

impl TargetMeasure {
    pub fn dirac(at: f64) -> Result<Self> {
        MeasureSpec::Dirac { at }.try_into()
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        MeasureSpec::Uniform { a, b }.try_into()
    }

    pub fn truncated_gaussian(mean: f64, stdev: f64, cut_lo: f64, cut_hi: f64) -> Result<Self> {
        Ok(TargetMeasure::TruncatedGaussian(TruncatedGaussian::new(
            mean, stdev, cut_lo, cut_hi,
        )?))
    }

    pub fn empirical(atoms: &[f64], weights: &[f64]) -> Result<Self> {
        Ok(TargetMeasure::Empirical(Empirical::new(atoms, weights)?))
    }

    pub fn grid_sampled(q: &QuantileVector) -> Result<Self> {
        Ok(TargetMeasure::GridSampled(PiecewiseQuantile::from_grid_values(
            q.values(),
        )?))
    }

    /// `R^-(x) = mu((-inf, x))`.
    pub fn cdf_minus(&self, x: f64) -> f64 {
        match self {
            TargetMeasure::Dirac(a) => {
                if x > *a {
                    1.0
                } else {
                    0.0
                }
            }
            TargetMeasure::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            TargetMeasure::TruncatedGaussian(g) => g.cdf(x),
            TargetMeasure::Empirical(e) => e.mass_of_first(e.below_count(x)),
            TargetMeasure::GridSampled(p) => p.cdf_minus(x),
        }
    }

    /// `R^+(x) = mu((-inf, x])`.
    pub fn cdf_plus(&self, x: f64) -> f64 {
        match self {
            TargetMeasure::Dirac(a) => {
                if x >= *a {
                    1.0
                } else {
                    0.0
                }
            }
            TargetMeasure::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            TargetMeasure::TruncatedGaussian(g) => g.cdf(x),
            TargetMeasure::Empirical(e) => e.mass_of_first(e.at_or_below_count(x)),
            TargetMeasure::GridSampled(p) => p.cdf_plus(x),
        }
    }

    /// Left-continuous quantile `Q(s) = min { x : R^+(x) >= s }`.
    ///
    /// Unchecked variant of [`quantile_eval`]; levels outside `(0, 1)` are
    /// clamped to the support.
    pub fn quantile(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        match self {
            TargetMeasure::Dirac(a) => *a,
            TargetMeasure::Uniform { lo, hi } => lo + (hi - lo) * s,
            TargetMeasure::TruncatedGaussian(g) => g.quantile(s),
            TargetMeasure::Empirical(e) => e.quantile(s),
            TargetMeasure::GridSampled(p) => p.quantile(s),
        }
    }

    /// `Q'(0)`; zero for measures whose quantile is flat at the left end.
    pub fn quantile_slope_at_0(&self) -> f64 {
        match self {
            TargetMeasure::Dirac(_) | TargetMeasure::Empirical(_) => 0.0,
            TargetMeasure::Uniform { lo, hi } => hi - lo,
            TargetMeasure::TruncatedGaussian(g) => g.quantile_slope(0.0),
            TargetMeasure::GridSampled(p) => p.end_slopes().0,
        }
    }

    /// `Q'(1)`.
    pub fn quantile_slope_at_1(&self) -> f64 {
        match self {
            TargetMeasure::Dirac(_) | TargetMeasure::Empirical(_) => 0.0,
            TargetMeasure::Uniform { lo, hi } => hi - lo,
            TargetMeasure::TruncatedGaussian(g) => g.quantile_slope(1.0),
            TargetMeasure::GridSampled(p) => p.end_slopes().1,
        }
    }

    /// `Q''(s)` where it exists as a function; `None` for targets whose
    /// quantile has kinks or jumps (grid-sampled, multi-atom empirical).
    pub fn quantile_second_derivative(&self, s: f64) -> Option<f64> {
        match self {
            TargetMeasure::Dirac(_) | TargetMeasure::Uniform { .. } => Some(0.0),
            TargetMeasure::TruncatedGaussian(g) => Some(g.quantile_curvature(s)),
            TargetMeasure::Empirical(e) if e.atoms.len() == 1 => Some(0.0),
            TargetMeasure::Empirical(_) | TargetMeasure::GridSampled(_) => None,
        }
    }

    /// `int_0^1 |x - Q(t)| dt`, i.e. `E|x - Y|` for `Y` distributed by this
    /// measure. Exact for every variant.
    pub fn expected_distance(&self, x: f64) -> f64 {
        match self {
            TargetMeasure::Dirac(a) => (x - a).abs(),
            TargetMeasure::Uniform { lo, hi } => {
                if x <= *lo {
                    0.5 * (lo + hi) - x
                } else if x >= *hi {
                    x - 0.5 * (lo + hi)
                } else {
                    ((x - lo).powi(2) + (hi - x).powi(2)) / (2.0 * (hi - lo))
                }
            }
            TargetMeasure::TruncatedGaussian(g) => g.expected_distance(x),
            TargetMeasure::Empirical(e) => e.expected_distance(x),
            TargetMeasure::GridSampled(p) => p.expected_distance(x),
        }
    }

    /// Quantile values at the nodes of `grid`.
    pub fn sample(&self, grid: &Grid) -> QuantileVector {
        QuantileVector::from_fn(*grid, |s| self.quantile(s))
    }

    /// Atom locations of the measure (for reconstruction of singular parts).
    pub fn atoms(&self) -> Vec<f64> {
        match self {
            TargetMeasure::Dirac(a) => vec![*a],
            TargetMeasure::Empirical(e) => e.atoms.clone(),
            _ => Vec::new(),
        }
    }
}

/// Evaluates the quantile of `target` at a level `s` in the open interval.
pub fn quantile_eval(target: &TargetMeasure, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::LevelOutOfRange(s));
    }
    Ok(target.quantile(s))
}

/// Returns `(R^-(x), R^+(x))`.
pub fn cdf_eval(target: &TargetMeasure, x: f64) -> (f64, f64) {
    (target.cdf_minus(x), target.cdf_plus(x))
}
