use serde::{Deserialize, Serialize};

use super::QuantileVector;
use crate::{Error, Result};

/// Default half-width of the band around the anchor that is read as an atom.
pub const DEFAULT_ATOM_TOL: f64 = 1e-3;
/// Slopes at or below this value are treated as flat (singular) cells.
pub const DEFAULT_SLOPE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// One cell of the absolutely continuous part: the density `f` at `x`,
/// occupying an `x`-interval of length `width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensitySample {
    pub x: f64,
    pub f: f64,
    pub width: f64,
}

/// A measure split into atoms and a sampled density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub atoms: Vec<Atom>,
    pub density: Vec<DensitySample>,
}

impl DensityProfile {
    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Integral of the sampled density, `sum f * width`.
    pub fn continuous_mass(&self) -> f64 {
        self.density.iter().map(|d| d.f * d.width).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.atom_mass() + self.continuous_mass()
    }

    /// Absolutely continuous mass whose location falls in the open interval.
    pub fn continuous_mass_in(&self, lo: f64, hi: f64) -> f64 {
        self.density
            .iter()
            .filter(|d| d.x > lo && d.x < hi)
            .map(|d| d.f * d.width)
            .sum()
    }

    /// `int 1/f dx` over the absolutely continuous part.
    pub fn inverse_density_integral(&self) -> f64 {
        self.density.iter().map(|d| d.width / d.f).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CellKind {
    Anchor,
    Flat,
    Smooth,
}

/// Splits the measure with quantile `g` into atoms and a density.
///
/// Cells with `|g - anchor| < atom_tol` are pooled per contiguous run into an
/// atom at `anchor` whose mass is the run length in `s`. Remaining cells with
/// slope above `slope_floor` contribute the density `1 / slope` (inverse
/// function rule); contiguous flat cells become an atom at their mean value.
pub fn density_from_quantile(
    g: &QuantileVector,
    g_slope: &[f64],
    atom_tol: f64,
    atom_anchor: Option<f64>,
    slope_floor: f64,
) -> Result<DensityProfile> {
    g.ensure_monotone()?;
    if g_slope.len() != g.len() {
        return Err(Error::LengthMismatch {
            expected: g.len(),
            got: g_slope.len(),
        });
    }
    if !(atom_tol > 0.0) {
        return Err(Error::param("atom_tol", "must be positive"));
    }
    let h = g.grid().spacing();
    let values = g.values();
    let kinds: Vec<CellKind> = values
        .iter()
        .zip(g_slope)
        .map(|(&v, &d)| match atom_anchor {
            Some(a) if (v - a).abs() < atom_tol => CellKind::Anchor,
            _ if d > slope_floor => CellKind::Smooth,
            _ => CellKind::Flat,
        })
        .collect();

    let mut profile = DensityProfile {
        atoms: Vec::new(),
        density: Vec::new(),
    };
    let mut i = 0;
    while i < values.len() {
        let kind = kinds[i];
        let mut j = i;
        while j < values.len() && kinds[j] == kind {
            j += 1;
        }
        match kind {
            CellKind::Smooth => {
                for k in i..j {
                    profile.density.push(DensitySample {
                        x: values[k],
                        f: 1.0 / g_slope[k],
                        width: g_slope[k] * h,
                    });
                }
            }
            CellKind::Anchor | CellKind::Flat => {
                let location = match (kind, atom_anchor) {
                    (CellKind::Anchor, Some(a)) => a,
                    _ => values[i..j].iter().sum::<f64>() / (j - i) as f64,
                };
                let mass = (j - i) as f64 * h;
                match profile.atoms.iter_mut().find(|a| a.location == location) {
                    Some(a) => a.mass += mass,
                    None => profile.atoms.push(Atom { location, mass }),
                }
            }
        }
        i = j;
    }
    Ok(profile)
}
