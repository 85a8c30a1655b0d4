use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform cell-centered grid on `(0, 1)`.
///
/// Cell `i` covers `[i h, (i + 1) h]` and is represented by its midpoint
/// `s_i = (i + 1/2) h`, so no node ever sits on `0` or `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Grid {
    cells: usize,
}

impl Grid {
    pub fn new(cells: usize) -> Result<Self> {
        if cells < 2 {
            return Err(Error::GridTooSmall(cells));
        }
        Ok(Self { cells })
    }

    pub fn len(&self) -> usize {
        self.cells
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.cells as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.cells as f64
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.cells).map(move |i| self.node(i))
    }

    pub fn node_vec(&self) -> Vec<f64> {
        self.nodes().collect()
    }
}

impl TryFrom<usize> for Grid {
    type Error = Error;

    fn try_from(cells: usize) -> Result<Self> {
        Grid::new(cells)
    }
}

impl From<Grid> for usize {
    fn from(g: Grid) -> usize {
        g.cells
    }
}

/// Builds the cell-centered grid with `cells` cells; rejects `cells < 2`.
pub fn build_grid(cells: usize) -> Result<Grid> {
    Grid::new(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cells() {
        let g = build_grid(2).unwrap();
        assert_eq!(g.node_vec(), vec![0.25, 0.75]);
        assert_eq!(g.spacing(), 0.5);
    }

    #[test]
    fn four_cells() {
        let g = build_grid(4).unwrap();
        assert_eq!(g.node_vec(), vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn thousand_cells_endpoints() {
        let g = build_grid(1000).unwrap();
        assert!((g.node(0) - 0.0005).abs() < 1e-15);
        assert!((g.node(999) - 0.9995).abs() < 1e-15);
        let nodes = g.node_vec();
        assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(nodes.windows(2).all(|w| ((w[1] - w[0]) - g.spacing()).abs() < 1e-15));
    }

    #[test]
    fn rejects_small() {
        assert!(matches!(build_grid(1), Err(Error::GridTooSmall(1))));
        assert!(build_grid(0).is_err());
    }
}
