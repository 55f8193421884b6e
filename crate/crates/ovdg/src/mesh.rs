//! One-dimensional meshes: ordered cell boundaries over [a, b].

use crate::error::{OvdgError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    /// Cell boundaries, strictly increasing, length n_cells + 1.
    nodes: Vec<f64>,
}

/// Uniform mesh with n cells on [a, b].
pub fn build_mesh(a: f64, b: f64, n: usize) -> Result<Mesh1D> {
    Mesh1D::uniform(a, b, n)
}

impl Mesh1D {
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(OvdgError::InvalidMesh("cell count must be positive".into()));
        }
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(OvdgError::InvalidMesh(format!(
                "need finite a < b, got [{a}, {b}]"
            )));
        }
        let mut nodes: Vec<f64> = (0..=n)
            .map(|i| a + (b - a) * (i as f64) / (n as f64))
            .collect();
        nodes[0] = a;
        nodes[n] = b;
        Ok(Mesh1D { nodes })
    }

    /// Mesh from an explicit boundary list; the cells may be nonuniform.
    pub fn from_boundaries(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(OvdgError::InvalidMesh(
                "need at least two boundaries".into(),
            ));
        }
        for w in nodes.windows(2) {
            if !(w[0] < w[1]) || !w[0].is_finite() || !w[1].is_finite() {
                return Err(OvdgError::InvalidMesh(
                    "boundaries must be finite and strictly increasing".into(),
                ));
            }
        }
        Ok(Mesh1D { nodes })
    }

    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn a(&self) -> f64 {
        self.nodes[0]
    }

    pub fn b(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn length(&self) -> f64 {
        self.b() - self.a()
    }

    /// Boundary i, 0 <= i <= n_cells.
    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    pub fn h(&self, j: usize) -> f64 {
        self.nodes[j + 1] - self.nodes[j]
    }

    pub fn center(&self, j: usize) -> f64 {
        0.5 * (self.nodes[j] + self.nodes[j + 1])
    }

    pub fn h_min(&self) -> f64 {
        (0..self.n_cells()).map(|j| self.h(j)).fold(f64::MAX, f64::min)
    }

    /// Physical coordinate of the reference point xi in cell j.
    pub fn to_physical(&self, j: usize, xi: f64) -> f64 {
        self.center(j) + 0.5 * self.h(j) * xi
    }

    /// Index of the cell containing x, clamped to the mesh.
    pub fn cell_containing(&self, x: f64) -> usize {
        let n = self.n_cells();
        let idx = self.nodes.partition_point(|&nd| nd <= x);
        idx.saturating_sub(1).min(n - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_mesh_has_exact_endpoints_and_widths() {
        let mesh = build_mesh(0.0, 1.0, 7).unwrap();
        assert_eq!(mesh.n_cells(), 7);
        assert_eq!(mesh.a(), 0.0);
        assert_eq!(mesh.b(), 1.0);
        let h: f64 = (0..7).map(|j| mesh.h(j)).sum();
        assert_relative_eq!(h, 1.0, epsilon = 1e-15);
        assert_relative_eq!(mesh.center(3), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn single_cell_mesh_is_valid() {
        let mesh = build_mesh(-2.0, 3.0, 1).unwrap();
        assert_eq!(mesh.n_cells(), 1);
        assert_relative_eq!(mesh.h(0), 5.0);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(build_mesh(0.0, 1.0, 0).is_err());
        assert!(build_mesh(1.0, 1.0, 4).is_err());
        assert!(build_mesh(2.0, 1.0, 4).is_err());
        assert!(Mesh1D::from_boundaries(vec![0.0]).is_err());
        assert!(Mesh1D::from_boundaries(vec![0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn nonuniform_boundaries_accepted() {
        let mesh = Mesh1D::from_boundaries(vec![0.0, 0.1, 0.5, 1.0]).unwrap();
        assert_eq!(mesh.n_cells(), 3);
        assert_relative_eq!(mesh.h(1), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn cell_lookup_covers_boundaries() {
        let mesh = build_mesh(0.0, 1.0, 4).unwrap();
        assert_eq!(mesh.cell_containing(0.0), 0);
        assert_eq!(mesh.cell_containing(0.249), 0);
        assert_eq!(mesh.cell_containing(0.25), 1);
        assert_eq!(mesh.cell_containing(1.0), 3);
        assert_eq!(mesh.cell_containing(-5.0), 0);
        assert_eq!(mesh.cell_containing(5.0), 3);
    }
}
