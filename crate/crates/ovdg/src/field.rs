//! Piecewise polynomial fields in the orthonormal modal basis.

use std::sync::Arc;

use crate::basis::{self, BasisTable};
use crate::error::Result;
use crate::mesh::Mesh1D;

/// Number of Gauss points used for inner products with data of the same
/// polynomial degree as the field; exact through the cubic nonlinearities
/// that appear in the schemes.
pub const fn quad_points(degree: usize) -> usize {
    degree + 3
}

/// A discontinuous piecewise polynomial of fixed degree per cell.
///
/// Coefficients are stored cell-major. Because the basis is orthonormal,
/// the L2 norm is the Euclidean norm of the coefficient vector and cell
/// inner products are coefficient dot products.
#[derive(Debug, Clone)]
pub struct DGField {
    mesh: Arc<Mesh1D>,
    degree: usize,
    coeffs: Vec<f64>,
}

/// Which cell endpoint an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl DGField {
    pub fn zeros(mesh: Arc<Mesh1D>, degree: usize) -> Self {
        let n = mesh.n_cells() * (degree + 1);
        DGField {
            mesh,
            degree,
            coeffs: vec![0.0; n],
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn cell(&self, j: usize) -> &[f64] {
        let w = self.degree + 1;
        &self.coeffs[j * w..(j + 1) * w]
    }

    pub fn cell_mut(&mut self, j: usize) -> &mut [f64] {
        let w = self.degree + 1;
        &mut self.coeffs[j * w..(j + 1) * w]
    }

    fn scale_factor(&self, j: usize) -> f64 {
        (2.0 / self.mesh.h(j)).sqrt()
    }

    /// Value at reference coordinate xi inside cell j.
    pub fn eval_ref(&self, j: usize, xi: f64) -> f64 {
        let mut psi = vec![0.0; self.degree + 1];
        basis::eval_orthonormal(self.degree, xi, &mut psi);
        self.eval_ref_with(j, &psi)
    }

    /// Value in cell j given pre-evaluated psi values at the point.
    pub fn eval_ref_with(&self, j: usize, psi: &[f64]) -> f64 {
        let dot: f64 = self.cell(j).iter().zip(psi).map(|(c, p)| c * p).sum();
        self.scale_factor(j) * dot
    }

    /// Value at the physical point x (cell located by binary search).
    pub fn eval(&self, x: f64) -> f64 {
        let j = self.mesh.cell_containing(x);
        let h = self.mesh.h(j);
        let xi = ((2.0 * (x - self.mesh.node(j)) / h) - 1.0).clamp(-1.0, 1.0);
        self.eval_ref(j, xi)
    }

    /// One-sided value at the left face of cell j.
    pub fn trace(&self, j: usize, side: Side) -> f64 {
        let s = self.scale_factor(j);
        let mut acc = 0.0;
        for (m, &c) in self.cell(j).iter().enumerate() {
            let sign = match side {
                Side::Right => 1.0,
                Side::Left => {
                    if m % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            acc += c * sign * (m as f64 + 0.5).sqrt();
        }
        s * acc
    }

    pub fn cell_average(&self, j: usize) -> f64 {
        self.cell(j)[0] / self.mesh.h(j).sqrt()
    }

    /// Integral over the whole domain.
    pub fn integral(&self) -> f64 {
        (0..self.n_cells())
            .map(|j| self.cell(j)[0] * self.mesh.h(j).sqrt())
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.integral() / self.mesh.length()
    }

    /// L2 norm over the domain; exact by orthonormality.
    pub fn norm_l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    /// self += a * other. Panics if the discretizations differ.
    pub fn scaled_add(&mut self, a: f64, other: &Self) {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        assert_eq!(self.degree, other.degree);
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += a * o;
        }
    }

    /// Shift the field by a constant.
    pub fn add_constant(&mut self, value: f64) {
        let w = self.degree + 1;
        for j in 0..self.n_cells() {
            let h = self.mesh.h(j);
            self.coeffs[j * w] += value * h.sqrt();
        }
    }
}

/// L2 projection of `f` onto degree-k polynomials per cell.
pub fn l2_project(mesh: &Arc<Mesh1D>, degree: usize, f: impl Fn(f64) -> f64) -> Result<DGField> {
    let table = BasisTable::new(degree, quad_points(degree))?;
    let mut out = DGField::zeros(mesh.clone(), degree);
    for j in 0..mesh.n_cells() {
        let scale = (mesh.h(j) / 2.0).sqrt();
        let cell = out.cell_mut(j);
        for (q, (&xi, &wq)) in table.rule.nodes.iter().zip(&table.rule.weights).enumerate() {
            let fx = f(mesh.to_physical(j, xi));
            for (m, &psi) in table.row(q).iter().enumerate() {
                cell[m] += scale * wq * fx * psi;
            }
        }
    }
    Ok(out)
}

/// One-sided projection: agrees with `f` exactly at the chosen endpoint of
/// every cell and matches moments against polynomials of degree <= k - 1.
/// For k = 0 it reduces to endpoint interpolation.
pub fn project_onesided(
    mesh: &Arc<Mesh1D>,
    degree: usize,
    f: impl Fn(f64) -> f64,
    side: Side,
) -> Result<DGField> {
    let table = BasisTable::new(degree, quad_points(degree))?;
    let (endl, endr) = basis::end_values(degree);
    let end = match side {
        Side::Left => &endl,
        Side::Right => &endr,
    };
    let mut out = DGField::zeros(mesh.clone(), degree);
    for j in 0..mesh.n_cells() {
        let h = mesh.h(j);
        let sf = (2.0 / h).sqrt();
        let scale = (h / 2.0).sqrt();
        let x_end = match side {
            Side::Left => mesh.node(j),
            Side::Right => mesh.node(j + 1),
        };
        let f_end = f(x_end);
        let cell = out.cell_mut(j);
        for (q, (&xi, &wq)) in table.rule.nodes.iter().zip(&table.rule.weights).enumerate() {
            let fx = f(mesh.to_physical(j, xi));
            let row = table.row(q);
            for m in 0..degree {
                cell[m] += scale * wq * fx * row[m];
            }
        }
        // Top coefficient from the endpoint condition.
        let partial: f64 = (0..degree).map(|m| cell[m] * sf * end[m]).sum();
        cell[degree] = (f_end - partial) / (sf * end[degree]);
    }
    Ok(out)
}

/// One-sided interface values of a field.
///
/// Interface i sits between cells i - 1 and i (0 and n_cells are the domain
/// ends). With `periodic` the exterior values wrap; otherwise the exterior
/// value at each domain end copies the interior trace.
#[derive(Debug, Clone)]
pub struct Traces {
    /// Value approaching from the left, length n_cells + 1.
    pub minus: Vec<f64>,
    /// Value approaching from the right, length n_cells + 1.
    pub plus: Vec<f64>,
}

impl Traces {
    pub fn len(&self) -> usize {
        self.minus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minus.is_empty()
    }

    /// Jump at interface i: plus - minus.
    pub fn jump(&self, i: usize) -> f64 {
        self.plus[i] - self.minus[i]
    }

    pub fn average(&self, i: usize) -> f64 {
        0.5 * (self.plus[i] + self.minus[i])
    }
}

pub fn traces(u: &DGField, periodic: bool) -> Traces {
    let n = u.n_cells();
    let mut minus = vec![0.0; n + 1];
    let mut plus = vec![0.0; n + 1];
    for j in 0..n {
        plus[j] = u.trace(j, Side::Left);
        minus[j + 1] = u.trace(j, Side::Right);
    }
    if periodic {
        minus[0] = minus[n];
        plus[n] = plus[0];
    } else {
        minus[0] = plus[0];
        plus[n] = minus[n];
    }
    Traces { minus, plus }
}

#[derive(Debug, Clone, Copy)]
pub struct ErrorNorms {
    pub l2: f64,
    pub linf: f64,
}

/// Discrete L2 and Linf distance between a field and a reference function.
///
/// L2 is sampled at the (degree + 1)-point Gauss nodes of every cell. The
/// leading term of the projection error is the next Legendre mode, which
/// vanishes at those nodes, so the metric tracks the error the scheme itself
/// accumulates instead of the approximation floor of the mesh. Linf scans
/// the denser `quad_points(degree)` rule plus both endpoints of every cell,
/// where that floor stays visible.
pub fn error_norms(u: &DGField, exact: impl Fn(f64) -> f64) -> Result<ErrorNorms> {
    let degree = u.degree();
    let l2_table = BasisTable::new(degree, degree + 1)?;
    let sup_table = BasisTable::new(degree, quad_points(degree))?;
    let mesh = u.mesh();
    let mut l2_sq = 0.0;
    let mut linf: f64 = 0.0;
    for j in 0..u.n_cells() {
        let half_h = 0.5 * mesh.h(j);
        for (q, (&xi, &wq)) in l2_table
            .rule
            .nodes
            .iter()
            .zip(&l2_table.rule.weights)
            .enumerate()
        {
            let x = mesh.to_physical(j, xi);
            let diff = u.eval_ref_with(j, l2_table.row(q)) - exact(x);
            l2_sq += half_h * wq * diff * diff;
        }
        for (q, &xi) in sup_table.rule.nodes.iter().enumerate() {
            let x = mesh.to_physical(j, xi);
            let diff = u.eval_ref_with(j, sup_table.row(q)) - exact(x);
            linf = linf.max(diff.abs());
        }
        let dl = u.trace(j, Side::Left) - exact(mesh.node(j));
        let dr = u.trace(j, Side::Right) - exact(mesh.node(j + 1));
        linf = linf.max(dl.abs()).max(dr.abs());
    }
    Ok(ErrorNorms {
        l2: l2_sq.sqrt(),
        linf,
    })
}

/// Continuous primitive of a field, anchored at one end of the domain.
///
/// Returns the degree k + 1 field v with v' = u exactly inside every cell,
/// v continuous across interior interfaces, and v equal to `boundary_value`
/// at the anchored domain end.
pub fn antiderivative_field(u: &DGField, anchor: Side, boundary_value: f64) -> DGField {
    let mesh = u.mesh().clone();
    let n = mesh.n_cells();
    let degree = u.degree();
    // Cell integrals, then interface values by telescoping from the anchor.
    let integrals: Vec<f64> = (0..n).map(|j| u.cell(j)[0] * mesh.h(j).sqrt()).collect();
    let mut left_vals = vec![0.0; n];
    match anchor {
        Side::Left => {
            let mut acc = boundary_value;
            for j in 0..n {
                left_vals[j] = acc;
                acc += integrals[j];
            }
        }
        Side::Right => {
            let mut acc = boundary_value;
            for j in (0..n).rev() {
                acc -= integrals[j];
                left_vals[j] = acc;
            }
        }
    }
    let mut out = DGField::zeros(mesh.clone(), degree + 1);
    let mut scaled = vec![0.0; degree + 1];
    for j in 0..n {
        let h = mesh.h(j);
        let sf = (2.0 / h).sqrt();
        for (m, &c) in u.cell(j).iter().enumerate() {
            scaled[m] = c * sf;
        }
        let mut anti = basis::antiderivative(&scaled);
        for a in &mut anti {
            *a *= 0.5 * h;
        }
        anti[0] += std::f64::consts::SQRT_2 * left_vals[j];
        let cell = out.cell_mut(j);
        for (m, &a) in anti.iter().enumerate() {
            cell[m] = a / sf;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn mesh(n: usize) -> Arc<Mesh1D> {
        Arc::new(build_mesh(0.0, 2.0 * PI, n).unwrap())
    }

    #[test]
    fn projection_reproduces_polynomials_exactly() {
        let m = Arc::new(build_mesh(-1.0, 2.0, 5).unwrap());
        let f = |x: f64| 3.0 - x + 0.5 * x * x;
        let u = l2_project(&m, 2, f).unwrap();
        for &x in &[-0.9, 0.0, 0.7, 1.99] {
            assert_relative_eq!(u.eval(x), f(x), epsilon = 1e-12);
        }
    }

    #[test]
    fn projection_error_superconverges_in_l2_but_not_in_linf() {
        for k in [1usize, 2] {
            let coarse = error_norms(&l2_project(&mesh(20), k, f64::sin).unwrap(), f64::sin)
                .unwrap();
            let fine = error_norms(&l2_project(&mesh(40), k, f64::sin).unwrap(), f64::sin)
                .unwrap();
            // A bare projection gains one extra order at the L2 sampling
            // nodes; the sup norm still sees the approximation floor.
            let l2_order = (coarse.l2 / fine.l2).log2();
            let linf_order = (coarse.linf / fine.linf).log2();
            assert!(
                (l2_order - (k as f64 + 2.0)).abs() < 0.1,
                "k = {k}: observed L2 order {l2_order}"
            );
            assert!(
                (linf_order - (k as f64 + 1.0)).abs() < 0.1,
                "k = {k}: observed Linf order {linf_order}"
            );
        }
    }

    #[test]
    fn l2_norm_matches_quadrature() {
        let u = l2_project(&mesh(24), 2, f64::sin).unwrap();
        // ||sin||_L2 over [0, 2pi] is sqrt(pi).
        assert_relative_eq!(u.norm_l2(), PI.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn error_norm_of_zero_field_is_norm_of_exact() {
        let u = DGField::zeros(mesh(20), 1);
        let norms = error_norms(&u, f64::sin).unwrap();
        // The two-point sampling rule resolves the reference only to O(h^4).
        assert_relative_eq!(norms.l2, PI.sqrt(), epsilon = 1e-4);
        assert_relative_eq!(norms.linf, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn onesided_projection_matches_endpoint_and_is_exact_on_polynomials() {
        let m = Arc::new(build_mesh(0.0, 1.0, 4).unwrap());
        let f = |x: f64| x * x * x;
        let u = project_onesided(&m, 3, f, Side::Right).unwrap();
        for j in 0..4 {
            assert_relative_eq!(u.trace(j, Side::Right), f(m.node(j + 1)), epsilon = 1e-13);
        }
        for &x in &[0.1, 0.33, 0.9] {
            assert_relative_eq!(u.eval(x), f(x), epsilon = 1e-12);
        }
        let v = project_onesided(&m, 2, f64::sin, Side::Left).unwrap();
        for j in 0..4 {
            assert_relative_eq!(v.trace(j, Side::Left), m.node(j).sin(), epsilon = 1e-13);
        }
    }

    #[test]
    fn onesided_projection_interpolates_for_k_zero() {
        let m = Arc::new(build_mesh(0.0, 1.0, 3).unwrap());
        let u = project_onesided(&m, 0, f64::exp, Side::Right).unwrap();
        for j in 0..3 {
            assert_relative_eq!(
                u.trace(j, Side::Right),
                m.node(j + 1).exp(),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn traces_report_jumps_with_periodic_wrap() {
        let m = Arc::new(build_mesh(0.0, 1.0, 2).unwrap());
        // Means -1 and +1 in the two cells.
        let f = |x: f64| if x < 0.5 { -1.0 } else { 1.0 };
        let u = l2_project(&m, 0, f).unwrap();
        let tr = traces(&u, true);
        assert_eq!(tr.len(), 3);
        assert_relative_eq!(tr.jump(1), 2.0, epsilon = 1e-13);
        // Wrap: interface 0 sees cell 1 from the left.
        assert_relative_eq!(tr.jump(0), -2.0, epsilon = 1e-13);
        let tr = traces(&u, false);
        assert_relative_eq!(tr.jump(0), 0.0, epsilon = 1e-13);
        assert_relative_eq!(tr.jump(2), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn cell_average_and_integral_are_consistent() {
        let m = Arc::new(build_mesh(0.0, 1.0, 8).unwrap());
        let u = l2_project(&m, 2, |x| 2.0 + x).unwrap();
        assert_relative_eq!(u.integral(), 2.5, epsilon = 1e-12);
        assert_relative_eq!(u.cell_average(0), 2.0 + 1.0 / 16.0, epsilon = 1e-12);
        assert_relative_eq!(u.mean(), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn antiderivative_of_constant_with_right_anchor() {
        let m = Arc::new(build_mesh(0.0, 1.0, 4).unwrap());
        let u = l2_project(&m, 1, |_| 1.0).unwrap();
        let v = antiderivative_field(&u, Side::Right, 0.0);
        assert_eq!(v.degree(), 2);
        for &x in &[0.0, 0.3, 0.77, 1.0] {
            assert_relative_eq!(v.eval(x), x - 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn antiderivative_is_continuous_and_differentiates_back() {
        let m = Arc::new(build_mesh(0.0, 2.0 * PI, 16).unwrap());
        let u = l2_project(&m, 2, f64::sin).unwrap();
        let v = antiderivative_field(&u, Side::Left, -1.0);
        // Continuity across interior interfaces.
        for j in 0..15 {
            assert_relative_eq!(
                v.trace(j, Side::Right),
                v.trace(j + 1, Side::Left),
                epsilon = 1e-12
            );
        }
        assert_relative_eq!(v.trace(0, Side::Left), -1.0, epsilon = 1e-13);
        // v approximates -cos.
        let norms = error_norms(&v, |x| -x.cos()).unwrap();
        assert!(norms.l2 < 2e-4, "l2 = {}", norms.l2);
        // d/dx via finite differences of v matches u away from interfaces.
        for &x in &[0.4, 2.2, 5.0] {
            let d = (v.eval(x + 1e-6) - v.eval(x - 1e-6)) / 2e-6;
            assert_relative_eq!(d, u.eval(x), epsilon = 1e-5, max_relative = 1e-4);
        }
    }

    #[test]
    fn add_constant_shifts_mean_only() {
        let m = mesh(6);
        let mut u = l2_project(&m, 2, f64::sin).unwrap();
        let before = u.clone();
        u.add_constant(3.0);
        assert_relative_eq!(u.mean(), before.mean() + 3.0, epsilon = 1e-12);
        for &x in &[0.3, 1.0, 4.4] {
            assert_relative_eq!(u.eval(x), before.eval(x) + 3.0, epsilon = 1e-12);
        }
    }
}
