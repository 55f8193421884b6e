//! Discrete antiderivative solves: find v_h with (v_h)_x = u_h weakly.
//!
//! The weak derivative couples each cell to one neighbour (upwind fluxes)
//! or both (central flux). Upwind systems are block bidiagonal and solved
//! by an O(N) sweep; the periodic wrap-around block and the zero-mean
//! Lagrange multiplier are condensed into one small bordered system that
//! is factorized once per operator.
//!
//! The central-flux operator is antisymmetric on periodic meshes, so its
//! rank is even and its kernel always contains the constants; depending on
//! the parity of the total coefficient count it picks up further modes
//! (a per-cell sawtooth at odd degrees, chequerboards on even cell counts).
//! No bordered row can make that matrix regular, so the central path keeps
//! one SVD and every solve returns the minimum-norm least-squares solution.
//! Minimum norm means orthogonal to the kernel, which is exactly the
//! zero-mean representative the periodic problem needs, and it keeps the
//! discrete conservation identity of the averaged fluxes intact.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Dyn};

use crate::basis::{deriv_inner, end_values};
use crate::error::{OvdgError, Result};
use crate::field::DGField;
use crate::mesh::Mesh1D;

type DenseLu = nalgebra::LU<f64, Dyn, Dyn>;
type DenseSvd = nalgebra::SVD<f64, Dyn, Dyn>;

/// Numerical flux for the v-equation traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VFlux {
    /// v-hat = v from the left cell; pairs with gamma > 0.
    Minus,
    /// v-hat = v from the right cell; pairs with gamma < 0.
    Plus,
    /// v-hat = {v}; the Hamiltonian-conserving choice.
    Central,
}

/// Pivots below this fraction of the largest pivot are treated as rank
/// deficiency.
const REL_PIVOT: f64 = 1e-10;

/// Singular values below this fraction of the largest one are truncated in
/// the minimum-norm solve; they separate the structural kernel (~1e-16)
/// from the physical spectrum by many orders of magnitude.
const SV_CUTOFF: f64 = 1e-10;

/// Relative bound on |integral of u| above which periodic data is rejected
/// as incompatible with the zero-mean constraint.
const MEAN_TOL: f64 = 1e-7;

struct CellMats {
    /// Inverse of the diagonal block.
    binv: Vec<f64>,
    /// Coupling block to the upwind neighbour (all zero on the anchor cell
    /// of a bounded domain).
    coup: Vec<f64>,
}

enum Path {
    /// Block-bidiagonal upwind sweep; `q` and `border` carry the condensed
    /// periodic closure (anchor cell coefficients plus the multiplier).
    Sweep {
        cells: Vec<CellMats>,
        q: Vec<Vec<f64>>,
        border: Option<DenseLu>,
    },
    /// Central flux: one SVD of the whole antisymmetric system; solves take
    /// the minimum-norm least-squares solution, the zero-mean representative.
    Dense { svd: DenseSvd, eps: f64 },
}

pub(crate) struct AuxSolve {
    mesh: Arc<Mesh1D>,
    degree: usize,
    flux: VFlux,
    periodic: bool,
    path: Path,
}

/// Scaled basis traces of one cell: r[m] = phi_m at the right node,
/// l[m] at the left node.
struct CellTraces {
    l: Vec<f64>,
    r: Vec<f64>,
}

fn cell_traces(mesh: &Mesh1D, j: usize, lv: &[f64], rv: &[f64]) -> CellTraces {
    let sf = (2.0 / mesh.h(j)).sqrt();
    CellTraces {
        l: lv.iter().map(|&x| sf * x).collect(),
        r: rv.iter().map(|&x| sf * x).collect(),
    }
}

/// -l_j x r_prev: contribution of the left neighbour under a left-sided
/// trace.
fn lower_coup(gj: &CellTraces, gprev: &CellTraces) -> Vec<f64> {
    let w = gj.l.len();
    let mut c = vec![0.0; w * w];
    for m in 0..w {
        for n in 0..w {
            c[m * w + n] = -gj.l[m] * gprev.r[n];
        }
    }
    c
}

/// r_j x l_next: contribution of the right neighbour under a right-sided
/// trace.
fn upper_coup(gj: &CellTraces, gnext: &CellTraces) -> Vec<f64> {
    let w = gj.r.len();
    let mut c = vec![0.0; w * w];
    for m in 0..w {
        for n in 0..w {
            c[m * w + n] = gj.r[m] * gnext.l[n];
        }
    }
    c
}

fn diag_block(flux: VFlux, g: &CellTraces, h: f64, dref: &[f64]) -> Vec<f64> {
    let w = g.r.len();
    let mut d = vec![0.0; w * w];
    for m in 0..w {
        for n in 0..w {
            let boundary = match flux {
                VFlux::Minus => g.r[m] * g.r[n],
                VFlux::Plus => -g.l[m] * g.l[n],
                VFlux::Central => 0.5 * (g.r[m] * g.r[n] - g.l[m] * g.l[n]),
            };
            d[m * w + n] = boundary - (2.0 / h) * dref[m * w + n];
        }
    }
    d
}

fn check_rank(lu: &DenseLu, what: &str) -> Result<()> {
    let diag = lu.u().diagonal().map(f64::abs);
    let maxp = diag.max();
    let minp = diag.min();
    if minp <= REL_PIVOT * maxp {
        return Err(OvdgError::RankDeficient(format!(
            "{what}: relative pivot {:.2e}",
            if maxp > 0.0 { minp / maxp } else { 0.0 }
        )));
    }
    Ok(())
}

/// y += a * x for row-major a (rows x cols).
fn mat_vec_add(a: &[f64], x: &[f64], y: &mut [f64]) {
    let cols = x.len();
    for (m, ym) in y.iter_mut().enumerate() {
        let row = &a[m * cols..(m + 1) * cols];
        *ym += row.iter().zip(x).map(|(am, xm)| am * xm).sum::<f64>();
    }
}

/// c = a * b for row-major a (w x w) and b (w x cols).
fn mat_mat(a: &[f64], b: &[f64], cols: usize) -> Vec<f64> {
    let w = b.len() / cols;
    let mut c = vec![0.0; w * cols];
    for m in 0..w {
        for k in 0..w {
            let amk = a[m * w + k];
            if amk != 0.0 {
                for n in 0..cols {
                    c[m * cols + n] += amk * b[k * cols + n];
                }
            }
        }
    }
    c
}

fn invert_block(d: &[f64], w: usize, cell: usize) -> Result<Vec<f64>> {
    let m = DMatrix::from_row_slice(w, w, d);
    match m.try_inverse() {
        Some(inv) => Ok((0..w * w).map(|i| inv[(i / w, i % w)]).collect()),
        None => Err(OvdgError::SingularBlock { cell }),
    }
}

/// Sweep order and the border cell referenced by the first swept cell.
fn sweep_order(flux: VFlux, n: usize) -> Vec<usize> {
    match flux {
        VFlux::Minus => (0..n).collect(),
        VFlux::Plus => (0..n).rev().collect(),
        VFlux::Central => unreachable!("central systems are solved densely"),
    }
}

fn upwind_neighbour(flux: VFlux, j: usize, n: usize) -> usize {
    match flux {
        VFlux::Minus => (j + n - 1) % n,
        VFlux::Plus => (j + 1) % n,
        VFlux::Central => unreachable!(),
    }
}

fn build_sweep(mesh: &Arc<Mesh1D>, degree: usize, flux: VFlux, periodic: bool) -> Result<Path> {
    let n = mesh.n_cells();
    let w = degree + 1;
    let wb = w + 1;
    let dref = deriv_inner(degree);
    let (lv, rv) = end_values(degree);
    let order = sweep_order(flux, n);

    let mut cells = Vec::with_capacity(n);
    for j in 0..n {
        let g = cell_traces(mesh, j, &lv, &rv);
        let diag = diag_block(flux, &g, mesh.h(j), &dref);
        let nb = upwind_neighbour(flux, j, n);
        let coup = if !periodic && j == order[0] {
            vec![0.0; w * w]
        } else {
            let gn = cell_traces(mesh, nb, &lv, &rv);
            match flux {
                VFlux::Minus => lower_coup(&g, &gn),
                VFlux::Plus => upper_coup(&g, &gn),
                VFlux::Central => unreachable!(),
            }
        };
        let binv = invert_block(&diag, w, j)?;
        cells.push(CellMats { binv, coup });
    }

    if !periodic {
        return Ok(Path::Sweep {
            cells,
            q: Vec::new(),
            border: None,
        });
    }

    // Influence of the border unknowns s = (v on the border cell, lambda):
    // v_j = p_j + Q_j s with Q_j = -Binv_j (C_j Q_prev + [0 | g_j]) and the
    // first swept cell coupling straight to the border cell.
    let mut q = vec![Vec::new(); n];
    for (idx, &j) in order.iter().enumerate() {
        let mut rhs = vec![0.0; w * wb];
        if idx == 0 {
            for m in 0..w {
                for c in 0..w {
                    rhs[m * wb + c] = -cells[j].coup[m * w + c];
                }
            }
        } else {
            let prev = &q[order[idx - 1]];
            let cq = mat_mat(&cells[j].coup, prev, wb);
            for (r, c) in rhs.iter_mut().zip(&cq) {
                *r = -c;
            }
        }
        rhs[w] -= mesh.h(j).sqrt(); // lambda column of row m = 0
        q[j] = mat_mat(&cells[j].binv, &rhs, wb);
    }

    let bc = order[n - 1];
    let mut m = DMatrix::zeros(wb, wb);
    for i in 0..w {
        for c in 0..wb {
            m[(i, c)] = if i == c { 1.0 } else { 0.0 } - q[bc][i * wb + c];
        }
    }
    for (j, qj) in q.iter().enumerate() {
        let s = mesh.h(j).sqrt();
        for c in 0..wb {
            m[(wb - 1, c)] += s * qj[c];
        }
    }
    let lu = m.lu();
    check_rank(&lu, "periodic antiderivative closure")?;
    Ok(Path::Sweep {
        cells,
        q,
        border: Some(lu),
    })
}

/// Assembled periodic central-flux derivative matrix (antisymmetric).
fn central_matrix(mesh: &Arc<Mesh1D>, degree: usize) -> DMatrix<f64> {
    let n = mesh.n_cells();
    let w = degree + 1;
    let dim = n * w;
    let dref = deriv_inner(degree);
    let (lv, rv) = end_values(degree);
    let mut a = DMatrix::zeros(dim, dim);
    for j in 0..n {
        let g = cell_traces(mesh, j, &lv, &rv);
        let jm = (j + n - 1) % n;
        let jp = (j + 1) % n;
        let diag = diag_block(VFlux::Central, &g, mesh.h(j), &dref);
        let sub = lower_coup(&g, &cell_traces(mesh, jm, &lv, &rv));
        let sup = upper_coup(&g, &cell_traces(mesh, jp, &lv, &rv));
        for m in 0..w {
            for c in 0..w {
                a[(j * w + m, j * w + c)] += diag[m * w + c];
                a[(j * w + m, jm * w + c)] += 0.5 * sub[m * w + c];
                a[(j * w + m, jp * w + c)] += 0.5 * sup[m * w + c];
            }
        }
    }
    a
}

fn build_dense(mesh: &Arc<Mesh1D>, degree: usize) -> Result<Path> {
    let svd = central_matrix(mesh, degree).svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) {
        return Err(OvdgError::RankDeficient(
            "central antiderivative solve: zero operator".into(),
        ));
    }
    Ok(Path::Dense {
        svd,
        eps: SV_CUTOFF * smax,
    })
}

impl AuxSolve {
    pub(crate) fn new(
        mesh: &Arc<Mesh1D>,
        degree: usize,
        flux: VFlux,
        periodic: bool,
    ) -> Result<Self> {
        if flux == VFlux::Central && !periodic {
            return Err(OvdgError::InvalidConfig(
                "the central v-flux is only defined on periodic domains".into(),
            ));
        }
        let path = match flux {
            VFlux::Central => build_dense(mesh, degree)?,
            _ => build_sweep(mesh, degree, flux, periodic)?,
        };
        Ok(AuxSolve {
            mesh: Arc::clone(mesh),
            degree,
            flux,
            periodic,
            path,
        })
    }

    /// What a plain LU of the central system reports: the operator alone,
    /// with no rule for picking a representative, is always rank deficient.
    #[cfg(test)]
    pub(crate) fn central_rank_check(mesh: &Arc<Mesh1D>, degree: usize) -> Result<()> {
        let lu = central_matrix(mesh, degree).lu();
        check_rank(&lu, "central antiderivative solve without the zero-mean fix")
    }

    pub(crate) fn solve(&self, u: &DGField) -> Result<DGField> {
        assert_eq!(u.degree(), self.degree);
        assert_eq!(u.n_cells(), self.mesh.n_cells());
        if self.periodic {
            let integral = u.integral();
            if integral.abs() > MEAN_TOL * u.norm_l2().max(1.0) {
                return Err(OvdgError::IncompatibleMean {
                    mean: integral / self.mesh.length(),
                });
            }
        }
        match &self.path {
            Path::Sweep { cells, q, border } => self.solve_sweep(u, cells, q, border.as_ref()),
            Path::Dense { svd, eps } => {
                let b = DVector::from_column_slice(u.coeffs());
                let x = svd
                    .solve(&b, *eps)
                    .map_err(|e| OvdgError::RankDeficient(e.into()))?;
                let mut v = DGField::zeros(Arc::clone(&self.mesh), self.degree);
                v.coeffs_mut().copy_from_slice(x.as_slice());
                // The truncated kernel directions leave the mean only
                // roundoff-clean; pin it exactly.
                let m = v.mean();
                v.add_constant(-m);
                Ok(v)
            }
        }
    }

    fn solve_sweep(
        &self,
        u: &DGField,
        cells: &[CellMats],
        q: &[Vec<f64>],
        border: Option<&DenseLu>,
    ) -> Result<DGField> {
        let n = self.mesh.n_cells();
        let w = self.degree + 1;
        let wb = w + 1;
        let order = sweep_order(self.flux, n);
        let mut v = DGField::zeros(Arc::clone(&self.mesh), self.degree);
        let mut rloc = vec![0.0; w];
        // Particular sweep: p_j = Binv_j (r_j - C_j p_prev), with the border
        // contribution deferred to Q.
        for (idx, &j) in order.iter().enumerate() {
            rloc.copy_from_slice(u.cell(j));
            if idx > 0 {
                let prev = order[idx - 1];
                let mut cp = vec![0.0; w];
                mat_vec_add(&cells[j].coup, v.cell(prev), &mut cp);
                for (r, c) in rloc.iter_mut().zip(&cp) {
                    *r -= c;
                }
            }
            let mut pj = vec![0.0; w];
            mat_vec_add(&cells[j].binv, &rloc, &mut pj);
            v.cell_mut(j).copy_from_slice(&pj);
        }
        let Some(border) = border else {
            return Ok(v);
        };
        let bc = order[n - 1];
        let mut b = DVector::zeros(wb);
        for i in 0..w {
            b[i] = v.cell(bc)[i];
        }
        let mut mean_p = 0.0;
        for j in 0..n {
            mean_p += self.mesh.h(j).sqrt() * v.cell(j)[0];
        }
        b[w] = -mean_p;
        let s = border
            .solve(&b)
            .ok_or_else(|| OvdgError::RankDeficient("periodic antiderivative closure".into()))?;
        for j in 0..n {
            let cell = v.cell_mut(j);
            for i in 0..w {
                let mut acc = cell[i];
                for c in 0..wb {
                    acc += q[j][i * wb + c] * s[c];
                }
                cell[i] = acc;
            }
        }
        Ok(v)
    }

    /// Unconstrained forward application of the discrete derivative, for
    /// residual checks: returns A v.
    #[cfg(test)]
    pub(crate) fn apply(&self, v: &DGField) -> DGField {
        let n = self.mesh.n_cells();
        let w = self.degree + 1;
        let dref = deriv_inner(self.degree);
        let (lv, rv) = end_values(self.degree);
        let mut out = DGField::zeros(Arc::clone(&self.mesh), self.degree);
        for j in 0..n {
            let g = cell_traces(&self.mesh, j, &lv, &rv);
            let diag = diag_block(self.flux, &g, self.mesh.h(j), &dref);
            let mut acc = vec![0.0; w];
            mat_vec_add(&diag, v.cell(j), &mut acc);
            let jm = (j + n - 1) % n;
            let jp = (j + 1) % n;
            let at_left_end = !self.periodic && j == 0;
            let at_right_end = !self.periodic && j == n - 1;
            match self.flux {
                VFlux::Minus => {
                    if !at_left_end {
                        let c = lower_coup(&g, &cell_traces(&self.mesh, jm, &lv, &rv));
                        mat_vec_add(&c, v.cell(jm), &mut acc);
                    }
                }
                VFlux::Plus => {
                    if !at_right_end {
                        let c = upper_coup(&g, &cell_traces(&self.mesh, jp, &lv, &rv));
                        mat_vec_add(&c, v.cell(jp), &mut acc);
                    }
                }
                VFlux::Central => {
                    let sub = lower_coup(&g, &cell_traces(&self.mesh, jm, &lv, &rv));
                    let sup = upper_coup(&g, &cell_traces(&self.mesh, jp, &lv, &rv));
                    let mut half = vec![0.0; w];
                    mat_vec_add(&sub, v.cell(jm), &mut half);
                    mat_vec_add(&sup, v.cell(jp), &mut half);
                    for (a, h) in acc.iter_mut().zip(&half) {
                        *a += 0.5 * h;
                    }
                }
            }
            out.cell_mut(j).copy_from_slice(&acc);
        }
        out
    }
}
