//! Schemes for the hodograph-transformed coupled-dispersionless system.
//!
//! In the transformed plane the equation becomes q_s = omega, omega_s =
//! -gamma q u - c (1 - q) with the constraint u_y = omega. Only (q, omega)
//! are stepped in time; u is recovered from omega whenever the right-hand
//! side needs it, either by an upwind per-cell solve at the same degree or
//! by exact integration one degree higher. Back in physical coordinates
//! x(y) = x_ref + integral of q, which parametrizes loop and cuspon
//! profiles that are multivalued in x.

use std::sync::Arc;

use crate::basis::{self, deriv_inner, end_values, BasisTable};
use crate::error::{OvdgError, Result};
use crate::field::{quad_points, DGField, Side};
use crate::mesh::Mesh1D;
use crate::time::RkState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdScheme {
    /// u recovered at degree k by the upwind weak solve (u-hat = u from the
    /// right).
    CdDg,
    /// u recovered as the continuous degree k + 1 primitive of omega.
    CdIntegrationDg,
}

pub struct CdConfig {
    pub scheme: CdScheme,
    pub gamma: f64,
    /// Coupling of the two-component system; c = 0 is the plain equation.
    pub c: f64,
    /// Supplies u at the right domain end as a function of s; solitons come
    /// in through this boundary.
    pub u_boundary: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CdConfig {
    pub fn new(
        scheme: CdScheme,
        gamma: f64,
        c: f64,
        u_boundary: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CdConfig {
            scheme,
            gamma,
            c,
            u_boundary: Box::new(u_boundary),
        }
    }

    /// For data that has decayed to the zero background at the right end.
    pub fn with_zero_boundary(scheme: CdScheme, gamma: f64, c: f64) -> Self {
        CdConfig::new(scheme, gamma, c, |_| 0.0)
    }
}

/// The time-stepped part of the state; u is derived, not evolved.
#[derive(Debug, Clone)]
pub struct CdPair {
    pub q: DGField,
    pub omega: DGField,
}

impl RkState for CdPair {
    fn scale(&mut self, a: f64) {
        self.q.scale(a);
        self.omega.scale(a);
    }

    fn scaled_add(&mut self, a: f64, other: &Self) {
        self.q.scaled_add(a, &other.q);
        self.omega.scaled_add(a, &other.omega);
    }

    fn is_finite(&self) -> bool {
        self.q.is_finite() && self.omega.is_finite()
    }
}

/// A consistent snapshot: u recovered from omega at some s.
#[derive(Debug, Clone)]
pub struct CdState {
    pub q: DGField,
    pub omega: DGField,
    pub u: DGField,
}

pub struct CdOperator {
    mesh: Arc<Mesh1D>,
    degree: usize,
    config: CdConfig,
    /// Test-function rows at the shared quadrature nodes.
    table: BasisTable,
    /// Rows for evaluating u, one degree higher for the integration scheme.
    table_u: BasisTable,
    /// Per-cell inverse blocks and scaled right traces of the upwind
    /// recovery; empty for the integration scheme.
    blocks: Vec<RecoveryBlock>,
}

struct RecoveryBlock {
    minv: Vec<f64>,
    r: Vec<f64>,
    l: Vec<f64>,
}

fn invert_block(d: &[f64], w: usize, cell: usize) -> Result<Vec<f64>> {
    let m = nalgebra::DMatrix::from_row_slice(w, w, d);
    match m.try_inverse() {
        Some(inv) => Ok((0..w * w).map(|i| inv[(i / w, i % w)]).collect()),
        None => Err(OvdgError::SingularBlock { cell }),
    }
}

impl CdOperator {
    pub fn new(mesh: Arc<Mesh1D>, degree: usize, config: CdConfig) -> Result<Self> {
        let nq = quad_points(degree);
        let table = BasisTable::new(degree, nq)?;
        let u_degree = match config.scheme {
            CdScheme::CdDg => degree,
            CdScheme::CdIntegrationDg => degree + 1,
        };
        let table_u = BasisTable::new(u_degree, nq)?;
        let blocks = match config.scheme {
            CdScheme::CdDg => build_recovery_blocks(&mesh, degree)?,
            CdScheme::CdIntegrationDg => Vec::new(),
        };
        Ok(CdOperator {
            mesh,
            degree,
            config,
            table,
            table_u,
            blocks,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn config(&self) -> &CdConfig {
        &self.config
    }

    /// Recovers u from omega at time s through the scheme's constraint.
    pub fn recover_u(&self, omega: &DGField, s: f64) -> Result<DGField> {
        let ub = (self.config.u_boundary)(s);
        match self.config.scheme {
            CdScheme::CdDg => self.recover_u_dg(omega, ub),
            CdScheme::CdIntegrationDg => {
                Ok(crate::field::antiderivative_field(omega, Side::Right, ub))
            }
        }
    }

    /// Right-to-left sweep: with the flux taken from the right, each cell
    /// sees only its own unknowns plus the already-solved neighbour trace.
    fn recover_u_dg(&self, omega: &DGField, ub: f64) -> Result<DGField> {
        let n = self.mesh.n_cells();
        let w = self.degree + 1;
        let mut u = DGField::zeros(Arc::clone(&self.mesh), self.degree);
        let mut inflow = ub;
        let mut rhs = vec![0.0; w];
        for j in (0..n).rev() {
            let blk = &self.blocks[j];
            for (m, r) in rhs.iter_mut().enumerate() {
                *r = omega.cell(j)[m] - inflow * blk.r[m];
            }
            let cell = u.cell_mut(j);
            for m in 0..w {
                cell[m] = blk.minv[m * w..(m + 1) * w]
                    .iter()
                    .zip(&rhs)
                    .map(|(a, b)| a * b)
                    .sum();
            }
            inflow = cell.iter().zip(&blk.l).map(|(c, l)| c * l).sum();
        }
        Ok(u)
    }

    pub fn complete(&self, pair: &CdPair, s: f64) -> Result<CdState> {
        Ok(CdState {
            q: pair.q.clone(),
            omega: pair.omega.clone(),
            u: self.recover_u(&pair.omega, s)?,
        })
    }

    /// Semi-discrete right-hand side: dq/ds = omega moment for moment,
    /// domega/ds = projection of -gamma q u - c (1 - q), with u recovered
    /// from omega at this s.
    pub fn rhs(&self, pair: &CdPair, s: f64) -> Result<CdPair> {
        let u = self.recover_u(&pair.omega, s)?;
        let n = self.mesh.n_cells();
        let w = self.degree + 1;
        let nq = self.table.n_points();
        let gamma = self.config.gamma;
        let c = self.config.c;
        let mut domega = DGField::zeros(Arc::clone(&self.mesh), self.degree);
        for j in 0..n {
            let half_h = 0.5 * self.mesh.h(j);
            let scale = half_h.sqrt();
            let cell = domega.cell_mut(j);
            for (qp, &wq) in self.table.rule.weights.iter().enumerate() {
                let qv = pair.q.eval_ref_with(j, self.table.row(qp));
                let uv = u.eval_ref_with(j, self.table_u.row(qp));
                let f = -gamma * qv * uv - c * (1.0 - qv);
                let row = self.table.row(qp);
                for m in 0..w {
                    cell[m] += scale * wq * f * row[m];
                }
            }
            let _ = nq;
        }
        Ok(CdPair {
            q: pair.omega.clone(),
            omega: domega,
        })
    }
}

fn build_recovery_blocks(mesh: &Arc<Mesh1D>, degree: usize) -> Result<Vec<RecoveryBlock>> {
    let w = degree + 1;
    let dref = deriv_inner(degree);
    let (lv, rv) = end_values(degree);
    let mut blocks = Vec::with_capacity(mesh.n_cells());
    for j in 0..mesh.n_cells() {
        let h = mesh.h(j);
        let sf = (2.0 / h).sqrt();
        let l: Vec<f64> = lv.iter().map(|&x| sf * x).collect();
        let r: Vec<f64> = rv.iter().map(|&x| sf * x).collect();
        let mut m = vec![0.0; w * w];
        for a in 0..w {
            for b in 0..w {
                m[a * w + b] = -l[a] * l[b] - (2.0 / h) * dref[a * w + b];
            }
        }
        let minv = invert_block(&m, w, j)?;
        blocks.push(RecoveryBlock { minv, r, l });
    }
    Ok(blocks)
}

/// Physical-plane profile: x(y) = x_ref + cumulative integral of q, paired
/// with u at the same parameter values. The curve is parametric, so the
/// folded x of a loop soliton is representable. Samples run left to right,
/// `samples_per_cell` per cell plus the final right edge.
pub fn hodograph_profile(
    state: &CdState,
    x_ref: f64,
    samples_per_cell: usize,
) -> Vec<(f64, f64)> {
    assert!(samples_per_cell >= 1);
    let mesh = state.q.mesh().clone();
    let n = mesh.n_cells();
    let wq = state.q.degree() + 1;
    // Reference points reused in every cell; psi rows for the partial
    // integral (one degree above q) and for u.
    let xis: Vec<f64> = (0..samples_per_cell)
        .map(|i| -1.0 + 2.0 * i as f64 / samples_per_cell as f64)
        .collect();
    let mut psi_int = vec![vec![0.0; wq + 1]; xis.len()];
    let mut psi_u = vec![vec![0.0; state.u.degree() + 1]; xis.len()];
    for (i, &xi) in xis.iter().enumerate() {
        basis::eval_orthonormal(wq, xi, &mut psi_int[i]);
        basis::eval_orthonormal(state.u.degree(), xi, &mut psi_u[i]);
    }
    let mut out = Vec::with_capacity(n * samples_per_cell + 1);
    let mut x_edge = x_ref;
    let mut scaled = vec![0.0; wq];
    for j in 0..n {
        let h = mesh.h(j);
        let sf = (2.0 / h).sqrt();
        for (m, &c) in state.q.cell(j).iter().enumerate() {
            scaled[m] = c * sf;
        }
        let anti = basis::antiderivative(&scaled);
        for (i, row) in psi_int.iter().enumerate() {
            let part: f64 = anti.iter().zip(row).map(|(a, p)| a * p).sum();
            let x = x_edge + 0.5 * h * part;
            out.push((x, state.u.eval_ref_with(j, &psi_u[i])));
        }
        x_edge += state.q.cell(j)[0] * h.sqrt();
    }
    out.push((x_edge, state.u.trace(n - 1, Side::Right)));
    out
}
