//! Semi-discrete schemes for (u_t + u u_x)_x + gamma u = 0, written as the
//! split system u_t + (u^2/2)_x + gamma v = g, v_x = u.
//!
//! Three right-hand sides are provided:
//!
//! * `EnergyDg`: Lax-Friedrichs flux for u, upwind weak solve for v; the
//!   discrete energy integral of u^2 is non-increasing.
//! * `EnergyIntegrationDg`: same u-flux, but v is recovered as the exact
//!   continuous cellwise antiderivative (one degree higher), which lifts
//!   the v-accuracy by one order.
//! * `HamiltonianDg`: central fluxes applied to the projected w = u^2/2 and
//!   a central v-solve; conserves the discrete Hamiltonian instead of
//!   dissipating energy.

mod aux;

use std::sync::Arc;

use aux::{AuxSolve, VFlux};

use crate::basis::{deriv_inner, end_values, BasisTable};
use crate::error::{OvdgError, Result};
use crate::field::{antiderivative_field, quad_points, traces, DGField, Side};
use crate::mesh::Mesh1D;
use crate::quad::gauss_rule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OvScheme {
    EnergyDg,
    EnergyIntegrationDg,
    HamiltonianDg,
}

/// Rule that pins down the additive constant in v.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// Periodic: v has zero mean.
    ZeroMean,
    /// Bounded domain, gamma > 0: v(a) = 0.
    DirichletLeft,
    /// Bounded domain, gamma < 0: v(b) = 0.
    DirichletRight,
}

pub type SourceFn = fn(f64, f64) -> f64;

#[derive(Debug, Clone, Copy)]
pub struct OvConfig {
    pub scheme: OvScheme,
    pub gamma: f64,
    pub periodic: bool,
    pub constraint: Constraint,
    /// Forcing g(x, t) added to the u-equation.
    pub source: Option<SourceFn>,
}

impl OvConfig {
    pub fn periodic(scheme: OvScheme, gamma: f64) -> Self {
        OvConfig {
            scheme,
            gamma,
            periodic: true,
            constraint: Constraint::ZeroMean,
            source: None,
        }
    }

    pub fn bounded(scheme: OvScheme, gamma: f64, constraint: Constraint) -> Self {
        OvConfig {
            scheme,
            gamma,
            periodic: false,
            constraint,
            source: None,
        }
    }

    pub fn with_source(mut self, g: SourceFn) -> Self {
        self.source = Some(g);
        self
    }
}

/// Lax-Friedrichs flux for f(u) = u^2/2 with dissipation speed `alpha`.
pub fn lax_friedrichs(u_minus: f64, u_plus: f64, alpha: f64) -> f64 {
    0.25 * (u_minus * u_minus + u_plus * u_plus) - 0.5 * alpha * (u_plus - u_minus)
}

/// Discrete energy integral of u^2.
pub fn energy(u: &DGField) -> f64 {
    let s = u.norm_l2();
    s * s
}

/// Discrete Hamiltonian integral of -u^3/6 + v^2/2.
pub fn hamiltonian(u: &DGField, v: &DGField) -> Result<f64> {
    assert_eq!(u.n_cells(), v.n_cells());
    let rule = gauss_rule(quad_points(u.degree().max(v.degree())))?;
    let mesh = u.mesh();
    let mut total = 0.0;
    for j in 0..u.n_cells() {
        let half_h = 0.5 * mesh.h(j);
        for (&xi, &wq) in rule.nodes.iter().zip(&rule.weights) {
            let uv = u.eval_ref(j, xi);
            let vv = v.eval_ref(j, xi);
            total += half_h * wq * (-uv * uv * uv / 6.0 + 0.5 * vv * vv);
        }
    }
    Ok(total)
}

pub struct OvOperator {
    mesh: Arc<Mesh1D>,
    degree: usize,
    config: OvConfig,
    table: BasisTable,
    aux: Option<AuxSolve>,
}

impl OvOperator {
    pub fn new(mesh: Arc<Mesh1D>, degree: usize, config: OvConfig) -> Result<Self> {
        if config.periodic && config.constraint != Constraint::ZeroMean {
            return Err(OvdgError::InvalidConfig(
                "periodic domains determine v through the zero-mean constraint".into(),
            ));
        }
        if !config.periodic {
            if config.scheme == OvScheme::HamiltonianDg {
                return Err(OvdgError::InvalidConfig(
                    "the Hamiltonian-conserving scheme is defined on periodic domains only".into(),
                ));
            }
            let wanted = if config.gamma >= 0.0 {
                Constraint::DirichletLeft
            } else {
                Constraint::DirichletRight
            };
            if config.constraint == Constraint::ZeroMean {
                return Err(OvdgError::InvalidConfig(
                    "bounded domains need a Dirichlet anchor for v".into(),
                ));
            }
            if config.gamma != 0.0 && config.constraint != wanted {
                return Err(OvdgError::InvalidConfig(format!(
                    "gamma = {} transports v information {}; anchor v on the {} boundary",
                    config.gamma,
                    if config.gamma > 0.0 {
                        "rightward"
                    } else {
                        "leftward"
                    },
                    if config.gamma > 0.0 { "left" } else { "right" },
                )));
            }
        }
        let table = BasisTable::new(degree, quad_points(degree))?;
        let aux = if config.gamma == 0.0 {
            None
        } else {
            match config.scheme {
                OvScheme::EnergyDg => {
                    let flux = if config.gamma > 0.0 {
                        VFlux::Minus
                    } else {
                        VFlux::Plus
                    };
                    Some(AuxSolve::new(&mesh, degree, flux, config.periodic)?)
                }
                OvScheme::HamiltonianDg => {
                    Some(AuxSolve::new(&mesh, degree, VFlux::Central, true)?)
                }
                OvScheme::EnergyIntegrationDg => None,
            }
        };
        Ok(OvOperator {
            mesh,
            degree,
            config,
            table,
            aux,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn config(&self) -> &OvConfig {
        &self.config
    }

    /// Antiderivative of the given data under the configured scheme and
    /// constraint (weak solve or exact integration).
    pub fn solve_v(&self, u: &DGField) -> Result<DGField> {
        if self.config.gamma == 0.0 {
            return Err(OvdgError::InvalidConfig(
                "the auxiliary variable is only defined for gamma != 0".into(),
            ));
        }
        match self.config.scheme {
            OvScheme::EnergyDg | OvScheme::HamiltonianDg => {
                self.aux.as_ref().expect("aux solver present").solve(u)
            }
            OvScheme::EnergyIntegrationDg => self.recover_v_integration(u),
        }
    }

    /// Exact continuous antiderivative of degree k + 1, anchored per the
    /// constraint.
    fn recover_v_integration(&self, u: &DGField) -> Result<DGField> {
        if self.config.periodic {
            let integral = u.integral();
            if integral.abs() > 1e-7 * u.norm_l2().max(1.0) {
                return Err(OvdgError::IncompatibleMean {
                    mean: integral / self.mesh.length(),
                });
            }
            let mut v = antiderivative_field(u, Side::Left, 0.0);
            let m = v.mean();
            v.add_constant(-m);
            Ok(v)
        } else {
            let side = match self.config.constraint {
                Constraint::DirichletLeft => Side::Left,
                Constraint::DirichletRight => Side::Right,
                Constraint::ZeroMean => unreachable!("rejected at construction"),
            };
            Ok(antiderivative_field(u, side, 0.0))
        }
    }

    pub fn rhs(&self, u: &DGField, t: f64) -> Result<DGField> {
        match self.config.scheme {
            OvScheme::EnergyDg | OvScheme::EnergyIntegrationDg => self.rhs_energy(u, t),
            OvScheme::HamiltonianDg => self.rhs_hamiltonian(u, t),
        }
    }

    /// Values of u at the quadrature nodes of every cell.
    fn quad_values(&self, u: &DGField) -> Vec<f64> {
        let nq = self.table.n_points();
        let n = u.n_cells();
        let mut uq = vec![0.0; n * nq];
        for j in 0..n {
            for q in 0..nq {
                uq[j * nq + q] = u.eval_ref_with(j, self.table.row(q));
            }
        }
        uq
    }

    fn rhs_energy(&self, u: &DGField, t: f64) -> Result<DGField> {
        let n = u.n_cells();
        let w = self.degree + 1;
        let nq = self.table.n_points();
        let uq = self.quad_values(u);
        let tr = traces(u, self.config.periodic);
        let mut alpha = uq.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        for i in 0..tr.len() {
            alpha = alpha.max(tr.minus[i].abs()).max(tr.plus[i].abs());
        }
        let fhat: Vec<f64> = (0..=n)
            .map(|i| lax_friedrichs(tr.minus[i], tr.plus[i], alpha))
            .collect();
        let v = if self.config.gamma != 0.0 {
            Some(self.solve_v(u)?)
        } else {
            None
        };
        let (lv, rv) = end_values(self.degree);
        let weights = &self.table.rule.weights;
        let mut out = DGField::zeros(Arc::clone(&self.mesh), self.degree);
        for j in 0..n {
            let sf = (2.0 / self.mesh.h(j)).sqrt();
            let cell = out.cell_mut(j);
            for (q, &wq) in weights.iter().enumerate() {
                let f = 0.5 * uq[j * nq + q] * uq[j * nq + q];
                let drow = self.table.deriv_row(q);
                for m in 0..w {
                    cell[m] += wq * f * drow[m];
                }
            }
            for m in 0..w {
                cell[m] = sf * (cell[m] - fhat[j + 1] * rv[m] + fhat[j] * lv[m]);
            }
            if let Some(v) = &v {
                let vc = v.cell(j);
                for m in 0..w {
                    cell[m] -= self.config.gamma * vc[m];
                }
            }
        }
        if let Some(g) = self.config.source {
            self.add_source(&mut out, g, t);
        }
        Ok(out)
    }

    fn rhs_hamiltonian(&self, u: &DGField, t: f64) -> Result<DGField> {
        let n = u.n_cells();
        let w = self.degree + 1;
        let nq = self.table.n_points();
        let uq = self.quad_values(u);
        // w_h = projection of u^2/2.
        let mut wf = DGField::zeros(Arc::clone(&self.mesh), self.degree);
        for j in 0..n {
            let c = (0.5 * self.mesh.h(j)).sqrt();
            let cell = wf.cell_mut(j);
            for (q, &wq) in self.table.rule.weights.iter().enumerate() {
                let f = 0.5 * uq[j * nq + q] * uq[j * nq + q];
                let row = self.table.row(q);
                for m in 0..w {
                    cell[m] += c * wq * f * row[m];
                }
            }
        }
        let v = if self.config.gamma != 0.0 {
            Some(self.solve_v(u)?)
        } else {
            None
        };
        let wtr = traces(&wf, true);
        let dref = deriv_inner(self.degree);
        let (lv, rv) = end_values(self.degree);
        let mut out = DGField::zeros(Arc::clone(&self.mesh), self.degree);
        for j in 0..n {
            let h = self.mesh.h(j);
            let sf = (2.0 / h).sqrt();
            let wc = wf.cell(j);
            let cell = out.cell_mut(j);
            for m in 0..w {
                let mut acc = 0.0;
                for (nn, &wn) in wc.iter().enumerate() {
                    acc += dref[m * w + nn] * wn;
                }
                acc *= 2.0 / h;
                acc -= sf * (wtr.average(j + 1) * rv[m] - wtr.average(j) * lv[m]);
                cell[m] = acc;
            }
            if let Some(v) = &v {
                let vc = v.cell(j);
                for m in 0..w {
                    cell[m] -= self.config.gamma * vc[m];
                }
            }
        }
        if let Some(g) = self.config.source {
            self.add_source(&mut out, g, t);
        }
        Ok(out)
    }

    fn add_source(&self, out: &mut DGField, g: SourceFn, t: f64) {
        let w = self.degree + 1;
        for j in 0..out.n_cells() {
            let c = (0.5 * self.mesh.h(j)).sqrt();
            let cell = out.cell_mut(j);
            for (q, (&xi, &wq)) in self
                .table
                .rule
                .nodes
                .iter()
                .zip(&self.table.rule.weights)
                .enumerate()
            {
                let gv = g(self.mesh.to_physical(j, xi), t);
                let row = self.table.row(q);
                for m in 0..w {
                    cell[m] += c * wq * gv * row[m];
                }
            }
        }
    }
}
