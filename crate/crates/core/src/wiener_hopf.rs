//! Wiener-Hopf factors on sinh-deformed grids.
//!
//! phi^+_q(xi) = exp[ (1/2 pi i) int_{L^-} xi ln(1 + psi(eta)/q) / (eta (xi - eta)) d eta ]
//! with L^- below xi, and phi^-_q the mirror image with L^+ above xi.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::contours::{ContourGrid, ContourKind, SinhContour};
use crate::error::{param, Error, Result};
use crate::levy_models::LevyModel;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Factor values for one q on a pair of grids.
#[derive(Clone, Debug, PartialEq)]
pub struct WhfTable {
    pub q: C64,
    pub xi_plus_nodes: Vec<C64>,
    pub xi_minus_nodes: Vec<C64>,
    /// phi^+ on the upper grid.
    pub phi_plus: Vec<C64>,
    /// phi^- on the lower grid.
    pub phi_minus: Vec<C64>,
    /// phi^+ continued onto the lower grid.
    pub phi_plus_cont: Vec<C64>,
    /// phi^- continued onto the upper grid.
    pub phi_minus_cont: Vec<C64>,
    pub atom_plus: f64,
    pub atom_minus: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Plus,
    Minus,
}

/// Inner grids with psi cached.
#[derive(Clone, Debug)]
pub struct WhfSolver {
    model: LevyModel,
    minus: ContourGrid,
    plus: ContourGrid,
    psi_minus: Vec<C64>,
    psi_plus: Vec<C64>,
    /// zeta * der / eta / (2 pi i), sign of the minus-side formula folded in.
    w_minus: Vec<C64>,
    w_plus: Vec<C64>,
}

/// True for finite-variation models with nonzero drift (nu < 1).
fn finite_variation(model: &LevyModel) -> bool {
    model.order() < 1.0 && model.drift() != 0.0
}

impl WhfSolver {
    /// `inner_minus` lies below every point where phi^+ is wanted and
    /// `inner_plus` above every point where phi^- is wanted.
    pub fn new(model: &LevyModel, inner_minus: &SinhContour, inner_plus: &SinhContour) -> Result<Self> {
        if inner_minus.kind != ContourKind::FourierDown {
            return Err(param("inner_minus", "phi^+ needs a downward contour"));
        }
        if inner_plus.kind != ContourKind::FourierUp {
            return Err(param("inner_plus", "phi^- needs an upward contour"));
        }
        let minus = inner_minus.grid();
        let plus = inner_plus.grid();
        let mut psi_minus = Vec::with_capacity(minus.len());
        for &e in &minus.points {
            psi_minus.push(model.psi_checked(e)?);
        }
        let mut psi_plus = Vec::with_capacity(plus.len());
        for &e in &plus.points {
            psi_plus.push(model.psi_checked(e)?);
        }
        let c = 1.0 / (2.0 * PI * C64::i());
        let w_minus = minus
            .points
            .iter()
            .zip(&minus.der)
            .map(|(e, d)| c * minus.zeta * d / e)
            .collect();
        let w_plus = plus
            .points
            .iter()
            .zip(&plus.der)
            .map(|(e, d)| -c * plus.zeta * d / e)
            .collect();
        Ok(Self {
            model: *model,
            minus,
            plus,
            psi_minus,
            psi_plus,
            w_minus,
            w_plus,
        })
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn inner_minus(&self) -> &ContourGrid {
        &self.minus
    }

    pub fn inner_plus(&self) -> &ContourGrid {
        &self.plus
    }

    fn fv_side(&self, side: Side) -> bool {
        finite_variation(&self.model)
            && match side {
                Side::Plus => self.model.drift() > 0.0,
                Side::Minus => self.model.drift() < 0.0,
            }
    }

    /// Weighted logarithms l_m so that the exponent is xi * sum_m l_m / (xi - eta_m).
    fn log_weights(&self, q: C64, side: Side) -> Result<Vec<C64>> {
        let (grid, psi, w) = match side {
            Side::Plus => (&self.minus, &self.psi_minus, &self.w_minus),
            Side::Minus => (&self.plus, &self.psi_plus, &self.w_plus),
        };
        let fv = self.fv_side(side);
        let mu = self.model.drift();
        let mut out = Vec::with_capacity(grid.len());
        for m in 0..grid.len() {
            let arg = if fv {
                let e = grid.points[m];
                let p0 = psi[m] + C64::i() * mu * e;
                1.0 + p0 / (q - C64::i() * mu * e)
            } else {
                1.0 + psi[m] / q
            };
            if arg.re <= 0.0 && arg.im.abs() < 1e-14 * (1.0 + arg.norm()) {
                return Err(Error::Admissibility {
                    q,
                    xi: grid.points[m],
                    reason: format!("1 + psi/q = {arg} on the branch cut"),
                });
            }
            out.push(arg.ln() * w[m]);
        }
        Ok(out)
    }

    fn prefactor(&self, q: C64, xi: C64, side: Side) -> C64 {
        if self.fv_side(side) {
            q / (q - C64::i() * self.model.drift() * xi)
        } else {
            C64::new(1.0, 0.0)
        }
    }

    fn eval(&self, q: C64, xi: &[C64], side: Side) -> Result<Vec<C64>> {
        let l = self.log_weights(q, side)?;
        let nodes = match side {
            Side::Plus => &self.minus.points,
            Side::Minus => &self.plus.points,
        };
        Ok(xi
            .iter()
            .map(|&x| {
                let s: C64 = l.iter().zip(nodes).map(|(lm, e)| lm / (x - e)).sum();
                self.prefactor(q, x, side) * (x * s).exp()
            })
            .collect())
    }

    /// phi^+_q at points above the lower inner contour.
    pub fn phi_plus(&self, q: C64, xi: &[C64]) -> Result<Vec<C64>> {
        self.eval(q, xi, Side::Plus)
    }

    /// phi^-_q at points below the upper inner contour.
    pub fn phi_minus(&self, q: C64, xi: &[C64]) -> Result<Vec<C64>> {
        self.eval(q, xi, Side::Minus)
    }

    /// Atom masses of the supremum (plus) and infimum (minus) at 0.
    pub fn atoms(&self, q: f64) -> Result<(f64, f64)> {
        if !finite_variation(&self.model) {
            return Ok((0.0, 0.0));
        }
        let qc = C64::new(q, 0.0);
        if self.model.drift() > 0.0 {
            // a^- = exp[-(1/2 pi i) int_{L+} ln(...)/eta]; w_plus already carries the minus sign
            let l = self.log_weights_fv_plain(qc, Side::Minus)?;
            Ok((0.0, l.iter().sum::<C64>().exp().re))
        } else {
            let l = self.log_weights_fv_plain(qc, Side::Plus)?;
            Ok((l.iter().sum::<C64>().exp().re, 0.0))
        }
    }

    fn log_weights_fv_plain(&self, q: C64, side: Side) -> Result<Vec<C64>> {
        let (grid, psi, w) = match side {
            Side::Plus => (&self.minus, &self.psi_minus, &self.w_minus),
            Side::Minus => (&self.plus, &self.psi_plus, &self.w_plus),
        };
        let mu = self.model.drift();
        let mut out = Vec::with_capacity(grid.len());
        for m in 0..grid.len() {
            let e = grid.points[m];
            let p0 = psi[m] + C64::i() * mu * e;
            let arg = 1.0 + p0 / (q - C64::i() * mu * e);
            if arg.re <= 0.0 && arg.im.abs() < 1e-14 {
                return Err(Error::Admissibility {
                    q,
                    xi: e,
                    reason: "atom integrand on the branch cut".into(),
                });
            }
            out.push(arg.ln() * w[m]);
        }
        Ok(out)
    }

    /// Full table on an upper grid `xp` and a lower grid `xm`.
    pub fn table(&self, q: C64, xp: &[C64], xm: &[C64]) -> Result<WhfTable> {
        let phi_plus = self.phi_plus(q, xp)?;
        let phi_minus = self.phi_minus(q, xm)?;
        let psi_p: Vec<C64> = xp.iter().map(|&x| self.model.psi(x)).collect();
        let psi_m: Vec<C64> = xm.iter().map(|&x| self.model.psi(x)).collect();
        let (phi_plus_cont, phi_minus_cont) = continuation_tables(q, &psi_p, &psi_m, &phi_plus, &phi_minus, xp, xm)?;
        let (atom_plus, atom_minus) = if q.im == 0.0 && q.re > 0.0 {
            self.atoms(q.re)?
        } else {
            (0.0, 0.0)
        };
        Ok(WhfTable {
            q,
            xi_plus_nodes: xp.to_vec(),
            xi_minus_nodes: xm.to_vec(),
            phi_plus,
            phi_minus,
            phi_plus_cont,
            phi_minus_cont,
            atom_plus,
            atom_minus,
        })
    }
}

/// phi^+ on the lower grid and phi^- on the upper grid from the factorization identity.
pub fn continuation_tables(
    q: C64,
    psi_on_plus: &[C64],
    psi_on_minus: &[C64],
    phi_plus: &[C64],
    phi_minus: &[C64],
    xp: &[C64],
    xm: &[C64],
) -> Result<(Vec<C64>, Vec<C64>)> {
    let cont = |psi: &[C64], phi: &[C64], nodes: &[C64]| -> Result<Vec<C64>> {
        psi.iter()
            .zip(phi)
            .zip(nodes)
            .map(|((p, f), &x)| {
                let z = (1.0 + p / q) * f;
                if z.norm() == 0.0 {
                    Err(Error::Singular { xi: x })
                } else {
                    Ok(1.0 / z)
                }
            })
            .collect()
    };
    Ok((cont(psi_on_minus, phi_minus, xm)?, cont(psi_on_plus, phi_plus, xp)?))
}

/// Dense Cauchy kernel 1/(x_k - e_m), row-major in k.
#[derive(Clone, Debug)]
pub struct CauchyTable {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl CauchyTable {
    pub fn new(x: &[C64], e: &[C64]) -> Result<Self> {
        let mut data = Vec::with_capacity(x.len() * e.len());
        for &xk in x {
            for &em in e {
                let d = xk - em;
                if d.norm() == 0.0 {
                    return Err(Error::Singular { xi: xk });
                }
                data.push(1.0 / d);
            }
        }
        Ok(Self {
            rows: x.len(),
            cols: e.len(),
            data,
        })
    }

    #[inline]
    pub fn row(&self, k: usize) -> &[C64] {
        &self.data[k * self.cols..(k + 1) * self.cols]
    }
}

/// Precomputed kernels for evaluating both factors on fixed main grids for many q.
#[derive(Clone, Debug)]
pub struct GridFactorizer {
    solver: WhfSolver,
    xp: Vec<C64>,
    xm: Vec<C64>,
    psi_p: Vec<C64>,
    psi_m: Vec<C64>,
    d_plus: CauchyTable,
    d_minus: CauchyTable,
}

impl GridFactorizer {
    pub fn new(solver: WhfSolver, xp: Vec<C64>, xm: Vec<C64>) -> Result<Self> {
        let d_plus = CauchyTable::new(&xp, &solver.minus.points)?;
        let d_minus = CauchyTable::new(&xm, &solver.plus.points)?;
        let model = solver.model;
        let psi_p = xp.iter().map(|&x| model.psi(x)).collect();
        let psi_m = xm.iter().map(|&x| model.psi(x)).collect();
        Ok(Self {
            solver,
            xp,
            xm,
            psi_p,
            psi_m,
            d_plus,
            d_minus,
        })
    }

    pub fn solver(&self) -> &WhfSolver {
        &self.solver
    }

    pub fn psi_plus_grid(&self) -> &[C64] {
        &self.psi_p
    }

    pub fn psi_minus_grid(&self) -> &[C64] {
        &self.psi_m
    }

    fn apply(&self, q: C64, side: Side) -> Result<Vec<C64>> {
        let l = self.solver.log_weights(q, side)?;
        let (x, d) = match side {
            Side::Plus => (&self.xp, &self.d_plus),
            Side::Minus => (&self.xm, &self.d_minus),
        };
        Ok(x.iter()
            .enumerate()
            .map(|(k, &xk)| {
                let s: C64 = d.row(k).iter().zip(&l).map(|(a, b)| a * b).sum();
                self.solver.prefactor(q, xk, side) * (xk * s).exp()
            })
            .collect())
    }

    /// (phi^+ continued onto the lower grid, phi^- continued onto the upper grid).
    pub fn continued(&self, q: C64) -> Result<(Vec<C64>, Vec<C64>)> {
        let php = self.apply(q, Side::Plus)?;
        let phm = self.apply(q, Side::Minus)?;
        continuation_tables(q, &self.psi_p, &self.psi_m, &php, &phm, &self.xp, &self.xm)
    }

    /// phi^+ continued onto the lower grid only.
    pub fn plus_on_minus(&self, q: C64) -> Result<Vec<C64>> {
        let phm = self.apply(q, Side::Minus)?;
        let (a, _) = continuation_tables(q, &[], &self.psi_m, &[], &phm, &[], &self.xm)?;
        Ok(a)
    }
}

/// Applies `f` to every item, in parallel when the feature is on.
pub(crate) fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
