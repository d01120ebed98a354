//! Shared grids and the q-summed factor tables S1 and S2.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::contours::{ContourGrid, SchemeParams, SinhContour};
use crate::error::Result;
use crate::laplace::{gaver_coefficients, wynn_rho, GwrConfig};
use crate::levy_models::LevyModel;
use crate::wiener_hopf::{map_collect, GridFactorizer, WhfSolver};

/// Main Fourier grids with a factorizer for both Wiener-Hopf factors on them.
#[derive(Clone, Debug)]
pub struct Grids {
    /// Lower contour (eta).
    pub eta: ContourGrid,
    /// Upper contour (xi).
    pub xi: ContourGrid,
    /// Lower contour of the first-touch integral (eta').
    pub etap: ContourGrid,
    fact: GridFactorizer,
    fact_p: Option<GridFactorizer>,
}

impl Grids {
    pub fn new(model: &LevyModel, scheme: &SchemeParams) -> Result<Self> {
        scheme.validate()?;
        let solver = WhfSolver::new(model, &scheme.whf_minus, &scheme.whf_plus)?;
        let eta = scheme.eta.grid();
        let xi = scheme.xi.grid();
        let etap = scheme.eta_prime.grid();
        let fact = GridFactorizer::new(solver.clone(), xi.points.clone(), eta.points.clone())?;
        let fact_p = if scheme.eta_prime != scheme.eta {
            Some(GridFactorizer::new(solver, xi.points.clone(), etap.points.clone())?)
        } else {
            None
        };
        Ok(Self {
            eta,
            xi,
            etap,
            fact,
            fact_p,
        })
    }

    /// phi^+_q on the eta' grid.
    pub fn plus_on_etap(&self, q: C64) -> Result<Vec<C64>> {
        self.fact_p.as_ref().unwrap_or(&self.fact).plus_on_minus(q)
    }

    /// (phi^+_q on the eta grid, phi^-_q on the xi grid).
    pub fn pair(&self, q: C64) -> Result<(Vec<C64>, Vec<C64>)> {
        self.fact.continued(q)
    }
}

/// Nodes and weights w with (1/2 pi i) int e^{qT} F(q)/q dq ~ sum w_k F(q_k).
///
/// On a one-sided grid the weights are doubled and the apex weight halved; only
/// the real (or imaginary) part of a conjugation-symmetric total is then exact.
pub fn bromwich_weights(c: &SinhContour, horizon: f64) -> (Vec<C64>, Vec<C64>) {
    let (q, der) = c.nodes_and_weights();
    let one_sided = c.n_minus == 0;
    let scale = if one_sided { c.zeta / PI } else { c.zeta / (2.0 * PI) };
    let mut w: Vec<C64> = q
        .iter()
        .zip(&der)
        .map(|(q, d)| scale * d * (q * horizon).exp() / q)
        .collect();
    if one_sided {
        w[0] *= 0.5;
    }
    (q, w)
}

/// Real Gaver nodes and weights: functional j is sum_k w[j][k] F(q_k).
pub fn gwr_weights(horizon: f64, cfg: &GwrConfig, shift: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let tau = std::f64::consts::LN_2 / horizon;
    let q: Vec<f64> = (1..=2 * cfg.m).map(|k| k as f64 * tau + shift).collect();
    let e = (shift * horizon).exp();
    let w = gaver_coefficients(cfg.m, horizon)
        .into_iter()
        .map(|row| row.iter().zip(&q).map(|(c, q)| e * c / q).collect())
        .collect();
    (q, w)
}

/// A table summed over the outer Laplace variable: one matrix for the sinh
/// rule, one per Gaver functional for GWR.
#[derive(Clone, Debug)]
pub enum Outer {
    Sinh(Vec<C64>),
    Gwr(Vec<Vec<C64>>),
}

impl Outer {
    /// Applies a real linear functional; GWR tables are accelerated by the rho algorithm.
    pub fn eval<F: Fn(&[C64]) -> f64>(&self, f: F) -> f64 {
        match self {
            Outer::Sinh(s) => f(s),
            Outer::Gwr(ms) => {
                let v: Vec<f64> = ms.iter().map(|m| f(m)).collect();
                wynn_rho(&v).value
            }
        }
    }

    pub fn parts(&self) -> Vec<&[C64]> {
        match self {
            Outer::Sinh(s) => vec![s.as_slice()],
            Outer::Gwr(ms) => ms.iter().map(|m| m.as_slice()).collect(),
        }
    }
}

/// S1[m] = sum_q w_q phi^+_q(eta'_m) / eta'_m over a full Bromwich grid.
pub fn s1_sinh(grids: &Grids, c: &SinhContour, horizon: f64) -> Result<Vec<C64>> {
    let (q, w) = bromwich_weights(c, horizon);
    let vals: Vec<Result<Vec<C64>>> = map_collect(&q, |&q| grids.plus_on_etap(q));
    let mut s1 = vec![C64::new(0.0, 0.0); grids.etap.len()];
    for (v, wk) in vals.into_iter().zip(&w) {
        for (acc, x) in s1.iter_mut().zip(v?) {
            *acc += wk * x;
        }
    }
    for (acc, e) in s1.iter_mut().zip(&grids.etap.points) {
        *acc /= e;
    }
    Ok(s1)
}

/// Gaver functionals of phi^+_q(eta')/(q eta') for the first-touch integral.
pub fn s1_gwr(grids: &Grids, horizon: f64, cfg: &GwrConfig, shift: f64) -> Result<Vec<Vec<C64>>> {
    let (q, w) = gwr_weights(horizon, cfg, shift);
    let vals: Vec<Result<Vec<C64>>> = map_collect(&q, |&q| grids.plus_on_etap(C64::new(q, 0.0)));
    let vals = vals.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(w.iter()
        .map(|row| {
            (0..grids.etap.len())
                .map(|m| {
                    let s: C64 = row.iter().zip(&vals).map(|(c, v)| *c * v[m]).sum();
                    s / grids.etap.points[m]
                })
                .collect()
        })
        .collect())
}

fn outer_sum(pairs: &[(Vec<C64>, Vec<C64>)], w: &[C64], nj: usize, nk: usize) -> Vec<C64> {
    let rows: Vec<usize> = (0..nj).collect();
    let rows: Vec<Vec<C64>> = map_collect(&rows, |&j| {
        let mut r = vec![C64::new(0.0, 0.0); nk];
        for ((a, b), wq) in pairs.iter().zip(w) {
            let c = wq * a[j];
            for (x, y) in r.iter_mut().zip(b) {
                *x += c * y;
            }
        }
        r
    });
    rows.concat()
}

/// S2[j, k] = sum_q w_q phi^+_q(eta_j) phi^-_q(xi_k), row-major in j.
pub fn s2_sinh(grids: &Grids, c: &SinhContour, horizon: f64) -> Result<Vec<C64>> {
    let (q, w) = bromwich_weights(c, horizon);
    let pairs: Vec<Result<(Vec<C64>, Vec<C64>)>> = map_collect(&q, |&q| grids.pair(q));
    let pairs = pairs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(outer_sum(&pairs, &w, grids.eta.len(), grids.xi.len()))
}

/// Gaver functionals of the S2 integrand at real q.
pub fn s2_gwr(grids: &Grids, horizon: f64, cfg: &GwrConfig, shift: f64) -> Result<Vec<Vec<C64>>> {
    let (q, w) = gwr_weights(horizon, cfg, shift);
    let pairs: Vec<Result<(Vec<C64>, Vec<C64>)>> = map_collect(&q, |&q| grids.pair(C64::new(q, 0.0)));
    let pairs = pairs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(w.iter()
        .map(|row| {
            let wc: Vec<C64> = row.iter().map(|&x| C64::new(x, 0.0)).collect();
            outer_sum(&pairs, &wc, grids.eta.len(), grids.xi.len())
        })
        .collect())
}
