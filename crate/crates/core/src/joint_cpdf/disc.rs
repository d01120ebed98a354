//! Riemann-Stieltjes evaluation of V on a uniform h grid.
//!
//! V ~ sum_i (Vf_i + Vf_{i+1})/2 (Vj_{i+1} - Vj_i) with Vf the first-touch
//! probability and Vj(h) = V_joint(min(a1, h), h; T). The same sum on every
//! other node gives the error estimate.

use num_complex::Complex64 as C64;

use super::kernels::zgemm;
use super::tables::Outer;
use super::triple::TripleEngine;
use crate::contours::ContourGrid;
use crate::error::{Error, Result};
use crate::laplace::wynn_rho;

const CHUNK: usize = 1024;

/// Per-part matrices K[j, k] = S[j, k] der+_k / (xi_k (xi_k - eta_j)).
struct Kernel {
    k: Vec<C64>,
    diag: Vec<C64>,
}

impl Kernel {
    fn new(s: &[C64], eta: &ContourGrid, xi: &ContourGrid) -> Self {
        let nk = xi.len();
        let mut k = vec![C64::new(0.0, 0.0); s.len()];
        let mut diag = vec![C64::new(0.0, 0.0); eta.len()];
        for (j, ej) in eta.points.iter().enumerate() {
            for (c, (x, d)) in xi.points.iter().zip(&xi.der).enumerate() {
                let v = s[j * nk + c] * d / (x * (x - ej));
                k[j * nk + c] = v;
                diag[j] += v;
            }
        }
        Self { k, diag }
    }
}

struct Rows<'a> {
    eta: &'a ContourGrid,
    xi: &'a ContourGrid,
    pref: f64,
}

impl Rows<'_> {
    fn u(&self, h: f64) -> Vec<C64> {
        self.eta
            .points
            .iter()
            .zip(&self.eta.der)
            .map(|(z, d)| d * (C64::new(0.0, -h) * z).exp())
            .collect()
    }

    /// V2(h, h) for every h.
    fn diagonal(&self, kern: &Kernel, hs: &[f64]) -> Vec<f64> {
        hs.iter()
            .map(|&h| {
                let s: C64 = self.u(h).iter().zip(&kern.diag).map(|(a, b)| a * b).sum();
                self.pref * s.re
            })
            .collect()
    }

    /// V2(a, h) for every h, by blocks of columns through one GEMM each.
    fn ray(&self, kern: &Kernel, a: f64, hs: &[f64]) -> Vec<f64> {
        let nj = self.eta.len();
        let nk = self.xi.len();
        let mut out = Vec::with_capacity(hs.len());
        for block in hs.chunks(CHUNK) {
            let nc = block.len();
            let mut x = vec![C64::new(0.0, 0.0); nk * nc];
            for (k, z) in self.xi.points.iter().enumerate() {
                for (c, &h) in block.iter().enumerate() {
                    x[k * nc + c] = (C64::new(0.0, h - a) * z).exp();
                }
            }
            let y = zgemm(&kern.k, &x, nj, nk, nc);
            for (c, &h) in block.iter().enumerate() {
                let s: C64 = self.u(h).iter().enumerate().map(|(j, uj)| uj * y[j * nc + c]).sum();
                out.push(self.pref * s.re);
            }
        }
        out
    }
}

fn combine(table: &Outer, parts: Vec<Vec<f64>>) -> Vec<f64> {
    match table {
        Outer::Sinh(_) => parts.into_iter().next().unwrap_or_default(),
        Outer::Gwr(_) => {
            let n = parts.first().map_or(0, Vec::len);
            (0..n)
                .map(|i| {
                    let f: Vec<f64> = parts.iter().map(|p| p[i]).collect();
                    wynn_rho(&f).value
                })
                .collect()
        }
    }
}

/// Even number of steps with length at most `dh`.
fn steps(a2: f64, dh: f64) -> usize {
    2 * ((a2 / (2.0 * dh)).ceil() as usize).max(1)
}

fn near_int(x: f64) -> Option<usize> {
    let r = x.round();
    ((x - r).abs() < 1e-9 * x.max(1.0)).then_some(r as usize)
}

/// Node counts of each a2 on a grid of step `step`, if all are even multiples.
fn shared_counts(a2s: &[f64], step: f64) -> Option<Vec<usize>> {
    a2s.iter()
        .map(|&a| near_int(a / step).filter(|n| n % 2 == 0))
        .collect()
}

struct Group {
    step: f64,
    /// (point index, node count)
    members: Vec<(usize, usize)>,
}

fn groups(points: &[(f64, f64)], dh: f64) -> Vec<Group> {
    let a2_min = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let step = a2_min / steps(a2_min, dh) as f64;
    let a2s: Vec<f64> = points.iter().map(|p| p.1).collect();
    if let Some(n) = shared_counts(&a2s, step) {
        return vec![Group {
            step,
            members: n.into_iter().enumerate().collect(),
        }];
    }
    let mut out: Vec<Group> = Vec::new();
    for (i, &(_, a2)) in points.iter().enumerate() {
        let n = steps(a2, dh);
        let step = a2 / n as f64;
        match out.iter_mut().find(|g| g.step == step) {
            Some(g) => g.members.push((i, n)),
            None => out.push(Group {
                step,
                members: vec![(i, n)],
            }),
        }
    }
    out
}

pub(crate) fn evaluate(engine: &TripleEngine, points: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    let mut out = vec![(0.0, 0.0); points.len()];
    if points.is_empty() {
        return Ok(out);
    }
    let table = &engine.joint.tables()[0];
    let rows = Rows {
        eta: &engine.grids.eta,
        xi: &engine.grids.xi,
        pref: engine.joint.prefactor(),
    };
    let kernels: Vec<Kernel> = table
        .parts()
        .iter()
        .map(|s| Kernel::new(s, rows.eta, rows.xi))
        .collect();
    let gwr = matches!(table, Outer::Gwr(_));
    let s = engine.cfg.ftd_horizon.horizon(engine.big_t, engine.t);
    let vf0 = if s > 0.0 { 1.0 } else { 0.0 };
    for g in groups(points, engine.cfg.dh) {
        let n_max = g.members.iter().map(|m| m.1).max().unwrap_or(0);
        let hs: Vec<f64> = (1..=n_max).map(|i| i as f64 * g.step).collect();
        let mut vf = vec![vf0];
        vf.extend(hs.iter().map(|&h| engine.ftd.value(h)));
        let need_diag = g.members.iter().any(|&(i, _)| points[i].0 > 0.0);
        let diag = if need_diag {
            combine(table, kernels.iter().map(|k| rows.diagonal(k, &hs)).collect())
        } else {
            Vec::new()
        };
        let mut a1s: Vec<f64> = g.members.iter().map(|&(i, _)| points[i].0).collect();
        a1s.sort_by(f64::total_cmp);
        a1s.dedup();
        for a1 in a1s {
            // first node strictly above the barrier level a1
            let first = hs.partition_point(|&h| h <= a1 + 1e-12 * g.step);
            let tail = &hs[first..];
            let ray = if tail.is_empty() {
                Vec::new()
            } else {
                combine(table, kernels.iter().map(|k| rows.ray(k, a1, tail)).collect())
            };
            let m_a1 = engine.marginal.value(a1);
            let vj_at = |i: usize| -> f64 {
                if i == 0 {
                    0.0
                } else if i - 1 < first {
                    diag[i - 1] + engine.marginal.value(hs[i - 1])
                } else {
                    ray[i - 1 - first] + m_a1
                }
            };
            let members: Vec<(usize, usize)> = g.members.iter().copied().filter(|&(i, _)| points[i].0 == a1).collect();
            let n_top = members.iter().map(|m| m.1).max().unwrap_or(0);
            let vj: Vec<f64> = (0..=n_top).map(vj_at).collect();
            for (pi, n) in members {
                let fine = stieltjes(&vf[..=n], &vj[..=n], 1);
                let coarse = stieltjes(&vf[..=n], &vj[..=n], 2);
                if !fine.is_finite() {
                    return Err(Error::NonFinite { index: pi as i64 });
                }
                let mut err = (fine - coarse).abs();
                if gwr {
                    err += inner_spread(engine, a1, points[pi].1)?;
                }
                out[pi] = (fine, err);
            }
        }
    }
    Ok(out)
}

/// Nodes of the coarse sums behind the GWR part of the error estimate.
const SPREAD_NODES: usize = 8;

/// Spread over the GWR shifts of a coarse Stieltjes sum, each shift using its
/// own inner values.
fn inner_spread(engine: &TripleEngine, a1: f64, a2: f64) -> Result<f64> {
    let n_shift = engine.joint.tables().len();
    let s = engine.cfg.ftd_horizon.horizon(engine.big_t, engine.t);
    let vf0 = if s > 0.0 { 1.0 } else { 0.0 };
    let mut vf = vec![vec![vf0]; n_shift];
    let mut vj = vec![vec![0.0]; n_shift];
    for k in 1..=SPREAD_NODES {
        let h = a2 * k as f64 / SPREAD_NODES as f64;
        let a = a1.min(h);
        let m = engine.marginal.value(a);
        for (i, (f, j)) in engine.ftd.values(h).into_iter().zip(engine.joint.v2_values(a, h)?).enumerate() {
            vf[i].push(f);
            vj[i].push(j + m);
        }
    }
    let sums: Vec<f64> = (0..n_shift).map(|i| stieltjes(&vf[i], &vj[i], 1)).collect();
    let lo = sums.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(hi - lo)
}

fn stieltjes(vf: &[f64], vj: &[f64], stride: usize) -> f64 {
    let idx: Vec<usize> = (0..vf.len()).step_by(stride).collect();
    idx.windows(2)
        .map(|w| 0.5 * (vf[w[0]] + vf[w[1]]) * (vj[w[1]] - vj[w[0]]))
        .sum()
}
