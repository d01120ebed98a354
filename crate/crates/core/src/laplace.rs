//! Laplace inversion: Gaver-Stehfest, Gaver-Wynn-Rho and sinh-deformed Bromwich sums.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::contours::{ContourKind, SinhContour};
use crate::error::{param, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GwrMode {
    GaverStehfest,
    Gwr,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GwrConfig {
    /// Half the number of transform evaluations (2M nodes k ln2/T, k = 1..=2M).
    pub m: usize,
    pub shift: f64,
    pub mode: GwrMode,
}

impl Default for GwrConfig {
    fn default() -> Self {
        Self {
            m: 8,
            shift: 0.0,
            mode: GwrMode::Gwr,
        }
    }
}

/// Shifts whose spread serves as the error proxy.
pub const ERROR_SHIFTS: [f64; 3] = [0.0, 0.5, 1.0];

fn binom(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round()
}

fn factorial(n: u64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Gaver-Stehfest weights zeta_k, k = 1..=2M.
pub fn gs_weights(m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(param("M", "must be at least 1"));
    }
    if m > 9 {
        let w = gs_weights_unchecked(m);
        let big = w.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        return Err(param("M", format!("{m} too large for double precision (max |weight| {big:e})")));
    }
    Ok(gs_weights_unchecked(m))
}

fn gs_weights_unchecked(m: usize) -> Vec<f64> {
    let mm = m as u64;
    (1..=2 * mm)
        .map(|k| {
            let lo = k.div_ceil(2);
            let hi = k.min(mm);
            let s: f64 = (lo..=hi)
                .map(|j| {
                    (j as f64).powi(m as i32 + 1) / factorial(mm)
                        * binom(mm, j)
                        * binom(2 * j, j)
                        * binom(j, k - j)
                })
                .sum();
            if (mm + k) % 2 == 0 {
                s
            } else {
                -s
            }
        })
        .collect()
}

/// Gaver-Stehfest approximation (ln2/T) sum_k zeta_k F(k ln2/T).
pub fn gaver_stehfest<F: Fn(f64) -> f64>(f: F, horizon: f64, m: usize) -> Result<f64> {
    let w = gs_weights(m)?;
    let tau = LN_2 / horizon;
    Ok(tau * w.iter().enumerate().map(|(k, z)| z * f((k + 1) as f64 * tau)).sum::<f64>())
}

/// Coefficients c[j-1][k-1] with f_j = sum_k c_jk F(k ln2/T), j = 1..=M, k = 1..=2M.
pub fn gaver_coefficients(m: usize, horizon: f64) -> Vec<Vec<f64>> {
    let tau = LN_2 / horizon;
    (1..=m as u64)
        .map(|j| {
            let mut row = vec![0.0; 2 * m];
            let pre = j as f64 * tau * binom(2 * j, j);
            for l in 0..=j {
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                row[(j + l - 1) as usize] += pre * sign * binom(j, l);
            }
            row
        })
        .collect()
}

/// Gaver functionals f_j from transform values F(k ln2/T), k = 1..=2M.
pub fn gaver_functionals(values: &[f64], horizon: f64) -> Vec<f64> {
    let m = values.len() / 2;
    gaver_coefficients(m, horizon)
        .iter()
        .map(|row| row.iter().zip(values).map(|(c, v)| c * v).sum())
        .collect()
}

/// Outcome of the rho recursion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoEstimate {
    pub value: f64,
    /// Even order of the selected entry.
    pub order: usize,
    /// Gap between the two last entries of the selected column (NaN if it has one entry).
    pub spread: f64,
    /// True when a vanishing difference forced an early stop.
    pub truncated: bool,
}

/// Wynn's rho algorithm.
///
/// Each even column is represented by its last entry, the one built from the
/// highest-index terms. In double precision the top of the table can lose
/// several digits to cancellation, so the even order whose two last entries
/// agree best is returned (ties go to the higher order); a single-entry top
/// column is used only when no lower order offers a pair.
pub fn wynn_rho(f: &[f64]) -> RhoEstimate {
    let n = f.len();
    if n == 0 {
        return RhoEstimate {
            value: f64::NAN,
            order: 0,
            spread: f64::NAN,
            truncated: true,
        };
    }
    let mut prev = vec![0.0; n + 1];
    let mut cur = f.to_vec();
    let pair = |c: &[f64]| if c.len() > 1 { (c[c.len() - 1] - c[c.len() - 2]).abs() } else { f64::NAN };
    let mut best = RhoEstimate {
        value: f[n - 1],
        order: 0,
        spread: pair(f),
        truncated: false,
    };
    for k in 1..n {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let diff = cur[j + 1] - cur[j];
            if diff == 0.0 || !diff.is_finite() {
                best.truncated = true;
                return best;
            }
            next.push(prev[j + 1] + k as f64 / diff);
        }
        prev = cur;
        cur = next;
        let last = cur[cur.len() - 1];
        if k % 2 == 0 && last.is_finite() {
            let sp = pair(&cur);
            let better = if sp.is_nan() { best.spread.is_nan() } else { best.spread.is_nan() || sp <= best.spread };
            if better {
                best.value = last;
                best.order = k;
                best.spread = sp;
            }
        }
    }
    best
}

/// Result of a GWR inversion with its shift-spread error proxy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inversion {
    pub value: f64,
    pub error_estimate: f64,
}

/// GWR (or Gaver-Stehfest) inversion at the configured shift.
pub fn gwr_invert_at<F: Fn(f64) -> f64>(f: F, horizon: f64, cfg: &GwrConfig) -> Result<f64> {
    Ok(gwr_with_spread(f, horizon, cfg)?.0)
}

/// Value and rho spread (0 for Gaver-Stehfest), both scaled back by e^{aT}.
fn gwr_with_spread<F: Fn(f64) -> f64>(f: F, horizon: f64, cfg: &GwrConfig) -> Result<(f64, f64)> {
    if cfg.m == 0 {
        return Err(param("M", "must be at least 1"));
    }
    if !(horizon > 0.0) {
        return Err(param("T", "must be positive"));
    }
    let a = cfg.shift;
    let g = |q: f64| f(q + a);
    let (v, sp) = match cfg.mode {
        GwrMode::GaverStehfest => (gaver_stehfest(g, horizon, cfg.m)?, 0.0),
        GwrMode::Gwr => {
            let tau = LN_2 / horizon;
            let values: Vec<f64> = (1..=2 * cfg.m).map(|k| g(k as f64 * tau)).collect();
            let r = wynn_rho(&gaver_functionals(&values, horizon));
            (r.value, if r.spread.is_nan() { 0.0 } else { r.spread })
        }
    };
    let scale = (a * horizon).exp();
    Ok((scale * v, scale * sp))
}

/// GWR inversion; the error estimate is the spread over the shifts {0, 0.5, 1}
/// added to `cfg.shift`, plus the rho spread at `cfg.shift`.
pub fn gwr_invert<F: Fn(f64) -> f64>(f: F, horizon: f64, cfg: &GwrConfig) -> Result<Inversion> {
    let mut vals = Vec::with_capacity(ERROR_SHIFTS.len());
    let mut rho = 0.0;
    for (i, s) in ERROR_SHIFTS.iter().enumerate() {
        let c = GwrConfig {
            shift: cfg.shift + s,
            ..*cfg
        };
        let (v, sp) = gwr_with_spread(&f, horizon, &c)?;
        if i == 0 {
            rho = sp;
        }
        vals.push(v);
    }
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(Inversion {
        value: vals[0],
        error_estimate: hi - lo + rho,
    })
}

/// Smallest shift making ln2/T + a exceed `sigma0`.
pub fn auto_shift(horizon: f64, sigma0: f64) -> f64 {
    (sigma0 - LN_2 / horizon).max(0.0)
}

/// Weights w_j with (1/2 pi i) int e^{qT} F(q) dq ~ sum_j w_j F(q_j) on a full
/// Bromwich grid.
pub fn bromwich_weights(contour: &SinhContour, horizon: f64) -> Result<(Vec<C64>, Vec<C64>)> {
    if contour.kind != ContourKind::Bromwich {
        return Err(param("contour", "needs a Bromwich contour"));
    }
    let (q, der) = contour.nodes_and_weights();
    let w = q
        .iter()
        .zip(&der)
        .map(|(q, d)| contour.zeta / (2.0 * PI) * d * (q * horizon).exp())
        .collect();
    Ok((q, w))
}

/// Sinh-accelerated Bromwich inversion; returns (real part, imaginary residue).
pub fn sinh_bromwich<F: Fn(C64) -> C64>(f: F, horizon: f64, contour: &SinhContour) -> Result<(f64, f64)> {
    let (q, w) = bromwich_weights(contour, horizon)?;
    let s: C64 = q.iter().zip(&w).map(|(q, w)| w * f(*q)).sum();
    Ok((s.re, s.im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contours::{select_bromwich_with, DesignOptions};
    use crate::levy_models::LevyModel;

    #[test]
    fn gs_weights_m1() {
        assert_eq!(gs_weights(1).unwrap(), vec![2.0, -2.0]);
    }

    #[test]
    fn gs_weights_sum_and_constant() {
        for m in 1..=8 {
            let w = gs_weights(m).unwrap();
            let s: f64 = w.iter().sum();
            let inv: f64 = w.iter().enumerate().map(|(k, z)| z / (k + 1) as f64).sum();
            assert!(s.abs() < 1e-6 * w.iter().fold(0.0f64, |a, b| a.max(b.abs())), "m={m}");
            assert!((inv - 1.0).abs() < 1e-6, "m={m}: {inv}");
        }
        let w8 = gs_weights(8).unwrap();
        assert!(w8.iter().fold(0.0f64, |a, b| a.max(b.abs())) > 1e6);
        assert!(gs_weights(12).is_err());
        assert!(gs_weights(0).is_err());
    }

    #[test]
    fn gwr_elementary() {
        let cfg = GwrConfig::default();
        for &t in &[0.25, 1.0, 3.0] {
            let v = gwr_invert_at(|q| 1.0 / q, t, &cfg).unwrap();
            assert!((v - 1.0).abs() < 1e-9, "T={t}: {v}");
            let v = gwr_invert_at(|q| 1.0 / (q * q), t, &cfg).unwrap();
            assert!((v - t).abs() < 1e-6 * t, "T={t}: {v}");
        }
        let r = gwr_invert(|q| 1.0 / (q + 1.0), 1.0, &cfg).unwrap();
        assert!((r.value - (-1f64).exp()).abs() < 1e-7, "{}", r.value);
        assert!(r.error_estimate < 1e-6);
    }

    #[test]
    fn gaver_stehfest_mode() {
        let cfg = GwrConfig {
            mode: GwrMode::GaverStehfest,
            ..Default::default()
        };
        let v = gwr_invert_at(|q| 1.0 / (q + 1.0), 1.0, &cfg).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn rho_on_short_input() {
        let r = wynn_rho(&[1.0, 1.0, 1.0]);
        assert!(r.truncated);
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn shift_auto() {
        assert_eq!(auto_shift(1.0, 0.1), 0.0);
        assert!((auto_shift(100.0, 1.0) - (1.0 - LN_2 / 100.0)).abs() < 1e-15);
    }

    fn bromwich(t: f64) -> SinhContour {
        let m = LevyModel::brownian(1.0, 0.0).unwrap();
        select_bromwich_with(&m, 13.0, t, &DesignOptions::default(), false).unwrap()
    }

    #[test]
    fn sinh_bromwich_elementary() {
        let (v, im) = sinh_bromwich(|q| 1.0 / q, 1.0, &bromwich(1.0)).unwrap();
        assert!((v - 1.0).abs() < 1e-12 && im.abs() < 1e-12);
        let (v, _) = sinh_bromwich(|q| 1.0 / (q + 1.0), 1.0, &bromwich(1.0)).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-12);
        let (v, _) = sinh_bromwich(|q| 1.0 / (q * q), 0.25, &bromwich(0.25)).unwrap();
        assert!((v - 0.25).abs() < 1e-12);
    }

    #[test]
    fn gwr_and_sinh_agree() {
        let f = |q: f64| 1.0 / (q + 0.5) + 1.0 / ((q + 2.0) * (q + 2.0));
        let g = |q: C64| 1.0 / (q + 0.5) + 1.0 / ((q + 2.0) * (q + 2.0));
        let t: f64 = 0.7;
        let exact = (-0.5 * t).exp() + t * (-2.0 * t).exp();
        let a = gwr_invert(f, t, &GwrConfig::default()).unwrap();
        let (b, _) = sinh_bromwich(g, t, &bromwich(t)).unwrap();
        assert!((b - exact).abs() < 1e-12);
        assert!((a.value - b).abs() < 1e-7, "{} vs {b}", a.value);
    }

    #[test]
    fn sinh_bromwich_linear() {
        let c = bromwich(0.5);
        let (a, _) = sinh_bromwich(|q| 1.0 / (q + 2.0), 0.5, &c).unwrap();
        let (b, _) = sinh_bromwich(|q| 1.0 / (q * q + 1.0), 0.5, &c).unwrap();
        let (ab, _) = sinh_bromwich(|q| 3.0 / (q + 2.0) - 2.0 / (q * q + 1.0), 0.5, &c).unwrap();
        assert!((ab - (3.0 * a - 2.0 * b)).abs() < 1e-14);
    }
}
