//! Trapezoid rule on uniform grids, its error bound, and summation by parts.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Smallest admissible |exp(i a zeta) - 1|.
pub const RESONANCE_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidSpec {
    pub zeta: f64,
    pub n_minus: usize,
    pub n_plus: usize,
    pub offset: f64,
    /// Halve the weight of the node at `offset` (one-sided grids).
    pub halve_origin: bool,
}

impl TrapezoidSpec {
    pub fn symmetric(zeta: f64, n: usize) -> Self {
        Self {
            zeta,
            n_minus: n,
            n_plus: n,
            offset: 0.0,
            halve_origin: false,
        }
    }

    pub fn one_sided(zeta: f64, n: usize) -> Self {
        Self {
            zeta,
            n_minus: 0,
            n_plus: n,
            offset: 0.0,
            halve_origin: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.zeta > 0.0) {
            return Err(param("zeta", format!("{} must be positive", self.zeta)));
        }
        if self.n_minus + self.n_plus < 1 {
            return Err(param("n", "n_minus + n_plus must be at least 1"));
        }
        Ok(())
    }

    /// Grid nodes y_j = offset + j zeta, j = -n_minus..=n_plus.
    pub fn nodes(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let lo = -(self.n_minus as i64);
        (lo..=self.n_plus as i64).map(move |j| (j, self.offset + j as f64 * self.zeta))
    }
}

/// zeta * sum_j g(offset + j zeta).
pub fn trapezoid_sum<F>(g: F, spec: &TrapezoidSpec) -> Result<C64>
where
    F: Fn(f64) -> C64,
{
    spec.validate()?;
    let mut acc = C64::new(0.0, 0.0);
    for (j, y) in spec.nodes() {
        let v = g(y);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite { index: j });
        }
        if j == 0 && spec.halve_origin {
            acc += 0.5 * v;
        } else {
            acc += v;
        }
    }
    Ok(acc * spec.zeta)
}

/// Discretization error of the infinite trapezoid rule for an integrand
/// analytic in the strip |Im y| < d with Hardy norm H.
pub fn discretization_error_bound(h_norm: f64, d: f64, zeta: f64) -> f64 {
    if h_norm == 0.0 {
        return 0.0;
    }
    let e = (-2.0 * PI * d / zeta).exp();
    h_norm * e / (1.0 - e)
}

/// True when the bound is not smaller than H (the step is too coarse).
pub fn bound_is_informative(d: f64, zeta: f64) -> bool {
    zeta < 2.0 * PI * d / std::f64::consts::LN_2
}

fn resonance_gap(a: f64, zeta: f64) -> Result<C64> {
    let z = C64::from_polar(1.0, a * zeta) - 1.0;
    if z.norm() < RESONANCE_THRESHOLD {
        return Err(Error::Resonance { gap: z.norm() });
    }
    Ok(z)
}

/// zeta / (e^{i a zeta} - 1)^n * sum_j e^{-i a j zeta} Delta^n g_j.
///
/// `g[k]` is the value at grid index `first_index + k`. The last `n` entries
/// are consumed by the forward differences.
pub fn sum_by_parts(g: &[C64], first_index: i64, a: f64, zeta: f64, order: usize) -> Result<C64> {
    if !(zeta > 0.0) {
        return Err(param("zeta", "must be positive"));
    }
    let z = if order > 0 {
        resonance_gap(a, zeta)?
    } else {
        C64::new(1.0, 0.0)
    };
    if g.len() <= order {
        return Err(param("g", format!("need more than {order} values")));
    }
    let mut d = g.to_vec();
    for _ in 0..order {
        for k in 0..d.len() - 1 {
            d[k] = d[k + 1] - d[k];
        }
        d.pop();
    }
    let mut acc = C64::new(0.0, 0.0);
    for (k, v) in d.iter().enumerate() {
        let j = first_index + k as i64;
        acc += C64::from_polar(1.0, -a * j as f64 * zeta) * v;
    }
    Ok(acc * zeta / z.powi(order as i32))
}

/// (zeta / |e^{i a zeta} - 1|)^n times the integral of the tail envelope.
pub fn truncation_bound(g_tail_integral: f64, zeta: f64, a: f64, order: usize) -> Result<f64> {
    if order == 0 {
        return Ok(g_tail_integral);
    }
    let z = resonance_gap(a, zeta)?;
    Ok((zeta / z.norm()).powi(order as i32) * g_tail_integral)
}
