//! First-touch probability, marginal law and the joint defect V2.

use std::f64::consts::PI;
use crate::clock::Stopwatch;

use num_complex::Complex64 as C64;

use super::tables::{s1_gwr, s1_sinh, s2_gwr, s2_sinh, Grids, Outer};
use super::{regime_gate, CpdfResult, EngineConfig, InnerMethod, Method};
use crate::contours::{select_fourier_params, ContourGrid, Direction, FtdHorizon, SchemeParams};
use crate::error::{param, Result};
use crate::laplace::{auto_shift, ERROR_SHIFTS};
use crate::levy_models::LevyModel;

fn phase(points: &[C64], x: f64) -> Vec<C64> {
    points.iter().map(|z| (C64::new(0.0, x) * z).exp()).collect()
}

/// Shifts of the GWR control runs, raised so the Gaver nodes clear the
/// region where q + psi can vanish on the grids.
pub(crate) fn gwr_shifts(model: &LevyModel, scheme: &SchemeParams, horizon: f64, base: f64) -> Vec<f64> {
    let floor = [scheme.xi.apex(), scheme.eta.apex()]
        .iter()
        .map(|&y| -model.psi(C64::new(0.0, y)).re)
        .fold(0.0f64, f64::max);
    let a = base.max(auto_shift(horizon, floor + 0.1));
    ERROR_SHIFTS.iter().map(|s| a + s).collect()
}

fn spread(v: &[f64]) -> f64 {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// V_ftd(h, s) = P[sup_{[0,s]} X >= h] for h > 0.
#[derive(Clone, Debug)]
pub struct FirstTouch {
    etap: ContourGrid,
    horizon: f64,
    tables: Vec<Outer>,
}

impl FirstTouch {
    pub(crate) fn from_grids(grids: &Grids, scheme: &SchemeParams, model: &LevyModel, horizon: f64, method: InnerMethod, cfg: &EngineConfig) -> Result<Self> {
        let tables = if horizon <= 0.0 {
            vec![Outer::Sinh(vec![C64::new(0.0, 0.0); grids.etap.len()])]
        } else {
            match method {
                InnerMethod::Sinh => vec![Outer::Sinh(s1_sinh(grids, &scheme.q_prime, horizon)?)],
                InnerMethod::Gwr => gwr_shifts(model, scheme, horizon, cfg.gwr.shift)
                    .into_iter()
                    .map(|a| Ok(Outer::Gwr(s1_gwr(grids, horizon, &cfg.gwr, a)?)))
                    .collect::<Result<Vec<_>>>()?,
            }
        };
        Ok(Self {
            etap: grids.etap.clone(),
            horizon,
            tables,
        })
    }

    /// Sinh table S1 for the triple-law kernels.
    pub(crate) fn s1(&self) -> Option<&[C64]> {
        match &self.tables[0] {
            Outer::Sinh(s) => Some(s),
            Outer::Gwr(_) => None,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    fn eval(&self, table: &Outer, h: f64) -> f64 {
        if h <= 0.0 {
            return 1.0;
        }
        if self.horizon <= 0.0 {
            return 0.0;
        }
        let e = phase(&self.etap.points, -h);
        let c = C64::new(0.0, -self.etap.zeta / (2.0 * PI));
        table.eval(|s1| {
            let s: C64 = self.etap.der.iter().zip(&e).zip(s1).map(|((d, e), s)| d * e * s).sum();
            (c * s).re
        })
    }

    pub fn value(&self, h: f64) -> f64 {
        self.eval(&self.tables[0], h)
    }

    /// Value and the spread over the GWR shifts (zero for the sinh rule).
    pub fn value_with_spread(&self, h: f64) -> (f64, f64) {
        let v = self.values(h);
        (v[0], spread(&v))
    }

    /// One value per outer table (per GWR shift).
    pub(crate) fn values(&self, h: f64) -> Vec<f64> {
        self.tables.iter().map(|t| self.eval(t, h)).collect()
    }
}

/// P[X_T <= a] by Fourier inversion of exp(-T psi) on the two main contours.
#[derive(Clone, Debug)]
pub struct Marginal {
    up: Vec<C64>,
    up_coef: Vec<C64>,
    down: Vec<C64>,
    down_coef: Vec<C64>,
}

impl Marginal {
    pub fn new(model: &LevyModel, big_t: f64, xi: &ContourGrid, eta: &ContourGrid) -> Self {
        let coef = |g: &ContourGrid, sign: f64| -> Vec<C64> {
            g.points
                .iter()
                .zip(&g.der)
                .map(|(z, d)| sign * g.zeta / (2.0 * PI) * d * (-big_t * model.psi(*z)).exp() / (C64::i() * z))
                .collect()
        };
        Self {
            up: xi.points.clone(),
            up_coef: coef(xi, -1.0),
            down: eta.points.clone(),
            down_coef: coef(eta, 1.0),
        }
    }

    pub fn value(&self, a: f64) -> f64 {
        if a <= 0.0 {
            self.up_coef
                .iter()
                .zip(&self.up)
                .map(|(c, z)| (c * (C64::new(0.0, -a) * z).exp()).re)
                .sum()
        } else {
            1.0 - self
                .down_coef
                .iter()
                .zip(&self.down)
                .map(|(c, z)| (c * (C64::new(0.0, -a) * z).exp()).re)
                .sum::<f64>()
        }
    }
}

/// V2(a, h; T) = P[X_T <= a, sup X <= h] - P[X_T <= a] for a <= h.
#[derive(Clone, Debug)]
pub struct JointDefect {
    eta: ContourGrid,
    xi: ContourGrid,
    tables: Vec<Outer>,
}

impl JointDefect {
    pub(crate) fn from_grids(grids: &Grids, scheme: &SchemeParams, model: &LevyModel, big_t: f64, method: InnerMethod, cfg: &EngineConfig) -> Result<Self> {
        let tables = match method {
            InnerMethod::Sinh => vec![Outer::Sinh(s2_sinh(grids, &scheme.q, big_t)?)],
            InnerMethod::Gwr => gwr_shifts(model, scheme, big_t, cfg.gwr.shift)
                .into_iter()
                .map(|a| Ok(Outer::Gwr(s2_gwr(grids, big_t, &cfg.gwr, a)?)))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(Self {
            eta: grids.eta.clone(),
            xi: grids.xi.clone(),
            tables,
        })
    }

    pub(crate) fn tables(&self) -> &[Outer] {
        &self.tables
    }

    pub(crate) fn prefactor(&self) -> f64 {
        self.xi.zeta * self.eta.zeta / (4.0 * PI * PI)
    }

    /// sum_jk u_j S_jk v_k K(j,k) for the kernel `kern`.
    fn form<K: Fn(C64, C64) -> C64>(&self, table: &Outer, a: f64, h: f64, kern: K) -> f64 {
        let u: Vec<C64> = phase(&self.eta.points, -h).iter().zip(&self.eta.der).map(|(e, d)| e * d).collect();
        let v: Vec<C64> = phase(&self.xi.points, h - a).iter().zip(&self.xi.der).map(|(e, d)| e * d).collect();
        let c = self.prefactor();
        let nk = self.xi.len();
        table.eval(|s| {
            let mut acc = C64::new(0.0, 0.0);
            for (j, uj) in u.iter().enumerate() {
                let ej = self.eta.points[j];
                let row: C64 = (0..nk).map(|k| s[j * nk + k] * v[k] * kern(self.xi.points[k], ej)).sum();
                acc += uj * row;
            }
            c * acc.re
        })
    }

    fn check(a: f64, h: f64) -> Result<()> {
        if !(h > 0.0) {
            return Err(param("h", "must be positive"));
        }
        if a > h {
            return Err(param("a1", format!("{a} exceeds the barrier {h}")));
        }
        Ok(())
    }

    pub fn v2(&self, a: f64, h: f64) -> Result<f64> {
        Self::check(a, h)?;
        Ok(self.form(&self.tables[0], a, h, |x, e| 1.0 / (x * (x - e))))
    }

    pub fn v2_with_spread(&self, a: f64, h: f64) -> Result<(f64, f64)> {
        let v = self.v2_values(a, h)?;
        Ok((v[0], spread(&v)))
    }

    /// One value per outer table (per GWR shift).
    pub(crate) fn v2_values(&self, a: f64, h: f64) -> Result<Vec<f64>> {
        Self::check(a, h)?;
        Ok(self.tables.iter().map(|t| self.form(t, a, h, |x, e| 1.0 / (x * (x - e)))).collect())
    }

    /// (dV2/dh, d2V2/(da dh)) for a < h; on the diagonal the second
    /// integrand loses its decay.
    pub fn derivatives(&self, a: f64, h: f64) -> Result<(f64, f64)> {
        Self::check(a, h)?;
        if a >= h {
            return Err(param("a1", "derivatives need a1 < h"));
        }
        let t = &self.tables[0];
        let d1 = self.form(t, a, h, |x, _| C64::i() / x);
        let d2 = self.form(t, a, h, |_, _| C64::new(1.0, 0.0));
        Ok((d1, d2))
    }
}

fn single_scheme(model: &LevyModel, horizon: f64, cfg: &EngineConfig) -> Result<SchemeParams> {
    let mut opts = cfg.options;
    opts.angle_scale = cfg.options.angle_scale;
    SchemeParams::design(model, cfg.ne, cfg.ne_whf, horizon, horizon, &opts, FtdHorizon::Literal)
}

fn inner_method(method: InnerMethod) -> Method {
    match method {
        InnerMethod::Sinh => Method::Sinh,
        InnerMethod::Gwr => Method::SinhGwr,
    }
}

/// P[sup_{[0,t]} X >= h].
pub fn v_ftd(model: &LevyModel, h: f64, t: f64, method: InnerMethod, cfg: &EngineConfig) -> Result<CpdfResult> {
    cfg.validate()?;
    regime_gate(model, inner_method(method))?;
    if !(h > 0.0) {
        return Err(param("h", "must be positive"));
    }
    if !(t > 0.0) {
        return Err(param("t", "must be positive"));
    }
    let start = Stopwatch::start();
    let scheme = single_scheme(model, t, cfg)?;
    let grids = Grids::new(model, &scheme)?;
    let ft = FirstTouch::from_grids(&grids, &scheme, model, t, method, cfg)?;
    let (raw, mut err) = ft.value_with_spread(h);
    if method == InnerMethod::Sinh {
        if let Some(k) = cfg.pair_scale {
            let mut c2 = cfg.clone();
            c2.options.angle_scale *= k;
            let s2 = single_scheme(model, t, &c2)?;
            let g2 = Grids::new(model, &s2)?;
            let f2 = FirstTouch::from_grids(&g2, &s2, model, t, method, &c2)?;
            err = (raw - f2.value(h)).abs();
        }
    }
    Ok(CpdfResult {
        value: super::clamp01(raw),
        raw_value: raw,
        method: inner_method(method),
        error_estimate: err,
        scheme,
        runtime_s: start.secs(),
        warnings: Vec::new(),
    })
}

/// P[X_T <= a] on contours sized for 10^-ne.
pub fn marginal_cdf(model: &LevyModel, a: f64, big_t: f64, ne: f64) -> Result<f64> {
    if !(big_t > 0.0) {
        return Err(param("T", "must be positive"));
    }
    if !a.is_finite() {
        return Err(param("a", "must be finite"));
    }
    let up = select_fourier_params(model, Direction::Up, ne, 0.0)?.grid();
    let down = select_fourier_params(model, Direction::Down, ne, 0.0)?.grid();
    for z in up.points.iter().chain(&down.points) {
        model.check_domain(*z)?;
    }
    Ok(Marginal::new(model, big_t, &up, &down).value(a))
}

/// V2(a1, h; T) with the selected outer inversion.
pub fn v2(model: &LevyModel, a1: f64, h: f64, big_t: f64, method: InnerMethod, cfg: &EngineConfig) -> Result<f64> {
    cfg.validate()?;
    regime_gate(model, inner_method(method))?;
    JointDefect::check(a1, h)?;
    let scheme = single_scheme(model, big_t, cfg)?;
    let grids = Grids::new(model, &scheme)?;
    JointDefect::from_grids(&grids, &scheme, model, big_t, method, cfg)?.v2(a1, h)
}

/// (dV2/dh, d2V2/(da1 dh)) by the sinh rule.
pub fn v2_derivatives(model: &LevyModel, a1: f64, h: f64, big_t: f64, cfg: &EngineConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    regime_gate(model, Method::Sinh)?;
    JointDefect::check(a1, h)?;
    let scheme = single_scheme(model, big_t, cfg)?;
    let grids = Grids::new(model, &scheme)?;
    JointDefect::from_grids(&grids, &scheme, model, big_t, InnerMethod::Sinh, cfg)?.derivatives(a1, h)
}
