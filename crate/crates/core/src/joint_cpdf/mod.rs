//! Joint law of the terminal value, the supremum and the time of the supremum.
//!
//! V(a1, a2; T, t) = P[X_T <= a1, sup X <= a2, argmax <= t] is assembled from
//! the first-touch probability V_ftd(h, s) = P[sup_{[0,s]} X >= h] and the
//! joint law of (X_T, sup X) through
//!
//! V = int_0^{a2} V_ftd(h, s) d_h V_joint(min(a1, h), h; T).
//!
//! The `sinh` methods integrate over h in closed form, the `disc` methods use a
//! trapezoid Riemann-Stieltjes sum on a uniform h grid. The first-touch horizon
//! s is selected by [`FtdHorizon`].

mod disc;
pub mod kernels;
mod single;
pub mod tables;
mod triple;

use serde::{Deserialize, Serialize};

use crate::contours::{DesignOptions, FtdHorizon, SchemeParams};
use crate::error::{param, Error, Result};
use crate::laplace::GwrConfig;
use crate::levy_models::LevyModel;

pub use single::{marginal_cdf, v2, v2_derivatives, v_ftd, FirstTouch, JointDefect, Marginal};
pub use triple::TripleEngine;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Sinh,
    SinhGwr,
    DiscSinh,
    DiscGwr,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Sinh => "sinh",
            Method::SinhGwr => "sinh-gwr",
            Method::DiscSinh => "disc-sinh",
            Method::DiscGwr => "disc-gwr",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sinh" => Ok(Method::Sinh),
            "sinh-gwr" => Ok(Method::SinhGwr),
            "disc-sinh" => Ok(Method::DiscSinh),
            "disc-gwr" => Ok(Method::DiscGwr),
            _ => Err(Error::Config(format!(
                "unknown method `{s}` (expected sinh, sinh-gwr, disc-sinh or disc-gwr)"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Outer Laplace inversion for the single-barrier quantities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerMethod {
    Sinh,
    Gwr,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleQuery {
    pub a1: f64,
    pub a2: f64,
    #[serde(rename = "T")]
    pub big_t: f64,
    pub t: f64,
}

impl TripleQuery {
    pub fn new(a1: f64, a2: f64, big_t: f64, t: f64) -> Result<Self> {
        let q = Self { a1, a2, big_t, t };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a1.is_finite() {
            return Err(param("a1", "must be finite"));
        }
        if !(self.a2 > 0.0 && self.a2.is_finite()) {
            return Err(param("a2", format!("{} must be positive", self.a2)));
        }
        if !(self.big_t > 0.0 && self.t > 0.0 && self.t <= self.big_t) {
            return Err(param("t", format!("need 0 < t <= T, got t={} T={}", self.t, self.big_t)));
        }
        Ok(())
    }
}

/// Numerical settings shared by all methods.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// Main tolerance exponent: grids target 10^-ne.
    pub ne: f64,
    /// Tolerance exponent of the Wiener-Hopf factor grids.
    pub ne_whf: f64,
    pub options: DesignOptions,
    pub ftd_horizon: FtdHorizon,
    pub gwr: GwrConfig,
    /// Step of the uniform h grid of the disc methods.
    pub dh: f64,
    /// Angle factor of the control run behind the sinh error estimate; `None` skips it.
    pub pair_scale: Option<f64>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            ne: 8.0,
            ne_whf: 10.0,
            options: DesignOptions::default(),
            ftd_horizon: FtdHorizon::default(),
            gwr: GwrConfig::default(),
            dh: 3.125e-5,
            pair_scale: Some(0.9),
        }
    }
}

impl EngineConfig {
    pub fn with_ne(ne: f64, ne_whf: f64) -> Self {
        Self {
            ne,
            ne_whf,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ne > 0.0 && self.ne_whf > 0.0) {
            return Err(param("ne", "tolerance exponents must be positive"));
        }
        if !(self.dh > 0.0) {
            return Err(param("dh", "must be positive"));
        }
        if self.gwr.m == 0 || self.gwr.m > 9 {
            return Err(param("gwr.m", "must be in 1..=9"));
        }
        if let Some(k) = self.pair_scale {
            if !(k > 0.0 && k < 1.0) {
                return Err(param("pair_scale", "must lie in (0,1)"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpdfResult {
    /// Raw value clamped to [0, 1] (to [-1, 0] for the defect V2).
    pub value: f64,
    pub raw_value: f64,
    pub method: Method,
    pub error_estimate: f64,
    pub scheme: SchemeParams,
    /// Table construction shared evenly over the batch plus the point's own work.
    pub runtime_s: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// True for finite variation with drift, where the closed-form h integration breaks down.
pub fn in_generalized_regime(model: &LevyModel) -> bool {
    model.order() < 1.0 && model.drift() != 0.0
}

/// Rejects the finite-variation regime with nonzero drift for the transform methods.
pub fn regime_gate(model: &LevyModel, method: Method) -> Result<()> {
    if in_generalized_regime(model) && method != Method::DiscGwr {
        return Err(Error::Regime(format!(
            "nu = {} < 1 with drift {} is only supported by disc-gwr",
            model.order(),
            model.drift()
        )));
    }
    Ok(())
}

/// Evaluates V on a list of (a1, a2) points sharing (T, t).
pub fn triple_batch(
    model: &LevyModel,
    big_t: f64,
    t: f64,
    points: &[(f64, f64)],
    method: Method,
    cfg: &EngineConfig,
) -> Result<Vec<CpdfResult>> {
    cfg.validate()?;
    for &(a1, a2) in points {
        TripleQuery::new(a1, a2, big_t, t)?;
    }
    regime_gate(model, method)?;
    let start = crate::clock::Stopwatch::start();
    let engine = TripleEngine::build(model, big_t, t, method, cfg)?;
    let build = start.secs();
    let mut out = engine.evaluate(points)?;
    let mut pair: Option<Vec<f64>> = None;
    if matches!(method, Method::Sinh) {
        if let Some(k) = cfg.pair_scale {
            let mut c2 = cfg.clone();
            c2.options.angle_scale *= k;
            let e2 = TripleEngine::build(model, big_t, t, method, &c2)?;
            pair = Some(e2.evaluate(points)?.iter().map(|r| r.raw_value).collect());
        }
    }
    let total = start.secs();
    let n = points.len().max(1) as f64;
    for (i, r) in out.iter_mut().enumerate() {
        if let Some(p) = &pair {
            r.error_estimate = (r.raw_value - p[i]).abs();
        }
        r.runtime_s = if pair.is_some() { total / n } else { build / n + r.runtime_s };
    }
    Ok(out)
}

/// Single triple-law query by the sinh method.
pub fn v_triple_sinh(model: &LevyModel, q: &TripleQuery, cfg: &EngineConfig) -> Result<CpdfResult> {
    Ok(triple_batch(model, q.big_t, q.t, &[(q.a1, q.a2)], Method::Sinh, cfg)?.remove(0))
}

/// Single triple-law query with GWR in the outer Laplace inversion.
pub fn v_triple_sinh_gwr(model: &LevyModel, q: &TripleQuery, cfg: &EngineConfig) -> Result<CpdfResult> {
    Ok(triple_batch(model, q.big_t, q.t, &[(q.a1, q.a2)], Method::SinhGwr, cfg)?.remove(0))
}

/// Single triple-law query by the Riemann-Stieltjes sum with step `cfg.dh`.
pub fn v_triple_disc(model: &LevyModel, q: &TripleQuery, inner: InnerMethod, cfg: &EngineConfig) -> Result<CpdfResult> {
    let m = match inner {
        InnerMethod::Sinh => Method::DiscSinh,
        InnerMethod::Gwr => Method::DiscGwr,
    };
    Ok(triple_batch(model, q.big_t, q.t, &[(q.a1, q.a2)], m, cfg)?.remove(0))
}

pub(crate) fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}
