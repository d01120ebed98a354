//! Batched triple-law evaluation: the closed-form h integration and the
//! Riemann-Stieltjes variants share one set of tables.

use std::f64::consts::PI;
use crate::clock::Stopwatch;

use num_complex::Complex64 as C64;

use super::kernels::{contract, S3Set};
use super::single::{FirstTouch, JointDefect, Marginal};
use super::tables::{Grids, Outer};
use super::{clamp01, disc, regime_gate, CpdfResult, EngineConfig, InnerMethod, Method};
use crate::contours::SchemeParams;
use crate::error::Result;
use crate::laplace::wynn_rho;
use crate::levy_models::LevyModel;

/// Tables for one (model, T, t) and one method.
pub struct TripleEngine {
    pub(crate) model: LevyModel,
    pub(crate) big_t: f64,
    pub(crate) t: f64,
    pub(crate) method: Method,
    pub(crate) cfg: EngineConfig,
    pub(crate) scheme: SchemeParams,
    pub(crate) grids: Grids,
    pub(crate) ftd: FirstTouch,
    pub(crate) joint: JointDefect,
    pub(crate) marginal: Marginal,
    pub(crate) build_s: f64,
}

impl TripleEngine {
    pub fn build(model: &LevyModel, big_t: f64, t: f64, method: Method, cfg: &EngineConfig) -> Result<Self> {
        cfg.validate()?;
        regime_gate(model, method)?;
        let start = Stopwatch::start();
        let scheme = SchemeParams::design(model, cfg.ne, cfg.ne_whf, big_t, t, &cfg.options, cfg.ftd_horizon)?;
        let grids = Grids::new(model, &scheme)?;
        let s = cfg.ftd_horizon.horizon(big_t, t);
        let (ftd_m, joint_m) = match method {
            Method::Sinh | Method::DiscSinh => (InnerMethod::Sinh, InnerMethod::Sinh),
            Method::SinhGwr => (InnerMethod::Sinh, InnerMethod::Gwr),
            Method::DiscGwr => (InnerMethod::Gwr, InnerMethod::Gwr),
        };
        let ftd = FirstTouch::from_grids(&grids, &scheme, model, s, ftd_m, cfg)?;
        let joint = JointDefect::from_grids(&grids, &scheme, model, big_t, joint_m, cfg)?;
        let marginal = Marginal::new(model, big_t, &grids.xi, &grids.eta);
        Ok(Self {
            model: *model,
            big_t,
            t,
            method,
            cfg: cfg.clone(),
            scheme,
            grids,
            ftd,
            joint,
            marginal,
            build_s: start.secs(),
        })
    }

    pub fn scheme(&self) -> &SchemeParams {
        &self.scheme
    }

    pub fn build_seconds(&self) -> f64 {
        self.build_s
    }

    pub fn first_touch(&self) -> &FirstTouch {
        &self.ftd
    }

    pub fn joint_defect(&self) -> &JointDefect {
        &self.joint
    }

    pub fn marginal(&self) -> &Marginal {
        &self.marginal
    }

    /// Raw values with method-intrinsic error estimates (shift spread for GWR,
    /// step doubling for disc). `runtime_s` holds the per-point share of the
    /// evaluation only.
    pub fn evaluate(&self, points: &[(f64, f64)]) -> Result<Vec<CpdfResult>> {
        let start = Stopwatch::start();
        let vals: Vec<(f64, f64)> = match self.method {
            Method::Sinh | Method::SinhGwr => self.closed_form(points),
            Method::DiscSinh | Method::DiscGwr => disc::evaluate(self, points)?,
        };
        let each = start.secs() / points.len().max(1) as f64;
        let mut warnings = Vec::new();
        if self.method == Method::DiscGwr {
            warnings.push("GWR inner values limit the accuracy to about 1e-8".to_string());
            if super::in_generalized_regime(&self.model) {
                warnings.push("finite variation with drift: formulas hold in a generalized sense only".to_string());
            }
        }
        Ok(vals
            .into_iter()
            .map(|(raw, err)| CpdfResult {
                value: clamp01(raw),
                raw_value: raw,
                method: self.method,
                error_estimate: err,
                scheme: self.scheme.clone(),
                runtime_s: each,
                warnings: warnings.clone(),
            })
            .collect())
    }

    fn needed_h(points: &[(f64, f64)]) -> Vec<f64> {
        let mut hs = vec![0.0];
        for &(a1, a2) in points {
            hs.push(a2);
            if a1 > 0.0 {
                hs.push(a1.min(a2));
            }
        }
        hs.sort_by(f64::total_cmp);
        hs.dedup();
        hs
    }

    fn closed_form(&self, points: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let Some(s1) = self.ftd.s1() else {
            unreachable!("closed-form methods use a sinh first-touch table")
        };
        let hs = Self::needed_h(points);
        let set = S3Set::build(&self.grids.eta, &self.grids.xi, &self.grids.etap, s1, &hs);
        let tables = self.joint.tables();
        points
            .iter()
            .map(|&(a1, a2)| {
                let v: Vec<(f64, f64)> = tables.iter().map(|t| self.triple_outer(t, a1, a2, &set)).collect();
                let lo = v.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
                let hi = v.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
                (v[0].0, hi - lo + v[0].1)
            })
            .collect()
    }

    /// Value and, for GWR, the gap between the two last entries of the rho column.
    fn triple_outer(&self, table: &Outer, a1: f64, a2: f64, set: &S3Set) -> (f64, f64) {
        match table {
            Outer::Sinh(s) => (self.triple_value(s, a1, a2, set), 0.0),
            Outer::Gwr(ms) => {
                let f: Vec<f64> = ms.iter().map(|m| self.triple_value(m, a1, a2, set)).collect();
                let r = wynn_rho(&f);
                (r.value, if r.spread.is_finite() { r.spread } else { 0.0 })
            }
        }
    }

    /// Closed-form h integration against one S2-type matrix.
    fn triple_value(&self, s: &[C64], a1: f64, a2: f64, set: &S3Set) -> f64 {
        let eta = &self.grids.eta;
        let xi = &self.grids.xi;
        let c = xi.zeta * eta.zeta * self.grids.etap.zeta / (8.0 * PI * PI * PI);
        let u = |h: f64| -> Vec<C64> {
            eta.points
                .iter()
                .zip(&eta.der)
                .map(|(z, d)| d * (C64::new(0.0, -h) * z).exp())
                .collect()
        };
        let v = |x: f64| -> Vec<C64> {
            xi.points
                .iter()
                .zip(&xi.der)
                .map(|(z, d)| d * (C64::new(0.0, x) * z).exp() / z)
                .collect()
        };
        let a1n = a1.min(0.0);
        let w = |h: f64| {
            let i = set.index(h);
            c * contract(s, &set.s3[i], None, &u(h), &v(h - a1n)).im
        };
        let mut val = w(a2) - w(0.0);
        if a1 > 0.0 {
            let b = a1.min(a2);
            let ia2 = set.index(a2);
            let ua2 = u(a2);
            let w1 = |x: f64| c * contract(s, &set.s3[ia2], None, &ua2, &v(x)).im;
            let v0 = v(0.0);
            let w2 = |h: f64| {
                let i = set.index(h);
                c * contract(s, &set.s3[i], Some(&set.r[i]), &u(h), &v0).im
            };
            val += w1(a2 - b) - w1(a2) - w2(b) + w2(0.0);
        }
        val
    }

    /// V_joint(a, h) = V2(a, h) + P[X_T <= a] for a <= h.
    pub fn v_joint(&self, a: f64, h: f64) -> Result<f64> {
        Ok(self.joint.v2(a, h)? + self.marginal.value(a))
    }
}
