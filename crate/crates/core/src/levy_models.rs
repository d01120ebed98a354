//! Characteristic exponents of SINH-regular Lévy processes.
//!
//! Convention: `E[exp(i xi X_t)] = exp(-t psi(xi))`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Finite stand-in for an infinite strip bound.
pub const STRIP_CLAMP: f64 = 1e6;

/// Smallest real part of q the Brownian contour strip is sized for.
pub const BM_Q_FLOOR: f64 = 0.5;

/// Strip and cone data of a SINH-regular process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticityData {
    pub mu_minus: f64,
    pub mu_plus: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub gamma_p_minus: f64,
    pub gamma_p_plus: f64,
    pub nu: f64,
    pub mu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KobolParams {
    pub nu: f64,
    pub c: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub mu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrownianParams {
    pub sigma: f64,
    pub mu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kobol {
    p: KobolParams,
    // c * Gamma(-nu), and the constant part of the bracket
    cg: f64,
    base: f64,
}

impl Kobol {
    pub fn new(p: KobolParams) -> Result<Self> {
        if !(p.nu > 0.0 && p.nu < 2.0) || (p.nu - 1.0).abs() < 1e-12 {
            return Err(param("nu", format!("{} not in (0,2) without 1", p.nu)));
        }
        if !(p.c > 0.0) {
            return Err(param("c", format!("{} must be positive", p.c)));
        }
        if !(p.lambda_minus < 0.0 && p.lambda_plus > 0.0) {
            return Err(param(
                "lambda",
                format!("need lambda_- < 0 < lambda_+, got {} and {}", p.lambda_minus, p.lambda_plus),
            ));
        }
        if !p.mu.is_finite() {
            return Err(param("mu", "drift must be finite"));
        }
        let cg = p.c * gamma_neg(p.nu);
        let base = (-p.lambda_minus).powf(p.nu) + p.lambda_plus.powf(p.nu);
        Ok(Self { p, cg, base })
    }

    /// Builds the model with `c` fixed by the second instantaneous moment.
    pub fn with_m2(nu: f64, lambda_minus: f64, lambda_plus: f64, mu: f64, m2: f64) -> Result<Self> {
        let c = calibrate_c(nu, lambda_minus, lambda_plus, m2)?;
        Self::new(KobolParams {
            nu,
            c,
            lambda_minus,
            lambda_plus,
            mu,
        })
    }

    pub fn params(&self) -> KobolParams {
        self.p
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Brownian {
    p: BrownianParams,
}

impl Brownian {
    pub fn new(p: BrownianParams) -> Result<Self> {
        if !(p.sigma > 0.0) || !p.sigma.is_finite() {
            return Err(param("sigma", format!("{} must be positive", p.sigma)));
        }
        if !p.mu.is_finite() {
            return Err(param("mu", "drift must be finite"));
        }
        Ok(Self { p })
    }

    pub fn params(&self) -> BrownianParams {
        self.p
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LevyModel {
    Kobol(Kobol),
    Brownian(Brownian),
}

impl LevyModel {
    pub fn kobol(nu: f64, lambda_minus: f64, lambda_plus: f64, mu: f64, m2: f64) -> Result<Self> {
        Ok(Self::Kobol(Kobol::with_m2(nu, lambda_minus, lambda_plus, mu, m2)?))
    }

    pub fn brownian(sigma: f64, mu: f64) -> Result<Self> {
        Ok(Self::Brownian(Brownian::new(BrownianParams { sigma, mu })?))
    }

    /// Characteristic exponent without domain checks (hot path).
    #[inline]
    pub fn psi(&self, xi: C64) -> C64 {
        let i = C64::i();
        match self {
            LevyModel::Kobol(k) => {
                let nu = k.p.nu;
                let a = (-k.p.lambda_minus - i * xi).powf(nu);
                let b = (k.p.lambda_plus + i * xi).powf(nu);
                -i * k.p.mu * xi + k.cg * (k.base - a - b)
            }
            LevyModel::Brownian(b) => {
                let s2 = b.p.sigma * b.p.sigma;
                0.5 * s2 * xi * xi - i * b.p.mu * xi
            }
        }
    }

    /// Characteristic exponent with the domain check.
    pub fn psi_checked(&self, xi: C64) -> Result<C64> {
        self.check_domain(xi)?;
        Ok(self.psi(xi))
    }

    /// The exponent without the drift term.
    pub fn psi0(&self, xi: C64) -> C64 {
        self.psi(xi) + C64::i() * self.drift() * xi
    }

    pub fn check_domain(&self, xi: C64) -> Result<()> {
        if !(xi.re.is_finite() && xi.im.is_finite()) {
            return Err(Error::Domain {
                xi,
                bound: "non-finite argument".into(),
            });
        }
        if let LevyModel::Kobol(k) = self {
            // principal-branch cuts of the two powers lie on the imaginary axis
            let on_axis = xi.re.abs() <= 1e-14 * (1.0 + xi.im.abs());
            if on_axis && xi.im >= k.p.lambda_plus {
                return Err(Error::Domain {
                    xi,
                    bound: format!("Im xi >= lambda_+ = {}", k.p.lambda_plus),
                });
            }
            if on_axis && xi.im <= k.p.lambda_minus {
                return Err(Error::Domain {
                    xi,
                    bound: format!("Im xi <= lambda_- = {}", k.p.lambda_minus),
                });
            }
        }
        Ok(())
    }

    /// Order nu of the exponent at infinity.
    pub fn order(&self) -> f64 {
        match self {
            LevyModel::Kobol(k) => k.p.nu,
            LevyModel::Brownian(_) => 2.0,
        }
    }

    pub fn drift(&self) -> f64 {
        match self {
            LevyModel::Kobol(k) => k.p.mu,
            LevyModel::Brownian(b) => b.p.mu,
        }
    }

    pub fn analyticity(&self) -> AnalyticityData {
        match self {
            LevyModel::Kobol(k) => {
                let gp = (PI / (2.0 * k.p.nu)).min(PI / 2.0);
                AnalyticityData {
                    mu_minus: k.p.lambda_minus,
                    mu_plus: k.p.lambda_plus,
                    gamma_minus: -PI / 2.0,
                    gamma_plus: PI / 2.0,
                    gamma_p_minus: -gp,
                    gamma_p_plus: gp,
                    nu: k.p.nu,
                    mu: k.p.mu,
                }
            }
            LevyModel::Brownian(b) => AnalyticityData {
                mu_minus: -STRIP_CLAMP,
                mu_plus: STRIP_CLAMP,
                gamma_minus: -PI / 2.0,
                gamma_plus: PI / 2.0,
                gamma_p_minus: -PI / 4.0,
                gamma_p_plus: PI / 4.0,
                nu: 2.0,
                mu: b.p.mu,
            },
        }
    }

    /// Strip used by the contour selectors. Infinite strips are replaced by a
    /// scale-aware finite window.
    pub fn contour_strip(&self) -> (f64, f64) {
        match self {
            LevyModel::Kobol(k) => (k.p.lambda_minus, k.p.lambda_plus),
            LevyModel::Brownian(b) => {
                // zeros of q + psi for real q >= BM_Q_FLOOR lie outside this strip
                let s2 = b.p.sigma * b.p.sigma;
                let r = (b.p.mu * b.p.mu + 2.0 * BM_Q_FLOOR * s2).sqrt();
                ((b.p.mu - r) / s2, (b.p.mu + r) / s2)
            }
        }
    }

    /// Leading coefficient of psi0(rho e^{i phi}) ~ c_inf(phi) rho^nu.
    pub fn c_infinity(&self, phi: f64) -> Result<C64> {
        let a = self.analyticity();
        if !(phi > a.gamma_minus && phi < a.gamma_plus) {
            return Err(param(
                "phi",
                format!("{} outside ({}, {})", phi, a.gamma_minus, a.gamma_plus),
            ));
        }
        Ok(match self {
            LevyModel::Kobol(k) => {
                let nu = k.p.nu;
                -2.0 * k.cg * (nu * PI / 2.0).cos() * C64::from_polar(1.0, nu * phi)
            }
            LevyModel::Brownian(b) => 0.5 * b.p.sigma * b.p.sigma * C64::from_polar(1.0, 2.0 * phi),
        })
    }
}

/// Gamma(-nu) for nu in (0,2) minus {1}, by the recursion from Gamma(2-nu).
pub(crate) fn gamma_neg(nu: f64) -> f64 {
    statrs::function::gamma::gamma(2.0 - nu) / (nu * (nu - 1.0))
}

/// Returns c such that psi''(0) = m2 for the KoBoL exponent with equal orders.
pub fn calibrate_c(nu: f64, lambda_minus: f64, lambda_plus: f64, m2: f64) -> Result<f64> {
    if !(nu > 0.0 && nu < 2.0) || (nu - 1.0).abs() < 1e-12 {
        return Err(param("nu", format!("{nu} not in (0,2) without 1")));
    }
    if !(lambda_minus < 0.0 && lambda_plus > 0.0) {
        return Err(param("lambda", "need lambda_- < 0 < lambda_+"));
    }
    if !(m2 > 0.0) {
        return Err(param("m2", format!("{m2} must be positive")));
    }
    let g = statrs::function::gamma::gamma(2.0 - nu);
    Ok(m2 / (g * ((-lambda_minus).powf(nu - 2.0) + lambda_plus.powf(nu - 2.0))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bench() -> LevyModel {
        LevyModel::kobol(1.2, -2.0, 1.0, 0.0, 0.1).unwrap()
    }

    #[test]
    fn psi_vanishes_at_origin() {
        assert_eq!(bench().psi(C64::new(0.0, 0.0)).norm(), 0.0);
        assert_eq!(LevyModel::brownian(1.0, 0.3).unwrap().psi(C64::new(0.0, 0.0)).norm(), 0.0);
    }

    #[test]
    fn brownian_quadratic() {
        let m = LevyModel::brownian(1.0, 0.0).unwrap();
        let v = m.psi(C64::new(1.0, 0.5));
        assert!((v - C64::new(0.375, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn gamma_neg_recursion() {
        // Gamma(-1.2) = Gamma(0.8) / ((-1.2)(-0.2))
        let g08 = 1.164_229_713_725_303_3;
        assert!((gamma_neg(1.2) - g08 / 0.24).abs() < 1e-13);
        // Gamma(-0.5) = -2 sqrt(pi)
        assert!((gamma_neg(0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn calibrated_c_matches_finite_difference() {
        let c = calibrate_c(1.2, -2.0, 1.0, 0.1).unwrap();
        assert!((c - 0.054_558_228_346_105_04).abs() < 1e-12);
        for &(nu, lm, lp) in &[(1.2, -2.0, 1.0), (0.8, -2.0, 1.0), (0.3, -1.5, 2.5), (1.7, -1.0, 1.0)] {
            let m = LevyModel::kobol(nu, lm, lp, 0.0, 0.1).unwrap();
            let h = 1e-3;
            let d2 = (m.psi(C64::new(h, 0.0)) + m.psi(C64::new(-h, 0.0)) - 2.0 * m.psi(C64::new(0.0, 0.0))) / (h * h);
            assert!((d2.re - 0.1).abs() < 1e-7, "nu={nu}: {}", d2.re);
        }
    }

    #[test]
    fn doubling_m2_doubles_c() {
        let a = calibrate_c(0.8, -2.0, 1.0, 0.1).unwrap();
        let b = calibrate_c(0.8, -2.0, 1.0, 0.2).unwrap();
        assert_eq!(2.0 * a, b);
    }

    #[test]
    fn c_infinity_positive_at_zero_angle() {
        let m = bench();
        let c0 = m.c_infinity(0.0).unwrap();
        assert!(c0.re > 0.0 && c0.im.abs() < 1e-16);
        let bm = LevyModel::brownian(1.0, 0.0).unwrap();
        let v = bm.c_infinity(0.3).unwrap();
        assert!((v - 0.5 * C64::from_polar(1.0, 0.6)).norm() < 1e-15);
        assert!(m.c_infinity(2.0).is_err());
    }

    #[test]
    fn asymptotic_ratio() {
        let m = bench();
        for &phi in &[-0.3, 0.0, 0.4] {
            let c = m.c_infinity(phi).unwrap();
            let mut last = f64::INFINITY;
            for &rho in &[1e4, 1e6] {
                let z = C64::from_polar(rho, phi);
                let r = (m.psi0(z) / (c * rho.powf(1.2)) - 1.0).norm();
                assert!(r < last);
                last = r;
            }
            assert!(last < 0.01);
        }
    }

    #[test]
    fn domain_check_rejects_cuts() {
        let m = bench();
        assert!(m.psi_checked(C64::new(0.0, 1.5)).is_err());
        assert!(m.psi_checked(C64::new(0.0, -2.5)).is_err());
        assert!(m.psi_checked(C64::new(0.1, 1.5)).is_ok());
        assert!(LevyModel::kobol(1.0, -2.0, 1.0, 0.0, 0.1).is_err());
    }
}
