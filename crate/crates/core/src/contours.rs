//! Sinh-deformed contours, their trapezoid grids and the parameter rule.

use std::f64::consts::{LN_10, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::levy_models::LevyModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContourKind {
    /// Wings point upwards (omega > 0).
    FourierUp,
    /// Wings point downwards (omega < 0).
    FourierDown,
    /// q = sigma + i b sinh(i omega + y), wings to the left.
    Bromwich,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinhContour {
    pub kind: ContourKind,
    /// omega_1 for Fourier contours, sigma for Bromwich contours.
    pub omega1: f64,
    pub b: f64,
    pub omega: f64,
    pub zeta: f64,
    pub n_minus: usize,
    pub n_plus: usize,
}

/// Nodes, normalized derivatives and the step of a trapezoid grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ContourGrid {
    pub points: Vec<C64>,
    pub der: Vec<C64>,
    pub zeta: f64,
}

impl ContourGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl SinhContour {
    pub fn fourier(omega1: f64, b: f64, omega: f64, zeta: f64, n: usize) -> Result<Self> {
        let kind = if omega >= 0.0 {
            ContourKind::FourierUp
        } else {
            ContourKind::FourierDown
        };
        let c = Self {
            kind,
            omega1,
            b,
            omega,
            zeta,
            n_minus: n,
            n_plus: n,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn bromwich(sigma: f64, b: f64, omega: f64, zeta: f64, n: usize, one_sided: bool) -> Result<Self> {
        let c = Self {
            kind: ContourKind::Bromwich,
            omega1: sigma,
            b,
            omega,
            zeta,
            n_minus: if one_sided { 0 } else { n },
            n_plus: n,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) {
            return Err(param("b", format!("{} must be positive", self.b)));
        }
        if !(self.zeta > 0.0) {
            return Err(param("zeta", format!("{} must be positive", self.zeta)));
        }
        if !(self.omega.abs() < PI / 2.0) {
            return Err(param("omega", format!("|{}| must be below pi/2", self.omega)));
        }
        match self.kind {
            ContourKind::FourierUp if self.omega < 0.0 => Err(param("omega", "fourier-up needs omega >= 0")),
            ContourKind::FourierDown if self.omega > 0.0 => Err(param("omega", "fourier-down needs omega <= 0")),
            ContourKind::Bromwich if !(self.omega > 0.0) => Err(param("omega", "bromwich needs omega in (0, pi/2)")),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn point(&self, y: f64) -> C64 {
        let s = (C64::new(y, self.omega)).sinh();
        match self.kind {
            ContourKind::Bromwich => self.omega1 + C64::i() * self.b * s,
            _ => C64::new(0.0, self.omega1) + self.b * s,
        }
    }

    /// b cosh(i omega + y); for Bromwich contours the factor i is left to the caller.
    #[inline]
    pub fn derivative(&self, y: f64) -> C64 {
        self.b * C64::new(y, self.omega).cosh()
    }

    pub fn nodes_and_weights(&self) -> (Vec<C64>, Vec<C64>) {
        let lo = -(self.n_minus as i64);
        let hi = self.n_plus as i64;
        let ys: Vec<f64> = (lo..=hi).map(|j| j as f64 * self.zeta).collect();
        (
            ys.iter().map(|&y| self.point(y)).collect(),
            ys.iter().map(|&y| self.derivative(y)).collect(),
        )
    }

    pub fn grid(&self) -> ContourGrid {
        let (points, der) = self.nodes_and_weights();
        ContourGrid {
            points,
            der,
            zeta: self.zeta,
        }
    }

    pub fn len(&self) -> usize {
        self.n_minus + self.n_plus + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Imaginary part of the apex (Fourier) or real part of the apex (Bromwich).
    pub fn apex(&self) -> f64 {
        match self.kind {
            ContourKind::Bromwich => self.omega1 - self.b * self.omega.sin(),
            _ => self.omega1 + self.b * self.omega.sin(),
        }
    }
}

/// Knobs of the grid-selection rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignOptions {
    /// Bromwich wing angle omega_l.
    pub omega_l: f64,
    /// Strip half-width of the Bromwich integrand as a fraction of omega_l.
    pub d_l_frac: f64,
    /// Multiplies every deformation angle (0.9 for the control run).
    pub angle_scale: f64,
    /// Fraction of the strip reachable by the apex of a Fourier contour.
    pub strip_frac: f64,
    /// Closest approach of a Fourier contour to the real axis.
    pub axis_gap: f64,
    /// Margin of the Bromwich apex to the right of 0.
    pub sigma0: f64,
    /// Hardy-norm growth allowance in the Bromwich step.
    pub beta: f64,
    /// Multiplies the power-law truncation length of the Fourier grids.
    pub trunc_factor: f64,
    /// Extra decay (in e-folds) demanded at the end of the Bromwich grid.
    pub bromwich_tail: f64,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            omega_l: PI / 10.0,
            d_l_frac: 0.5,
            angle_scale: 1.0,
            strip_frac: 0.8,
            axis_gap: 0.25,
            sigma0: 0.5,
            beta: 2.0,
            trunc_factor: 1.0,
            bromwich_tail: 5.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Up,
    Down,
}

/// Wing angle and strip half-width of the Fourier contours.
pub fn fourier_angles(model: &LevyModel, opts: &DesignOptions) -> (f64, f64) {
    let nu = model.order();
    let wl = PI / 10.0;
    let theta = PI / 2.0 - wl - 0.5 * wl;
    let phi_max = (0.9 * theta / nu.max(1.0)).min(0.4 * PI);
    let omega = opts.angle_scale * phi_max / 2.0;
    (omega, 0.95 * omega)
}

fn apex_range(model: &LevyModel, dir: Direction, opts: &DesignOptions, shrink: f64) -> (f64, f64) {
    let (lo, hi) = model.contour_strip();
    match dir {
        Direction::Down => {
            let far = shrink * opts.strip_frac * lo;
            let near = -(opts.axis_gap.min(0.3 * -lo) * shrink.sqrt());
            (far, near)
        }
        Direction::Up => {
            let far = shrink * opts.strip_frac * hi;
            let near = opts.axis_gap.min(0.3 * hi) * shrink.sqrt();
            (near, far)
        }
    }
}

fn fourier_shape(model: &LevyModel, dir: Direction, opts: &DesignOptions, shrink: f64) -> (f64, f64, f64) {
    let (om, d) = fourier_angles(model, opts);
    let w = match dir {
        Direction::Up => om,
        Direction::Down => -om,
    };
    let (lo, hi) = apex_range(model, dir, opts, shrink);
    let (mut s_lo, mut s_hi) = ((w - d).sin(), (w + d).sin());
    if s_lo > s_hi {
        std::mem::swap(&mut s_lo, &mut s_hi);
    }
    let b = (hi - lo) / (s_hi - s_lo);
    let omega1 = hi - b * s_hi;
    (omega1, b, w)
}

/// Step for tolerance 10^-ne with strip half-width d.
fn step_for(d: f64, ne: f64) -> f64 {
    2.0 * PI * d / (ne * LN_10 + LN_10)
}

/// Truncation length Y = N zeta of the main Fourier grids.
///
/// The integrands decay like |xi|^{-nu/2}; if `x_scale > 0` the oscillating
/// factor exp(i x xi) is used instead when it gives a shorter grid.
pub fn fourier_truncation(model: &LevyModel, ne: f64, b: f64, omega: f64, x_scale: f64, opts: &DesignOptions) -> f64 {
    let ln_e = ne * LN_10;
    let nu = model.order();
    let power = (2.0 / nu) * ln_e * opts.trunc_factor + (2.0 / b).ln();
    if x_scale > 0.0 {
        let osc = (2.0 * ln_e / (x_scale * b * omega.abs().sin())).max(1.0).ln();
        power.min(osc).max(1.0)
    } else {
        power.max(1.0)
    }
}

pub fn select_fourier_params(model: &LevyModel, dir: Direction, ne: f64, x_scale: f64) -> Result<SinhContour> {
    select_fourier_with(model, dir, ne, x_scale, &DesignOptions::default(), 1.0)
}

pub fn select_fourier_with(
    model: &LevyModel,
    dir: Direction,
    ne: f64,
    x_scale: f64,
    opts: &DesignOptions,
    shrink: f64,
) -> Result<SinhContour> {
    if !(ne > 0.0) {
        return Err(param("ne", "tolerance exponent must be positive"));
    }
    let (_, d) = fourier_angles(model, opts);
    if d <= 1e-3 {
        return Err(param("omega", "cone too narrow for a sinh deformation"));
    }
    let (omega1, b, w) = fourier_shape(model, dir, opts, shrink);
    let zeta = step_for(d, ne);
    let y = fourier_truncation(model, ne, b, w, x_scale, opts);
    SinhContour::fourier(omega1, b, w, zeta, (y / zeta).ceil() as usize)
}

pub fn select_bromwich_params(model: &LevyModel, ne: f64, horizon: f64) -> Result<SinhContour> {
    select_bromwich_with(model, ne, horizon, &DesignOptions::default(), true)
}

pub fn select_bromwich_with(
    model: &LevyModel,
    ne: f64,
    horizon: f64,
    opts: &DesignOptions,
    one_sided: bool,
) -> Result<SinhContour> {
    if !(horizon > 0.0) {
        return Err(param("T", format!("{horizon} must be positive")));
    }
    let _ = model;
    let wl = opts.omega_l * opts.angle_scale;
    let dl = wl * opts.d_l_frac;
    let ln_e = ne * LN_10;
    let b = opts.beta / (horizon * 2.0 * wl.cos() * dl.sin());
    let sigma = opts.sigma0 + b * (wl + dl).sin();
    let zeta = 2.0 * PI * dl / (ln_e + LN_10 + opts.beta);
    let arg = (ln_e + horizon * sigma + opts.bromwich_tail) / (horizon * b * (wl - dl).sin());
    let y = arg.max(1.0).acosh();
    let n = ((y / zeta).ceil() as usize).max(1);
    SinhContour::bromwich(sigma, b, wl, zeta, n, one_sided)
}

/// Outer grid of a Laplace inversion: a sinh contour or the GWR real ray.
#[derive(Clone, Debug, PartialEq)]
pub enum OuterGrid {
    Sinh(SinhContour),
    RealRay(Vec<f64>),
}

/// Gaver nodes k ln2 / T, k = 1..=2M.
pub fn gwr_ray(horizon: f64, m: usize, shift: f64) -> Vec<f64> {
    (1..=2 * m)
        .map(|k| k as f64 * std::f64::consts::LN_2 / horizon + shift)
        .collect()
}

/// Verifies q + psi(xi) avoids (-inf, 0] on all node pairs.
pub fn admissibility_check(q_nodes: &[C64], xi_nodes: &[C64], model: &LevyModel) -> Result<()> {
    for &xi in xi_nodes {
        model.check_domain(xi).map_err(|e| Error::Admissibility {
            q: C64::new(f64::NAN, f64::NAN),
            xi,
            reason: e.to_string(),
        })?;
        let p = model.psi(xi);
        for &q in q_nodes {
            let z = q + p;
            if z.re <= 0.0 && z.im.abs() < 1e-12 * (1.0 + z.norm()) {
                return Err(Error::Admissibility {
                    q,
                    xi,
                    reason: format!("q + psi(xi) = {z} on the cut"),
                });
            }
        }
    }
    Ok(())
}

/// Verifies xi - eta != 0 for every pair.
pub fn separation_check(xi_nodes: &[C64], eta_nodes: &[C64], min_gap: f64) -> Result<()> {
    for &xi in xi_nodes {
        for &eta in eta_nodes {
            if (xi - eta).norm() <= min_gap {
                return Err(Error::Admissibility {
                    q: C64::new(f64::NAN, f64::NAN),
                    xi,
                    reason: format!("node {eta} within {min_gap:e} of xi"),
                });
            }
        }
    }
    Ok(())
}

/// Horizon of the first-touch factor in the triple-law pipeline.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FtdHorizon {
    /// T - t; reproduces the published benchmark tables.
    #[default]
    Complement,
    /// t, as the representation is usually written.
    Literal,
}

impl FtdHorizon {
    pub fn horizon(self, big_t: f64, t: f64) -> f64 {
        match self {
            FtdHorizon::Complement => (big_t - t).max(0.0),
            FtdHorizon::Literal => t,
        }
    }
}

/// Every contour and grid used by the transform-domain methods.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub ne: f64,
    pub ne_whf: f64,
    /// One-sided Bromwich grid for the horizon T.
    pub q: SinhContour,
    /// Full Bromwich grid for the first-touch horizon.
    pub q_prime: SinhContour,
    /// Upper contour for xi.
    pub xi: SinhContour,
    /// Lower contour for eta.
    pub eta: SinhContour,
    /// Lower contour for eta'.
    pub eta_prime: SinhContour,
    /// Finer grids for the Wiener-Hopf integrals.
    pub whf_plus: SinhContour,
    pub whf_minus: SinhContour,
    pub options: DesignOptions,
    pub ftd_horizon: FtdHorizon,
}

impl SchemeParams {
    /// Applies the sizing rule for tolerances 10^-ne (main integrals) and
    /// 10^-ne_whf (Wiener-Hopf factors).
    pub fn design(
        model: &LevyModel,
        ne: f64,
        ne_whf: f64,
        big_t: f64,
        t: f64,
        opts: &DesignOptions,
        ftd_horizon: FtdHorizon,
    ) -> Result<Self> {
        if !(big_t > 0.0 && t > 0.0 && t <= big_t) {
            return Err(param("t", format!("need 0 < t <= T, got t={t}, T={big_t}")));
        }
        if !(ne > 0.0 && ne_whf > 0.0) {
            return Err(param("ne", "tolerance exponents must be positive"));
        }
        let s = ftd_horizon.horizon(big_t, t);
        let s_grid = if s > 0.0 { s } else { big_t };
        let q = select_bromwich_with(model, ne, big_t, opts, true)?;
        let q_prime = select_bromwich_with(model, ne, s_grid, opts, false)?;
        let nu = model.order();
        let (_, d) = fourier_angles(model, opts);
        let mut shrink = 1.0;
        for _ in 0..12 {
            let xi = select_fourier_with(model, Direction::Up, ne, 0.0, opts, shrink)?;
            let eta = select_fourier_with(model, Direction::Down, ne, 0.0, opts, shrink)?;
            let y = xi.n_plus as f64 * xi.zeta;
            let zeta1 = step_for(d, ne_whf).min(xi.zeta);
            let y1 = ((1.0 - nu / 2.0) * y + ne_whf * LN_10).max(y);
            let n1 = (y1 / zeta1).ceil() as usize;
            let whf_plus = SinhContour::fourier(xi.omega1, xi.b, xi.omega, zeta1, n1)?;
            let whf_minus = SinhContour::fourier(eta.omega1, eta.b, eta.omega, zeta1, n1)?;
            let p = Self {
                ne,
                ne_whf,
                q,
                q_prime,
                xi,
                eta,
                eta_prime: eta,
                whf_plus,
                whf_minus,
                options: *opts,
                ftd_horizon,
            };
            match p.check_admissible(model) {
                Ok(()) => return Ok(p),
                Err(Error::Admissibility { .. }) => shrink *= 0.7,
                Err(e) => return Err(e),
            }
        }
        Err(param("contours", "no admissible deformation found"))
    }

    pub fn validate(&self) -> Result<()> {
        for c in [&self.xi, &self.eta, &self.eta_prime, &self.whf_plus, &self.whf_minus, &self.q, &self.q_prime] {
            c.validate()?;
        }
        if self.xi.kind != ContourKind::FourierUp || self.whf_plus.kind != ContourKind::FourierUp {
            return Err(param("xi", "xi grids must use upward contours"));
        }
        if self.eta.kind != ContourKind::FourierDown
            || self.eta_prime.kind != ContourKind::FourierDown
            || self.whf_minus.kind != ContourKind::FourierDown
        {
            return Err(param("eta", "eta grids must use downward contours"));
        }
        if self.q.kind != ContourKind::Bromwich || self.q_prime.kind != ContourKind::Bromwich {
            return Err(param("q", "q grids must be Bromwich contours"));
        }
        if self.q.n_minus != 0 {
            return Err(param("q", "the outer q grid is one-sided"));
        }
        if self.q.apex() <= 0.0 || self.q_prime.apex() <= 0.0 {
            return Err(param("q", "Bromwich apex must lie right of 0"));
        }
        let y = |c: &SinhContour| c.n_plus as f64 * c.zeta;
        if self.whf_plus.zeta > self.xi.zeta * (1.0 + 1e-12) || y(&self.whf_plus) < y(&self.xi) {
            return Err(param("whf_plus", "Wiener-Hopf grid must be finer and longer"));
        }
        if self.whf_minus.zeta > self.eta.zeta * (1.0 + 1e-12) || y(&self.whf_minus) < y(&self.eta) {
            return Err(param("whf_minus", "Wiener-Hopf grid must be finer and longer"));
        }
        Ok(())
    }

    /// Checks q + psi off the cut for every Bromwich node on every Fourier grid.
    pub fn check_admissible(&self, model: &LevyModel) -> Result<()> {
        let mut qs = self.q.grid().points;
        qs.extend(self.q_prime.grid().points);
        for c in [&self.xi, &self.eta, &self.whf_plus, &self.whf_minus] {
            admissibility_check(&qs, &c.grid().points, model)?;
        }
        if self.xi.apex() <= self.eta.apex() {
            return Err(Error::Admissibility {
                q: C64::new(f64::NAN, f64::NAN),
                xi: C64::new(0.0, self.xi.apex()),
                reason: "upper contour must lie above the lower contour".into(),
            });
        }
        Ok(())
    }

    /// Same rule with all deformation angles multiplied by `k`.
    pub fn with_angle_scale(model: &LevyModel, base: &SchemeParams, big_t: f64, t: f64, k: f64) -> Result<Self> {
        let mut opts = base.options;
        opts.angle_scale *= k;
        Self::design(model, base.ne, base.ne_whf, big_t, t, &opts, base.ftd_horizon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{trapezoid_sum, TrapezoidSpec};

    #[test]
    fn flat_contour_is_real_line() {
        let c = SinhContour::fourier(0.0, 1.0, 0.0, 0.1, 5).unwrap();
        assert_eq!(c.point(0.0), C64::new(0.0, 0.0));
        assert!((c.point(1.0) - C64::new(1f64.sinh(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn down_wings_point_down() {
        let c = SinhContour::fourier(-0.5, 1.0, -0.4, 0.2, 30).unwrap();
        let (p, _) = c.nodes_and_weights();
        let n = p.len();
        assert!(p[0].im < 0.0 && p[n - 1].im < 0.0);
        assert!(p[n - 1].im < p[n - 2].im && p[0].im < p[1].im);
        assert!(p[0].re < 0.0 && p[n - 1].re > 0.0);
    }

    #[test]
    fn bromwich_apex_and_wings() {
        let c = SinhContour::bromwich(5.0, 3.0, PI / 10.0, 0.1, 40, false).unwrap();
        assert!((c.apex() - c.point(0.0).re).abs() < 1e-14);
        let (p, _) = c.nodes_and_weights();
        assert!(p[0].re < c.apex() && p[p.len() - 1].re < c.apex());
        assert!(p[0].im < 0.0 && p[p.len() - 1].im > 0.0);
    }

    #[test]
    fn deformed_gaussian_integral() {
        let c = SinhContour::fourier(0.0, 1.0, 0.3, 0.05, 200).unwrap();
        let spec = TrapezoidSpec::symmetric(c.zeta, 200);
        let v = trapezoid_sum(|y| (-c.point(y) * c.point(y)).exp() * c.derivative(y), &spec).unwrap();
        assert!((v - C64::new(PI.sqrt(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn kind_invariants() {
        assert!(SinhContour::fourier(0.0, -1.0, 0.1, 0.1, 3).is_err());
        assert!(SinhContour::bromwich(1.0, 1.0, -0.1, 0.1, 3, true).is_err());
        assert!(SinhContour::fourier(0.0, 1.0, 1.6, 0.1, 3).is_err());
    }

    #[test]
    fn fourier_sizing_monotone_in_ne() {
        let m = LevyModel::kobol(1.2, -2.0, 1.0, 0.0, 0.1).unwrap();
        let a = select_fourier_params(&m, Direction::Up, 8.0, 0.0).unwrap();
        let b = select_fourier_params(&m, Direction::Up, 11.0, 0.0).unwrap();
        assert!(a.zeta > b.zeta);
        assert!(a.n_plus < b.n_plus);
        let dn = select_fourier_params(&m, Direction::Down, 8.0, 0.0).unwrap();
        assert!(dn.omega < 0.0 && dn.apex() < 0.0 && a.apex() > 0.0);
        assert!(dn.apex() > -2.0 && a.apex() < 1.0);
    }

    #[test]
    fn gwr_ray_nodes() {
        let r = gwr_ray(0.5, 2, 0.0);
        assert_eq!(r.len(), 4);
        assert!((r[0] - 2.0 * std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn admissibility() {
        let bm = LevyModel::brownian(1.0, 0.0).unwrap();
        let bad = admissibility_check(&[C64::new(1.0, 0.0)], &[C64::new(0.0, 2.0)], &bm);
        assert!(matches!(bad, Err(Error::Admissibility { .. })));
        assert!(admissibility_check(&[], &[], &bm).is_ok());
        let m = LevyModel::kobol(1.2, -2.0, 1.0, 0.0, 0.1).unwrap();
        let c = select_fourier_params(&m, Direction::Down, 8.0, 0.0).unwrap();
        let qs: Vec<C64> = (1..20).map(|k| C64::new(k as f64 * 0.7, 0.0)).collect();
        assert!(admissibility_check(&qs, &c.grid().points, &m).is_ok());
    }
}
