//! Batch evaluation, benchmark reports, oracle spot checks and Wiener-Hopf
//! factor dumps behind the `levy-triple` binary.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::Serialize;

use levy_triple::contours::{select_fourier_params, Direction};
use levy_triple::joint_cpdf::{regime_gate, triple_batch, EngineConfig, Method, TripleQuery};
use levy_triple::oracle::{bm_triple_cpdf, mc_triple_batch, McConfig, Sampler};
use levy_triple::reference::benchmark;
use levy_triple::wiener_hopf::WhfSolver;
use levy_triple::{LevyModel, SchemeParams};

use config::{Format, GridSpec, Resolved, RunConfig};
use output::{BenchRow, OracleRow, Row, WhfRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {reason}")]
    Field { path: String, reason: String },
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] levy_triple::Error),
    #[error("{} of {} queries rejected:\n{}", .rejected.len(), .total, .rejected.join("\n"))]
    Rejected { rejected: Vec<String>, total: usize },
}

impl CliError {
    pub fn field(path: &str, reason: impl Into<String>) -> Self {
        CliError::Field {
            path: path.to_string(),
            reason: reason.into(),
        }
    }

    /// Process exit code: 2 for invalid input, 3 for rejected queries, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Field { .. } => 2,
            CliError::Rejected { .. } => 3,
            _ => 1,
        }
    }
}

/// Command-line overrides shared by `run` and `bench`.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub method: Option<Method>,
    pub ne: Option<f64>,
    pub ne_whf: Option<f64>,
    pub dh: Option<f64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(m) = self.method {
            cfg.method = m;
        }
        if let Some(ne) = self.ne {
            cfg.scheme.ne = Some(ne);
        }
        if let Some(w) = self.ne_whf {
            cfg.scheme.ne_whf = Some(w);
        }
        if let Some(dh) = self.dh {
            cfg.scheme.dh = Some(dh);
        }
        if let Some(n) = self.threads {
            cfg.threads = n;
        }
        if let Some(p) = &self.out {
            cfg.output.path = Some(p.display().to_string());
        }
        if let Some(f) = self.format {
            cfg.output.format = f;
        }
    }
}

/// Installs the global rayon pool; later calls keep the first size.
pub fn set_threads(n: usize) {
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
}

/// Everything needed to re-run a batch: the config with explicit grids and
/// scheme values, plus the resolved contours.
#[derive(Serialize)]
pub struct Sidecar<'a> {
    pub config: RunConfig,
    pub engine: &'a EngineConfig,
    pub scheme: Option<&'a SchemeParams>,
    pub points: usize,
    pub runtime_s: f64,
}

/// The config as it was executed, with every default spelled out.
pub fn echo(r: &Resolved) -> RunConfig {
    let mut c = r.config.clone();
    c.query.a1 = GridSpec::List(r.a1.clone());
    c.query.a2 = GridSpec::List(r.a2.clone());
    let e = &r.engine;
    c.scheme.ne = Some(e.ne);
    c.scheme.ne_whf = Some(e.ne_whf);
    c.scheme.dh = Some(e.dh);
    c.scheme.gwr_nodes = Some(2 * e.gwr.m);
    c.scheme.gwr_shift = Some(e.gwr.shift);
    c.scheme.pair_scale = Some(e.pair_scale.unwrap_or(0.0));
    c.scheme.ftd_horizon = Some(e.ftd_horizon);
    c
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".scheme.json");
    PathBuf::from(s)
}

fn rejections(r: &Resolved) -> Vec<String> {
    let q = &r.config.query;
    let gate = regime_gate(&r.model, r.config.method).err();
    r.points()
        .iter()
        .filter_map(|&(a1, a2)| {
            let why = TripleQuery::new(a1, a2, q.big_t, q.t).err().or_else(|| gate.clone())?;
            Some(format!("  (a1={a1}, a2={a2}): {why}"))
        })
        .collect()
}

/// Evaluates the config; rows come back in (a1, a2) row-major order.
pub fn evaluate(r: &Resolved) -> Result<(Vec<Row>, Option<SchemeParams>, f64), CliError> {
    let rejected = rejections(r);
    let pts = r.points();
    if !rejected.is_empty() {
        return Err(CliError::Rejected {
            rejected,
            total: pts.len(),
        });
    }
    let q = &r.config.query;
    let start = Instant::now();
    let res = triple_batch(&r.model, q.big_t, q.t, &pts, r.config.method, &r.engine)?;
    let total = start.elapsed().as_secs_f64();
    let include = r.config.output.include_error_estimates;
    let scheme = res.first().map(|x| x.scheme.clone());
    let rows = pts
        .iter()
        .zip(&res)
        .map(|(&(a1, a2), x)| Row {
            a1,
            a2,
            big_t: q.big_t,
            t: q.t,
            value: x.value,
            error_estimate: include.then_some(x.error_estimate),
            method: x.method.name().to_string(),
            runtime: x.runtime_s,
        })
        .collect();
    for w in res.first().map(|x| x.warnings.as_slice()).unwrap_or(&[]) {
        eprintln!("warning: {w}");
    }
    Ok((rows, scheme, total))
}

/// `run`: evaluate, write the table and the sidecar.
pub fn run(cfg: RunConfig) -> Result<(), CliError> {
    let r = cfg.resolve()?;
    set_threads(r.config.threads);
    let (rows, scheme, total) = evaluate(&r)?;
    let out = r.config.output.path.as_ref().map(PathBuf::from);
    output::write_table(&rows, r.config.output.format, out.as_deref())?;
    if let Some(p) = &out {
        let side = Sidecar {
            config: echo(&r),
            engine: &r.engine,
            scheme: scheme.as_ref(),
            points: rows.len(),
            runtime_s: total,
        };
        output::write_json(&side, &sidecar_path(p))?;
    }
    Ok(())
}

/// One cell of the benchmark matrix.
pub struct BenchCase {
    pub nu: f64,
    pub method: Method,
    pub ne: f64,
    pub ne_whf: f64,
    pub dh: f64,
}

/// `bench`: method/tolerance matrix on the stored benchmark lattice.
pub fn bench(cases: &[BenchCase]) -> Result<Vec<BenchRow>, CliError> {
    let b = benchmark();
    let pts = b.points();
    let mut rows = Vec::new();
    for c in cases {
        let want = b
            .values(c.nu)
            .ok_or_else(|| CliError::field("nu", format!("no reference values for nu = {}", c.nu)))?;
        let model = b.model(c.nu)?;
        let cfg = EngineConfig {
            dh: c.dh,
            ..EngineConfig::with_ne(c.ne, c.ne_whf)
        };
        let start = Instant::now();
        let res = triple_batch(&model, b.big_t, b.t, &pts, c.method, &cfg)?;
        let secs = start.elapsed().as_secs_f64();
        let errs: Vec<f64> = res.iter().zip(&want).map(|(r, w)| (r.value - w).abs()).collect();
        rows.push(BenchRow {
            nu: c.nu,
            method: c.method.name().to_string(),
            ne: c.ne,
            ne_whf: c.ne_whf,
            dh: matches!(c.method, Method::DiscSinh | Method::DiscGwr).then_some(c.dh),
            points: pts.len(),
            min_error: errs.iter().cloned().fold(f64::INFINITY, f64::min),
            max_error: errs.iter().cloned().fold(0.0, f64::max),
            max_error_estimate: res.iter().map(|r| r.error_estimate).fold(0.0, f64::max),
            total_s: secs,
            per_point_s: secs / pts.len() as f64,
        });
    }
    Ok(rows)
}

/// `oracle`: Monte Carlo on the config lattice, with the Brownian triple law when it applies.
pub fn oracle(r: &Resolved, mc: &McConfig) -> Result<Vec<OracleRow>, CliError> {
    let q = &r.config.query;
    let pts = r.points();
    let start = Instant::now();
    let est = mc_triple_batch(&r.model, q.big_t, q.t, &pts, mc)?;
    let each = start.elapsed().as_secs_f64() / pts.len() as f64;
    pts.iter()
        .zip(est)
        .map(|(&(a1, a2), e)| {
            let exact = match (&r.model, r.model.drift() == 0.0) {
                (LevyModel::Brownian(b), true) => Some(bm_triple_cpdf(a1, a2, q.big_t, q.t, b.params().sigma)?.value),
                _ => None,
            };
            Ok(OracleRow {
                a1,
                a2,
                big_t: q.big_t,
                t: q.t,
                estimate: e.estimate,
                std_error: e.std_error,
                exact,
                sampler: match mc.sampler {
                    Sampler::Gaussian => "gaussian",
                    Sampler::CdfInversion => "cdf-inversion",
                }
                .to_string(),
                runtime: each,
            })
        })
        .collect()
}

/// `whf-dump`: both factors and the identity residual on a real xi grid.
pub fn whf_dump(model: &LevyModel, qs: &[C64], xi: &[f64], ne_whf: f64) -> Result<Vec<WhfRow>, CliError> {
    let down = select_fourier_params(model, Direction::Down, ne_whf, 0.0)?;
    let up = select_fourier_params(model, Direction::Up, ne_whf, 0.0)?;
    let solver = WhfSolver::new(model, &down, &up)?;
    let xs: Vec<C64> = xi.iter().map(|&x| C64::new(x, 0.0)).collect();
    let mut rows = Vec::with_capacity(qs.len() * xs.len());
    for &q in qs {
        if !(q.re > 0.0) {
            return Err(CliError::field("q", format!("{q} needs a positive real part")));
        }
        let fp = solver.phi_plus(q, &xs)?;
        let fm = solver.phi_minus(q, &xs)?;
        for k in 0..xs.len() {
            let res = fp[k] * fm[k] * (q + model.psi(xs[k])) / q - 1.0;
            rows.push(WhfRow {
                q_re: q.re,
                q_im: q.im,
                xi: xi[k],
                phi_plus_re: fp[k].re,
                phi_plus_im: fp[k].im,
                phi_minus_re: fm[k].re,
                phi_minus_im: fm[k].im,
                identity_residual: res.norm(),
            });
        }
    }
    Ok(rows)
}
