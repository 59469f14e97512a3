//! Monte Carlo convergence studies: paired-path strong-error estimation
//! against exact or fine-grid references, log-log rate regression, weighted
//! interpolation-error studies, and on-disk experiment artifacts.

use crate::analysis;
use crate::error::{Error, Result};
use crate::fbm::{CirculantSampler, FbmPath};
use crate::model::{
    degeneracy_check, Degeneracy, DegeneracyThresholds, LampertiMap, ProblemConfig, SdeProblem,
};
use crate::schemes::{self, SchemeKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::PathBuf;

pub const DEFAULT_FINE_FACTOR: usize = 32;

/// A convergence-study specification. The fine grid has
/// `max(n_list) * fine_factor` steps and every coarse `n` must divide it.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub schemes: Vec<SchemeKind>,
    pub n_list: Vec<usize>,
    #[serde(default = "default_fine_factor")]
    pub fine_factor: usize,
    pub paths: usize,
    pub master_seed: u64,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_fine_factor() -> usize {
    DEFAULT_FINE_FACTOR
}

fn default_substeps() -> usize {
    schemes::DEFAULT_WZ_SUBSTEPS
}

impl ExperimentConfig {
    pub fn fine_steps(&self) -> usize {
        self.n_list.iter().copied().max().unwrap_or(0) * self.fine_factor
    }

    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("no schemes requested".into()));
        }
        if self.n_list.is_empty() {
            return Err(Error::InvalidConfig("empty n_list".into()));
        }
        if self.paths < 2 {
            return Err(Error::InvalidConfig("need at least 2 paths".into()));
        }
        if self.fine_factor == 0 || self.substeps == 0 {
            return Err(Error::InvalidConfig(
                "fine_factor and substeps must be positive".into(),
            ));
        }
        let fine = self.fine_steps();
        for &n in &self.n_list {
            if n == 0 || fine % n != 0 {
                return Err(Error::Divisibility { factor: n, fine });
            }
        }
        self.problem.build().map(|_| ())
    }
}

/// Which reference solution a study measures against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceKind {
    ExactDegenerate,
    LangevinExact(f64),
    FineWongZakai,
}

/// Exact references when available, otherwise the fine-grid Wong-Zakai
/// surrogate.
pub fn select_reference(problem: &SdeProblem) -> Result<ReferenceKind> {
    if let Some(lambda) = problem.langevin_lambda() {
        return Ok(ReferenceKind::LangevinExact(lambda));
    }
    let class = degeneracy_check(problem, (-10.0, 10.0), DegeneracyThresholds::default())?;
    if class == Degeneracy::Degenerate {
        Ok(ReferenceKind::ExactDegenerate)
    } else {
        Ok(ReferenceKind::FineWongZakai)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub scheme: SchemeKind,
    pub hurst: f64,
    pub n: usize,
    pub paths: usize,
    pub rms_error: f64,
    pub stderr: f64,
    pub scaled_error: f64,
    pub aborted_paths: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
}

pub const CSV_HEADER: &str = "scheme,hurst,n,paths,rms_error,stderr,scaled_error,aborted_paths";

impl ErrorTable {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{}",
                r.scheme.name(),
                r.hurst,
                r.n,
                r.paths,
                r.rms_error,
                r.stderr,
                r.scaled_error,
                r.aborted_paths
            )?;
        }
        Ok(())
    }
}

fn scheme_terminal(
    scheme: SchemeKind,
    problem: &SdeProblem,
    path: &FbmPath,
    substeps: usize,
) -> Result<Option<f64>> {
    let solved = match scheme {
        SchemeKind::WongZakai => schemes::wong_zakai_solve(problem, path, substeps),
        other => other.solve(problem, path),
    };
    match solved {
        Ok(traj) => Ok(Some(*traj.last().unwrap())),
        Err(Error::BlowUp { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn reference_terminal(
    kind: ReferenceKind,
    map: Option<&LampertiMap>,
    problem: &SdeProblem,
    fine: &FbmPath,
    substeps: usize,
) -> Result<f64> {
    match kind {
        ReferenceKind::ExactDegenerate => {
            let map = map.expect("degenerate reference needs a Lamperti map");
            let c = problem.a.eval(problem.x0)? / problem.sigma.eval(problem.x0)?;
            map.theta_inverse(map.anchor() + c + *fine.values.last().unwrap())
        }
        ReferenceKind::LangevinExact(lambda) => Ok(*schemes::langevin_exact_solution(
            lambda,
            problem.x0,
            fine,
        )?
        .last()
        .unwrap()),
        ReferenceKind::FineWongZakai => {
            Ok(*schemes::wong_zakai_solve(problem, fine, substeps)?.last().unwrap())
        }
    }
}

/// Paired-path strong-error study: each rng stream drives one fine path whose
/// reference terminal value is compared against every (scheme, n) cell on
/// coarsened copies of the same noise.
pub fn strong_error_study(cfg: &ExperimentConfig) -> Result<ErrorTable> {
    cfg.validate()?;
    let problem = cfg.problem.build()?;
    let reference = select_reference(&problem)?;
    if reference == ReferenceKind::ExactDegenerate {
        // fail fast on map-construction problems before the parallel loop
        LampertiMap::new(&problem)?;
    }
    let fine_n = cfg.fine_steps();
    let sampler = CirculantSampler::new(fine_n, problem.hurst)?;
    let cells = cfg.schemes.len() * cfg.n_list.len();

    // per path: squared terminal error per cell, or None when the scheme
    // aborted on blow-up
    let per_path: Vec<Vec<Option<f64>>> = (0..cfg.paths as u64)
        .into_par_iter()
        .map_init(
            || match reference {
                ReferenceKind::ExactDegenerate => Some(
                    LampertiMap::new(&problem).expect("map construction validated above"),
                ),
                _ => None,
            },
            |map, id| -> Result<Vec<Option<f64>>> {
                let mut rng = crate::rng::stream(cfg.master_seed, id);
                let fine = sampler.sample(&mut rng, id);
                let x_ref =
                    reference_terminal(reference, map.as_ref(), &problem, &fine, cfg.substeps)?;
                let mut out = Vec::with_capacity(cells);
                for &scheme in &cfg.schemes {
                    for &n in &cfg.n_list {
                        let coarse = crate::fbm::subsample(&fine, fine_n / n)?;
                        let value = scheme_terminal(scheme, &problem, &coarse, cfg.substeps)?;
                        out.push(value.map(|x| (x - x_ref).powi(2)));
                    }
                }
                Ok(out)
            },
        )
        .collect::<Result<_>>()?;

    let hurst = problem.hurst.value();
    let mut rows = Vec::with_capacity(cells);
    for (si, &scheme) in cfg.schemes.iter().enumerate() {
        for (ni, &n) in cfg.n_list.iter().enumerate() {
            let cell = si * cfg.n_list.len() + ni;
            let sq: Vec<f64> = per_path.iter().filter_map(|p| p[cell]).collect();
            let aborted = cfg.paths - sq.len();
            let (rms, stderr) = rms_with_jackknife(&sq);
            rows.push(ErrorRow {
                scheme,
                hurst,
                n,
                paths: cfg.paths,
                rms_error: rms,
                stderr,
                scaled_error: (n as f64).powf(hurst + 0.5) * rms,
                aborted_paths: aborted,
            });
        }
    }
    Ok(ErrorTable { rows })
}

/// RMS of squared-error samples with a leave-one-out jackknife standard
/// error.
fn rms_with_jackknife(sq: &[f64]) -> (f64, f64) {
    let m = sq.len();
    if m == 0 {
        return (f64::NAN, f64::NAN);
    }
    let total: f64 = sq.iter().sum();
    let rms = (total / m as f64).sqrt();
    if m < 2 {
        return (rms, f64::NAN);
    }
    let loo: Vec<f64> = sq
        .iter()
        .map(|&x| ((total - x) / (m as f64 - 1.0)).sqrt())
        .collect();
    let loo_mean = loo.iter().sum::<f64>() / m as f64;
    let var = (m as f64 - 1.0) / m as f64
        * loo.iter().map(|v| (v - loo_mean).powi(2)).sum::<f64>();
    (rms, var.sqrt())
}

/// Least-squares fit of log(rms) against log(n) for one scheme; returns
/// (slope, intercept, r^2).
pub fn rate_regression(table: &ErrorTable, scheme: SchemeKind) -> Result<(f64, f64, f64)> {
    let points: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r.scheme == scheme && r.rms_error > 0.0)
        .map(|r| ((r.n as f64).ln(), r.rms_error.ln()))
        .collect();
    if points.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "regression for {} needs >= 3 rows with positive rms, got {}",
            scheme.name(),
            points.len()
        )));
    }
    let m = points.len() as f64;
    let (sx, sy): (f64, f64) = points.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok((slope, intercept, r2))
}

/// How the weight process is produced in an interpolation-error study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSource {
    /// Deterministic Langevin weight lambda e^{lambda(1-t)}.
    Langevin,
    /// Pathwise weight computed along a fine Wong-Zakai trajectory.
    McWeight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpErrorRow {
    pub n: usize,
    pub paths: usize,
    /// MC estimate of E|int_0^1 Y_t (B_t - Btilde_t) dt|^2.
    pub mc_estimate: f64,
    pub stderr: f64,
    /// Exact evaluator value for deterministic weights.
    pub exact: Option<f64>,
    /// n^{2H+1}-scaled MC estimate.
    pub scaled: f64,
}

/// MC study of the weighted interpolation error E|int Y (B - Btilde)|^2 per
/// coarse n, with the deterministic-weight exact value alongside when
/// available.
pub fn interp_error_study(cfg: &ExperimentConfig, source: WeightSource) -> Result<Vec<InterpErrorRow>> {
    cfg.validate()?;
    let problem = cfg.problem.build()?;
    let lambda = match source {
        WeightSource::Langevin => Some(problem.langevin_lambda().ok_or_else(|| {
            Error::InvalidConfig("Langevin weight source needs a Langevin problem".into())
        })?),
        WeightSource::McWeight => None,
    };
    let fine_n = cfg.fine_steps();
    let dt = 1.0 / fine_n as f64;
    let sampler = CirculantSampler::new(fine_n, problem.hurst)?;

    // per path: int Y (B - Btilde) per coarse n
    let per_path: Vec<Vec<f64>> = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|id| -> Result<Vec<f64>> {
            let mut rng = crate::rng::stream(cfg.master_seed, id);
            let fine = sampler.sample(&mut rng, id);
            let weights: Vec<f64> = match lambda {
                Some(l) => (0..=fine_n)
                    .map(|k| l * (l * (1.0 - k as f64 * dt)).exp())
                    .collect(),
                None => {
                    let traj = schemes::wong_zakai_solve(&problem, &fine, cfg.substeps)?;
                    analysis::weight_path(&problem, &fine, &traj)?.y_values
                }
            };
            let mut out = Vec::with_capacity(cfg.n_list.len());
            for &n in &cfg.n_list {
                let stride = fine_n / n;
                let integrand = |k: usize| {
                    let j = (k / stride).min(n - 1);
                    let frac = (k - j * stride) as f64 / stride as f64;
                    let btilde = (1.0 - frac) * fine.values[j * stride]
                        + frac * fine.values[(j + 1) * stride];
                    weights[k] * (fine.values[k] - btilde)
                };
                let interior: f64 = (1..fine_n).map(integrand).sum();
                out.push(dt * (0.5 * integrand(0) + interior + 0.5 * integrand(fine_n)));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let hurst = problem.hurst.value();
    let m = cfg.paths as f64;
    cfg.n_list
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let sq: Vec<f64> = per_path.iter().map(|p| p[ni] * p[ni]).collect();
            let mean = sq.iter().sum::<f64>() / m;
            let var = sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
            let exact = match lambda {
                Some(l) => Some(analysis::exact_weighted_interp_error(
                    |t| l * (l * (1.0 - t)).exp(),
                    n,
                    problem.hurst,
                    8,
                )?),
                None => None,
            };
            Ok(InterpErrorRow {
                n,
                paths: cfg.paths,
                mc_estimate: mean,
                stderr: (var / m).sqrt(),
                exact,
                scaled: (n as f64).powf(2.0 * hurst + 1.0) * mean,
            })
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    config: ExperimentConfig,
    seed: u64,
    version: String,
    elapsed_seconds: f64,
}

/// Run a strong-error study and write `errors.csv`, `regression.csv`, and
/// `manifest.json` into the configured output directory. The CSV bytes are a
/// pure function of (config, seed).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ErrorTable> {
    let out_dir = cfg.output.clone().ok_or_else(|| {
        Error::InvalidConfig("run_experiment needs an output directory".into())
    })?;
    let start = std::time::Instant::now();
    let table = strong_error_study(cfg)?;
    std::fs::create_dir_all(&out_dir)?;

    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    std::fs::write(out_dir.join("errors.csv"), csv)?;

    let mut reg = String::from("scheme,slope,intercept,r2\n");
    for &scheme in &cfg.schemes {
        if let Ok((slope, intercept, r2)) = rate_regression(&table, scheme) {
            reg.push_str(&format!(
                "{},{slope:.16e},{intercept:.16e},{r2:.16e}\n",
                scheme.name()
            ));
        }
    }
    std::fs::write(out_dir.join("regression.csv"), reg)?;

    let manifest = Manifest {
        config: cfg.clone(),
        seed: cfg.master_seed,
        version: format!("v{}", env!("CARGO_PKG_VERSION")),
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_vec_pretty(&manifest)?,
    )?;
    Ok(table)
}
