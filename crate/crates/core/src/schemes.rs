//! Discretization schemes driven by a sampled path: Euler, Wong-Zakai and
//! McShane, plus the exact solutions available in the degenerate and
//! Langevin cases.

use crate::error::{Error, Result};
use crate::fbm::FbmPath;
use crate::model::{LampertiMap, SdeProblem};
use serde::{Deserialize, Serialize};

/// Trajectories whose magnitude exceeds this abort with [`Error::BlowUp`].
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

/// Default number of RK4 substeps per grid cell for Wong-Zakai.
pub const DEFAULT_WZ_SUBSTEPS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Euler,
    WongZakai,
    McShane,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [Self::Euler, Self::WongZakai, Self::McShane];

    pub fn name(self) -> &'static str {
        match self {
            Self::Euler => "euler",
            Self::WongZakai => "wong-zakai",
            Self::McShane => "mcshane",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "euler" => Ok(Self::Euler),
            "wong-zakai" | "wong_zakai" => Ok(Self::WongZakai),
            "mcshane" => Ok(Self::McShane),
            other => Err(Error::InvalidConfig(format!("unknown scheme `{other}`"))),
        }
    }

    /// Run the scheme along `path`, returning the trajectory at the grid
    /// nodes (length n + 1).
    pub fn solve(self, problem: &SdeProblem, path: &FbmPath) -> Result<Vec<f64>> {
        match self {
            Self::Euler => euler_solve(problem, path),
            Self::WongZakai => wong_zakai_solve(problem, path, DEFAULT_WZ_SUBSTEPS),
            Self::McShane => mcshane_solve(problem, path),
        }
    }
}

fn check_state(x: f64, step: usize) -> Result<f64> {
    if x.is_finite() && x.abs() <= BLOW_UP_THRESHOLD {
        Ok(x)
    } else {
        Err(Error::BlowUp { step })
    }
}

/// Explicit Euler: X_{k+1} = X_k + a(X_k) dt + sigma(X_k) dB_k.
pub fn euler_solve(problem: &SdeProblem, path: &FbmPath) -> Result<Vec<f64>> {
    let n = path.grid.steps();
    let dt = path.grid.spacing();
    let mut traj = Vec::with_capacity(n + 1);
    let mut x = problem.x0;
    traj.push(x);
    for k in 0..n {
        let db = path.values[k + 1] - path.values[k];
        x += problem.a.eval(x)? * dt + problem.sigma.eval(x)? * db;
        traj.push(check_state(x, k + 1)?);
    }
    Ok(traj)
}

/// One McShane step: the third-order Taylor update at state `x` for time
/// step `dt` and driver increment `db`.
pub fn mcshane_step(problem: &SdeProblem, x: f64, dt: f64, db: f64) -> Result<f64> {
    let a = problem.a.eval(x)?;
    let a1 = problem.a.eval_d1(x)?;
    let s = problem.sigma.eval(x)?;
    let s1 = problem.sigma.eval_d1(x)?;
    let s2 = problem.sigma.eval_d2(x)?;
    Ok(x + a * dt
        + s * db
        + 0.5 * s * s1 * db * db
        + 0.5 * (a * s1 + a1 * s) * db * dt
        + 0.5 * a * a1 * dt * dt
        + (s * s * s2 + s * s1 * s1) * db * db * db / 6.0)
}

/// Third-order strong scheme of McShane type.
pub fn mcshane_solve(problem: &SdeProblem, path: &FbmPath) -> Result<Vec<f64>> {
    let n = path.grid.steps();
    let dt = path.grid.spacing();
    let mut traj = Vec::with_capacity(n + 1);
    let mut x = problem.x0;
    traj.push(x);
    for k in 0..n {
        let db = path.values[k + 1] - path.values[k];
        x = mcshane_step(problem, x, dt, db)?;
        traj.push(check_state(x, k + 1)?);
    }
    Ok(traj)
}

/// Wong-Zakai approximation: on each cell the random ODE
/// x' = a(x) + (dB_k / dt) sigma(x) is integrated by RK4 with `substeps`
/// internal steps.
pub fn wong_zakai_solve(problem: &SdeProblem, path: &FbmPath, substeps: usize) -> Result<Vec<f64>> {
    if substeps == 0 {
        return Err(Error::InvalidConfig("substeps must be positive".into()));
    }
    let n = path.grid.steps();
    let dt = path.grid.spacing();
    let h = dt / substeps as f64;
    let mut traj = Vec::with_capacity(n + 1);
    let mut x = problem.x0;
    traj.push(x);
    for k in 0..n {
        let rate = (path.values[k + 1] - path.values[k]) / dt;
        let f = |x: f64| -> Result<f64> { Ok(problem.a.eval(x)? + rate * problem.sigma.eval(x)?) };
        for _ in 0..substeps {
            let k1 = f(x)?;
            let k2 = f(x + 0.5 * h * k1)?;
            let k3 = f(x + 0.5 * h * k2)?;
            let k4 = f(x + h * k3)?;
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            check_state(x, k + 1)?;
        }
        traj.push(check_state(x, k + 1)?);
    }
    Ok(traj)
}

/// Exact solution in the degenerate case a = c sigma:
/// X_t = theta^{-1}(theta(x0) + (a/sigma)(x0) t + B_t), evaluated at the grid
/// nodes of `path`.
pub fn exact_degenerate_solution(map: &LampertiMap, path: &FbmPath) -> Result<Vec<f64>> {
    let problem = map.problem();
    let c = problem.a.eval(problem.x0)? / problem.sigma.eval(problem.x0)?;
    let anchor = map.anchor();
    let n = path.grid.steps();
    let mut traj = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = path.grid.node(k);
        traj.push(map.theta_inverse(anchor + c * t + path.values[k])?);
    }
    Ok(traj)
}

/// Exact solution of the Langevin equation dX = lambda X dt + dB:
/// X_t = e^{lambda t} (x0 + e^{-lambda t} B_t + lambda int_0^t e^{-lambda s} B_s ds),
/// with the integral computed by composite Simpson on the path grid.
pub fn langevin_exact_solution(lambda: f64, x0: f64, path: &FbmPath) -> Result<Vec<f64>> {
    let n = path.grid.steps();
    if n % 2 != 0 && n != 1 {
        return Err(Error::InvalidConfig(
            "Langevin exact solution needs an even step count".into(),
        ));
    }
    let dt = path.grid.spacing();
    let integrand: Vec<f64> = (0..=n)
        .map(|k| (-lambda * path.grid.node(k)).exp() * path.values[k])
        .collect();
    let mut traj = Vec::with_capacity(n + 1);
    traj.push(x0);
    // running composite Simpson over pairs of cells; odd nodes get the
    // midpoint of the enclosing Simpson pair plus a local trapezoid split
    let mut acc = 0.0;
    for k in 1..=n {
        let integral = if k % 2 == 0 {
            acc += dt / 3.0 * (integrand[k - 2] + 4.0 * integrand[k - 1] + integrand[k]);
            acc
        } else {
            acc + 0.5 * dt * (integrand[k - 1] + integrand[k])
        };
        let t = path.grid.node(k);
        traj.push((lambda * t).exp()
            * (x0 + (-lambda * t).exp() * path.values[k] + lambda * integral));
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{CholeskySampler, FbmPath, Hurst, TimeGrid};
    use crate::model::ProblemConfig;
    use approx::assert_relative_eq;

    fn problem(drift: &str, diffusion: &str, x0: f64) -> SdeProblem {
        ProblemConfig {
            hurst: 0.75,
            x0,
            drift: drift.into(),
            diffusion: diffusion.into(),
            params: Default::default(),
        }
        .build()
        .unwrap()
    }

    fn zero_path(n: usize) -> FbmPath {
        FbmPath {
            grid: TimeGrid::new(n).unwrap(),
            values: vec![0.0; n + 1],
            hurst: Hurst::new(0.75).unwrap(),
            stream_id: 0,
        }
    }

    fn sample_path(n: usize, seed: u64) -> FbmPath {
        let sampler = CholeskySampler::new(n, Hurst::new(0.75).unwrap()).unwrap();
        let mut rng = crate::rng::stream(seed, 0);
        sampler.sample(&mut rng, 0)
    }

    #[test]
    fn mcshane_step_terms() {
        // a = 0, sigma = x at x = 1, dt = 0, db = 0.1:
        // 1 + 0.1 + 0.1^2/2 + 0.1^3/6
        let p = problem("0", "x", 1.0);
        let v = mcshane_step(&p, 1.0, 0.0, 0.1).unwrap();
        assert_relative_eq!(v, 1.0 + 0.1 + 0.005 + 0.001 / 6.0, epsilon = 1e-15);
        // drift-only terms: a = x, sigma = 0 is not allowed through the
        // Lamperti path but the stepper itself accepts it:
        // x + a dt + a a' dt^2 / 2
        let p = problem("x", "0", 1.0);
        let v = mcshane_step(&p, 1.0, 0.5, 0.0).unwrap();
        assert_relative_eq!(v, 1.0 + 0.5 + 0.125, epsilon = 1e-15);
    }

    #[test]
    fn zero_noise_reduces_to_ode() {
        // dX = X dt, x0 = 1: X_1 = e
        let p = problem("x", "1", 1.0);
        let path = zero_path(64);
        let wz = wong_zakai_solve(&p, &path, 8).unwrap();
        assert_relative_eq!(*wz.last().unwrap(), std::f64::consts::E, epsilon = 1e-10);
        let eu = euler_solve(&p, &path).unwrap();
        assert_relative_eq!(*eu.last().unwrap(), std::f64::consts::E, max_relative = 2e-2);
        let mc = mcshane_solve(&p, &path).unwrap();
        assert_relative_eq!(*mc.last().unwrap(), std::f64::consts::E, max_relative = 2e-4);
    }

    #[test]
    fn langevin_exact_zero_noise() {
        let path = zero_path(32);
        let traj = langevin_exact_solution(1.0, 0.1, &path).unwrap();
        for (k, &v) in traj.iter().enumerate() {
            assert_relative_eq!(v, 0.1 * (path.grid.node(k)).exp(), epsilon = 1e-13);
        }
    }

    #[test]
    fn langevin_exact_matches_fine_schemes() {
        // self-consistency on a random path: exact vs very fine McShane
        let fine = sample_path(4096, 11);
        let exact = langevin_exact_solution(1.0, 0.1, &fine).unwrap();
        let mc = mcshane_solve(&problem("x", "1", 0.1), &fine).unwrap();
        assert_relative_eq!(exact.last().unwrap(), mc.last().unwrap(), epsilon = 1e-4);
    }

    #[test]
    fn schemes_converge_to_langevin_exact() {
        let p = problem("x", "1", 0.1);
        let fine = sample_path(1024, 5);
        let exact = *langevin_exact_solution(1.0, 0.1, &fine).unwrap().last().unwrap();
        for scheme in SchemeKind::ALL {
            let err_at = |n: usize| {
                let coarse = crate::fbm::subsample(&fine, 1024 / n).unwrap();
                let approx_val = *scheme.solve(&p, &coarse).unwrap().last().unwrap();
                (approx_val - exact).abs()
            };
            // per-path errors fluctuate, so only compare the extremes
            assert!(err_at(256) < err_at(16), "{}", scheme.name());
            assert!(err_at(256) < 5e-3, "{}", scheme.name());
        }
    }

    #[test]
    fn degenerate_exact_matches_fine_wong_zakai() {
        let p = problem("2+sin(x)", "2+sin(x)", 0.1);
        let map = LampertiMap::new(&p).unwrap();
        let fine = sample_path(2048, 3);
        let exact = exact_degenerate_solution(&map, &fine).unwrap();
        assert_relative_eq!(exact[0], 0.1, epsilon = 1e-9);
        let wz = wong_zakai_solve(&p, &fine, 8).unwrap();
        assert_relative_eq!(exact.last().unwrap(), wz.last().unwrap(), epsilon = 1e-3);
    }

    #[test]
    fn degenerate_exact_zero_noise() {
        // a = sigma: theta(X_t) = theta(x0) + t, pure drift flow
        let p = problem("2+sin(x)", "2+sin(x)", 0.1);
        let map = LampertiMap::new(&p).unwrap();
        let traj = exact_degenerate_solution(&map, &zero_path(16)).unwrap();
        for (k, &v) in traj.iter().enumerate() {
            let t = k as f64 / 16.0;
            assert_relative_eq!(map.theta(v).unwrap(), map.anchor() + t, epsilon = 1e-9);
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let p = problem("x^3", "1", 100.0);
        let err = euler_solve(&p, &zero_path(4)).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. }));
    }

    #[test]
    fn scheme_names_roundtrip() {
        for s in SchemeKind::ALL {
            assert_eq!(SchemeKind::parse(s.name()).unwrap(), s);
        }
        assert!(SchemeKind::parse("milstein").is_err());
    }
}
