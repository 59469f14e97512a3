//! The SDE instance dX = a(X)dt + sigma(X)dB on [0, 1]: commutator and
//! degeneracy status, and the Lamperti transform with its inverse and the
//! reduced drift g.

use crate::coeff::{CoefficientFn, Params, PROBE_POINTS};
use crate::error::{Error, Result};
use crate::fbm::Hurst;
use crate::quad;
use serde::{Deserialize, Serialize};
use std::cell::Cell;

/// Full instance of the model equation.
#[derive(Debug, Clone)]
pub struct SdeProblem {
    pub hurst: Hurst,
    pub x0: f64,
    pub a: CoefficientFn,
    pub sigma: CoefficientFn,
}

/// JSON problem configuration:
/// `{"hurst": 0.75, "x0": 0.1, "drift": "l*x", "diffusion": "1", "params": {"l": 1.0}}`
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProblemConfig {
    pub hurst: f64,
    pub x0: f64,
    pub drift: String,
    pub diffusion: String,
    #[serde(default)]
    pub params: Params,
}

impl ProblemConfig {
    pub fn build(&self) -> Result<SdeProblem> {
        Ok(SdeProblem {
            hurst: Hurst::for_sde(self.hurst)?,
            x0: self.x0,
            a: CoefficientFn::new(&self.drift, self.params.clone())?,
            sigma: CoefficientFn::new(&self.diffusion, self.params.clone())?,
        })
    }
}

impl SdeProblem {
    /// (a' sigma - a sigma')(x), the commutator whose identical vanishing
    /// characterizes the degenerate case.
    pub fn commutator(&self, x: f64) -> Result<f64> {
        Ok(self.a.eval_d1(x)? * self.sigma.eval(x)? - self.a.eval(x)? * self.sigma.eval_d1(x)?)
    }

    /// h(x) = (a' - a sigma'/sigma)(x), the reduced-drift derivative pulled
    /// back to the original coordinate.
    pub fn reduced_drift_derivative_at(&self, x: f64) -> Result<f64> {
        let s = self.sigma.eval(x)?;
        if s == 0.0 {
            return Err(Error::SigmaNotPositive(x));
        }
        Ok(self.a.eval_d1(x)? - self.a.eval(x)? * self.sigma.eval_d1(x)? / s)
    }

    /// True when the problem is exactly the Langevin pattern a = lambda x,
    /// sigma = 1 (probed structurally); returns lambda.
    pub fn langevin_lambda(&self) -> Option<f64> {
        let lambda = self.a.eval_d1(0.0).ok()?;
        let probes = 21;
        for i in 0..probes {
            let x = -5.0 + 10.0 * i as f64 / (probes - 1) as f64;
            if (self.sigma.eval(x).ok()? - 1.0).abs() > 1e-12 {
                return None;
            }
            if (self.a.eval(x).ok()? - lambda * x).abs() > 1e-12 * (1.0 + x.abs()) {
                return None;
            }
        }
        Some(lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    Degenerate,
    NonDegenerate,
    Inconclusive,
}

/// Floating-point cutoffs realizing the paper's exact dichotomy.
#[derive(Debug, Clone, Copy)]
pub struct DegeneracyThresholds {
    /// |commutator| below this at every probe point counts as identically zero.
    pub identically_zero: f64,
    /// |commutator(x0)| above this certifies non-degeneracy (and condition
    /// (ND)).
    pub at_initial_value: f64,
}

impl Default for DegeneracyThresholds {
    fn default() -> Self {
        Self {
            identically_zero: 1e-12,
            at_initial_value: 1e-8,
        }
    }
}

/// Classify the problem by probing the commutator on a dense grid.
pub fn degeneracy_check(
    problem: &SdeProblem,
    probe_range: (f64, f64),
    thresholds: DegeneracyThresholds,
) -> Result<Degeneracy> {
    let (lo, hi) = probe_range;
    let mut max_abs: f64 = 0.0;
    for i in 0..PROBE_POINTS {
        let x = lo + (hi - lo) * i as f64 / (PROBE_POINTS - 1) as f64;
        max_abs = max_abs.max(problem.commutator(x)?.abs());
    }
    if max_abs <= thresholds.identically_zero {
        Ok(Degeneracy::Degenerate)
    } else if problem.commutator(problem.x0)?.abs() > thresholds.at_initial_value {
        Ok(Degeneracy::NonDegenerate)
    } else {
        Ok(Degeneracy::Inconclusive)
    }
}

/// The Lamperti map theta(x) = int_0^x 1/sigma, its inverse, and the reduced
/// drift. Theta values are memoized eagerly on a fixed lattice; queries add a
/// local quadrature correction.
pub struct LampertiMap {
    problem: SdeProblem,
    tolerance: f64,
    lattice_lo: f64,
    lattice_spacing: f64,
    lattice: Vec<f64>,
    anchor_x0: f64,
}

pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-12;
const LATTICE_RANGE: f64 = 12.0;
const LATTICE_SPACING: f64 = 1e-3;
const MAX_NEWTON_ITERATIONS: usize = 200;
const SIGMA_FLOOR: f64 = 1e-12;

impl LampertiMap {
    pub fn new(problem: &SdeProblem) -> Result<Self> {
        Self::with_tolerance(problem, DEFAULT_QUADRATURE_TOL)
    }

    pub fn with_tolerance(problem: &SdeProblem, tolerance: f64) -> Result<Self> {
        let lo = -LATTICE_RANGE;
        let count = (2.0 * LATTICE_RANGE / LATTICE_SPACING).round() as usize + 1;
        // index of the lattice node at x = 0
        let zero_idx = (count - 1) / 2;
        let mut lattice = vec![0.0; count];
        // reject sigma <= 0 at any lattice node before integrating 1/sigma
        for i in 0..count {
            let x = lo + i as f64 * LATTICE_SPACING;
            let s = problem.sigma.eval(x).unwrap_or(f64::NAN);
            if !(s > SIGMA_FLOOR) {
                return Err(Error::SigmaNotPositive(x));
            }
        }
        let violation = Cell::new(None);
        let problem_clone = problem.clone();
        {
            let integrand = |x: f64| {
                let s = problem_clone.sigma.eval(x).unwrap_or(f64::NAN);
                if !(s > SIGMA_FLOOR) {
                    if violation.get().is_none() {
                        violation.set(Some(x));
                    }
                    return 0.0;
                }
                1.0 / s
            };
            let cell_tol = tolerance / count as f64;
            let mut acc = 0.0;
            for i in zero_idx..count - 1 {
                let x0 = lo + i as f64 * LATTICE_SPACING;
                acc += quad::adaptive(&integrand, x0, x0 + LATTICE_SPACING, cell_tol);
                lattice[i + 1] = acc;
            }
            acc = 0.0;
            for i in (0..zero_idx).rev() {
                let x0 = lo + i as f64 * LATTICE_SPACING;
                acc -= quad::adaptive(&integrand, x0, x0 + LATTICE_SPACING, cell_tol);
                lattice[i] = acc;
            }
        }
        if let Some(x) = violation.get() {
            return Err(Error::SigmaNotPositive(x));
        }
        let mut map = Self {
            problem: problem.clone(),
            tolerance,
            lattice_lo: lo,
            lattice_spacing: LATTICE_SPACING,
            lattice,
            anchor_x0: 0.0,
        };
        map.anchor_x0 = map.theta(problem.x0)?;
        Ok(map)
    }

    pub fn problem(&self) -> &SdeProblem {
        &self.problem
    }

    /// theta(x0), cached at construction.
    pub fn anchor(&self) -> f64 {
        self.anchor_x0
    }

    /// theta(x): nearest cached lattice node plus a local quadrature
    /// correction to the configured absolute tolerance.
    pub fn theta(&self, x: f64) -> Result<f64> {
        let violation = Cell::new(None);
        let integrand = |xi: f64| {
            let s = self.problem.sigma.eval(xi).unwrap_or(f64::NAN);
            if !(s > SIGMA_FLOOR) {
                if violation.get().is_none() {
                    violation.set(Some(xi));
                }
                return 0.0;
            }
            1.0 / s
        };
        let hi = self.lattice_lo + (self.lattice.len() - 1) as f64 * self.lattice_spacing;
        let value = if x < self.lattice_lo {
            self.lattice[0] + quad::adaptive(&integrand, self.lattice_lo, x, self.tolerance)
        } else if x > hi {
            self.lattice[self.lattice.len() - 1] + quad::adaptive(&integrand, hi, x, self.tolerance)
        } else {
            let idx = (((x - self.lattice_lo) / self.lattice_spacing).round() as usize)
                .min(self.lattice.len() - 1);
            let node = self.lattice_lo + idx as f64 * self.lattice_spacing;
            self.lattice[idx] + quad::adaptive(&integrand, node, x, self.tolerance)
        };
        if let Some(xi) = violation.get() {
            return Err(Error::SigmaNotPositive(xi));
        }
        Ok(value)
    }

    /// Solve theta(x) = y by safeguarded Newton iteration using
    /// theta'(x) = 1/sigma(x); |theta(result) - y| <= 1e-13.
    pub fn theta_inverse(&self, y: f64) -> Result<f64> {
        let target_tol = 1e-13;
        let x0 = self.problem.x0;
        let sigma_x0 = self.problem.sigma.eval(x0)?;
        let mut x = x0 + sigma_x0 * (y - self.anchor_x0);

        // bracket by doubling
        let mut step = (sigma_x0 * (y - self.anchor_x0)).abs().max(1.0);
        let mut f = self.theta(x)? - y;
        let (mut lo, mut hi);
        if f == 0.0 {
            return Ok(x);
        } else if f > 0.0 {
            hi = x;
            lo = x - step;
            let mut iter = 0;
            while self.theta(lo)? - y > 0.0 {
                step *= 2.0;
                lo -= step;
                iter += 1;
                if iter > 128 {
                    return Err(Error::InverseIteration(y));
                }
            }
        } else {
            lo = x;
            hi = x + step;
            let mut iter = 0;
            while self.theta(hi)? - y < 0.0 {
                step *= 2.0;
                hi += step;
                iter += 1;
                if iter > 128 {
                    return Err(Error::InverseIteration(y));
                }
            }
        }

        for _ in 0..MAX_NEWTON_ITERATIONS {
            if f.abs() <= target_tol {
                return Ok(x);
            }
            let next = x - f * self.problem.sigma.eval(x)?;
            x = if next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
            f = self.theta(x)? - y;
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
        }
        Err(Error::InverseIteration(y))
    }

    /// Reduced drift g(y) = (a/sigma)(theta^{-1}(y)) and its derivative
    /// g'(y) = (a' - a sigma'/sigma)(theta^{-1}(y)).
    pub fn reduced_drift(&self, y: f64) -> Result<(f64, f64)> {
        let x = self.theta_inverse(y)?;
        let s = self.problem.sigma.eval(x)?;
        let g = self.problem.a.eval(x)? / s;
        let g_prime = self.problem.reduced_drift_derivative_at(x)?;
        Ok((g, g_prime))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Params;
    use approx::assert_relative_eq;

    fn problem(drift: &str, diffusion: &str, params: &[(&str, f64)], x0: f64) -> SdeProblem {
        let params: Params = params
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        ProblemConfig {
            hurst: 0.75,
            x0,
            drift: drift.into(),
            diffusion: diffusion.into(),
            params,
        }
        .build()
        .unwrap()
    }

    fn langevin() -> SdeProblem {
        problem("l*x", "1", &[("l", 1.0)], 0.1)
    }

    #[test]
    fn commutator_vanishes_when_coefficients_match() {
        let p = problem("2+sin(x)", "2+sin(x)", &[], 0.1);
        for i in 0..50 {
            let x = -3.0 + 6.0 * i as f64 / 49.0;
            assert!(p.commutator(x).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn commutator_langevin_is_lambda() {
        let p = langevin();
        for x in [-2.0, 0.0, 0.7, 3.0] {
            assert_relative_eq!(p.commutator(x).unwrap(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn commutator_symbolic_expansion() {
        // a = sin(x), sigma = 2+cos(x): a'sigma - a sigma' = cos(2+cos) + sin^2
        // = 2cos(x) + 1
        let p = problem("sin(x)", "2+cos(x)", &[], 0.1);
        for x in [-1.3, 0.0, 0.4, 2.2] {
            assert_relative_eq!(
                p.commutator(x).unwrap(),
                2.0 * x.cos() + 1.0,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn commutator_identity_with_quotient_rule() {
        // a'sigma - a sigma' = sigma^2 (a/sigma)'
        let p = problem("sin(x)", "2+cos(x)", &[], 0.1);
        for i in 0..100 {
            let x = -3.0 + 6.0 * i as f64 / 99.0;
            let sigma = p.sigma.eval(x).unwrap();
            let quotient_d = (p.a.eval_d1(x).unwrap() * sigma
                - p.a.eval(x).unwrap() * p.sigma.eval_d1(x).unwrap())
                / (sigma * sigma);
            assert_relative_eq!(
                p.commutator(x).unwrap(),
                sigma * sigma * quotient_d,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn degeneracy_classification() {
        let thr = DegeneracyThresholds::default();
        let d = degeneracy_check(&problem("2", "2", &[], 0.1), (-10.0, 10.0), thr).unwrap();
        assert_eq!(d, Degeneracy::Degenerate);
        let d = degeneracy_check(&langevin(), (-10.0, 10.0), thr).unwrap();
        assert_eq!(d, Degeneracy::NonDegenerate);
        // commutator 2x vanishes at x0 = 0 only
        let d = degeneracy_check(&problem("x^2", "1", &[], 0.0), (-10.0, 10.0), thr).unwrap();
        assert_eq!(d, Degeneracy::Inconclusive);
    }

    #[test]
    fn degenerate_for_scaled_sigma_corpus() {
        let thr = DegeneracyThresholds::default();
        for sigma in ["1", "2+sin(x)", "2+cos(x)", "3-tanh(x)"] {
            let drift = format!("1.7*({sigma})");
            let p = problem(&drift, sigma, &[], 0.1);
            assert_eq!(
                degeneracy_check(&p, (-10.0, 10.0), thr).unwrap(),
                Degeneracy::Degenerate,
                "sigma = {sigma}"
            );
        }
    }

    #[test]
    fn theta_constant_sigma() {
        let map = LampertiMap::new(&problem("0", "1", &[], 0.0)).unwrap();
        for x in [-3.0, -0.5, 0.0, 1.0, 2.5] {
            assert_relative_eq!(map.theta(x).unwrap(), x, epsilon = 1e-11);
        }
        let map2 = LampertiMap::new(&problem("0", "2", &[], 0.0)).unwrap();
        assert_relative_eq!(map2.theta(1.0).unwrap(), 0.5, epsilon = 1e-11);
    }

    #[test]
    fn theta_against_closed_form_antiderivative() {
        // int 1/(2+sin) = (2/sqrt 3) atan((2 tan(x/2)+1)/sqrt 3)
        let map = LampertiMap::new(&problem("0", "2+sin(x)", &[], 0.0)).unwrap();
        let anti = |x: f64| 2.0 / 3.0f64.sqrt() * (((2.0 * (x / 2.0).tan() + 1.0) / 3.0f64.sqrt()).atan());
        for x in [0.25, 0.5, 1.0, 1.5] {
            assert_relative_eq!(map.theta(x).unwrap(), anti(x) - anti(0.0), epsilon = 1e-10);
        }
    }

    #[test]
    fn theta_inverse_identity_and_roundtrip() {
        let map = LampertiMap::new(&problem("0", "1", &[], 0.0)).unwrap();
        assert_relative_eq!(map.theta_inverse(0.7).unwrap(), 0.7, epsilon = 1e-10);

        let map = LampertiMap::new(&problem("0", "2+sin(x)", &[], 0.1)).unwrap();
        let mut rng = crate::rng::stream(8, 0);
        use rand::Rng;
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(-5.0..5.0);
            let back = map.theta_inverse(map.theta(x).unwrap()).unwrap();
            assert!((back - x).abs() < 1e-9, "{x} -> {back}");
        }
    }

    #[test]
    fn theta_strictly_increasing() {
        let map = LampertiMap::new(&problem("0", "2+sin(x)", &[], 0.0)).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..200 {
            let x = -4.0 + 8.0 * i as f64 / 199.0;
            let v = map.theta(x).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn reduced_drift_examples() {
        // sigma = 1: g = a, g' = a'
        let map = LampertiMap::new(&problem("sin(x)", "1", &[], 0.0)).unwrap();
        let (g, gp) = map.reduced_drift(0.6).unwrap();
        assert_relative_eq!(g, 0.6f64.sin(), epsilon = 1e-9);
        assert_relative_eq!(gp, 0.6f64.cos(), epsilon = 1e-9);

        // a = sigma: g = 1, g' = 0
        let map = LampertiMap::new(&problem("2+sin(x)", "2+sin(x)", &[], 0.1)).unwrap();
        let (g, gp) = map.reduced_drift(0.3).unwrap();
        assert_relative_eq!(g, 1.0, epsilon = 1e-9);
        assert!(gp.abs() < 1e-9);

        // Langevin: identity theta, g(y) = y, g' = 1
        let map = LampertiMap::new(&langevin()).unwrap();
        let (g, gp) = map.reduced_drift(0.4).unwrap();
        assert_relative_eq!(g, 0.4, epsilon = 1e-9);
        assert_relative_eq!(gp, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn reduced_drift_derivative_matches_commutator() {
        // g'(theta(x)) * sigma(x) = commutator(x)
        let p = problem("sin(x)", "2+cos(x)", &[], 0.1);
        let map = LampertiMap::new(&p).unwrap();
        for x in [-1.0, 0.2, 0.9, 2.0] {
            let y = map.theta(x).unwrap();
            let (_, gp) = map.reduced_drift(y).unwrap();
            assert_relative_eq!(
                gp * p.sigma.eval(x).unwrap(),
                p.commutator(x).unwrap(),
                max_relative = 1e-7
            );
        }
    }

    #[test]
    fn positivity_violation_detected() {
        // sigma = x is nonpositive at 0; lattice construction must flag it
        assert!(matches!(
            LampertiMap::new(&problem("0", "x", &[], 0.5)),
            Err(Error::SigmaNotPositive(_))
        ));
    }

    #[test]
    fn config_roundtrip_and_langevin_detection() {
        let cfg = ProblemConfig {
            hurst: 0.75,
            x0: 0.1,
            drift: "l*x".into(),
            diffusion: "1".into(),
            params: [("l".to_string(), 1.0)].into_iter().collect(),
        };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ProblemConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        let p = back.build().unwrap();
        assert_eq!(p.langevin_lambda(), Some(1.0));
        assert!(problem("1", "2+sin(x)", &[], 0.1).langevin_lambda().is_none());
        assert!(ProblemConfig { hurst: 1.2, ..cfg }.build().is_err());
    }
}
