//! Exact simulation of fractional Brownian motion on equidistant grids of
//! [0, 1], its piecewise-linear interpolant, and Gaussian conditioning.

use crate::error::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use std::io::Write;
use std::sync::Arc;

/// Hurst parameter. Pure-Gaussian operations accept any h in (0, 1); SDE work
/// additionally requires h > 1/2 (checked by the model layer).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hurst(f64);

impl Hurst {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.0 && h < 1.0 {
            Ok(Self(h))
        } else {
            Err(Error::Domain(format!("hurst index {h} outside (0, 1)")))
        }
    }

    /// Constructor for SDE work: requires 1/2 < h < 1.
    pub fn for_sde(h: f64) -> Result<Self> {
        if h > 0.5 && h < 1.0 {
            Ok(Self(h))
        } else {
            Err(Error::Domain(format!("hurst index {h} outside (1/2, 1)")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Equidistant grid t_i = i/n on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeGrid {
    n: usize,
}

impl TimeGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("step count must be positive".into()));
        }
        Ok(Self { n })
    }

    pub fn steps(self) -> usize {
        self.n
    }

    pub fn spacing(self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn node(self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }
}

/// Values of a sampled fBm path on an equidistant grid; values[0] = 0 exactly.
#[derive(Debug, Clone)]
pub struct FbmPath {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub hurst: Hurst,
    pub stream_id: u64,
}

/// R_H(s, t) = (s^{2H} + t^{2H} - |t - s|^{2H}) / 2.
pub fn covariance(s: f64, t: f64, h: Hurst) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("times ({s}, {t}) outside [0, 1]")));
    }
    let two_h = 2.0 * h.value();
    Ok(0.5 * (s.powf(two_h) + t.powf(two_h) - (t - s).abs().powf(two_h)))
}

/// Autocovariance of the fGn increments at lag k on an n-step grid:
/// E[dB_i dB_{i+k}] = Delta^{2H} (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2.
pub fn increment_covariance(lag: usize, n: usize, h: Hurst) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("step count must be positive".into()));
    }
    let two_h = 2.0 * h.value();
    let k = lag as f64;
    let delta = 1.0 / n as f64;
    Ok(0.5
        * delta.powf(two_h)
        * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h)))
}

/// Exact fBm sampler via Cholesky factorization of the grid covariance.
/// The factor is computed once and reused across paths.
pub struct CholeskySampler {
    grid: TimeGrid,
    hurst: Hurst,
    factor: Cholesky<f64, nalgebra::Dyn>,
}

impl CholeskySampler {
    pub fn new(n: usize, h: Hurst) -> Result<Self> {
        let grid = TimeGrid::new(n)?;
        let mut cov = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                cov[(i, j)] = covariance(grid.node(i + 1), grid.node(j + 1), h)?;
            }
        }
        let factor = Cholesky::new(cov).ok_or(Error::Factorization)?;
        Ok(Self {
            grid,
            hurst: h,
            factor,
        })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, stream_id: u64) -> FbmPath {
        let z: Vec<f64> = (0..self.grid.steps())
            .map(|_| rng.sample(StandardNormal))
            .collect();
        self.apply_normals(&z, stream_id)
    }

    /// Deterministic map from standard normals to a path.
    pub fn apply_normals(&self, z: &[f64], stream_id: u64) -> FbmPath {
        assert_eq!(z.len(), self.grid.steps());
        let correlated = self.factor.l() * DVector::from_column_slice(z);
        let mut values = Vec::with_capacity(self.grid.steps() + 1);
        values.push(0.0);
        values.extend(correlated.iter());
        FbmPath {
            grid: self.grid,
            values,
            hurst: self.hurst,
            stream_id,
        }
    }
}

/// Exact fBm sampler via circulant embedding of the fGn autocovariance
/// (Davies-Harte), O(n log n) per path after setup.
pub struct CirculantSampler {
    grid: TimeGrid,
    hurst: Hurst,
    sqrt_eigen: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

/// Eigenvalues below this are treated as invalid embeddings; values in
/// [-1e-9, 0) are clamped to 0 as floating-point noise.
pub const EIGENVALUE_TOLERANCE: f64 = -1e-9;

impl CirculantSampler {
    pub fn new(n: usize, h: Hurst) -> Result<Self> {
        let grid = TimeGrid::new(n)?;
        let eigen = circulant_eigenvalues(n, h)?;
        let m = 2 * n;
        let mut sqrt_eigen = vec![0.0; m];
        for (j, &lambda) in eigen.iter().enumerate() {
            if lambda < EIGENVALUE_TOLERANCE {
                return Err(Error::NegativeEigenvalue(lambda));
            }
            sqrt_eigen[j] = lambda.max(0.0).sqrt();
        }
        let fft = FftPlanner::new().plan_fft_forward(m);
        Ok(Self {
            grid,
            hurst: h,
            sqrt_eigen,
            fft,
        })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, stream_id: u64) -> FbmPath {
        let m = 2 * self.grid.steps();
        let z: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        self.apply_normals(&z, stream_id)
    }

    /// Deterministic map from 2n standard normals to a path. Consumption
    /// order: z[0] -> frequency 0, z[1] -> Nyquist, then pairs per frequency.
    pub fn apply_normals(&self, z: &[f64], stream_id: u64) -> FbmPath {
        let n = self.grid.steps();
        let m = 2 * n;
        assert_eq!(z.len(), m);
        let mf = m as f64;
        let mut spectrum = vec![Complex::new(0.0, 0.0); m];
        spectrum[0] = Complex::new(self.sqrt_eigen[0] * z[0] / mf.sqrt(), 0.0);
        spectrum[n] = Complex::new(self.sqrt_eigen[n] * z[1] / mf.sqrt(), 0.0);
        for j in 1..n {
            let scale = self.sqrt_eigen[j] / (2.0 * mf).sqrt();
            let w = Complex::new(scale * z[2 * j], scale * z[2 * j + 1]);
            spectrum[j] = w;
            spectrum[m - j] = w.conj();
        }
        self.fft.process(&mut spectrum);
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for s in spectrum.iter().take(n) {
            acc += s.re;
            values.push(acc);
        }
        FbmPath {
            grid: self.grid,
            values,
            hurst: self.hurst,
            stream_id,
        }
    }
}

/// Eigenvalues of the size-2n circulant embedding of the fGn autocovariance,
/// computed by FFT of the first row.
pub fn circulant_eigenvalues(n: usize, h: Hurst) -> Result<Vec<f64>> {
    let m = 2 * n;
    let mut row = vec![Complex::new(0.0, 0.0); m];
    for k in 0..=n {
        row[k] = Complex::new(increment_covariance(k, n, h)?, 0.0);
    }
    for k in (n + 1)..m {
        row[k] = row[m - k];
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut row);
    Ok(row.into_iter().map(|c| c.re).collect())
}

/// Piecewise-linear interpolation of the path at time t.
pub fn linear_interpolant(path: &FbmPath, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("time {t} outside [0, 1]")));
    }
    let n = path.grid.steps();
    let scaled = t * n as f64;
    let k = (scaled.floor() as usize).min(n - 1);
    let frac = scaled - k as f64;
    Ok(path.values[k] + frac * (path.values[k + 1] - path.values[k]))
}

/// E(B_t | B_{t_1}, ..., B_{t_n}) by Gaussian linear regression. The
/// deterministic node B_0 = 0 is excluded from the system.
pub fn conditional_mean(values_at_grid: &[f64], h: Hurst, query: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&query) {
        return Err(Error::Domain(format!("time {query} outside [0, 1]")));
    }
    let n = values_at_grid
        .len()
        .checked_sub(1)
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::Domain("need at least two grid values".into()))?;
    let grid = TimeGrid::new(n)?;
    let coeffs = conditional_mean_coefficients(n, h, query)?;
    let _ = grid;
    Ok(coeffs
        .iter()
        .zip(&values_at_grid[1..])
        .map(|(c, v)| c * v)
        .sum())
}

/// Regression coefficients c solving R c = r with R_{ij} = R_H(t_i, t_j)
/// and r_i = R_H(t_i, t).
pub fn conditional_mean_coefficients(n: usize, h: Hurst, query: f64) -> Result<Vec<f64>> {
    let grid = TimeGrid::new(n)?;
    let mut r_mat = DMatrix::zeros(n, n);
    let mut r_vec = DVector::zeros(n);
    for i in 0..n {
        r_vec[i] = covariance(grid.node(i + 1), query, h)?;
        for j in 0..n {
            r_mat[(i, j)] = covariance(grid.node(i + 1), grid.node(j + 1), h)?;
        }
    }
    let coeffs = Cholesky::new(r_mat)
        .ok_or(Error::LinearSolve)?
        .solve(&r_vec);
    Ok(coeffs.iter().copied().collect())
}

/// Restrict a fine path to every m-th node.
pub fn subsample(path: &FbmPath, factor: usize) -> Result<FbmPath> {
    if factor == 0 {
        return Err(Error::Domain("subsample factor must be positive".into()));
    }
    let fine = path.grid.steps();
    if fine % factor != 0 {
        return Err(Error::Divisibility { factor, fine });
    }
    let coarse = fine / factor;
    let values: Vec<f64> = (0..=coarse).map(|k| path.values[k * factor]).collect();
    Ok(FbmPath {
        grid: TimeGrid::new(coarse)?,
        values,
        hurst: path.hurst,
        stream_id: path.stream_id,
    })
}

/// CSV export: header `path_id,t,value`, one row per node, 17 significant
/// digits.
pub fn write_paths_csv<W: Write>(out: &mut W, paths: &[FbmPath]) -> Result<()> {
    writeln!(out, "path_id,t,value")?;
    for (id, path) in paths.iter().enumerate() {
        for (i, v) in path.values.iter().enumerate() {
            writeln!(out, "{id},{:.16e},{v:.16e}", path.grid.node(i))?;
        }
    }
    Ok(())
}
