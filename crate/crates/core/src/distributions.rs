//! Asset and portfolio probability models: densities, analytic moments,
//! seeded samplers, and the small-volatility Gaussian limit.
//!
//! Prices are parameterized by the current price `x0`, the dimensionless
//! expected growth `mu` (price shift over `x0`) and the dimensionless
//! volatility `sigma` (standard deviation over `x0`). A log-normal asset is
//! the geometric-Brownian-motion step `x = x0 * exp(xi)` with `xi` normal;
//! its log-location is chosen so that `<x> = x0 * exp(mu)` exactly.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// resolves to inherent f64 methods when std is in the crate graph
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

const SQRT_TWO_PI: f64 = 2.506628274631000502;

/// Distribution family of a single asset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Log-normal prices on (0, inf); geometric Brownian motion step.
    LogNormal,
    /// Gaussian prices on (-inf, inf); the small-fluctuation limit.
    Gaussian,
}

/// A single asset's price model for one investment round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssetModel {
    family: Family,
    x0: f64,
    mu: f64,
    sigma: f64,
}

impl AssetModel {
    /// Log-normal asset. Requires `x0 > 0`, `sigma > 0`, all finite.
    pub fn log_normal(x0: f64, mu: f64, sigma: f64) -> Result<Self> {
        Self::new(Family::LogNormal, x0, mu, sigma)
    }

    /// Gaussian asset. Requires `x0 > 0`, `sigma > 0`, all finite.
    pub fn gaussian(x0: f64, mu: f64, sigma: f64) -> Result<Self> {
        Self::new(Family::Gaussian, x0, mu, sigma)
    }

    /// Construct with explicit family tag.
    pub fn new(family: Family, x0: f64, mu: f64, sigma: f64) -> Result<Self> {
        if !(x0.is_finite() && x0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "x0",
                message: format!("initial price must be finite and > 0, got {x0}"),
            });
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mu",
                message: format!("growth must be finite, got {mu}"),
            });
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                message: format!("volatility must be finite and > 0, got {sigma}"),
            });
        }
        Ok(AssetModel {
            family,
            x0,
            mu,
            sigma,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Mean of `ln x - ln x0` for the log-normal family: `mu - sigma^2 / 2`.
    pub(crate) fn log_location(&self) -> f64 {
        self.mu - 0.5 * self.sigma * self.sigma
    }

    /// Probability density at price `x` (units 1/currency).
    ///
    /// Log-normal support is (0, inf); non-positive `x` is a domain error.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain { name: "x", value: x });
        }
        match self.family {
            Family::LogNormal => {
                if x <= 0.0 {
                    return Err(Error::Domain { name: "x", value: x });
                }
                let z = (x.ln() - self.x0.ln() - self.mu + 0.5 * self.sigma * self.sigma)
                    / self.sigma;
                Ok((-0.5 * z * z).exp() / (SQRT_TWO_PI * self.sigma * x))
            }
            Family::Gaussian => {
                let sigma_hat = self.sigma * self.x0;
                let center = self.x0 + self.mu * self.x0;
                let z = (x - center) / sigma_hat;
                Ok((-0.5 * z * z).exp() / (SQRT_TWO_PI * sigma_hat))
            }
        }
    }

    /// First moment `<x>`.
    pub fn mean(&self) -> f64 {
        match self.family {
            Family::LogNormal => self.x0 * self.mu.exp(),
            Family::Gaussian => self.x0 * (1.0 + self.mu),
        }
    }

    /// Second moment `<x^2>`.
    pub fn second_moment(&self) -> f64 {
        match self.family {
            Family::LogNormal => {
                self.x0 * self.x0 * (2.0 * self.mu + self.sigma * self.sigma).exp()
            }
            Family::Gaussian => {
                let g = 1.0 + self.mu;
                self.x0 * self.x0 * (g * g + self.sigma * self.sigma)
            }
        }
    }

    /// Variance `<x^2> - <x>^2`.
    pub fn variance(&self) -> f64 {
        match self.family {
            Family::LogNormal => {
                let e2mu = (2.0 * self.mu).exp();
                self.x0 * self.x0 * e2mu * (self.sigma * self.sigma).exp_m1()
            }
            Family::Gaussian => self.x0 * self.x0 * self.sigma * self.sigma,
        }
    }

    /// Small-fluctuation limit: the Gaussian model centered at `x0 + mu*x0`
    /// with volatility `sigma*x0`, carrying the same `(x0, mu, sigma)`.
    pub fn gaussian_limit(&self) -> Result<AssetModel> {
        match self.family {
            Family::LogNormal => Ok(AssetModel {
                family: Family::Gaussian,
                ..*self
            }),
            Family::Gaussian => Err(Error::InvalidParameter {
                name: "family",
                message: format!("gaussian_limit expects a log-normal model, got {:?}", self.family),
            }),
        }
    }

    /// One price draw given a standard normal variate.
    fn draw(&self, z: f64) -> f64 {
        match self.family {
            Family::LogNormal => self.x0 * (self.log_location() + self.sigma * z).exp(),
            Family::Gaussian => self.x0 * (1.0 + self.mu + self.sigma * z),
        }
    }
}

/// Dependence structure across the assets of a portfolio.
#[derive(Debug, Clone, PartialEq)]
pub enum Dependence {
    /// Joint density factorizes over assets.
    Independent,
    /// Two log-normal assets with log-space correlation `rho` in [-1, 1].
    BivariateLogNormal {
        /// Correlation of the underlying normals.
        rho: f64,
    },
    /// Joint price draws observed directly; rows are samples, columns assets.
    EmpiricalSamples(Matrix),
}

/// A set of assets with a dependence structure.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioModel {
    assets: Vec<AssetModel>,
    dependence: Dependence,
}

impl PortfolioModel {
    /// Portfolio of mutually independent assets.
    pub fn independent(assets: Vec<AssetModel>) -> Result<Self> {
        if assets.is_empty() {
            return Err(Error::InvalidParameter {
                name: "assets",
                message: "portfolio needs at least one asset".into(),
            });
        }
        Ok(PortfolioModel {
            assets,
            dependence: Dependence::Independent,
        })
    }

    /// Two correlated log-normal assets.
    pub fn bivariate_log_normal(a: AssetModel, b: AssetModel, rho: f64) -> Result<Self> {
        if a.family() != Family::LogNormal || b.family() != Family::LogNormal {
            return Err(Error::InvalidParameter {
                name: "family",
                message: "bivariate dependence requires both assets log-normal".into(),
            });
        }
        if !(rho.is_finite() && (-1.0..=1.0).contains(&rho)) {
            return Err(Error::InvalidParameter {
                name: "rho",
                message: format!("correlation must lie in [-1, 1], got {rho}"),
            });
        }
        Ok(PortfolioModel {
            assets: vec![a, b],
            dependence: Dependence::BivariateLogNormal { rho },
        })
    }

    /// Portfolio described by observed joint price draws. `samples` rows are
    /// joint draws, columns match `assets` in order.
    pub fn empirical(assets: Vec<AssetModel>, samples: Matrix) -> Result<Self> {
        if assets.is_empty() {
            return Err(Error::InvalidParameter {
                name: "assets",
                message: "portfolio needs at least one asset".into(),
            });
        }
        if samples.rows() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: samples.rows(),
            });
        }
        if samples.cols() != assets.len() {
            return Err(Error::InvalidParameter {
                name: "samples",
                message: format!(
                    "sample matrix has {} columns but the portfolio has {} assets",
                    samples.cols(),
                    assets.len()
                ),
            });
        }
        if samples.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "samples",
                message: "sampled prices must all be finite".into(),
            });
        }
        Ok(PortfolioModel {
            assets,
            dependence: Dependence::EmpiricalSamples(samples),
        })
    }

    /// Number of assets `L`.
    pub fn len(&self) -> usize {
        self.assets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assets.is_empty()
    }

    pub fn assets(&self) -> &[AssetModel] {
        &self.assets
    }

    pub fn dependence(&self) -> &Dependence {
        &self.dependence
    }

    /// Joint density of the bivariate log-normal pair at `(x1, x2)`.
    ///
    /// Undefined at `|rho| = 1` (degenerate); callers needing that limit
    /// should use [`PortfolioModel::analytic_moments`], which stays exact.
    pub fn pdf_bivariate(&self, x1: f64, x2: f64) -> Result<f64> {
        let rho = match self.dependence {
            Dependence::BivariateLogNormal { rho } => rho,
            _ => {
                return Err(Error::Unsupported {
                    what: "joint density is defined only for bivariate log-normal portfolios",
                })
            }
        };
        if rho.abs() >= 1.0 {
            return Err(Error::DegenerateDensity { rho });
        }
        if !(x1.is_finite() && x1 > 0.0) {
            return Err(Error::Domain { name: "x1", value: x1 });
        }
        if !(x2.is_finite() && x2 > 0.0) {
            return Err(Error::Domain { name: "x2", value: x2 });
        }
        let a = &self.assets[0];
        let b = &self.assets[1];
        let q1 = (x1.ln() - a.x0.ln() - a.mu + 0.5 * a.sigma * a.sigma) / a.sigma;
        let q2 = (x2.ln() - b.x0.ln() - b.mu + 0.5 * b.sigma * b.sigma) / b.sigma;
        let one_minus = 1.0 - rho * rho;
        let expo = -(q1 * q1 - 2.0 * rho * q1 * q2 + q2 * q2) / (2.0 * one_minus);
        Ok(expo.exp()
            / (2.0 * core::f64::consts::PI * a.sigma * b.sigma * one_minus.sqrt() * x1 * x2))
    }

    /// Closed-form first and second moments for analytic dependence
    /// structures. Empirical portfolios must use [`MomentSet::from_samples`].
    pub fn analytic_moments(&self) -> Result<MomentSet> {
        let l = self.len();
        let x0: Vec<f64> = self.assets.iter().map(|a| a.x0).collect();
        let m1: Vec<f64> = self.assets.iter().map(|a| a.mean()).collect();
        let mut m2 = Matrix::zeros(l, l);
        for i in 0..l {
            m2[(i, i)] = self.assets[i].second_moment();
        }
        match &self.dependence {
            Dependence::Independent => {
                for i in 0..l {
                    for j in (i + 1)..l {
                        let v = m1[i] * m1[j];
                        m2[(i, j)] = v;
                        m2[(j, i)] = v;
                    }
                }
            }
            Dependence::BivariateLogNormal { rho } => {
                let a = &self.assets[0];
                let b = &self.assets[1];
                let v = a.x0 * b.x0 * (a.mu + b.mu + rho * a.sigma * b.sigma).exp();
                m2[(0, 1)] = v;
                m2[(1, 0)] = v;
            }
            Dependence::EmpiricalSamples(_) => {
                return Err(Error::Unsupported {
                    what: "analytic moments of an empirical-samples portfolio; use sample moments",
                })
            }
        }
        MomentSet::new(x0, m1, m2)
    }

    /// Moments by the appropriate route: analytic for model dependence,
    /// sample moments for empirical portfolios.
    pub fn moments(&self) -> Result<MomentSet> {
        match &self.dependence {
            Dependence::EmpiricalSamples(samples) => {
                let x0: Vec<f64> = self.assets.iter().map(|a| a.x0).collect();
                MomentSet::from_samples(samples, &x0)
            }
            _ => self.analytic_moments(),
        }
    }

    /// `n` joint price draws, deterministic in `seed`. Equivalent to
    /// [`PortfolioModel::sample_stream`] with stream 0.
    pub fn sample(&self, seed: u64, n: usize) -> Result<Matrix> {
        self.sample_stream(seed, 0, n)
    }

    /// Seeded, stream-indexed sampling: streams are statistically independent
    /// for distinct indices and reproducible regardless of caller
    /// parallelism. Bivariate draws with `|rho| = 1` share a single normal,
    /// so comonotone columns match exactly.
    pub fn sample_stream(&self, seed: u64, stream: u64, n: usize) -> Result<Matrix> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                message: "need at least one draw".into(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let l = self.len();
        let mut out = Matrix::zeros(n, l);
        match &self.dependence {
            Dependence::Independent => {
                for r in 0..n {
                    for (c, asset) in self.assets.iter().enumerate() {
                        let z: f64 = rng.sample(StandardNormal);
                        out[(r, c)] = asset.draw(z);
                    }
                }
            }
            Dependence::BivariateLogNormal { rho } => {
                let rho = *rho;
                if rho.abs() == 1.0 {
                    // degenerate pair: one shared (or negated) normal per round
                    for r in 0..n {
                        let z: f64 = rng.sample(StandardNormal);
                        out[(r, 0)] = self.assets[0].draw(z);
                        out[(r, 1)] = self.assets[1].draw(rho * z);
                    }
                } else {
                    let tail = (1.0 - rho * rho).sqrt();
                    for r in 0..n {
                        let z1: f64 = rng.sample(StandardNormal);
                        let z2: f64 = rng.sample(StandardNormal);
                        out[(r, 0)] = self.assets[0].draw(z1);
                        out[(r, 1)] = self.assets[1].draw(rho * z1 + tail * z2);
                    }
                }
            }
            Dependence::EmpiricalSamples(_) => {
                return Err(Error::Unsupported {
                    what: "sampling an empirical-samples portfolio",
                })
            }
        }
        Ok(out)
    }
}

/// Discrete game: outcomes with probabilities and per-asset returns.
///
/// Returns are fractional gains per outcome; `-1` (total loss of the stake)
/// is allowed and bounds the admissible fraction away from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOutcomeModel {
    probabilities: Vec<f64>,
    returns: Matrix,
}

impl DiscreteOutcomeModel {
    /// Joint table: `probabilities[i]` is the chance of outcome `i`,
    /// `returns[(i, l)]` the return of asset `l` in that outcome.
    pub fn new(probabilities: Vec<f64>, returns: Matrix) -> Result<Self> {
        if probabilities.is_empty() || returns.cols() == 0 {
            return Err(Error::InvalidParameter {
                name: "probabilities",
                message: "need at least one outcome and one asset".into(),
            });
        }
        if returns.rows() != probabilities.len() {
            return Err(Error::InvalidParameter {
                name: "returns",
                message: format!(
                    "returns table has {} rows for {} outcome probabilities",
                    returns.rows(),
                    probabilities.len()
                ),
            });
        }
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidParameter {
                name: "probabilities",
                message: "probabilities must be finite and nonnegative".into(),
            });
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "probabilities",
                message: format!("probabilities sum to {total}, expected 1 within 1e-12"),
            });
        }
        if returns.as_slice().iter().any(|k| !k.is_finite() || *k < -1.0) {
            return Err(Error::InvalidParameter {
                name: "returns",
                message: "returns must be finite and >= -1".into(),
            });
        }
        Ok(DiscreteOutcomeModel {
            probabilities,
            returns,
        })
    }

    /// Single-asset convenience constructor.
    pub fn single(probabilities: Vec<f64>, returns: Vec<f64>) -> Result<Self> {
        let n = returns.len();
        Self::new(probabilities, Matrix::from_vec(n, 1, returns))
    }

    pub fn n_outcomes(&self) -> usize {
        self.probabilities.len()
    }

    pub fn n_assets(&self) -> usize {
        self.returns.cols()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn returns(&self) -> &Matrix {
        &self.returns
    }

    /// Expected return of asset `l`.
    pub fn expected_return(&self, l: usize) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| p * self.returns[(i, l)])
            .sum()
    }
}

/// First and second price moments with the initial prices they refer to;
/// the sole input of the Kelly system construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    x0: Vec<f64>,
    m1: Vec<f64>,
    m2: Matrix,
}

impl MomentSet {
    /// Validates shape, symmetry of `m2` (1e-12 relative) and nonnegative
    /// variances (`<x^2> >= <x>^2` within 1e-10 relative).
    pub fn new(x0: Vec<f64>, m1: Vec<f64>, m2: Matrix) -> Result<Self> {
        let l = x0.len();
        if l == 0 {
            return Err(Error::InvalidParameter {
                name: "x0",
                message: "moment set needs at least one asset".into(),
            });
        }
        if m1.len() != l || m2.rows() != l || m2.cols() != l {
            return Err(Error::InvalidParameter {
                name: "m1",
                message: format!(
                    "inconsistent dimensions: x0 has {l}, m1 has {}, m2 is {}x{}",
                    m1.len(),
                    m2.rows(),
                    m2.cols()
                ),
            });
        }
        if x0.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter {
                name: "x0",
                message: "initial prices must be finite and > 0".into(),
            });
        }
        if m1.iter().any(|v| !v.is_finite()) || m2.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "m1",
                message: "moments must be finite".into(),
            });
        }
        if m2.max_asymmetry() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "m2",
                message: format!(
                    "second-moment matrix asymmetry {:.3e} exceeds 1e-12 relative",
                    m2.max_asymmetry()
                ),
            });
        }
        for i in 0..l {
            let sq = m1[i] * m1[i];
            let scale = m2[(i, i)].abs().max(sq).max(f64::MIN_POSITIVE);
            if sq - m2[(i, i)] > 1e-10 * scale {
                return Err(Error::InvalidParameter {
                    name: "m2",
                    message: format!("negative variance for asset {i}: <x^2> < <x>^2"),
                });
            }
        }
        Ok(MomentSet { x0, m1, m2 })
    }

    /// Empirical moments of joint price draws: column means and the raw
    /// (1/N-normalized) second-moment matrix, not the unbiased covariance.
    pub fn from_samples(samples: &Matrix, x0: &[f64]) -> Result<Self> {
        let n = samples.rows();
        let l = samples.cols();
        if n < 2 {
            return Err(Error::InsufficientData { needed: 2, got: n });
        }
        if x0.len() != l {
            return Err(Error::InvalidParameter {
                name: "x0",
                message: format!("{} initial prices for {l} sampled columns", x0.len()),
            });
        }
        if samples.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "samples",
                message: "sampled prices must all be finite".into(),
            });
        }
        let inv_n = 1.0 / n as f64;
        let mut m1 = vec![0.0; l];
        for r in 0..n {
            for (c, m) in m1.iter_mut().enumerate() {
                *m += samples[(r, c)];
            }
        }
        for m in m1.iter_mut() {
            *m *= inv_n;
        }
        let mut m2 = Matrix::zeros(l, l);
        for i in 0..l {
            for j in i..l {
                let mut acc = 0.0;
                for r in 0..n {
                    acc += samples[(r, i)] * samples[(r, j)];
                }
                let v = acc * inv_n;
                m2[(i, j)] = v;
                m2[(j, i)] = v;
            }
        }
        MomentSet::new(x0.to_vec(), m1, m2)
    }

    pub fn len(&self) -> usize {
        self.x0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x0.is_empty()
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn m1(&self) -> &[f64] {
        &self.m1
    }

    pub fn m2(&self) -> &Matrix {
        &self.m2
    }
}
