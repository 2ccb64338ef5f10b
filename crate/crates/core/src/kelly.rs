//! Kelly fractions from first and second moments: the linear system
//! `M f = b` with `M_{ll'} = E[k_l k_{l'}]` and `b_l = E[k_l]`, its
//! closed-form single-asset specializations, and the solve with
//! singular-system handling.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

// resolves to inherent f64 methods when std is in the crate graph
#[allow(unused_imports)]
use num_traits::Float;

use crate::distributions::{AssetModel, MomentSet, PortfolioModel};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Relative rank tolerance: eigenvalues below this fraction of the largest
/// are treated as zero in the singular path.
const RANK_TOL: f64 = 1e-10;
/// Condition-number threshold separating the direct solve from the
/// minimum-norm least-squares fallback.
const CONDITION_LIMIT: f64 = 1e12;
/// Residual certificate: `|M f - b| <= RESIDUAL_TOL * (|M| |f| + |b|)`.
const RESIDUAL_TOL: f64 = 1e-10;

/// Heuristic validity bounds of the Taylor-expanded criterion.
const TAYLOR_MU_LIMIT: f64 = 0.2;
const TAYLOR_SIGMA_LIMIT: f64 = 1.0;

/// The linear Kelly system. `matrix` is symmetric positive semidefinite
/// (it is a second-moment matrix of returns); both are validated on
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct KellySystem {
    matrix: Matrix,
    rhs: Vec<f64>,
}

impl KellySystem {
    /// Validates symmetry (1e-12 relative) and positive semidefiniteness
    /// (minimum eigenvalue >= -1e-10 of the maximum).
    pub fn new(matrix: Matrix, rhs: Vec<f64>) -> Result<Self> {
        if matrix.rows() != matrix.cols() || matrix.rows() != rhs.len() || rhs.is_empty() {
            return Err(Error::InvalidParameter {
                name: "matrix",
                message: format!(
                    "system shape mismatch: {}x{} matrix, {}-vector",
                    matrix.rows(),
                    matrix.cols(),
                    rhs.len()
                ),
            });
        }
        if matrix.as_slice().iter().any(|v| !v.is_finite())
            || rhs.iter().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidParameter {
                name: "matrix",
                message: "system entries must be finite".into(),
            });
        }
        if matrix.max_asymmetry() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "matrix",
                message: format!(
                    "moment matrix asymmetry {:.3e} exceeds 1e-12 relative",
                    matrix.max_asymmetry()
                ),
            });
        }
        let eig = linalg::symmetric_eigen(&matrix);
        let max = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let min = eig.values.iter().fold(f64::INFINITY, |m, v| m.min(*v));
        if min < -1e-10 * max {
            return Err(Error::InvalidParameter {
                name: "matrix",
                message: format!(
                    "moment matrix is not positive semidefinite: min eigenvalue {min:.3e}"
                ),
            });
        }
        Ok(KellySystem { matrix, rhs })
    }

    /// Number of assets `L`.
    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    /// The moment matrix of returns.
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// The expected-return vector.
    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }
}

/// Diagnostic flags attached to an [`AllocationResult`]. Fractions are
/// reported as solved, never clamped; flags carry the interpretation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    /// The moment matrix was numerically singular; the minimum-norm
    /// least-squares solution is reported.
    pub singular_system: bool,
    /// Some fraction exceeds 1 (leveraged bet on one asset).
    pub fraction_exceeds_one: bool,
    /// The fractions sum beyond 1 (more than the full bankroll).
    pub total_exceeds_one: bool,
    /// Some fraction is negative (a short position).
    pub negative_fraction: bool,
    /// Model parameters sit outside the Taylor-expansion comfort zone
    /// (any |mu| > 0.2 or sigma > 1); the linear solve may be inaccurate.
    pub taylor_regime_warning: bool,
}

impl Flags {
    /// True when no flag is set.
    pub fn is_empty(&self) -> bool {
        !(self.singular_system
            || self.fraction_exceeds_one
            || self.total_exceeds_one
            || self.negative_fraction
            || self.taylor_regime_warning)
    }

    /// Names of the set flags.
    pub fn names(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.singular_system {
            out.push("SingularSystem");
        }
        if self.fraction_exceeds_one {
            out.push("FractionExceedsOne");
        }
        if self.total_exceeds_one {
            out.push("TotalExceedsOne");
        }
        if self.negative_fraction {
            out.push("NegativeFraction");
        }
        if self.taylor_regime_warning {
            out.push("TaylorRegimeWarning");
        }
        out
    }
}

impl core::fmt::Display for Flags {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let names = self.names();
        if names.is_empty() {
            return write!(f, "none");
        }
        write!(f, "{}", names.join("|"))
    }
}

/// Solved Kelly fractions with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    /// Fraction per asset, in portfolio order.
    pub fractions: Vec<f64>,
    /// Sum of the fractions.
    pub total: f64,
    /// Diagnostic flags.
    pub flags: Flags,
}

/// Build the system from arbitrary moments:
/// `M_{ll'} = <x_l x_l'>/(x0_l x0_l') - <x_l>/x0_l - <x_l'>/x0_l' + 1`,
/// `b_l = <x_l>/x0_l - 1`.
pub fn build_system(moments: &MomentSet) -> Result<KellySystem> {
    let l = moments.len();
    let r: Vec<f64> = (0..l).map(|i| moments.m1()[i] / moments.x0()[i]).collect();
    let mut m = Matrix::zeros(l, l);
    for i in 0..l {
        for j in i..l {
            let v = moments.m2()[(i, j)] / (moments.x0()[i] * moments.x0()[j]) - r[i] - r[j] + 1.0;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let b = r.iter().map(|ri| ri - 1.0).collect();
    KellySystem::new(m, b)
}

/// Fast path for independent assets: diagonal `A_l`, off-diagonal
/// `B_l B_l'`, right-hand side `B_l`.
pub fn build_system_independent(b: &[f64], a: &[f64]) -> Result<KellySystem> {
    if b.len() != a.len() || b.is_empty() {
        return Err(Error::InvalidParameter {
            name: "b",
            message: format!("B has {} entries, A has {}", b.len(), a.len()),
        });
    }
    let l = b.len();
    let mut m = Matrix::zeros(l, l);
    for i in 0..l {
        for j in 0..l {
            m[(i, j)] = if i == j { a[i] } else { b[i] * b[j] };
        }
    }
    KellySystem::new(m, b.to_vec())
}

/// Return moments of a log-normal asset: `B = e^mu - 1`,
/// `A = 1 - 2 e^mu + e^{2 mu + sigma^2}`.
pub fn moment_integrals_lognormal(mu: f64, sigma: f64) -> (f64, f64) {
    let b = mu.exp_m1();
    // 1 - 2 e^mu + e^{2 mu + sigma^2} = (e^mu - 1)^2 + e^{2 mu}(e^{sigma^2} - 1),
    // which avoids the cancellation of the displayed form at small parameters
    let a = b * b + (2.0 * mu).exp() * (sigma * sigma).exp_m1();
    (b, a)
}

/// Return moments of a Gaussian asset: `B = mu`, `A = mu^2 + sigma^2`.
pub fn moment_integrals_gaussian(mu: f64, sigma: f64) -> (f64, f64) {
    (mu, mu * mu + sigma * sigma)
}

/// Solve `M f = b`. Well-conditioned systems (condition below 1e12) get the
/// direct symmetric solve; singular ones fall back to the minimum-norm
/// least-squares solution over the retained eigenspace and set
/// [`Flags::singular_system`]. Errors when the right-hand side of a singular
/// system is not in the matrix range. The Taylor-regime flag needs model
/// parameters and is set by [`solve_portfolio`], not here.
pub fn solve(system: &KellySystem) -> Result<AllocationResult> {
    let sol = linalg::solve_symmetric(system.matrix(), system.rhs(), RANK_TOL);
    let singular = sol.rank_deficient || !(sol.condition < CONDITION_LIMIT);
    let bound = RESIDUAL_TOL
        * (system.matrix().frobenius_norm() * linalg::norm2(&sol.solution)
            + linalg::norm2(system.rhs()));
    if sol.residual > bound {
        return Err(Error::NoSolution {
            residual: sol.residual,
        });
    }
    Ok(finish(sol.solution, singular, false))
}

/// Moments, system construction, and solve in one step, with the
/// Taylor-regime warning determined from the model parameters (for
/// empirical portfolios, from moment-implied log-normal parameters).
pub fn solve_portfolio(portfolio: &PortfolioModel) -> Result<AllocationResult> {
    let moments = portfolio.moments()?;
    let system = build_system(&moments)?;
    let sol = linalg::solve_symmetric(system.matrix(), system.rhs(), RANK_TOL);
    let singular = sol.rank_deficient || !(sol.condition < CONDITION_LIMIT);
    let bound = RESIDUAL_TOL
        * (system.matrix().frobenius_norm() * linalg::norm2(&sol.solution)
            + linalg::norm2(system.rhs()));
    if sol.residual > bound {
        return Err(Error::NoSolution {
            residual: sol.residual,
        });
    }
    let warn = match portfolio.dependence() {
        crate::distributions::Dependence::EmpiricalSamples(_) => {
            taylor_regime_exceeded_implied(&moments)
        }
        _ => taylor_regime_exceeded(portfolio.assets()),
    };
    Ok(finish(sol.solution, singular, warn))
}

fn finish(fractions: Vec<f64>, singular: bool, taylor_warn: bool) -> AllocationResult {
    let total: f64 = fractions.iter().sum();
    let flags = Flags {
        singular_system: singular,
        fraction_exceeds_one: fractions.iter().any(|f| *f > 1.0),
        total_exceeds_one: total > 1.0,
        negative_fraction: fractions.iter().any(|f| *f < 0.0),
        taylor_regime_warning: taylor_warn,
    };
    AllocationResult {
        fractions,
        total,
        flags,
    }
}

/// True when any asset parameter leaves the heuristic validity region of
/// the Taylor-expanded criterion: |mu| > 0.2 or sigma > 1.
pub fn taylor_regime_exceeded(assets: &[AssetModel]) -> bool {
    assets
        .iter()
        .any(|a| a.mu().abs() > TAYLOR_MU_LIMIT || a.sigma() > TAYLOR_SIGMA_LIMIT)
}

/// The same check on log-normal parameters implied by raw moments
/// (`mu = ln(<x>/x0)`, `sigma^2 = ln(1 + Var[k]/(<x>/x0)^2)`), used when no
/// model parameters exist.
fn taylor_regime_exceeded_implied(moments: &MomentSet) -> bool {
    for i in 0..moments.len() {
        let r = moments.m1()[i] / moments.x0()[i];
        if r <= 0.0 {
            return true;
        }
        let mu = r.ln();
        let var_k = moments.m2()[(i, i)] / (moments.x0()[i] * moments.x0()[i]) - r * r;
        let sigma_sq = (var_k.max(0.0) / (r * r)).ln_1p();
        if mu.abs() > TAYLOR_MU_LIMIT || sigma_sq.sqrt() > TAYLOR_SIGMA_LIMIT {
            return true;
        }
    }
    false
}

/// Single log-normal stock closed form:
/// `f = (e^mu - 1) / (1 + e^{2 mu + sigma^2} - 2 e^mu)`.
pub fn kelly_single_lognormal(mu: f64, sigma: f64) -> f64 {
    let (b, a) = moment_integrals_lognormal(mu, sigma);
    debug_assert!(a > 0.0, "second return moment must be positive for sigma > 0");
    b / a
}

/// The conventional geometric-Brownian-motion result `f = mu / sigma^2`.
pub fn kelly_single_conventional(mu: f64, sigma: f64) -> f64 {
    mu / (sigma * sigma)
}

/// Single Gaussian stock: `f = mu / (mu^2 + sigma^2)`.
pub fn kelly_single_gaussian(mu: f64, sigma: f64) -> f64 {
    mu / (mu * mu + sigma * sigma)
}

/// Single stock from raw moments:
/// `f = (<x>/x0 - 1) / (1 + <x^2>/x0^2 - 2 <x>/x0)`.
pub fn kelly_single_moments(m1: f64, m2: f64, x0: f64) -> Result<f64> {
    if !(x0.is_finite() && x0 > 0.0) {
        return Err(Error::InvalidParameter {
            name: "x0",
            message: format!("initial price must be finite and > 0, got {x0}"),
        });
    }
    if !(m1.is_finite() && m2.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "m1",
            message: "moments must be finite".into(),
        });
    }
    let scale = m2.abs().max(m1 * m1).max(f64::MIN_POSITIVE);
    if m1 * m1 - m2 > 1e-10 * scale {
        return Err(Error::InvalidParameter {
            name: "m2",
            message: String::from("invalid moments: <x^2> < <x>^2"),
        });
    }
    let r = m1 / x0;
    let num = r - 1.0;
    if num == 0.0 {
        return Ok(0.0);
    }
    let den = m2 / (x0 * x0) - 2.0 * r + 1.0;
    if den <= 0.0 {
        // degenerate sure-thing second moment with a nonzero edge
        return Err(Error::UnboundedFraction);
    }
    Ok(num / den)
}
