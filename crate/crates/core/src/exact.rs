//! The exact (un-Taylored) Kelly criteria, solved numerically: quadrature
//! of the criterion integrals in log space, bracketed root refinement for a
//! single asset, damped Newton for portfolios, and the discrete-outcome
//! counterparts. This is the reference the moment-matrix solve approximates.
//!
//! Continuous criteria are restricted to log-normal models: a Gaussian price
//! admits `k <= -1` on its unbounded support, which makes the criterion
//! integral divergent for any positive fraction.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// resolves to inherent f64 methods when std is in the crate graph
#[allow(unused_imports)]
use num_traits::Float;

use crate::distributions::{AssetModel, Dependence, DiscreteOutcomeModel, Family, PortfolioModel};
use crate::error::{Error, Result};
use crate::kelly;
use crate::linalg::{self, Matrix};
use crate::quad;
use crate::root;

/// Truncation of the log-price quadrature, in standard deviations.
/// The discarded Gaussian tail mass is below 1e-22.
const LOG_HALF_WIDTH: f64 = 10.0;
/// Offset from the `f = 1` boundary for single-asset bracketing.
const BOUNDARY_EPS: f64 = 1e-9;
/// Interior-root criterion tolerance for the single-asset solve.
const SINGLE_RESIDUAL_TOL: f64 = 1e-12;
/// Absolute tolerance of the adaptive quadrature behind `residual_single`.
const SINGLE_QUAD_TOL: f64 = 1e-13;
/// Convergence threshold on the residual infinity norm for portfolios.
const MULTI_RESIDUAL_TOL: f64 = 1e-8;
/// Convergence threshold for discrete joint tables.
const DISCRETE_RESIDUAL_TOL: f64 = 1e-10;
const MAX_NEWTON_ITER: u32 = 100;
const MAX_HALVINGS: u32 = 30;
/// Relative finite-difference step for the Newton Jacobian.
const FD_STEP_REL: f64 = 1e-6;
/// Wealth-factor margin targeted when projecting a fraction vector into the
/// admissible region.
const PROJECTION_MARGIN: f64 = 0.05;

const SQRT_TWO_PI: f64 = 2.506628274631000502;

fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / SQRT_TWO_PI
}

/// How a single-asset solve terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Interior root of the criterion.
    Interior,
    /// No positive expected return; the optimal fraction is 0.
    NoEdge,
    /// The criterion stays positive up to the admissible boundary; investing
    /// everything is optimal and the boundary value is returned.
    AtBoundary,
}

/// Result of a single-asset exact solve.
#[derive(Debug, Clone, Copy)]
pub struct ExactSolution {
    /// The located fraction.
    pub fraction: f64,
    /// Interior root, no-edge zero, or boundary return.
    pub status: SolveStatus,
    /// Criterion value at `fraction`.
    pub residual: f64,
    /// Root-refinement iterations used.
    pub iterations: u32,
}

/// Result of a multi-asset exact solve.
#[derive(Debug, Clone)]
pub struct MultiSolution {
    /// Fraction per asset.
    pub fractions: Vec<f64>,
    /// Infinity norm of the criterion residual at the solution.
    pub residual_norm: f64,
    /// Newton iterations used.
    pub iterations: u32,
}

/// Scalar criterion value with its quadrature error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Residual {
    /// Criterion value.
    pub value: f64,
    /// Estimated absolute quadrature error.
    pub quadrature_error: f64,
}

/// Vector criterion value with per-component quadrature error estimates.
#[derive(Debug, Clone)]
pub struct ResidualVector {
    /// Criterion component per asset.
    pub values: Vec<f64>,
    /// Estimated absolute quadrature error per component.
    pub quadrature_errors: Vec<f64>,
}

/// Single-asset criterion `E[k / (1 + f k)]` for a log-normal model,
/// integrated adaptively in log space. Requires `0 <= f < 1`; log-normal
/// returns exceed -1, so that keeps the integrand finite.
pub fn residual_single(f: f64, model: &AssetModel) -> Result<Residual> {
    if model.family() != Family::LogNormal {
        return Err(Error::Unsupported {
            what: "the continuous criterion integral diverges for Gaussian models",
        });
    }
    if !(0.0..1.0).contains(&f) {
        return Err(Error::Inadmissible {
            message: format!("single-asset fraction must satisfy 0 <= f < 1, got {f}"),
        });
    }
    Ok(residual_single_raw(f, model))
}

fn residual_single_raw(f: f64, model: &AssetModel) -> Residual {
    let a = model.mu() - 0.5 * model.sigma() * model.sigma();
    let s = model.sigma();
    let q = quad::integrate(
        |z| {
            let k = (a + s * z).exp() - 1.0;
            k / (1.0 + f * k) * phi(z)
        },
        -LOG_HALF_WIDTH,
        LOG_HALF_WIDTH,
        SINGLE_QUAD_TOL,
    );
    Residual {
        value: q.value,
        quadrature_error: q.abs_error,
    }
}

/// Solve the single-asset exact criterion on `[0, 1)`.
///
/// Returns 0 with [`SolveStatus::NoEdge`] when `E[k] <= 0`, and `1 - 1e-9`
/// with [`SolveStatus::AtBoundary`] when the criterion is still positive
/// there (the growth optimum sits on the full-investment boundary).
pub fn solve_exact_single(model: &AssetModel) -> Result<ExactSolution> {
    if model.family() != Family::LogNormal {
        return Err(Error::Unsupported {
            what: "the continuous criterion integral diverges for Gaussian models",
        });
    }
    let edge = model.mu().exp_m1();
    if edge <= 0.0 {
        return Ok(ExactSolution {
            fraction: 0.0,
            status: SolveStatus::NoEdge,
            residual: edge,
            iterations: 0,
        });
    }
    let hi = 1.0 - BOUNDARY_EPS;
    let r_hi = residual_single_raw(hi, model);
    if r_hi.value >= 0.0 {
        return Ok(ExactSolution {
            fraction: hi,
            status: SolveStatus::AtBoundary,
            residual: r_hi.value,
            iterations: 0,
        });
    }
    let rr = root::brent(
        |f| residual_single_raw(f, model).value,
        0.0,
        hi,
        edge,
        r_hi.value,
        1e-15,
        SINGLE_RESIDUAL_TOL,
        200,
    )?;
    Ok(ExactSolution {
        fraction: rr.root,
        status: SolveStatus::Interior,
        residual: rr.f_root,
        iterations: rr.iterations,
    })
}

// ---------------------------------------------------------------------------
// tensor-product quadrature over portfolios (L <= 3)

/// Composite Gauss-Legendre panel counts per axis: coarse pass for the error
/// estimate, fine pass for the reported value.
fn panel_levels(l: usize) -> (usize, usize) {
    if l <= 2 {
        (6, 12)
    } else {
        (4, 8)
    }
}

struct ContinuousModel<'a> {
    assets: &'a [AssetModel],
    rho: Option<f64>,
}

fn continuous_model(portfolio: &PortfolioModel) -> Result<ContinuousModel<'_>> {
    if portfolio.len() > 3 {
        return Err(Error::UnsupportedDimension {
            given: portfolio.len(),
            max: 3,
        });
    }
    if portfolio
        .assets()
        .iter()
        .any(|a| a.family() != Family::LogNormal)
    {
        return Err(Error::Unsupported {
            what: "the continuous criterion integral diverges for Gaussian models",
        });
    }
    let rho = match portfolio.dependence() {
        Dependence::Independent => None,
        Dependence::BivariateLogNormal { rho } => Some(*rho),
        Dependence::EmpiricalSamples(_) => {
            return Err(Error::Unsupported {
                what: "exact solving needs an analytic model; use the discrete criterion on samples",
            })
        }
    };
    Ok(ContinuousModel {
        assets: portfolio.assets(),
        rho,
    })
}

/// Extreme values of each `k_l` over the truncated quadrature box.
fn return_bounds(model: &ContinuousModel<'_>) -> Vec<(f64, f64)> {
    let reach = |asset: &AssetModel, spread: f64| {
        let a = asset.mu() - 0.5 * asset.sigma() * asset.sigma();
        let lo = (a - spread).exp() - 1.0;
        let hi = (a + spread).exp() - 1.0;
        (lo, hi)
    };
    match model.rho {
        None => model
            .assets
            .iter()
            .map(|asset| reach(asset, LOG_HALF_WIDTH * asset.sigma()))
            .collect(),
        Some(rho) => {
            let tail = (1.0 - rho * rho).max(0.0).sqrt();
            let spread2 = LOG_HALF_WIDTH * model.assets[1].sigma() * (rho.abs() + tail);
            vec![
                reach(&model.assets[0], LOG_HALF_WIDTH * model.assets[0].sigma()),
                reach(&model.assets[1], spread2),
            ]
        }
    }
}

/// Admissibility on the quadrature domain: nonnegative fractions whose worst
/// wealth factor over the truncated box stays positive. This is wider than
/// `sum f < 1` and matches where the truncated integrals are defined.
fn check_admissible_box(model: &ContinuousModel<'_>, f: &[f64]) -> Result<()> {
    if f.len() != model.assets.len() {
        return Err(Error::InvalidParameter {
            name: "f",
            message: format!(
                "{} fractions for {} assets",
                f.len(),
                model.assets.len()
            ),
        });
    }
    if f.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Inadmissible {
            message: "fractions must be finite and nonnegative".into(),
        });
    }
    let worst: f64 = return_bounds(model)
        .iter()
        .zip(f)
        .map(|(&(lo, hi), &fl)| (fl * lo).min(fl * hi))
        .sum();
    let factor_min = 1.0 + worst;
    if factor_min <= 1e-12 {
        return Err(Error::Inadmissible {
            message: format!(
                "worst-case wealth factor {factor_min:.3e} on the quadrature domain is not positive"
            ),
        });
    }
    Ok(())
}

/// Standardized log-space nodes with Gaussian weights attached.
fn weighted_nodes(panels: usize) -> (Vec<f64>, Vec<f64>) {
    let raw = quad::gauss_legendre_panels(-LOG_HALF_WIDTH, LOG_HALF_WIDTH, panels);
    let z: Vec<f64> = raw.iter().map(|&(x, _)| x).collect();
    let w: Vec<f64> = raw.iter().map(|&(x, wt)| wt * phi(x)).collect();
    (z, w)
}

fn axis_returns(asset: &AssetModel, z: &[f64]) -> Vec<f64> {
    let a = asset.mu() - 0.5 * asset.sigma() * asset.sigma();
    let s = asset.sigma();
    z.iter().map(|&zi| (a + s * zi).exp() - 1.0).collect()
}

/// All criterion components `E[k_l / (1 + sum f k)]` in one pass over the
/// tensor grid.
fn residual_pass(model: &ContinuousModel<'_>, f: &[f64], panels: usize) -> Vec<f64> {
    let (z, w) = weighted_nodes(panels);
    let assets = model.assets;
    match (assets.len(), model.rho) {
        (1, _) => {
            let k = axis_returns(&assets[0], &z);
            let mut r = 0.0;
            for i in 0..z.len() {
                r += w[i] * k[i] / (1.0 + f[0] * k[i]);
            }
            vec![r]
        }
        (2, rho) => {
            // asset 2's log price splits into an axis-1 factor and an
            // axis-2 factor: k2 = p[i] * q[j] - 1 (p = 1 when independent)
            let rho = rho.unwrap_or(0.0);
            let tail = (1.0 - rho * rho).max(0.0).sqrt();
            let (s2, a2) = (
                assets[1].sigma(),
                assets[1].mu() - 0.5 * assets[1].sigma() * assets[1].sigma(),
            );
            let k1 = axis_returns(&assets[0], &z);
            let p: Vec<f64> = z.iter().map(|&zi| (s2 * rho * zi).exp()).collect();
            let q: Vec<f64> = z.iter().map(|&zj| (a2 + s2 * tail * zj).exp()).collect();
            let mut r0 = 0.0;
            let mut r1 = 0.0;
            for i in 0..z.len() {
                let base = 1.0 + f[0] * k1[i];
                let mut acc0 = 0.0;
                let mut acc1 = 0.0;
                for j in 0..z.len() {
                    let k2 = p[i] * q[j] - 1.0;
                    let d = base + f[1] * k2;
                    acc0 += w[j] / d;
                    acc1 += w[j] * k2 / d;
                }
                r0 += w[i] * k1[i] * acc0;
                r1 += w[i] * acc1;
            }
            vec![r0, r1]
        }
        (3, _) => {
            let k1 = axis_returns(&assets[0], &z);
            let k2 = axis_returns(&assets[1], &z);
            let k3 = axis_returns(&assets[2], &z);
            let mut r = [0.0f64; 3];
            for i in 0..z.len() {
                let di = 1.0 + f[0] * k1[i];
                for j in 0..z.len() {
                    let dij = di + f[1] * k2[j];
                    let wij = w[i] * w[j];
                    let mut inv = 0.0;
                    let mut invk3 = 0.0;
                    for (m, &k3m) in k3.iter().enumerate() {
                        let d = dij + f[2] * k3m;
                        inv += w[m] / d;
                        invk3 += w[m] * k3m / d;
                    }
                    r[0] += wij * k1[i] * inv;
                    r[1] += wij * k2[j] * inv;
                    r[2] += wij * invk3;
                }
            }
            r.to_vec()
        }
        _ => unreachable!("dimension validated at entry"),
    }
}

/// Multi-asset criterion components with error estimates from two quadrature
/// resolutions. Supports independent (L <= 3) and bivariate log-normal
/// portfolios, including |rho| = 1 (the shared-normal transform never needs
/// the degenerate joint density).
pub fn residual_multi(f: &[f64], portfolio: &PortfolioModel) -> Result<ResidualVector> {
    let model = continuous_model(portfolio)?;
    check_admissible_box(&model, f)?;
    let (coarse_panels, fine_panels) = panel_levels(portfolio.len());
    let coarse = residual_pass(&model, f, coarse_panels);
    let fine = residual_pass(&model, f, fine_panels);
    let errors = coarse
        .iter()
        .zip(&fine)
        .map(|(c, v)| (c - v).abs())
        .collect();
    Ok(ResidualVector {
        values: fine,
        quadrature_errors: errors,
    })
}

fn residual_values(model: &ContinuousModel<'_>, f: &[f64], panels: usize) -> Result<Vec<f64>> {
    check_admissible_box(model, f)?;
    Ok(residual_pass(model, f, panels))
}

/// Expected log growth `E[ln(1 + sum f_l k_l)]` by the same tensor
/// quadrature as [`residual_multi`].
pub fn expected_log_growth(portfolio: &PortfolioModel, f: &[f64]) -> Result<f64> {
    let model = continuous_model(portfolio)?;
    check_admissible_box(&model, f)?;
    let (_, fine_panels) = panel_levels(portfolio.len());
    let (z, w) = weighted_nodes(fine_panels);
    let assets = model.assets;
    let value = match (assets.len(), model.rho) {
        (1, _) => {
            let k = axis_returns(&assets[0], &z);
            (0..z.len())
                .map(|i| w[i] * (1.0 + f[0] * k[i]).ln())
                .sum()
        }
        (2, rho) => {
            let rho = rho.unwrap_or(0.0);
            let tail = (1.0 - rho * rho).max(0.0).sqrt();
            let (s2, a2) = (
                assets[1].sigma(),
                assets[1].mu() - 0.5 * assets[1].sigma() * assets[1].sigma(),
            );
            let k1 = axis_returns(&assets[0], &z);
            let p: Vec<f64> = z.iter().map(|&zi| (s2 * rho * zi).exp()).collect();
            let q: Vec<f64> = z.iter().map(|&zj| (a2 + s2 * tail * zj).exp()).collect();
            let mut g = 0.0;
            for i in 0..z.len() {
                let base = 1.0 + f[0] * k1[i];
                let mut acc = 0.0;
                for j in 0..z.len() {
                    acc += w[j] * (base + f[1] * (p[i] * q[j] - 1.0)).ln();
                }
                g += w[i] * acc;
            }
            g
        }
        (3, _) => {
            let k1 = axis_returns(&assets[0], &z);
            let k2 = axis_returns(&assets[1], &z);
            let k3 = axis_returns(&assets[2], &z);
            let mut g = 0.0;
            for i in 0..z.len() {
                let di = 1.0 + f[0] * k1[i];
                for j in 0..z.len() {
                    let dij = di + f[1] * k2[j];
                    let wij = w[i] * w[j];
                    let mut acc = 0.0;
                    for (m, &k3m) in k3.iter().enumerate() {
                        acc += w[m] * (dij + f[2] * k3m).ln();
                    }
                    g += wij * acc;
                }
            }
            g
        }
        _ => unreachable!(),
    };
    Ok(value)
}

/// Project a fraction vector into the admissible region: clamp negatives to
/// zero, then scale down until the worst-case wealth factor on the
/// quadrature domain is at least 0.05.
pub fn project_admissible(portfolio: &PortfolioModel, f: &[f64]) -> Result<Vec<f64>> {
    let model = continuous_model(portfolio)?;
    if f.len() != model.assets.len() {
        return Err(Error::InvalidParameter {
            name: "f",
            message: format!("{} fractions for {} assets", f.len(), model.assets.len()),
        });
    }
    let mut g: Vec<f64> = f.iter().map(|v| v.max(0.0)).collect();
    let worst: f64 = return_bounds(&model)
        .iter()
        .zip(&g)
        .map(|(&(lo, hi), &fl)| (fl * lo).min(fl * hi))
        .sum();
    if worst < -(1.0 - PROJECTION_MARGIN) {
        let scale = (1.0 - PROJECTION_MARGIN) / (-worst);
        for v in g.iter_mut() {
            *v *= scale;
        }
    }
    Ok(g)
}

/// Default Newton starting point: the linear (moment-matrix) solution
/// projected into the admissible region.
pub fn initial_guess(portfolio: &PortfolioModel) -> Result<Vec<f64>> {
    let linear = kelly::solve_portfolio(portfolio)?;
    project_admissible(portfolio, &linear.fractions)
}

/// Damped Newton on the multi-asset criterion with a finite-difference
/// Jacobian (relative step 1e-6). Iterates stay admissible through step
/// halving; converged when the residual infinity norm is at most 1e-8.
pub fn solve_exact_multi(portfolio: &PortfolioModel, f0: &[f64]) -> Result<MultiSolution> {
    let model = continuous_model(portfolio)?;
    check_admissible_box(&model, f0)?;
    let (_, fine_panels) = panel_levels(portfolio.len());
    let l = f0.len();

    let mut f = f0.to_vec();
    let mut r = residual_values(&model, &f, fine_panels)?;
    let mut norm = linalg::norm_inf(&r);

    for iterations in 0..=MAX_NEWTON_ITER {
        if norm <= MULTI_RESIDUAL_TOL {
            return Ok(MultiSolution {
                fractions: f,
                residual_norm: norm,
                iterations,
            });
        }
        if iterations == MAX_NEWTON_ITER {
            break;
        }
        // finite-difference Jacobian, falling back to a backward step when a
        // forward perturbation leaves the admissible region
        let mut jac = Matrix::zeros(l, l);
        for m in 0..l {
            let h = FD_STEP_REL * (1.0 + f[m].abs());
            let mut pert = f.clone();
            pert[m] += h;
            let (cols, step) = match residual_values(&model, &pert, fine_panels) {
                Ok(v) => (v, h),
                Err(_) => {
                    pert[m] = f[m] - h;
                    (residual_values(&model, &pert, fine_panels)?, -h)
                }
            };
            for row in 0..l {
                jac[(row, m)] = (cols[row] - r[row]) / step;
            }
        }
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = linalg::solve_lu(&jac, &neg_r).map_err(|_| Error::Convergence {
            iterations,
            residual: norm,
        })?;

        let mut accepted = false;
        let mut t = 1.0;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = f.iter().zip(&delta).map(|(a, d)| a + t * d).collect();
            if let Ok(cand_r) = residual_values(&model, &cand, fine_panels) {
                let cand_norm = linalg::norm_inf(&cand_r);
                if cand_norm < norm {
                    f = cand;
                    r = cand_r;
                    norm = cand_norm;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::Convergence {
                iterations,
                residual: norm,
            });
        }
    }
    Err(Error::Convergence {
        iterations: MAX_NEWTON_ITER,
        residual: norm,
    })
}

// ---------------------------------------------------------------------------
// discrete outcomes

/// Criterion components `sum_i p(i) k_l(i) / (1 + sum_l' f_l' k_l'(i))` of a
/// discrete joint table.
pub fn residual_discrete(model: &DiscreteOutcomeModel, f: &[f64]) -> Result<Vec<f64>> {
    check_admissible_discrete(model, f)?;
    Ok(residual_discrete_raw(model, f))
}

fn residual_discrete_raw(model: &DiscreteOutcomeModel, f: &[f64]) -> Vec<f64> {
    let l = model.n_assets();
    let mut r = vec![0.0; l];
    for (i, &p) in model.probabilities().iter().enumerate() {
        let row = model.returns().row(i);
        let d = 1.0 + row.iter().zip(f).map(|(k, fl)| fl * k).sum::<f64>();
        for (rl, k) in r.iter_mut().zip(row) {
            *rl += p * k / d;
        }
    }
    r
}

fn check_admissible_discrete(model: &DiscreteOutcomeModel, f: &[f64]) -> Result<()> {
    if f.len() != model.n_assets() {
        return Err(Error::InvalidParameter {
            name: "f",
            message: format!(
                "{} fractions for {} assets",
                f.len(),
                model.n_assets()
            ),
        });
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::Inadmissible {
            message: "fractions must be finite".into(),
        });
    }
    for i in 0..model.n_outcomes() {
        let row = model.returns().row(i);
        let d = 1.0 + row.iter().zip(f).map(|(k, fl)| fl * k).sum::<f64>();
        if d <= 1e-12 {
            return Err(Error::Inadmissible {
                message: format!("outcome {i} drives the wealth factor to {d:.3e}"),
            });
        }
    }
    Ok(())
}

/// Expected log growth of a discrete model at `f`.
pub fn expected_log_growth_discrete(model: &DiscreteOutcomeModel, f: &[f64]) -> Result<f64> {
    check_admissible_discrete(model, f)?;
    Ok(model
        .probabilities()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let row = model.returns().row(i);
            let d = 1.0 + row.iter().zip(f).map(|(k, fl)| fl * k).sum::<f64>();
            p * d.ln()
        })
        .sum())
}

/// Solve the single-asset discrete criterion on the admissible part of
/// `[0, 1]`. Returns and bounds follow the single-asset continuous
/// conventions: 0 with `NoEdge` when the edge is nonpositive, the boundary
/// with `AtBoundary` when the criterion never crosses zero.
pub fn solve_discrete_single(model: &DiscreteOutcomeModel) -> Result<ExactSolution> {
    if model.n_assets() != 1 {
        return Err(Error::InvalidParameter {
            name: "model",
            message: format!("expected a single-asset table, got {}", model.n_assets()),
        });
    }
    let edge = model.expected_return(0);
    if edge <= 0.0 {
        return Ok(ExactSolution {
            fraction: 0.0,
            status: SolveStatus::NoEdge,
            residual: edge,
            iterations: 0,
        });
    }
    let criterion = |f: f64| {
        model
            .probabilities()
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let k = model.returns()[(i, 0)];
                p * k / (1.0 + f * k)
            })
            .sum::<f64>()
    };
    // returns are validated >= -1, so the pole sits at f >= 1; with a -1
    // outcome present the criterion dives to -inf as f -> 1
    let total_loss_possible = (0..model.n_outcomes()).any(|i| model.returns()[(i, 0)] == -1.0);
    let hi = if total_loss_possible { 1.0 - 1e-12 } else { 1.0 };
    let c_hi = criterion(hi);
    if c_hi >= 0.0 {
        return Ok(ExactSolution {
            fraction: hi,
            status: SolveStatus::AtBoundary,
            residual: c_hi,
            iterations: 0,
        });
    }
    let rr = root::brent(criterion, 0.0, hi, edge, c_hi, 1e-15, 1e-14, 200)?;
    Ok(ExactSolution {
        fraction: rr.root,
        status: SolveStatus::Interior,
        residual: rr.f_root,
        iterations: rr.iterations,
    })
}

/// Damped Newton on the discrete joint criterion with its analytic Jacobian;
/// converged when the residual infinity norm is at most 1e-10.
pub fn solve_discrete_multi(model: &DiscreteOutcomeModel) -> Result<MultiSolution> {
    let l = model.n_assets();
    let mut f = vec![0.0; l];
    let mut r = residual_discrete_raw(model, &f);
    let mut norm = linalg::norm_inf(&r);

    for iterations in 0..=MAX_NEWTON_ITER {
        if norm <= DISCRETE_RESIDUAL_TOL {
            return Ok(MultiSolution {
                fractions: f,
                residual_norm: norm,
                iterations,
            });
        }
        if iterations == MAX_NEWTON_ITER {
            break;
        }
        // J_lm = -sum_i p k_l k_m / (1 + sum f k)^2
        let mut jac = Matrix::zeros(l, l);
        for (i, &p) in model.probabilities().iter().enumerate() {
            let row = model.returns().row(i);
            let d = 1.0 + row.iter().zip(&f).map(|(k, fl)| fl * k).sum::<f64>();
            let scale = p / (d * d);
            for a in 0..l {
                for b in a..l {
                    let v = -scale * row[a] * row[b];
                    jac[(a, b)] += v;
                    if a != b {
                        jac[(b, a)] += v;
                    }
                }
            }
        }
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = linalg::solve_lu(&jac, &neg_r).map_err(|_| Error::Convergence {
            iterations,
            residual: norm,
        })?;

        let mut accepted = false;
        let mut t = 1.0;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = f.iter().zip(&delta).map(|(a, d)| a + t * d).collect();
            if check_admissible_discrete(model, &cand).is_ok() {
                let cand_r = residual_discrete_raw(model, &cand);
                let cand_norm = linalg::norm_inf(&cand_r);
                if cand_norm < norm {
                    f = cand;
                    r = cand_r;
                    norm = cand_norm;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::Convergence {
                iterations,
                residual: norm,
            });
        }
    }
    Err(Error::Convergence {
        iterations: MAX_NEWTON_ITER,
        residual: norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::PortfolioModel;

    fn lognormal(mu: f64, sigma: f64) -> AssetModel {
        AssetModel::log_normal(1.0, mu, sigma).unwrap()
    }

    #[test]
    fn residual_at_zero_is_expected_return() {
        let r = residual_single(0.0, &lognormal(0.1, 0.3)).unwrap();
        assert!((r.value - 0.10517091807564762).abs() < 1e-12);
        assert!(r.quadrature_error < 1e-10);
        let flat = residual_single(0.0, &lognormal(0.0, 0.3)).unwrap();
        assert!(flat.value.abs() < 1e-12);
    }

    #[test]
    fn residual_rejects_bad_inputs() {
        assert!(matches!(
            residual_single(1.0, &lognormal(0.1, 0.3)),
            Err(Error::Inadmissible { .. })
        ));
        let g = AssetModel::gaussian(1.0, 0.1, 0.3).unwrap();
        assert!(matches!(
            residual_single(0.1, &g),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn residual_strictly_decreasing() {
        let m = lognormal(0.05, 0.3);
        let mut prev = f64::INFINITY;
        for i in 0..11 {
            let f = i as f64 * 0.099;
            let r = residual_single(f, &m).unwrap().value;
            assert!(r < prev, "not decreasing at f = {f}");
            prev = r;
        }
    }

    #[test]
    fn exact_single_no_edge() {
        let s = solve_exact_single(&lognormal(0.0, 0.3)).unwrap();
        assert_eq!(s.status, SolveStatus::NoEdge);
        assert_eq!(s.fraction, 0.0);
    }

    #[test]
    fn exact_single_halved_volatility_identity() {
        // for mu = sigma^2 / 2 the criterion root is exactly 1/2
        let s = solve_exact_single(&lognormal(0.005, 0.1)).unwrap();
        assert_eq!(s.status, SolveStatus::Interior);
        assert!((s.fraction - 0.5).abs() < 1e-9, "f = {}", s.fraction);
        assert!(s.residual.abs() <= 1e-10);
        // the identity is not a small-parameter artifact
        let big = solve_exact_single(&lognormal(0.5, 1.0)).unwrap();
        assert!((big.fraction - 0.5).abs() < 1e-8, "f = {}", big.fraction);
    }

    #[test]
    fn exact_single_boundary_when_growth_dominates() {
        // mu = sigma^2 puts the root exactly at f = 1
        let s = solve_exact_single(&lognormal(0.01, 0.1)).unwrap();
        assert_eq!(s.status, SolveStatus::AtBoundary);
        assert!((s.fraction - (1.0 - 1e-9)).abs() < 1e-15);
        assert!(s.residual.abs() <= 1e-10, "residual {}", s.residual);
        // still within 5% of the closed form
        let closed = kelly::kelly_single_lognormal(0.01, 0.1);
        assert!((s.fraction - closed).abs() / closed < 0.05);
    }

    #[test]
    fn exact_single_matches_objective_grid_scan() {
        let model = lognormal(0.05, 0.3);
        let p = PortfolioModel::independent(alloc::vec![model]).unwrap();
        let s = solve_exact_single(&model).unwrap();
        assert!((s.fraction - 0.55674747274295708).abs() < 1e-8);
        let mut best = (0.0, f64::NEG_INFINITY);
        let mut f = 0.0;
        while f < 0.999 {
            let g = expected_log_growth(&p, &[f]).unwrap();
            if g > best.1 {
                best = (f, g);
            }
            f += 1e-3;
        }
        assert!(
            (best.0 - s.fraction).abs() <= 1e-3 + 1e-12,
            "grid peak {} vs root {}",
            best.0,
            s.fraction
        );
    }

    #[test]
    fn multi_residual_at_zero() {
        let p = PortfolioModel::independent(alloc::vec![
            lognormal(0.1, 0.5),
            lognormal(0.05, 0.3)
        ])
        .unwrap();
        let r = residual_multi(&[0.0, 0.0], &p).unwrap();
        assert!((r.values[0] - 0.10517091807564762).abs() < 1e-10);
        assert!((r.values[1] - 0.05127109637602403).abs() < 1e-10);
        assert!(r.quadrature_errors.iter().all(|e| *e < 1e-9));
    }

    #[test]
    fn multi_residual_small_at_linear_solution() {
        // Taylor quality: at the moment-matrix solution the exact criterion
        // is within 5% of the per-asset edge (even though sum f > 1 here;
        // the truncated domain keeps the integrand finite)
        let p = PortfolioModel::independent(alloc::vec![
            lognormal(0.01, 0.1),
            lognormal(0.005, 0.1)
        ])
        .unwrap();
        let lin = kelly::solve_portfolio(&p).unwrap();
        assert!(lin.total > 1.0);
        let r = residual_multi(&lin.fractions, &p).unwrap();
        // cross-checked against 40-digit quadrature of the same integrals
        assert!((r.values[0] - 2.9560916e-4).abs() < 1e-9 * 2.0 + 1e-6 * r.values[0].abs());
        assert!((r.values[1] - 7.7462406e-5).abs() < 1e-9 * 2.0 + 1e-6 * r.values[1].abs());
        for l in 0..2 {
            let edge = p.assets()[l].mu().exp_m1();
            assert!(r.values[l].abs() <= 0.05 * edge);
        }
    }

    #[test]
    fn bivariate_residual_factorizes_at_zero_correlation() {
        let a = lognormal(0.05, 0.3);
        let b = lognormal(0.02, 0.2);
        let indep = PortfolioModel::independent(alloc::vec![a, b]).unwrap();
        let biv = PortfolioModel::bivariate_log_normal(a, b, 0.0).unwrap();
        let f = [0.1, 0.1];
        let ri = residual_multi(&f, &indep).unwrap();
        let rb = residual_multi(&f, &biv).unwrap();
        for l in 0..2 {
            assert!((ri.values[l] - rb.values[l]).abs() < 1e-8);
        }
    }

    #[test]
    fn multi_rejects_inadmissible_and_large_l() {
        let p = PortfolioModel::independent(alloc::vec![lognormal(0.05, 0.3); 2]).unwrap();
        assert!(matches!(
            residual_multi(&[-0.1, 0.2], &p),
            Err(Error::Inadmissible { .. })
        ));
        assert!(matches!(
            residual_multi(&[40.0, 0.0], &p),
            Err(Error::Inadmissible { .. })
        ));
        let p4 = PortfolioModel::independent(alloc::vec![lognormal(0.05, 0.3); 4]).unwrap();
        assert!(matches!(
            residual_multi(&[0.1; 4], &p4),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn exact_multi_zero_growth() {
        let p = PortfolioModel::independent(alloc::vec![
            lognormal(0.0, 0.3),
            lognormal(0.0, 0.5)
        ])
        .unwrap();
        let f0 = initial_guess(&p).unwrap();
        let s = solve_exact_multi(&p, &f0).unwrap();
        assert!(s.fractions.iter().all(|f| f.abs() < 1e-9));
    }

    #[test]
    fn exact_multi_reduces_to_single() {
        let p = PortfolioModel::independent(alloc::vec![lognormal(0.05, 0.3)]).unwrap();
        let f0 = initial_guess(&p).unwrap();
        let multi = solve_exact_multi(&p, &f0).unwrap();
        let single = solve_exact_single(&lognormal(0.05, 0.3)).unwrap();
        assert!((multi.fractions[0] - single.fraction).abs() < 1e-8);
        assert!(multi.residual_norm <= MULTI_RESIDUAL_TOL);
    }

    #[test]
    fn exact_multi_nearly_identical_pair_splits_the_single_fraction() {
        let a = lognormal(0.05, 0.3);
        let p = PortfolioModel::bivariate_log_normal(a, a, 1.0 - 1e-6).unwrap();
        let f0 = initial_guess(&p).unwrap();
        let s = solve_exact_multi(&p, &f0).unwrap();
        let single = solve_exact_single(&a).unwrap();
        let total: f64 = s.fractions.iter().sum();
        assert!(
            (total - single.fraction).abs() / single.fraction < 0.02,
            "total {total} vs single {}",
            single.fraction
        );
    }

    #[test]
    fn discrete_binary_bet() {
        let m = DiscreteOutcomeModel::single(alloc::vec![0.6, 0.4], alloc::vec![1.0, -1.0]).unwrap();
        let s = solve_discrete_single(&m).unwrap();
        assert_eq!(s.status, SolveStatus::Interior);
        assert!((s.fraction - 0.2).abs() < 1e-10);
    }

    #[test]
    fn discrete_fair_coin_has_no_edge() {
        let m = DiscreteOutcomeModel::single(alloc::vec![0.5, 0.5], alloc::vec![1.0, -1.0]).unwrap();
        let s = solve_discrete_single(&m).unwrap();
        assert_eq!(s.status, SolveStatus::NoEdge);
        assert_eq!(s.fraction, 0.0);
    }

    #[test]
    fn discrete_sure_win_hits_boundary() {
        let m = DiscreteOutcomeModel::single(alloc::vec![1.0], alloc::vec![0.1]).unwrap();
        let s = solve_discrete_single(&m).unwrap();
        assert_eq!(s.status, SolveStatus::AtBoundary);
        assert_eq!(s.fraction, 1.0);
    }

    #[test]
    fn discrete_pair_of_independent_bets() {
        // two independent 0.6/0.4 even-money bets as one joint table
        let probs = alloc::vec![0.36, 0.24, 0.24, 0.16];
        let rets = Matrix::from_vec(
            4,
            2,
            alloc::vec![1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0],
        );
        let m = DiscreteOutcomeModel::new(probs, rets).unwrap();
        let s = solve_discrete_multi(&m).unwrap();
        let expect = 5.0 / 26.0;
        assert!((s.fractions[0] - expect).abs() < 1e-9, "{:?}", s.fractions);
        assert!((s.fractions[1] - expect).abs() < 1e-9);
        assert!(s.fractions.iter().all(|f| *f <= 0.2));
        // betting the pair grows faster than the single-bet Kelly alone
        let g_pair = expected_log_growth_discrete(&m, &s.fractions).unwrap();
        let g_single = expected_log_growth_discrete(&m, &[0.2, 0.0]).unwrap();
        assert!((g_pair - 0.0394708136314).abs() < 1e-9);
        assert!((g_single - 0.0201355135507).abs() < 1e-9);
        assert!(g_pair > g_single);
    }

    #[test]
    fn discrete_zero_edge_asset_gets_nothing() {
        // 0.6/0.4 bet joined by an independent fair coin
        let probs = alloc::vec![0.3, 0.3, 0.2, 0.2];
        let rets = Matrix::from_vec(
            4,
            2,
            alloc::vec![1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0],
        );
        let m = DiscreteOutcomeModel::new(probs, rets).unwrap();
        let s = solve_discrete_multi(&m).unwrap();
        assert!((s.fractions[0] - 0.2).abs() < 1e-9);
        assert!(s.fractions[1].abs() < 1e-10);
    }

    #[test]
    fn discrete_multi_reduces_to_single() {
        let m = DiscreteOutcomeModel::single(alloc::vec![0.6, 0.4], alloc::vec![1.0, -1.0]).unwrap();
        let s = solve_discrete_multi(&m).unwrap();
        let single = solve_discrete_single(&m).unwrap();
        assert!((s.fractions[0] - single.fraction).abs() < 1e-10);
    }

    #[test]
    fn projection_brings_leveraged_guess_inside() {
        let p = PortfolioModel::independent(alloc::vec![
            lognormal(0.01, 0.1),
            lognormal(0.005, 0.1)
        ])
        .unwrap();
        let g = project_admissible(&p, &[5.0, -1.0]).unwrap();
        assert_eq!(g[1], 0.0);
        assert!(residual_multi(&g, &p).is_ok());
    }
}
