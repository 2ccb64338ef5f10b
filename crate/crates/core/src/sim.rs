//! Monte Carlo growth verification: wealth paths under repeated independent
//! rounds, growth-rate estimation across replications, and grid search for
//! the empirically growth-optimal fractions with common random numbers.
//!
//! Each round draws a fresh joint price vector with the round's prices
//! renormalized to the initial prices: the model describes per-round
//! returns, and the wealth factor of a round is `1 + sum_l f_l k_l`.
//! Replications are keyed by `(seed, replication index)` through independent
//! RNG streams, so results do not depend on evaluation order.

use alloc::format;
use alloc::vec::Vec;

// resolves to inherent f64 methods when std is in the crate graph
#[allow(unused_imports)]
use num_traits::Float;

use crate::distributions::{Family, PortfolioModel};
use crate::error::{Error, Result};

/// Monte Carlo run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    /// Rounds per wealth path.
    pub rounds: usize,
    /// Independent paths.
    pub replications: usize,
    /// Base seed; replication `r` uses RNG stream `r`.
    pub seed: u64,
}

impl SimConfig {
    /// Requires at least one round and one replication.
    pub fn new(rounds: usize, replications: usize, seed: u64) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::InvalidParameter {
                name: "rounds",
                message: "need at least one round".into(),
            });
        }
        if replications == 0 {
            return Err(Error::InvalidParameter {
                name: "replications",
                message: "need at least one replication".into(),
            });
        }
        Ok(SimConfig {
            rounds,
            replications,
            seed,
        })
    }
}

/// Estimated per-round log growth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthEstimate {
    /// Mean of `(1/N) ln V_N` across replications.
    pub g_mean: f64,
    /// Standard error across replications (0 for a single replication).
    pub g_stderr: f64,
}

/// Paired comparison of two fraction vectors under common random numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthComparison {
    /// Mean of the per-replication growth difference `g_a - g_b`.
    pub diff_mean: f64,
    /// Standard error of that paired difference.
    pub diff_stderr: f64,
}

/// Admissibility for simulation is over the full log-normal support:
/// nonnegative fractions with total at most 1 keep every wealth factor
/// positive. Gaussian assets are excluded (their returns reach below -1).
fn check_admissible(portfolio: &PortfolioModel, f: &[f64]) -> Result<()> {
    if portfolio
        .assets()
        .iter()
        .any(|a| a.family() != Family::LogNormal)
    {
        return Err(Error::Unsupported {
            what: "simulation requires log-normal assets",
        });
    }
    if f.len() != portfolio.len() {
        return Err(Error::InvalidParameter {
            name: "f",
            message: format!("{} fractions for {} assets", f.len(), portfolio.len()),
        });
    }
    if f.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Inadmissible {
            message: "fractions must be finite and nonnegative".into(),
        });
    }
    let total: f64 = f.iter().sum();
    if total > 1.0 + 1e-12 {
        return Err(Error::Inadmissible {
            message: format!("total fraction {total} exceeds 1"),
        });
    }
    Ok(())
}

/// Wealth factor of one round given the drawn prices.
fn round_factor(portfolio: &PortfolioModel, f: &[f64], prices: &[f64]) -> f64 {
    1.0 + portfolio
        .assets()
        .iter()
        .zip(f)
        .zip(prices)
        .map(|((asset, fl), x)| fl * (x / asset.x0() - 1.0))
        .sum::<f64>()
}

/// Simulate one wealth path: `V_0 = 1`, `V_{n+1} = V_n (1 + sum f_l k_l)`.
/// Returns the `rounds + 1` values including `V_0`; deterministic per seed.
pub fn wealth_path(
    portfolio: &PortfolioModel,
    f: &[f64],
    rounds: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_admissible(portfolio, f)?;
    let draws = portfolio.sample_stream(seed, 0, rounds)?;
    let mut path = Vec::with_capacity(rounds + 1);
    let mut v = 1.0;
    path.push(v);
    for r in 0..rounds {
        let factor = round_factor(portfolio, f, draws.row(r));
        if factor <= 0.0 {
            return Err(Error::Internal(
                "nonpositive wealth factor from an admissible fraction vector",
            ));
        }
        v *= factor;
        path.push(v);
    }
    Ok(path)
}

/// Per-replication growth rates `(1/N) sum_n ln(1 + sum f k)`, replication
/// `r` drawing from stream `r`.
pub fn replication_growths(
    portfolio: &PortfolioModel,
    f: &[f64],
    config: &SimConfig,
) -> Result<Vec<f64>> {
    check_admissible(portfolio, f)?;
    let mut growths = Vec::with_capacity(config.replications);
    for rep in 0..config.replications {
        let draws = portfolio.sample_stream(config.seed, rep as u64, config.rounds)?;
        let mut log_sum = 0.0;
        for r in 0..config.rounds {
            log_sum += round_factor(portfolio, f, draws.row(r)).ln();
        }
        growths.push(log_sum / config.rounds as f64);
    }
    Ok(growths)
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Estimate the growth rate `G` at `f`.
pub fn growth_rate_mc(
    portfolio: &PortfolioModel,
    f: &[f64],
    config: &SimConfig,
) -> Result<GrowthEstimate> {
    let growths = replication_growths(portfolio, f, config)?;
    let (g_mean, g_stderr) = mean_and_stderr(&growths);
    Ok(GrowthEstimate { g_mean, g_stderr })
}

/// Paired growth comparison `g(f_a) - g(f_b)` with both sides evaluated on
/// identical draws, replication by replication. The paired standard error is
/// the meaningful scale for deciding whether `f_a` beats `f_b`.
pub fn compare_growth(
    portfolio: &PortfolioModel,
    f_a: &[f64],
    f_b: &[f64],
    config: &SimConfig,
) -> Result<GrowthComparison> {
    check_admissible(portfolio, f_a)?;
    check_admissible(portfolio, f_b)?;
    let mut diffs = Vec::with_capacity(config.replications);
    for rep in 0..config.replications {
        let draws = portfolio.sample_stream(config.seed, rep as u64, config.rounds)?;
        let mut sum_a = 0.0;
        let mut sum_b = 0.0;
        for r in 0..config.rounds {
            let prices = draws.row(r);
            sum_a += round_factor(portfolio, f_a, prices).ln();
            sum_b += round_factor(portfolio, f_b, prices).ln();
        }
        diffs.push((sum_a - sum_b) / config.rounds as f64);
    }
    let (diff_mean, diff_stderr) = mean_and_stderr(&diffs);
    Ok(GrowthComparison {
        diff_mean,
        diff_stderr,
    })
}

/// Empirical argmax of the growth rate over a grid of fraction vectors, all
/// evaluated on common random numbers (one shared draw per replication).
/// Ties keep the earliest grid point.
pub fn argmax_growth_grid(
    portfolio: &PortfolioModel,
    grid: &[Vec<f64>],
    config: &SimConfig,
) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "grid",
            message: "grid must contain at least one fraction vector".into(),
        });
    }
    for f in grid {
        check_admissible(portfolio, f)?;
    }
    let mut totals = alloc::vec![0.0f64; grid.len()];
    for rep in 0..config.replications {
        let draws = portfolio.sample_stream(config.seed, rep as u64, config.rounds)?;
        for (gi, f) in grid.iter().enumerate() {
            let mut log_sum = 0.0;
            for r in 0..config.rounds {
                log_sum += round_factor(portfolio, f, draws.row(r)).ln();
            }
            totals[gi] += log_sum;
        }
    }
    let mut best = 0;
    for gi in 1..grid.len() {
        if totals[gi] > totals[best] {
            best = gi;
        }
    }
    Ok(grid[best].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::AssetModel;
    use crate::exact;
    use alloc::vec;

    fn single(mu: f64, sigma: f64) -> PortfolioModel {
        PortfolioModel::independent(vec![AssetModel::log_normal(1.0, mu, sigma).unwrap()])
            .unwrap()
    }

    #[test]
    fn no_investment_means_flat_wealth() {
        let p = single(0.05, 0.3);
        let path = wealth_path(&p, &[0.0], 50, 7).unwrap();
        assert_eq!(path.len(), 51);
        assert!(path.iter().all(|v| *v == 1.0));
        let g = growth_rate_mc(&p, &[0.0], &SimConfig::new(10, 5, 1).unwrap()).unwrap();
        assert_eq!(g.g_mean, 0.0);
        assert_eq!(g.g_stderr, 0.0);
    }

    #[test]
    fn degenerate_sigma_compounds_deterministically() {
        let p = PortfolioModel::independent(vec![
            AssetModel::log_normal(1.0, 0.01, 1e-12).unwrap()
        ])
        .unwrap();
        let path = wealth_path(&p, &[1.0], 100, 3).unwrap();
        let expect = (100.0 * 0.01f64).exp();
        assert!(
            (path[100] - expect).abs() <= 1e-6 * expect,
            "V_100 = {} vs {}",
            path[100],
            expect
        );
    }

    #[test]
    fn comonotone_pair_equals_doubled_single() {
        let a = AssetModel::log_normal(1.0, 0.05, 0.3).unwrap();
        let pair = PortfolioModel::bivariate_log_normal(a, a, 1.0).unwrap();
        let one = single(0.05, 0.3);
        let path2 = wealth_path(&pair, &[0.2, 0.2], 200, 11).unwrap();
        let path1 = wealth_path(&one, &[0.4], 200, 11).unwrap();
        for (v2, v1) in path2.iter().zip(&path1) {
            assert!((v2 - v1).abs() <= 1e-12 * v1.abs());
        }
    }

    #[test]
    fn growth_identity_with_wealth_path() {
        let p = single(0.05, 0.3);
        let config = SimConfig::new(400, 1, 9).unwrap();
        let g = replication_growths(&p, &[0.5], &config).unwrap()[0];
        let path = wealth_path(&p, &[0.5], 400, 9).unwrap();
        let from_path = path[400].ln() / 400.0;
        assert!((g - from_path).abs() < 1e-12);
    }

    #[test]
    fn growth_matches_quadrature_objective() {
        let p = single(0.05, 0.3);
        let config = SimConfig::new(1000, 200, 2).unwrap();
        let est = growth_rate_mc(&p, &[0.5], &config).unwrap();
        // quadrature value of E[ln(1 + 0.5 k)]
        let exact = 0.013630121510676275;
        assert!(
            (est.g_mean - exact).abs() < 4.0 * est.g_stderr,
            "g = {} +/- {} vs {exact}",
            est.g_mean,
            est.g_stderr
        );
    }

    #[test]
    fn solved_fraction_beats_perturbations() {
        let p = single(0.05, 0.3);
        let model = p.assets()[0];
        let fstar = exact::solve_exact_single(&model).unwrap().fraction;
        let config = SimConfig::new(1000, 200, 5).unwrap();
        for other in [fstar - 0.1, fstar + 0.1] {
            let cmp = compare_growth(&p, &[fstar], &[other], &config).unwrap();
            assert!(
                cmp.diff_mean > 2.0 * cmp.diff_stderr,
                "f* not better than {other}: {cmp:?}"
            );
        }
    }

    #[test]
    fn argmax_zero_edge_is_zero() {
        let p = single(0.0, 0.3);
        let grid: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.1]).collect();
        let config = SimConfig::new(400, 50, 13).unwrap();
        let best = argmax_growth_grid(&p, &grid, &config).unwrap();
        assert_eq!(best, vec![0.0]);
    }

    #[test]
    fn argmax_near_exact_root() {
        let p = single(0.05, 0.3);
        let fstar = exact::solve_exact_single(&p.assets()[0]).unwrap().fraction;
        let grid: Vec<Vec<f64>> = (0..=50).map(|i| vec![i as f64 * 0.02]).collect();
        let config = SimConfig::new(1000, 200, 17).unwrap();
        let best = argmax_growth_grid(&p, &grid, &config).unwrap();
        assert!(
            (best[0] - fstar).abs() <= 0.02 + 1e-12,
            "argmax {} vs f* {fstar}",
            best[0]
        );
    }

    #[test]
    fn argmax_two_assets_near_exact_multi() {
        let p = PortfolioModel::independent(vec![
            AssetModel::log_normal(1.0, 0.05, 0.3).unwrap(),
            AssetModel::log_normal(1.0, 0.02, 0.25).unwrap(),
        ])
        .unwrap();
        let f0 = exact::initial_guess(&p).unwrap();
        let fstar = exact::solve_exact_multi(&p, &f0).unwrap().fractions;
        let step = 0.05;
        let mut grid = Vec::new();
        for i in 0..=16 {
            for j in 0..=12 {
                let f = vec![i as f64 * step, j as f64 * step];
                if f[0] + f[1] <= 1.0 {
                    grid.push(f);
                }
            }
        }
        let config = SimConfig::new(500, 200, 23).unwrap();
        let best = argmax_growth_grid(&p, &grid, &config).unwrap();
        for l in 0..2 {
            assert!(
                (best[l] - fstar[l]).abs() <= step + 1e-12,
                "axis {l}: argmax {} vs exact {}",
                best[l],
                fstar[l]
            );
        }
    }

    #[test]
    fn admissibility_rejections() {
        let p = single(0.05, 0.3);
        assert!(matches!(
            wealth_path(&p, &[-0.1], 10, 1),
            Err(Error::Inadmissible { .. })
        ));
        assert!(matches!(
            wealth_path(&p, &[1.2], 10, 1),
            Err(Error::Inadmissible { .. })
        ));
        let g = PortfolioModel::independent(vec![
            AssetModel::gaussian(1.0, 0.05, 0.3).unwrap()
        ])
        .unwrap();
        assert!(matches!(
            wealth_path(&g, &[0.5], 10, 1),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn deterministic_per_config() {
        let p = single(0.05, 0.3);
        let config = SimConfig::new(100, 20, 21).unwrap();
        let a = replication_growths(&p, &[0.3], &config).unwrap();
        let b = replication_growths(&p, &[0.3], &config).unwrap();
        assert_eq!(a, b);
    }
}
