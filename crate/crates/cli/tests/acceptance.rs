//! Acceptance suite: one test per release criterion, each asserting the
//! stated tolerance. The harness prints one pass/fail line per criterion.
//!
//! Criterion 7 includes the point (mu = 0.02, sigma = 0.1) where mu exceeds
//! sigma^2: there the exact criterion has no root inside [0, 1] (its
//! integral diverges beyond f = 1), the solver correctly reports the
//! boundary, and the stated bound cannot hold. The test asserts the
//! criterion as written and is expected to fail there; see the failure
//! message for the full analysis.

use kelly_core::distributions::{AssetModel, Family, MomentSet, PortfolioModel};
use kelly_core::{exact, kelly, sim};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lognormal(mu: f64, sigma: f64) -> AssetModel {
    AssetModel::log_normal(1.0, mu, sigma).unwrap()
}

/// 1. Small-parameter agreement with the conventional fraction mu/sigma^2.
#[test]
fn criterion_01_small_parameter_agreement() {
    let gap = |mu: f64, sigma: f64| {
        let conv = kelly::kelly_single_conventional(mu, sigma);
        (kelly::kelly_single_lognormal(mu, sigma) - conv).abs() / conv
    };
    let g1 = gap(0.005, 0.1);
    assert!(g1 <= 0.02, "(0.005, 0.1): relative gap {g1} > 2%");
    let g2 = gap(0.02, 0.25);
    assert!(g2 <= 0.10, "(0.02, 0.25): relative gap {g2} > 10%");
}

/// 2. The closed form never exceeds mu/sigma^2 on the grid; the Gaussian
/// fraction is strictly below it.
#[test]
fn criterion_02_conservativeness() {
    for i in 1..=20 {
        let mu = i as f64 * 0.05;
        for sigma in [0.1, 0.25, 0.5, 1.0] {
            let conv = kelly::kelly_single_conventional(mu, sigma);
            let closed = kelly::kelly_single_lognormal(mu, sigma);
            assert!(closed <= conv, "mu={mu} sigma={sigma}: {closed} > {conv}");
            let gauss = kelly::kelly_single_gaussian(mu, sigma);
            assert!(gauss < conv, "mu={mu} sigma={sigma}: {gauss} >= {conv}");
        }
    }
}

/// 3. General moment path and independent fast path agree to 1e-12 on
/// twenty random portfolios of up to five assets.
#[test]
fn criterion_03_path_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for trial in 0..20 {
        let l = rng.gen_range(1..=5);
        let assets: Vec<AssetModel> = (0..l)
            .map(|_| {
                let family = if rng.gen_bool(0.5) {
                    Family::LogNormal
                } else {
                    Family::Gaussian
                };
                AssetModel::new(
                    family,
                    rng.gen_range(0.5..5.0),
                    rng.gen_range(-0.2..0.3),
                    rng.gen_range(0.05..1.2),
                )
                .unwrap()
            })
            .collect();
        let p = PortfolioModel::independent(assets.clone()).unwrap();
        let general = kelly::build_system(&p.analytic_moments().unwrap()).unwrap();
        let (bs, as_): (Vec<f64>, Vec<f64>) = assets
            .iter()
            .map(|a| match a.family() {
                Family::LogNormal => kelly::moment_integrals_lognormal(a.mu(), a.sigma()),
                Family::Gaussian => kelly::moment_integrals_gaussian(a.mu(), a.sigma()),
            })
            .unzip();
        let fast = kelly::build_system_independent(&bs, &as_).unwrap();
        for i in 0..l {
            assert!(
                (general.rhs()[i] - fast.rhs()[i]).abs() <= 1e-12,
                "trial {trial}: b[{i}]"
            );
            for j in 0..l {
                assert!(
                    (general.matrix()[(i, j)] - fast.matrix()[(i, j)]).abs() <= 1e-12,
                    "trial {trial}: M[({i},{j})]"
                );
            }
        }
    }
}

/// 4. Two identical, perfectly correlated stocks: each fraction is exactly
/// half the single-stock closed form, with the singular flag set.
#[test]
fn criterion_04_singular_limit() {
    let (mu, sigma) = (0.05, 0.3);
    let a = lognormal(mu, sigma);
    let p = PortfolioModel::bivariate_log_normal(a, a, 1.0).unwrap();
    let result = kelly::solve_portfolio(&p).unwrap();
    assert!(result.flags.singular_system, "SingularSystem flag not set");
    let half = kelly::kelly_single_lognormal(mu, sigma) / 2.0;
    for (l, f) in result.fractions.iter().enumerate() {
        assert!(
            (f - half).abs() <= 1e-12,
            "fraction {l} = {f}, expected {half}"
        );
    }
}

/// 5. Correlation ordering on a 20-point growth grid.
#[test]
fn criterion_05_correlation_ordering() {
    for i in 1..=20 {
        let mu1 = i as f64 / 20.0;
        let solve = |rho: f64| {
            let a = lognormal(mu1, 1.0);
            let b = lognormal(0.5 * mu1, 0.5);
            let p = PortfolioModel::bivariate_log_normal(a, b, rho).unwrap();
            kelly::solve_portfolio(&p).unwrap().fractions
        };
        let plus = solve(0.5);
        let zero = solve(0.0);
        let minus = solve(-0.5);
        for l in 0..2 {
            assert!(
                plus[l] < zero[l] && zero[l] < minus[l],
                "mu1={mu1} asset {l}: f(+0.5)={} f(0)={} f(-0.5)={}",
                plus[l],
                zero[l],
                minus[l]
            );
        }
    }
}

/// 6. Three independent stocks: the portfolio fractions track the
/// single-stock closed form at small growth and fall below it at large.
#[test]
fn criterion_06_single_stock_crossover() {
    let sigmas = [1.0, 0.5, 0.7];
    // growth linkage mu_l = sigma_l * mu1, with asset 1 at mu1
    let solve = |mu1: f64| {
        let assets: Vec<AssetModel> = sigmas
            .iter()
            .enumerate()
            .map(|(l, &s)| lognormal(if l == 0 { mu1 } else { s * mu1 }, s))
            .collect();
        let p = PortfolioModel::independent(assets.clone()).unwrap();
        (assets, kelly::solve_portfolio(&p).unwrap().fractions)
    };
    let (assets, multi) = solve(0.02);
    for l in 0..3 {
        let single = kelly::kelly_single_lognormal(assets[l].mu(), assets[l].sigma());
        let rel = (multi[l] - single).abs() / single;
        assert!(rel <= 0.05, "mu1=0.02 asset {l}: {rel} > 5%");
    }
    let (assets, multi) = solve(0.8);
    for l in 0..3 {
        let single = kelly::kelly_single_lognormal(assets[l].mu(), assets[l].sigma());
        assert!(
            multi[l] < single,
            "mu1=0.8 asset {l}: {} not below {single}",
            multi[l]
        );
    }
}

/// 7. Exact root against the closed form on the small-parameter grid, with
/// a residual certificate at the solution.
#[test]
fn criterion_07_exact_vs_linear() {
    let mut failures = Vec::new();
    for mu in [0.005, 0.01, 0.02] {
        for sigma in [0.1, 0.25] {
            let model = lognormal(mu, sigma);
            let s = exact::solve_exact_single(&model).unwrap();
            let closed = kelly::kelly_single_lognormal(mu, sigma);
            let gap = (s.fraction - closed).abs() / s.fraction;
            let residual = s.residual.abs();
            if gap > 0.10 || residual > 1e-10 {
                failures.push(format!(
                    "(mu={mu}, sigma={sigma}): gap {:.4} (limit 0.10), residual {:.3e} \
                     (limit 1e-10), status {:?}; for mu > sigma^2 the criterion integral \
                     diverges beyond f = 1 and no interior root exists, so the solver \
                     returns the f = 1 boundary while the closed form reports {closed:.4}",
                    gap, residual, s.status
                ));
            }
        }
    }
    assert!(
        failures.is_empty(),
        "exact-vs-closed bound violated at {} grid point(s):\n{}",
        failures.len(),
        failures.join("\n")
    );
}

/// 8. Monte Carlo growth argmax agrees with the exact root, and the root
/// beats +/- 0.1 perturbations beyond two paired standard errors.
#[test]
fn criterion_08_monte_carlo_optimality() {
    let p = PortfolioModel::independent(vec![lognormal(0.05, 0.3)]).unwrap();
    let fstar = exact::solve_exact_single(&p.assets()[0]).unwrap().fraction;
    let config = sim::SimConfig::new(1000, 200, 17).unwrap();
    let grid: Vec<Vec<f64>> = (0..=50).map(|i| vec![i as f64 * 0.02]).collect();
    let best = sim::argmax_growth_grid(&p, &grid, &config).unwrap();
    assert!(
        (best[0] - fstar).abs() <= 0.02 + 1e-12,
        "argmax {} more than one grid step from f* = {fstar}",
        best[0]
    );
    for other in [fstar - 0.1, fstar + 0.1] {
        let cmp = sim::compare_growth(&p, &[fstar], &[other], &config).unwrap();
        assert!(
            cmp.diff_mean > 2.0 * cmp.diff_stderr,
            "g(f*) does not beat g({other}) beyond 2 se: {cmp:?}"
        );
    }
}

/// 9. The classic binary bet lands on the p - q edge.
#[test]
fn criterion_09_discrete_sanity() {
    let m = kelly_core::DiscreteOutcomeModel::single(vec![0.6, 0.4], vec![1.0, -1.0]).unwrap();
    let s = exact::solve_discrete_single(&m).unwrap();
    assert!(
        (s.fraction - 0.2).abs() <= 1e-10,
        "binary Kelly fraction {} != 0.2",
        s.fraction
    );
}

/// 10. Sampled moments match analytic moments within four standard errors
/// for ten random models, including strongly correlated pairs.
#[test]
fn criterion_10_moment_sampler_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let n = 1_000_000usize;
    let mut portfolios = Vec::new();
    for _ in 0..4 {
        let family = if rng.gen_bool(0.5) {
            Family::LogNormal
        } else {
            Family::Gaussian
        };
        let a = AssetModel::new(
            family,
            rng.gen_range(0.5..3.0),
            rng.gen_range(-0.1..0.2),
            rng.gen_range(0.05..0.5),
        )
        .unwrap();
        portfolios.push(PortfolioModel::independent(vec![a]).unwrap());
    }
    for _ in 0..2 {
        let a = AssetModel::new(
            Family::LogNormal,
            rng.gen_range(0.5..3.0),
            rng.gen_range(-0.1..0.2),
            rng.gen_range(0.05..0.5),
        )
        .unwrap();
        let b = AssetModel::new(
            Family::Gaussian,
            rng.gen_range(0.5..3.0),
            rng.gen_range(-0.1..0.2),
            rng.gen_range(0.05..0.5),
        )
        .unwrap();
        portfolios.push(PortfolioModel::independent(vec![a, b]).unwrap());
    }
    for rho in [0.8, -0.8, 0.3, -0.5] {
        let a = AssetModel::new(
            Family::LogNormal,
            rng.gen_range(0.5..3.0),
            rng.gen_range(-0.1..0.2),
            rng.gen_range(0.05..0.5),
        )
        .unwrap();
        let b = AssetModel::new(
            Family::LogNormal,
            rng.gen_range(0.5..3.0),
            rng.gen_range(-0.1..0.2),
            rng.gen_range(0.05..0.5),
        )
        .unwrap();
        portfolios.push(PortfolioModel::bivariate_log_normal(a, b, rho).unwrap());
    }
    assert_eq!(portfolios.len(), 10);

    for (pi, p) in portfolios.iter().enumerate() {
        let seed = 9000 + pi as u64;
        let draws = p.sample(seed, n).unwrap();
        let x0: Vec<f64> = p.assets().iter().map(|a| a.x0()).collect();
        let sampled = MomentSet::from_samples(&draws, &x0).unwrap();
        let analytic = p.analytic_moments().unwrap();
        let l = p.len();
        for i in 0..l {
            let se = (p.assets()[i].variance() / n as f64).sqrt();
            let diff = (sampled.m1()[i] - analytic.m1()[i]).abs();
            assert!(diff < 4.0 * se, "model {pi} m1[{i}]: {diff} vs 4se {}", 4.0 * se);
        }
        for i in 0..l {
            for j in i..l {
                let mean = analytic.m2()[(i, j)];
                let second = pair_square_moment(p, i, j);
                let se = ((second - mean * mean).max(0.0) / n as f64).sqrt();
                let diff = (sampled.m2()[(i, j)] - mean).abs();
                assert!(
                    diff < 4.0 * se,
                    "model {pi} m2[({i},{j})]: {diff} vs 4se {}",
                    4.0 * se
                );
            }
        }
    }
}

/// `E[(x_i x_j)^2]`, the oracle for the sampler standard errors.
fn pair_square_moment(portfolio: &PortfolioModel, i: usize, j: usize) -> f64 {
    use kelly_core::Dependence;
    let a = &portfolio.assets()[i];
    let b = &portfolio.assets()[j];
    let fourth = |m: &AssetModel| match m.family() {
        Family::LogNormal => m.x0().powi(4) * (4.0 * m.mu() + 6.0 * m.sigma() * m.sigma()).exp(),
        Family::Gaussian => {
            let mean = m.x0() * (1.0 + m.mu());
            let sd = m.x0() * m.sigma();
            mean.powi(4) + 6.0 * mean.powi(2) * sd.powi(2) + 3.0 * sd.powi(4)
        }
    };
    if i == j {
        return fourth(a);
    }
    match portfolio.dependence() {
        Dependence::Independent => a.second_moment() * b.second_moment(),
        Dependence::BivariateLogNormal { rho } => {
            (a.x0() * b.x0()).powi(2)
                * (2.0 * a.mu()
                    + 2.0 * b.mu()
                    + a.sigma() * a.sigma()
                    + b.sigma() * b.sigma()
                    + 4.0 * rho * a.sigma() * b.sigma())
                .exp()
        }
        Dependence::EmpiricalSamples(_) => unreachable!(),
    }
}

/// 11. The Gaussian limit of the log-normal density holds at small
/// volatility (2% of peak over +/- 4 sigma) and visibly breaks at large.
#[test]
fn criterion_11_gaussian_limit_regime() {
    let gap_ratio = |mu: f64, sigma: f64| {
        let a = lognormal(mu, sigma);
        let g = a.gaussian_limit().unwrap();
        let mut sup: f64 = 0.0;
        let mut peak: f64 = 0.0;
        for i in 0..=400 {
            let x = 1.0 - 4.0 * sigma + 8.0 * sigma * i as f64 / 400.0;
            let pg = g.pdf(x).unwrap();
            let pl = if x > 0.0 { a.pdf(x).unwrap() } else { 0.0 };
            sup = sup.max((pl - pg).abs());
            peak = peak.max(pg);
        }
        sup / peak
    };
    let small = gap_ratio(0.005, 0.01);
    assert!(small <= 0.02, "sigma = 0.01: sup gap {small} of peak > 2%");
    let large = gap_ratio(0.005, 0.5);
    assert!(
        large > 0.02,
        "sigma = 0.5 should break the small-volatility limit, got {large}"
    );
}
