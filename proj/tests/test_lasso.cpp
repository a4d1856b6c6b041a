#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pblasso/lasso.hpp"

using namespace pblasso;

TEST_SUITE("lasso_core") {

TEST_CASE("soft_threshold")
{
    CHECK(soft_threshold(3.0, 1.0) == 2.0);
    CHECK(soft_threshold(-0.5, 1.0) == 0.0);
    CHECK(soft_threshold(-3.0, 1.0) == -2.0);
    CHECK(soft_threshold(1.0, 1.0) == 0.0);
    CHECK_THROWS_AS(soft_threshold(std::numeric_limits<double>::quiet_NaN(), 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(soft_threshold(std::numeric_limits<double>::infinity(), 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(soft_threshold(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("dataset validation")
{
    Dataset d{Eigen::MatrixXd::Ones(3, 2), Eigen::VectorXd::Ones(3)};
    CHECK_NOTHROW(validate(d));
    d.X(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(validate(d), std::invalid_argument);
    Dataset zero{Eigen::MatrixXd::Ones(3, 2), Eigen::VectorXd::Ones(3)};
    zero.X.col(1).setZero();
    CHECK_THROWS_AS(validate(zero), std::invalid_argument);
    CHECK_THROWS_AS(fit_lasso(zero, 1.0), std::invalid_argument);
    Dataset shape{Eigen::MatrixXd::Ones(3, 2), Eigen::VectorXd::Ones(4)};
    CHECK_THROWS_AS(validate(shape), std::invalid_argument);
    Dataset tiny{Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1)};
    CHECK_THROWS_AS(validate(tiny), std::invalid_argument);
}

TEST_CASE("lambda = 0 recovers least squares")
{
    RngStream rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const Dataset d = fixtures::random_dataset(rng, 40, 5);
        const LassoFit fit = fit_lasso(d, 0.0);
        const Eigen::VectorXd ols = d.X.colPivHouseholderQr().solve(d.y);
        CHECK(fit.converged);
        CHECK((fit.beta - ols).lpNorm<Eigen::Infinity>() < 1e-8);
    }
}

TEST_CASE("penalty at or above lambda_max gives the zero vector")
{
    RngStream rng(12);
    const Dataset d = fixtures::random_dataset(rng, 30, 4);
    const double lmax = 2.0 * (d.X.transpose() * d.y).cwiseAbs().maxCoeff();
    CHECK(lambda_max(d) == doctest::Approx(lmax).epsilon(1e-15));
    for (double f : {1.0, 1.5, 10.0}) {
        const LassoFit fit = fit_lasso(d, f * lmax);
        CHECK(fit.beta.isZero(0.0));
    }
    // just below lambda_max something enters
    CHECK_FALSE(fit_lasso(d, 0.99 * lmax).beta.isZero(0.0));
}

TEST_CASE("orthogonal design matches golden-section search per coordinate")
{
    // X'X = n I: the criterion separates into n t^2 - 2 t X_j'y + lambda |t|.
    const Index n = 64, p = 4;
    Eigen::MatrixXd H = Eigen::MatrixXd::Ones(1, 1);
    while (H.rows() < n) {
        const Index m = H.rows();
        Eigen::MatrixXd next(2 * m, 2 * m);
        next << H, H, H, -H;
        H = next;
    }
    RngStream rng(13);
    Dataset d{H.leftCols(p), Eigen::VectorXd(n)};
    for (Index i = 0; i < n; ++i) d.y(i) = 0.4 * d.X(i, 0) - 0.1 * d.X(i, 2) + rng.normal();
    REQUIRE((d.X.transpose() * d.X - n * Eigen::MatrixXd::Identity(p, p)).norm() == 0.0);
    for (double lambda : {0.0, 5.0, 20.0, 60.0}) {
        const LassoFit fit = fit_lasso(d, lambda);
        for (Index j = 0; j < p; ++j) {
            const double xy = d.X.col(j).dot(d.y);
            const double ols = xy / n;
            auto f = [&](double t) { return n * t * t - 2.0 * t * xy + lambda * std::abs(t); };
            const double brute = oracle::golden_section(f, -10.0, 10.0);
            CHECK(fit.beta(j) == doctest::Approx(soft_threshold(ols, lambda / (2.0 * n))).epsilon(1e-12));
            CHECK(std::abs(fit.beta(j) - brute) < 1e-7);
        }
    }
}

TEST_CASE("kkt_gap")
{
    SUBCASE("zero at an analytic one-dimensional optimum")
    {
        Dataset d{Eigen::MatrixXd(4, 1), Eigen::VectorXd(4)};
        d.X << 1, 2, -1, 0.5;
        d.y << 2, 3, -1, 1;
        const double xx = d.X.col(0).squaredNorm(), xy = d.X.col(0).dot(d.y);
        const double lambda = 3.0;
        Eigen::VectorXd b(1);
        b(0) = soft_threshold(xy, lambda / 2.0) / xx;
        CHECK(kkt_gap(d, lambda, b) < 1e-12);
    }
    SUBCASE("beta = 0 with lambda = 0")
    {
        RngStream rng(14);
        const Dataset d = fixtures::random_dataset(rng, 15, 3);
        const double expected = 2.0 * (d.X.transpose() * d.y).cwiseAbs().maxCoeff();
        CHECK(kkt_gap(d, 0.0, Eigen::VectorXd::Zero(3)) == doctest::Approx(expected));
        CHECK(expected > 0.0);
    }
    SUBCASE("larger away from the optimum")
    {
        RngStream rng(15);
        const Dataset d = fixtures::random_dataset(rng, 20, 3);
        const double lambda = 0.2 * lambda_max(d);
        const LassoFit fit = fit_lasso(d, lambda);
        const double at_fit = kkt_gap(d, lambda, fit.beta);
        CHECK(at_fit <= SolverOptions{}.kkt_tol);
        for (Index j = 0; j < 3; ++j) {
            Eigen::VectorXd off = fit.beta;
            off(j) += 0.1;
            // direct formula
            const Eigen::VectorXd r = d.y - d.X * off;
            double gap = 0.0;
            for (Index k = 0; k < 3; ++k) {
                const double g = 2.0 * d.X.col(k).dot(r);
                const double v = off(k) == 0.0 ? std::max(std::abs(g) - lambda, 0.0)
                                               : std::abs(g - lambda * (off(k) > 0 ? 1.0 : -1.0));
                gap = std::max(gap, v);
            }
            CHECK(kkt_gap(d, lambda, off) == doctest::Approx(gap).epsilon(1e-12));
            CHECK(kkt_gap(d, lambda, off) > at_fit);
        }
    }
    SUBCASE("dimension mismatch")
    {
        RngStream rng(16);
        const Dataset d = fixtures::random_dataset(rng, 10, 3);
        CHECK_THROWS_AS(kkt_gap(d, 1.0, Eigen::VectorXd::Zero(2)), std::invalid_argument);
    }
}

TEST_CASE("fit fields are consistent")
{
    RngStream rng(17);
    for (int rep = 0; rep < 30; ++rep) {
        const Dataset d = fixtures::random_dataset(rng, 25, 6);
        const double lambda = rng.uniform() * lambda_max(d);
        const LassoFit fit = fit_lasso(d, lambda);
        REQUIRE(fit.converged);
        const double obj = (d.y - d.X * fit.beta).squaredNorm() + lambda * fit.beta.lpNorm<1>();
        CHECK(std::abs(fit.objective - obj) <= 1e-10 * std::max(1.0, std::abs(obj)));
        CHECK(fit.kkt_gap <= SolverOptions{}.kkt_tol);
        CHECK(fit.lambda == lambda);
    }
}

TEST_CASE("objective never exceeds its warm-start value")
{
    RngStream rng(18);
    for (int rep = 0; rep < 30; ++rep) {
        const Dataset d = fixtures::random_dataset(rng, 30, 5);
        const double lambda = 0.3 * lambda_max(d);
        Eigen::VectorXd warm(5);
        for (Index j = 0; j < 5; ++j) warm(j) = 3.0 * rng.normal();
        const LassoFit fit = fit_lasso(d, lambda, warm);
        CHECK(fit.objective <= lasso_objective(d, lambda, warm));
        // warm start does not move the minimizer
        const LassoFit cold = fit_lasso(d, lambda);
        CHECK((fit.beta - cold.beta).lpNorm<Eigen::Infinity>() < 1e-8);
    }
    RngStream r2(19);
    const Dataset d = fixtures::random_dataset(r2, 10, 3);
    CHECK_THROWS_AS(fit_lasso(d, 1.0, Eigen::VectorXd::Zero(2)), std::invalid_argument);
    CHECK_THROWS_AS(fit_lasso(d, -1.0), std::invalid_argument);
}

TEST_CASE("non-convergence is reported, not thrown")
{
    RngStream rng(20);
    Dataset d = fixtures::random_dataset(rng, 30, 6);
    // strongly correlated columns slow coordinate descent down
    for (Index i = 0; i < d.n(); ++i) d.X(i, 1) = d.X(i, 0) + 1e-3 * d.X(i, 1);
    SolverOptions opts;
    opts.max_sweeps = 2;
    const LassoFit fit = fit_lasso(d, 0.01, std::nullopt, opts);
    CHECK_FALSE(fit.converged);
    CHECK(fit.iterations <= 2);
}

TEST_CASE("p > n with a tiny lambda converges to a sparse KKT point")
{
    RngStream rng(25);
    for (int rep = 0; rep < 20; ++rep) {
        const Dataset d = fixtures::random_dataset(rng, 4 + rep % 3, 8);
        const LassoFit fit = fit_lasso(d, 1e-3 * lambda_max(d));
        CHECK(fit.converged);
        CHECK(fit.kkt_gap <= 1e-8);
        CHECK((fit.beta.array() != 0.0).count() <= d.n());
    }
}

TEST_CASE("strongly correlated columns converge")
{
    RngStream rng(26);
    Dataset d = fixtures::random_dataset(rng, 40, 5);
    for (Index i = 0; i < d.n(); ++i) d.X(i, 1) = d.X(i, 0) + 1e-4 * d.X(i, 1);
    const LassoFit fit = fit_lasso(d, 1e-2);
    CHECK(fit.converged);
    CHECK(fit.kkt_gap <= 1e-8);
}

TEST_CASE("scaling: (c y, c lambda) gives c beta")
{
    RngStream rng(21);
    for (int rep = 0; rep < 20; ++rep) {
        const Dataset d = fixtures::random_dataset(rng, 30, 4);
        const double lambda = 0.2 * lambda_max(d);
        const double c = 0.5 + 3.0 * rng.uniform();
        const LassoFit a = fit_lasso(d, lambda);
        Dataset s = d;
        s.y *= c;
        const LassoFit b = fit_lasso(s, c * lambda);
        CHECK((b.beta - c * a.beta).lpNorm<Eigen::Infinity>() < 1e-7 * c);
    }
}

// The squared loss scales by c^2 under y -> c y, the penalty only by c, so this
// form holds only when the solution is zero or unpenalized.
TEST_CASE("scaling: (c y, c^2 lambda) gives c beta" * doctest::may_fail())
{
    RngStream rng(21);
    for (int rep = 0; rep < 20; ++rep) {
        const Dataset d = fixtures::random_dataset(rng, 30, 4);
        const double lambda = 0.2 * lambda_max(d);
        const double c = 0.5 + 3.0 * rng.uniform();
        const LassoFit a = fit_lasso(d, lambda);
        Dataset s = d;
        s.y *= c;
        const LassoFit b = fit_lasso(s, c * c * lambda);
        CHECK((b.beta - c * a.beta).lpNorm<Eigen::Infinity>() < 1e-7 * c);
    }
}

TEST_CASE("column permutation permutes the solution")
{
    RngStream rng(22);
    for (int rep = 0; rep < 20; ++rep) {
        const Dataset d = fixtures::random_dataset(rng, 30, 5);
        const double lambda = 0.25 * lambda_max(d);
        std::vector<Index> perm(5);
        std::iota(perm.begin(), perm.end(), 0);
        for (Index j = 4; j > 0; --j)
            std::swap(perm[static_cast<std::size_t>(j)],
                      perm[rng.index(static_cast<std::size_t>(j + 1))]);
        Dataset q = d;
        for (Index j = 0; j < 5; ++j) q.X.col(j) = d.X.col(perm[static_cast<std::size_t>(j)]);
        const LassoFit a = fit_lasso(d, lambda);
        const LassoFit b = fit_lasso(q, lambda);
        for (Index j = 0; j < 5; ++j)
            CHECK(std::abs(b.beta(j) - a.beta(perm[static_cast<std::size_t>(j)])) < 1e-8);
    }
}

TEST_CASE("agrees with grid search for n <= 8, p <= 2")
{
    RngStream rng(23);
    int tested = 0;
    for (int rep = 0; rep < 80 && tested < 30; ++rep) {
        const Index p = 1 + static_cast<Index>(rng.index(2));
        const Index n = p + 1 + static_cast<Index>(rng.index(static_cast<std::size_t>(8 - p)));
        Dataset d = fixtures::random_dataset(rng, n, p);
        const double lambda = 1.2 * rng.uniform() * lambda_max(d);
        const LassoFit fit = fit_lasso(d, lambda);
        const Eigen::VectorXd ols = d.X.colPivHouseholderQr().solve(d.y);
        const double R = std::min(ols.lpNorm<1>() + 1.0, 6.0);
        if (ols.lpNorm<1>() + 1.0 > 6.0) continue;  // keep the scan cheap
        const Eigen::VectorXd ref = oracle::grid_search_lasso(d.X, d.y, lambda, R);
        CHECK((fit.beta - ref).lpNorm<Eigen::Infinity>() < 5e-3);
        ++tested;
    }
    CHECK(tested == 30);
}

TEST_CASE("lambda grid")
{
    RngStream rng(24);
    const Dataset d = fixtures::random_dataset(rng, 30, 4);
    const Eigen::VectorXd g = default_lambda_grid(d);
    REQUIRE(g.size() == 50);
    CHECK(g(0) == doctest::Approx(lambda_max(d)));
    CHECK(g(49) == doctest::Approx(1e-3 * lambda_max(d)));
    for (Index k = 1; k < 50; ++k) {
        CHECK(g(k) < g(k - 1));
        CHECK(g(k) / g(k - 1) == doctest::Approx(g(1) / g(0)));
    }
}

TEST_CASE("cross_validate_lambda")
{
    RngStream gen(25);
    const Dataset d = fixtures::random_dataset(gen, 60, 4);

    SUBCASE("single grid value")
    {
        RngStream rng(1);
        Eigen::VectorXd grid(1);
        grid << 3.7;
        CHECK(cross_validate_lambda(d, grid, 10, rng) == 3.7);
    }
    SUBCASE("noiseless data prefers lambda = 0")
    {
        Dataset exact = d;
        exact.y = d.X * Eigen::Vector4d(1.0, -2.0, 0.5, 0.0);
        Eigen::VectorXd grid(2);
        grid << 0.0, 10.0 * lambda_max(exact);
        RngStream rng(2);
        CHECK(cross_validate_lambda(exact, grid, 10, rng) == 0.0);
    }
    SUBCASE("ties go to the larger lambda")
    {
        // Every grid value above lambda_max of every training fold gives the
        // zero fit, so all errors are equal.
        Eigen::VectorXd grid(3);
        grid << 100.0 * lambda_max(d), 200.0 * lambda_max(d), 300.0 * lambda_max(d);
        RngStream rng(3);
        CHECK(cross_validate_lambda(d, grid, 5, rng) == grid(2));
    }
    SUBCASE("bit-exact reproducibility")
    {
        const Eigen::VectorXd grid = default_lambda_grid(d);
        RngStream a(99), b(99);
        const double la = cross_validate_lambda(d, grid, 10, a);
        const double lb = cross_validate_lambda(d, grid, 10, b);
        CHECK(la == lb);
    }
    SUBCASE("input validation")
    {
        RngStream rng(4);
        CHECK_THROWS_AS(cross_validate_lambda(d, Eigen::VectorXd(0), 10, rng),
                        std::invalid_argument);
        Eigen::VectorXd neg(1);
        neg << -1.0;
        CHECK_THROWS_AS(cross_validate_lambda(d, neg, 10, rng), std::invalid_argument);
        CHECK_THROWS_AS(cross_validate_lambda(d, default_lambda_grid(d), 1, rng),
                        std::invalid_argument);
        CHECK_THROWS_AS(cross_validate_lambda(d, default_lambda_grid(d), 61, rng),
                        std::invalid_argument);
    }
}

TEST_CASE("solver options validation")
{
    SolverOptions o;
    CHECK_NOTHROW(o.validate());
    o.max_sweeps = 0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    o = SolverOptions{};
    o.tol = -1.0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
}

}  // TEST_SUITE
