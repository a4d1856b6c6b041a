#include "pblasso/lasso.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace pblasso {

namespace {

double sign(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

// gradient_half = X'r (for the data form, = xty - gram beta).
double kkt_gap_from_score(const Eigen::VectorXd& score, double lambda,
                          const Eigen::VectorXd& beta)
{
    double gap = 0.0;
    for (Index j = 0; j < beta.size(); ++j) {
        const double g = 2.0 * score(j);
        const double v = beta(j) == 0.0 ? std::max(std::abs(g) - lambda, 0.0)
                                         : std::abs(g - lambda * sign(beta(j)));
        gap = std::max(gap, v);
    }
    return gap;
}

Eigen::MatrixXd gram_block(const QuadraticForm& form, const std::vector<Index>& support)
{
    const Index k = static_cast<Index>(support.size());
    Eigen::MatrixXd g(k, k);
    for (Index a = 0; a < k; ++a)
        for (Index b = 0; b < k; ++b)
            g(a, b) = form.gram(support[static_cast<std::size_t>(a)], support[static_cast<std::size_t>(b)]);
    return g;
}

// Move t along direction d (on the support) until 1 or the first sign change;
// the coordinate that hits zero is set to exactly zero and dropped.
void truncated_move(Eigen::VectorXd& t, std::vector<Index>& support, const Eigen::VectorXd& d,
                    double step)
{
    Index blocking = -1;
    for (Index a = 0; a < d.size(); ++a) {
        const double b0 = t(support[static_cast<std::size_t>(a)]);
        if (b0 * (b0 + step * d(a)) < 0.0 || (b0 + step * d(a) == 0.0 && d(a) != 0.0)) {
            const double s = -b0 / d(a);
            if (s <= step) {
                step = s;
                blocking = a;
            }
        }
    }
    for (Index a = 0; a < d.size(); ++a) t(support[static_cast<std::size_t>(a)]) += step * d(a);
    if (blocking >= 0) {
        t(support[static_cast<std::size_t>(blocking)]) = 0.0;
        support.erase(support.begin() + blocking);
    }
}

// Active-set step on the current sign orthant. Null directions of the support
// Gram block leave the fit unchanged and lower the penalty, so they are followed
// to the next zero first; then a Newton step on the smooth restricted problem.
// Kept only if the objective decreases.
void orthant_step(const QuadraticForm& form, double lambda, Eigen::VectorXd& beta,
                  Eigen::VectorXd& score)
{
    std::vector<Index> support;
    for (Index j = 0; j < beta.size(); ++j)
        if (beta(j) != 0.0) support.push_back(j);
    Eigen::VectorXd trial = beta;
    while (!support.empty()) {
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram_block(form, support), Eigen::ComputeFullV);
        const Eigen::VectorXd& sv = svd.singularValues();
        const double cut = 1e-12 * std::max(sv(0), 1e-300);
        Index rank = 0;
        while (rank < sv.size() && sv(rank) > cut) ++rank;
        if (rank == sv.size()) break;
        const Eigen::MatrixXd null = svd.matrixV().rightCols(sv.size() - rank);
        Eigen::VectorXd s(static_cast<Index>(support.size()));
        for (Index a = 0; a < s.size(); ++a) s(a) = sign(trial(support[static_cast<std::size_t>(a)]));
        const Eigen::VectorXd u = -(null * (null.transpose() * s));
        if (u.norm() < 1e-12) break;
        truncated_move(trial, support, u, std::numeric_limits<double>::infinity());
    }
    if (!support.empty()) {
        const Eigen::VectorXd sc = form.xty - form.gram * trial;
        Eigen::VectorXd rhs(static_cast<Index>(support.size()));
        for (Index a = 0; a < rhs.size(); ++a) {
            const Index j = support[static_cast<std::size_t>(a)];
            rhs(a) = sc(j) - 0.5 * lambda * sign(trial(j));
        }
        const Eigen::VectorXd d = gram_block(form, support).completeOrthogonalDecomposition().solve(rhs);
        if (d.allFinite()) truncated_move(trial, support, d, 1.0);
    }
    const double before = form.value(beta) + lambda * beta.lpNorm<1>();
    const double after = form.value(trial) + lambda * trial.lpNorm<1>();
    if (after < before) {
        beta = std::move(trial);
        score = form.xty - form.gram * beta;
    }
}

void check_lambda(double lambda)
{
    if (!std::isfinite(lambda) || lambda < 0.0)
        throw std::invalid_argument("lasso: lambda must be finite and >= 0");
}

}  // namespace

void SolverOptions::validate() const
{
    if (max_sweeps <= 0) throw std::invalid_argument("solver: max_sweeps must be positive");
    if (!(tol >= 0.0) || !(kkt_tol >= 0.0))
        throw std::invalid_argument("solver: tolerances must be >= 0");
}

double QuadraticForm::value(const Eigen::VectorXd& t) const
{
    return yty - 2.0 * t.dot(xty) + t.dot(gram * t);
}

QuadraticForm quadratic_form(const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
{
    QuadraticForm f;
    f.gram = X.transpose() * X;
    f.xty = X.transpose() * y;
    f.yty = y.squaredNorm();
    f.n = X.rows();
    return f;
}

QuadraticForm quadratic_form(const Dataset& data) { return quadratic_form(data.X, data.y); }

QuadraticForm weighted_quadratic_form(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& w)
{
    if (w.size() != X.rows() || y.size() != X.rows())
        throw std::invalid_argument("weighted_quadratic_form: length mismatch");
    const Eigen::MatrixXd wx = X.array().colwise() * w.array();
    QuadraticForm f;
    f.gram = wx.transpose() * X;
    f.xty = wx.transpose() * y;
    f.yty = (y.array().square() * w.array()).sum();
    f.n = X.rows();
    return f;
}

double soft_threshold(double z, double gamma)
{
    if (!std::isfinite(z) || !std::isfinite(gamma) || gamma < 0.0)
        throw std::invalid_argument("soft_threshold: need finite z and finite gamma >= 0");
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

LassoFit solve_lasso(const QuadraticForm& form, double lambda,
                     const std::optional<Eigen::VectorXd>& warm_start, const SolverOptions& opts)
{
    check_lambda(lambda);
    opts.validate();
    const Index p = form.p();
    if (warm_start && warm_start->size() != p)
        throw std::invalid_argument("lasso: warm start has length " +
                                    std::to_string(warm_start->size()) + ", expected " +
                                    std::to_string(p));

    Eigen::VectorXd beta = warm_start ? *warm_start : Eigen::VectorXd::Zero(p);
    for (Index j = 0; j < p; ++j)
        if (form.gram(j, j) <= 0.0) beta(j) = 0.0;

    Eigen::VectorXd scale(p);
    const double n = std::max<double>(1.0, static_cast<double>(form.n));
    for (Index j = 0; j < p; ++j) scale(j) = std::sqrt(std::max(form.gram(j, j), 0.0) / n);

    Eigen::VectorXd score = form.xty - form.gram * beta;
    const double half_lambda = 0.5 * lambda;

    LassoFit fit;
    fit.lambda = lambda;
#ifndef NDEBUG
    double previous = form.value(beta) + lambda * beta.lpNorm<1>();
#endif
    for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        fit.iterations = sweep;
        double max_change = 0.0;
        for (Index j = 0; j < p; ++j) {
            const double gjj = form.gram(j, j);
            if (gjj <= 0.0) continue;
            const double z = score(j) + gjj * beta(j);
            const double updated = soft_threshold(z, half_lambda) / gjj;
            const double delta = updated - beta(j);
            if (delta != 0.0) {
                score.noalias() -= form.gram.col(j) * delta;
                beta(j) = updated;
                max_change = std::max(max_change, std::abs(delta) * scale(j));
            }
        }
#ifndef NDEBUG
        const double current = form.value(beta) + lambda * beta.lpNorm<1>();
        assert(current <= previous + 1e-9 * std::max(1.0, std::abs(previous)));
        previous = current;
#endif
        if (sweep % 25 == 0) orthant_step(form, lambda, beta, score);
        if (max_change < opts.tol || sweep % 25 == 0) {
            score = form.xty - form.gram * beta;
            if (kkt_gap_from_score(score, lambda, beta) <= opts.kkt_tol) {
                fit.converged = true;
                break;
            }
        }
    }
    score = form.xty - form.gram * beta;
    fit.kkt_gap = kkt_gap_from_score(score, lambda, beta);
    fit.objective = form.value(beta) + lambda * beta.lpNorm<1>();
    fit.beta = std::move(beta);
    return fit;
}

double lasso_objective(const Dataset& data, double lambda, const Eigen::VectorXd& beta)
{
    if (beta.size() != data.p()) throw std::invalid_argument("lasso_objective: bad beta length");
    return (data.y - data.X * beta).squaredNorm() + lambda * beta.lpNorm<1>();
}

double kkt_gap(const Dataset& data, double lambda, const Eigen::VectorXd& beta)
{
    if (beta.size() != data.p() || data.y.size() != data.n())
        throw std::invalid_argument("kkt_gap: dimension mismatch");
    check_lambda(lambda);
    const Eigen::VectorXd score = data.X.transpose() * (data.y - data.X * beta);
    return kkt_gap_from_score(score, lambda, beta);
}

double kkt_gap(const QuadraticForm& form, double lambda, const Eigen::VectorXd& beta)
{
    if (beta.size() != form.p()) throw std::invalid_argument("kkt_gap: dimension mismatch");
    check_lambda(lambda);
    return kkt_gap_from_score(form.xty - form.gram * beta, lambda, beta);
}

LassoFit fit_lasso(const Dataset& data, double lambda,
                   const std::optional<Eigen::VectorXd>& warm_start, const SolverOptions& opts)
{
    validate(data);
    LassoFit fit = solve_lasso(quadratic_form(data), lambda, warm_start, opts);
    fit.objective = lasso_objective(data, lambda, fit.beta);
    fit.kkt_gap = kkt_gap(data, lambda, fit.beta);
    fit.converged = fit.converged && fit.kkt_gap <= opts.kkt_tol;
    return fit;
}

double lambda_max(const Dataset& data)
{
    return 2.0 * (data.X.transpose() * data.y).cwiseAbs().maxCoeff();
}

Eigen::VectorXd default_lambda_grid(const Dataset& data, int points, double ratio)
{
    if (points < 1 || !(ratio > 0.0) || ratio > 1.0)
        throw std::invalid_argument("default_lambda_grid: need points >= 1 and 0 < ratio <= 1");
    const double top = lambda_max(data);
    Eigen::VectorXd grid(points);
    if (points == 1) {
        grid(0) = top;
        return grid;
    }
    for (int k = 0; k < points; ++k)
        grid(k) = top * std::pow(ratio, static_cast<double>(k) / (points - 1));
    return grid;
}

double cross_validate_lambda(const Dataset& data, const Eigen::VectorXd& grid, int folds,
                             RngStream& rng, const SolverOptions& opts)
{
    validate(data);
    if (grid.size() == 0) throw std::invalid_argument("cross_validate_lambda: empty grid");
    for (Index k = 0; k < grid.size(); ++k) check_lambda(grid(k));
    const Index n = data.n();
    if (folds < 2 || folds > n)
        throw std::invalid_argument("cross_validate_lambda: need 2 <= folds <= n");

    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    std::vector<std::vector<Index>> members(static_cast<std::size_t>(folds));
    for (std::size_t i = 0; i < perm.size(); ++i) members[i % folds].push_back(perm[i]);
    for (auto& m : members) std::sort(m.begin(), m.end());

    // Visit the grid from largest to smallest penalty so each fit warm-starts
    // from a sparser neighbour.
    std::vector<Index> order(static_cast<std::size_t>(grid.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return grid(a) > grid(b); });

    const QuadraticForm total = quadratic_form(data);
    Eigen::VectorXd error = Eigen::VectorXd::Zero(grid.size());
    for (const auto& test : members) {
        const Dataset held = select_rows(data, test);
        const QuadraticForm held_form = quadratic_form(held);
        QuadraticForm train;
        train.gram = total.gram - held_form.gram;
        train.xty = total.xty - held_form.xty;
        train.yty = total.yty - held_form.yty;
        train.n = n - held.n();
        const double scale = static_cast<double>(train.n) / static_cast<double>(n);

        std::optional<Eigen::VectorXd> warm;
        for (Index k : order) {
            LassoFit fit = solve_lasso(train, grid(k) * scale, warm, opts);
            error(k) += (held.y - held.X * fit.beta).squaredNorm();
            warm = std::move(fit.beta);
        }
    }

    Index best = 0;
    for (Index k = 1; k < grid.size(); ++k) {
        if (error(k) < error(best) || (error(k) == error(best) && grid(k) > grid(best)))
            best = k;
    }
    return grid(best);
}

}  // namespace pblasso
