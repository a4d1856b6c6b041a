#pragma once

#include <optional>

#include <Eigen/Dense>

#include "pblasso/dataset.hpp"
#include "pblasso/rng.hpp"

namespace pblasso {

// The penalized criterion throughout is the unnormalized one,
//
//     sum_i (y_i - X_i' t)^2 + lambda * sum_j |t_j|,
//
// so lambda grows like sqrt(n) in the regime where lambda / sqrt(n) -> lambda0.

struct SolverOptions {
    int max_sweeps = 10000;
    /// Bound on max_j |delta beta_j| * sqrt(X_j'X_j / n) over one sweep.
    double tol = 1e-10;
    double kkt_tol = 1e-8;

    void validate() const;
};

struct LassoFit {
    Eigen::VectorXd beta;
    double lambda = 0.0;
    double objective = 0.0;
    double kkt_gap = 0.0;
    int iterations = 0;  // coordinate-descent sweeps
    bool converged = false;
};

/**
 * Sufficient statistics of a (possibly weighted) least-squares term:
 * ||y - X t||^2 = yty - 2 t'xty + t' gram t.
 *
 * Bootstrap schemes that keep X fixed share `gram` across replicates and only
 * refresh `xty` and `yty`.
 */
struct QuadraticForm {
    Eigen::MatrixXd gram;
    Eigen::VectorXd xty;
    double yty = 0.0;
    Index n = 0;

    Index p() const noexcept { return gram.rows(); }
    double value(const Eigen::VectorXd& t) const;
};

QuadraticForm quadratic_form(const Dataset& data);
QuadraticForm quadratic_form(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
/// Form of sum_i w_i (y_i - X_i't)^2.
QuadraticForm weighted_quadratic_form(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& w);

double soft_threshold(double z, double gamma);

/**
 * Cyclic coordinate descent on a quadratic form.
 *
 * Columns with gram(j, j) == 0 are pinned at zero (any value gives the same
 * loss, and the penalty picks zero). Objective and KKT gap are evaluated from
 * the form itself.
 */
LassoFit solve_lasso(const QuadraticForm& form, double lambda,
                     const std::optional<Eigen::VectorXd>& warm_start = std::nullopt,
                     const SolverOptions& opts = {});

/// Lasso fit on the raw data; objective and KKT gap are recomputed from the
/// residuals y - X beta.
LassoFit fit_lasso(const Dataset& data, double lambda,
                   const std::optional<Eigen::VectorXd>& warm_start = std::nullopt,
                   const SolverOptions& opts = {});

/// Criterion value at beta, from residuals.
double lasso_objective(const Dataset& data, double lambda, const Eigen::VectorXd& beta);

/// Max over j of the subgradient violation |2 X_j'r - lambda sgn(beta_j)|
/// (or its dead-zone form when beta_j == 0), with r = y - X beta.
double kkt_gap(const Dataset& data, double lambda, const Eigen::VectorXd& beta);

/// Same certificate from a quadratic form (gradient 2(gram t - xty)).
double kkt_gap(const QuadraticForm& form, double lambda, const Eigen::VectorXd& beta);

/// Smallest penalty with an all-zero solution: 2 max_j |X_j'y|.
double lambda_max(const Dataset& data);

/// Geometric grid from lambda_max down to ratio * lambda_max (descending).
Eigen::VectorXd default_lambda_grid(const Dataset& data, int points = 50, double ratio = 1e-3);

/**
 * K-fold cross-validation over `grid`.
 *
 * Folds come from a random permutation drawn from `rng`. A training fold of
 * size m is fit with penalty lambda * m / n, i.e. the same penalty per
 * observation as the full-sample fit. Returns the grid value with the least
 * total out-of-fold squared error; exact ties go to the larger lambda.
 */
double cross_validate_lambda(const Dataset& data, const Eigen::VectorXd& grid, int folds,
                             RngStream& rng, const SolverOptions& opts = {});

}  // namespace pblasso
