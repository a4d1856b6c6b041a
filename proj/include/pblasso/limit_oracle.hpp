#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pblasso/bootstrap.hpp"
#include "pblasso/dataset.hpp"
#include "pblasso/lasso.hpp"
#include "pblasso/rng.hpp"

namespace pblasso {

struct LimitMatrices {
    Eigen::MatrixXd C;      // n^-1 sum X_i X_i'
    Eigen::MatrixXd Sigma;  // n^-1 sum X_i X_i' e_i^2
    double s2 = 0.0;        // n^-1 sum e_i^2
    double c_min_eigenvalue = 0.0;
    /// False when the smallest eigenvalue of C is below 1e-8, i.e. the sample
    /// design is numerically singular.
    bool c_positive_definite = true;
};

LimitMatrices estimate_limit_matrices(const Dataset& data, const Eigen::VectorXd& residuals);

/**
 * Parameters of the limit process
 *
 *   Z(v) = v'Cv - 2 v'W + lambda0 ( sum_{s_j != 0} s_j v_j + sum_{s_j == 0} |v_j| ),
 *
 * with W ~ N(0, Sigma), or N(0, s2C) for the residual-bootstrap limit.
 * The nonzero signs usually sit in the leading positions; any placement is
 * accepted.
 */
struct LimitObjective {
    Eigen::MatrixXd C;
    Eigen::MatrixXd Sigma;
    std::optional<Eigen::MatrixXd> s2C;
    double lambda0 = 0.0;
    std::vector<int> signs;

    Index p() const noexcept { return C.rows(); }
    Index p0() const;
    void validate() const;
};

/// C_n, Sigma_n and s2_n C_n from the residuals y - X beta_tilde,
/// lambda0 = lambda / sqrt(n), signs from beta_tilde.
LimitObjective limit_objective_from_fit(const Dataset& data, const LassoFit& fit,
                                        const ThresholdedEstimate& est);

/// argmin_v Z(v) for a given W, by cyclic coordinate descent to a
/// subgradient gap of `tol`.
Eigen::VectorXd minimize_limit_objective(const LimitObjective& obj, const Eigen::VectorXd& W,
                                         double tol = 1e-10, int max_sweeps = 100000);

/// Subgradient optimality gap of v for Z(. ; W).
double limit_subgradient_gap(const LimitObjective& obj, const Eigen::VectorXd& W,
                             const Eigen::VectorXd& v);

/// Factor A with A A' = cov (Cholesky when positive definite, otherwise a
/// symmetric eigen square root, so semidefinite covariances are allowed).
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov);

/// draws x p matrix of argmin draws; draw d uses rng.substream(d).
Eigen::MatrixXd sample_limit_argmin(const LimitObjective& obj, bool use_s2C, const RngStream& rng,
                                    Index draws, int threads = 1);

}  // namespace pblasso
