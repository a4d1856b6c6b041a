#pragma once

#include <Eigen/Dense>

#include "pblasso/dataset.hpp"
#include "pblasso/rng.hpp"

namespace fixtures {

/// Gaussian design with sparse coefficients and unit noise.
inline pblasso::Dataset random_dataset(pblasso::RngStream& rng, pblasso::Index n,
                                       pblasso::Index p, double noise = 1.0)
{
    pblasso::Dataset d{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
    for (pblasso::Index i = 0; i < n; ++i)
        for (pblasso::Index j = 0; j < p; ++j) d.X(i, j) = rng.normal();
    Eigen::VectorXd beta(p);
    for (pblasso::Index j = 0; j < p; ++j) beta(j) = (j % 2 == 0) ? 2.0 * rng.normal() : 0.0;
    for (pblasso::Index i = 0; i < n; ++i) d.y(i) = d.X.row(i).dot(beta) + noise * rng.normal();
    return d;
}

inline Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& t)
{
    const Eigen::MatrixXd c = t.rowwise() - t.colwise().mean();
    return c.transpose() * c / static_cast<double>(t.rows() - 1);
}

}  // namespace fixtures
