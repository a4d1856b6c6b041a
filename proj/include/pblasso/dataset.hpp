#pragma once

#include <vector>

#include <Eigen/Dense>

namespace pblasso {

using Index = Eigen::Index;

/// Regression sample: n observations of p covariates and a response.
struct Dataset {
    Eigen::MatrixXd X;  // n x p
    Eigen::VectorXd y;  // n

    Index n() const noexcept { return X.rows(); }
    Index p() const noexcept { return X.cols(); }
};

/// Throws std::invalid_argument unless n >= 2, p >= 1, shapes agree, all
/// entries are finite and every column has a nonzero sum of squares.
void validate(const Dataset& data);

/// Returns a dataset whose rows are data.X.row(order[i]), data.y(order[i]).
Dataset select_rows(const Dataset& data, const std::vector<Index>& order);

}  // namespace pblasso
