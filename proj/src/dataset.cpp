#include "pblasso/dataset.hpp"

#include <stdexcept>
#include <string>

namespace pblasso {

void validate(const Dataset& data)
{
    if (data.X.rows() != data.y.size())
        throw std::invalid_argument("dataset: X has " + std::to_string(data.X.rows()) +
                                    " rows but y has " + std::to_string(data.y.size()) +
                                    " entries");
    if (data.n() < 2) throw std::invalid_argument("dataset: need at least 2 observations");
    if (data.p() < 1) throw std::invalid_argument("dataset: need at least 1 covariate");
    if (!data.X.allFinite() || !data.y.allFinite())
        throw std::invalid_argument("dataset: non-finite entry");
    for (Index j = 0; j < data.p(); ++j) {
        if (!(data.X.col(j).squaredNorm() > 0.0))
            throw std::invalid_argument("dataset: column " + std::to_string(j) +
                                        " has zero norm");
    }
}

Dataset select_rows(const Dataset& data, const std::vector<Index>& order)
{
    Dataset out{Eigen::MatrixXd(static_cast<Index>(order.size()), data.p()),
                Eigen::VectorXd(static_cast<Index>(order.size()))};
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.X.row(static_cast<Index>(i)) = data.X.row(order[i]);
        out.y(static_cast<Index>(i)) = data.y(order[i]);
    }
    return out;
}

}  // namespace pblasso
