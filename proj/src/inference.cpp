#include "pblasso/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pblasso {

namespace {

void check_level(double level)
{
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("inference: level must lie in (0, 1)");
}

void check_draws(const BootstrapDraws& draws, const LassoFit& fit)
{
    if (draws.t_star.rows() < 20)
        throw std::invalid_argument("inference: need at least 20 bootstrap draws, got " +
                                    std::to_string(draws.t_star.rows()));
    if (fit.beta.size() != draws.t_star.cols())
        throw std::invalid_argument("inference: fit and draws disagree on p");
    if (draws.n < 1) throw std::invalid_argument("inference: draws carry no sample size");
}

std::vector<double> column(const Eigen::MatrixXd& m, Index j)
{
    return {m.col(j).data(), m.col(j).data() + m.rows()};
}

}  // namespace

std::string_view side_name(Side side)
{
    return side == Side::TwoSided ? "two_sided" : "right_sided";
}

bool RegionEstimate::contains(const Eigen::VectorXd& beta) const
{
    if (beta.size() != center.size()) throw std::invalid_argument("region: dimension mismatch");
    return (beta - center).lpNorm<Eigen::Infinity>() <= radius;
}

double quantile_type7(std::vector<double> values, double prob)
{
    if (values.empty()) throw std::invalid_argument("quantile: empty sample");
    if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("quantile: prob outside [0,1]");
    std::sort(values.begin(), values.end());
    const double h = static_cast<double>(values.size() - 1) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

IntervalEstimate percentile_interval(const BootstrapDraws& draws, const LassoFit& fit, Index j,
                                     double level, Side side, IntervalMethod method)
{
    check_level(level);
    check_draws(draws, fit);
    if (j < 0 || j >= fit.beta.size()) throw std::invalid_argument("interval: bad coefficient");
    const double root_n = std::sqrt(static_cast<double>(draws.n));
    const auto col = column(draws.t_star, j);

    IntervalEstimate out;
    out.coef_index = j;
    out.level = level;
    out.side = side;
    if (method == IntervalMethod::Basic) {
        const double b = fit.beta(j);
        if (side == Side::TwoSided) {
            out.lower = b - quantile_type7(col, 0.5 * (1.0 + level)) / root_n;
            out.upper = b - quantile_type7(col, 0.5 * (1.0 - level)) / root_n;
        } else {
            out.lower = -std::numeric_limits<double>::infinity();
            out.upper = b - quantile_type7(col, 1.0 - level) / root_n;
        }
    } else {
        const double c = draws.center(j);
        if (side == Side::TwoSided) {
            out.lower = c + quantile_type7(col, 0.5 * (1.0 - level)) / root_n;
            out.upper = c + quantile_type7(col, 0.5 * (1.0 + level)) / root_n;
        } else {
            out.lower = -std::numeric_limits<double>::infinity();
            out.upper = c + quantile_type7(col, level) / root_n;
        }
    }
    out.width = side == Side::TwoSided ? out.upper - out.lower : 0.0;
    return out;
}

IntervalEstimate symmetric_interval(const BootstrapDraws& draws, const LassoFit& fit, Index j,
                                    double level)
{
    check_level(level);
    check_draws(draws, fit);
    if (j < 0 || j >= fit.beta.size()) throw std::invalid_argument("interval: bad coefficient");
    auto col = column(draws.t_star, j);
    for (auto& v : col) v = std::abs(v);
    const double half = quantile_type7(std::move(col), level) / std::sqrt(double(draws.n));
    IntervalEstimate out;
    out.coef_index = j;
    out.level = level;
    out.side = Side::TwoSided;
    out.lower = fit.beta(j) - half;
    out.upper = fit.beta(j) + half;
    out.width = out.upper - out.lower;
    return out;
}

RegionEstimate sup_norm_region(const BootstrapDraws& draws, const LassoFit& fit, double level)
{
    check_level(level);
    check_draws(draws, fit);
    std::vector<double> sup(static_cast<std::size_t>(draws.t_star.rows()));
    for (Index b = 0; b < draws.t_star.rows(); ++b)
        sup[static_cast<std::size_t>(b)] = draws.t_star.row(b).lpNorm<Eigen::Infinity>();
    RegionEstimate out;
    out.center = fit.beta;
    out.level = level;
    out.radius = quantile_type7(std::move(sup), level) / std::sqrt(double(draws.n));
    return out;
}

double CoverageReport::coverage(Index j) const
{
    const auto k = static_cast<std::size_t>(j);
    return total.at(k) == 0 ? 0.0 : static_cast<double>(hits[k]) / static_cast<double>(total[k]);
}

double CoverageReport::mean_width(Index j) const
{
    const auto k = static_cast<std::size_t>(j);
    return total.at(k) == 0 ? 0.0 : width_sum[k] / static_cast<double>(total[k]);
}

CoverageReport coverage_tally(std::span<const IntervalEstimate> intervals,
                              const Eigen::VectorXd& truth)
{
    CoverageReport report;
    const auto p = static_cast<std::size_t>(truth.size());
    report.hits.assign(p, 0);
    report.total.assign(p, 0);
    report.width_sum.assign(p, 0.0);
    if (!intervals.empty()) report.side = intervals.front().side;
    for (const auto& iv : intervals) {
        if (iv.coef_index < 0 || iv.coef_index >= truth.size())
            throw std::invalid_argument("coverage_tally: interval refers to coefficient " +
                                        std::to_string(iv.coef_index) + " outside truth");
        if (iv.side != report.side)
            throw std::invalid_argument("coverage_tally: mixed interval sides");
        const auto k = static_cast<std::size_t>(iv.coef_index);
        report.total[k] += 1;
        report.hits[k] += iv.contains(truth(iv.coef_index)) ? 1 : 0;
        report.width_sum[k] += iv.width;
    }
    return report;
}

void merge_into(CoverageReport& into, const CoverageReport& from)
{
    if (into.hits.size() != from.hits.size() || into.side != from.side)
        throw std::invalid_argument("merge_into: incompatible coverage reports");
    for (std::size_t k = 0; k < into.hits.size(); ++k) {
        into.hits[k] += from.hits[k];
        into.total[k] += from.total[k];
        into.width_sum[k] += from.width_sum[k];
    }
}

CoverageRatio empirical_coverage_ratio(const CoverageReport& pb, const CoverageReport& other)
{
    if (pb.hits.size() != other.hits.size() || pb.side != other.side)
        throw std::invalid_argument("ECR: reports cover different coefficients or interval types");
    CoverageRatio out;
    for (Index j = 0; j < pb.p(); ++j) {
        const double denom = other.coverage(j);
        if (denom == 0.0) {
            out.ratio.push_back(std::numeric_limits<double>::infinity());
            out.infinite.push_back(1);
        } else {
            out.ratio.push_back(pb.coverage(j) / denom);
            out.infinite.push_back(0);
        }
    }
    return out;
}

}  // namespace pblasso
