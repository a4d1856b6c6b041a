#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pblasso/bootstrap.hpp"
#include "pblasso/lasso.hpp"

namespace pblasso {

enum class Side { TwoSided, RightSided };

/// Basic: reflect T* quantiles around beta_hat (default).
/// Percentile: read the replicate estimates' quantiles directly.
enum class IntervalMethod { Basic, Percentile };

std::string_view side_name(Side side);

struct IntervalEstimate {
    Index coef_index = 0;
    double level = 0.0;
    Side side = Side::TwoSided;
    double lower = 0.0;  // -inf for RightSided
    double upper = 0.0;
    double width = 0.0;  // two-sided only; 0 for RightSided

    bool contains(double value) const { return lower <= value && value <= upper; }
};

/// Sup-norm ball {b : ||b - center||_inf <= radius}.
struct RegionEstimate {
    Eigen::VectorXd center;
    double radius = 0.0;
    double level = 0.0;

    bool contains(const Eigen::VectorXd& beta) const;
};

/// Empirical quantile with linear interpolation between order statistics
/// (R type 7). `values` need not be sorted.
double quantile_type7(std::vector<double> values, double prob);

/**
 * Bootstrap confidence interval for coefficient j.
 *
 * Two-sided basic interval:
 *   [b_j - q_{(1+level)/2} / sqrt(n), b_j - q_{(1-level)/2} / sqrt(n)]
 * Right-sided: (-inf, b_j - q_{1-level} / sqrt(n)].
 * q_a is the type-7 quantile of column j of T*. Needs B >= 20.
 */
IntervalEstimate percentile_interval(const BootstrapDraws& draws, const LassoFit& fit, Index j,
                                     double level, Side side,
                                     IntervalMethod method = IntervalMethod::Basic);

/// b_j -/+ q_level(|T*_j|) / sqrt(n).
IntervalEstimate symmetric_interval(const BootstrapDraws& draws, const LassoFit& fit, Index j,
                                    double level);

/// Centre beta_hat, radius q_level(max_j |T*_bj|) / sqrt(n).
RegionEstimate sup_norm_region(const BootstrapDraws& draws, const LassoFit& fit, double level);

struct CoverageReport {
    std::string method;
    std::string scenario;
    Side side = Side::TwoSided;
    std::vector<Index> hits;
    std::vector<Index> total;
    std::vector<double> width_sum;

    Index p() const noexcept { return static_cast<Index>(hits.size()); }
    double coverage(Index j) const;
    double mean_width(Index j) const;
};

/// Per-coefficient fraction of intervals that contain truth(coef_index).
/// All intervals must share one side; an empty list yields a two-sided report
/// with zero counts.
CoverageReport coverage_tally(std::span<const IntervalEstimate> intervals,
                              const Eigen::VectorXd& truth);

/// Adds the intervals of another report with the same layout.
void merge_into(CoverageReport& into, const CoverageReport& from);

struct CoverageRatio {
    std::vector<double> ratio;  // +inf where the denominator coverage is 0
    std::vector<char> infinite;
};

/// pb.coverage(j) / other.coverage(j) per coefficient.
CoverageRatio empirical_coverage_ratio(const CoverageReport& pb, const CoverageReport& other);

}  // namespace pblasso
