#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pblasso/dataset.hpp"
#include "pblasso/lasso.hpp"
#include "pblasso/rng.hpp"

namespace pblasso {

enum class Scheme { Perturbation, NaivePerturbation, Residual, Paired };

std::string_view scheme_name(Scheme scheme);  // "perturbation", "naive", "residual", "paired"
Scheme parse_scheme(std::string_view name);   // throws std::invalid_argument

/**
 * Law of the perturbation weights G*. Both families satisfy var = mean^2:
 * Exponential(rate) trivially, Beta(alpha, beta) when
 * beta = alpha (1 + alpha) / (1 - alpha) with 0 < alpha < 1.
 */
struct WeightDistribution {
    enum class Family { Exponential, Beta };

    Family family = Family::Exponential;
    double rate = 1.0;   // Exponential
    double alpha = 0.5;  // Beta
    double beta = 1.5;   // Beta

    static WeightDistribution exponential(double rate = 1.0);
    /// Beta(alpha, alpha (1 + alpha) / (1 - alpha)).
    static WeightDistribution beta_family(double alpha);

    double mu() const;
    double sigma2() const;
    void validate() const;
};

/// n independent draws; deterministic given the stream state.
Eigen::VectorXd draw_weights(const WeightDistribution& dist, Index n, RngStream& rng);

/// Hard-thresholded Lasso estimate used as the bootstrap centre.
struct ThresholdedEstimate {
    Eigen::VectorXd beta_tilde;
    double a_n = 0.0;
    std::vector<Index> support;
    std::vector<int> signs;  // one per support entry
};

/// scale * n^(-1/4); satisfies a_n -> 0 and n^(-1/2) log(n) / a_n -> 0.
double default_threshold(Index n, double scale = 1.0);

/// beta_tilde_j = beta_hat_j * 1(|beta_hat_j| > a_n).
ThresholdedEstimate threshold_estimate(const LassoFit& fit, double a_n);

/// z_i = yt_i + et_i (G_i - mu) / mu with yt = X beta_tilde, et = y - yt.
Eigen::VectorXd pseudo_responses(const Dataset& data, const ThresholdedEstimate& est,
                                 const Eigen::VectorXd& weights, double mu);

struct BootstrapDraws {
    Scheme scheme = Scheme::Perturbation;
    Eigen::MatrixXd t_star;     // B x p, row b = sqrt(n) (estimates.row(b) - center')
    Eigen::MatrixXd estimates;  // B x p replicate fits
    Eigen::VectorXd center;     // beta_tilde
    double lambda = 0.0;
    Index n = 0;
    Index B = 0;
    std::uint64_t seed = 0;
    std::vector<char> flagged;  // replicate did not converge (or paired redraw limit hit)

    Index flagged_count() const;
};

/// Thrown when more than 1% of replicates are flagged.
class BootstrapFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fills a weight vector for one replicate. Used to inject non-random weight
/// laws (point masses) and row-attached weights in tests.
using WeightSampler = std::function<void(RngStream&, Eigen::Ref<Eigen::VectorXd>)>;

WeightSampler make_weight_sampler(const WeightDistribution& dist);

/// Indices of n draws with replacement from {0, ..., n-1}.
std::vector<Index> resample_indices(Index n, RngStream& rng);

/// Residuals y - X beta_tilde, centred at their mean.
Eigen::VectorXd centered_residuals(const Dataset& data, const ThresholdedEstimate& est);

/// n draws with replacement from `pool`.
Eigen::VectorXd resample_residuals(const Eigen::VectorXd& pool, RngStream& rng);

// Every scheme fits replicate b with the original lambda on stream
// rng.substream(b), so draws do not depend on `threads`.

BootstrapDraws perturbation_bootstrap(const Dataset& data, const LassoFit& fit,
                                      const ThresholdedEstimate& est,
                                      const WeightDistribution& dist, Index B,
                                      const RngStream& rng, const SolverOptions& opts = {},
                                      int threads = 1);

/// Same scheme with an arbitrary weight sampler; `mu` is the weight mean.
BootstrapDraws perturbation_bootstrap(const Dataset& data, const LassoFit& fit,
                                      const ThresholdedEstimate& est, const WeightSampler& sampler,
                                      double mu, Index B, const RngStream& rng,
                                      const SolverOptions& opts = {}, int threads = 1);

/// Weighted Lasso: argmin sum_i G_i (y_i - X_i't)^2 + lambda |t|_1.
BootstrapDraws naive_perturbation_bootstrap(const Dataset& data, const LassoFit& fit,
                                            const ThresholdedEstimate& est,
                                            const WeightDistribution& dist, Index B,
                                            const RngStream& rng, const SolverOptions& opts = {},
                                            int threads = 1);

BootstrapDraws naive_perturbation_bootstrap(const Dataset& data, const LassoFit& fit,
                                            const ThresholdedEstimate& est,
                                            const WeightSampler& sampler, Index B,
                                            const RngStream& rng, const SolverOptions& opts = {},
                                            int threads = 1);

BootstrapDraws residual_bootstrap(const Dataset& data, const LassoFit& fit,
                                  const ThresholdedEstimate& est, Index B, const RngStream& rng,
                                  const SolverOptions& opts = {}, int threads = 1);

/// Plain pairs bootstrap (rows resampled with replacement), centred at
/// beta_tilde. Resamples containing an all-zero column are redrawn up to 10
/// times before the replicate is flagged.
BootstrapDraws paired_bootstrap(const Dataset& data, const LassoFit& fit,
                                const ThresholdedEstimate& est, Index B, const RngStream& rng,
                                const SolverOptions& opts = {}, int threads = 1);

/// Dispatch on scheme; `dist` is ignored by the resampling schemes.
BootstrapDraws run_bootstrap(Scheme scheme, const Dataset& data, const LassoFit& fit,
                             const ThresholdedEstimate& est, const WeightDistribution& dist,
                             Index B, const RngStream& rng, const SolverOptions& opts = {},
                             int threads = 1);

}  // namespace pblasso
