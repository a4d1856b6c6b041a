#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pblasso/bootstrap.hpp"
#include "pblasso/dataset.hpp"
#include "pblasso/inference.hpp"
#include "pblasso/lasso.hpp"
#include "pblasso/rng.hpp"

namespace pblasso {

/// Fixed: one X per scenario seed, reused by every Monte Carlo replicate.
/// Random: X redrawn in each replicate.
enum class DesignMode { Fixed, Random };
/// Case I: eta ~ chi2_2 - 2. Case II: eta ~ N(0, 1).
enum class ErrorCase { ChiSquare, Normal };
/// Heteroscedastic: s_i^2 = p^-1 sum_j |X_ij|^5. Homoscedastic: s_i = 1.
enum class ErrorScale { Heteroscedastic, Homoscedastic };

std::string_view design_mode_name(DesignMode m);
std::string_view error_case_name(ErrorCase c);
std::string_view error_scale_name(ErrorScale s);
DesignMode parse_design_mode(std::string_view s);
ErrorCase parse_error_case(std::string_view s);
ErrorScale parse_error_scale(std::string_view s);

struct SimulationScenario {
    Index n = 1000;
    Index p = 10;
    Index p0 = 6;
    DesignMode design_mode = DesignMode::Fixed;
    ErrorCase error_case = ErrorCase::ChiSquare;
    ErrorScale error_scale = ErrorScale::Heteroscedastic;
    Index M = 200;  // Monte Carlo datasets
    Index B = 300;  // bootstrap replicates per dataset
    double level = 0.9;
    std::uint64_t seed = 1;
    int folds = 10;
    int grid_points = 50;
    double threshold_scale = 1.0;
    WeightDistribution weights = WeightDistribution::exponential(1.0);
    SolverOptions solver;

    void validate() const;
    /// Short label such as "n1000-p10-p06-fixed-chi2-hetero".
    std::string tag() const;
};

struct ScenarioDraw {
    Dataset dataset;
    Eigen::VectorXd beta_true;
    Eigen::VectorXd s;        // error scale per observation
    Eigen::VectorXd epsilon;  // y = X beta_true + epsilon
};

/// (0.75 + 0.25 j for j = 1..p0, then zeros).
Eigen::VectorXd true_beta(Index p, Index p0);

/// Gamma_jk = 1(j = k) + 0.3^|j-k| 1(j <= p0) 1(k <= p0) 1(j != k).
Eigen::MatrixXd design_covariance(Index p, Index p0);

/// n i.i.d. rows from N(0, Gamma).
Eigen::MatrixXd gen_design(const SimulationScenario& scenario, RngStream& rng);

struct ErrorDraw {
    Eigen::VectorXd epsilon;
    Eigen::VectorXd s;
};

ErrorDraw gen_errors(const SimulationScenario& scenario, const Eigen::MatrixXd& X, RngStream& rng);

/// Responses for a given design.
ScenarioDraw draw_scenario(const SimulationScenario& scenario, Eigen::MatrixXd X, RngStream& rng);

/// Design used by every replicate of a fixed-design scenario.
Eigen::MatrixXd fixed_design(const SimulationScenario& scenario);

struct MethodReplicate {
    std::vector<IntervalEstimate> two_sided;
    std::vector<IntervalEstimate> right_sided;
    RegionEstimate region;
    bool region_covers = false;
};

struct ReplicateOutcome {
    Index index = 0;
    bool failed = false;
    std::string error;
    double lambda = 0.0;
    Eigen::VectorXd beta_hat;
    Eigen::VectorXd beta_tilde;
    std::map<Scheme, MethodReplicate> methods;
};

struct MethodCoverage {
    CoverageReport two_sided;
    CoverageReport right_sided;
    Index region_hits = 0;
    Index region_total = 0;
    double radius_sum = 0.0;

    double region_coverage() const;
    double mean_radius() const;
};

struct ExperimentResult {
    SimulationScenario scenario;
    std::vector<Scheme> methods;
    std::map<Scheme, MethodCoverage> coverage;
    std::vector<ReplicateOutcome> replicates;
    Index failures = 0;
};

/**
 * One Monte Carlo replicate: draw data, pick lambda by cross-validation, fit,
 * threshold, run each scheme with that lambda, build intervals and the region.
 * Depends only on (scenario, methods, m); `design` is the fixed design when
 * design_mode is Fixed and ignored otherwise.
 */
ReplicateOutcome run_replicate(const SimulationScenario& scenario,
                               const std::vector<Scheme>& methods, Index m,
                               const Eigen::MatrixXd& design);

/// All M replicates plus coverage tallies. Throws std::runtime_error when more
/// than 2% of replicates fail.
ExperimentResult run_coverage_experiment(const SimulationScenario& scenario,
                                         const std::vector<Scheme>& methods, int threads = 1);

}  // namespace pblasso
