#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pblasso/bootstrap.hpp"
#include "pblasso/lasso.hpp"
#include "pblasso/simulation.hpp"

namespace pblasso::cli {

using Json = nlohmann::ordered_json;

// Resolved run configurations. Every field has a default; a JSON config file
// may set any subset of them and command-line flags override the file.
// `out` and `threads` only decide where and how fast a run happens, so they
// are not part of the serialized config.

struct FitConfig {
    std::string data;
    std::optional<double> lambda;  // unset: cross-validated
    int folds = 10;
    int grid_points = 50;
    std::uint64_t seed = 1;
    SolverOptions solver;
};

struct BootstrapConfig {
    std::string data;
    std::optional<double> lambda;
    Scheme scheme = Scheme::Perturbation;
    Index B = 1200;
    double level = 0.9;
    double threshold_scale = 1.0;
    WeightDistribution weights = WeightDistribution::exponential(1.0);
    int folds = 10;
    int grid_points = 50;
    std::uint64_t seed = 1;
    SolverOptions solver;
};

struct SimulateConfig {
    SimulationScenario scenario;
    std::vector<Scheme> methods{Scheme::Perturbation, Scheme::Residual};
};

struct ReportConfig {
    std::vector<std::string> inputs;  // numerator file, denominator file
    std::string numerator_method = "perturbation";
    std::string denominator_method;  // empty: same as numerator_method
};

Json to_json(const SolverOptions& s);
Json to_json(const WeightDistribution& w);
Json to_json(const FitConfig& c);
Json to_json(const BootstrapConfig& c);
Json to_json(const SimulateConfig& c);
Json to_json(const ReportConfig& c);

/// Apply the keys present in `j` on top of `c`; unknown keys are errors.
void merge(FitConfig& c, const Json& j);
void merge(BootstrapConfig& c, const Json& j);
void merge(SimulateConfig& c, const Json& j);
void merge(ReportConfig& c, const Json& j);

}  // namespace pblasso::cli
