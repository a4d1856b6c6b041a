#include "config.hpp"

#include <set>
#include <stdexcept>

namespace pblasso::cli {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& known, const char* where)
{
    if (!j.is_object()) throw std::invalid_argument(std::string(where) + ": expected a JSON object");
    for (const auto& [key, value] : j.items())
        if (!known.count(key))
            throw std::invalid_argument(std::string(where) + ": unknown key '" + key + "'");
}

template <class T>
void take(const Json& j, const char* key, T& into)
{
    if (j.contains(key)) into = j.at(key).get<T>();
}

void merge_solver(SolverOptions& s, const Json& j)
{
    reject_unknown(j, {"max_sweeps", "tol", "kkt_tol"}, "solver");
    take(j, "max_sweeps", s.max_sweeps);
    take(j, "tol", s.tol);
    take(j, "kkt_tol", s.kkt_tol);
}

void merge_weights(WeightDistribution& w, const Json& j)
{
    reject_unknown(j, {"family", "rate", "alpha", "beta"}, "weights");
    const std::string family = j.value("family", w.family == WeightDistribution::Family::Exponential
                                                     ? std::string("exponential")
                                                     : std::string("beta"));
    if (family == "exponential") {
        w = WeightDistribution::exponential(j.value("rate", 1.0));
    } else if (family == "beta") {
        w = WeightDistribution::beta_family(j.value("alpha", 0.5));
        if (j.contains("beta") && j.at("beta").get<double>() != w.beta)
            throw std::invalid_argument("weights: beta is determined by alpha");
    } else {
        throw std::invalid_argument("weights: unknown family '" + family + "'");
    }
}

void take_lambda(const Json& j, std::optional<double>& lambda)
{
    if (!j.contains("lambda")) return;
    if (j.at("lambda").is_null())
        lambda.reset();
    else
        lambda = j.at("lambda").get<double>();
}

Json lambda_json(const std::optional<double>& lambda)
{
    return lambda ? Json(*lambda) : Json(nullptr);
}

}  // namespace

Json to_json(const SolverOptions& s)
{
    Json j;
    j["max_sweeps"] = s.max_sweeps;
    j["tol"] = s.tol;
    j["kkt_tol"] = s.kkt_tol;
    return j;
}

Json to_json(const WeightDistribution& w)
{
    Json j;
    if (w.family == WeightDistribution::Family::Exponential) {
        j["family"] = "exponential";
        j["rate"] = w.rate;
    } else {
        j["family"] = "beta";
        j["alpha"] = w.alpha;
        j["beta"] = w.beta;
    }
    return j;
}

Json to_json(const FitConfig& c)
{
    Json j;
    j["data"] = c.data;
    j["lambda"] = lambda_json(c.lambda);
    j["folds"] = c.folds;
    j["grid_points"] = c.grid_points;
    j["seed"] = c.seed;
    j["solver"] = to_json(c.solver);
    return j;
}

void merge(FitConfig& c, const Json& j)
{
    reject_unknown(j, {"data", "lambda", "folds", "grid_points", "seed", "solver"}, "fit config");
    take(j, "data", c.data);
    take_lambda(j, c.lambda);
    take(j, "folds", c.folds);
    take(j, "grid_points", c.grid_points);
    take(j, "seed", c.seed);
    if (j.contains("solver")) merge_solver(c.solver, j.at("solver"));
}

Json to_json(const BootstrapConfig& c)
{
    Json j;
    j["data"] = c.data;
    j["lambda"] = lambda_json(c.lambda);
    j["scheme"] = std::string(scheme_name(c.scheme));
    j["B"] = c.B;
    j["level"] = c.level;
    j["threshold_scale"] = c.threshold_scale;
    j["weights"] = to_json(c.weights);
    j["folds"] = c.folds;
    j["grid_points"] = c.grid_points;
    j["seed"] = c.seed;
    j["solver"] = to_json(c.solver);
    return j;
}

void merge(BootstrapConfig& c, const Json& j)
{
    reject_unknown(j,
                   {"data", "lambda", "scheme", "B", "level", "threshold_scale", "weights", "folds",
                    "grid_points", "seed", "solver"},
                   "bootstrap config");
    take(j, "data", c.data);
    take_lambda(j, c.lambda);
    if (j.contains("scheme")) c.scheme = parse_scheme(j.at("scheme").get<std::string>());
    take(j, "B", c.B);
    take(j, "level", c.level);
    take(j, "threshold_scale", c.threshold_scale);
    if (j.contains("weights")) merge_weights(c.weights, j.at("weights"));
    take(j, "folds", c.folds);
    take(j, "grid_points", c.grid_points);
    take(j, "seed", c.seed);
    if (j.contains("solver")) merge_solver(c.solver, j.at("solver"));
}

Json to_json(const SimulateConfig& c)
{
    const SimulationScenario& s = c.scenario;
    Json sc;
    sc["n"] = s.n;
    sc["p"] = s.p;
    sc["p0"] = s.p0;
    sc["design_mode"] = std::string(design_mode_name(s.design_mode));
    sc["error_case"] = std::string(error_case_name(s.error_case));
    sc["error_scale"] = std::string(error_scale_name(s.error_scale));
    sc["M"] = s.M;
    sc["B"] = s.B;
    sc["level"] = s.level;
    sc["seed"] = s.seed;
    sc["folds"] = s.folds;
    sc["grid_points"] = s.grid_points;
    sc["threshold_scale"] = s.threshold_scale;
    sc["weights"] = to_json(s.weights);
    sc["solver"] = to_json(s.solver);
    Json j;
    j["scenario"] = sc;
    Json methods = Json::array();
    for (Scheme m : c.methods) methods.push_back(std::string(scheme_name(m)));
    j["methods"] = methods;
    return j;
}

void merge(SimulateConfig& c, const Json& j)
{
    reject_unknown(j, {"scenario", "methods"}, "simulate config");
    if (j.contains("scenario")) {
        const Json& sc = j.at("scenario");
        reject_unknown(sc,
                       {"n", "p", "p0", "design_mode", "error_case", "error_scale", "M", "B",
                        "level", "seed", "folds", "grid_points", "threshold_scale", "weights",
                        "solver"},
                       "scenario");
        SimulationScenario& s = c.scenario;
        take(sc, "n", s.n);
        take(sc, "p", s.p);
        take(sc, "p0", s.p0);
        if (sc.contains("design_mode"))
            s.design_mode = parse_design_mode(sc.at("design_mode").get<std::string>());
        if (sc.contains("error_case"))
            s.error_case = parse_error_case(sc.at("error_case").get<std::string>());
        if (sc.contains("error_scale"))
            s.error_scale = parse_error_scale(sc.at("error_scale").get<std::string>());
        take(sc, "M", s.M);
        take(sc, "B", s.B);
        take(sc, "level", s.level);
        take(sc, "seed", s.seed);
        take(sc, "folds", s.folds);
        take(sc, "grid_points", s.grid_points);
        take(sc, "threshold_scale", s.threshold_scale);
        if (sc.contains("weights")) merge_weights(s.weights, sc.at("weights"));
        if (sc.contains("solver")) merge_solver(s.solver, sc.at("solver"));
    }
    if (j.contains("methods")) {
        c.methods.clear();
        for (const auto& m : j.at("methods")) c.methods.push_back(parse_scheme(m.get<std::string>()));
    }
}

Json to_json(const ReportConfig& c)
{
    Json j;
    j["inputs"] = c.inputs;
    j["numerator_method"] = c.numerator_method;
    j["denominator_method"] =
        c.denominator_method.empty() ? c.numerator_method : c.denominator_method;
    return j;
}

void merge(ReportConfig& c, const Json& j)
{
    reject_unknown(j, {"inputs", "numerator_method", "denominator_method"}, "report config");
    take(j, "inputs", c.inputs);
    take(j, "numerator_method", c.numerator_method);
    take(j, "denominator_method", c.denominator_method);
}

}  // namespace pblasso::cli
