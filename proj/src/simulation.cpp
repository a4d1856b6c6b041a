#include "pblasso/simulation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pblasso/parallel.hpp"

namespace pblasso {

namespace {

constexpr std::uint64_t kDesignStream = 0;
constexpr std::uint64_t kReplicateStream = 1;
constexpr std::uint64_t kDataStream = 0;
constexpr std::uint64_t kCvStream = 1;
constexpr std::uint64_t kSchemeStreamBase = 2;

}  // namespace

std::string_view design_mode_name(DesignMode m) { return m == DesignMode::Fixed ? "fixed" : "random"; }
std::string_view error_case_name(ErrorCase c) { return c == ErrorCase::ChiSquare ? "chi2" : "normal"; }
std::string_view error_scale_name(ErrorScale s)
{
    return s == ErrorScale::Heteroscedastic ? "heteroscedastic" : "homoscedastic";
}

DesignMode parse_design_mode(std::string_view s)
{
    if (s == "fixed") return DesignMode::Fixed;
    if (s == "random") return DesignMode::Random;
    throw std::invalid_argument("unknown design mode '" + std::string(s) + "'");
}

ErrorCase parse_error_case(std::string_view s)
{
    if (s == "chi2" || s == "I") return ErrorCase::ChiSquare;
    if (s == "normal" || s == "II") return ErrorCase::Normal;
    throw std::invalid_argument("unknown error case '" + std::string(s) + "'");
}

ErrorScale parse_error_scale(std::string_view s)
{
    if (s == "heteroscedastic") return ErrorScale::Heteroscedastic;
    if (s == "homoscedastic") return ErrorScale::Homoscedastic;
    throw std::invalid_argument("unknown error scale '" + std::string(s) + "'");
}

void SimulationScenario::validate() const
{
    if (p < 1 || p0 < 0 || p0 > p) throw std::invalid_argument("scenario: need 0 <= p0 <= p, p >= 1");
    if (n <= p) throw std::invalid_argument("scenario: need n > p");
    if (M < 1 || B < 1) throw std::invalid_argument("scenario: M and B must be >= 1");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("scenario: level must be in (0,1)");
    if (folds < 2 || folds > n) throw std::invalid_argument("scenario: need 2 <= folds <= n");
    if (grid_points < 1) throw std::invalid_argument("scenario: grid_points must be >= 1");
    if (!(threshold_scale > 0.0)) throw std::invalid_argument("scenario: threshold_scale must be > 0");
    weights.validate();
    solver.validate();
}

std::string SimulationScenario::tag() const
{
    std::ostringstream os;
    os << 'n' << n << "-p" << p << "-p0" << p0 << '-' << design_mode_name(design_mode) << '-'
       << error_case_name(error_case) << '-'
       << (error_scale == ErrorScale::Heteroscedastic ? "hetero" : "homo");
    return os.str();
}

Eigen::VectorXd true_beta(Index p, Index p0)
{
    if (p < 0 || p0 < 0 || p0 > p) throw std::invalid_argument("true_beta: need 0 <= p0 <= p");
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    for (Index j = 0; j < p0; ++j) beta(j) = 0.75 + 0.25 * static_cast<double>(j + 1);
    return beta;
}

Eigen::MatrixXd design_covariance(Index p, Index p0)
{
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Identity(p, p);
    for (Index j = 0; j < p0; ++j)
        for (Index k = 0; k < p0; ++k)
            if (j != k) gamma(j, k) = std::pow(0.3, static_cast<double>(std::abs(j - k)));
    return gamma;
}

Eigen::MatrixXd gen_design(const SimulationScenario& scenario, RngStream& rng)
{
    scenario.validate();
    const Eigen::MatrixXd gamma = design_covariance(scenario.p, scenario.p0);
    Eigen::LLT<Eigen::MatrixXd> llt(gamma);
    if (llt.info() != Eigen::Success)
        throw std::logic_error("gen_design: design covariance is not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    Eigen::MatrixXd Z(scenario.n, scenario.p);
    for (Index i = 0; i < scenario.n; ++i)
        for (Index j = 0; j < scenario.p; ++j) Z(i, j) = rng.normal();
    return Z * L.transpose();
}

ErrorDraw gen_errors(const SimulationScenario& scenario, const Eigen::MatrixXd& X, RngStream& rng)
{
    if (X.rows() != scenario.n || X.cols() != scenario.p)
        throw std::invalid_argument("gen_errors: design does not match scenario");
    ErrorDraw out;
    out.s.resize(X.rows());
    out.epsilon.resize(X.rows());
    for (Index i = 0; i < X.rows(); ++i) {
        double s = 1.0;
        if (scenario.error_scale == ErrorScale::Heteroscedastic)
            s = std::sqrt(X.row(i).array().abs().pow(5.0).mean());
        if (!(s > 0.0))
            throw std::invalid_argument("gen_errors: row " + std::to_string(i) +
                                        " gives a zero error scale");
        double eta;
        if (scenario.error_case == ErrorCase::ChiSquare) {
            const double a = rng.normal();
            const double b = rng.normal();
            eta = a * a + b * b - 2.0;
        } else {
            eta = rng.normal();
        }
        out.s(i) = s;
        out.epsilon(i) = s * eta;
    }
    return out;
}

ScenarioDraw draw_scenario(const SimulationScenario& scenario, Eigen::MatrixXd X, RngStream& rng)
{
    ScenarioDraw draw;
    draw.beta_true = true_beta(scenario.p, scenario.p0);
    ErrorDraw e = gen_errors(scenario, X, rng);
    draw.dataset.y = X * draw.beta_true + e.epsilon;
    draw.dataset.X = std::move(X);
    draw.s = std::move(e.s);
    draw.epsilon = std::move(e.epsilon);
    return draw;
}

Eigen::MatrixXd fixed_design(const SimulationScenario& scenario)
{
    RngStream stream = RngStream(scenario.seed).substream(kDesignStream);
    return gen_design(scenario, stream);
}

double MethodCoverage::region_coverage() const
{
    return region_total == 0 ? 0.0 : static_cast<double>(region_hits) / double(region_total);
}

double MethodCoverage::mean_radius() const
{
    return region_total == 0 ? 0.0 : radius_sum / double(region_total);
}

ReplicateOutcome run_replicate(const SimulationScenario& scenario,
                               const std::vector<Scheme>& methods, Index m,
                               const Eigen::MatrixXd& design)
{
    ReplicateOutcome out;
    out.index = m;
    const RngStream stream =
        RngStream(scenario.seed).substream(kReplicateStream).substream(static_cast<std::uint64_t>(m));
    try {
        RngStream data_rng = stream.substream(kDataStream);
        Eigen::MatrixXd X = scenario.design_mode == DesignMode::Fixed
                                ? design
                                : gen_design(scenario, data_rng);
        const ScenarioDraw draw = draw_scenario(scenario, std::move(X), data_rng);
        const Dataset& data = draw.dataset;

        RngStream cv_rng = stream.substream(kCvStream);
        const Eigen::VectorXd grid = default_lambda_grid(data, scenario.grid_points);
        out.lambda = cross_validate_lambda(data, grid, scenario.folds, cv_rng, scenario.solver);
        const LassoFit fit = fit_lasso(data, out.lambda, std::nullopt, scenario.solver);
        if (!fit.converged) throw std::runtime_error("lasso fit did not converge");
        const ThresholdedEstimate est =
            threshold_estimate(fit, default_threshold(data.n(), scenario.threshold_scale));
        out.beta_hat = fit.beta;
        out.beta_tilde = est.beta_tilde;

        for (Scheme scheme : methods) {
            const RngStream scheme_rng =
                stream.substream(kSchemeStreamBase + static_cast<std::uint64_t>(scheme));
            const BootstrapDraws draws = run_bootstrap(scheme, data, fit, est, scenario.weights,
                                                       scenario.B, scheme_rng, scenario.solver);
            MethodReplicate r;
            for (Index j = 0; j < data.p(); ++j) {
                r.two_sided.push_back(percentile_interval(draws, fit, j, scenario.level, Side::TwoSided));
                r.right_sided.push_back(
                    percentile_interval(draws, fit, j, scenario.level, Side::RightSided));
            }
            r.region = sup_norm_region(draws, fit, scenario.level);
            r.region_covers = r.region.contains(draw.beta_true);
            out.methods.emplace(scheme, std::move(r));
        }
    } catch (const std::exception& e) {
        out.failed = true;
        out.error = e.what();
        out.methods.clear();
    }
    return out;
}

ExperimentResult run_coverage_experiment(const SimulationScenario& scenario,
                                         const std::vector<Scheme>& methods, int threads)
{
    scenario.validate();
    if (methods.empty()) throw std::invalid_argument("experiment: no bootstrap methods requested");
    ExperimentResult result;
    result.scenario = scenario;
    result.methods = methods;
    const Eigen::MatrixXd design = scenario.design_mode == DesignMode::Fixed
                                       ? fixed_design(scenario)
                                       : Eigen::MatrixXd();
    result.replicates.resize(static_cast<std::size_t>(scenario.M));
    parallel_for(static_cast<std::size_t>(scenario.M), threads, [&](std::size_t m) {
        result.replicates[m] = run_replicate(scenario, methods, static_cast<Index>(m), design);
    });

    const Eigen::VectorXd truth = true_beta(scenario.p, scenario.p0);
    for (Scheme scheme : methods) {
        MethodCoverage cov;
        cov.two_sided = coverage_tally({}, truth);
        cov.right_sided = coverage_tally({}, truth);
        cov.right_sided.side = Side::RightSided;
        const std::string label(scheme_name(scheme));
        cov.two_sided.method = cov.right_sided.method = label;
        cov.two_sided.scenario = cov.right_sided.scenario = scenario.tag();
        result.coverage.emplace(scheme, std::move(cov));
    }
    for (const auto& rep : result.replicates) {
        if (rep.failed) {
            ++result.failures;
            continue;
        }
        for (Scheme scheme : methods) {
            const MethodReplicate& r = rep.methods.at(scheme);
            MethodCoverage& cov = result.coverage.at(scheme);
            merge_into(cov.two_sided, coverage_tally(r.two_sided, truth));
            merge_into(cov.right_sided, coverage_tally(r.right_sided, truth));
            cov.region_hits += r.region_covers ? 1 : 0;
            cov.region_total += 1;
            cov.radius_sum += r.region.radius;
        }
    }
    if (static_cast<double>(result.failures) > 0.02 * static_cast<double>(scenario.M)) {
        std::string first;
        for (const auto& rep : result.replicates)
            if (rep.failed) {
                first = rep.error;
                break;
            }
        throw std::runtime_error("experiment: " + std::to_string(result.failures) + " of " +
                                 std::to_string(scenario.M) + " replicates failed (first: " +
                                 first + ")");
    }
    return result;
}

}  // namespace pblasso
