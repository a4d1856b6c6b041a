#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>

#include <CLI11.hpp>

#include "config.hpp"
#include "csv.hpp"
#include "pblasso/bootstrap.hpp"
#include "pblasso/inference.hpp"
#include "pblasso/lasso.hpp"
#include "pblasso/rng.hpp"
#include "pblasso/simulation.hpp"

namespace fs = std::filesystem;

namespace pblasso::cli {

namespace {

// Raised when a fit or a bootstrap run does not reach the solver tolerances.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CommonFlags {
    std::string config;
    std::string out = ".";
    int threads = 1;
    std::optional<std::uint64_t> seed;
    std::optional<double> lambda;
    std::optional<std::string> scheme;
    std::optional<double> level;
    std::optional<Index> B;
    std::optional<std::string> data;
};

Json load_config(const std::string& path)
{
    if (path.empty()) return Json::object();
    const std::string text = read_text(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

fs::path prepare_out(const std::string& dir)
{
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw InputError(dir + ": cannot create output directory: " + ec.message());
    return p;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json vector_json(const Eigen::VectorXd& v)
{
    Json a = Json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

// Ratio cells are written as text so an infinite ratio stays explicit.
std::string ratio_cell(double num, double den)
{
    if (den == 0.0) return "inf";
    return format_double(num / den);
}

std::string scheme_label(Scheme s)
{
    switch (s) {
        case Scheme::Perturbation: return "modified perturbation (pseudo-response lasso)";
        case Scheme::NaivePerturbation: return "naive perturbation (weighted lasso)";
        case Scheme::Residual: return "residual bootstrap";
        case Scheme::Paired: return "paired bootstrap (plain pairs, unmodified)";
    }
    return {};
}

struct FittedModel {
    LassoFit fit;
    std::string lambda_source;
    std::optional<Eigen::VectorXd> grid;
};

// Cross-validation draws from substream 0 of the master seed.
FittedModel fit_model(const Dataset& data, std::optional<double> lambda, int folds,
                      int grid_points, std::uint64_t seed, const SolverOptions& solver)
{
    FittedModel m;
    double lam = 0.0;
    if (lambda) {
        if (!std::isfinite(*lambda) || *lambda < 0.0)
            throw std::invalid_argument("lambda must be finite and non-negative");
        lam = *lambda;
        m.lambda_source = "user";
    } else {
        m.grid = default_lambda_grid(data, grid_points);
        RngStream cv = RngStream(seed).substream(0);
        lam = cross_validate_lambda(data, *m.grid, folds, cv, solver);
        m.lambda_source = "cross_validation";
    }
    m.fit = fit_lasso(data, lam, std::nullopt, solver);
    return m;
}

Json fit_json(const FittedModel& m, const std::vector<std::string>& names)
{
    Json j;
    j["beta"] = vector_json(m.fit.beta);
    j["coefficients"] = names;
    j["lambda"] = m.fit.lambda;
    j["lambda_source"] = m.lambda_source;
    if (m.grid) j["lambda_grid"] = vector_json(*m.grid);
    j["kkt_gap"] = m.fit.kkt_gap;
    j["objective"] = m.fit.objective;
    j["iterations"] = m.fit.iterations;
    j["converged"] = m.fit.converged;
    return j;
}

void add_common(CLI::App* sub, CommonFlags& f)
{
    sub->add_option("--config", f.config, "JSON config file");
    sub->add_option("--out", f.out, "output directory")->capture_default_str();
    sub->add_option("--threads", f.threads, "worker threads (never changes results)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", f.seed, "master seed");
}

// fit ---------------------------------------------------------------------

int cmd_fit(const CommonFlags& f, std::ostream& out)
{
    FitConfig c;
    merge(c, load_config(f.config));
    if (f.data) c.data = *f.data;
    if (f.seed) c.seed = *f.seed;
    if (f.lambda) c.lambda = f.lambda;
    if (c.data.empty()) throw InputError("fit: no data file given (--data)");
    c.solver.validate();

    std::vector<std::string> names;
    const Dataset data = read_dataset(c.data, &names);
    const FittedModel m = fit_model(data, c.lambda, c.folds, c.grid_points, c.seed, c.solver);

    const fs::path dir = prepare_out(f.out);
    write_text(dir / "config.json", dump(to_json(c)));
    write_text(dir / "fit.json", dump(fit_json(m, names)));
    out << "lambda " << format_double(m.fit.lambda) << " (" << m.lambda_source << ")\n";
    if (!m.fit.converged)
        throw ConvergenceError("fit: solver did not converge (kkt_gap " +
                               format_double(m.fit.kkt_gap) + ")");
    return kOk;
}

// bootstrap ---------------------------------------------------------------

int cmd_bootstrap(const CommonFlags& f, std::ostream& out)
{
    BootstrapConfig c;
    merge(c, load_config(f.config));
    if (f.data) c.data = *f.data;
    if (f.seed) c.seed = *f.seed;
    if (f.lambda) c.lambda = f.lambda;
    if (f.scheme) c.scheme = parse_scheme(*f.scheme);
    if (f.level) c.level = *f.level;
    if (f.B) c.B = *f.B;
    if (c.data.empty()) throw InputError("bootstrap: no data file given (--data)");
    if (c.B < 20) throw std::invalid_argument("bootstrap: B must be at least 20");
    if (!(c.level > 0.0 && c.level < 1.0))
        throw std::invalid_argument("bootstrap: level must lie in (0, 1)");
    if (!(c.threshold_scale > 0.0))
        throw std::invalid_argument("bootstrap: threshold_scale must be positive");
    c.weights.validate();
    c.solver.validate();

    std::vector<std::string> names;
    const Dataset data = read_dataset(c.data, &names);
    const FittedModel m = fit_model(data, c.lambda, c.folds, c.grid_points, c.seed, c.solver);
    if (!m.fit.converged) throw ConvergenceError("bootstrap: initial fit did not converge");

    const ThresholdedEstimate est =
        threshold_estimate(m.fit, default_threshold(data.n(), c.threshold_scale));
    const RngStream boot = RngStream(c.seed).substream(1);
    const BootstrapDraws draws =
        run_bootstrap(c.scheme, data, m.fit, est, c.weights, c.B, boot, c.solver, f.threads);

    Json two = Json::array();
    Json right = Json::array();
    for (Index j = 0; j < data.p(); ++j) {
        const auto t = percentile_interval(draws, m.fit, j, c.level, Side::TwoSided);
        const auto r = percentile_interval(draws, m.fit, j, c.level, Side::RightSided);
        two.push_back({{"coef", names[static_cast<std::size_t>(j)]},
                       {"lower", t.lower},
                       {"upper", t.upper},
                       {"width", t.width}});
        right.push_back({{"coef", names[static_cast<std::size_t>(j)]}, {"upper", r.upper}});
    }
    const RegionEstimate region = sup_norm_region(draws, m.fit, c.level);

    Json j;
    j["scheme"] = std::string(scheme_name(c.scheme));
    j["scheme_label"] = scheme_label(c.scheme);
    j["seed"] = c.seed;
    j["B"] = c.B;
    j["n"] = data.n();
    j["lambda"] = m.fit.lambda;
    j["lambda_source"] = m.lambda_source;
    j["threshold"] = est.a_n;
    j["coefficients"] = names;
    j["beta_hat"] = vector_json(m.fit.beta);
    j["beta_tilde"] = vector_json(est.beta_tilde);
    j["flagged_replicates"] = draws.flagged_count();
    j["level"] = c.level;
    j["two_sided"] = two;
    j["right_sided"] = right;
    j["region"] = {{"norm", "sup"}, {"center", vector_json(region.center)}, {"radius", region.radius}};

    const fs::path dir = prepare_out(f.out);
    write_text(dir / "config.json", dump(to_json(c)));
    write_matrix_csv(dir / "draws.csv", names, draws.t_star);
    write_text(dir / "intervals.json", dump(j));
    out << scheme_name(c.scheme) << ": " << c.B << " replicates, " << draws.flagged_count()
        << " flagged\n";
    return kOk;
}

// simulate ----------------------------------------------------------------

std::vector<std::string> coef_names(Index p)
{
    std::vector<std::string> v;
    for (Index j = 1; j <= p; ++j) v.push_back("b" + std::to_string(j));
    return v;
}

int cmd_simulate(const CommonFlags& f, const std::vector<std::string>& methods_flag,
                 std::ostream& out)
{
    SimulateConfig c;
    merge(c, load_config(f.config));
    if (f.seed) c.scenario.seed = *f.seed;
    if (f.level) c.scenario.level = *f.level;
    if (f.B) c.scenario.B = *f.B;
    if (f.scheme) c.methods = {parse_scheme(*f.scheme)};
    if (!methods_flag.empty()) {
        c.methods.clear();
        for (const auto& m : methods_flag) c.methods.push_back(parse_scheme(m));
    }
    if (c.methods.empty()) throw std::invalid_argument("simulate: no methods requested");
    if (std::set<Scheme>(c.methods.begin(), c.methods.end()).size() != c.methods.size())
        throw std::invalid_argument("simulate: duplicate method");
    c.scenario.validate();

    const ExperimentResult res = run_coverage_experiment(c.scenario, c.methods, f.threads);
    const SimulationScenario& s = c.scenario;
    const Eigen::VectorXd beta = true_beta(s.p, s.p0);
    const auto names = coef_names(s.p);

    std::string cov = "coef,beta";
    for (Scheme m : c.methods) {
        const std::string n(scheme_name(m));
        cov += "," + n + "_two_sided," + n + "_avg_width," + n + "_right_sided";
    }
    cov += '\n';
    for (Index j = 0; j < s.p; ++j) {
        cov += names[static_cast<std::size_t>(j)] + "," + format_double(beta(j));
        for (Scheme m : c.methods) {
            const MethodCoverage& mc = res.coverage.at(m);
            cov += "," + format_double(mc.two_sided.coverage(j)) + "," +
                   format_double(mc.two_sided.mean_width(j)) + "," +
                   format_double(mc.right_sided.coverage(j));
        }
        cov += '\n';
    }

    std::string region = "method,coverage,mean_radius,hits,total\n";
    for (Scheme m : c.methods) {
        const MethodCoverage& mc = res.coverage.at(m);
        region += std::string(scheme_name(m)) + "," + format_double(mc.region_coverage()) + "," +
                  format_double(mc.mean_radius()) + "," + std::to_string(mc.region_hits) + "," +
                  std::to_string(mc.region_total) + '\n';
    }

    // Perturbation against each competitor, when perturbation was run.
    std::string ecr = "coef,beta";
    const bool have_pb = res.coverage.count(Scheme::Perturbation) > 0;
    std::vector<Scheme> others;
    for (Scheme m : c.methods)
        if (m != Scheme::Perturbation) others.push_back(m);
    if (have_pb)
        for (Scheme m : others) {
            const std::string n(scheme_name(m));
            ecr += ",perturbation_over_" + n + "_two_sided,perturbation_over_" + n + "_right_sided";
        }
    ecr += '\n';
    for (Index j = 0; j < s.p; ++j) {
        ecr += names[static_cast<std::size_t>(j)] + "," + format_double(beta(j));
        if (have_pb) {
            const MethodCoverage& pb = res.coverage.at(Scheme::Perturbation);
            for (Scheme m : others) {
                const MethodCoverage& o = res.coverage.at(m);
                ecr += "," + ratio_cell(pb.two_sided.coverage(j), o.two_sided.coverage(j)) + "," +
                       ratio_cell(pb.right_sided.coverage(j), o.right_sided.coverage(j));
            }
        }
        ecr += '\n';
    }

    Json summary;
    summary["scenario"] = s.tag();
    summary["M"] = s.M;
    summary["B"] = s.B;
    summary["level"] = s.level;
    summary["failures"] = res.failures;
    Json lambdas = Json::array();
    for (const auto& r : res.replicates)
        lambdas.push_back(r.failed ? Json(nullptr) : Json(r.lambda));
    Json per = Json::object();
    for (Scheme m : c.methods) {
        const MethodCoverage& mc = res.coverage.at(m);
        Json e;
        Json t = Json::array(), w = Json::array(), r = Json::array();
        for (Index j = 0; j < s.p; ++j) {
            t.push_back(mc.two_sided.coverage(j));
            w.push_back(mc.two_sided.mean_width(j));
            r.push_back(mc.right_sided.coverage(j));
        }
        e["two_sided_coverage"] = t;
        e["two_sided_mean_width"] = w;
        e["right_sided_coverage"] = r;
        e["region_coverage"] = mc.region_coverage();
        e["region_mean_radius"] = mc.mean_radius();
        per[std::string(scheme_name(m))] = e;
    }
    summary["methods"] = per;
    summary["lambda"] = lambdas;
    Json failed = Json::array();
    for (const auto& r : res.replicates)
        if (r.failed) failed.push_back({{"replicate", r.index}, {"error", r.error}});
    summary["failed_replicates"] = failed;

    const fs::path dir = prepare_out(f.out);
    write_text(dir / "config.json", dump(to_json(c)));
    write_text(dir / "coverage.csv", cov);
    write_text(dir / "region.csv", region);
    write_text(dir / "ecr.csv", ecr);
    write_text(dir / "summary.json", dump(summary));
    out << s.tag() << ": " << s.M << " replicates, " << res.failures << " failed\n";
    return kOk;
}

// report ------------------------------------------------------------------

struct CoverageColumns {
    std::vector<std::string> coefs;
    std::vector<double> two_sided;
    std::vector<double> right_sided;
};

CoverageColumns read_coverage(const std::string& path, const std::string& method)
{
    const CsvTable t = read_csv(path);
    auto column = [&](const std::string& name) {
        for (std::size_t k = 0; k < t.header.size(); ++k)
            if (t.header[k] == name) return k;
        throw InputError(path + ":1: no column '" + name + "'");
    };
    const std::size_t ci = column("coef");
    const std::size_t ti = column(method + "_two_sided");
    const std::size_t ri = column(method + "_right_sided");
    CoverageColumns c;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        c.coefs.push_back(t.rows[i][ci]);
        c.two_sided.push_back(parse_double(t.rows[i][ti], t.line_numbers[i], path));
        c.right_sided.push_back(parse_double(t.rows[i][ri], t.line_numbers[i], path));
    }
    return c;
}

int cmd_report(const CommonFlags& f, const std::vector<std::string>& inputs,
               const std::optional<std::string>& num, const std::optional<std::string>& den,
               std::ostream& out)
{
    ReportConfig c;
    merge(c, load_config(f.config));
    if (!inputs.empty()) c.inputs = inputs;
    if (num) c.numerator_method = *num;
    if (den) c.denominator_method = *den;
    if (c.inputs.size() != 2)
        throw InputError("report: need exactly two coverage files (numerator, denominator)");
    if (c.denominator_method.empty()) c.denominator_method = c.numerator_method;
    parse_scheme(c.numerator_method);
    parse_scheme(c.denominator_method);

    const CoverageColumns a = read_coverage(c.inputs[0], c.numerator_method);
    const CoverageColumns b = read_coverage(c.inputs[1], c.denominator_method);
    if (a.coefs != b.coefs) throw InputError("report: the two files cover different coefficients");

    std::string ecr = "coef,two_sided,right_sided\n";
    for (std::size_t j = 0; j < a.coefs.size(); ++j)
        ecr += a.coefs[j] + "," + ratio_cell(a.two_sided[j], b.two_sided[j]) + "," +
               ratio_cell(a.right_sided[j], b.right_sided[j]) + '\n';

    const fs::path dir = prepare_out(f.out);
    write_text(dir / "config.json", dump(to_json(c)));
    write_text(dir / "ecr.csv", ecr);
    out << "ecr: " << c.numerator_method << " / " << c.denominator_method << ", "
        << a.coefs.size() << " coefficients\n";
    return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Bootstrap inference for the lasso", "pblasso"};
    app.require_subcommand(1);

    CommonFlags f;
    std::vector<std::string> methods;
    std::vector<std::string> inputs;
    std::optional<std::string> num, den;

    CLI::App* fit = app.add_subcommand("fit", "fit the lasso, choosing lambda by CV if unset");
    add_common(fit, f);
    fit->add_option("--data", f.data, "CSV: header row, column 1 = response");
    fit->add_option("--lambda", f.lambda, "penalty");

    CLI::App* boot = app.add_subcommand("bootstrap", "bootstrap draws and intervals");
    add_common(boot, f);
    boot->add_option("--data", f.data, "CSV: header row, column 1 = response");
    boot->add_option("--lambda", f.lambda, "penalty");
    boot->add_option("--scheme", f.scheme, "perturbation, naive, residual or paired");
    boot->add_option("--level", f.level, "confidence level");
    boot->add_option("-B,--replicates", f.B, "bootstrap replicates");

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo coverage experiment");
    add_common(sim, f);
    sim->add_option("--scheme", f.scheme, "run a single method");
    sim->add_option("--methods", methods, "methods to compare")->delimiter(',');
    sim->add_option("--level", f.level, "confidence level");
    sim->add_option("-B,--replicates", f.B, "bootstrap replicates per dataset");

    CLI::App* rep = app.add_subcommand("report", "coverage ratio between two coverage tables");
    add_common(rep, f);
    rep->add_option("inputs", inputs, "numerator and denominator coverage.csv");
    rep->add_option("--numerator-method", num, "method column in the first file");
    rep->add_option("--denominator-method", den, "method column in the second file");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    try {
        if (fit->parsed()) return cmd_fit(f, out);
        if (boot->parsed()) return cmd_bootstrap(f, out);
        if (sim->parsed()) return cmd_simulate(f, methods, out);
        if (rep->parsed()) return cmd_report(f, inputs, num, den, out);
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kNotConverged;
    } catch (const BootstrapFailure& e) {
        err << "error: " << e.what() << '\n';
        return kNotConverged;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const Json::exception& e) {
        err << "error: config: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kInputError;
}

}  // namespace pblasso::cli
