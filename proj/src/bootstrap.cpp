#include "pblasso/bootstrap.hpp"

#include <cmath>
#include <random>
#include <string>

#include "pblasso/parallel.hpp"

namespace pblasso {

std::string_view scheme_name(Scheme scheme)
{
    switch (scheme) {
    case Scheme::Perturbation: return "perturbation";
    case Scheme::NaivePerturbation: return "naive";
    case Scheme::Residual: return "residual";
    case Scheme::Paired: return "paired";
    }
    return "unknown";
}

Scheme parse_scheme(std::string_view name)
{
    if (name == "perturbation") return Scheme::Perturbation;
    if (name == "naive") return Scheme::NaivePerturbation;
    if (name == "residual") return Scheme::Residual;
    if (name == "paired") return Scheme::Paired;
    throw std::invalid_argument("unknown bootstrap scheme '" + std::string(name) + "'");
}

WeightDistribution WeightDistribution::exponential(double rate)
{
    WeightDistribution d;
    d.family = Family::Exponential;
    d.rate = rate;
    d.validate();
    return d;
}

WeightDistribution WeightDistribution::beta_family(double alpha)
{
    WeightDistribution d;
    d.family = Family::Beta;
    d.alpha = alpha;
    d.beta = alpha * (1.0 + alpha) / (1.0 - alpha);
    d.validate();
    return d;
}

double WeightDistribution::mu() const
{
    return family == Family::Exponential ? 1.0 / rate : alpha / (alpha + beta);
}

double WeightDistribution::sigma2() const
{
    if (family == Family::Exponential) return 1.0 / (rate * rate);
    const double s = alpha + beta;
    return alpha * beta / (s * s * (s + 1.0));
}

void WeightDistribution::validate() const
{
    if (family == Family::Exponential) {
        if (!std::isfinite(rate) || rate <= 0.0)
            throw std::invalid_argument("weights: exponential rate must be positive");
        return;
    }
    if (!(alpha > 0.0 && alpha < 1.0) || !std::isfinite(beta) || beta <= 0.0)
        throw std::invalid_argument("weights: beta family needs 0 < alpha < 1 and beta > 0");
    const double m = mu();
    if (std::abs(sigma2() - m * m) > 1e-12 * m * m)
        throw std::invalid_argument(
            "weights: beta parameters violate var = mean^2 (need beta = alpha(1+alpha)/(1-alpha))");
}

Eigen::VectorXd draw_weights(const WeightDistribution& dist, Index n, RngStream& rng)
{
    dist.validate();
    Eigen::VectorXd w(n);
    make_weight_sampler(dist)(rng, w);
    return w;
}

WeightSampler make_weight_sampler(const WeightDistribution& dist)
{
    dist.validate();
    if (dist.family == WeightDistribution::Family::Exponential) {
        return [rate = dist.rate](RngStream& rng, Eigen::Ref<Eigen::VectorXd> w) {
            std::exponential_distribution<double> law(rate);
            for (Index i = 0; i < w.size(); ++i) w(i) = law(rng.engine());
        };
    }
    return [a = dist.alpha, b = dist.beta](RngStream& rng, Eigen::Ref<Eigen::VectorXd> w) {
        std::gamma_distribution<double> ga(a, 1.0);
        std::gamma_distribution<double> gb(b, 1.0);
        for (Index i = 0; i < w.size(); ++i) {
            const double x = ga(rng.engine());
            const double y = gb(rng.engine());
            w(i) = x / (x + y);
        }
    };
}

double default_threshold(Index n, double scale)
{
    if (n < 2) throw std::invalid_argument("default_threshold: need n >= 2");
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw std::invalid_argument("default_threshold: scale must be positive");
    return scale * std::pow(static_cast<double>(n), -0.25);
}

ThresholdedEstimate threshold_estimate(const LassoFit& fit, double a_n)
{
    if (!(a_n > 0.0) || !std::isfinite(a_n))
        throw std::invalid_argument("threshold_estimate: a_n must be positive");
    if (!fit.beta.allFinite()) throw std::invalid_argument("threshold_estimate: non-finite beta");
    ThresholdedEstimate est;
    est.a_n = a_n;
    est.beta_tilde = Eigen::VectorXd::Zero(fit.beta.size());
    for (Index j = 0; j < fit.beta.size(); ++j) {
        if (std::abs(fit.beta(j)) > a_n) {
            est.beta_tilde(j) = fit.beta(j);
            est.support.push_back(j);
            est.signs.push_back(fit.beta(j) > 0.0 ? 1 : -1);
        }
    }
    return est;
}

Eigen::VectorXd pseudo_responses(const Dataset& data, const ThresholdedEstimate& est,
                                 const Eigen::VectorXd& weights, double mu)
{
    if (weights.size() != data.n() || est.beta_tilde.size() != data.p())
        throw std::invalid_argument("pseudo_responses: length mismatch");
    if (!(mu > 0.0)) throw std::invalid_argument("pseudo_responses: mu must be positive");
    const Eigen::VectorXd fitted = data.X * est.beta_tilde;
    const Eigen::VectorXd resid = data.y - fitted;
    return fitted.array() + resid.array() * (weights.array() - mu) / mu;
}

Index BootstrapDraws::flagged_count() const
{
    Index c = 0;
    for (char f : flagged) c += f != 0;
    return c;
}

std::vector<Index> resample_indices(Index n, RngStream& rng)
{
    std::vector<Index> idx(static_cast<std::size_t>(n));
    for (auto& i : idx) i = static_cast<Index>(rng.index(static_cast<std::size_t>(n)));
    return idx;
}

Eigen::VectorXd centered_residuals(const Dataset& data, const ThresholdedEstimate& est)
{
    Eigen::VectorXd r = data.y - data.X * est.beta_tilde;
    r.array() -= r.mean();
    return r;
}

Eigen::VectorXd resample_residuals(const Eigen::VectorXd& pool, RngStream& rng)
{
    Eigen::VectorXd out(pool.size());
    for (Index i = 0; i < pool.size(); ++i)
        out(i) = pool(static_cast<Index>(rng.index(static_cast<std::size_t>(pool.size()))));
    return out;
}

namespace {

struct Replicate {
    Eigen::VectorXd beta;
    bool flagged = false;
};

void check_inputs(const Dataset& data, const LassoFit& fit, const ThresholdedEstimate& est, Index B)
{
    validate(data);
    if (B < 1) throw std::invalid_argument("bootstrap: B must be >= 1");
    if (fit.beta.size() != data.p() || est.beta_tilde.size() != data.p())
        throw std::invalid_argument("bootstrap: fit/estimate length does not match data");
}

template <class Body>
BootstrapDraws drive(Scheme scheme, const Dataset& data, const LassoFit& fit,
                     const ThresholdedEstimate& est, Index B, const RngStream& rng, int threads,
                     Body&& body)
{
    check_inputs(data, fit, est, B);
    BootstrapDraws out;
    out.scheme = scheme;
    out.center = est.beta_tilde;
    out.lambda = fit.lambda;
    out.n = data.n();
    out.B = B;
    out.seed = rng.key();
    out.estimates.resize(B, data.p());
    out.flagged.assign(static_cast<std::size_t>(B), 0);

    parallel_for(static_cast<std::size_t>(B), threads, [&](std::size_t b) {
        RngStream stream = rng.substream(b);
        Replicate r = body(stream);
        out.estimates.row(static_cast<Index>(b)) = r.beta.transpose();
        out.flagged[b] = r.flagged ? 1 : 0;
    });

    const double root_n = std::sqrt(static_cast<double>(data.n()));
    out.t_star = root_n * (out.estimates.rowwise() - out.center.transpose());
    if (!out.t_star.allFinite())
        throw BootstrapFailure(std::string(scheme_name(scheme)) + " bootstrap: non-finite draw");
    if (static_cast<double>(out.flagged_count()) > 0.01 * static_cast<double>(B))
        throw BootstrapFailure(std::string(scheme_name(scheme)) + " bootstrap: " +
                               std::to_string(out.flagged_count()) + " of " + std::to_string(B) +
                               " replicates failed to converge");
    return out;
}

}  // namespace

BootstrapDraws perturbation_bootstrap(const Dataset& data, const LassoFit& fit,
                                      const ThresholdedEstimate& est, const WeightSampler& sampler,
                                      double mu, Index B, const RngStream& rng,
                                      const SolverOptions& opts, int threads)
{
    if (!(mu > 0.0)) throw std::invalid_argument("perturbation_bootstrap: mu must be positive");
    check_inputs(data, fit, est, B);
    const QuadraticForm base = quadratic_form(data);
    const Eigen::VectorXd fitted = data.X * est.beta_tilde;
    const Eigen::VectorXd resid = data.y - fitted;
    return drive(Scheme::Perturbation, data, fit, est, B, rng, threads, [&](RngStream& s) {
        Eigen::VectorXd w(data.n());
        sampler(s, w);
        const Eigen::VectorXd z = fitted.array() + resid.array() * (w.array() - mu) / mu;
        QuadraticForm form;
        form.gram = base.gram;
        form.xty = data.X.transpose() * z;
        form.yty = z.squaredNorm();
        form.n = data.n();
        LassoFit r = solve_lasso(form, fit.lambda, est.beta_tilde, opts);
        return Replicate{std::move(r.beta), !r.converged};
    });
}

BootstrapDraws perturbation_bootstrap(const Dataset& data, const LassoFit& fit,
                                      const ThresholdedEstimate& est,
                                      const WeightDistribution& dist, Index B,
                                      const RngStream& rng, const SolverOptions& opts, int threads)
{
    return perturbation_bootstrap(data, fit, est, make_weight_sampler(dist), dist.mu(), B, rng,
                                  opts, threads);
}

BootstrapDraws naive_perturbation_bootstrap(const Dataset& data, const LassoFit& fit,
                                            const ThresholdedEstimate& est,
                                            const WeightSampler& sampler, Index B,
                                            const RngStream& rng, const SolverOptions& opts,
                                            int threads)
{
    return drive(Scheme::NaivePerturbation, data, fit, est, B, rng, threads, [&](RngStream& s) {
        Eigen::VectorXd w(data.n());
        sampler(s, w);
        const QuadraticForm form = weighted_quadratic_form(data.X, data.y, w);
        LassoFit r = solve_lasso(form, fit.lambda, est.beta_tilde, opts);
        return Replicate{std::move(r.beta), !r.converged};
    });
}

BootstrapDraws naive_perturbation_bootstrap(const Dataset& data, const LassoFit& fit,
                                            const ThresholdedEstimate& est,
                                            const WeightDistribution& dist, Index B,
                                            const RngStream& rng, const SolverOptions& opts,
                                            int threads)
{
    return naive_perturbation_bootstrap(data, fit, est, make_weight_sampler(dist), B, rng, opts,
                                        threads);
}

BootstrapDraws residual_bootstrap(const Dataset& data, const LassoFit& fit,
                                  const ThresholdedEstimate& est, Index B, const RngStream& rng,
                                  const SolverOptions& opts, int threads)
{
    check_inputs(data, fit, est, B);
    const QuadraticForm base = quadratic_form(data);
    const Eigen::VectorXd fitted = data.X * est.beta_tilde;
    const Eigen::VectorXd pool = centered_residuals(data, est);
    return drive(Scheme::Residual, data, fit, est, B, rng, threads, [&](RngStream& s) {
        const Eigen::VectorXd y_star = fitted + resample_residuals(pool, s);
        QuadraticForm form;
        form.gram = base.gram;
        form.xty = data.X.transpose() * y_star;
        form.yty = y_star.squaredNorm();
        form.n = data.n();
        LassoFit r = solve_lasso(form, fit.lambda, est.beta_tilde, opts);
        return Replicate{std::move(r.beta), !r.converged};
    });
}

BootstrapDraws paired_bootstrap(const Dataset& data, const LassoFit& fit,
                                const ThresholdedEstimate& est, Index B, const RngStream& rng,
                                const SolverOptions& opts, int threads)
{
    constexpr int max_attempts = 10;
    return drive(Scheme::Paired, data, fit, est, B, rng, threads, [&](RngStream& s) {
        Dataset sample;
        bool degenerate = true;
        for (int attempt = 0; attempt < max_attempts && degenerate; ++attempt) {
            sample = select_rows(data, resample_indices(data.n(), s));
            degenerate = (sample.X.colwise().squaredNorm().array() <= 0.0).any();
        }
        // A column that is still all zero is pinned at 0 by the solver.
        LassoFit r = solve_lasso(quadratic_form(sample), fit.lambda, est.beta_tilde, opts);
        return Replicate{std::move(r.beta), degenerate || !r.converged};
    });
}

BootstrapDraws run_bootstrap(Scheme scheme, const Dataset& data, const LassoFit& fit,
                             const ThresholdedEstimate& est, const WeightDistribution& dist,
                             Index B, const RngStream& rng, const SolverOptions& opts, int threads)
{
    switch (scheme) {
    case Scheme::Perturbation:
        return perturbation_bootstrap(data, fit, est, dist, B, rng, opts, threads);
    case Scheme::NaivePerturbation:
        return naive_perturbation_bootstrap(data, fit, est, dist, B, rng, opts, threads);
    case Scheme::Residual: return residual_bootstrap(data, fit, est, B, rng, opts, threads);
    case Scheme::Paired: return paired_bootstrap(data, fit, est, B, rng, opts, threads);
    }
    throw std::invalid_argument("run_bootstrap: unknown scheme");
}

}  // namespace pblasso
