#include "pblasso/limit_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pblasso/parallel.hpp"

namespace pblasso {

LimitMatrices estimate_limit_matrices(const Dataset& data, const Eigen::VectorXd& residuals)
{
    if (residuals.size() != data.n() || data.y.size() != data.n())
        throw std::invalid_argument("estimate_limit_matrices: dimension mismatch");
    const double n = static_cast<double>(data.n());
    LimitMatrices out;
    out.C = data.X.transpose() * data.X / n;
    const Eigen::MatrixXd scaled = data.X.array().colwise() * residuals.array().square();
    out.Sigma = scaled.transpose() * data.X / n;
    out.s2 = residuals.squaredNorm() / n;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.C, Eigen::EigenvaluesOnly);
    out.c_min_eigenvalue = eig.eigenvalues().minCoeff();
    out.c_positive_definite = out.c_min_eigenvalue >= 1e-8;
    return out;
}

Index LimitObjective::p0() const
{
    return static_cast<Index>(std::count_if(signs.begin(), signs.end(), [](int s) { return s != 0; }));
}

void LimitObjective::validate() const
{
    const Index p = C.rows();
    if (p < 1 || C.cols() != p) throw std::invalid_argument("limit objective: C must be square");
    if (Sigma.rows() != p || Sigma.cols() != p)
        throw std::invalid_argument("limit objective: Sigma has wrong shape");
    if (s2C && (s2C->rows() != p || s2C->cols() != p))
        throw std::invalid_argument("limit objective: s2C has wrong shape");
    if (static_cast<Index>(signs.size()) != p)
        throw std::invalid_argument("limit objective: need one sign per coordinate");
    for (int s : signs)
        if (s < -1 || s > 1) throw std::invalid_argument("limit objective: signs must be -1, 0, 1");
    if (!(lambda0 >= 0.0) || !std::isfinite(lambda0))
        throw std::invalid_argument("limit objective: lambda0 must be finite and >= 0");
    const double scale = std::max(1.0, C.cwiseAbs().maxCoeff());
    if ((C - C.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("limit objective: C is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0))
        throw std::invalid_argument("limit objective: C is not positive definite");
    const double sigma_scale = std::max(1.0, Sigma.cwiseAbs().maxCoeff());
    if ((Sigma - Sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * sigma_scale)
        throw std::invalid_argument("limit objective: Sigma is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sig(Sigma, Eigen::EigenvaluesOnly);
    if (sig.eigenvalues().minCoeff() < -1e-10 * sigma_scale)
        throw std::invalid_argument("limit objective: Sigma is not positive semidefinite");
}

LimitObjective limit_objective_from_fit(const Dataset& data, const LassoFit& fit,
                                        const ThresholdedEstimate& est)
{
    const Eigen::VectorXd resid = data.y - data.X * est.beta_tilde;
    const LimitMatrices m = estimate_limit_matrices(data, resid);
    LimitObjective obj;
    obj.C = m.C;
    obj.Sigma = m.Sigma;
    obj.s2C = m.s2 * m.C;
    obj.lambda0 = fit.lambda / std::sqrt(static_cast<double>(data.n()));
    obj.signs.assign(static_cast<std::size_t>(data.p()), 0);
    for (std::size_t k = 0; k < est.support.size(); ++k)
        obj.signs[static_cast<std::size_t>(est.support[k])] = est.signs[k];
    return obj;
}

double limit_subgradient_gap(const LimitObjective& obj, const Eigen::VectorXd& W,
                             const Eigen::VectorXd& v)
{
    const Eigen::VectorXd g = 2.0 * (obj.C * v - W);
    double gap = 0.0;
    for (Index j = 0; j < v.size(); ++j) {
        const int s = obj.signs[static_cast<std::size_t>(j)];
        double viol;
        if (s != 0) {
            viol = std::abs(g(j) + obj.lambda0 * s);
        } else if (v(j) == 0.0) {
            viol = std::max(std::abs(g(j)) - obj.lambda0, 0.0);
        } else {
            viol = std::abs(g(j) + obj.lambda0 * (v(j) > 0.0 ? 1.0 : -1.0));
        }
        gap = std::max(gap, viol);
    }
    return gap;
}

Eigen::VectorXd minimize_limit_objective(const LimitObjective& obj, const Eigen::VectorXd& W,
                                         double tol, int max_sweeps)
{
    const Index p = obj.p();
    if (W.size() != p) throw std::invalid_argument("limit argmin: W has wrong length");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd r = W;  // W - C v
    const double half = 0.5 * obj.lambda0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        for (Index j = 0; j < p; ++j) {
            const double cjj = obj.C(j, j);
            const double z = r(j) + cjj * v(j);
            const int s = obj.signs[static_cast<std::size_t>(j)];
            const double updated = s != 0 ? (z - half * s) / cjj : soft_threshold(z, half) / cjj;
            const double delta = updated - v(j);
            if (delta != 0.0) {
                r.noalias() -= obj.C.col(j) * delta;
                v(j) = updated;
            }
        }
        r = W - obj.C * v;
        if (limit_subgradient_gap(obj, W, v) <= tol) return v;
    }
    throw std::runtime_error("limit argmin: coordinate descent did not reach tolerance");
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov)
{
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
        throw std::invalid_argument("covariance_factor: eigen decomposition failed");
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

Eigen::MatrixXd sample_limit_argmin(const LimitObjective& obj, bool use_s2C, const RngStream& rng,
                                    Index draws, int threads)
{
    obj.validate();
    if (draws < 1) throw std::invalid_argument("sample_limit_argmin: draws must be >= 1");
    if (use_s2C && !obj.s2C) throw std::invalid_argument("sample_limit_argmin: s2C not provided");
    const Eigen::MatrixXd factor = covariance_factor(use_s2C ? *obj.s2C : obj.Sigma);
    const Index p = obj.p();
    Eigen::MatrixXd out(draws, p);
    parallel_for(static_cast<std::size_t>(draws), threads, [&](std::size_t d) {
        RngStream stream = rng.substream(d);
        Eigen::VectorXd z(p);
        for (Index j = 0; j < p; ++j) z(j) = stream.normal();
        const Eigen::VectorXd W = factor * z;
        out.row(static_cast<Index>(d)) = minimize_limit_objective(obj, W).transpose();
    });
    return out;
}

}  // namespace pblasso
