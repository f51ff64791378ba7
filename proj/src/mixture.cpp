#include "nva/mixture.hpp"

#include "nva/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nva {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

}  // namespace

Gaussian::Gaussian(Vector mean, Matrix precision) : mean_(std::move(mean)) {
    const auto d = mean_.size();
    if (d == 0) throw std::invalid_argument("gaussian: empty mean");
    if (precision.rows() != d || precision.cols() != d)
        throw std::invalid_argument("gaussian: precision shape does not match mean");
    if (!mean_.allFinite() || !precision.allFinite())
        throw std::invalid_argument("gaussian: non-finite parameters");
    const double scale = std::max(1.0, precision.cwiseAbs().maxCoeff());
    if ((precision - precision.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw std::invalid_argument("gaussian: precision is not symmetric");
    precision_ = symmetrize(precision);
    Eigen::LLT<Matrix> llt(precision_);
    if (llt.info() != Eigen::Success || llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= 0.0)
        throw std::invalid_argument("gaussian: precision is not positive definite");
    factor_ = llt.matrixU();
    log_det_precision_ = 2.0 * factor_.diagonal().array().log().sum();
    covariance_ = symmetrize(llt.solve(Matrix::Identity(d, d)));
}

double Gaussian::log_density(const Vector& x) const {
    const Vector y = factor_.triangularView<Eigen::Upper>() * (x - mean_);
    return -0.5 * static_cast<double>(dim()) * kLog2Pi + 0.5 * log_det_precision_ - 0.5 * y.squaredNorm();
}

Matrix Gaussian::sample(Engine& engine, std::size_t n) const {
    Matrix z = standard_normal(engine, mean_.size(), static_cast<Eigen::Index>(n));
    factor_.triangularView<Eigen::Upper>().solveInPlace(z);
    return z.colwise() + mean_;
}

double gaussian_entropy(const Gaussian& g) {
    const double d = static_cast<double>(g.dim());
    return 0.5 * d * (1.0 + kLog2Pi) - 0.5 * g.log_det_precision();
}

Vector weights_from_logits(const Vector& logits) {
    const double m = logits.maxCoeff();
    Vector w = (logits.array() - m).exp();
    return w / w.sum();
}

MixtureState::MixtureState(Vector logits, std::vector<Gaussian> components)
    : logits_(std::move(logits)), components_(std::move(components)) {
    if (components_.empty()) throw std::invalid_argument("mixture: no components");
    if (static_cast<std::size_t>(logits_.size()) != components_.size())
        throw std::invalid_argument("mixture: logits and components differ in length");
    if (!logits_.allFinite()) throw std::invalid_argument("mixture: non-finite logits");
    for (const auto& c : components_)
        if (c.dim() != components_.front().dim())
            throw std::invalid_argument("mixture: components differ in dimension");
    logits_.array() -= logits_(logits_.size() - 1);
    weights_ = weights_from_logits(logits_);
}

MixtureState MixtureState::from_weights(const Vector& weights, std::vector<Gaussian> components) {
    if (weights.size() == 0 || (weights.array() <= 0.0).any() || !weights.allFinite())
        throw std::invalid_argument("mixture: weights must be positive");
    if (std::abs(weights.sum() - 1.0) > 1e-9)
        throw std::invalid_argument("mixture: weights must sum to one");
    Vector logits = weights.array().log() - std::log(weights(weights.size() - 1));
    return MixtureState(std::move(logits), std::move(components));
}

Matrix component_log_densities(const MixtureState& q, const Matrix& points) {
    const std::size_t K = q.size();
    const std::size_t d = q.dim();
    const auto n = static_cast<std::size_t>(points.cols());
    if (static_cast<std::size_t>(points.rows()) != d)
        throw std::invalid_argument("mixture: point dimension mismatch");
    const Matrix coords = points.transpose();
    std::vector<double> row(n);
    Matrix out(K, n);
    for (std::size_t k = 0; k < K; ++k) {
        const Gaussian& c = q.component(k);
        kernels::mahalanobis_sq({coords.data(), n * d}, n, {c.mean().data(), d},
                                {c.factor().data(), d * d}, row);
        const double offset = std::log(q.weights()(k)) - 0.5 * static_cast<double>(d) * kLog2Pi +
                              0.5 * c.log_det_precision();
        for (std::size_t b = 0; b < n; ++b) out(k, b) = offset - 0.5 * row[b];
    }
    return out;
}

Vector log_density(const MixtureState& q, const Matrix& points) {
    const Matrix comp = component_log_densities(q, points);
    const auto n = static_cast<std::size_t>(points.cols());
    // Row-major copy so each component's row is contiguous.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = comp;
    Vector out(points.cols());
    kernels::log_sum_exp_columns({rows.data(), static_cast<std::size_t>(rows.size())}, q.size(), n,
                                 {out.data(), n});
    return out;
}

double log_density(const MixtureState& q, const Vector& x) {
    return log_density_derivatives(q, x, false).value;
}

namespace {

struct PointTerms {
    Vector log_terms;             // log(pi_k N_k(x))
    std::vector<Vector> s_delta;  // S_k (mu_k - x)
};

PointTerms point_terms(const MixtureState& q, const Vector& x) {
    const std::size_t K = q.size();
    const double d = static_cast<double>(q.dim());
    PointTerms t{Vector(K), std::vector<Vector>(K)};
    for (std::size_t k = 0; k < K; ++k) {
        const Gaussian& c = q.component(k);
        const Vector delta = c.mean() - x;
        t.s_delta[k] = c.precision() * delta;
        t.log_terms(k) = std::log(q.weights()(k)) - 0.5 * d * kLog2Pi +
                         0.5 * c.log_det_precision() - 0.5 * delta.dot(t.s_delta[k]);
    }
    return t;
}

}  // namespace

Vector responsibilities(const MixtureState& q, const Vector& x) {
    const PointTerms t = point_terms(q, x);
    return weights_from_logits(t.log_terms);
}

LogDensityDerivatives log_density_derivatives(const MixtureState& q, const Vector& x,
                                              bool with_hessian) {
    const PointTerms t = point_terms(q, x);
    const double m = t.log_terms.maxCoeff();
    const Vector e = (t.log_terms.array() - m).exp();
    const double total = e.sum();
    const Vector r = e / total;
    LogDensityDerivatives out;
    out.value = m + std::log(total);
    out.gradient = Vector::Zero(x.size());
    for (std::size_t k = 0; k < q.size(); ++k) out.gradient += r(k) * t.s_delta[k];
    if (with_hessian) {
        out.hessian = -out.gradient * out.gradient.transpose();
        for (std::size_t k = 0; k < q.size(); ++k) {
            if (r(k) == 0.0) continue;
            out.hessian.noalias() += r(k) * (t.s_delta[k] * t.s_delta[k].transpose() - q.component(k).precision());
        }
        out.hessian = symmetrize(out.hessian);
    }
    return out;
}

Vector log_density_gradient(const MixtureState& q, const Vector& x) {
    return log_density_derivatives(q, x, false).gradient;
}

Matrix log_density_hessian(const MixtureState& q, const Vector& x) {
    return log_density_derivatives(q, x, true).hessian;
}

double approx_mixture_entropy(const MixtureState& q) {
    double h = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double p = q.weights()(k);
        h += p * (gaussian_entropy(q.component(k)) - std::log(p));
    }
    return h;
}

Vector limit_weights(const std::vector<Matrix>& mode_hessians) {
    if (mode_hessians.empty()) throw std::invalid_argument("limit_weights: no modes");
    Vector logc(mode_hessians.size());
    for (std::size_t i = 0; i < mode_hessians.size(); ++i) {
        Eigen::LLT<Matrix> llt(-symmetrize(mode_hessians[i]));
        if (llt.info() != Eigen::Success)
            throw std::invalid_argument("limit_weights: Hessian is not negative definite");
        const Matrix L = llt.matrixL();
        logc(i) = -L.diagonal().array().log().sum();
    }
    return weights_from_logits(logc);
}

Matrix sample_mixture(const MixtureState& q, Engine& engine, std::size_t n) {
    std::discrete_distribution<std::size_t> pick(q.weights().data(), q.weights().data() + q.size());
    Matrix out(q.dim(), n);
    for (std::size_t b = 0; b < n; ++b) out.col(b) = q.component(pick(engine)).sample(engine, 1);
    return out;
}

nlohmann::json mixture_to_json(const MixtureState& q) {
    nlohmann::json j;
    j["weights"] = std::vector<double>(q.weights().data(), q.weights().data() + q.size());
    j["means"] = nlohmann::json::array();
    j["precisions"] = nlohmann::json::array();
    for (const auto& c : q.components()) {
        j["means"].push_back(std::vector<double>(c.mean().data(), c.mean().data() + c.dim()));
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < c.precision().rows(); ++r) {
            const Vector row = c.precision().row(r).transpose();
            rows.push_back(std::vector<double>(row.data(), row.data() + row.size()));
        }
        j["precisions"].push_back(rows);
    }
    return j;
}

MixtureState mixture_from_json(const nlohmann::json& j) {
    for (const char* key : {"weights", "means", "precisions"})
        if (!j.contains(key)) throw std::invalid_argument(std::string("mixture: missing key ") + key);
    const auto w = j.at("weights").get<std::vector<double>>();
    const auto& means = j.at("means");
    const auto& precs = j.at("precisions");
    if (means.size() != w.size() || precs.size() != w.size())
        throw std::invalid_argument("mixture: weights, means and precisions differ in length");
    std::vector<Gaussian> comps;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const auto m = means[k].get<std::vector<double>>();
        const auto rows = precs[k].get<std::vector<std::vector<double>>>();
        Matrix s(m.size(), m.size());
        if (rows.size() != m.size()) throw std::invalid_argument("mixture: precision shape mismatch");
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != m.size()) throw std::invalid_argument("mixture: precision shape mismatch");
            for (std::size_t c = 0; c < m.size(); ++c) s(r, c) = rows[r][c];
        }
        comps.emplace_back(Eigen::Map<const Vector>(m.data(), m.size()), s);
    }
    return MixtureState::from_weights(Eigen::Map<const Vector>(w.data(), w.size()), std::move(comps));
}

}  // namespace nva
