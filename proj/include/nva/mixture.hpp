#pragma once

#include "nva/linalg.hpp"
#include "nva/rng.hpp"

#include <json.hpp>

#include <cstddef>
#include <vector>

namespace nva {

// Gaussian in (mean, precision) form with its Cholesky data cached.
class Gaussian {
public:
    Gaussian(Vector mean, Matrix precision);

    std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
    const Vector& mean() const { return mean_; }
    const Matrix& precision() const { return precision_; }
    const Matrix& covariance() const { return covariance_; }
    // Upper-triangular U with precision = U^T U.
    const Matrix& factor() const { return factor_; }
    double log_det_precision() const { return log_det_precision_; }

    double log_density(const Vector& x) const;
    // d x n matrix of draws.
    Matrix sample(Engine& engine, std::size_t n) const;

private:
    Vector mean_;
    Matrix precision_;
    Matrix covariance_;
    Matrix factor_;
    double log_det_precision_ = 0.0;
};

double gaussian_entropy(const Gaussian& g);

// Weights are carried as logits v with v_K = 0 and pi_k = exp(v_k) / sum_j exp(v_j).
class MixtureState {
public:
    MixtureState(Vector logits, std::vector<Gaussian> components);
    static MixtureState from_weights(const Vector& weights, std::vector<Gaussian> components);

    std::size_t size() const { return components_.size(); }
    std::size_t dim() const { return components_.front().dim(); }
    const Vector& logits() const { return logits_; }
    const Vector& weights() const { return weights_; }
    const Gaussian& component(std::size_t k) const { return components_[k]; }
    const std::vector<Gaussian>& components() const { return components_; }

private:
    Vector logits_;
    Vector weights_;
    std::vector<Gaussian> components_;
};

Vector weights_from_logits(const Vector& logits);

// K x n matrix of log(pi_k N(x_b; mu_k, S_k^-1)) for the columns of points (d x n).
Matrix component_log_densities(const MixtureState& q, const Matrix& points);
Vector log_density(const MixtureState& q, const Matrix& points);
double log_density(const MixtureState& q, const Vector& x);
Vector responsibilities(const MixtureState& q, const Vector& x);

struct LogDensityDerivatives {
    double value = 0.0;
    Vector gradient;
    Matrix hessian;  // empty unless requested
};

LogDensityDerivatives log_density_derivatives(const MixtureState& q, const Vector& x,
                                              bool with_hessian);
Vector log_density_gradient(const MixtureState& q, const Vector& x);
Matrix log_density_hessian(const MixtureState& q, const Vector& x);

// -sum pi log pi + sum pi H(N_k); exact only when components do not overlap.
double approx_mixture_entropy(const MixtureState& q);

// Limit weights proportional to det(-H_i)^(-1/2) over mode Hessians H_i.
Vector limit_weights(const std::vector<Matrix>& mode_hessians);

Matrix sample_mixture(const MixtureState& q, Engine& engine, std::size_t n);

nlohmann::json mixture_to_json(const MixtureState& q);
MixtureState mixture_from_json(const nlohmann::json& j);

}  // namespace nva
