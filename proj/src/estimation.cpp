#include "nva/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nva {

AnnealedPotential::AnnealedPotential(const Objective& objective, const MixtureState& mixture,
                                     double omega, bool fd_fallback)
    : objective_(&objective), mixture_(&mixture), omega_(omega), fd_fallback_(fd_fallback) {
    if (objective.dim != mixture.dim())
        throw std::invalid_argument("potential: objective and mixture dimensions differ");
}

double AnnealedPotential::value(const Vector& x) const {
    return objective_->value(x) - omega_ * log_density(*mixture_, x);
}

Vector AnnealedPotential::objective_gradient(const Vector& x, EvalCounts* counts) const {
    if (objective_->gradient) {
        if (counts) ++counts->gradient;
        return objective_->gradient(x);
    }
    if (!fd_fallback_) throw CapabilityError(objective_->id + ": gradient tier required");
    if (counts) counts->value += 2 * objective_->dim;
    return finite_difference_gradient(objective_->value, x);
}

Matrix AnnealedPotential::objective_hessian(const Vector& x, EvalCounts* counts) const {
    if (objective_->hessian) {
        if (counts) ++counts->hessian;
        return objective_->hessian(x);
    }
    if (!fd_fallback_) throw CapabilityError(objective_->id + ": Hessian tier required");
    const std::size_t d = objective_->dim;
    if (objective_->gradient) {
        if (counts) counts->gradient += 2 * d;
        return finite_difference_hessian(objective_->gradient, x);
    }
    if (counts) counts->value += 1 + 2 * d * d;
    return finite_difference_hessian_from_values(objective_->value, x);
}

Vector AnnealedPotential::gradient(const Vector& x) const {
    return objective_gradient(x, nullptr) - omega_ * log_density_gradient(*mixture_, x);
}

Matrix AnnealedPotential::hessian(const Vector& x) const {
    return objective_hessian(x, nullptr) - omega_ * log_density_hessian(*mixture_, x);
}

EvaluatedBatch AnnealedPotential::evaluate(Matrix points, bool with_gradient, bool with_hessian,
                                           EvalCounts& counts) const {
    EvaluatedBatch out;
    const auto n = points.cols();
    out.values = objective_->values(points) - omega_ * log_density(*mixture_, points);
    counts.value += static_cast<std::uint64_t>(n);
    if (with_gradient || with_hessian) {
        if (with_gradient) out.gradients.reserve(n);
        if (with_hessian) out.hessians.reserve(n);
        for (Eigen::Index b = 0; b < n; ++b) {
            const Vector x = points.col(b);
            const LogDensityDerivatives lq = log_density_derivatives(*mixture_, x, with_hessian);
            if (with_gradient) out.gradients.push_back(objective_gradient(x, &counts) - omega_ * lq.gradient);
            if (with_hessian) out.hessians.push_back(objective_hessian(x, &counts) - omega_ * lq.hessian);
        }
    }
    out.points = std::move(points);
    return out;
}

void require_tier(const Objective& obj, Tier needed, bool fd_fallback) {
    if (static_cast<int>(needed) > static_cast<int>(obj.tier) && !fd_fallback)
        throw CapabilityError(obj.id + " supplies only the " + tier_name(obj.tier) + " tier; " +
                              tier_name(needed) + " required");
}

double estimate_grad_pi(const EvaluatedBatch& own, const EvaluatedBatch& reference) {
    return own.values.mean() - reference.values.mean();
}

double estimate_grad_pi(const AnnealedPotential& f, const Matrix& samples_k,
                        const Matrix& samples_K) {
    EvalCounts unused;
    return estimate_grad_pi(f.evaluate(samples_k, false, false, unused),
                            f.evaluate(samples_K, false, false, unused));
}

Vector estimate_grad_mean(const Gaussian& component, const EvaluatedBatch& batch,
                          MeanEstimator variant) {
    const auto B = batch.points.cols();
    const double inv_b = 1.0 / static_cast<double>(B);
    if (variant == MeanEstimator::gradient) {
        if (batch.gradients.size() != static_cast<std::size_t>(B))
            throw std::invalid_argument("mean estimator: gradients were not evaluated");
        Vector g = Vector::Zero(component.dim());
        for (const auto& gb : batch.gradients) g += gb;
        return inv_b * g;
    }
    const Matrix delta = batch.points.colwise() - component.mean();
    return inv_b * (component.precision() * (delta * batch.values));
}

Matrix estimate_grad_precision(const Gaussian& component, const EvaluatedBatch& batch,
                               PrecisionEstimator variant) {
    const auto B = batch.points.cols();
    const auto d = static_cast<Eigen::Index>(component.dim());
    const double inv_b = 1.0 / static_cast<double>(B);
    const Matrix& S = component.precision();
    const Matrix delta = batch.points.colwise() - component.mean();
    switch (variant) {
        case PrecisionEstimator::hessian: {
            if (batch.hessians.size() != static_cast<std::size_t>(B))
                throw std::invalid_argument("precision estimator: Hessians were not evaluated");
            Matrix h = Matrix::Zero(d, d);
            for (const auto& hb : batch.hessians) h += hb;
            return symmetrize(inv_b * h);
        }
        case PrecisionEstimator::gradient: {
            if (batch.gradients.size() != static_cast<std::size_t>(B))
                throw std::invalid_argument("precision estimator: gradients were not evaluated");
            Matrix acc = Matrix::Zero(d, d);
            for (Eigen::Index b = 0; b < B; ++b) acc.noalias() += delta.col(b) * batch.gradients[b].transpose();
            return symmetrize(inv_b * (S * acc));
        }
        case PrecisionEstimator::score: {
            const Matrix sd = S * delta;
            Matrix acc = sd * batch.values.asDiagonal() * sd.transpose();
            acc -= batch.values.sum() * S;
            return symmetrize(inv_b * acc);
        }
    }
    throw std::invalid_argument("precision estimator: unknown variant");
}

Vector estimate_grad_mean(const AnnealedPotential& f, const Gaussian& component,
                          const Matrix& samples, MeanEstimator variant) {
    EvalCounts unused;
    return estimate_grad_mean(
        component, f.evaluate(samples, variant == MeanEstimator::gradient, false, unused), variant);
}

Matrix estimate_grad_precision(const AnnealedPotential& f, const Gaussian& component,
                               const Matrix& samples, PrecisionEstimator variant) {
    EvalCounts unused;
    return estimate_grad_precision(
        component,
        f.evaluate(samples, variant == PrecisionEstimator::gradient,
                   variant == PrecisionEstimator::hessian, unused),
        variant);
}

std::size_t selected_count(std::size_t B, double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("utilities: eta must lie in (0, 1]");
    return static_cast<std::size_t>(std::floor(static_cast<double>(B) * eta + 0.5));
}

std::vector<double> utilities(UtilityKind kind, std::size_t B, std::size_t B0) {
    if (B == 0 || B0 == 0 || B0 > B)
        throw std::invalid_argument("utilities: need 1 <= B0 <= B");
    std::vector<double> u(B, 0.0);
    if (kind == UtilityKind::truncation) {
        std::fill_n(u.begin(), B0, static_cast<double>(B) / static_cast<double>(B0));
        return u;
    }
    const double top = std::log(static_cast<double>(B0) + 1.0);
    double norm = 0.0;
    for (std::size_t c = 1; c <= B0; ++c) norm += top - std::log(static_cast<double>(c));
    for (std::size_t b = 1; b <= B0; ++b)
        u[b - 1] = static_cast<double>(B) * (top - std::log(static_cast<double>(b))) / norm;
    return u;
}

std::vector<std::size_t> rank_descending(const Vector& values) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(values.size()));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const double va = values(static_cast<Eigen::Index>(a));
        const double vb = values(static_cast<Eigen::Index>(b));
        // NaN ranks last.
        if (std::isnan(vb)) return !std::isnan(va);
        return va > vb;
    });
    return idx;
}

ShapedDirections shaped_directions(const Gaussian& component, const Matrix& points,
                                   const Vector& values, const std::vector<double>& u) {
    const auto B = points.cols();
    if (static_cast<std::size_t>(B) != u.size() || values.size() != B)
        throw std::invalid_argument("shaped directions: batch and utilities differ in length");
    const auto order = rank_descending(values);
    const Matrix& S = component.precision();
    const auto d = static_cast<Eigen::Index>(component.dim());
    Vector wdelta = Vector::Zero(d);
    Matrix outer = Matrix::Zero(d, d);
    double usum = 0.0;
    for (Eigen::Index r = 0; r < B; ++r) {
        const double ub = u[static_cast<std::size_t>(r)];
        if (ub == 0.0) continue;
        const Vector delta = points.col(static_cast<Eigen::Index>(order[static_cast<std::size_t>(r)])) - component.mean();
        wdelta += ub * delta;
        outer.noalias() += ub * delta * delta.transpose();
        usum += ub;
    }
    const double inv_b = 1.0 / static_cast<double>(B);
    ShapedDirections out;
    out.mean = inv_b * (S * wdelta);
    out.precision = symmetrize(inv_b * (S * outer * S - usum * S));
    return out;
}

}  // namespace nva
