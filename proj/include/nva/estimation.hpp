#pragma once

#include "nva/linalg.hpp"
#include "nva/mixture.hpp"
#include "nva/objectives.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace nva {

// Variant indices follow the estimator numbering: 0 score-function, 1 gradient, 2 Hessian.
enum class MeanEstimator { score = 0, gradient = 1 };
enum class PrecisionEstimator { score = 0, gradient = 1, hessian = 2 };

struct EvalCounts {
    std::uint64_t value = 0;
    std::uint64_t gradient = 0;
    std::uint64_t hessian = 0;

    EvalCounts& operator+=(const EvalCounts& o) {
        value += o.value;
        gradient += o.gradient;
        hessian += o.hessian;
        return *this;
    }
    bool operator==(const EvalCounts&) const = default;
};

// Thrown when an estimator needs a derivative the objective lacks and fallback is off.
class CapabilityError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct EvaluatedBatch {
    Matrix points;  // d x B
    Vector values;
    std::vector<Vector> gradients;
    std::vector<Matrix> hessians;
};

// f(x) = l(x) - omega log q(x) with the mixture held fixed.
class AnnealedPotential {
public:
    AnnealedPotential(const Objective& objective, const MixtureState& mixture, double omega,
                      bool fd_fallback = false);

    double omega() const { return omega_; }
    const Objective& objective() const { return *objective_; }
    const MixtureState& mixture() const { return *mixture_; }

    double value(const Vector& x) const;
    Vector gradient(const Vector& x) const;
    Matrix hessian(const Vector& x) const;

    // Evaluates the columns of points once; counts objective calls by derivative order.
    EvaluatedBatch evaluate(Matrix points, bool with_gradient, bool with_hessian,
                            EvalCounts& counts) const;

private:
    Vector objective_gradient(const Vector& x, EvalCounts* counts) const;
    Matrix objective_hessian(const Vector& x, EvalCounts* counts) const;

    const Objective* objective_;
    const MixtureState* mixture_;
    double omega_;
    bool fd_fallback_;
};

void require_tier(const Objective& obj, Tier needed, bool fd_fallback);

double estimate_grad_pi(const EvaluatedBatch& own, const EvaluatedBatch& reference);
double estimate_grad_pi(const AnnealedPotential& f, const Matrix& samples_k,
                        const Matrix& samples_K);
Vector estimate_grad_mean(const Gaussian& component, const EvaluatedBatch& batch,
                          MeanEstimator variant);
Matrix estimate_grad_precision(const Gaussian& component, const EvaluatedBatch& batch,
                               PrecisionEstimator variant);
Vector estimate_grad_mean(const AnnealedPotential& f, const Gaussian& component,
                          const Matrix& samples, MeanEstimator variant);
Matrix estimate_grad_precision(const AnnealedPotential& f, const Gaussian& component,
                               const Matrix& samples, PrecisionEstimator variant);

enum class UtilityKind { truncation, cmaes };

// floor(B eta + 1/2)
std::size_t selected_count(std::size_t B, double eta);
std::vector<double> utilities(UtilityKind kind, std::size_t B, std::size_t B0);
// Indices ordering values from largest to smallest; ties keep index order.
std::vector<std::size_t> rank_descending(const Vector& values);

struct ShapedDirections {
    Vector mean;
    Matrix precision;
};

ShapedDirections shaped_directions(const Gaussian& component, const Matrix& points,
                                   const Vector& values, const std::vector<double>& u);

}  // namespace nva
