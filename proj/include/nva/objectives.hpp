#pragma once

#include "nva/linalg.hpp"
#include "nva/mixture.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nva {

// Highest derivative order an objective supplies natively.
enum class Tier { value = 0, gradient = 1, hessian = 2 };

const char* tier_name(Tier tier);

struct Box {
    Vector lo;
    Vector hi;
};

struct ModeSpec {
    Vector location;
    double value = 0.0;
    bool global = false;
};

// Log-target to be maximized.
struct Objective {
    std::string id;
    std::size_t dim = 0;
    Tier tier = Tier::value;
    std::function<double(const Vector&)> value;
    std::function<Vector(const Matrix&)> batch_value;  // optional fast path over columns
    std::function<Vector(const Vector&)> gradient;
    std::function<Matrix(const Vector&)> hessian;
    std::vector<ModeSpec> modes;
    std::optional<Box> domain;  // default initialization box

    Vector values(const Matrix& points) const;
    std::size_t global_count() const;
    double global_value() const;
};

Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                                  double h = 1e-5);
// Central differences of a gradient, symmetrized.
Matrix finite_difference_hessian(const std::function<Vector(const Vector&)>& g, const Vector& x,
                                 double h = 1e-5);
Matrix finite_difference_hessian_from_values(const std::function<double(const Vector&)>& f,
                                             const Vector& x, double h = 1e-4);

// Gradient and Hessian from the native tier, finite differences otherwise.
Vector gradient_at(const Objective& obj, const Vector& x);
Matrix hessian_at(const Objective& obj, const Vector& x);

// Damped Newton ascent to the nearest local maximum.
Vector refine_mode(const Objective& obj, Vector x, int max_iter = 500);

// Log-density of a Gaussian mixture. Modes are found by ascent from the seeds and marked
// global when within global_tol of the best value.
Objective make_gmm_objective(std::string id, const MixtureState& target,
                             const std::vector<Vector>& mode_seeds, std::optional<Box> domain,
                             double global_tol = 1e-4);
MixtureState symmetric_gmm_target();
MixtureState asymmetric_gmm_target();
Objective make_symmetric_gmm();
Objective make_asymmetric_gmm();
Objective make_styblinski_tang(std::size_t d);
double psi(double x);
double psi_prime(double x);
double psi_second(double x);
Objective make_degenerate_psi();

// CEC2013 niching functions F1..F6 on their pyramidal extension to R^d.
Objective make_cec(int index);
double cec_raw_value(int index, const Vector& x);
Box cec_domain(int index);
double cec_range(int index);
// f(a + r) - |q|_1 A with xi - a = q (b - a) + r componentwise, q integer.
double pyramidal_extension(const std::function<double(const Vector&)>& f, const Box& box,
                           double range, const Vector& x);

std::vector<std::string> problem_ids();
// Registry lookup; also accepts gmm-file:<path> and styblinski-tang-<d>.
Objective make_problem(const std::string& id);

}  // namespace nva
