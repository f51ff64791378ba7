#include "nva/objectives.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nva {

const char* tier_name(Tier tier) {
    switch (tier) {
        case Tier::value: return "value";
        case Tier::gradient: return "gradient";
        case Tier::hessian: return "hessian";
    }
    return "value";
}

Vector Objective::values(const Matrix& points) const {
    if (batch_value) return batch_value(points);
    Vector out(points.cols());
    for (Eigen::Index b = 0; b < points.cols(); ++b) out(b) = value(points.col(b));
    return out;
}

std::size_t Objective::global_count() const {
    std::size_t n = 0;
    for (const auto& m : modes) n += m.global ? 1 : 0;
    return n;
}

double Objective::global_value() const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& m : modes)
        if (m.global) best = std::max(best, m.value);
    return best;
}

Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                                  double h) {
    Vector g(x.size());
    Vector y = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double step = h * std::max(1.0, std::abs(x(i)));
        y(i) = x(i) + step;
        const double fp = f(y);
        y(i) = x(i) - step;
        const double fm = f(y);
        y(i) = x(i);
        g(i) = (fp - fm) / (2.0 * step);
    }
    return g;
}

Matrix finite_difference_hessian(const std::function<Vector(const Vector&)>& g, const Vector& x,
                                 double h) {
    const auto d = x.size();
    Matrix H(d, d);
    Vector y = x;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double step = h * std::max(1.0, std::abs(x(i)));
        y(i) = x(i) + step;
        const Vector gp = g(y);
        y(i) = x(i) - step;
        const Vector gm = g(y);
        y(i) = x(i);
        H.col(i) = (gp - gm) / (2.0 * step);
    }
    return symmetrize(H);
}

Matrix finite_difference_hessian_from_values(const std::function<double(const Vector&)>& f,
                                             const Vector& x, double h) {
    const auto d = x.size();
    Matrix H(d, d);
    const double f0 = f(x);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i; j < d; ++j) {
            Vector y = x;
            const double hi = h * std::max(1.0, std::abs(x(i)));
            const double hj = h * std::max(1.0, std::abs(x(j)));
            if (i == j) {
                y(i) = x(i) + hi;
                const double fp = f(y);
                y(i) = x(i) - hi;
                const double fm = f(y);
                H(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
            } else {
                double acc = 0.0;
                for (int si : {1, -1})
                    for (int sj : {1, -1}) {
                        y(i) = x(i) + si * hi;
                        y(j) = x(j) + sj * hj;
                        acc += si * sj * f(y);
                    }
                H(i, j) = H(j, i) = acc / (4.0 * hi * hj);
            }
        }
    }
    return H;
}

Vector gradient_at(const Objective& obj, const Vector& x) {
    if (obj.gradient) return obj.gradient(x);
    return finite_difference_gradient(obj.value, x);
}

Matrix hessian_at(const Objective& obj, const Vector& x) {
    if (obj.hessian) return obj.hessian(x);
    if (obj.gradient) return finite_difference_hessian(obj.gradient, x);
    return finite_difference_hessian_from_values(obj.value, x);
}

Vector refine_mode(const Objective& obj, Vector x, int max_iter) {
    double fx = obj.value(x);
    for (int it = 0; it < max_iter; ++it) {
        const Vector g = gradient_at(obj, x);
        if (!g.allFinite() || g.norm() < 1e-13) break;
        const Matrix H = hessian_at(obj, x);
        Vector p;
        Eigen::LLT<Matrix> llt(-H);
        if (llt.info() == Eigen::Success)
            p = llt.solve(g);
        else
            p = g / std::max(1.0, H.cwiseAbs().maxCoeff());
        double step = 1.0;
        bool moved = false;
        while (step > 1e-12) {
            const Vector y = x + step * p;
            const double fy = obj.value(y);
            if (fy >= fx) {
                moved = (y - x).norm() > 0.0;
                x = y;
                fx = fy;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    return x;
}

Objective make_gmm_objective(std::string id, const MixtureState& target,
                             const std::vector<Vector>& mode_seeds, std::optional<Box> domain,
                             double global_tol) {
    Objective obj;
    obj.id = std::move(id);
    obj.dim = target.dim();
    obj.tier = Tier::hessian;
    obj.value = [target](const Vector& x) { return log_density(target, x); };
    obj.batch_value = [target](const Matrix& pts) { return log_density(target, pts); };
    obj.gradient = [target](const Vector& x) { return log_density_gradient(target, x); };
    obj.hessian = [target](const Vector& x) { return log_density_hessian(target, x); };
    obj.domain = std::move(domain);
    for (const auto& seed : mode_seeds) {
        const Vector m = refine_mode(obj, seed);
        bool dup = false;
        for (const auto& known : obj.modes) dup = dup || (known.location - m).norm() < 1e-6;
        if (!dup) obj.modes.push_back({m, obj.value(m), false});
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& m : obj.modes) best = std::max(best, m.value);
    for (auto& m : obj.modes) m.global = m.value >= best - global_tol;
    return obj;
}

namespace {

Gaussian diag_gaussian(double mx, double my, double vx, double vy) {
    Matrix s = Matrix::Zero(2, 2);
    s(0, 0) = 1.0 / vx;
    s(1, 1) = 1.0 / vy;
    return Gaussian(Eigen::Vector2d(mx, my), s);
}

Box square_box(std::size_t d, double lo, double hi) {
    return Box{Vector::Constant(d, lo), Vector::Constant(d, hi)};
}

}  // namespace

MixtureState symmetric_gmm_target() {
    std::vector<Gaussian> comps;
    for (int k = 1; k <= 3; ++k) {
        const double a = std::numbers::pi / 2.0 + 2.0 * k * std::numbers::pi / 3.0;
        comps.push_back(diag_gaussian(std::sin(a), std::cos(a), 0.54, 0.54));
    }
    return MixtureState::from_weights(Vector::Constant(3, 1.0 / 3.0), std::move(comps));
}

MixtureState asymmetric_gmm_target() {
    const double c1 = 1.0 / std::sqrt(0.03 * 0.3);
    const double c3 = 1.0 / std::sqrt(0.005 * 0.9);
    const double pi1 = 0.9 * c3 / (c1 + c3);
    std::vector<Gaussian> comps{diag_gaussian(-1.0, 0.0, 0.03, 0.3),
                                diag_gaussian(0.0, 0.0, 0.3, 0.6),
                                diag_gaussian(1.0, 0.0, 0.005, 0.9)};
    return MixtureState::from_weights(Eigen::Vector3d(pi1, 0.1, 0.9 - pi1), std::move(comps));
}

Objective make_symmetric_gmm() {
    const MixtureState q = symmetric_gmm_target();
    std::vector<Vector> seeds;
    for (const auto& c : q.components()) seeds.push_back(c.mean());
    seeds.push_back(Vector::Zero(2));
    return make_gmm_objective("sym-gmm", q, seeds, square_box(2, -2.0, 2.0));
}

Objective make_asymmetric_gmm() {
    const MixtureState q = asymmetric_gmm_target();
    std::vector<Vector> seeds;
    for (const auto& c : q.components()) seeds.push_back(c.mean());
    return make_gmm_objective("asym-gmm", q, seeds, square_box(2, -2.0, 2.0));
}

Objective make_styblinski_tang(std::size_t d) {
    if (d == 0) throw std::invalid_argument("styblinski-tang: dimension must be positive");
    Objective obj;
    obj.id = "styblinski-tang-" + std::to_string(d);
    obj.dim = d;
    obj.tier = Tier::hessian;
    obj.value = [](const Vector& x) {
        const Eigen::ArrayXd a = x.array();
        return -0.5 * (a.pow(4) - 16.0 * a.square() + 5.0 * a).sum();
    };
    obj.gradient = [](const Vector& x) -> Vector {
        const Eigen::ArrayXd a = x.array();
        return -0.5 * (4.0 * a.cube() - 32.0 * a + 5.0);
    };
    obj.hessian = [](const Vector& x) -> Matrix {
        const Eigen::ArrayXd a = x.array();
        return Vector(-0.5 * (12.0 * a.square() - 32.0)).asDiagonal();
    };
    obj.domain = square_box(d, -4.0, 4.0);
    // One-dimensional stationary points: roots of 4x^3 - 32x + 5.
    auto root = [](double x) {
        for (int i = 0; i < 100; ++i) x -= (4 * x * x * x - 32 * x + 5) / (12 * x * x - 32);
        return x;
    };
    const double lo = root(-2.9);
    const double hi = root(2.75);
    auto h1 = [](double x) { return -0.5 * (x * x * x * x - 16 * x * x + 5 * x); };
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
        Vector loc(d);
        double v = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            loc(i) = (mask >> i) & 1U ? hi : lo;
            v += h1(loc(i));
        }
        obj.modes.push_back({loc, v, mask == 0});
    }
    return obj;
}

double psi(double x) {
    if (x < -2.0) return -std::pow(x + 3.0, 4) - 1.0;
    if (x > 2.0) return -(x - 3.0) * (x - 3.0) - 1.0;
    return -x * x * x / 8.0 + 3.0 * x * x / 4.0 + x / 2.0 - 5.0;
}

double psi_prime(double x) {
    if (x < -2.0) return -4.0 * std::pow(x + 3.0, 3);
    if (x > 2.0) return -2.0 * (x - 3.0);
    return -3.0 * x * x / 8.0 + 3.0 * x / 2.0 + 0.5;
}

double psi_second(double x) {
    if (x < -2.0) return -12.0 * (x + 3.0) * (x + 3.0);
    if (x > 2.0) return -2.0;
    return -3.0 * x / 4.0 + 1.5;
}

Objective make_degenerate_psi() {
    Objective obj;
    obj.id = "degenerate-psi";
    obj.dim = 2;
    obj.tier = Tier::gradient;
    obj.value = [](const Vector& x) { return psi(x(0)) * (x(1) * x(1) + 1.0); };
    obj.gradient = [](const Vector& x) -> Vector {
        return Eigen::Vector2d(psi_prime(x(0)) * (x(1) * x(1) + 1.0), 2.0 * x(1) * psi(x(0)));
    };
    obj.domain = square_box(2, -4.0, 4.0);
    obj.modes.push_back({Eigen::Vector2d(-3.0, 0.0), -1.0, true});
    obj.modes.push_back({Eigen::Vector2d(3.0, 0.0), -1.0, true});
    return obj;
}

std::vector<std::string> problem_ids() {
    return {"sym-gmm", "asym-gmm", "styblinski-tang-4", "degenerate-psi", "cec-f1", "cec-f2",
            "cec-f3",  "cec-f4",   "cec-f5",            "cec-f6",         "gmm-file:<path>"};
}

Objective make_problem(const std::string& id) {
    if (id == "sym-gmm") return make_symmetric_gmm();
    if (id == "asym-gmm") return make_asymmetric_gmm();
    if (id == "degenerate-psi") return make_degenerate_psi();
    const std::string st = "styblinski-tang-";
    if (id.rfind(st, 0) == 0) {
        const std::string rest = id.substr(st.size());
        if (rest.empty() || rest.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("unknown problem: " + id);
        return make_styblinski_tang(std::stoul(rest));
    }
    if (id.size() == 6 && id.rfind("cec-f", 0) == 0 && id[5] >= '1' && id[5] <= '6')
        return make_cec(id[5] - '0');
    const std::string file = "gmm-file:";
    if (id.rfind(file, 0) == 0) {
        const std::string path = id.substr(file.size());
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open mixture file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument("malformed mixture file " + path + ": " + e.what());
        }
        const MixtureState q = mixture_from_json(j);
        std::vector<Vector> seeds;
        Vector lo = q.component(0).mean(), hi = lo;
        for (const auto& c : q.components()) {
            seeds.push_back(c.mean());
            const Vector sd = c.covariance().diagonal().cwiseSqrt();
            lo = lo.cwiseMin(c.mean() - 2.0 * sd);
            hi = hi.cwiseMax(c.mean() + 2.0 * sd);
        }
        return make_gmm_objective(id, q, seeds, Box{lo, hi});
    }
    throw std::invalid_argument("unknown problem: " + id);
}

}  // namespace nva
