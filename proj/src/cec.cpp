#include "nva/objectives.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nva {

namespace {

constexpr double kPi = std::numbers::pi;

double five_uneven_peak_trap(double x) {
    if (x < 2.5) return 80.0 * (2.5 - x);
    if (x < 5.0) return 64.0 * (x - 2.5);
    if (x < 7.5) return 64.0 * (7.5 - x);
    if (x < 12.5) return 28.0 * (x - 7.5);
    if (x < 17.5) return 28.0 * (17.5 - x);
    if (x < 22.5) return 32.0 * (x - 17.5);
    if (x < 27.5) return 32.0 * (27.5 - x);
    return 80.0 * (x - 27.5);
}

double equal_maxima(double x) { return std::pow(std::sin(5.0 * kPi * x), 6); }

double uneven_decreasing_maxima(double x) {
    const double z = (x - 0.08) / 0.854;
    return std::exp(-2.0 * std::log(2.0) * z * z) *
           std::pow(std::sin(5.0 * kPi * (std::pow(x, 0.75) - 0.05)), 6);
}

double himmelblau(double x, double y) {
    return 200.0 - (x * x + y - 11.0) * (x * x + y - 11.0) - (x + y * y - 7.0) * (x + y * y - 7.0);
}

double six_hump_camel_back(double x, double y) {
    const double x2 = x * x;
    const double y2 = y * y;
    return -((4.0 - 2.1 * x2 + x2 * x2 / 3.0) * x2 + x * y + (4.0 * y2 - 4.0) * y2);
}

double shubert_factor(double x) {
    double s = 0.0;
    for (int j = 1; j <= 5; ++j) s += j * std::cos((j + 1) * x + j);
    return s;
}

double shubert(const Vector& x) {
    double r = 1.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) r *= shubert_factor(x(i));
    return -r;
}

// Newton polish of a one-dimensional stationary point of the Shubert factor.
double shubert_extremum(double x) {
    for (int it = 0; it < 60; ++it) {
        double d1 = 0.0, d2 = 0.0;
        for (int j = 1; j <= 5; ++j) {
            d1 -= j * (j + 1) * std::sin((j + 1) * x + j);
            d2 -= j * (j + 1) * (j + 1) * std::cos((j + 1) * x + j);
        }
        x -= d1 / d2;
    }
    return x;
}

}  // namespace

double cec_raw_value(int index, const Vector& x) {
    switch (index) {
        case 1: return five_uneven_peak_trap(x(0));
        case 2: return equal_maxima(x(0));
        case 3: return uneven_decreasing_maxima(x(0));
        case 4: return himmelblau(x(0), x(1));
        case 5: return six_hump_camel_back(x(0), x(1));
        case 6: return shubert(x);
        default: throw std::invalid_argument("cec: index must be 1..6");
    }
}

Box cec_domain(int index) {
    switch (index) {
        case 1: return {Vector::Constant(1, 0.0), Vector::Constant(1, 30.0)};
        case 2:
        case 3: return {Vector::Constant(1, 0.0), Vector::Constant(1, 1.0)};
        case 4: return {Vector::Constant(2, -6.0), Vector::Constant(2, 6.0)};
        case 5: return {Eigen::Vector2d(-1.9, -1.1), Eigen::Vector2d(1.9, 1.1)};
        case 6: return {Vector::Constant(2, -10.0), Vector::Constant(2, 10.0)};
        default: throw std::invalid_argument("cec: index must be 1..6");
    }
}

// max - min of the raw function over its domain. F1, F2 and F4 are exact; F3 has min 0;
// F5 attains its min at the corners; F6 min and max are products of factor extremes.
double cec_range(int index) {
    switch (index) {
        case 1: return 200.0;
        case 2: return 1.0;
        case 3: return 1.0;
        case 4: return 2186.0;
        case 5: return 6.892578786823209;
        case 6: return 397.21320284657764;
        default: throw std::invalid_argument("cec: index must be 1..6");
    }
}

double pyramidal_extension(const std::function<double(const Vector&)>& f, const Box& box,
                           double range, const Vector& x) {
    Vector y(x.size());
    double level = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double w = box.hi(i) - box.lo(i);
        const double q = std::floor((x(i) - box.lo(i)) / w);
        double r = (x(i) - box.lo(i)) - q * w;
        if (r < 0.0) r = 0.0;
        if (r >= w) r = std::nextafter(w, 0.0);
        y(i) = box.lo(i) + r;
        level += std::abs(q);
    }
    return f(y) - level * range;
}

Objective make_cec(int index) {
    const Box box = cec_domain(index);
    const double range = cec_range(index);
    Objective obj;
    obj.id = "cec-f" + std::to_string(index);
    obj.dim = static_cast<std::size_t>(box.lo.size());
    obj.tier = Tier::value;
    auto raw = [index](const Vector& x) { return cec_raw_value(index, x); };
    obj.value = [raw, box, range](const Vector& x) { return pyramidal_extension(raw, box, range, x); };
    obj.domain = box;

    auto add_refined = [&obj](const Vector& seed, bool global) {
        const Vector m = refine_mode(obj, seed);
        obj.modes.push_back({m, obj.value(m), global});
    };
    switch (index) {
        case 1:
            obj.modes.push_back({Vector::Constant(1, 0.0), 200.0, true});
            obj.modes.push_back({Vector::Constant(1, 30.0), 200.0, true});
            obj.modes.push_back({Vector::Constant(1, 5.0), 160.0, false});
            obj.modes.push_back({Vector::Constant(1, 12.5), 140.0, false});
            obj.modes.push_back({Vector::Constant(1, 22.5), 160.0, false});
            break;
        case 2:
            for (double x : {0.1, 0.3, 0.5, 0.7, 0.9}) obj.modes.push_back({Vector::Constant(1, x), 1.0, true});
            break;
        case 3: add_refined(Vector::Constant(1, 0.08), true); break;
        case 4:
            add_refined(Eigen::Vector2d(3.0, 2.0), true);
            add_refined(Eigen::Vector2d(-2.805118, 3.131312), true);
            add_refined(Eigen::Vector2d(-3.779310, -3.283186), true);
            add_refined(Eigen::Vector2d(3.584428, -1.848126), true);
            break;
        case 5:
            add_refined(Eigen::Vector2d(0.0898, -0.7126), true);
            add_refined(Eigen::Vector2d(-0.0898, 0.7126), true);
            break;
        case 6: {
            const double lows[] = {-7.7083, -1.4251, 4.8581};
            const double highs[] = {-7.0835, -0.8003, 5.4829};
            for (double a : lows)
                for (double b : highs) {
                    const double xa = shubert_extremum(a);
                    const double xb = shubert_extremum(b);
                    for (const Eigen::Vector2d& p : {Eigen::Vector2d(xa, xb), Eigen::Vector2d(xb, xa)})
                        obj.modes.push_back({p, obj.value(p), true});
                }
            break;
        }
        default: break;
    }
    return obj;
}

}  // namespace nva
