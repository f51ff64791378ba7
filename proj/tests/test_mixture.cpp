#include <doctest.h>

#include "nva/mixture.hpp"
#include "nva/objectives.hpp"
#include "nva/rng.hpp"

#include <cmath>
#include <numbers>

using namespace nva;

namespace {

Matrix spd(double a, double b, double c) { return (Matrix(2, 2) << a, b, b, c).finished(); }

MixtureState random_mixture(Engine& eng, std::size_t K, std::size_t d) {
    std::uniform_real_distribution<double> u(0.2, 1.0);
    std::vector<Gaussian> comps;
    Vector w(K);
    for (std::size_t k = 0; k < K; ++k) {
        const Matrix A = standard_normal(eng, d, d);
        const Matrix S = A * A.transpose() + 0.5 * Matrix::Identity(d, d);
        comps.emplace_back(Vector(standard_normal(eng, d, 1)), S);
        w(k) = u(eng);
    }
    return MixtureState::from_weights(w / w.sum(), std::move(comps));
}

}  // namespace

TEST_CASE("standard normal log-density and entropy") {
    const Gaussian g(Vector::Zero(2), Matrix::Identity(2, 2));
    CHECK(g.log_density(Vector::Zero(2)) == doctest::Approx(-std::log(2.0 * std::numbers::pi)));
    CHECK(gaussian_entropy(g) == doctest::Approx(1.0 + std::log(2.0 * std::numbers::pi)));
    const Gaussian g2(Vector::Zero(2), 4.0 * Matrix::Identity(2, 2));
    CHECK(gaussian_entropy(g2) == doctest::Approx(1.0 + std::log(2.0 * std::numbers::pi) - std::log(4.0)));
}

TEST_CASE("gaussian rejects invalid precisions") {
    CHECK_THROWS_AS(Gaussian(Vector::Zero(2), spd(1, 2, 1)), std::invalid_argument);
    CHECK_THROWS_AS(Gaussian(Vector::Zero(2), (Matrix(2, 2) << 1, 0.5, 0, 1).finished()), std::invalid_argument);
    CHECK_THROWS_AS(Gaussian(Vector::Zero(3), Matrix::Identity(2, 2)), std::invalid_argument);
}

TEST_CASE("weights follow the logits and sum to one") {
    const Vector w = weights_from_logits(Eigen::Vector3d(std::log(2.0), std::log(3.0), 0.0));
    CHECK(w(0) == doctest::Approx(2.0 / 6.0));
    CHECK(w(1) == doctest::Approx(3.0 / 6.0));
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-15));
    const Vector big = weights_from_logits(Eigen::Vector2d(800.0, 0.0));
    CHECK(big.allFinite());
    CHECK(big(0) == doctest::Approx(1.0));
}

TEST_CASE("mixture construction validates weights") {
    std::vector<Gaussian> comps{Gaussian(Vector::Zero(1), Matrix::Identity(1, 1)),
                                Gaussian(Vector::Ones(1), Matrix::Identity(1, 1))};
    CHECK_THROWS_AS(MixtureState::from_weights(Eigen::Vector2d(0.5, 0.6), comps), std::invalid_argument);
    CHECK_THROWS_AS(MixtureState::from_weights(Eigen::Vector2d(1.0, 0.0), comps), std::invalid_argument);
    const MixtureState q = MixtureState::from_weights(Eigen::Vector2d(0.25, 0.75), comps);
    CHECK(q.logits()(1) == 0.0);
    CHECK(q.logits()(0) == doctest::Approx(std::log(1.0 / 3.0)));
}

TEST_CASE("single-component derivatives match the Gaussian closed form") {
    const Matrix S = spd(2.0, 0.5, 1.0);
    const Vector mu = Eigen::Vector2d(0.3, -1.0);
    const MixtureState q = MixtureState::from_weights(Vector::Ones(1), {Gaussian(mu, S)});
    const Vector x = Eigen::Vector2d(1.0, 2.0);
    const LogDensityDerivatives d = log_density_derivatives(q, x, true);
    CHECK((d.gradient - S * (mu - x)).norm() < 1e-12);
    CHECK((d.hessian + S).norm() < 1e-12);
    const double expected = -std::log(2.0 * std::numbers::pi) + 0.5 * std::log(S.determinant()) -
                            0.5 * (x - mu).dot(S * (x - mu));
    CHECK(d.value == doctest::Approx(expected));
}

TEST_CASE("mixture gradient and Hessian agree with finite differences") {
    Engine eng = substream(5, 0, 0, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const MixtureState q = random_mixture(eng, 3, 3);
        const Vector x = standard_normal(eng, 3, 1);
        auto f = [&q](const Vector& y) { return log_density(q, y); };
        auto g = [&q](const Vector& y) { return log_density_gradient(q, y); };
        const Vector grad = log_density_gradient(q, x);
        const Matrix hess = log_density_hessian(q, x);
        CHECK((grad - finite_difference_gradient(f, x, 1e-6)).norm() < 1e-6 * (1.0 + grad.norm()));
        CHECK((hess - finite_difference_hessian(g, x, 1e-6)).norm() < 1e-5 * (1.0 + hess.norm()));
        CHECK((hess - hess.transpose()).norm() == 0.0);
    }
}

TEST_CASE("batched and pointwise mixture log-densities agree") {
    Engine eng = substream(6, 0, 0, 0);
    const MixtureState q = random_mixture(eng, 4, 2);
    const Matrix pts = 3.0 * standard_normal(eng, 2, 25);
    const Vector batch = log_density(q, pts);
    for (Eigen::Index b = 0; b < pts.cols(); ++b) {
        double s = 0.0;
        for (std::size_t k = 0; k < q.size(); ++k)
            s += q.weights()(k) * std::exp(q.component(k).log_density(pts.col(b)));
        CHECK(batch(b) == doctest::Approx(std::log(s)).epsilon(1e-12));
    }
}

TEST_CASE("responsibilities are a distribution") {
    Engine eng = substream(8, 0, 0, 0);
    const MixtureState q = random_mixture(eng, 5, 2);
    const Vector r = responsibilities(q, Eigen::Vector2d(0.1, 0.2));
    CHECK(r.sum() == doctest::Approx(1.0));
    CHECK((r.array() >= 0.0).all());
}

TEST_CASE("approximate entropy matches Monte Carlo for separated components") {
    const MixtureState q = MixtureState::from_weights(
        Eigen::Vector2d(0.3, 0.7),
        {Gaussian(Eigen::Vector2d(-20, 0), Matrix::Identity(2, 2)), Gaussian(Eigen::Vector2d(20, 0), spd(4, 0, 2))});
    Engine eng = substream(9, 0, 0, 0);
    const Matrix xs = sample_mixture(q, eng, 200000);
    const double mc = -log_density(q, xs).mean();
    CHECK(approx_mixture_entropy(q) == doctest::Approx(mc).epsilon(5e-3));
}

TEST_CASE("sampled moments match the component") {
    const Matrix S = spd(2.0, 0.5, 1.0);
    const Gaussian g(Eigen::Vector2d(1.0, -2.0), S);
    Engine eng = substream(10, 0, 0, 0);
    const Matrix xs = g.sample(eng, 200000);
    const Vector mean = xs.rowwise().mean();
    const Matrix centered = xs.colwise() - mean;
    const Matrix cov = centered * centered.transpose() / static_cast<double>(xs.cols() - 1);
    CHECK((mean - g.mean()).norm() < 0.01);
    CHECK((cov - S.inverse()).norm() < 0.01);
}

TEST_CASE("single draw is the mean plus the stream's first standard normal") {
    const Gaussian g(Eigen::Vector2d(5.0, 5.0), Matrix::Identity(2, 2));
    Engine a = substream(42, 0, 0, 0);
    const Matrix x = g.sample(a, 1);
    Engine b = substream(42, 0, 0, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double z0 = normal(b);
    const double z1 = normal(b);
    CHECK(x(0, 0) == 5.0 + z0);
    CHECK(x(1, 0) == 5.0 + z1);
}

TEST_CASE("limit weights for two Gaussian-shaped modes") {
    const std::vector<Matrix> hs{-Matrix(Eigen::Vector2d(1.0 / 0.03, 1.0 / 0.3).asDiagonal()),
                                 -Matrix(Eigen::Vector2d(1.0 / 0.005, 1.0 / 0.9).asDiagonal())};
    const Vector c = limit_weights(hs);
    const double a = std::sqrt(0.03 * 0.3), b = std::sqrt(0.005 * 0.9);
    CHECK(c(0) == doctest::Approx(a / (a + b)));
    CHECK(c(1) == doctest::Approx(b / (a + b)));
    CHECK_THROWS_AS(limit_weights({Matrix::Identity(2, 2)}), std::invalid_argument);
}

TEST_CASE("mixture JSON round trip") {
    Engine eng = substream(12, 0, 0, 0);
    const MixtureState q = random_mixture(eng, 3, 2);
    const MixtureState r = mixture_from_json(nlohmann::json::parse(mixture_to_json(q).dump()));
    CHECK((r.weights() - q.weights()).norm() < 1e-15);
    for (std::size_t k = 0; k < q.size(); ++k) {
        CHECK(r.component(k).mean() == q.component(k).mean());
        CHECK(r.component(k).precision() == q.component(k).precision());
    }
    nlohmann::json bad = mixture_to_json(q);
    bad["precisions"][0] = {{1.0, 2.0}, {2.0, 1.0}};
    CHECK_THROWS_AS(mixture_from_json(bad), std::invalid_argument);
    bad = mixture_to_json(q);
    bad["weights"][0] = 0.9;
    CHECK_THROWS_AS(mixture_from_json(bad), std::invalid_argument);
}
