#include <doctest.h>

#include "nva/optimizers.hpp"
#include "nva/rng.hpp"

#include <cmath>

using namespace nva;

namespace {

Objective quadratic(const Matrix& A, const Vector& c, Tier tier = Tier::hessian) {
    Objective obj;
    obj.id = "quadratic";
    obj.dim = static_cast<std::size_t>(c.size());
    obj.tier = tier;
    obj.value = [A, c](const Vector& x) { return -0.5 * (x - c).dot(A * (x - c)); };
    if (tier >= Tier::gradient) obj.gradient = [A, c](const Vector& x) -> Vector { return -A * (x - c); };
    if (tier >= Tier::hessian) obj.hessian = [A](const Vector&) -> Matrix { return -A; };
    obj.modes.push_back({c, 0.0, true});
    obj.domain = Box{Vector::Constant(c.size(), -2.0), Vector::Constant(c.size(), 2.0)};
    return obj;
}

const Matrix kA = (Matrix(2, 2) << 2.0, 0.3, 0.3, 1.0).finished();
const Vector kC = Eigen::Vector2d(0.5, -0.5);

Matrix random_spd(Engine& eng, std::size_t d) {
    const Matrix M = standard_normal(eng, d, d);
    return M * M.transpose() + 0.1 * Matrix::Identity(d, d);
}

Matrix random_symmetric(Engine& eng, std::size_t d) {
    const Matrix M = standard_normal(eng, d, d);
    return 0.5 * (M + M.transpose());
}

RunConfig small_config(Algorithm a) {
    RunConfig cfg;
    cfg.algorithm = a;
    cfg.K = 3;
    cfg.B = 4;
    cfg.T = 10;
    cfg.schedule = {1.0, 1.0, 0.1, 0.8};
    return cfg;
}

double min_eig(const Matrix& S) {
    return Eigen::SelfAdjointEigenSolver<Matrix>(S, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("schedule values") {
    const Schedule s{2.0, 1.0, 0.1, 0.8};
    CHECK(s.omega(1) == 2.0);
    CHECK(s.omega(4) == doctest::Approx(0.5));
    CHECK(s.rho(1) == doctest::Approx(0.1));
    CHECK(s.rho(4) == doctest::Approx(0.1 * std::pow(4.0, 0.8)));
    for (std::size_t t = 1; t < 200; ++t) {
        CHECK(s.omega(t + 1) < s.omega(t));
        CHECK(s.rho(t + 1) >= s.rho(t));
    }
    Schedule capped = s;
    capped.rho_max = 0.15;
    CHECK(capped.rho(1) == doctest::Approx(0.1));
    CHECK(capped.rho(1000) == 0.15);
}

TEST_CASE("guarded step halves until positive definite") {
    const Matrix S = Matrix::Identity(2, 2);
    const Matrix G = Matrix::Identity(2, 2);
    std::size_t halvings = 0;
    const Matrix next = guarded_precision_step(S, G, 4.0, &halvings);
    // 1 - 4 < 0, 1 - 2 < 0, 1 - 1 = 0, 1 - 0.5 > 0
    CHECK(halvings == 3);
    CHECK((next - 0.5 * S).norm() < 1e-15);
    halvings = 0;
    CHECK((guarded_precision_step(S, G, 0.5, &halvings) - 0.5 * S).norm() < 1e-15);
    CHECK(halvings == 0);
    CHECK_THROWS_AS(guarded_precision_step(S, G, 1e12), NumericalError);
}

TEST_CASE("iBLR step") {
    const Matrix S = Matrix::Constant(1, 1, 1.0);
    const Matrix G = Matrix::Constant(1, 1, -1.0);
    CHECK(iblr_precision_step(S, G, 0.1)(0, 0) == doctest::Approx(1.105).epsilon(1e-14));
    CHECK(iblr_precision_step(S, Matrix::Zero(1, 1), 0.7)(0, 0) == 1.0);

    Engine eng = substream(11, 0, 0, 0);
    int contrasting = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Matrix P = random_spd(eng, 3);
        const Matrix H = random_symmetric(eng, 3);
        const double rho = 5.0;
        const Matrix next = iblr_precision_step(P, H, rho);
        CHECK(is_positive_definite(next));
        CHECK((next - next.transpose()).norm() == 0.0);
        if (!is_positive_definite(symmetrize(P - rho * H))) ++contrasting;
    }
    CHECK(contrasting > 0);
}

TEST_CASE("eigenvalue floor bounds covariance from below") {
    Engine eng = substream(12, 0, 0, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix S = random_spd(eng, 3) * 100.0;
        const Matrix floored = apply_eigen_floor(S, 0.05);
        CHECK(min_eig(spd_inverse(floored)) >= 0.05 - 1e-12);
    }
    const Matrix S = Matrix::Identity(2, 2) * 3.0;
    CHECK(apply_eigen_floor(S, 0.0) == S);
}

TEST_CASE("zero step size leaves the state unchanged") {
    const Objective obj = quadratic(kA, kC);
    RunConfig cfg = small_config(Algorithm::snga);
    cfg.schedule.rho1 = 0.0;
    // validation rejects rho1 = 0 for runs, so drive a single step directly
    const MixtureState q = initial_mixture(obj, cfg, {}, 3, 0);
    EvalCounts counts;
    const MixtureState next = mixture_step(obj, q, 1, cfg, 3, 0, counts);
    for (std::size_t k = 0; k < q.size(); ++k) {
        CHECK(next.component(k).mean() == q.component(k).mean());
        CHECK(next.component(k).precision() == q.component(k).precision());
    }
    CHECK(next.logits() == q.logits());
}

TEST_CASE("single Gaussian with fixed temperature reaches S = A / omega") {
    const Objective obj = quadratic(kA, kC);
    RunConfig cfg;
    cfg.algorithm = Algorithm::snga;
    cfg.K = 1;
    cfg.B = 4;
    cfg.T = 3000;
    cfg.schedule = {0.01, 0.0, 0.5, 0.0};
    InitSpec init;
    init.means = {Vector(Eigen::Vector2d(-1.0, 1.0))};
    const RunResult r = run_optimizer(obj, cfg, init, 5, 0);
    const Matrix target = kA / 0.01;
    CHECK((r.precisions[0] - target).norm() / target.norm() < 0.01);
    CHECK((r.means[0] - kC).norm() < 1e-3);
}

TEST_CASE("two equal components on one mode both converge to it") {
    const Objective obj = quadratic(kA, kC);
    RunConfig cfg;
    cfg.algorithm = Algorithm::snga;
    cfg.K = 2;
    cfg.T = 3000;
    cfg.schedule = {1e-2, 0.0, 0.5, 0.0};
    InitSpec init;
    init.means = {Vector(Eigen::Vector2d(1.5, 1.5)), Vector(Eigen::Vector2d(1.5, 1.5))};
    const RunResult r = run_optimizer(obj, cfg, init, 6, 0);
    CHECK((r.means[0] - kC).norm() < 1e-2);
    CHECK((r.means[1] - kC).norm() < 1e-2);
}

TEST_CASE("snga matches nva-gm with a constant schedule") {
    const Objective obj = quadratic(kA, kC);
    RunConfig a = small_config(Algorithm::snga);
    a.schedule = {0.3, 0.0, 0.05, 0.0};
    RunConfig b = a;
    b.algorithm = Algorithm::nva_gm;
    const RunResult ra = run_optimizer(obj, a, {}, 8, 1);
    const RunResult rb = run_optimizer(obj, b, {}, 8, 1);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(ra.means[k] == rb.means[k]);
        CHECK(ra.precisions[k] == rb.precisions[k]);
    }
    CHECK(ra.weights == rb.weights);
}

TEST_CASE("runs are deterministic given the seed") {
    const Objective obj = make_symmetric_gmm();
    for (Algorithm alg : {Algorithm::nva_gm, Algorithm::fs_nva_gm, Algorithm::psga, Algorithm::pcmaes}) {
        RunConfig cfg = small_config(alg);
        cfg.T = 50;
        cfg.snapshot_every = 5;
        if (alg == Algorithm::fs_nva_gm || alg == Algorithm::pcmaes) cfg.B = 16;
        const RunResult a = run_optimizer(obj, cfg, {}, 42, 3);
        const RunResult b = run_optimizer(obj, cfg, {}, 42, 3);
        REQUIRE(a.trace.size() == b.trace.size());
        for (std::size_t i = 0; i < a.trace.size(); ++i)
            CHECK(snapshot_to_json(a.trace[i]).dump() == snapshot_to_json(b.trace[i]).dump());
        CHECK(a.counts == b.counts);
        const RunResult c = run_optimizer(obj, cfg, {}, 43, 3);
        CHECK(snapshot_to_json(a.trace.back()).dump() != snapshot_to_json(c.trace.back()).dump());
    }
}

TEST_CASE("state stays valid along a run") {
    const Objective obj = make_symmetric_gmm();
    for (Algorithm alg : {Algorithm::nva_gm, Algorithm::fs_nva_gm}) {
        RunConfig cfg = small_config(alg);
        cfg.K = 4;
        cfg.T = 300;
        cfg.tau = 1e-3;
        cfg.snapshot_every = 1;
        if (alg == Algorithm::fs_nva_gm) {
            cfg.B = 16;
            cfg.B0 = 4;
            cfg.precision_update = PrecisionUpdate::iblr;
            cfg.schedule.rho_max = 0.15;
        }
        const RunResult r = run_optimizer(obj, cfg, {}, 9, 0);
        REQUIRE(r.trace.size() == cfg.T);
        for (const Snapshot& s : r.trace) {
            CHECK(std::abs(s.weights.sum() - 1.0) < 1e-12);
            CHECK((s.weights.array() > 0.0).all());
            for (std::size_t k = 0; k < cfg.K; ++k) {
                CHECK(s.eig_min[k] > 0.0);
                // covariance eigenvalues >= tau
                CHECK(s.eig_max[k] <= 1.0 / cfg.tau + 1e-6);
                CHECK(s.means[k].allFinite());
            }
        }
    }
}

TEST_CASE("precisions are frozen during burn-in") {
    const Objective obj = quadratic(kA, kC);
    RunConfig cfg = small_config(Algorithm::nva_gm);
    cfg.kappa = 5;
    cfg.T = 5;
    cfg.sigma0 = 0.7;
    const MixtureState init = initial_mixture(obj, cfg, {}, 4, 0);
    const RunResult r = run_mixture(obj, cfg, init, 4, 0);
    for (std::size_t k = 0; k < cfg.K; ++k) {
        CHECK(r.precisions[k] == init.component(k).precision());
        CHECK(r.means[k] != init.component(k).mean());
    }
    cfg.T = 6;
    const RunResult later = run_mixture(obj, cfg, init, 4, 0);
    CHECK(later.precisions[0] != init.component(0).precision());
}

TEST_CASE("evaluation counts follow the cost table") {
    const std::uint64_t B = 4, K = 3, T = 10, BKT = B * K * T;
    const Objective hess = quadratic(kA, kC, Tier::hessian);
    const Objective grad = quadratic(kA, kC, Tier::gradient);
    const Objective black = quadratic(kA, kC, Tier::value);

    RunConfig cfg = small_config(Algorithm::nva_gm);
    CHECK(run_optimizer(hess, cfg, {}, 1, 0).counts == EvalCounts{BKT, BKT, BKT});
    cfg.mean_estimator = MeanEstimator::score;
    CHECK(run_optimizer(hess, cfg, {}, 1, 0).counts == EvalCounts{BKT, 0, BKT});
    cfg.mean_estimator = MeanEstimator::gradient;
    cfg.precision_estimator = PrecisionEstimator::gradient;
    CHECK(run_optimizer(grad, cfg, {}, 1, 0).counts == EvalCounts{BKT, BKT, 0});
    cfg.mean_estimator = MeanEstimator::score;
    cfg.precision_estimator = PrecisionEstimator::score;
    CHECK(run_optimizer(black, cfg, {}, 1, 0).counts == EvalCounts{BKT, 0, 0});

    // eta^-1 B~ K T with B~ = 4, eta = 1/4
    RunConfig fs = small_config(Algorithm::fs_nva_gm);
    fs.B = 16;
    fs.B0 = 4;
    CHECK(run_optimizer(black, fs, {}, 1, 0).counts == EvalCounts{16 * K * T, 0, 0});

    RunConfig sga = small_config(Algorithm::psga);
    CHECK(run_optimizer(grad, sga, {}, 1, 0).counts == EvalCounts{0, BKT, 0});

    RunConfig cma = small_config(Algorithm::pcmaes);
    cma.B = 16;
    cma.B0 = 4;
    CHECK(run_optimizer(black, cma, {}, 1, 0).counts == EvalCounts{16 * K * T, 0, 0});
}

TEST_CASE("missing derivatives are a configuration error") {
    const Objective black = quadratic(kA, kC, Tier::value);
    const RunConfig cfg = small_config(Algorithm::nva_gm);
    CHECK_THROWS_AS(run_optimizer(black, cfg, {}, 1, 0), CapabilityError);
    CHECK_THROWS_AS(run_optimizer(black, small_config(Algorithm::psga), {}, 1, 0), CapabilityError);
    RunConfig fd = cfg;
    fd.fd_fallback = true;
    CHECK_NOTHROW(run_optimizer(black, fd, {}, 1, 0));
}

TEST_CASE("invalid configs name the offending key") {
    RunConfig cfg = small_config(Algorithm::nva_gm);
    cfg.K = 0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("K"), std::invalid_argument);
    cfg = small_config(Algorithm::nva_gm);
    cfg.B0 = 9;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("B0"), std::invalid_argument);
    cfg = small_config(Algorithm::nva_gm);
    cfg.schedule.rho_max = 0.0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("rho_max"), std::invalid_argument);
}

TEST_CASE("shaped steps are invariant to monotone transforms of the objective") {
    const Objective a = quadratic(kA, kC, Tier::value);
    Objective b = a;
    b.value = [f = a.value](const Vector& x) { return 2.0 * f(x) + 7.0; };
    Objective e = a;
    e.value = [f = a.value](const Vector& x) { return std::exp(f(x)); };
    RunConfig cfg = small_config(Algorithm::fs_nva_gm);
    cfg.B = 16;
    cfg.B0 = 4;
    // omega enters f only through log q; at omega -> 0 the ranking is that of l
    cfg.schedule = {1e-300, 1.0, 0.1, 0.0};
    const MixtureState q = initial_mixture(a, cfg, {}, 2, 0);
    EvalCounts counts;
    const MixtureState qa = mixture_step(a, q, 1, cfg, 2, 0, counts);
    const MixtureState qb = mixture_step(b, q, 1, cfg, 2, 0, counts);
    const MixtureState qe = mixture_step(e, q, 1, cfg, 2, 0, counts);
    for (std::size_t k = 0; k < cfg.K; ++k) {
        CHECK(qa.component(k).mean() == qb.component(k).mean());
        CHECK(qa.component(k).precision() == qb.component(k).precision());
        CHECK(qa.component(k).mean() == qe.component(k).mean());
        CHECK(qa.component(k).precision() == qe.component(k).precision());
    }
}

TEST_CASE("pSGA converges on a quadratic and stays put at a stationary point") {
    const Objective obj = quadratic(kA, kC, Tier::gradient);
    RunConfig cfg = small_config(Algorithm::psga);
    cfg.K = 2;
    cfg.T = 2000;
    cfg.schedule.rho1 = 0.5;
    InitSpec init;
    init.means = {Vector(Eigen::Vector2d(1.9, 1.9)), kC};
    const RunResult r = run_optimizer(obj, cfg, init, 1, 0);
    CHECK((r.means[0] - kC).norm() < 1e-6);
    CHECK(r.means[1] == kC);
}

TEST_CASE("pCMA-ES reaches the optimum of a sphere") {
    const Vector c = (Vector(4) << 0.3, -0.2, 0.1, 0.4).finished();
    const Objective obj = quadratic(Matrix::Identity(4, 4), c, Tier::value);
    RunConfig cfg = small_config(Algorithm::pcmaes);
    cfg.K = 5;
    cfg.B = 16;
    cfg.B0 = 4;
    cfg.T = 2000 / 16;
    const RunResult r = run_optimizer(obj, cfg, {}, 7, 0);
    CHECK(r.counts.value == 5 * 2000);
    for (const Vector& m : r.means) CHECK((m - c).norm() < 1e-6);
}
