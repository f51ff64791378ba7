#include "nva/optimizers.hpp"

#include "nva/rng.hpp"

#include <random>
#include <stdexcept>

namespace nva {

const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::nva_gm: return "nva-gm";
        case Algorithm::fs_nva_gm: return "fs-nva-gm";
        case Algorithm::snga: return "snga";
        case Algorithm::psga: return "psga";
        case Algorithm::pcmaes: return "pcmaes";
    }
    return "nva-gm";
}

std::optional<Algorithm> parse_algorithm(const std::string& name) {
    for (Algorithm a : {Algorithm::nva_gm, Algorithm::fs_nva_gm, Algorithm::snga, Algorithm::psga,
                        Algorithm::pcmaes})
        if (name == algorithm_name(a)) return a;
    return std::nullopt;
}

std::size_t RunConfig::selected() const {
    return B0 > 0 ? B0 : std::max<std::size_t>(1, selected_count(B, 0.25));
}

void RunConfig::validate() const {
    auto fail = [](const std::string& key, const std::string& why) {
        throw std::invalid_argument(key + ": " + why);
    };
    if (K == 0) fail("K", "must be at least 1");
    if (B == 0) fail("B", "must be at least 1");
    if (T == 0) fail("T", "must be at least 1");
    if (!(schedule.omega1 > 0.0) || !std::isfinite(schedule.omega1)) fail("omega1", "must be positive");
    if (!(schedule.alpha >= 0.0)) fail("alpha", "must be non-negative");
    if (!(schedule.rho1 > 0.0) || !std::isfinite(schedule.rho1)) fail("rho1", "must be positive");
    if (!(schedule.beta >= 0.0)) fail("beta", "must be non-negative");
    if (!(schedule.rho_max > 0.0)) fail("rho_max", "must be positive");
    if (!(tau >= 0.0)) fail("tau", "must be non-negative");
    if (!(sigma0 > 0.0)) fail("sigma0", "must be positive");
    if (!(sga_decay >= 0.0)) fail("sga_decay", "must be non-negative");
    if (B0 > B) fail("B0", "must not exceed B");
}

nlohmann::json snapshot_to_json(const Snapshot& s) {
    nlohmann::json j;
    j["t"] = s.t;
    j["omega"] = s.omega;
    j["rho"] = s.rho;
    j["weights"] = std::vector<double>(s.weights.data(), s.weights.data() + s.weights.size());
    j["means"] = nlohmann::json::array();
    for (const auto& m : s.means) j["means"].push_back(std::vector<double>(m.data(), m.data() + m.size()));
    j["eig_min"] = s.eig_min;
    j["eig_max"] = s.eig_max;
    j["fbar"] = s.fbar ? nlohmann::json(*s.fbar) : nlohmann::json(nullptr);
    return j;
}

Matrix guarded_precision_step(const Matrix& S, const Matrix& G, double rho, std::size_t* halvings) {
    double step = rho;
    for (int h = 0; h <= 30; ++h) {
        Matrix next = symmetrize(S - step * G);
        if (is_positive_definite(next)) {
            if (halvings) *halvings += static_cast<std::size_t>(h);
            return next;
        }
        step *= 0.5;
    }
    throw NumericalError("precision update stayed indefinite after 30 halvings");
}

Matrix iblr_precision_step(const Matrix& S, const Matrix& G, double rho) {
    const Matrix cov = spd_inverse(S);
    return symmetrize(S - rho * G + 0.5 * rho * rho * G * cov * G);
}

Matrix apply_eigen_floor(const Matrix& S, double tau) {
    if (tau <= 0.0) return S;
    const auto d = S.rows();
    return symmetrize(spd_inverse(spd_inverse(S) + tau * Matrix::Identity(d, d)));
}

std::vector<Vector> initial_means(const Objective& obj, const RunConfig& cfg, const InitSpec& init,
                                  std::uint64_t seed, std::uint64_t replicate) {
    if (!init.means.empty()) {
        if (init.means.size() != cfg.K) throw std::invalid_argument("init.means: need exactly K means");
        for (const auto& m : init.means)
            if (static_cast<std::size_t>(m.size()) != obj.dim)
                throw std::invalid_argument("init.means: dimension mismatch");
        return init.means;
    }
    const std::optional<Box>& box = init.box ? init.box : obj.domain;
    if (!box) throw std::invalid_argument("init: no box or means for " + obj.id);
    std::vector<Vector> out;
    for (std::size_t k = 0; k < cfg.K; ++k) {
        Engine eng = substream(seed, replicate, k, 0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Vector m(obj.dim);
        for (std::size_t i = 0; i < obj.dim; ++i) m(i) = box->lo(i) + unit(eng) * (box->hi(i) - box->lo(i));
        out.push_back(m);
    }
    return out;
}

MixtureState initial_mixture(const Objective& obj, const RunConfig& cfg, const InitSpec& init,
                             std::uint64_t seed, std::uint64_t replicate) {
    const auto means = initial_means(obj, cfg, init, seed, replicate);
    const Matrix S0 = Matrix::Identity(obj.dim, obj.dim) / (cfg.sigma0 * cfg.sigma0);
    std::vector<Gaussian> comps;
    for (const auto& m : means) comps.emplace_back(m, S0);
    return MixtureState(Vector::Zero(cfg.K), std::move(comps));
}

MixtureState mixture_step(const Objective& obj, const MixtureState& q, std::size_t t,
                          const RunConfig& cfg, std::uint64_t seed, std::uint64_t replicate,
                          EvalCounts& counts, StepInfo* info) {
    const bool fixed = cfg.algorithm == Algorithm::snga;
    const bool shaped = cfg.algorithm == Algorithm::fs_nva_gm;
    const double omega = fixed ? cfg.schedule.omega1 : cfg.schedule.omega(t);
    const double rho = fixed ? cfg.schedule.rho1 : cfg.schedule.rho(t);
    const bool update_precision = t > cfg.kappa;
    const bool need_grad = !shaped && (cfg.mean_estimator == MeanEstimator::gradient ||
                                       (update_precision && cfg.precision_estimator == PrecisionEstimator::gradient));
    const bool need_hess = !shaped && update_precision && cfg.precision_estimator == PrecisionEstimator::hessian;

    const AnnealedPotential f(obj, q, omega, cfg.fd_fallback);
    const std::size_t K = q.size();
    std::vector<EvaluatedBatch> batches;
    batches.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        Engine eng = substream(seed, replicate, k, t);
        batches.push_back(f.evaluate(q.component(k).sample(eng, cfg.B), need_grad, need_hess, counts));
    }

    std::vector<double> u;
    if (shaped) u = utilities(cfg.utility, cfg.B, cfg.selected());

    std::vector<Gaussian> next;
    next.reserve(K);
    std::size_t halvings = 0;
    double fsum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const Gaussian& c = q.component(k);
        const EvaluatedBatch& batch = batches[k];
        fsum += batch.values.sum();
        Vector gmu;
        Matrix G;
        if (shaped) {
            ShapedDirections dirs = shaped_directions(c, batch.points, batch.values, u);
            gmu = std::move(dirs.mean);
            G = std::move(dirs.precision);
        } else {
            gmu = estimate_grad_mean(c, batch, cfg.mean_estimator);
            if (update_precision) G = estimate_grad_precision(c, batch, cfg.precision_estimator);
        }
        Matrix S = c.precision();
        if (update_precision) {
            if (!G.allFinite()) throw NumericalError("non-finite precision gradient");
            if (cfg.precision_update == PrecisionUpdate::iblr) {
                Matrix trial = iblr_precision_step(S, G, rho);
                S = is_positive_definite(trial) ? trial : guarded_precision_step(S, G, rho, &halvings);
            } else {
                S = guarded_precision_step(S, G, rho, &halvings);
            }
            S = apply_eigen_floor(S, cfg.tau);
            if (!S.allFinite() || !is_positive_definite(S))
                throw NumericalError("precision lost positive definiteness");
        }
        Eigen::LLT<Matrix> llt(S);
        const Vector mean = c.mean() + rho * llt.solve(gmu);
        if (!mean.allFinite()) throw NumericalError("non-finite mean update");
        next.emplace_back(mean, S);
    }

    Vector logits = q.logits();
    for (std::size_t k = 0; k + 1 < K; ++k) logits(k) += rho * estimate_grad_pi(batches[k], batches[K - 1]);
    if (!logits.allFinite()) throw NumericalError("non-finite weight update");

    if (info) {
        info->fbar = fsum / static_cast<double>(K * cfg.B);
        info->guard_halvings += halvings;
    }
    return MixtureState(std::move(logits), std::move(next));
}

namespace {

Snapshot mixture_snapshot(const MixtureState& q, std::size_t t, double omega, double rho, double fbar) {
    Snapshot s;
    s.t = t;
    s.omega = omega;
    s.rho = rho;
    s.weights = q.weights();
    s.fbar = fbar;
    for (const auto& c : q.components()) {
        s.means.push_back(c.mean());
        Eigen::SelfAdjointEigenSolver<Matrix> es(c.precision(), Eigen::EigenvaluesOnly);
        s.eig_min.push_back(es.eigenvalues().minCoeff());
        s.eig_max.push_back(es.eigenvalues().maxCoeff());
    }
    return s;
}

}  // namespace

RunResult run_mixture(const Objective& obj, const RunConfig& cfg, const MixtureState& init,
                      std::uint64_t seed, std::uint64_t replicate) {
    cfg.validate();
    if (init.size() != cfg.K) throw std::invalid_argument("K: initial mixture has a different size");
    if (cfg.algorithm == Algorithm::fs_nva_gm) {
        (void)utilities(cfg.utility, cfg.B, cfg.selected());
    } else {
        Tier needed = Tier::value;
        if (cfg.mean_estimator == MeanEstimator::gradient ||
            cfg.precision_estimator == PrecisionEstimator::gradient)
            needed = Tier::gradient;
        if (cfg.precision_estimator == PrecisionEstimator::hessian) needed = Tier::hessian;
        require_tier(obj, needed, cfg.fd_fallback);
    }
    RunResult result;
    MixtureState q = init;
    const bool fixed = cfg.algorithm == Algorithm::snga;
    for (std::size_t t = 1; t <= cfg.T; ++t) {
        StepInfo info;
        q = mixture_step(obj, q, t, cfg, seed, replicate, result.counts, &info);
        result.guard_halvings += info.guard_halvings;
        const bool snap = t == cfg.T || (cfg.snapshot_every > 0 && t % cfg.snapshot_every == 0);
        if (snap)
            result.trace.push_back(mixture_snapshot(q, t, fixed ? cfg.schedule.omega1 : cfg.schedule.omega(t),
                                                    fixed ? cfg.schedule.rho1 : cfg.schedule.rho(t), info.fbar));
    }
    for (const auto& c : q.components()) {
        result.means.push_back(c.mean());
        result.precisions.push_back(c.precision());
    }
    result.weights = q.weights();
    return result;
}

RunResult run_optimizer(const Objective& obj, const RunConfig& cfg, const InitSpec& init,
                        std::uint64_t seed, std::uint64_t replicate) {
    cfg.validate();
    switch (cfg.algorithm) {
        case Algorithm::psga:
            return run_psga(obj, cfg, initial_means(obj, cfg, init, seed, replicate), seed, replicate);
        case Algorithm::pcmaes:
            return run_pcmaes(obj, cfg, initial_means(obj, cfg, init, seed, replicate), seed, replicate);
        default:
            return run_mixture(obj, cfg, initial_mixture(obj, cfg, init, seed, replicate), seed, replicate);
    }
}

}  // namespace nva
