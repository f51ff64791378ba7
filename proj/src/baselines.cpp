#include "nva/optimizers.hpp"

#include "nva/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nva {

RunResult run_psga(const Objective& obj, const RunConfig& cfg, const std::vector<Vector>& init,
                   std::uint64_t /*seed*/, std::uint64_t /*replicate*/) {
    cfg.validate();
    require_tier(obj, Tier::gradient, cfg.fd_fallback);
    RunResult result;
    std::vector<Vector> x = init;
    std::vector<bool> frozen(x.size(), false);
    const Vector uniform = Vector::Constant(static_cast<Eigen::Index>(x.size()), 1.0 / static_cast<double>(x.size()));
    for (std::size_t t = 1; t <= cfg.T; ++t) {
        const double rho = cfg.schedule.rho1 * std::pow(static_cast<double>(t), -cfg.sga_decay);
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (frozen[k]) continue;
            // Deterministic objective: the mini-batch repeats the same point.
            Vector g = Vector::Zero(static_cast<Eigen::Index>(obj.dim));
            for (std::size_t b = 0; b < cfg.B; ++b) {
                if (obj.gradient) {
                    g += obj.gradient(x[k]);
                    ++result.counts.gradient;
                } else {
                    g += finite_difference_gradient(obj.value, x[k]);
                    result.counts.value += 2 * obj.dim;
                }
            }
            const Vector next = x[k] + rho * g / static_cast<double>(cfg.B);
            if (next.allFinite())
                x[k] = next;
            else
                frozen[k] = true;
        }
        if (t == cfg.T || (cfg.snapshot_every > 0 && t % cfg.snapshot_every == 0)) {
            Snapshot s;
            s.t = t;
            s.omega = 0.0;
            s.rho = rho;
            s.weights = uniform;
            s.means = x;
            result.trace.push_back(std::move(s));
        }
    }
    result.means = x;
    result.weights = uniform;
    return result;
}

namespace {

struct CmaInstance {
    Vector mean;
    double sigma;
    Matrix C;
    Vector pc;
    Vector ps;
    bool stopped = false;
};

}  // namespace

RunResult run_pcmaes(const Objective& obj, const RunConfig& cfg, const std::vector<Vector>& init,
                     std::uint64_t seed, std::uint64_t replicate) {
    cfg.validate();
    const auto d = static_cast<Eigen::Index>(obj.dim);
    const double dd = static_cast<double>(obj.dim);
    const std::size_t lambda = cfg.B;
    const std::size_t mu = cfg.B0 > 0 ? cfg.B0 : std::max<std::size_t>(1, lambda / 2);
    if (mu > lambda) throw std::invalid_argument("B0: must not exceed B");

    Vector w(static_cast<Eigen::Index>(mu));
    for (std::size_t i = 0; i < mu; ++i)
        w(static_cast<Eigen::Index>(i)) = std::log(static_cast<double>(mu) + 1.0) - std::log(static_cast<double>(i) + 1.0);
    w /= w.sum();
    const double mueff = 1.0 / w.squaredNorm();
    const double cs = (mueff + 2.0) / (dd + mueff + 5.0);
    const double ds = 1.0 + 2.0 * std::max(0.0, std::sqrt((mueff - 1.0) / (dd + 1.0)) - 1.0) + cs;
    const double cc = (4.0 + mueff / dd) / (dd + 4.0 + 2.0 * mueff / dd);
    const double c1 = 2.0 / ((dd + 1.3) * (dd + 1.3) + mueff);
    const double cmu = std::min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((dd + 2.0) * (dd + 2.0) + mueff));
    const double chi = std::sqrt(dd) * (1.0 - 1.0 / (4.0 * dd) + 1.0 / (21.0 * dd * dd));

    std::vector<CmaInstance> inst;
    for (const auto& m : init)
        inst.push_back({m, cfg.sigma0, Matrix::Identity(d, d), Vector::Zero(d), Vector::Zero(d)});
    const Vector uniform = Vector::Constant(static_cast<Eigen::Index>(inst.size()), 1.0 / static_cast<double>(inst.size()));

    RunResult result;
    for (std::size_t t = 1; t <= cfg.T; ++t) {
        double fsum = 0.0;
        for (std::size_t k = 0; k < inst.size(); ++k) {
            CmaInstance& s = inst[k];
            Eigen::SelfAdjointEigenSolver<Matrix> es(s.C);
            const Vector D = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
            const Matrix& Bm = es.eigenvectors();
            Engine eng = substream(seed, replicate, k, t);
            const Matrix z = standard_normal(eng, d, static_cast<Eigen::Index>(lambda));
            const Matrix y = Bm * D.asDiagonal() * z;
            const Matrix x = (s.sigma * y).colwise() + s.mean;
            const Vector f = obj.values(x);
            result.counts.value += lambda;
            fsum += f.sum();
            if (s.stopped) continue;
            const auto order = rank_descending(f);
            Vector yw = Vector::Zero(d);
            for (std::size_t i = 0; i < mu; ++i) yw += w(static_cast<Eigen::Index>(i)) * y.col(static_cast<Eigen::Index>(order[i]));
            const Vector mean = s.mean + s.sigma * yw;
            const Vector invsqrt_yw = Bm * (Bm.transpose() * yw).cwiseQuotient(D.cwiseMax(1e-300));
            const Vector ps = (1.0 - cs) * s.ps + std::sqrt(cs * (2.0 - cs) * mueff) * invsqrt_yw;
            const double gen = static_cast<double>(t);
            const bool hs = ps.norm() / std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * gen)) < (1.4 + 2.0 / (dd + 1.0)) * chi;
            const Vector pc = (1.0 - cc) * s.pc + (hs ? std::sqrt(cc * (2.0 - cc) * mueff) : 0.0) * yw;
            Matrix rank_mu = Matrix::Zero(d, d);
            for (std::size_t i = 0; i < mu; ++i) {
                const Vector yi = y.col(static_cast<Eigen::Index>(order[i]));
                rank_mu.noalias() += w(static_cast<Eigen::Index>(i)) * yi * yi.transpose();
            }
            const Matrix C = symmetrize((1.0 - c1 - cmu) * s.C +
                                        c1 * (pc * pc.transpose() + (hs ? 0.0 : cc * (2.0 - cc)) * s.C) +
                                        cmu * rank_mu);
            const double sigma = s.sigma * std::exp((cs / ds) * (ps.norm() / chi - 1.0));
            if (!mean.allFinite() || !C.allFinite() || !std::isfinite(sigma)) {
                s.stopped = true;
                continue;
            }
            s.mean = mean;
            s.ps = ps;
            s.pc = pc;
            s.C = C;
            s.sigma = sigma;
            // Numerical floor: freeze once the search scale is below double resolution.
            const double scale = s.sigma * std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
            if (scale < 1e-15 * std::max(1.0, s.mean.cwiseAbs().maxCoeff())) s.stopped = true;
        }
        if (t == cfg.T || (cfg.snapshot_every > 0 && t % cfg.snapshot_every == 0)) {
            Snapshot snap;
            snap.t = t;
            snap.omega = 0.0;
            snap.rho = 0.0;
            snap.weights = uniform;
            snap.fbar = fsum / static_cast<double>(lambda * inst.size());
            for (const auto& s : inst) {
                snap.means.push_back(s.mean);
                Eigen::SelfAdjointEigenSolver<Matrix> es(s.C, Eigen::EigenvaluesOnly);
                const double v2 = s.sigma * s.sigma;
                snap.eig_min.push_back(1.0 / (v2 * es.eigenvalues().maxCoeff()));
                snap.eig_max.push_back(1.0 / (v2 * es.eigenvalues().minCoeff()));
            }
            result.trace.push_back(std::move(snap));
        }
    }
    for (const auto& s : inst) {
        result.means.push_back(s.mean);
        result.precisions.push_back(spd_inverse(s.sigma * s.sigma * s.C + 1e-300 * Matrix::Identity(d, d)));
    }
    result.weights = uniform;
    return result;
}

}  // namespace nva
