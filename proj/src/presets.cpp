#include "nva/config.hpp"

#include <cmath>

namespace nva {

namespace {

ExperimentConfig base(const std::string& id, const std::string& problem, Algorithm a,
                      std::size_t K, std::size_t B, std::size_t T, Schedule s) {
    ExperimentConfig c;
    c.id = id;
    c.problem = problem;
    c.run.algorithm = a;
    c.run.K = K;
    c.run.B = B;
    c.run.T = T;
    c.run.schedule = s;
    c.seed = 1;
    return c;
}

// Largest step the rank-based precision increment tolerates without collapsing.
constexpr double kShapedRhoMax = 0.15;

// The four algorithms of the mode-finding comparison on one problem and K. The shaped
// variant gets its own schedule since its increments are in whitened units.
std::vector<ExperimentConfig> mode_sweep(const std::string& stem, const std::string& problem,
                                         std::size_t K, std::size_t T, Schedule s, Schedule shaped,
                                         PrecisionUpdate nva_update, std::size_t H) {
    std::vector<ExperimentConfig> out;
    const std::string suffix = "-K" + std::to_string(K);
    ExperimentConfig nva = base(stem + "-nva-gm" + suffix, problem, Algorithm::nva_gm, K, 4, T, s);
    nva.run.precision_update = nva_update;
    ExperimentConfig fs = base(stem + "-fs-nva-gm" + suffix, problem, Algorithm::fs_nva_gm, K, 16, T, shaped);
    fs.run.B0 = 4;
    fs.run.precision_update = PrecisionUpdate::iblr;
    ExperimentConfig sga = base(stem + "-psga" + suffix, problem, Algorithm::psga, K, 4, 10000, {1.0, 0.0, 1.0, 0.0});
    sga.run.sga_decay = 0.55;
    ExperimentConfig cma = base(stem + "-pcmaes" + suffix, problem, Algorithm::pcmaes, K, 16, T, s);
    cma.run.B0 = 4;
    for (ExperimentConfig* c : {&nva, &fs, &sga, &cma}) {
        c->replicates = H;
        c->detection = {DetectionKind::box, 0.1};
        out.push_back(*c);
    }
    return out;
}

struct CecRow {
    std::size_t T, K, B;
    double omega1, alpha, rho1, beta;
    std::size_t kappa;
};

ExperimentConfig cec(int index) {
    static const CecRow rows[] = {
        {500, 2, 16, 1e5, 2.0, 1e-3, 0.8, 0},   {2000, 5, 32, 20.0, 1.0, 1e-3, 0.9, 0},
        {2000, 1, 32, 20.0, 1.0, 1e-3, 0.9, 0}, {2000, 4, 16, 2e6, 1.8, 1e-4, 0.7, 50},
        {2000, 2, 16, 1e4, 2.0, 1e-5, 0.8, 0},  {2000, 18, 16, 1e6, 1.8, 1e-5, 0.8, 50},
    };
    const CecRow& r = rows[index - 1];
    ExperimentConfig c = base("cec-f" + std::to_string(index), "cec-f" + std::to_string(index),
                              Algorithm::fs_nva_gm, r.K, r.B, r.T, {r.omega1, r.alpha, r.rho1, r.beta});
    c.run.kappa = r.kappa;
    c.run.tau = 1e-10;
    c.run.precision_update = PrecisionUpdate::iblr;
    c.run.schedule.rho_max = kShapedRhoMax;
    c.run.utility = UtilityKind::cmaes;
    c.run.B0 = r.B / 4;
    const Box box = cec_domain(index);
    c.run.sigma0 = 0.5 * (box.hi - box.lo).maxCoeff();
    c.init.box = box;
    c.detection = {DetectionKind::value, 0.1};
    c.replicates = 50;
    return c;
}

}  // namespace

std::vector<std::string> preset_ids() {
    return {"sym-gmm",    "fig-mode-sym",     "fig-mode-st", "fig-weight-sym", "fig-weight-asym",
            "fig-weight-degen", "cec-f1", "cec-f2", "cec-f3", "cec-f4", "cec-f5", "cec-f6", "cec-all"};
}

std::vector<ExperimentConfig> preset(const std::string& name) {
    const Schedule sym{1.0, 1.0, 0.1, 0.8};
    const Schedule sym_shaped{1.0, 1.0, 0.1, 0.8, kShapedRhoMax};
    const Schedule st{40000.0, 2.0, 1e-4, 0.5};
    const Schedule st_shaped{40000.0, 2.0, 8e-4, 0.5, kShapedRhoMax};
    if (name == "sym-gmm") {
        ExperimentConfig c = base("sym-gmm", "sym-gmm", Algorithm::nva_gm, 4, 4, 5000, sym);
        c.detection = {DetectionKind::box, 0.1};
        return {c};
    }
    if (name == "fig-mode-sym") {
        std::vector<ExperimentConfig> out;
        for (std::size_t K : {2, 3, 4, 5}) {
            auto part = mode_sweep("fig-mode-sym", "sym-gmm", K, 5000, sym, sym_shaped,
                                   PrecisionUpdate::natural, 100);
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    }
    if (name == "fig-mode-st") {
        std::vector<ExperimentConfig> out;
        for (std::size_t K = 2; K <= 20; K += 2) {
            auto part = mode_sweep("fig-mode-st", "styblinski-tang-4", K, 200, st, st_shaped,
                                   PrecisionUpdate::iblr, 100);
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    }
    if (name == "fig-weight-sym") {
        ExperimentConfig c = base("fig-weight-sym", "sym-gmm", Algorithm::nva_gm, 4, 4, 10000, sym);
        c.run.snapshot_every = 10;
        c.replicates = 10;
        return {c};
    }
    if (name == "fig-weight-asym") {
        ExperimentConfig c = base("fig-weight-asym", "asym-gmm", Algorithm::nva_gm, 3, 4, 1000, {100.0, 1.0, 1e-3, 0.8});
        c.run.snapshot_every = 1;
        c.replicates = 10;
        return {c};
    }
    if (name == "fig-weight-degen") {
        ExperimentConfig c = base("fig-weight-degen", "degenerate-psi", Algorithm::nva_gm, 2, 4, 50, {0.1, 2.0, 0.1, 0.8});
        c.run.fd_fallback = true;
        c.run.precision_update = PrecisionUpdate::iblr;
        c.run.snapshot_every = 1;
        c.replicates = 10;
        return {c};
    }
    for (int i = 1; i <= 6; ++i)
        if (name == "cec-f" + std::to_string(i)) return {cec(i)};
    if (name == "cec-all") {
        std::vector<ExperimentConfig> out;
        for (int i = 1; i <= 6; ++i) out.push_back(cec(i));
        return out;
    }
    throw ConfigError("preset", "unknown preset '" + name + "'");
}

}  // namespace nva
