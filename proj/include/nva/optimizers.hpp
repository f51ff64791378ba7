#pragma once

#include "nva/estimation.hpp"
#include "nva/linalg.hpp"
#include "nva/mixture.hpp"
#include "nva/objectives.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace nva {

enum class Algorithm { nva_gm, fs_nva_gm, snga, psga, pcmaes };
enum class PrecisionUpdate { natural, iblr };

const char* algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(const std::string& name);

// omega_t = omega1 t^-alpha, rho_t = min(rho1 (omega1 / omega_t)^beta, rho_max), t >= 1.
struct Schedule {
    double omega1 = 1.0;
    double alpha = 1.0;
    double rho1 = 0.1;
    double beta = 0.8;
    double rho_max = std::numeric_limits<double>::infinity();

    double omega(std::size_t t) const { return omega1 * std::pow(static_cast<double>(t), -alpha); }
    double rho(std::size_t t) const { return std::min(rho1 * std::pow(omega1 / omega(t), beta), rho_max); }
};

struct RunConfig {
    Algorithm algorithm = Algorithm::nva_gm;
    std::size_t K = 1;
    std::size_t B = 4;
    std::size_t T = 100;
    Schedule schedule;
    std::size_t kappa = 0;  // precision burn-in
    double tau = 0.0;       // covariance eigenvalue floor
    MeanEstimator mean_estimator = MeanEstimator::gradient;
    PrecisionEstimator precision_estimator = PrecisionEstimator::hessian;
    UtilityKind utility = UtilityKind::cmaes;
    std::size_t B0 = 0;  // selected samples; 0 means round(B / 4)
    PrecisionUpdate precision_update = PrecisionUpdate::natural;
    bool fd_fallback = false;
    std::size_t snapshot_every = 0;  // 0 records the final iteration only
    double sga_decay = 0.55;         // pSGA step rho1 t^-sga_decay
    double sigma0 = 1.0;             // initial standard deviation

    std::size_t selected() const;
    // Throws std::invalid_argument naming the offending key.
    void validate() const;
};

struct InitSpec {
    std::optional<Box> box;
    std::vector<Vector> means;  // explicit means take precedence over the box
};

struct Snapshot {
    std::size_t t = 0;
    double omega = 0.0;
    double rho = 0.0;
    Vector weights;
    std::vector<Vector> means;
    std::vector<double> eig_min;
    std::vector<double> eig_max;
    std::optional<double> fbar;
};

nlohmann::json snapshot_to_json(const Snapshot& s);

struct RunResult {
    std::vector<Vector> means;
    Vector weights;
    std::vector<Matrix> precisions;  // empty for pSGA
    std::vector<Snapshot> trace;
    EvalCounts counts;
    std::size_t guard_halvings = 0;
};

struct StepInfo {
    double fbar = 0.0;
    std::size_t guard_halvings = 0;
};

// S - rho G, halving rho until positive definite; NumericalError after 30 halvings.
Matrix guarded_precision_step(const Matrix& S, const Matrix& G, double rho,
                              std::size_t* halvings = nullptr);
// S - rho G + rho^2/2 G S^-1 G.
Matrix iblr_precision_step(const Matrix& S, const Matrix& G, double rho);
// (S^-1 + tau I)^-1
Matrix apply_eigen_floor(const Matrix& S, double tau);

std::vector<Vector> initial_means(const Objective& obj, const RunConfig& cfg, const InitSpec& init,
                                  std::uint64_t seed, std::uint64_t replicate);
MixtureState initial_mixture(const Objective& obj, const RunConfig& cfg, const InitSpec& init,
                             std::uint64_t seed, std::uint64_t replicate);

// One NVA-GM, FS-NVA-GM or SNGA iteration at 1-based step t.
MixtureState mixture_step(const Objective& obj, const MixtureState& q, std::size_t t,
                          const RunConfig& cfg, std::uint64_t seed, std::uint64_t replicate,
                          EvalCounts& counts, StepInfo* info = nullptr);

RunResult run_mixture(const Objective& obj, const RunConfig& cfg, const MixtureState& init,
                      std::uint64_t seed, std::uint64_t replicate);
RunResult run_psga(const Objective& obj, const RunConfig& cfg, const std::vector<Vector>& init,
                   std::uint64_t seed, std::uint64_t replicate);
RunResult run_pcmaes(const Objective& obj, const RunConfig& cfg, const std::vector<Vector>& init,
                     std::uint64_t seed, std::uint64_t replicate);

// Dispatches on cfg.algorithm.
RunResult run_optimizer(const Objective& obj, const RunConfig& cfg, const InitSpec& init,
                        std::uint64_t seed, std::uint64_t replicate);

}  // namespace nva
