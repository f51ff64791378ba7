#include "nva/bench.hpp"

#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace nva {

std::vector<int> assign_modes(const Objective& obj, const std::vector<Vector>& means,
                              const DetectionRule& rule) {
    std::vector<int> out(means.size(), -1);
    const double best = obj.global_value();
    for (std::size_t k = 0; k < means.size(); ++k) {
        const Vector& m = means[k];
        if (static_cast<std::size_t>(m.size()) != obj.dim || !m.allFinite()) continue;
        if (rule.kind == DetectionKind::box) {
            double nearest = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < obj.modes.size(); ++j) {
                const double dist = (obj.modes[j].location - m).cwiseAbs().maxCoeff();
                if (dist <= rule.epsilon && dist < nearest) {
                    nearest = dist;
                    out[k] = static_cast<int>(j);
                }
            }
        } else {
            const double v = obj.value(m);
            if (!(std::abs(v - best) <= rule.epsilon)) continue;
            double nearest = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < obj.modes.size(); ++j) {
                if (!obj.modes[j].global) continue;
                const double dist = (obj.modes[j].location - m).norm();
                if (dist < nearest) {
                    nearest = dist;
                    out[k] = static_cast<int>(j);
                }
            }
        }
    }
    return out;
}

std::vector<bool> detect_modes(const Objective& obj, const std::vector<Vector>& means,
                               const DetectionRule& rule) {
    std::vector<bool> found(obj.modes.size(), false);
    if (rule.kind == DetectionKind::box) {
        // Any mean inside the box counts, even when it is nearer another mode.
        for (const auto& m : means) {
            if (static_cast<std::size_t>(m.size()) != obj.dim || !m.allFinite()) continue;
            for (std::size_t j = 0; j < obj.modes.size(); ++j)
                if ((obj.modes[j].location - m).cwiseAbs().maxCoeff() <= rule.epsilon) found[j] = true;
        }
        return found;
    }
    for (int j : assign_modes(obj, means, rule))
        if (j >= 0) found[static_cast<std::size_t>(j)] = true;
    return found;
}

Metrics compute_metrics(std::span<const std::size_t> gf, std::span<const std::size_t> af,
                        std::size_t I, std::size_t J) {
    if (gf.size() != af.size()) throw std::invalid_argument("metrics: run counts differ");
    if (I == 0) throw std::invalid_argument("metrics: problem has no global modes");
    Metrics m;
    const std::size_t H = gf.size();
    if (H == 0) return m;
    double g = 0.0, a = 0.0, s = 0.0;
    for (std::size_t h = 0; h < H; ++h) {
        g += static_cast<double>(gf[h]);
        a += static_cast<double>(af[h]);
        s += gf[h] == I ? 1.0 : 0.0;
    }
    m.gpr = g / static_cast<double>(I * H);
    m.apr = J > 0 ? a / static_cast<double>(J * H) : 0.0;
    m.gsr = s / static_cast<double>(H);
    return m;
}

RunOutcome run_replicate(const Objective& obj, const ExperimentConfig& cfg, std::size_t h) {
    RunOutcome out;
    out.replicate = h;
    out.found.assign(obj.modes.size(), false);
    try {
        out.result = run_optimizer(obj, cfg.run, cfg.init, cfg.seed, h);
        out.found = detect_modes(obj, out.result.means, cfg.detection);
        for (std::size_t j = 0; j < out.found.size(); ++j) {
            if (!out.found[j]) continue;
            ++out.modes_found;
            if (obj.modes[j].global) ++out.globals_found;
        }
        out.ok = true;
    } catch (const NumericalError& e) {
        out.error = e.what();
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t jobs) {
    cfg.run.validate();
    if (cfg.replicates == 0) throw std::invalid_argument("replicates: must be at least 1");
    const Objective obj = make_problem(cfg.problem);
    ExperimentResult r;
    r.config = cfg;
    r.global_modes = obj.global_count();
    r.all_modes = obj.modes.size();
    r.runs.resize(cfg.replicates);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t h = next++; h < cfg.replicates; h = next++) {
            try {
                r.runs[h] = run_replicate(obj, cfg, h);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t n = std::max<std::size_t>(1, std::min(jobs, cfg.replicates));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<std::size_t> gf, af;
    for (const auto& run : r.runs) {
        gf.push_back(run.globals_found);
        af.push_back(run.modes_found);
        r.totals += run.result.counts;
    }
    r.metrics = compute_metrics(gf, af, r.global_modes, r.all_modes);
    return r;
}

std::string summary_csv_header() {
    return "experiment,algorithm,K,B,T,H,epsilon,gpr,apr,gsr,feval_l,feval_grad,feval_hess,seed";
}

namespace {

// Shortest text that reads back to the same double.
std::string shortest(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

}  // namespace

std::string summary_csv_row(const ExperimentResult& r) {
    const auto& c = r.config;
    std::ostringstream os;
    os << c.id << ',' << algorithm_name(c.run.algorithm) << ',' << c.run.K << ',' << c.run.B << ','
       << c.run.T << ',' << r.runs.size() << ',' << shortest(c.detection.epsilon) << ','
       << shortest(r.metrics.gpr) << ',' << shortest(r.metrics.apr) << ',' << shortest(r.metrics.gsr) << ',' << r.totals.value << ',' << r.totals.gradient
       << ',' << r.totals.hessian << ',' << c.seed;
    return os.str();
}

namespace {

nlohmann::json counts_json(const EvalCounts& c) {
    return {{"value", c.value}, {"gradient", c.gradient}, {"hessian", c.hessian}};
}

}  // namespace

nlohmann::json report_json(const ExperimentResult& r, const nlohmann::json& config) {
    nlohmann::json j;
    j["experiment"] = r.config.id;
    j["config"] = config;
    j["global_modes"] = r.global_modes;
    j["all_modes"] = r.all_modes;
    j["metrics"] = {{"gpr", r.metrics.gpr}, {"apr", r.metrics.apr}, {"gsr", r.metrics.gsr}};
    j["totals"] = counts_json(r.totals);
    j["runs"] = nlohmann::json::array();
    for (const auto& run : r.runs) {
        nlohmann::json jr;
        jr["replicate"] = run.replicate;
        jr["ok"] = run.ok;
        if (!run.ok) jr["error"] = run.error;
        jr["globals_found"] = run.globals_found;
        jr["modes_found"] = run.modes_found;
        jr["found"] = run.found;
        jr["counts"] = counts_json(run.result.counts);
        jr["guard_halvings"] = run.result.guard_halvings;
        jr["weights"] = std::vector<double>(run.result.weights.data(),
                                            run.result.weights.data() + run.result.weights.size());
        jr["means"] = nlohmann::json::array();
        for (const auto& m : run.result.means)
            jr["means"].push_back(std::vector<double>(m.data(), m.data() + m.size()));
        j["runs"].push_back(jr);
    }
    return j;
}

void write_experiment(const ExperimentResult& r, const nlohmann::json& config,
                      const std::filesystem::path& out_root) {
    const auto dir = out_root / r.config.id;
    std::filesystem::create_directories(dir);
    for (const auto& run : r.runs) {
        std::ofstream out(dir / ("run-" + std::to_string(run.replicate) + ".jsonl"));
        for (const auto& s : run.result.trace) out << snapshot_to_json(s).dump() << '\n';
        if (!out) throw std::runtime_error("cannot write trace in " + dir.string());
    }
    {
        std::ofstream out(dir / "report.json");
        out << report_json(r, config).dump(2) << '\n';
        if (!out) throw std::runtime_error("cannot write report in " + dir.string());
    }
    std::ofstream out(dir / "summary.csv");
    out << summary_csv_header() << '\n' << summary_csv_row(r) << '\n';
    if (!out) throw std::runtime_error("cannot write summary in " + dir.string());
}

}  // namespace nva
