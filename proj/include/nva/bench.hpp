#pragma once

#include "nva/objectives.hpp"
#include "nva/optimizers.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace nva {

// box: some mean within epsilon of the mode in every coordinate.
// value: l(mean) within epsilon of the global value, credited to the nearest global mode.
enum class DetectionKind { box, value };

struct DetectionRule {
    DetectionKind kind = DetectionKind::box;
    double epsilon = 0.1;
};

// Mode index credited to each mean, or -1.
std::vector<int> assign_modes(const Objective& obj, const std::vector<Vector>& means,
                              const DetectionRule& rule);
std::vector<bool> detect_modes(const Objective& obj, const std::vector<Vector>& means,
                               const DetectionRule& rule);

struct Metrics {
    double gpr = 0.0;
    double apr = 0.0;
    double gsr = 0.0;
};

// gf[h], af[h]: global and total modes found by run h out of I and J.
Metrics compute_metrics(std::span<const std::size_t> gf, std::span<const std::size_t> af,
                        std::size_t I, std::size_t J);

struct ExperimentConfig {
    std::string id = "experiment";
    std::string problem;
    RunConfig run;
    InitSpec init;
    DetectionRule detection;
    std::size_t replicates = 1;
    std::uint64_t seed = 0;
};

struct RunOutcome {
    std::size_t replicate = 0;
    bool ok = false;
    std::string error;
    std::vector<bool> found;
    std::size_t globals_found = 0;
    std::size_t modes_found = 0;
    RunResult result;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::size_t global_modes = 0;
    std::size_t all_modes = 0;
    std::vector<RunOutcome> runs;
    Metrics metrics;
    EvalCounts totals;
};

RunOutcome run_replicate(const Objective& obj, const ExperimentConfig& cfg, std::size_t h);
// Replicates run on up to `jobs` threads; results do not depend on jobs.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1);

std::string summary_csv_header();
std::string summary_csv_row(const ExperimentResult& r);
nlohmann::json report_json(const ExperimentResult& r, const nlohmann::json& config);
// Writes <out>/<id>/run-<h>.jsonl, report.json and summary.csv.
void write_experiment(const ExperimentResult& r, const nlohmann::json& config,
                      const std::filesystem::path& out_root);

}  // namespace nva
