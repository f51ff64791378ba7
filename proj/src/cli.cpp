#include "nva/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace nva {

namespace fs = std::filesystem;

std::vector<ExperimentConfig> resolve_experiments(const std::optional<std::string>& config_path,
                                                  const std::optional<std::string>& preset_name,
                                                  const std::optional<std::uint64_t>& seed_flag) {
    if (config_path && preset_name) throw ConfigError("", "give --config or --preset, not both");
    if (!config_path && !preset_name) throw ConfigError("", "need --config or --preset");
    std::vector<ExperimentConfig> out =
        config_path ? std::vector<ExperimentConfig>{load_config(*config_path)} : preset(*preset_name);
    std::optional<std::uint64_t> seed = seed_flag;
    if (!seed) {
        if (const char* env = std::getenv("NVA_SEED"); env && *env) {
            try {
                std::size_t used = 0;
                const unsigned long long v = std::stoull(env, &used);
                if (used != std::string(env).size()) throw std::invalid_argument(env);
                seed = v;
            } catch (const std::exception&) {
                throw ConfigError("NVA_SEED", "expected a non-negative integer");
            }
        }
    }
    if (seed)
        for (auto& c : out) c.seed = *seed;
    return out;
}

namespace {

nlohmann::json vectors_json(const std::vector<Vector>& vs) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& v : vs) j.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    return j;
}

}  // namespace

int cmd_optimize(const ExperimentConfig& cfg, const std::optional<fs::path>& out, std::ostream& os) {
    ExperimentConfig single = cfg;
    single.replicates = 1;
    const ExperimentResult r = run_experiment(single, 1);
    const RunOutcome& run = r.runs.front();
    if (out) write_experiment(r, config_to_json(single), *out);
    nlohmann::json j;
    j["experiment"] = single.id;
    j["algorithm"] = algorithm_name(single.run.algorithm);
    j["ok"] = run.ok;
    if (!run.ok) j["error"] = run.error;
    j["weights"] = std::vector<double>(run.result.weights.data(), run.result.weights.data() + run.result.weights.size());
    j["means"] = vectors_json(run.result.means);
    j["found"] = run.found;
    j["globals_found"] = run.globals_found;
    j["modes_found"] = run.modes_found;
    j["counts"] = {{"value", run.result.counts.value}, {"gradient", run.result.counts.gradient}, {"hessian", run.result.counts.hessian}};
    os << j.dump(2) << '\n';
    return run.ok ? exit_ok : exit_failure;
}

int cmd_bench(const std::vector<ExperimentConfig>& experiments, const fs::path& out, std::size_t jobs,
              std::ostream& os) {
    fs::create_directories(out);
    std::ofstream combined(out / "summary.csv");
    combined << summary_csv_header() << '\n';
    os << summary_csv_header() << '\n';
    for (const auto& cfg : experiments) {
        const ExperimentResult r = run_experiment(cfg, jobs);
        write_experiment(r, config_to_json(cfg), out);
        const std::string row = summary_csv_row(r);
        combined << row << '\n';
        combined.flush();
        os << row << std::endl;
    }
    if (!combined) throw std::runtime_error("cannot write " + (out / "summary.csv").string());
    return exit_ok;
}

namespace {

std::string default_preset(const std::string& id) {
    if (id == "sym-gmm") return "fig-mode-sym";
    if (id == "asym-gmm") return "fig-weight-asym";
    if (id == "styblinski-tang-4") return "fig-mode-st";
    if (id == "degenerate-psi") return "fig-weight-degen";
    if (id.rfind("cec-f", 0) == 0) return id;
    return "-";
}

}  // namespace

int cmd_list_problems(std::ostream& os) {
    for (const auto& id : problem_ids()) {
        if (id.rfind("gmm-file:", 0) == 0) {
            os << id << "\tdim=from file\ttier=hessian\n";
            continue;
        }
        const Objective obj = make_problem(id);
        os << id << "\tdim=" << obj.dim << "\ttier=" << tier_name(obj.tier)
           << "\tglobal_modes=" << obj.global_count() << "\tmodes=" << obj.modes.size()
           << "\tpreset=" << default_preset(id) << '\n';
    }
    return exit_ok;
}

int cmd_report(const fs::path& dir, std::ostream& os, std::ostream& err) {
    if (!fs::is_directory(dir)) {
        err << "no results: " << dir.string() << " is not a directory\n";
        return exit_failure;
    }
    std::vector<fs::path> reports;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() == "report.json") reports.push_back(e.path());
    std::sort(reports.begin(), reports.end());
    if (reports.empty()) {
        err << "no results under " << dir.string() << '\n';
        return exit_failure;
    }
    std::uint64_t tv = 0, tg = 0, th = 0;
    os << std::left << std::setw(40) << "experiment" << std::setw(11) << "algorithm" << std::setw(5) << "K"
       << std::setw(6) << "H" << std::setw(9) << "GPR" << std::setw(9) << "APR" << std::setw(9) << "GSR"
       << "evals(l/grad/hess)\n";
    for (const auto& p : reports) {
        std::ifstream in(p);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            err << "skipping malformed " << p.string() << ": " << e.what() << '\n';
            continue;
        }
        std::uint64_t v = 0, g = 0, h = 0;
        for (const auto& run : j.at("runs")) {
            v += run.at("counts").at("value").get<std::uint64_t>();
            g += run.at("counts").at("gradient").get<std::uint64_t>();
            h += run.at("counts").at("hessian").get<std::uint64_t>();
        }
        tv += v;
        tg += g;
        th += h;
        const auto& m = j.at("metrics");
        std::ostringstream line;
        line << std::left << std::setw(40) << j.at("experiment").get<std::string>() << std::setw(11)
             << j.at("config").at("algorithm").get<std::string>() << std::setw(5)
             << j.at("config").at("K").get<std::size_t>() << std::setw(6) << j.at("runs").size()
             << std::fixed << std::setprecision(3) << std::setw(9) << m.at("gpr").get<double>() << std::setw(9)
             << m.at("apr").get<double>() << std::setw(9) << m.at("gsr").get<double>() << v << '/' << g << '/' << h;
        os << line.str() << '\n';
    }
    os << "total evaluations: value=" << tv << " gradient=" << tg << " hessian=" << th << '\n';
    return exit_ok;
}

int cli_main(int argc, char** argv) {
    CLI::App app{"Natural variational annealing for multimodal optimization"};
    app.require_subcommand(1);

    std::optional<std::string> config_path, preset_name;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "results";
    std::size_t jobs = 1;

    auto* opt = app.add_subcommand("optimize", "run one replicate and print the final mixture");
    opt->add_option("--config", config_path, "experiment config (JSON)");
    opt->add_option("--preset", preset_name, "named recipe");
    opt->add_option("--seed", seed, "root seed; overrides NVA_SEED and the config");
    auto* opt_out = opt->add_option("--out", out_dir, "also write trace and report here");

    auto* bench = app.add_subcommand("bench", "run replicated experiments and write results");
    bench->add_option("--config", config_path, "experiment config (JSON)");
    bench->add_option("--preset", preset_name, "named recipe");
    bench->add_option("--seed", seed, "root seed; overrides NVA_SEED and the config");
    bench->add_option("--out", out_dir, "results directory")->capture_default_str();
    bench->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();

    app.add_subcommand("list-problems", "list registered objectives");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "aggregate a results directory");
    report->add_option("dir", report_dir, "results directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (app.got_subcommand("list-problems")) return cmd_list_problems(std::cout);
        if (app.got_subcommand("report")) return cmd_report(report_dir, std::cout, std::cerr);
        const auto experiments = resolve_experiments(config_path, preset_name, seed);
        if (app.got_subcommand("optimize")) {
            std::optional<fs::path> out;
            if (opt_out->count() > 0) out = out_dir;
            return cmd_optimize(experiments.front(), out, std::cout);
        }
        return cmd_bench(experiments, out_dir, jobs, std::cout);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
}

}  // namespace nva
