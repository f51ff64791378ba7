#include "nva/config.hpp"

#include <fstream>
#include <set>

namespace nva {

namespace {

using nlohmann::json;

class Section {
public:
    Section(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
        if (!j_.is_object()) throw ConfigError(prefix_.empty() ? "" : prefix_.substr(0, prefix_.size() - 1), "expected a table");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    const json& need(const std::string& key) {
        if (!j_.contains(key)) throw ConfigError(prefix_ + key, "missing required key");
        return raw(key);
    }

    std::size_t count(const std::string& key, std::optional<std::size_t> fallback = std::nullopt) {
        if (!has(key)) {
            if (!fallback) need(key);
            return *fallback;
        }
        const json& v = raw(key);
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw ConfigError(prefix_ + key, "expected a non-negative integer");
        return v.get<std::size_t>();
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_number()) throw ConfigError(prefix_ + key, "expected a number");
        return v.get<double>();
    }

    std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        if (!has(key)) {
            if (!fallback) need(key);
            return *fallback;
        }
        const json& v = raw(key);
        if (!v.is_string()) throw ConfigError(prefix_ + key, "expected a string");
        return v.get<std::string>();
    }

    bool flag(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_boolean()) throw ConfigError(prefix_ + key, "expected true or false");
        return v.get<bool>();
    }

    std::vector<double> numbers(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) throw ConfigError(prefix_ + key, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(prefix_ + key, "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    Section sub(const std::string& key) { return Section(raw(key), prefix_ + key + "."); }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError(prefix_ + k, "unknown key");
    }

private:
    const json& j_;
    std::string prefix_;
    std::set<std::string> seen_;
};

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

json from_vector(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig c;
    Section top(j, "");
    c.id = top.text("id", std::string("experiment"));
    if (c.id.empty() || c.id.find_first_of("/\\") != std::string::npos || c.id == "." || c.id == "..")
        throw ConfigError("id", "must be a plain directory name");
    c.problem = top.text("problem");
    const std::string algo = top.text("algorithm");
    const auto parsed = parse_algorithm(algo);
    if (!parsed) throw ConfigError("algorithm", "unknown algorithm '" + algo + "'");
    RunConfig& r = c.run;
    r.algorithm = *parsed;
    r.K = top.count("K");
    r.B = top.count("B");
    r.T = top.count("T");
    if (top.has("schedule")) {
        Section s = top.sub("schedule");
        r.schedule.omega1 = s.number("omega1", r.schedule.omega1);
        r.schedule.alpha = s.number("alpha", r.schedule.alpha);
        r.schedule.rho1 = s.number("rho1", r.schedule.rho1);
        r.schedule.beta = s.number("beta", r.schedule.beta);
        r.schedule.rho_max = s.number("rho_max", r.schedule.rho_max);
        s.finish();
    }
    r.kappa = top.count("kappa", 0);
    r.tau = top.number("tau", 0.0);
    if (top.has("estimators")) {
        Section s = top.sub("estimators");
        const std::size_t mu = s.count("mean", 1);
        const std::size_t prec = s.count("precision", 2);
        if (mu > 1) throw ConfigError("estimators.mean", "variant must be 0 or 1");
        if (prec > 2) throw ConfigError("estimators.precision", "variant must be 0, 1 or 2");
        r.mean_estimator = static_cast<MeanEstimator>(mu);
        r.precision_estimator = static_cast<PrecisionEstimator>(prec);
        s.finish();
    }
    if (top.has("utilities")) {
        Section s = top.sub("utilities");
        const std::string kind = s.text("kind", std::string("cmaes"));
        if (kind == "cmaes")
            r.utility = UtilityKind::cmaes;
        else if (kind == "truncation")
            r.utility = UtilityKind::truncation;
        else
            throw ConfigError("utilities.kind", "expected cmaes or truncation");
        if (s.has("B0") && s.has("eta")) throw ConfigError("utilities", "give B0 or eta, not both");
        if (s.has("eta")) {
            const double eta = s.number("eta", 0.25);
            if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("utilities.eta", "must lie in (0, 1]");
            r.B0 = selected_count(r.B, eta);
            if (r.B0 == 0) throw ConfigError("utilities.eta", "selects no samples");
        } else {
            r.B0 = s.count("B0", 0);
        }
        s.finish();
    }
    const std::string pu = top.text("precision_update", std::string("natural"));
    if (pu == "natural")
        r.precision_update = PrecisionUpdate::natural;
    else if (pu == "iblr")
        r.precision_update = PrecisionUpdate::iblr;
    else
        throw ConfigError("precision_update", "expected natural or iblr");
    r.fd_fallback = top.flag("fd_fallback", false);
    r.snapshot_every = top.count("snapshot_every", 0);
    r.sga_decay = top.number("sga_decay", r.sga_decay);
    if (top.has("init")) {
        Section s = top.sub("init");
        r.sigma0 = s.number("sigma0", 1.0);
        if (s.has("box")) {
            Section b = s.sub("box");
            const auto lo = b.numbers("lo");
            const auto hi = b.numbers("hi");
            if (lo.size() != hi.size() || lo.empty()) throw ConfigError("init.box", "lo and hi must match");
            for (std::size_t i = 0; i < lo.size(); ++i)
                if (!(lo[i] < hi[i])) throw ConfigError("init.box", "lo must be below hi");
            b.finish();
            c.init.box = Box{to_vector(lo), to_vector(hi)};
        }
        if (s.has("means")) {
            const json& m = s.raw("means");
            if (!m.is_array()) throw ConfigError("init.means", "expected an array of points");
            for (const auto& p : m) {
                if (!p.is_array()) throw ConfigError("init.means", "expected an array of points");
                std::vector<double> v;
                for (const auto& e : p) {
                    if (!e.is_number()) throw ConfigError("init.means", "expected numbers");
                    v.push_back(e.get<double>());
                }
                c.init.means.push_back(to_vector(v));
            }
            if (c.init.means.size() != r.K) throw ConfigError("init.means", "need exactly K means");
        }
        s.finish();
    }
    if (top.has("detection")) {
        Section s = top.sub("detection");
        const std::string rule = s.text("rule", std::string("box"));
        if (rule == "box")
            c.detection.kind = DetectionKind::box;
        else if (rule == "value")
            c.detection.kind = DetectionKind::value;
        else
            throw ConfigError("detection.rule", "expected box or value");
        c.detection.epsilon = s.number("epsilon", 0.1);
        if (!(c.detection.epsilon > 0.0)) throw ConfigError("detection.epsilon", "must be positive");
        s.finish();
    }
    c.replicates = top.count("replicates", 1);
    if (c.replicates == 0) throw ConfigError("replicates", "must be at least 1");
    if (top.has("seed")) {
        const json& s = top.raw("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            throw ConfigError("seed", "expected a non-negative integer");
        c.seed = s.get<std::uint64_t>();
    }
    top.finish();
    try {
        r.validate();
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        const auto colon = msg.find(':');
        throw ConfigError(colon == std::string::npos ? "" : msg.substr(0, colon),
                          colon == std::string::npos ? msg : msg.substr(colon + 2));
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("", "malformed config file " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

json config_to_json(const ExperimentConfig& c) {
    const RunConfig& r = c.run;
    json j;
    j["id"] = c.id;
    j["problem"] = c.problem;
    j["algorithm"] = algorithm_name(r.algorithm);
    j["K"] = r.K;
    j["B"] = r.B;
    j["T"] = r.T;
    j["schedule"] = {{"omega1", r.schedule.omega1}, {"alpha", r.schedule.alpha}, {"rho1", r.schedule.rho1}, {"beta", r.schedule.beta}};
    if (std::isfinite(r.schedule.rho_max)) j["schedule"]["rho_max"] = r.schedule.rho_max;
    j["kappa"] = r.kappa;
    j["tau"] = r.tau;
    j["estimators"] = {{"mean", static_cast<int>(r.mean_estimator)}, {"precision", static_cast<int>(r.precision_estimator)}};
    j["utilities"] = {{"kind", r.utility == UtilityKind::cmaes ? "cmaes" : "truncation"}, {"B0", r.B0}};
    j["precision_update"] = r.precision_update == PrecisionUpdate::iblr ? "iblr" : "natural";
    j["fd_fallback"] = r.fd_fallback;
    j["snapshot_every"] = r.snapshot_every;
    j["sga_decay"] = r.sga_decay;
    json init = {{"sigma0", r.sigma0}};
    if (c.init.box) init["box"] = {{"lo", from_vector(c.init.box->lo)}, {"hi", from_vector(c.init.box->hi)}};
    if (!c.init.means.empty()) {
        init["means"] = json::array();
        for (const auto& m : c.init.means) init["means"].push_back(from_vector(m));
    }
    j["init"] = init;
    j["detection"] = {{"rule", c.detection.kind == DetectionKind::box ? "box" : "value"}, {"epsilon", c.detection.epsilon}};
    j["replicates"] = c.replicates;
    j["seed"] = c.seed;
    return j;
}

}  // namespace nva
