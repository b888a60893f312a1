#include "fdlm/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace fdlm::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.contains(key)) throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
}

const json& require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where, "expected an object");
    return j;
}

double get_number(const json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "expected a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
    return x;
}

double get_positive(const json& j, const std::string& field) {
    const double x = get_number(j, field);
    if (x <= 0.0) throw ConfigError(field, "must be positive");
    return x;
}

long get_count(const json& j, const std::string& field, long min) {
    if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
    const long x = j.get<long>();
    if (x < min) throw ConfigError(field, "must be at least " + std::to_string(min));
    return x;
}

bool get_bool(const json& j, const std::string& field) {
    if (!j.is_boolean()) throw ConfigError(field, "expected true or false");
    return j.get<bool>();
}

// {"sigma2": s, "beta": b} or {"sigma2": s, "log_beta": lb}, plus "estimate" where allowed.
KernelBlock parse_kernel(const json& j, const std::string& where, bool allow_estimate, const KernelBlock& fallback) {
    require_object(j, where);
    reject_unknown(j, where, allow_estimate ? std::set<std::string>{"sigma2", "beta", "log_beta", "estimate"}
                                            : std::set<std::string>{"sigma2", "beta", "log_beta"});
    if (j.contains("beta") && j.contains("log_beta")) throw ConfigError(where, "give either beta or log_beta, not both");
    const double sigma2 = j.contains("sigma2") ? get_positive(j["sigma2"], where + ".sigma2") : fallback.params.sigma2();
    double beta = fallback.params.beta();
    if (j.contains("beta")) beta = get_positive(j["beta"], where + ".beta");
    if (j.contains("log_beta")) beta = std::exp(get_number(j["log_beta"], where + ".log_beta"));
    KernelBlock out{OuParams(sigma2, beta), fallback.estimate};
    if (j.contains("estimate")) out.estimate = get_bool(j["estimate"], where + ".estimate");
    return out;
}

json kernel_json(const OuParams& p) { return {{"sigma2", p.sigma2()}, {"log_beta", p.log_beta()}}; }

}  // namespace

Grid RunConfig::grid() const { return grid_points ? Grid(*grid_points) : Grid::uniform(grid_size); }

FdlmSpec RunConfig::spec() const {
    const Grid g = grid();
    const auto d = static_cast<Eigen::Index>(g.size());
    Vector mean(d);
    if (m0.size() == 1) {
        mean.setConstant(m0.front());
    } else if (static_cast<Eigen::Index>(m0.size()) == d) {
        for (Eigen::Index i = 0; i < d; ++i) mean(i) = m0[static_cast<std::size_t>(i)];
    } else {
        throw ConfigError("model.m0", "must be a scalar or have one entry per grid point");
    }
    return local_level_spec(g, c0, w.params, v.params, mean);
}

json RunConfig::to_json() const {
    json grid_j = grid_points ? json{{"points", *grid_points}} : json{{"size", grid_size}};
    json v_j = kernel_json(v.params);
    v_j["estimate"] = v.estimate;
    json w_j = kernel_json(w.params);
    w_j["estimate"] = w.estimate;
    return {
        {"seed", seed},
        {"chains", chains},
        {"output", output.generic_string()},
        {"input", input ? json(input->generic_string()) : json(nullptr)},
        {"log_transform", log_transform},
        {"grid", grid_j},
        {"model", {{"m0", m0}, {"c0", kernel_json(c0)}, {"v", v_j}, {"w", w_j}}},
        {"prior",
         {{"ig_shape_v", prior.ig_shape_v},
          {"ig_rate_v", prior.ig_rate_v},
          {"ig_shape_w", prior.ig_shape_w},
          {"ig_rate_w", prior.ig_rate_w},
          {"logbeta_mean_v", prior.logbeta_mean_v},
          {"logbeta_sd_v", prior.logbeta_sd_v},
          {"logbeta_mean_w", prior.logbeta_mean_w},
          {"logbeta_sd_w", prior.logbeta_sd_w}}},
        {"sampler",
         {{"iterations", sampler.iterations},
          {"burn_in", sampler.burn_in},
          {"thin", sampler.thin},
          {"mh_step_v", sampler.mh_step_v},
          {"mh_step_w", sampler.mh_step_w},
          {"save_states", sampler.save_states},
          {"state_thin", sampler.state_thin},
          {"band_level", band_level}}},
        {"simulate", {{"days", sim_days}, {"start_date", start_date}}},
    };
}

RunConfig parse_config(const json& doc) {
    RunConfig cfg;
    require_object(doc, "<root>");
    reject_unknown(doc, "",
                   {"seed", "chains", "output", "input", "log_transform", "grid", "model", "prior", "sampler", "simulate"});

    if (doc.contains("seed")) cfg.seed = static_cast<std::uint64_t>(get_count(doc["seed"], "seed", 0));
    if (doc.contains("chains")) cfg.chains = static_cast<int>(get_count(doc["chains"], "chains", 1));
    if (doc.contains("output")) {
        if (!doc["output"].is_string()) throw ConfigError("output", "expected a path string");
        cfg.output = doc["output"].get<std::string>();
    }
    if (doc.contains("input") && !doc["input"].is_null()) {
        if (!doc["input"].is_string()) throw ConfigError("input", "expected a path string");
        cfg.input = doc["input"].get<std::string>();
    }
    if (doc.contains("log_transform")) cfg.log_transform = get_bool(doc["log_transform"], "log_transform");

    if (doc.contains("grid")) {
        const json& g = require_object(doc["grid"], "grid");
        reject_unknown(g, "grid", {"size", "points"});
        if (g.contains("size") == g.contains("points")) throw ConfigError("grid", "give exactly one of size or points");
        if (g.contains("size")) cfg.grid_size = static_cast<std::size_t>(get_count(g["size"], "grid.size", 1));
        if (g.contains("points")) {
            if (!g["points"].is_array()) throw ConfigError("grid.points", "expected an array");
            std::vector<double> pts;
            for (std::size_t i = 0; i < g["points"].size(); ++i)
                pts.push_back(get_number(g["points"][i], "grid.points[" + std::to_string(i) + "]"));
            try {
                Grid check(pts);
            } catch (const Error& e) {
                throw ConfigError("grid.points", e.what());
            }
            cfg.grid_size = pts.size();
            cfg.grid_points = std::move(pts);
        }
    }

    if (doc.contains("model")) {
        const json& m = require_object(doc["model"], "model");
        reject_unknown(m, "model", {"m0", "c0", "v", "w"});
        if (m.contains("m0")) {
            if (m["m0"].is_array()) {
                cfg.m0.clear();
                for (std::size_t i = 0; i < m["m0"].size(); ++i)
                    cfg.m0.push_back(get_number(m["m0"][i], "model.m0[" + std::to_string(i) + "]"));
                if (cfg.m0.empty()) throw ConfigError("model.m0", "must not be empty");
            } else {
                cfg.m0 = {get_number(m["m0"], "model.m0")};
            }
        }
        if (m.contains("c0")) cfg.c0 = parse_kernel(m["c0"], "model.c0", false, {cfg.c0, false}).params;
        if (m.contains("v")) cfg.v = parse_kernel(m["v"], "model.v", true, cfg.v);
        if (m.contains("w")) cfg.w = parse_kernel(m["w"], "model.w", true, cfg.w);
    }

    if (doc.contains("prior")) {
        const json& p = require_object(doc["prior"], "prior");
        reject_unknown(p, "prior",
                       {"ig_shape_v", "ig_rate_v", "ig_shape_w", "ig_rate_w", "logbeta_mean_v", "logbeta_sd_v",
                        "logbeta_mean_w", "logbeta_sd_w"});
        auto pos = [&](const char* key, double& field) {
            if (p.contains(key)) field = get_positive(p[key], std::string("prior.") + key);
        };
        auto num = [&](const char* key, double& field) {
            if (p.contains(key)) field = get_number(p[key], std::string("prior.") + key);
        };
        pos("ig_shape_v", cfg.prior.ig_shape_v);
        pos("ig_rate_v", cfg.prior.ig_rate_v);
        pos("ig_shape_w", cfg.prior.ig_shape_w);
        pos("ig_rate_w", cfg.prior.ig_rate_w);
        num("logbeta_mean_v", cfg.prior.logbeta_mean_v);
        pos("logbeta_sd_v", cfg.prior.logbeta_sd_v);
        num("logbeta_mean_w", cfg.prior.logbeta_mean_w);
        pos("logbeta_sd_w", cfg.prior.logbeta_sd_w);
    }

    if (doc.contains("sampler")) {
        const json& s = require_object(doc["sampler"], "sampler");
        reject_unknown(s, "sampler",
                       {"iterations", "burn_in", "thin", "mh_step_v", "mh_step_w", "save_states", "state_thin",
                        "band_level"});
        if (s.contains("iterations")) cfg.sampler.iterations = get_count(s["iterations"], "sampler.iterations", 1);
        if (s.contains("burn_in")) cfg.sampler.burn_in = get_count(s["burn_in"], "sampler.burn_in", 0);
        if (s.contains("thin")) cfg.sampler.thin = get_count(s["thin"], "sampler.thin", 1);
        if (s.contains("mh_step_v")) cfg.sampler.mh_step_v = get_positive(s["mh_step_v"], "sampler.mh_step_v");
        if (s.contains("mh_step_w")) cfg.sampler.mh_step_w = get_positive(s["mh_step_w"], "sampler.mh_step_w");
        if (s.contains("save_states")) cfg.sampler.save_states = get_bool(s["save_states"], "sampler.save_states");
        if (s.contains("state_thin")) cfg.sampler.state_thin = get_count(s["state_thin"], "sampler.state_thin", 1);
        if (s.contains("band_level")) {
            cfg.band_level = get_number(s["band_level"], "sampler.band_level");
            if (cfg.band_level <= 0.0 || cfg.band_level >= 1.0)
                throw ConfigError("sampler.band_level", "must lie strictly between 0 and 1");
        }
    }

    if (doc.contains("simulate")) {
        const json& s = require_object(doc["simulate"], "simulate");
        reject_unknown(s, "simulate", {"days", "start_date"});
        if (s.contains("days")) cfg.sim_days = static_cast<std::size_t>(get_count(s["days"], "simulate.days", 1));
        if (s.contains("start_date")) {
            if (!s["start_date"].is_string()) throw ConfigError("simulate.start_date", "expected YYYY-MM-DD");
            cfg.start_date = s["start_date"].get<std::string>();
        }
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

void validate_for(const RunConfig& cfg, const std::string& command) {
    try {
        (void)cfg.spec();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError("model", e.what());
    }
    const bool needs_input = command == "fit" || command == "filter" || command == "smooth" || command == "summarize";
    if (needs_input && !cfg.input) throw ConfigError("input", "required by '" + command + "' (use --input or config)");
    if (command == "fit") {
        if (cfg.sampler.iterations <= cfg.sampler.burn_in)
            throw ConfigError("sampler.iterations", "must exceed sampler.burn_in (" +
                                                        std::to_string(cfg.sampler.burn_in) + "); no draws would be kept");
        try {
            cfg.sampler.validate();
            cfg.prior.validate();
        } catch (const Error& e) {
            throw ConfigError("sampler", e.what());
        }
    }
}

}  // namespace fdlm::cli
