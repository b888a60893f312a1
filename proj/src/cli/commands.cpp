#include "fdlm/cli/commands.hpp"

#include <exception>
#include <map>
#include <ostream>
#include <thread>

#include "fdlm/cli/csv.hpp"
#include "fdlm/cli/ingest.hpp"
#include "fdlm/kalman.hpp"
#ifdef FDLM_WITH_ORACLE
#include "fdlm/verify.hpp"
#endif

namespace fdlm::cli {

using nlohmann::json;
using Files = std::map<std::string, std::string>;

namespace {

constexpr const char* kVersion = "0.1.0";

json nullable(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string eigen_version() {
    return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
           std::to_string(EIGEN_MINOR_VERSION);
}

void add_manifest(Files& files, const std::string& command, const RunConfig& cfg, const std::string* input_bytes,
                  const json& results = json::object()) {
    const std::string config_dump = cfg.to_json().dump();
    json outputs = json::object();
    for (const auto& [name, content] : files) outputs[name] = sha256_hex(content);
    json manifest = {
        {"command", command},
        {"seed", cfg.seed},
        {"config_sha256", sha256_hex(config_dump)},
        {"config", cfg.to_json()},
        {"versions", {{"fdlm", kVersion}, {"eigen", eigen_version()}, {"compiler", __VERSION__}}},
        {"outputs", outputs},
        {"results", results},
    };
    if (input_bytes) manifest["input"] = {{"path", cfg.input->generic_string()}, {"sha256", sha256_hex(*input_bytes)}};
    files["manifest.json"] = manifest.dump(2) + "\n";
}

// Refuse to write over the file we read from.
void guard_input(const RunConfig& cfg, const Files& files) {
    if (!cfg.input) return;
    std::error_code ec;
    for (const auto& [name, _] : files) {
        const auto target = cfg.output / name;
        if (std::filesystem::exists(target) && std::filesystem::equivalent(target, *cfg.input, ec))
            throw ConfigError("output", "would overwrite the input file " + cfg.input->string());
    }
    if (std::filesystem::exists(cfg.output / "manifest.json") &&
        std::filesystem::equivalent(cfg.output / "manifest.json", *cfg.input, ec))
        throw ConfigError("output", "would overwrite the input file " + cfg.input->string());
}

void finish(const std::string& command, const RunConfig& cfg, Files files, const std::string* input_bytes,
            const json& results, std::ostream& log) {
    add_manifest(files, command, cfg, input_bytes, results);
    guard_input(cfg, files);
    write_outputs(cfg.output, files);
    log << command << ": wrote " << files.size() << " files to " << cfg.output.string() << "\n";
}

struct LoadedData {
    std::string bytes;
    IngestResult ingested;
};

LoadedData load_input(const RunConfig& cfg) {
    std::string bytes = read_file(*cfg.input);
    IngestResult r = ingest_text(bytes, cfg.grid(), cfg.log_transform);
    return {std::move(bytes), std::move(r)};
}

std::string summary_text(const ChainSummary& s) { return format_summary_table(s); }

}  // namespace

json summary_to_json(const ChainSummary& summary) {
    json params = json::object();
    for (const auto& p : summary.params) {
        params[p.name] = {
            {"mean", p.mean},
            {"mcse", p.sokal ? json(p.sokal->mcse) : json(nullptr)},
            {"tau_int", p.sokal ? nullable(p.sokal->tau_int) : json(nullptr)},
            {"window", p.sokal ? json(p.sokal->window) : json(nullptr)},
            {"q05", p.q05},
            {"q95", p.q95},
            {"degenerate", p.degenerate},
        };
    }
    return {{"parameters", params},
            {"draws", summary.draws},
            {"chains", summary.chains},
            {"acceptance", {{"beta_v", summary.acceptance_v}, {"beta_w", summary.acceptance_w}}}};
}

void cmd_simulate(const RunConfig& cfg, std::ostream& log) {
    validate_for(cfg, "simulate");
    const std::chrono::sys_days start = parse_date(cfg.start_date);
    const FdlmSpec spec = cfg.spec();
    const Simulation sim = simulate(spec, cfg.sim_days, cfg.seed);

    const auto d = static_cast<long>(spec.obs_dim());
    std::string data = "timestamp,value\n";
    const Matrix& y = sim.observations.curves();
    for (Eigen::Index t = 0; t < y.rows(); ++t)
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
            const Timestamp ts{start + std::chrono::days(t), static_cast<long>(j) * 86400L / d};
            data += format_timestamp(ts) + "," + format_double(y(t, j)) + "\n";
        }

    std::string states = "t,grid_index,grid_point,value\n";
    const Matrix& x = sim.states.curves();
    for (Eigen::Index t = 0; t < x.rows(); ++t)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            states += std::to_string(t) + "," + std::to_string(j) + "," +
                      format_double(spec.state_grid[static_cast<std::size_t>(j)]) + "," + format_double(x(t, j)) + "\n";

    const json truth = {{"sigma2_v", spec.v.sigma2()},
                        {"log_beta_v", spec.v.log_beta()},
                        {"sigma2_w", spec.w.sigma2()},
                        {"log_beta_w", spec.w.log_beta()},
                        {"days", cfg.sim_days},
                        {"grid_size", spec.obs_dim()}};
    finish("simulate", cfg, {{"data.csv", data}, {"truth_states.csv", states}, {"truth.json", truth.dump(2) + "\n"}},
           nullptr, json::object(), log);
}

void cmd_fit(const RunConfig& cfg, std::ostream& log) {
    validate_for(cfg, "fit");
    const LoadedData input = load_input(cfg);
    const FunctionalSeries& data = input.ingested.series;
    const FdlmSpec spec = cfg.spec();

    std::vector<PosteriorDraws> chains(static_cast<std::size_t>(cfg.chains));
    std::vector<std::exception_ptr> failures(chains.size());
    auto run_chain = [&](std::size_t k) {
        try {
            SamplerConfig sc = cfg.sampler;
            sc.seed = cfg.seed + k;
            sc.update_v = cfg.v.estimate;
            sc.update_w = cfg.w.estimate;
            chains[k] = run_sampler(spec, data, cfg.prior, sc);
        } catch (...) {
            failures[k] = std::current_exception();
        }
    };
    if (chains.size() == 1) {
        run_chain(0);
    } else {
        std::vector<std::jthread> workers;
        for (std::size_t k = 0; k < chains.size(); ++k) workers.emplace_back(run_chain, k);
    }
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    Files files;
    if (chains.size() == 1) {
        files["draws.csv"] = draws_to_csv(chains.front());
    } else {
        for (std::size_t k = 0; k < chains.size(); ++k)
            files["draws_chain" + std::to_string(k) + ".csv"] = draws_to_csv(chains[k]);
    }
    const ChainSummary summary = summarize(chains);
    files["summary.txt"] = summary_text(summary);
    files["summary.json"] = summary_to_json(summary).dump(2) + "\n";

    if (cfg.sampler.save_states) {
        std::vector<Matrix> states;
        for (auto& c : chains) states.insert(states.end(), c.state_draws.begin(), c.state_draws.end());
        const PosteriorBands bands = posterior_bands(states, cfg.band_level);
        std::string out = "t,grid_point,observed,median,lower,upper\n";
        const Matrix& y = data.curves();
        for (Eigen::Index t = 0; t < y.rows(); ++t)
            for (Eigen::Index j = 0; j < y.cols(); ++j)
                out += std::to_string(t + 1) + "," + format_double(spec.obs_grid[static_cast<std::size_t>(j)]) + "," +
                       format_double(y(t, j)) + "," + format_double(bands.median(t + 1, j)) + "," +
                       format_double(bands.lower(t + 1, j)) + "," + format_double(bands.upper(t + 1, j)) + "\n";
        files["bands.csv"] = std::move(out);
    }
    log << summary_text(summary);
    finish("fit", cfg, std::move(files), &input.bytes, {{"ingest", input.ingested.report.to_json()}}, log);
}

void cmd_filter(const RunConfig& cfg, std::ostream& log) {
    validate_for(cfg, "filter");
    const LoadedData input = load_input(cfg);
    const FdlmSpec spec = cfg.spec();
    const FilterOutput out = filter(spec, input.ingested.series);

    std::string csv = "t,grid_index,grid_point,a,R_diag,f,Q_diag,m,C_diag\n";
    for (std::size_t t = 0; t < out.length(); ++t) {
        const FilterStep& s = out.steps[t];
        for (Eigen::Index j = 0; j < s.m.size(); ++j)
            csv += std::to_string(t + 1) + "," + std::to_string(j) + "," +
                   format_double(spec.state_grid[static_cast<std::size_t>(j)]) + "," + format_double(s.a(j)) + "," +
                   format_double(s.R(j, j)) + "," + format_double(s.f(j)) + "," + format_double(s.Q(j, j)) + "," +
                   format_double(s.m(j)) + "," + format_double(s.C(j, j)) + "\n";
    }
    const json summary = {{"loglik", out.loglik}, {"days", out.length()}, {"ingest", input.ingested.report.to_json()}};
    log << "filter: log-likelihood " << format_double(out.loglik) << " over " << out.length() << " days\n";
    finish("filter", cfg, {{"filter_moments.csv", csv}, {"filter.json", summary.dump(2) + "\n"}}, &input.bytes,
           {{"loglik", out.loglik}}, log);
}

void cmd_smooth(const RunConfig& cfg, std::ostream& log) {
    validate_for(cfg, "smooth");
    const LoadedData input = load_input(cfg);
    const FdlmSpec spec = cfg.spec();
    const ModelMatrices model = ModelMatrices::from_spec(spec);
    const FilterOutput filtered = filter(spec, input.ingested.series);
    const auto smoothed = smooth(model, filtered);

    std::string csv = "t,grid_index,grid_point,s,S_diag\n";
    for (std::size_t t = 0; t < smoothed.size(); ++t)
        for (Eigen::Index j = 0; j < smoothed[t].s.size(); ++j)
            csv += std::to_string(t) + "," + std::to_string(j) + "," +
                   format_double(spec.state_grid[static_cast<std::size_t>(j)]) + "," +
                   format_double(smoothed[t].s(j)) + "," + format_double(smoothed[t].S(j, j)) + "\n";
    finish("smooth", cfg, {{"smooth_moments.csv", csv}}, &input.bytes,
           {{"loglik", filtered.loglik}, {"ingest", input.ingested.report.to_json()}}, log);
}

void cmd_summarize(const RunConfig& cfg, std::ostream& log) {
    validate_for(cfg, "summarize");
    const std::string bytes = read_file(*cfg.input);
    const ChainSummary summary = summarize(draws_from_csv(bytes));
    log << summary_text(summary);
    finish("summarize", cfg, {{"summary.txt", summary_text(summary)}, {"summary.json", summary_to_json(summary).dump(2) + "\n"}},
           &bytes, json::object(), log);
}

bool cmd_verify(const RunConfig& cfg, bool full, std::ostream& log) {
#ifndef FDLM_WITH_ORACLE
    (void)cfg;
    (void)full;
    (void)log;
    throw Error("this build has no oracle; reconfigure with -DFDLM_WITH_ORACLE=ON");
#else
    std::vector<verify::CheckResult> results = verify::run_fast_suite();
    if (full) {
        verify::RecoveryResult rec = verify::parameter_recovery();
        results.push_back(rec.recovery);
        results.push_back(rec.bands);
    }
    bool all = true;
    std::string report;
    for (const auto& r : results) {
        all = all && r.passed;
        const std::string line = std::string(r.passed ? "PASS" : "FAIL") + "  " + r.name + ": " + r.detail;
        report += line + "\n";
        char timing[32];
        std::snprintf(timing, sizeof timing, " [%.2fs]", r.seconds);
        log << line << timing << "\n";
    }
    report += all ? "all checks passed\n" : "some checks FAILED\n";
    log << (all ? "all checks passed\n" : "some checks FAILED\n");
    finish("verify", cfg, {{"verify_report.txt", report}}, nullptr, {{"passed", all}}, log);
    return all;
#endif
}

int run_command(const std::string& command, const RunConfig& cfg, bool full_verify, std::ostream& log,
                std::ostream& err) {
    try {
        if (command == "simulate") cmd_simulate(cfg, log);
        else if (command == "fit") cmd_fit(cfg, log);
        else if (command == "filter") cmd_filter(cfg, log);
        else if (command == "smooth") cmd_smooth(cfg, log);
        else if (command == "summarize") cmd_summarize(cfg, log);
        else if (command == "verify") return cmd_verify(cfg, full_verify, log) ? 0 : 1;
        else {
            err << "unknown command '" << command << "'\n";
            return 2;
        }
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << command << " failed: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace fdlm::cli
