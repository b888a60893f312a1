#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fdlm/cli/commands.hpp"
#include "fdlm/cli/csv.hpp"
#include "fdlm/cli/ingest.hpp"

using namespace fdlm;
using namespace fdlm::cli;
namespace fs = std::filesystem;

namespace {

std::string hourly_rows(const std::string& date, int hours, double value = 1.0) {
    std::string out;
    for (int h = 0; h < hours; ++h) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%sT%02d:00:00,%g\n", date.c_str(), h, value + h);
        out += buf;
    }
    return out;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("fdlm_test_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("timestamps") {
    const Timestamp a = parse_timestamp("2006-03-04T05:06:07");
    CHECK(format_date(a.day) == "2006-03-04");
    CHECK(a.seconds == 5 * 3600 + 6 * 60 + 7);
    CHECK(parse_timestamp("2006-03-04 05:06").seconds == 5 * 3600 + 6 * 60);
    CHECK(parse_timestamp("2006-03-04T05:06:07.250Z").seconds == a.seconds);
    CHECK(parse_timestamp("2006-03-04T05:06:07+02:00") == a);
    CHECK(format_timestamp(a) == "2006-03-04T05:06:07");
    CHECK_THROWS_AS(parse_timestamp("2006-02-30T00:00"), IngestError);
    CHECK_THROWS_AS(parse_timestamp("2006-03-04T25:00"), IngestError);
    CHECK_THROWS_AS(parse_timestamp("yesterday"), IngestError);
    CHECK(parse_timestamp("2006-03-04").seconds == 0);
    CHECK_THROWS_AS(parse_timestamp("2006-03-04X"), IngestError);
}

TEST_CASE("ingest reshapes complete days") {
    const Grid g = Grid::uniform(24);
    const std::string csv = "timestamp,value\n" + hourly_rows("2006-01-02", 24) + hourly_rows("2006-01-01", 24, 10.0);
    const IngestResult r = ingest_text(csv, g, false);
    CHECK(r.series.length() == 2);
    CHECK(r.series.curves().cols() == 24);
    CHECK(r.report.total_rows == 48);
    CHECK(r.report.days_parsed == 2);
    CHECK(r.report.rows_dropped == 0);
    CHECK(r.series.time_labels() == std::vector<std::string>{"2006-01-01", "2006-01-02"});
    CHECK(r.series.curves()(0, 0) == 10.0);
    CHECK(r.series.curves()(1, 23) == 24.0);
    CHECK(r.report.min_timestamp == "2006-01-01T00:00:00");
}

TEST_CASE("ingest drops incomplete days") {
    const std::string csv = hourly_rows("2006-01-01", 24) + hourly_rows("2006-01-02", 23);
    const IngestResult r = ingest_text(csv, Grid::uniform(24), false);
    CHECK(r.series.length() == 1);
    CHECK(r.report.rows_dropped == 23);
    CHECK(r.report.days_parsed * 24 + r.report.rows_dropped == r.report.total_rows);
    REQUIRE(r.report.incomplete_days.size() == 1);
    CHECK(r.report.incomplete_days[0].date == "2006-01-02");
    CHECK(r.report.incomplete_days[0].readings == 23);
    CHECK_THROWS_AS(ingest_text(hourly_rows("2006-01-02", 23), Grid::uniform(24), false), IngestError);
}

TEST_CASE("ingest log transform") {
    const IngestResult r = ingest_text("2006-01-01T00:00,100\n2006-01-01T12:00,1\n", Grid::uniform(2), true);
    CHECK(r.series.curves()(0, 0) == doctest::Approx(4.60517).epsilon(1e-6));
    CHECK(r.series.curves()(0, 0) == std::log(100.0));
    CHECK(r.series.curves()(0, 1) == 0.0);
    CHECK_THROWS_AS(ingest_text("2006-01-01T00:00,0\n2006-01-01T12:00,1\n", Grid::uniform(2), true), IngestError);
    CHECK_NOTHROW(ingest_text("2006-01-01T00:00,0\n2006-01-01T12:00,1\n", Grid::uniform(2), false));
}

TEST_CASE("ingest rejects malformed rows") {
    CHECK_THROWS(ingest_text("2006-01-01T00:00,abc\n", Grid::uniform(1), false));
    CHECK_THROWS(ingest_text("2006-01-01T00:00\n", Grid::uniform(1), false));
}

TEST_CASE("csv number formatting round-trips") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double x = std::ldexp(standard_normal(rng, 1)(0), static_cast<int>(i % 80) - 40);
        CHECK(parse_double(format_double(x), "x") == x);
    }
    CHECK_THROWS(parse_double("1.5x", "x"));
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("draws csv round-trip") {
    PosteriorDraws d;
    d.draws.resize(2, 4);
    d.draws << 2.76e-4, -2.83, 2.14e-4, -3.23, 1.0 / 3.0, 0.1, 1e-300, -1e10;
    d.iterations = {5, 6};
    const PosteriorDraws back = draws_from_csv(draws_to_csv(d));
    CHECK(back.draws == d.draws);
    CHECK(back.iterations == d.iterations);
    CHECK(draws_to_csv(d).rfind(kDrawsHeader, 0) == 0);
}

TEST_CASE("config parsing names the offending field") {
    auto field_of = [](const nlohmann::json& doc) {
        try {
            parse_config(doc);
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    CHECK(field_of(nlohmann::json::parse(R"({"model": {"v": {"sigma2": -1, "beta": 1}}})")) == "model.v.sigma2");
    CHECK(field_of(nlohmann::json::parse(R"({"sampler": {"thin": 0}})")) == "sampler.thin");
    CHECK(field_of(nlohmann::json::parse(R"({"bogus": 1})")) == "bogus");
    CHECK(field_of(nlohmann::json::parse(R"({"grid": {"size": 0}})")) == "grid.size");

    const RunConfig cfg = parse_config(nlohmann::json::parse(
        R"({"seed": 9, "grid": {"points": [0, 0.5, 1]}, "model": {"w": {"sigma2": 0.1, "log_beta": -1, "estimate": false}}})"));
    CHECK(cfg.seed == 9);
    CHECK(cfg.grid().size() == 3);
    CHECK(cfg.w.params.log_beta() == doctest::Approx(-1.0));
    CHECK_FALSE(cfg.w.estimate);
    CHECK(parse_config(cfg.to_json()).to_json() == cfg.to_json());
}

TEST_CASE("config validation per command") {
    RunConfig cfg;
    CHECK_THROWS_AS(validate_for(cfg, "fit"), ConfigError);
    CHECK_NOTHROW(validate_for(cfg, "simulate"));
    cfg.input = "data.csv";
    cfg.sampler.iterations = 10;
    cfg.sampler.burn_in = 10;
    try {
        validate_for(cfg, "fit");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(e.field().find("sampler") == 0);
    }
}

TEST_CASE("fit with no kept iterations writes nothing") {
    TempDir tmp("nokeep");
    const fs::path data = tmp.path / "data.csv";
    std::ofstream(data) << hourly_rows("2006-01-01", 24);
    RunConfig cfg;
    cfg.input = data;
    cfg.output = tmp.path / "out";
    cfg.sampler.iterations = 100;
    cfg.sampler.burn_in = 100;
    std::ostringstream log, err;
    CHECK(run_command("fit", cfg, false, log, err) != 0);
    CHECK(err.str().find("sampler") != std::string::npos);
    CHECK_FALSE(fs::exists(cfg.output));
}

TEST_CASE("simulate output ingests to the exact simulated matrix") {
    TempDir tmp("roundtrip");
    RunConfig cfg;
    cfg.output = tmp.path / "sim";
    cfg.sim_days = 12;
    cfg.seed = 77;
    std::ostringstream log;
    cmd_simulate(cfg, log);

    const Simulation sim = simulate(cfg.spec(), cfg.sim_days, cfg.seed);
    const IngestResult r = ingest(cfg.output / "data.csv", cfg.grid(), false);
    CHECK(r.report.rows_dropped == 0);
    CHECK(r.series.curves() == sim.observations.curves());

    const std::string before = read_file(cfg.output / "data.csv");
    cfg.input = cfg.output / "data.csv";
    cfg.output = tmp.path / "filtered";
    cmd_filter(cfg, log);
    CHECK(read_file(*cfg.input) == before);
    CHECK(fs::exists(cfg.output / "filter_moments.csv"));
    CHECK(fs::exists(cfg.output / "manifest.json"));

    const auto manifest = nlohmann::json::parse(read_file(cfg.output / "manifest.json"));
    CHECK(manifest["seed"] == 77);
    CHECK(manifest["input"]["sha256"] == sha256_hex(before));
    CHECK(manifest["config_sha256"] == sha256_hex(cfg.to_json().dump()));
}

TEST_CASE("commands refuse to overwrite their input") {
    TempDir tmp("overwrite");
    RunConfig cfg;
    cfg.output = tmp.path;
    cfg.sim_days = 3;
    std::ostringstream log, err;
    REQUIRE(run_command("simulate", cfg, false, log, err) == 0);
    const std::string before = read_file(tmp.path / "data.csv");
    cfg.input = tmp.path / "data.csv";
    CHECK(run_command("simulate", cfg, false, log, err) != 0);
    CHECK(read_file(tmp.path / "data.csv") == before);
}
