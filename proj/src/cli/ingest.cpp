#include "fdlm/cli/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>

#include "fdlm/cli/csv.hpp"

namespace fdlm::cli {

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

[[noreturn]] void bad_timestamp(std::string_view text) {
    throw IngestError("unparseable timestamp '" + std::string(text) + "'");
}

}  // namespace

std::chrono::sys_days parse_date(std::string_view text) {
    int y = 0, m = 0, d = 0;
    if (text.size() < 10 || text[4] != '-' || text[7] != '-' || !read_int(text, 0, 4, y) || !read_int(text, 5, 2, m) ||
        !read_int(text, 8, 2, d))
        bad_timestamp(text);
    const std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(m)),
                                          std::chrono::day(static_cast<unsigned>(d))};
    if (!ymd.ok()) bad_timestamp(text);
    return std::chrono::sys_days(ymd);
}

Timestamp parse_timestamp(std::string_view text) {
    Timestamp ts{parse_date(text), 0};
    if (text.size() == 10) return ts;
    if (text[10] != 'T' && text[10] != ' ') bad_timestamp(text);
    int hh = 0, mm = 0, ss = 0;
    if (!read_int(text, 11, 2, hh) || text.size() < 16 || text[13] != ':' || !read_int(text, 14, 2, mm))
        bad_timestamp(text);
    std::size_t pos = 16;
    if (pos < text.size() && text[pos] == ':') {
        if (!read_int(text, pos + 1, 2, ss)) bad_timestamp(text);
        pos += 3;
        if (pos < text.size() && text[pos] == '.') {
            ++pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        }
    }
    if (pos < text.size()) {
        const std::string_view zone = text.substr(pos);
        int oh = 0, om = 0;
        const bool offset = zone.size() == 6 && (zone[0] == '+' || zone[0] == '-') && zone[3] == ':' &&
                            read_int(zone, 1, 2, oh) && read_int(zone, 4, 2, om);
        if (zone != "Z" && !offset) bad_timestamp(text);
    }
    if (hh > 23 || mm > 59 || ss > 60) bad_timestamp(text);
    ts.seconds = hh * 3600L + mm * 60L + ss;
    return ts;
}

std::string format_date(std::chrono::sys_days day) {
    const std::chrono::year_month_day ymd{day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string format_timestamp(const Timestamp& ts) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "T%02ld:%02ld:%02ld", ts.seconds / 3600, (ts.seconds / 60) % 60, ts.seconds % 60);
    return format_date(ts.day) + buf;
}

nlohmann::json IngestReport::to_json() const {
    nlohmann::json incomplete = nlohmann::json::array();
    for (const auto& d : incomplete_days) incomplete.push_back({{"date", d.date}, {"readings", d.readings}});
    return {{"total_rows", total_rows},       {"days_parsed", days_parsed},     {"rows_dropped", rows_dropped},
            {"grid_size", grid_size},         {"min_timestamp", min_timestamp}, {"max_timestamp", max_timestamp},
            {"incomplete_days", incomplete}};
}

IngestResult ingest_text(std::string_view csv, const Grid& grid, bool log_transform) {
    auto rows = parse_csv(csv);
    if (!rows.empty() && rows.front().size() >= 1) {
        std::string first = rows.front()[0];
        std::transform(first.begin(), first.end(), first.begin(), [](unsigned char c) { return std::tolower(c); });
        if (first == "timestamp") rows.erase(rows.begin());
    }

    std::map<std::chrono::sys_days, std::vector<std::pair<long, double>>> by_day;
    IngestReport report;
    report.grid_size = grid.size();
    report.total_rows = rows.size();
    std::optional<Timestamp> lo, hi;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        const std::string where = "row " + std::to_string(i + 1);
        if (row.size() != 2) throw IngestError(where + ": expected 2 fields (timestamp,value)");
        const Timestamp ts = parse_timestamp(row[0]);
        double value = 0.0;
        try {
            value = parse_double(row[1], where);
        } catch (const Error& e) {
            throw IngestError(e.what());
        }
        if (!std::isfinite(value)) throw IngestError(where + ": non-finite value");
        if (log_transform) {
            if (value <= 0.0) throw IngestError(where + ": non-positive value " + row[1] + " under log transform");
            value = std::log(value);
        }
        if (!lo || ts < *lo) lo = ts;
        if (!hi || *hi < ts) hi = ts;
        by_day[ts.day].emplace_back(ts.seconds, value);
    }
    if (lo) {
        report.min_timestamp = format_timestamp(*lo);
        report.max_timestamp = format_timestamp(*hi);
    }

    const std::size_t d = grid.size();
    std::vector<std::vector<double>> curves;
    std::vector<std::string> labels;
    for (auto& [day, readings] : by_day) {
        std::sort(readings.begin(), readings.end());
        const bool distinct = std::adjacent_find(readings.begin(), readings.end(), [](const auto& a, const auto& b) {
                                  return a.first == b.first;
                              }) == readings.end();
        if (readings.size() != d || !distinct) {
            report.rows_dropped += readings.size();
            report.incomplete_days.push_back({format_date(day), readings.size()});
            continue;
        }
        std::vector<double> curve(d);
        for (std::size_t j = 0; j < d; ++j) curve[j] = readings[j].second;
        curves.push_back(std::move(curve));
        labels.push_back(format_date(day));
    }
    report.days_parsed = curves.size();
    if (curves.empty()) throw IngestError("no complete days (each day needs exactly " + std::to_string(d) + " readings)");

    Matrix data(static_cast<Eigen::Index>(curves.size()), static_cast<Eigen::Index>(d));
    for (std::size_t t = 0; t < curves.size(); ++t)
        for (std::size_t j = 0; j < d; ++j) data(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = curves[t][j];
    return {FunctionalSeries(grid, std::move(data), std::move(labels)), std::move(report)};
}

IngestResult ingest(const std::filesystem::path& path, const Grid& grid, bool log_transform) {
    return ingest_text(read_file(path), grid, log_transform);
}

}  // namespace fdlm::cli
