#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fdlm/statespace.hpp"

namespace fdlm::cli {

class IngestError : public Error {
public:
    using Error::Error;
};

struct Timestamp {
    std::chrono::sys_days day;
    long seconds = 0;  // since local midnight

    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

/// Accepts YYYY-MM-DD[T| ]HH:MM[:SS[.fff]] with an optional Z or +HH:MM/-HH:MM suffix, or a bare date (midnight).
/// The offset is not applied: readings are grouped by the calendar day as written.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(const Timestamp& ts);
std::string format_date(std::chrono::sys_days day);
std::chrono::sys_days parse_date(std::string_view text);

struct IncompleteDay {
    std::string date;
    std::size_t readings;
};

struct IngestReport {
    std::size_t total_rows = 0;
    std::size_t days_parsed = 0;
    std::size_t rows_dropped = 0;
    std::size_t grid_size = 0;
    std::string min_timestamp;
    std::string max_timestamp;
    std::vector<IncompleteDay> incomplete_days;

    [[nodiscard]] nlohmann::json to_json() const;
};

struct IngestResult {
    FunctionalSeries series;
    IngestReport report;
};

/// Reshapes timestamp,value rows into one curve per complete calendar day on `grid`
/// (the j-th reading of a day goes to grid point j). Days without exactly grid.size()
/// readings are dropped and listed in the report.
IngestResult ingest_text(std::string_view csv, const Grid& grid, bool log_transform);
IngestResult ingest(const std::filesystem::path& path, const Grid& grid, bool log_transform);

}  // namespace fdlm::cli
