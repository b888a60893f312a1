#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fdlm/mcmc.hpp"

namespace fdlm::cli {

/// %.17g: enough digits for an exact double round trip.
std::string format_double(double x);

/// Splits text into rows of comma-separated fields; blank lines are skipped, whitespace and quotes trimmed.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Parses a whole field as a double; throws Error naming `what` on failure.
double parse_double(const std::string& field, const std::string& what);

std::string read_file(const std::filesystem::path& path);

/// Creates `dir` and writes every (file name, content) pair. Callers assemble everything first so a
/// failed run leaves no partial output behind.
void write_outputs(const std::filesystem::path& dir, const std::map<std::string, std::string>& files);

std::string sha256_hex(std::string_view data);

inline constexpr const char* kDrawsHeader = "iter,sigma2_v,log_beta_v,sigma2_w,log_beta_w";

std::string draws_to_csv(const PosteriorDraws& draws);
PosteriorDraws draws_from_csv(std::string_view text);

}  // namespace fdlm::cli
