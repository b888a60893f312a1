#include "fdlm/cli/csv.hpp"

#include <openssl/evp.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fdlm::cli {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

double parse_double(const std::string& field, const std::string& what) {
    if (field.empty()) throw Error(what + ": empty numeric field");
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size() || errno == ERANGE)
        throw Error(what + ": cannot parse '" + field + "' as a number");
    return x;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_outputs(const std::filesystem::path& dir, const std::map<std::string, std::string>& files) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, content] : files) {
        const auto path = dir / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path.string());
        out << content;
        if (!out) throw Error("failed writing " + path.string());
    }
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 computation failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

std::string draws_to_csv(const PosteriorDraws& draws) {
    std::string out = std::string(kDrawsHeader) + "\n";
    for (Eigen::Index r = 0; r < draws.draws.rows(); ++r) {
        out += std::to_string(draws.iterations.at(static_cast<std::size_t>(r)));
        for (Eigen::Index c = 0; c < 4; ++c) out += "," + format_double(draws.draws(r, c));
        out += "\n";
    }
    return out;
}

PosteriorDraws draws_from_csv(std::string_view text) {
    auto rows = parse_csv(text);
    if (rows.empty()) throw Error("draws file is empty");
    const auto& header = rows.front();
    std::string joined;
    for (std::size_t i = 0; i < header.size(); ++i) joined += (i ? "," : "") + header[i];
    if (joined != kDrawsHeader) throw Error("draws file header must be '" + std::string(kDrawsHeader) + "'");
    if (rows.size() < 2) throw Error("draws file has no draws");

    PosteriorDraws out;
    out.draws.resize(static_cast<Eigen::Index>(rows.size() - 1), 4);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::string where = "draws line " + std::to_string(r + 1);
        if (row.size() != 5) throw Error(where + ": expected 5 fields");
        out.iterations.push_back(static_cast<long>(parse_double(row[0], where)));
        for (int c = 0; c < 4; ++c)
            out.draws(static_cast<Eigen::Index>(r - 1), c) = parse_double(row[static_cast<std::size_t>(c + 1)], where);
    }
    return out;
}

}  // namespace fdlm::cli
