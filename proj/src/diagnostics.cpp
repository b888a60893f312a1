#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "fdlm/mcmc.hpp"

namespace fdlm {

SokalEstimate sokal_mcse(std::span<const double> chain, double window_constant) {
    const std::size_t n = chain.size();
    if (n < 100) throw ChainTooShortError("sokal_mcse: chain needs at least 100 draws, got " + std::to_string(n));
    const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / static_cast<double>(n);
    std::vector<double> centered(n);
    std::transform(chain.begin(), chain.end(), centered.begin(), [mean](double x) { return x - mean; });

    auto autocov = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) s += centered[i] * centered[i + lag];
        return s / static_cast<double>(n);
    };
    const double c0 = autocov(0);
    if (!(c0 > 0.0) || !std::isfinite(c0)) throw DegenerateChainError("sokal_mcse: chain has zero variance");

    double tau = 1.0;
    std::size_t window = 0;
    for (std::size_t lag = 1; lag < n; ++lag) {
        tau += 2.0 * autocov(lag) / c0;
        if (static_cast<double>(lag) >= window_constant * tau) {
            window = lag;
            break;
        }
    }
    if (window == 0) throw ChainTooShortError("sokal_mcse: no self-consistent window within the chain length");

    const double sd = std::sqrt(c0 * static_cast<double>(n) / static_cast<double>(n - 1));
    return {sd * std::sqrt(tau / static_cast<double>(n)), tau, static_cast<long>(window)};
}

double sorted_quantile(std::span<const double> sorted, double prob) {
    if (sorted.empty()) throw DimensionError("quantile of empty sample");
    if (!(prob >= 0.0 && prob <= 1.0)) throw ParameterDomainError("quantile probability must be in [0,1]");
    const double h = prob * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

ParameterSummary summarize_values(const char* name, std::vector<double> values,
                                  std::span<const std::vector<double>> per_chain) {
    ParameterSummary out;
    out.name = name;
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    std::sort(values.begin(), values.end());
    out.q05 = sorted_quantile(values, 0.05);
    out.q95 = sorted_quantile(values, 0.95);
    out.degenerate = values.front() == values.back();
    if (out.degenerate) return out;

    // MCSE of the pooled mean from independent per-chain estimates.
    double var_sum = 0.0;
    double tau_sum = 0.0;
    long window_max = 0;
    try {
        for (const auto& chain : per_chain) {
            const SokalEstimate est = sokal_mcse(chain);
            var_sum += est.mcse * est.mcse * static_cast<double>(chain.size()) * static_cast<double>(chain.size());
            tau_sum += est.tau_int;
            window_max = std::max(window_max, est.window);
        }
    } catch (const Error&) {
        return out;
    }
    const auto total = static_cast<double>(values.size());
    const auto k = static_cast<double>(per_chain.size());
    out.sokal = SokalEstimate{std::sqrt(var_sum) / total, tau_sum / k, window_max};
    return out;
}

}  // namespace

ChainSummary summarize(std::span<const PosteriorDraws> chains) {
    if (chains.empty()) throw DimensionError("summarize: no chains");
    ChainSummary out;
    out.chains = chains.size();
    for (const auto& c : chains) {
        if (c.draws.rows() == 0) throw DimensionError("summarize: empty draws");
        if (c.draws.cols() != 4) throw DimensionError("summarize: draws must have 4 columns");
        out.draws += static_cast<std::size_t>(c.draws.rows());
        out.acceptance_v += c.acceptance_v / static_cast<double>(chains.size());
        out.acceptance_w += c.acceptance_w / static_cast<double>(chains.size());
    }
    for (int col = 0; col < 4; ++col) {
        std::vector<double> pooled;
        pooled.reserve(out.draws);
        std::vector<std::vector<double>> per_chain;
        for (const auto& c : chains) {
            std::vector<double> v(c.draws.col(col).begin(), c.draws.col(col).end());
            pooled.insert(pooled.end(), v.begin(), v.end());
            per_chain.push_back(std::move(v));
        }
        out.params[static_cast<std::size_t>(col)] = summarize_values(kParamNames[col], std::move(pooled), per_chain);
    }
    return out;
}

ChainSummary summarize(const PosteriorDraws& draws) { return summarize(std::span<const PosteriorDraws>(&draws, 1)); }

std::string format_summary_table(const ChainSummary& summary) {
    constexpr int kWidth = 26;
    auto cell = [](const char* fmt, auto... args) {
        char buf[96];
        std::snprintf(buf, sizeof buf, fmt, args...);
        return std::string(buf);
    };
    auto pad = [](const std::string& s) {
        return s.size() >= kWidth ? s + " " : std::string(kWidth - s.size(), ' ') + s;
    };
    auto value = [&](int col, double x) {
        return (col == kSigma2V || col == kSigma2W) ? cell("%.2e", x) : cell("%.2f", x);
    };

    std::ostringstream os;
    os << pad("") ;
    for (const char* name : kParamNames) os << pad(name);
    os << "\n" << pad("estimate");
    for (int c = 0; c < 4; ++c) os << pad(value(c, summary.params[static_cast<std::size_t>(c)].mean));
    os << "\n" << pad("mcse");
    for (int c = 0; c < 4; ++c) {
        const auto& p = summary.params[static_cast<std::size_t>(c)];
        os << pad(p.sokal ? cell("%.2e", p.sokal->mcse) : std::string(p.degenerate ? "degenerate" : "n/a"));
    }
    os << "\n" << pad("90% interval");
    for (int c = 0; c < 4; ++c) {
        const auto& p = summary.params[static_cast<std::size_t>(c)];
        os << pad("(" + value(c, p.q05) + ", " + value(c, p.q95) + ")");
    }
    os << "\n";
    os << "draws: " << summary.draws << "  chains: " << summary.chains
       << cell("  acceptance beta_v: %.3f  beta_w: %.3f", summary.acceptance_v, summary.acceptance_w) << "\n";
    return os.str();
}

PosteriorBands posterior_bands(std::span<const Matrix> state_draws, double level) {
    if (state_draws.empty()) throw DimensionError("posterior_bands: no state draws were saved");
    if (!(level > 0.0 && level < 1.0)) throw ParameterDomainError("posterior_bands: level must be in (0,1)");
    const Eigen::Index rows = state_draws.front().rows();
    const Eigen::Index cols = state_draws.front().cols();
    for (const auto& m : state_draws)
        if (m.rows() != rows || m.cols() != cols) throw DimensionError("posterior_bands: inconsistent draw shapes");

    const double lo_p = 0.5 * (1.0 - level);
    PosteriorBands out{Matrix(rows, cols), Matrix(rows, cols), Matrix(rows, cols)};
    std::vector<double> buf(state_draws.size());
    for (Eigen::Index t = 0; t < rows; ++t) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            for (std::size_t k = 0; k < state_draws.size(); ++k) buf[k] = state_draws[k](t, j);
            std::sort(buf.begin(), buf.end());
            out.lower(t, j) = sorted_quantile(buf, lo_p);
            out.median(t, j) = sorted_quantile(buf, 0.5);
            out.upper(t, j) = sorted_quantile(buf, 1.0 - lo_p);
        }
    }
    return out;
}

}  // namespace fdlm
