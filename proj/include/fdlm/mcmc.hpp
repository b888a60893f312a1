#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdlm/kalman.hpp"

namespace fdlm {

struct InverseGamma {
    double shape;
    double rate;

    [[nodiscard]] double log_pdf(double x) const;
    [[nodiscard]] double draw(Rng& rng) const;
};

struct PriorSpec {
    double ig_shape_v = 2.0;
    double ig_rate_v = 1e-4;
    double ig_shape_w = 2.0;
    double ig_rate_w = 1e-4;
    double logbeta_mean_v = 0.0;
    double logbeta_sd_v = 10.0;
    double logbeta_mean_w = 0.0;
    double logbeta_sd_w = 10.0;

    void validate() const;
};

struct SamplerConfig {
    long iterations = 10000;
    long burn_in = 2000;
    long thin = 1;
    double mh_step_v = 0.1;
    double mh_step_w = 0.1;
    std::uint64_t seed = 1;
    bool save_states = false;
    /// Keep every state_thin-th retained sweep's state trajectory.
    long state_thin = 1;
    bool update_v = true;
    bool update_w = true;

    void validate() const;
    [[nodiscard]] long kept() const noexcept { return (iterations - burn_in + thin - 1) / thin; }
};

/// Column order of PosteriorDraws::draws.
enum Param : int { kSigma2V = 0, kLogBetaV = 1, kSigma2W = 2, kLogBetaW = 3 };
inline constexpr std::array<const char*, 4> kParamNames{"sigma2_v", "log_beta_v", "sigma2_w", "log_beta_w"};

struct PosteriorDraws {
    Matrix draws;                  // kept iterations x 4
    std::vector<long> iterations;  // sweep index of each kept row
    double acceptance_v = 0.0;
    double acceptance_w = 0.0;
    std::vector<Matrix> state_draws;  // each (T + 1) x p
};

/// Sufficient statistics of zero-mean OU residual rows e_1..e_T at a fixed beta:
/// the quadratic form sum_t e_t' K^{-1} e_t and log det K, with K_ij = exp(-beta |u_i - u_j|).
struct ResidualStats {
    double quad_sum = 0.0;
    double log_det_corr = 0.0;
    Eigen::Index count = 0;
    Eigen::Index dim = 0;
};

ResidualStats residual_stats(const Matrix& residuals, double beta, const Grid& grid);

/// Gaussian log-likelihood of residual rows under N(0, Gram(p, grid)).
double ou_residual_loglik(const ResidualStats& stats, double sigma2, double beta);
double ou_residual_loglik(const Matrix& residuals, const OuParams& p, const Grid& grid);

/// Full conditional of sigma^2 under an IG(shape, rate) prior:
/// IG(shape + T d / 2, rate + beta * sum_t e_t' K(beta)^{-1} e_t).
InverseGamma sigma2_full_conditional(const Matrix& residuals, double beta, const Grid& grid, double shape,
                                     double rate);
double gibbs_sigma2(const Matrix& residuals, double beta, const Grid& grid, double shape, double rate, Rng& rng);

struct LogBetaPrior {
    double mean;
    double sd;
};

/// Log-likelihood of the residuals plus the Normal log prior on log beta (up to a constant).
/// Returns -infinity when the correlation matrix cannot be factorized.
double logbeta_log_target(double log_beta, double sigma2, const Matrix& residuals, const Grid& grid,
                          const LogBetaPrior& prior);

/// Accepts with probability min(1, exp(log_ratio)).
bool metropolis_accept(double log_ratio, Rng& rng);

struct MhResult {
    double log_beta;
    bool accepted;
};

/// Random-walk Metropolis on log beta with N(0, step^2) increments.
MhResult mh_logbeta(double current_log_beta, double sigma2, const Matrix& residuals, const Grid& grid,
                    const LogBetaPrior& prior, double step, Rng& rng);

/// Systematic-scan sampler: states by FFBS, then sigma2_V, beta_V, sigma2_W, beta_W.
/// `initial` supplies grids, F, G, m0, C0 and the starting values of V and W.
PosteriorDraws run_sampler(const FdlmSpec& initial, const FunctionalSeries& data, const PriorSpec& prior,
                           const SamplerConfig& cfg);

struct SokalEstimate {
    double mcse;
    double tau_int;
    long window;
};

/// Integrated autocorrelation time tau = 1 + 2 sum_{k<=M} rho_k with the smallest window M >= c tau(M);
/// mcse = sd * sqrt(tau / N).
SokalEstimate sokal_mcse(std::span<const double> chain, double window_constant = 6.0);

/// Type-7 (linear interpolation) empirical quantile of already sorted data.
double sorted_quantile(std::span<const double> sorted, double prob);

struct ParameterSummary {
    std::string name;
    double mean = 0.0;
    std::optional<SokalEstimate> sokal;  // empty for degenerate or too-short chains
    double q05 = 0.0;
    double q95 = 0.0;
    bool degenerate = false;
};

struct ChainSummary {
    std::array<ParameterSummary, 4> params;
    std::size_t draws = 0;
    std::size_t chains = 0;
    double acceptance_v = 0.0;
    double acceptance_w = 0.0;
};

ChainSummary summarize(const PosteriorDraws& draws);
/// Pools independent chains: quantiles over all draws, MCSE of the grand mean from per-chain MCSEs.
ChainSummary summarize(std::span<const PosteriorDraws> chains);

/// Estimate / MCSE / 90% interval rows, one column per parameter.
std::string format_summary_table(const ChainSummary& summary);

struct PosteriorBands {
    Matrix lower;   // (T + 1) x p
    Matrix median;
    Matrix upper;
};

PosteriorBands posterior_bands(std::span<const Matrix> state_draws, double level);

}  // namespace fdlm
