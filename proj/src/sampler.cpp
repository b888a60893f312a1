#include <cmath>
#include <limits>

#include "fdlm/mcmc.hpp"

namespace fdlm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void require_positive(double value, const char* field) {
    if (!std::isfinite(value) || value <= 0.0) throw ParameterDomainError(std::string(field) + " must be positive");
}

}  // namespace

double InverseGamma::log_pdf(double x) const {
    if (x <= 0.0) return -std::numeric_limits<double>::infinity();
    return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

double InverseGamma::draw(Rng& rng) const {
    std::gamma_distribution<double> gamma(shape, 1.0 / rate);
    return 1.0 / gamma(rng);
}

void PriorSpec::validate() const {
    require_positive(ig_shape_v, "prior.ig_shape_v");
    require_positive(ig_rate_v, "prior.ig_rate_v");
    require_positive(ig_shape_w, "prior.ig_shape_w");
    require_positive(ig_rate_w, "prior.ig_rate_w");
    require_positive(logbeta_sd_v, "prior.logbeta_sd_v");
    require_positive(logbeta_sd_w, "prior.logbeta_sd_w");
    if (!std::isfinite(logbeta_mean_v)) throw ParameterDomainError("prior.logbeta_mean_v must be finite");
    if (!std::isfinite(logbeta_mean_w)) throw ParameterDomainError("prior.logbeta_mean_w must be finite");
}

void SamplerConfig::validate() const {
    if (burn_in < 0) throw ParameterDomainError("sampler.burn_in must be nonnegative");
    if (iterations <= burn_in)
        throw ParameterDomainError("sampler.iterations must exceed sampler.burn_in (no draws would be kept)");
    if (thin < 1) throw ParameterDomainError("sampler.thin must be at least 1");
    if (state_thin < 1) throw ParameterDomainError("sampler.state_thin must be at least 1");
    require_positive(mh_step_v, "sampler.mh_step_v");
    require_positive(mh_step_w, "sampler.mh_step_w");
}

ResidualStats residual_stats(const Matrix& residuals, double beta, const Grid& grid) {
    if (static_cast<std::size_t>(residuals.cols()) != grid.size())
        throw DimensionError("residual width differs from grid size");
    ResidualStats stats;
    stats.count = residuals.rows();
    stats.dim = residuals.cols();
    if (stats.count == 0) return stats;
    const CholeskyFactor chol = safe_cholesky(ou_correlation(beta, grid));
    Matrix z = residuals.transpose();
    chol.solve_lower_in_place(z);
    stats.quad_sum = z.squaredNorm();
    stats.log_det_corr = chol.log_determinant();
    return stats;
}

double ou_residual_loglik(const ResidualStats& stats, double sigma2, double beta) {
    if (stats.count == 0) return 0.0;
    const double scale = sigma2 / (2.0 * beta);
    const auto T = static_cast<double>(stats.count);
    const auto d = static_cast<double>(stats.dim);
    return -0.5 * (T * d * (kLog2Pi + std::log(scale)) + T * stats.log_det_corr + stats.quad_sum / scale);
}

double ou_residual_loglik(const Matrix& residuals, const OuParams& p, const Grid& grid) {
    return ou_residual_loglik(residual_stats(residuals, p.beta(), grid), p.sigma2(), p.beta());
}

InverseGamma sigma2_full_conditional(const Matrix& residuals, double beta, const Grid& grid, double shape,
                                     double rate) {
    require_positive(beta, "beta");
    require_positive(shape, "inverse-gamma shape");
    require_positive(rate, "inverse-gamma rate");
    const ResidualStats stats = residual_stats(residuals, beta, grid);
    return {shape + 0.5 * static_cast<double>(stats.count * stats.dim), rate + beta * stats.quad_sum};
}

double gibbs_sigma2(const Matrix& residuals, double beta, const Grid& grid, double shape, double rate, Rng& rng) {
    return sigma2_full_conditional(residuals, beta, grid, shape, rate).draw(rng);
}

double logbeta_log_target(double log_beta, double sigma2, const Matrix& residuals, const Grid& grid,
                          const LogBetaPrior& prior) {
    const double beta = std::exp(log_beta);
    if (!std::isfinite(beta) || beta <= 0.0) return -std::numeric_limits<double>::infinity();
    double loglik = 0.0;
    try {
        loglik = ou_residual_loglik(residual_stats(residuals, beta, grid), sigma2, beta);
    } catch (const SingularMatrixError&) {
        return -std::numeric_limits<double>::infinity();
    }
    const double z = (log_beta - prior.mean) / prior.sd;
    return loglik - 0.5 * z * z;
}

bool metropolis_accept(double log_ratio, Rng& rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double u = uniform(rng);
    if (std::isnan(log_ratio)) return false;
    return std::log(u) < log_ratio;
}

MhResult mh_logbeta(double current_log_beta, double sigma2, const Matrix& residuals, const Grid& grid,
                    const LogBetaPrior& prior, double step, Rng& rng) {
    require_positive(step, "MH step");
    std::normal_distribution<double> normal(0.0, 1.0);
    const double proposal = current_log_beta + step * normal(rng);
    const double log_ratio = logbeta_log_target(proposal, sigma2, residuals, grid, prior) -
                             logbeta_log_target(current_log_beta, sigma2, residuals, grid, prior);
    if (metropolis_accept(log_ratio, rng)) return {proposal, true};
    return {current_log_beta, false};
}

PosteriorDraws run_sampler(const FdlmSpec& initial, const FunctionalSeries& data, const PriorSpec& prior,
                           const SamplerConfig& cfg) {
    prior.validate();
    cfg.validate();
    initial.validate();
    if (data.length() < 1) throw DimensionError("run_sampler: empty data");
    if (!(data.grid() == initial.obs_grid)) throw GridMismatchError("run_sampler: data grid differs from observation grid");

    ModelMatrices model = ModelMatrices::from_spec(initial);
    const Matrix& y = data.curves();
    const Eigen::Index T = y.rows();

    double sigma2_v = initial.v.sigma2();
    double log_beta_v = initial.v.log_beta();
    double sigma2_w = initial.w.sigma2();
    double log_beta_w = initial.w.log_beta();

    PosteriorDraws out;
    const long kept = cfg.kept();
    out.draws.resize(kept, 4);
    out.iterations.reserve(static_cast<std::size_t>(kept));
    if (cfg.save_states) out.state_draws.reserve(static_cast<std::size_t>((kept + cfg.state_thin - 1) / cfg.state_thin));

    Rng rng(cfg.seed);
    long accepted_v = 0;
    long accepted_w = 0;
    long row = 0;

    for (long iter = 0; iter < cfg.iterations; ++iter) {
        const char* step = "ffbs";
        try {
            model.V = gram_matrix(OuParams(sigma2_v, std::exp(log_beta_v)), initial.obs_grid);
            model.W = gram_matrix(OuParams(sigma2_w, std::exp(log_beta_w)), initial.state_grid);
            const FilterOutput filtered = filter(model, y);
            const Matrix states = ffbs(model, filtered, rng);

            const auto current = states.bottomRows(T);
            const auto previous = states.topRows(T);

            if (cfg.update_v) {
                const Matrix obs_resid = y - current * model.F.transpose();
                step = "sigma2_v";
                sigma2_v = gibbs_sigma2(obs_resid, std::exp(log_beta_v), initial.obs_grid, prior.ig_shape_v,
                                        prior.ig_rate_v, rng);
                step = "beta_v";
                const MhResult mh = mh_logbeta(log_beta_v, sigma2_v, obs_resid, initial.obs_grid,
                                               {prior.logbeta_mean_v, prior.logbeta_sd_v}, cfg.mh_step_v, rng);
                log_beta_v = mh.log_beta;
                accepted_v += mh.accepted ? 1 : 0;
            }
            if (cfg.update_w) {
                const Matrix increments = current - previous * model.G.transpose();
                step = "sigma2_w";
                sigma2_w = gibbs_sigma2(increments, std::exp(log_beta_w), initial.state_grid, prior.ig_shape_w,
                                        prior.ig_rate_w, rng);
                step = "beta_w";
                const MhResult mh = mh_logbeta(log_beta_w, sigma2_w, increments, initial.state_grid,
                                               {prior.logbeta_mean_w, prior.logbeta_sd_w}, cfg.mh_step_w, rng);
                log_beta_w = mh.log_beta;
                accepted_w += mh.accepted ? 1 : 0;
            }

            if (iter >= cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0) {
                out.draws.row(row) << sigma2_v, log_beta_v, sigma2_w, log_beta_w;
                out.iterations.push_back(iter);
                if (cfg.save_states && row % cfg.state_thin == 0) out.state_draws.push_back(states);
                ++row;
            }
        } catch (const Error& e) {
            throw SamplerError(iter, step, e.what());
        }
    }

    const auto n = static_cast<double>(cfg.iterations);
    out.acceptance_v = cfg.update_v ? static_cast<double>(accepted_v) / n : 0.0;
    out.acceptance_w = cfg.update_w ? static_cast<double>(accepted_w) / n : 0.0;
    return out;
}

}  // namespace fdlm
