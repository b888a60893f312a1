#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fdlm/mcmc.hpp"

namespace fdlm::verify {

// Self-checks runnable from the CLI: recursions against the brute-force oracle,
// sampler building blocks against independent densities, and end-to-end recovery.

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// Filter, smoother, forecast and log-likelihood vs joint-Gaussian conditioning on random small models.
CheckResult oracle_equivalence(int instances = 100, std::uint64_t seed = 20131101);

/// Scalar local level with unit covariances and y_1 = 2.
CheckResult scalar_hand_example();

/// Nested dyadic restrictions of a 33-point grid: filtered covariances shrink and means settle as n grows.
CheckResult discretization_monotonicity();

/// FFBS sample moments vs smoother moments on a T = 2, d = 2 model.
CheckResult ffbs_moments(std::size_t draws = 50000, std::uint64_t seed = 7);

/// Closed-form sigma^2 full conditional vs prior x likelihood on a 50-point grid.
CheckResult conjugate_update(int instances = 20, std::uint64_t seed = 11);

/// Integrated autocorrelation time on iid and AR(1) chains.
CheckResult sokal_estimator(std::uint64_t seed = 3);

struct RecoveryOptions {
    std::size_t days = 300;
    std::size_t grid_size = 24;
    long iterations = 10000;
    long burn_in = 2000;
    long state_thin = 10;
    std::uint64_t data_seed = 2006;
    std::uint64_t chain_seed = 2010;
};

struct RecoveryResult {
    CheckResult recovery;
    CheckResult bands;
    ChainSummary summary;
};

/// Simulates from the local level model with the electricity-data posterior means as truth and refits.
RecoveryResult parameter_recovery(const RecoveryOptions& options = {});

/// Checks 1-6 (each runs in seconds).
std::vector<CheckResult> run_fast_suite();

/// Runs a check body, timing it and converting exceptions into failures.
CheckResult timed(const std::string& name, const std::function<bool(std::string&)>& body);

}  // namespace fdlm::verify
