#pragma once

#include <cstdint>

#include "qcw/circle.hpp"

namespace qcw {

// Random-cluster (FK) representation of one spin: punctures xi are Poisson(lambda) on S_beta
// reweighted by prod_j 2 cosh(h |I_j|) over the components I_j; spins are recovered by
// painting components independently.

/// Probability that the FK configuration has no punctures: e^{-lambda beta} cosh(h beta) / cosh(beta R).
double q_empty_probability(double lambda, double h, double beta);

/// Running counts of the rejection step, for reporting the acceptance rate.
struct FkSamplerStats {
    std::uint64_t proposals = 0;
    std::uint64_t accepted = 0;
    double acceptance_rate() const { return proposals == 0 ? 1.0 : static_cast<double>(accepted) / proposals; }
};

/// Exact draw from the zero-field FK measure.
PointSet sample_q_zero(double lambda, double beta, Rng& rng);

/// Exact draw from the FK measure at longitudinal field h (depends on |h| only).
/// Non-empty configurations come from zero-truncated Poisson(2 lambda beta) proposals accepted with
/// probability prod_j (1 + e^{-2|h||I_j|}) / 2.
PointSet sample_q_field(double lambda, double h, double beta, Rng& rng, FkSamplerStats* stats = nullptr);

/// Colours each component +1 with probability 1 / (1 + e^{-2 h |I|}). xi must not contain 0.
SpinPath paint(const PointSet& xi, double h, Rng& rng);

/// Draw from the one-spin path measure by sampling punctures and painting.
SpinPath sample_spin_path(double lambda, double h, double beta, Rng& rng);

struct DominationReport {
    bool dominated = true;
    /// max_n [F_Poisson(n) - F_empirical(n)] over total counts and counts in [0, beta/2).
    double statistic = 0.0;
    double threshold = 0.0;  ///< one-sided DKW bound sqrt(log(1/alpha) / (2 samples))
    int samples = 0;
    double mean_count = 0.0;
    double envelope_mean = 0.0;  ///< 2 lambda beta
    double acceptance_rate = 1.0;
};

/// Empirical check that FK puncture counts are stochastically below Poisson(2 lambda).
DominationReport domination_check(double lambda, double h, double beta, int samples, Rng& rng,
                                  double alpha = 0.01);

}  // namespace qcw
