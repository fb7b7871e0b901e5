#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qcw/circle.hpp"
#include "qcw/model.hpp"

namespace qcw {

// Finite-N samplers for the path measure with weight
//   exp{ int_0^beta [N P(m_N(t)) + h N m_N(t)] dt }
// over N independent transverse-field circles.

/// J = (1/2) log coth(lambda beta / n), the imaginary-time bond of the Trotter lattice.
/// DomainError at lambda = 0 where J is infinite.
double trotter_coupling(double lambda, double beta, int n_slices);

/// N x n Ising lattice, periodic in the slice direction, with Gibbs weight
/// exp{ sum_k (beta/n)[N P(S_k/N) + h S_k] + J sum_{i,k} s_{i,k} s_{i,k+1} }, S_k the slice sum.
class TrotterLattice {
public:
    /// Each spin's world line starts constant with a random sign.
    TrotterLattice(const ModelParams& params, int n_spins, int n_slices, Rng& rng);

    int n_spins() const { return n_spins_; }
    int n_slices() const { return n_slices_; }
    const ModelParams& params() const { return params_; }
    int spin(int i, int k) const { return spins_[index(i, k)]; }
    void set_spin(int i, int k, int s);
    int slice_sum(int k) const { return slice_sum_[static_cast<std::size_t>(k)]; }

    /// e^{-2J} = tanh(lambda beta / n): relative weight of an unlike time bond; 0 at lambda = 0.
    double bond_weight() const { return bond_weight_; }
    /// (beta/n)[N P(S/N) + h S] for slice sum S.
    double slice_log_weight(int slice_sum) const { return slice_table_[static_cast<std::size_t>(slice_sum + n_spins_)]; }
    /// log Gibbs weight change when s_{i,k} is flipped.
    double flip_log_ratio(int i, int k) const;
    /// qbar = (1/(n N)) sum_k S_k.
    double mean_magnetization() const;

private:
    std::size_t index(int i, int k) const { return static_cast<std::size_t>(i) * n_slices_ + k; }

    ModelParams params_;
    int n_spins_;
    int n_slices_;
    double bond_weight_;
    std::vector<std::int8_t> spins_;
    std::vector<int> slice_sum_;
    std::vector<double> slice_table_;
};

/// One Metropolis sweep over all N n sites in lexicographic order.
void trotter_sweep(TrotterLattice& lattice, Rng& rng);

/// Exact conditional redraw of spin i's whole world line (forward filter, backward sample on the ring).
void trotter_resample_worldline(TrotterLattice& lattice, int i, Rng& rng);

/// trotter_resample_worldline for i = 0..N-1.
void trotter_worldline_sweep(TrotterLattice& lattice, Rng& rng);

/// N continuous-time paths on S_beta.
struct PathEnsemble {
    std::vector<SpinPath> paths;
    double beta = 1.0;

    /// N constant paths with random signs.
    static PathEnsemble random(int n_spins, double beta, Rng& rng);
    double mean_magnetization() const;  ///< (1/(N beta)) sum_i int sigma_i
};

/// Field felt by circle i: h + (N/2)[P(mbar + 1/N) - P(mbar - 1/N)], mbar = (1/N) sum_{j != i} sigma_j.
PiecewiseField effective_field(const PathEnsemble& ens, int i, const ModelParams& params);

/// Draws a path for one transverse-field spin in a piecewise-constant longitudinal field.
/// Segment endpoints come from 2x2 transfer products, the interiors from uniformized bridges.
SpinPath sample_path_in_field(const PiecewiseField& b, double lambda, Rng& rng);

/// Replaces path i by an exact draw from its conditional law given the others.
void ct_resample_circle(PathEnsemble& ens, int i, const ModelParams& params, Rng& rng);

enum class Sampler { trotter, trotter_metropolis, ct };

struct McParams {
    long sweeps = 10000;
    /// Sweeps discarded before measuring; a negative value measures ten autocorrelation times on a pilot run.
    long burn_in = -1;
    std::uint64_t seed = 1;
    Sampler sampler = Sampler::trotter;
    int n_slices = 256;
};

struct Estimate {
    double mean = 0.0;
    double se = 0.0;

    friend bool operator==(const Estimate&, const Estimate&) = default;
};

struct McStats {
    Estimate q, abs_q, q2, q4;
    Estimate binder;  ///< 1 - <q^4> / (3 <q^2>^2), jackknife error over batches
    double tau_int = 0.0;  ///< integrated autocorrelation time of q^2, in sweeps
    double ess = 0.0;
    long samples = 0;
    long burn_in = 0;
    int batches = 0;

    friend bool operator==(const McStats&, const McStats&) = default;
};

inline constexpr int kBatches = 32;

/// Runs one chain. Deterministic in the seed.
McStats run_chain(const ModelParams& params, int n_spins, const McParams& mc);

/// Sokal-windowed integrated autocorrelation time of a series.
double integrated_autocorrelation_time(const std::vector<double>& x, double window_factor = 6.0);

struct BinderPoint {
    int n_spins = 0;
    double lambda = 0.0;
    Estimate binder;
};

struct BinderScan {
    std::vector<BinderPoint> points;
    /// Crossing of each consecutive pair of sizes, if its curves cross on the grid.
    std::vector<std::optional<double>> pair_crossings;
    std::optional<double> crossing;  ///< mean of the pair crossings
    double error = 0.0;              ///< parametric bootstrap standard deviation
    /// Intercept of the pair crossings fitted linearly in 1/sqrt(N_a N_b); the crossing of sizes
    /// N and 2N drifts as 1/N in a mean-field model. Needs two crossing pairs.
    std::optional<double> extrapolated;
    double extrapolated_error = 0.0;
};

/// Runs chains on lambda_grid x n_list at fixed beta and locates the crossing of the Binder curves.
/// `threads` workers; results do not depend on the thread count.
BinderScan binder_scan(double beta, const std::vector<double>& lambda_grid, const std::vector<int>& n_list,
                       const McParams& mc, int threads = 1, int bootstrap = 400);

/// Same scan along beta at fixed lambda; lambda = 0 is the classical model.
BinderScan binder_scan_beta(double lambda, const std::vector<double>& beta_grid, const std::vector<int>& n_list,
                            const McParams& mc, int threads = 1, int bootstrap = 400);

/// Zero of ub - ua by linear interpolation. Among several sign changes the steepest wins,
/// since far from criticality both curves sit on a plateau and only noise crosses.
std::optional<double> curve_crossing(const std::vector<double>& grid, const std::vector<double>& ua,
                                     const std::vector<double>& ub);

}  // namespace qcw
