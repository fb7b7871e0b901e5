#include "qcw/pimc.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <random>

#include <unsupported/Eigen/FFT>

#include "qcw/errors.hpp"
#include "qcw/parallel.hpp"
#include "qcw/transfer.hpp"

namespace qcw {

namespace {

constexpr long kMaxBridgeEvents = 100000;

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Uniform on the open interval (0, 1).
double open_uniform(Rng& rng) {
    for (;;) {
        const double u = uniform01(rng);
        if (u > 0.0) return u;
    }
}

void require_lattice_shape(int n_spins, int n_slices) {
    if (n_spins < 1) throw ParameterError("n_spins must be at least 1");
    if (n_slices < 2 || !std::has_single_bit(static_cast<unsigned>(n_slices)))
        throw ParameterError("n_slices must be a power of two, at least 2");
}

}  // namespace

double trotter_coupling(double lambda, double beta, int n_slices) {
    if (n_slices < 2) throw ParameterError("n_slices must be at least 2");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be positive and finite");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be nonnegative");
    if (lambda == 0.0) throw DomainError("lambda = 0 decouples the slices; the time coupling is infinite");
    return -0.5 * std::log(std::tanh(lambda * beta / n_slices));
}

// ---------------------------------------------------------------------------------------------
// Trotter lattice

TrotterLattice::TrotterLattice(const ModelParams& params, int n_spins, int n_slices, Rng& rng)
    : params_(params), n_spins_(n_spins), n_slices_(n_slices) {
    params_.validate();
    require_lattice_shape(n_spins, n_slices);
    bond_weight_ = std::tanh(params_.lambda * params_.beta / n_slices);
    spins_.resize(static_cast<std::size_t>(n_spins) * n_slices);
    slice_sum_.assign(static_cast<std::size_t>(n_slices), 0);
    for (int i = 0; i < n_spins; ++i) {
        const int s = uniform01(rng) < 0.5 ? 1 : -1;
        for (int k = 0; k < n_slices; ++k) {
            spins_[index(i, k)] = static_cast<std::int8_t>(s);
            slice_sum_[static_cast<std::size_t>(k)] += s;
        }
    }
    const double eps = params_.beta / n_slices;
    slice_table_.resize(static_cast<std::size_t>(2 * n_spins + 1));
    for (int s = -n_spins; s <= n_spins; ++s) {
        const double m = static_cast<double>(s) / n_spins;
        slice_table_[static_cast<std::size_t>(s + n_spins)] = eps * (n_spins * params_.p(m) + params_.h * s);
    }
}

void TrotterLattice::set_spin(int i, int k, int s) {
    if (s != 1 && s != -1) throw ParameterError("spin must be +1 or -1");
    auto& cell = spins_[index(i, k)];
    slice_sum_[static_cast<std::size_t>(k)] += s - cell;
    cell = static_cast<std::int8_t>(s);
}

double TrotterLattice::flip_log_ratio(int i, int k) const {
    const int s = spin(i, k);
    const int up = spin(i, (k + n_slices_ - 1) % n_slices_);
    const int down = spin(i, (k + 1) % n_slices_);
    const int sum = slice_sum(k);
    const double slice = slice_log_weight(sum - 2 * s) - slice_log_weight(sum);
    // Every unlike time bond carries a factor tanh(lambda beta / n) relative to a like one.
    const int unlike_change = s * (up + down);
    if (unlike_change == 0) return slice;
    if (bond_weight_ == 0.0)
        return unlike_change > 0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    return slice + unlike_change * std::log(bond_weight_);
}

double TrotterLattice::mean_magnetization() const {
    const long total = std::accumulate(slice_sum_.begin(), slice_sum_.end(), 0L);
    return static_cast<double>(total) / (static_cast<double>(n_slices_) * n_spins_);
}

void trotter_sweep(TrotterLattice& lattice, Rng& rng) {
    for (int i = 0; i < lattice.n_spins(); ++i) {
        for (int k = 0; k < lattice.n_slices(); ++k) {
            const double r = lattice.flip_log_ratio(i, k);
            if (r >= 0.0 || std::log(uniform01(rng)) < r) lattice.set_spin(i, k, -lattice.spin(i, k));
        }
    }
}

void trotter_resample_worldline(TrotterLattice& lattice, int i, Rng& rng) {
    const int n = lattice.n_slices();
    const double t = lattice.bond_weight();

    // Local field of slice k on spin i, as the probability of +1 in isolation.
    std::vector<std::array<double, 2>> phi(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const int rest = lattice.slice_sum(k) - lattice.spin(i, k);
        const double d = lattice.slice_log_weight(rest - 1) - lattice.slice_log_weight(rest + 1);
        const double p_up = 1.0 / (1.0 + std::exp(d));
        phi[static_cast<std::size_t>(k)] = {p_up, 1.0 - p_up};
    }
    const auto bond = [t](int a, int b) { return a == b ? 1.0 : t; };

    // For each value a of s_0: messages m_k(s) = sum over s_{k+1..n-1} of the chain weight
    // from slice k back around to s_0 = a, normalised per slice with the log norms accumulated.
    std::array<std::vector<std::array<double, 2>>, 2> msg;
    std::array<double, 2> log_weight{};
    for (int a = 0; a < 2; ++a) {
        auto& m = msg[static_cast<std::size_t>(a)];
        m.assign(static_cast<std::size_t>(n), {0.0, 0.0});
        double log_norm = 0.0;
        std::array<double, 2> next{};
        next[static_cast<std::size_t>(a)] = 1.0;
        for (int k = n - 1; k >= 1; --k) {
            std::array<double, 2> cur{};
            for (int s = 0; s < 2; ++s) {
                const double w = phi[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
                cur[static_cast<std::size_t>(s)] = w * (bond(s, 0) * next[0] + bond(s, 1) * next[1]);
            }
            const double z = cur[0] + cur[1];
            cur[0] /= z;
            cur[1] /= z;
            log_norm += std::log(z);
            m[static_cast<std::size_t>(k)] = cur;
            next = cur;
        }
        const double w0 = phi[0][static_cast<std::size_t>(a)] * (bond(a, 0) * next[0] + bond(a, 1) * next[1]);
        log_weight[static_cast<std::size_t>(a)] = w0 > 0.0 ? std::log(w0) + log_norm : -std::numeric_limits<double>::infinity();
    }

    const double p0 = 1.0 / (1.0 + std::exp(log_weight[1] - log_weight[0]));
    const int a = uniform01(rng) < p0 ? 0 : 1;
    const auto& m = msg[static_cast<std::size_t>(a)];
    int prev = a;
    lattice.set_spin(i, 0, index_spin(a));
    for (int k = 1; k < n; ++k) {
        const double w_up = bond(prev, 0) * m[static_cast<std::size_t>(k)][0];
        const double w_dn = bond(prev, 1) * m[static_cast<std::size_t>(k)][1];
        const int s = uniform01(rng) * (w_up + w_dn) < w_up ? 0 : 1;
        lattice.set_spin(i, k, index_spin(s));
        prev = s;
    }
}

void trotter_worldline_sweep(TrotterLattice& lattice, Rng& rng) {
    for (int i = 0; i < lattice.n_spins(); ++i) trotter_resample_worldline(lattice, i, rng);
}

// ---------------------------------------------------------------------------------------------
// Continuous time

PathEnsemble PathEnsemble::random(int n_spins, double beta, Rng& rng) {
    if (n_spins < 1) throw ParameterError("n_spins must be at least 1");
    PathEnsemble ens;
    ens.beta = beta;
    for (int i = 0; i < n_spins; ++i) ens.paths.push_back(SpinPath::constant(uniform01(rng) < 0.5 ? 1 : -1, beta));
    return ens;
}

double PathEnsemble::mean_magnetization() const {
    double total = 0.0;
    for (const auto& p : paths) total += time_integral(p);
    return total / (beta * static_cast<double>(paths.size()));
}

PiecewiseField effective_field(const PathEnsemble& ens, int i, const ModelParams& params) {
    const int n = static_cast<int>(ens.paths.size());
    if (i < 0 || i >= n) throw ParameterError("circle index out of range");
    int sum = 0;
    std::vector<std::pair<double, int>> events;
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const SpinPath& p = ens.paths[static_cast<std::size_t>(j)];
        if (p.beta() != ens.beta) throw ParameterError("paths must share beta");
        int s = p.initial_sign();
        sum += s;
        for (double t : p.jumps()) {
            events.emplace_back(t, -2 * s);
            s = -s;
        }
    }
    std::sort(events.begin(), events.end());

    const double half_n = 0.5 * n;
    const auto field = [&](int s) {
        const double mbar = static_cast<double>(s) / n;
        return params.h + half_n * (params.p(mbar + 1.0 / n) - params.p(mbar - 1.0 / n));
    };
    std::vector<double> breaks{0.0};
    std::vector<double> values{field(sum)};
    for (std::size_t e = 0; e < events.size();) {
        const double t = events[e].first;
        while (e < events.size() && events[e].first == t) sum += events[e++].second;
        const double v = field(sum);
        if (v == values.back()) continue;
        if (t == breaks.back()) {
            values.back() = v;
        } else {
            breaks.push_back(t);
            values.push_back(v);
        }
    }
    return PiecewiseField(std::move(breaks), std::move(values), ens.beta);
}

namespace {

struct BridgeScratch {
    std::vector<double> weights;
    std::vector<Mat2> powers;  // P^j, each rescaled to unit max entry
    std::vector<double> times;
};

// Two-state path on [start, start + d) from state a to state b (indices) in field value `field`,
// conditioned on the endpoints. Uniformization: exp(dG) = e^{-Omega d} sum_k (Omega d)^k / k! P^k
// with G = lambda X + b Z and P = I + G / Omega entrywise nonnegative for Omega >= |b|.
void fill_bridge(int a, int b, double start, double d, double lambda, double field, Rng& rng, BridgeScratch& sc,
                 std::vector<double>& jumps) {
    if (lambda == 0.0) return;
    const double omega = 2.0 * lambda + std::fabs(field);
    const double mu = omega * d;
    Mat2 p;
    p << 1.0 + field / omega, lambda / omega, lambda / omega, 1.0 - field / omega;

    // Event count weights w_k proportional to Poisson(k; mu) (P^k)_{ab}; the common factor
    // e^{-mu} and the scale of P^k are carried in logs.
    sc.weights.clear();
    sc.powers.clear();
    Mat2 pk = Mat2::Identity();
    double log_pk = 0.0;
    double total = 0.0;
    double log_pois = -mu;
    double log_ref = 0.0;
    for (long k = 0;; ++k) {
        if (k > kMaxBridgeEvents) throw NumericError("bridge event count exceeded its cap");
        sc.powers.push_back(pk);
        const double entry = pk(a, b);
        double w = 0.0;
        if (entry > 0.0) {
            const double lw = log_pois + log_pk + std::log(entry);
            if (total == 0.0) log_ref = lw;
            w = std::exp(lw - log_ref);
        }
        sc.weights.push_back(w);
        total += w;
        if (static_cast<double>(k) > mu && total > 0.0 && w < 1e-17 * total) break;
        pk = pk * p;
        const double scale = pk.cwiseAbs().maxCoeff();
        pk /= scale;
        log_pk += std::log(scale);
        log_pois += std::log(mu) - std::log(static_cast<double>(k + 1));
    }
    if (!(total > 0.0)) throw InvariantViolation("bridge endpoints have zero weight");

    double u = uniform01(rng) * total;
    std::size_t count = 0;
    while (count + 1 < sc.weights.size() && u >= sc.weights[count]) u -= sc.weights[count++];

    sc.times.resize(count);
    for (;;) {
        for (auto& t : sc.times) t = start + d * open_uniform(rng);
        std::sort(sc.times.begin(), sc.times.end());
        bool ok = true;
        for (std::size_t j = 0; j < count; ++j)
            if (!(sc.times[j] > start && sc.times[j] < start + d) || (j > 0 && sc.times[j] == sc.times[j - 1])) ok = false;
        if (ok) break;
    }

    int state = a;
    for (std::size_t l = 1; l <= count; ++l) {
        const Mat2& rest = sc.powers[count - l];
        const double w_up = p(state, 0) * rest(0, b);
        const double w_dn = p(state, 1) * rest(1, b);
        const int next = uniform01(rng) * (w_up + w_dn) < w_up ? 0 : 1;
        if (next != state) jumps.push_back(sc.times[l - 1]);
        state = next;
    }
    if (state != b) throw InvariantViolation("bridge did not reach its endpoint");
}

}  // namespace

SpinPath sample_path_in_field(const PiecewiseField& field, double lambda, Rng& rng) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be nonnegative");
    const std::size_t segs = field.size();
    const double beta = field.beta();

    std::vector<ScaledMat2> g(segs);
    for (std::size_t k = 0; k < segs; ++k) g[k] = propagator(field.length(k), lambda, field.values()[k]);

    // Backward messages for each value a of sigma(0): msg[a][k](s) proportional to the weight of
    // continuing from sigma(tau_k) = s to sigma(beta) = a.
    std::array<std::vector<std::array<double, 2>>, 2> msg;
    std::array<double, 2> log_weight{};
    for (int a = 0; a < 2; ++a) {
        auto& m = msg[static_cast<std::size_t>(a)];
        m.assign(segs + 1, {0.0, 0.0});
        m[segs][static_cast<std::size_t>(a)] = 1.0;
        double log_norm = 0.0;
        for (std::size_t k = segs; k-- > 0;) {
            std::array<double, 2> cur{};
            for (int s = 0; s < 2; ++s)
                cur[static_cast<std::size_t>(s)] = g[k].m(s, 0) * m[k + 1][0] + g[k].m(s, 1) * m[k + 1][1];
            const double z = std::max(cur[0], cur[1]);
            if (!(z > 0.0)) throw InvariantViolation("transfer message vanished");
            cur[0] /= z;
            cur[1] /= z;
            log_norm += std::log(z) + g[k].log_scale;
            m[k] = cur;
        }
        const double w = m[0][static_cast<std::size_t>(a)];
        log_weight[static_cast<std::size_t>(a)] = w > 0.0 ? std::log(w) + log_norm : -std::numeric_limits<double>::infinity();
    }

    const double p0 = 1.0 / (1.0 + std::exp(log_weight[1] - log_weight[0]));
    const int a = uniform01(rng) < p0 ? 0 : 1;
    const auto& m = msg[static_cast<std::size_t>(a)];

    BridgeScratch scratch;
    std::vector<double> jumps;
    int state = a;
    for (std::size_t k = 0; k < segs; ++k) {
        int next = a;
        if (k + 1 < segs) {
            const double w_up = g[k].m(state, 0) * m[k + 1][0];
            const double w_dn = g[k].m(state, 1) * m[k + 1][1];
            next = uniform01(rng) * (w_up + w_dn) < w_up ? 0 : 1;
        }
        fill_bridge(state, next, field.breakpoints()[k], field.length(k), lambda, field.values()[k], rng, scratch,
                    jumps);
        state = next;
    }
    return SpinPath(index_spin(a), std::move(jumps), beta);
}

void ct_resample_circle(PathEnsemble& ens, int i, const ModelParams& params, Rng& rng) {
    const PiecewiseField b = effective_field(ens, i, params);
    ens.paths[static_cast<std::size_t>(i)] = sample_path_in_field(b, params.lambda, rng);
}

// ---------------------------------------------------------------------------------------------
// Chains

double integrated_autocorrelation_time(const std::vector<double>& x, double window_factor) {
    const std::size_t n = x.size();
    if (n < 2) return 0.5;
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);

    // Autocovariance through a zero-padded FFT.
    const std::size_t len = std::bit_ceil(2 * n);
    std::vector<double> padded(len, 0.0);
    for (std::size_t i = 0; i < n; ++i) padded[i] = x[i] - mean;
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, padded);
    for (auto& c : spec) c = std::norm(c);
    std::vector<double> acov;
    fft.inv(acov, spec);
    if (!(acov[0] > 0.0)) return 0.5;

    double tau = 0.5;
    for (std::size_t w = 1; w < n; ++w) {
        tau += acov[w] / acov[0];
        if (static_cast<double>(w) >= window_factor * tau) break;
    }
    return std::max(tau, 0.5);
}

namespace {

class Chain {
public:
    Chain(const ModelParams& params, int n_spins, const McParams& mc, Rng& rng) : params_(params), sampler_(mc.sampler) {
        if (sampler_ == Sampler::ct) {
            ens_ = PathEnsemble::random(n_spins, params.beta, rng);
        } else {
            lattice_.emplace(params, n_spins, mc.n_slices, rng);
        }
    }

    void sweep(Rng& rng) {
        switch (sampler_) {
            case Sampler::trotter: trotter_worldline_sweep((*lattice_), rng); break;
            case Sampler::trotter_metropolis: trotter_sweep((*lattice_), rng); break;
            case Sampler::ct:
                for (int i = 0; i < static_cast<int>(ens_.paths.size()); ++i) ct_resample_circle(ens_, i, params_, rng);
                break;
        }
    }

    double q() const { return sampler_ == Sampler::ct ? ens_.mean_magnetization() : (*lattice_).mean_magnetization(); }

private:
    ModelParams params_;
    Sampler sampler_;
    std::optional<TrotterLattice> lattice_;
    PathEnsemble ens_;
};

Estimate batch_estimate(const std::vector<double>& x, std::size_t batch) {
    Estimate e;
    const std::size_t n = x.size();
    e.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (int b = 0; b < kBatches; ++b) {
        const auto first = x.begin() + static_cast<std::ptrdiff_t>(b * batch);
        const double m = std::accumulate(first, first + static_cast<std::ptrdiff_t>(batch), 0.0) / static_cast<double>(batch);
        ss += (m - e.mean) * (m - e.mean);
    }
    e.se = std::sqrt(ss / (kBatches * (kBatches - 1.0)));
    return e;
}

double binder_value(double q2, double q4) { return q2 > 0.0 ? 1.0 - q4 / (3.0 * q2 * q2) : 0.0; }

}  // namespace

McStats run_chain(const ModelParams& params, int n_spins, const McParams& mc) {
    params.validate();
    if (mc.sampler != Sampler::ct) require_lattice_shape(n_spins, mc.n_slices);
    if (n_spins < 1) throw ParameterError("n_spins must be at least 1");
    if (mc.sweeps <= 0) throw ParameterError("sweeps must be positive");
    if (mc.burn_in >= mc.sweeps) throw ParameterError("burn_in must be smaller than sweeps");
    if (mc.burn_in >= 0 && mc.sweeps - mc.burn_in < kBatches)
        throw ParameterError("too few post-burn-in sweeps for 32 batches");

    Rng rng(mc.seed);
    Chain chain(params, n_spins, mc, rng);

    long burn = mc.burn_in;
    long done = 0;
    if (burn < 0) {
        const long pilot = std::max(1L, mc.sweeps / 10);
        std::vector<double> q2(static_cast<std::size_t>(pilot));
        for (auto& v : q2) {
            chain.sweep(rng);
            v = chain.q() * chain.q();
        }
        done = pilot;
        const double tau = integrated_autocorrelation_time(q2);
        burn = std::max(pilot, static_cast<long>(std::ceil(10.0 * tau)));
        if (mc.sweeps - burn < kBatches) throw ParameterError("too few post-burn-in sweeps for 32 batches");
    }
    for (; done < burn; ++done) chain.sweep(rng);

    const long measured = mc.sweeps - burn;
    const std::size_t batch = static_cast<std::size_t>(measured / kBatches);
    const std::size_t used = batch * kBatches;
    // The remainder of the division is discarded as extra burn-in.
    for (long r = 0; r < measured - static_cast<long>(used); ++r) chain.sweep(rng);

    std::vector<double> q(used), aq(used), q2(used), q4(used);
    for (std::size_t s = 0; s < used; ++s) {
        chain.sweep(rng);
        const double v = chain.q();
        q[s] = v;
        aq[s] = std::fabs(v);
        q2[s] = v * v;
        q4[s] = q2[s] * q2[s];
    }

    McStats st;
    st.samples = static_cast<long>(used);
    st.burn_in = mc.sweeps - st.samples;
    st.batches = kBatches;
    st.q = batch_estimate(q, batch);
    st.abs_q = batch_estimate(aq, batch);
    st.q2 = batch_estimate(q2, batch);
    st.q4 = batch_estimate(q4, batch);
    st.tau_int = integrated_autocorrelation_time(q2);
    st.ess = static_cast<double>(used) / (2.0 * st.tau_int);

    // Jackknife over batches for the nonlinear Binder ratio.
    st.binder.mean = binder_value(st.q2.mean, st.q4.mean);
    const double total2 = st.q2.mean * static_cast<double>(used);
    const double total4 = st.q4.mean * static_cast<double>(used);
    double ss = 0.0;
    for (int b = 0; b < kBatches; ++b) {
        const auto off = static_cast<std::ptrdiff_t>(b * batch);
        const auto len = static_cast<std::ptrdiff_t>(batch);
        const double s2 = std::accumulate(q2.begin() + off, q2.begin() + off + len, 0.0);
        const double s4 = std::accumulate(q4.begin() + off, q4.begin() + off + len, 0.0);
        const double rest = static_cast<double>(used - batch);
        const double u = binder_value((total2 - s2) / rest, (total4 - s4) / rest);
        ss += (u - st.binder.mean) * (u - st.binder.mean);
    }
    st.binder.se = std::sqrt((kBatches - 1.0) / kBatches * ss);
    return st;
}

// ---------------------------------------------------------------------------------------------
// Binder scans

std::optional<double> curve_crossing(const std::vector<double>& grid, const std::vector<double>& ua,
                                     const std::vector<double>& ub) {
    if (grid.size() != ua.size() || grid.size() != ub.size()) throw ParameterError("curve sizes differ from the grid");
    std::optional<double> best;
    double steepest = -1.0;
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
        const double d0 = ub[j] - ua[j];
        const double d1 = ub[j + 1] - ua[j + 1];
        if (!((d0 > 0.0 && d1 <= 0.0) || (d0 < 0.0 && d1 >= 0.0))) continue;
        const double slope = std::fabs(d1 - d0);
        if (slope > steepest) {
            steepest = slope;
            best = grid[j] + (grid[j + 1] - grid[j]) * d0 / (d0 - d1);
        }
    }
    return best;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct CrossingEstimate {
    std::optional<double> mean;
    std::optional<double> extrapolated;
};

CrossingEstimate estimate_crossing(const std::vector<double>& grid, const std::vector<std::vector<double>>& curves,
                                   const std::vector<int>& n_list, std::vector<std::optional<double>>* pairs) {
    std::vector<double> x, c;
    for (std::size_t a = 0; a + 1 < curves.size(); ++a) {
        const auto cross = curve_crossing(grid, curves[a], curves[a + 1]);
        if (pairs) pairs->push_back(cross);
        if (!cross) continue;
        x.push_back(1.0 / std::sqrt(static_cast<double>(n_list[a]) * n_list[a + 1]));
        c.push_back(*cross);
    }
    CrossingEstimate out;
    if (c.empty()) return out;
    const double k = static_cast<double>(c.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / k;
    const double mc = std::accumulate(c.begin(), c.end(), 0.0) / k;
    out.mean = mc;
    double sxx = 0.0, sxc = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        sxx += (x[j] - mx) * (x[j] - mx);
        sxc += (x[j] - mx) * (c[j] - mc);
    }
    if (c.size() >= 2 && sxx > 0.0) out.extrapolated = mc - sxc / sxx * mx;
    return out;
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double e : v) ss += (e - m) * (e - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

BinderScan scan(const std::vector<ModelParams>& grid_params, const std::vector<double>& grid,
                const std::vector<int>& n_list, const McParams& mc, int threads, int bootstrap) {
    if (grid.size() < 2) throw ParameterError("scan grid needs at least two points");
    if (!std::is_sorted(grid.begin(), grid.end())) throw ParameterError("scan grid must be increasing");
    if (n_list.size() < 2) throw ParameterError("scan needs at least two sizes");

    const std::size_t ng = grid.size();
    BinderScan out;
    out.points.resize(n_list.size() * ng);
    parallel_for(out.points.size(), threads, [&](std::size_t task) {
        const std::size_t a = task / ng, j = task % ng;
        McParams local = mc;
        local.seed = splitmix64(mc.seed ^ splitmix64((static_cast<std::uint64_t>(n_list[a]) << 32) | j));
        const McStats st = run_chain(grid_params[j], n_list[a], local);
        out.points[task] = {n_list[a], grid[j], st.binder};
    });

    std::vector<std::vector<double>> curves(n_list.size(), std::vector<double>(ng));
    for (std::size_t t = 0; t < out.points.size(); ++t) curves[t / ng][t % ng] = out.points[t].binder.mean;
    const CrossingEstimate est = estimate_crossing(grid, curves, n_list, &out.pair_crossings);
    out.crossing = est.mean;
    out.extrapolated = est.extrapolated;

    if (out.crossing && bootstrap > 1) {
        Rng rng(splitmix64(mc.seed));
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> means, extrapolations;
        auto sample = curves;
        for (int r = 0; r < bootstrap; ++r) {
            for (std::size_t t = 0; t < out.points.size(); ++t)
                sample[t / ng][t % ng] = out.points[t].binder.mean + out.points[t].binder.se * gauss(rng);
            const CrossingEstimate rep = estimate_crossing(grid, sample, n_list, nullptr);
            if (rep.mean) means.push_back(*rep.mean);
            if (rep.extrapolated) extrapolations.push_back(*rep.extrapolated);
        }
        out.error = sample_sd(means);
        out.extrapolated_error = sample_sd(extrapolations);
    }
    return out;
}

}  // namespace

BinderScan binder_scan(double beta, const std::vector<double>& lambda_grid, const std::vector<int>& n_list,
                       const McParams& mc, int threads, int bootstrap) {
    std::vector<ModelParams> ps;
    for (double l : lambda_grid) {
        ModelParams p;
        p.beta = beta;
        p.lambda = l;
        ps.push_back(p);
    }
    return scan(ps, lambda_grid, n_list, mc, threads, bootstrap);
}

BinderScan binder_scan_beta(double lambda, const std::vector<double>& beta_grid, const std::vector<int>& n_list,
                            const McParams& mc, int threads, int bootstrap) {
    std::vector<ModelParams> ps;
    for (double b : beta_grid) {
        ModelParams p;
        p.beta = b;
        p.lambda = lambda;
        ps.push_back(p);
    }
    return scan(ps, beta_grid, n_list, mc, threads, bootstrap);
}

}  // namespace qcw
