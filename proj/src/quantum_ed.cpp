#include "qcw/quantum_ed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <lapacke.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "qcw/errors.hpp"

namespace qcw {

namespace {

struct TridiagonalEigen {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

// MRRR (dstevr). Eigen's implicit QR runs out of iterations on large total-spin blocks, whose
// spectrum is full of tunnelling doublets split by far less than the rounding of the block scale.
TridiagonalEigen tridiagonal_eigen(const Eigen::VectorXd& diagonal, const Eigen::VectorXd& off_diagonal,
                                   bool vectors) {
    const lapack_int n = static_cast<lapack_int>(diagonal.size());
    Eigen::VectorXd d = diagonal;
    Eigen::VectorXd e(std::max<lapack_int>(n, 1));
    e.head(n - 1) = off_diagonal;
    TridiagonalEigen out;
    out.values.resize(n);
    if (vectors) out.vectors.resize(n, n);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    const lapack_int info =
        LAPACKE_dstevr(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'A', n, d.data(), e.data(), 0.0, 0.0, 0, 0, 0.0,
                       &found, out.values.data(), vectors ? out.vectors.data() : nullptr, std::max<lapack_int>(n, 1),
                       support.data());
    if (info != 0 || found != n) throw NumericError("tridiagonal eigensolver failed (info " + std::to_string(info) + ")");
    return out;
}

void require_beta(double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be finite and nonnegative");
}

int spin_sum(std::uint32_t state, int n) { return n - 2 * std::popcount(state); }

// Boltzmann weights relative to the ground state, and log Z.
struct Weights {
    Eigen::VectorXd w;
    double log_z = 0.0;
};

Weights boltzmann(const Eigen::VectorXd& energies, double beta) {
    const double e0 = energies.minCoeff();
    Weights out;
    out.w = (-beta * (energies.array() - e0)).exp().matrix();
    out.log_z = -beta * e0 + std::log(out.w.sum());
    return out;
}

double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

void add_pmf_levels(DiagPmf& pmf, int n) {
    pmf.levels.resize(static_cast<std::size_t>(n) + 1);
    pmf.probs.assign(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 0; k <= n; ++k) pmf.levels[static_cast<std::size_t>(k)] = (2.0 * k - n) / n;
}

}  // namespace

double DiagPmf::positive_mode() const {
    double best = -1.0, level = 0.0;
    for (std::size_t k = 0; k < levels.size(); ++k)
        if (levels[k] >= 0.0 && probs[k] > best) {
            best = probs[k];
            level = levels[k];
        }
    return level;
}

DenseHamiltonian build_dense(const ModelParams& params, int n_spins) {
    params.validate();
    if (n_spins < 1 || n_spins > kMaxDenseSpins) throw CapacityError("dense Hamiltonian supports 1 to 12 spins");
    const std::uint32_t dim = 1u << n_spins;
    DenseHamiltonian out{n_spins, params, Eigen::MatrixXd::Zero(dim, dim)};
    const double n = n_spins;
    for (std::uint32_t s = 0; s < dim; ++s) {
        const int sum = spin_sum(s, n_spins);
        out.matrix(s, s) = -n * params.p(sum / n) - params.h * sum;
        for (int i = 0; i < n_spins; ++i) out.matrix(s, s ^ (1u << i)) = -params.lambda;
    }
    return out;
}

namespace {

struct DenseSpectrum {
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;
};

DenseSpectrum diagonalize(const DenseHamiltonian& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.matrix);
    if (es.info() != Eigen::Success) throw NumericError("dense eigensolver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

// <k| sum_i sigma^x_i |k> for every eigenvector k.
Eigen::VectorXd x_diagonal(const DenseSpectrum& sp, int n) {
    const Eigen::Index dim = sp.vectors.rows();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(sp.vectors.cols());
    for (Eigen::Index s = 0; s < dim; ++s)
        for (int i = 0; i < n; ++i) {
            const Eigen::Index t = s ^ (Eigen::Index{1} << i);
            out += (sp.vectors.row(s).array() * sp.vectors.row(t).array()).matrix().transpose();
        }
    return out;
}

}  // namespace

double kms_expectation(const DenseHamiltonian& h, const Observable& a, double beta) {
    require_beta(beta);
    const DenseSpectrum sp = diagonalize(h);
    const Weights wt = boltzmann(sp.energies, beta);
    const double z = wt.w.sum();
    const Eigen::Index dim = h.matrix.rows();
    if (a.kind == Observable::Kind::mx) return x_diagonal(sp, h.n_spins).dot(wt.w) / z / h.n_spins;

    Eigen::VectorXd diag(dim);
    if (a.kind == Observable::Kind::custom_diagonal) {
        if (static_cast<Eigen::Index>(a.diagonal.size()) != dim)
            throw ParameterError("custom observable needs one entry per basis state");
        diag = Eigen::Map<const Eigen::VectorXd>(a.diagonal.data(), dim);
    } else {
        if (a.power < 0) throw ParameterError("mz power must be nonnegative");
        for (Eigen::Index s = 0; s < dim; ++s)
            diag(s) = std::pow(static_cast<double>(spin_sum(static_cast<std::uint32_t>(s), h.n_spins)) / h.n_spins,
                               a.power);
    }
    // Tr(A rho) = sum_k w_k <k|A|k> for diagonal A.
    const Eigen::VectorXd ak = sp.vectors.array().square().matrix().transpose() * diag;
    return ak.dot(wt.w) / z;
}

DiagPmf diag_distribution(const DenseHamiltonian& h, double beta) {
    require_beta(beta);
    const DenseSpectrum sp = diagonalize(h);
    const Weights wt = boltzmann(sp.energies, beta);
    const Eigen::VectorXd rho_diag = sp.vectors.array().square().matrix() * wt.w / wt.w.sum();
    DiagPmf pmf;
    add_pmf_levels(pmf, h.n_spins);
    for (Eigen::Index s = 0; s < rho_diag.size(); ++s)
        pmf.probs[static_cast<std::size_t>(h.n_spins - std::popcount(static_cast<std::uint32_t>(s)))] += rho_diag(s);
    return pmf;
}

EdResult dense_result(const DenseHamiltonian& h, double beta, int max_moment) {
    if (!(beta > 0.0)) throw ParameterError("free energy needs beta > 0");
    const DenseSpectrum sp = diagonalize(h);
    const Weights wt = boltzmann(sp.energies, beta);
    const double z = wt.w.sum();
    const int n = h.n_spins;
    EdResult out;
    out.free_energy_density = wt.log_z / (beta * n);
    const Eigen::VectorXd rho_diag = sp.vectors.array().square().matrix() * wt.w / z;
    add_pmf_levels(out.diag_pmf, n);
    for (Eigen::Index s = 0; s < rho_diag.size(); ++s)
        out.diag_pmf.probs[static_cast<std::size_t>(n - std::popcount(static_cast<std::uint32_t>(s)))] += rho_diag(s);
    out.mz_moments.assign(static_cast<std::size_t>(max_moment), 0.0);
    for (std::size_t k = 0; k < out.diag_pmf.levels.size(); ++k)
        for (int p = 1; p <= max_moment; ++p)
            out.mz_moments[static_cast<std::size_t>(p - 1)] += out.diag_pmf.probs[k] * std::pow(out.diag_pmf.levels[k], p);
    out.mx_mean = x_diagonal(sp, n).dot(wt.w) / z / n;
    return out;
}

double log_spin_multiplicity(int n_spins, int twice_j) {
    if (twice_j < 0 || twice_j > n_spins || (n_spins - twice_j) % 2 != 0)
        throw ParameterError("2j must have the parity of N and lie in [0, N]");
    const int a = (n_spins - twice_j) / 2;
    // C(N, a) - C(N, a - 1) = C(N, a) (2j + 1) / (N - a + 1).
    return log_binomial(n_spins, a) + std::log((twice_j + 1.0) / (n_spins - a + 1.0));
}

std::uint64_t block_dimension_total(int n_spins) {
    if (n_spins < 1 || n_spins > 62) throw CapacityError("exact dimension audit supports 1 to 62 spins");
    std::vector<std::uint64_t> binom(static_cast<std::size_t>(n_spins) + 1, 0);
    binom[0] = 1;
    for (int k = 1; k <= n_spins; ++k) binom[k] = binom[k - 1] * static_cast<std::uint64_t>(n_spins - k + 1) / k;
    std::uint64_t total = 0;
    for (int tj = n_spins % 2; tj <= n_spins; tj += 2) {
        const int a = (n_spins - tj) / 2;
        const std::uint64_t d = binom[a] - (a > 0 ? binom[a - 1] : 0);
        total += d * static_cast<std::uint64_t>(tj + 1);
    }
    return total;
}

std::vector<SpinBlock> spin_blocks(const ModelParams& params, int n_spins) {
    params.validate();
    if (n_spins < 1) throw ParameterError("need at least one spin");
    const double n = n_spins;
    std::vector<SpinBlock> blocks;
    for (int tj = n_spins % 2; tj <= n_spins; tj += 2) {
        SpinBlock b;
        b.twice_j = tj;
        b.log_multiplicity = log_spin_multiplicity(n_spins, tj);
        b.diagonal.resize(tj + 1);
        b.off_diagonal.resize(tj);
        const double j = tj / 2.0;
        for (int k = 0; k <= tj; ++k) {
            const int tm = 2 * k - tj;  // 2m, sum of sigma^z
            b.diagonal(k) = -n * params.p(tm / n) - params.h * tm;
            if (k < tj) {
                const double m = tm / 2.0;
                b.off_diagonal(k) = -params.lambda * std::sqrt(j * (j + 1.0) - m * (m + 1.0));
            }
        }
        blocks.push_back(std::move(b));
    }
    return blocks;
}

EdResult block_free_energy(const ModelParams& params, int n_spins, BlockOptions opts) {
    const auto blocks = spin_blocks(params, n_spins);
    const double beta = params.beta;
    const double n = n_spins;

    struct Solved {
        Eigen::VectorXd energies;
        Eigen::MatrixXd vectors;
    };
    std::vector<Solved> solved;
    solved.reserve(blocks.size());
    double e0 = std::numeric_limits<double>::infinity();
    for (const auto& b : blocks) {
        auto eig = tridiagonal_eigen(b.diagonal, b.off_diagonal, opts.observables);
        Solved s{std::move(eig.values), std::move(eig.vectors)};
        e0 = std::min(e0, s.energies.minCoeff());
        solved.push_back(std::move(s));
    }

    // log Z = -beta e0 + log sum_j d_j sum_k e^{-beta (E_jk - e0)}, with the multiplicities kept in logs.
    double max_log = -std::numeric_limits<double>::infinity();
    std::vector<Eigen::VectorXd> log_w(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        log_w[b] = (-beta * (solved[b].energies.array() - e0) + blocks[b].log_multiplicity).matrix();
        max_log = std::max(max_log, log_w[b].maxCoeff());
    }
    double z = 0.0;
    for (auto& lw : log_w) {
        lw = (lw.array() - max_log).exp().matrix();
        z += lw.sum();
    }
    EdResult out;
    out.free_energy_density = (-beta * e0 + max_log + std::log(z)) / (beta * n);
    if (!opts.observables) return out;

    add_pmf_levels(out.diag_pmf, n_spins);
    double x_sum = 0.0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const int tj = blocks[b].twice_j;
        const Eigen::MatrixXd& v = solved[b].vectors;
        const Eigen::VectorXd rho = v.array().square().matrix() * log_w[b] / z;
        for (int k = 0; k <= tj; ++k) out.diag_pmf.probs[static_cast<std::size_t>((2 * k - tj + n_spins) / 2)] += rho(k);
        // <sum sigma^x> = 2 <S_x> = sum_m 2 sqrt(j(j+1) - m(m+1)) v_m v_{m+1}.
        const double j = tj / 2.0;
        for (int k = 0; k < tj; ++k) {
            const double m = (2 * k - tj) / 2.0;
            const double coef = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
            x_sum += 2.0 * coef * (v.row(k).array() * v.row(k + 1).array()).matrix().dot(log_w[b]) / z;
        }
    }
    out.mx_mean = x_sum / n;
    out.mz_moments.assign(static_cast<std::size_t>(opts.max_moment), 0.0);
    for (std::size_t k = 0; k < out.diag_pmf.levels.size(); ++k)
        for (int p = 1; p <= opts.max_moment; ++p)
            out.mz_moments[static_cast<std::size_t>(p - 1)] += out.diag_pmf.probs[k] * std::pow(out.diag_pmf.levels[k], p);
    return out;
}

std::vector<double> time_integrated_moments(const ModelParams& params, int n_spins, int max_k) {
    if (max_k < 1) throw ParameterError("max_k must be at least 1");
    const auto blocks = spin_blocks(params, n_spins);
    const double beta = params.beta;

    double e0 = std::numeric_limits<double>::infinity();
    std::vector<Eigen::MatrixXd> hs;
    for (const auto& b : blocks) {
        const Eigen::Index d = b.diagonal.size();
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
        h.diagonal() = b.diagonal;
        for (Eigen::Index k = 0; k + 1 < d; ++k) h(k, k + 1) = h(k + 1, k) = b.off_diagonal(k);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
        e0 = std::min(e0, es.eigenvalues().minCoeff());
        hs.push_back(std::move(h));
    }

    // Van Loan: exp of the block upper-bidiagonal matrix with -beta(H - e0) on the diagonal and
    // beta A above it has the k-fold time-ordered integrals in its (0, k) block.
    double max_log = -std::numeric_limits<double>::infinity();
    for (const auto& b : blocks) max_log = std::max(max_log, b.log_multiplicity);
    std::vector<double> traces(static_cast<std::size_t>(max_k) + 1, 0.0);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const Eigen::Index d = hs[b].rows();
        Eigen::VectorXd a(d);
        for (Eigen::Index k = 0; k < d; ++k) a(k) = static_cast<double>(2 * k - blocks[b].twice_j);
        const Eigen::Index big = d * (max_k + 1);
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(big, big);
        const Eigen::MatrixXd diag_block = -beta * (hs[b] - e0 * Eigen::MatrixXd::Identity(d, d));
        for (int k = 0; k <= max_k; ++k) {
            m.block(k * d, k * d, d, d) = diag_block;
            if (k < max_k) m.block(k * d, (k + 1) * d, d, d).diagonal() = beta * a;
        }
        const Eigen::MatrixXd e = m.exp();
        const double weight = std::exp(blocks[b].log_multiplicity - max_log);
        for (int k = 0; k <= max_k; ++k) traces[static_cast<std::size_t>(k)] += weight * e.block(0, k * d, d, d).trace();
    }
    std::vector<double> out(static_cast<std::size_t>(max_k));
    double fact = 1.0;
    const double scale = beta * n_spins;
    for (int k = 1; k <= max_k; ++k) {
        fact *= k;
        out[static_cast<std::size_t>(k - 1)] = fact * traces[static_cast<std::size_t>(k)] / traces[0] / std::pow(scale, k);
    }
    return out;
}

}  // namespace qcw
