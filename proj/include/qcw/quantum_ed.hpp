#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qcw/model.hpp"

namespace qcw {

// H_N = -N P(m_N) - lambda sum_i sigma^x_i - h sum_i sigma^z_i, m_N = (1/N) sum_i sigma^z_i.

inline constexpr int kMaxDenseSpins = 12;

/// Full 2^N x 2^N Hamiltonian in the sigma^z product basis. Bit i of a basis index set means spin i is down.
struct DenseHamiltonian {
    int n_spins = 0;
    ModelParams params;
    Eigen::MatrixXd matrix;
};

/// Throws CapacityError for n_spins outside [1, 12].
DenseHamiltonian build_dense(const ModelParams& params, int n_spins);

/// Observable for kms_expectation.
struct Observable {
    enum class Kind { mz_power, mx, custom_diagonal };
    Kind kind = Kind::mz_power;
    int power = 1;                  ///< for mz_power: m_N^power
    std::vector<double> diagonal;   ///< for custom_diagonal, one entry per basis state

    static Observable mz(int power = 1) { return {Kind::mz_power, power, {}}; }
    static Observable mx() { return {Kind::mx, 1, {}}; }
    static Observable custom(std::vector<double> d) { return {Kind::custom_diagonal, 1, std::move(d)}; }
};

/// Tr(A e^{-beta H}) / Tr(e^{-beta H}); beta = 0 gives the normalised trace.
double kms_expectation(const DenseHamiltonian& h, const Observable& a, double beta);

/// Distribution of m_N on the levels -1, -1 + 2/N, ..., 1 under the diagonal of the Gibbs state.
struct DiagPmf {
    std::vector<double> levels;
    std::vector<double> probs;
    /// Level of the largest probability among non-negative levels.
    double positive_mode() const;
};

DiagPmf diag_distribution(const DenseHamiltonian& h, double beta);

struct EdResult {
    double free_energy_density = 0.0;  ///< (beta N)^{-1} log Tr e^{-beta H}
    std::vector<double> mz_moments;    ///< <m_N^p> for p = 1..max_moment
    double mx_mean = 0.0;              ///< <(1/N) sum_i sigma^x_i>
    DiagPmf diag_pmf;
};

/// All EdResult fields from one dense diagonalisation.
EdResult dense_result(const DenseHamiltonian& h, double beta, int max_moment = 4);

/// log of the multiplicity of total spin j = twice_j / 2 among N spins one-half.
double log_spin_multiplicity(int n_spins, int twice_j);

/// sum_j d_{N,j} (2j + 1), computed in exact integer arithmetic (n_spins <= 62).
std::uint64_t block_dimension_total(int n_spins);

/// Tridiagonal block of H_N in the |j, m> basis, m = -j..j.
struct SpinBlock {
    int twice_j = 0;
    double log_multiplicity = 0.0;
    Eigen::VectorXd diagonal;
    Eigen::VectorXd off_diagonal;
};

std::vector<SpinBlock> spin_blocks(const ModelParams& params, int n_spins);

struct BlockOptions {
    /// Moments, mx and the diagonal pmf need eigenvectors; the free energy alone does not.
    bool observables = true;
    int max_moment = 4;
};

/// EdResult assembled from total-spin blocks. Works for any polynomial P since
/// N P(m_N) is a function of S_z alone.
EdResult block_free_energy(const ModelParams& params, int n_spins, BlockOptions opts = {});

/// <qbar^k>, k = 1..max_k, for qbar = (1/beta) int_0^beta m_N(t) dt in imaginary time, i.e.
/// k! Tr[ordered integrals of A e^{-tH} ...] / (Z (beta N)^k) with A = sum_i sigma^z_i.
std::vector<double> time_integrated_moments(const ModelParams& params, int n_spins, int max_k = 4);

}  // namespace qcw
