#pragma once

#include <ricci/mesh.hpp>

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>

namespace ricci {

/// One generalized eigenpair S u = lambda M u with u M-normalized.
struct EigenPair
{
    double value = 0.0;
    Eigen::VectorXd vector;
    double residual = 0.0; ///< ||S u - lambda M u|| / ||M u||
};

struct SpectrumOptions
{
    double tol = 1e-9;
    int max_iterations = 10'000; ///< cap on block applications of the shift-invert operator
    /// Restrict to the M-orthogonal complement of the constants (the lambda = 0 mode).
    bool deflate_constants = true;
    std::uint64_t seed = 0x5eed'1a2c'05ULL;
    int guard_vectors = 2; ///< extra Ritz vectors carried beyond the k requested
};

/// Result of continuing eigenpairs across a small change of the mass matrix.
struct TrackedPairs
{
    std::vector<EigenPair> pairs;    ///< branch order: pairs[i] continues prev[i]
    std::vector<int> sorted_rank;    ///< position of pairs[i] in the ascending spectrum
    std::vector<double> overlap;     ///< |prev_i^T M new_i|
    bool branch_ambiguity = false;   ///< some overlap fell below kBranchOverlapFloor

    std::vector<double> values() const;
};

inline constexpr double kBranchOverlapFloor = 0.5;

///
/// Smallest eigenpairs of the pencil (S, M) for a fixed stiffness S and a diagonal
/// mass M supplied per solve.
///
/// S is factorized once at construction (with one vertex pinned when the constants
/// are deflated), so repeated solves along a flow reuse the factorization. Each solve
/// runs a restarted block Krylov iteration on the shift-invert operator S^+ M in the
/// M-inner product, followed by Rayleigh-Ritz on S.
///
class LaplaceSpectrum
{
public:
    explicit LaplaceSpectrum(const SparseMatrix& stiffness, SpectrumOptions options = {});
    ~LaplaceSpectrum();
    LaplaceSpectrum(LaplaceSpectrum&&) noexcept;
    LaplaceSpectrum& operator=(LaplaceSpectrum&&) noexcept;

    const SpectrumOptions& options() const noexcept { return options_; }

    /// k smallest (nonzero, when deflating) eigenpairs in ascending order.
    std::vector<EigenPair> smallest(const Eigen::VectorXd& mass, int k) const;

    /// Warm-started solve that matches each previous pair to its continuation by
    /// maximal M-overlap; vectors are sign-aligned with their predecessors.
    TrackedPairs track(const std::vector<EigenPair>& prev, const Eigen::VectorXd& mass) const;

private:
    std::vector<EigenPair> solve(const Eigen::VectorXd& mass, int k, const std::vector<Eigen::VectorXd>& warm) const;

    struct Factorization;
    SparseMatrix stiffness_;
    SpectrumOptions options_;
    std::unique_ptr<Factorization> factor_;
};

std::vector<EigenPair> smallest_eigenpairs(const SparseMatrix& stiffness, const Eigen::VectorXd& mass, int k, double tol);

TrackedPairs track_eigenpairs(
    const std::vector<EigenPair>& prev,
    const SparseMatrix& stiffness,
    const Eigen::VectorXd& mass,
    double tol);

} // namespace ricci
