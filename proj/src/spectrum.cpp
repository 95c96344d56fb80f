#include <ricci/spectrum.hpp>

#include <ricci/errors.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <tuple>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>

namespace ricci {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Columns whose norm drops below this fraction during orthogonalization are discarded.
constexpr double kDependenceRatio = 1e-13;

double m_dot(const VectorXd& mass, const VectorXd& x, const VectorXd& y)
{
    return (x.array() * mass.array() * y.array()).sum();
}

void sign_normalize(VectorXd& x)
{
    const double scale = x.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (std::abs(x[i]) > 1e-3 * scale) {
            if (x[i] < 0) x = -x;
            return;
        }
    }
}

EigenPair make_pair(const SparseMatrix& stiffness, const VectorXd& mass, VectorXd x)
{
    x /= std::sqrt(m_dot(mass, x, x));
    const VectorXd sx = stiffness * x;
    const VectorXd mx = mass.cwiseProduct(x);
    EigenPair pair;
    pair.value = x.dot(sx);
    pair.residual = (sx - pair.value * mx).norm() / mx.norm();
    pair.vector = std::move(x);
    return pair;
}

} // namespace

std::vector<double> TrackedPairs::values() const
{
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(p.value);
    return out;
}

struct LaplaceSpectrum::Factorization
{
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    bool pinned = false;
};

LaplaceSpectrum::LaplaceSpectrum(const SparseMatrix& stiffness, SpectrumOptions options)
    : stiffness_(stiffness)
    , options_(options)
    , factor_(std::make_unique<Factorization>())
{
    if (stiffness.rows() != stiffness.cols()) throw DimensionMismatch("stiffness matrix must be square");
    if (!(options_.tol > 0.0)) throw Error("eigen tolerance must be positive");
    const Eigen::Index n = stiffness.rows();
    factor_->pinned = options_.deflate_constants;
    if (factor_->pinned) {
        // Pin vertex 0: the reduced matrix is definite on a connected mesh, and for a
        // right-hand side summing to zero the pinned solution solves the full system.
        std::vector<Eigen::Triplet<double>> reduced;
        reduced.reserve(static_cast<std::size_t>(stiffness.nonZeros()));
        for (Eigen::Index c = 1; c < n; ++c) {
            for (SparseMatrix::InnerIterator it(stiffness, c); it; ++it) {
                if (it.row() > 0) reduced.emplace_back(it.row() - 1, c - 1, it.value());
            }
        }
        SparseMatrix s_red(n - 1, n - 1);
        s_red.setFromTriplets(reduced.begin(), reduced.end());
        factor_->ldlt.compute(s_red);
    } else {
        factor_->ldlt.compute(stiffness);
    }
    if (factor_->ldlt.info() != Eigen::Success) {
        throw ConvergenceFailure(0, std::numeric_limits<double>::infinity(), "stiffness factorization failed");
    }
}

LaplaceSpectrum::~LaplaceSpectrum() = default;
LaplaceSpectrum::LaplaceSpectrum(LaplaceSpectrum&&) noexcept = default;
LaplaceSpectrum& LaplaceSpectrum::operator=(LaplaceSpectrum&&) noexcept = default;

std::vector<EigenPair> LaplaceSpectrum::smallest(const VectorXd& mass, int k) const
{
    auto pairs = solve(mass, k, {});
    for (auto& p : pairs) sign_normalize(p.vector);
    return pairs;
}

std::vector<EigenPair> LaplaceSpectrum::solve(const VectorXd& mass, int k, const std::vector<VectorXd>& warm) const
{
    const Eigen::Index n = stiffness_.rows();
    if (mass.size() != n) throw DimensionMismatch("mass has length " + std::to_string(mass.size()) + ", expected " + std::to_string(n));
    if ((mass.array() <= 0.0).any()) throw Error("mass matrix must be positive");
    const bool deflate = options_.deflate_constants;
    const Eigen::Index dim = n - (deflate ? 1 : 0);
    if (k < 1 || k > dim) throw Error("requested " + std::to_string(k) + " eigenpairs from a space of dimension " + std::to_string(dim));

    const Eigen::Index block = std::min<Eigen::Index>(k + options_.guard_vectors, dim);
    const Eigen::Index basis_cap = std::min<Eigen::Index>(dim, std::max<Eigen::Index>(6 * block, 48));
    const double mass_total = mass.sum();

    auto deflate_constants = [&](auto&& x) {
        if (deflate) x.array() -= x.dot(mass) / mass_total;
    };
    auto apply = [&](const VectorXd& v) {
        const VectorXd b = mass.cwiseProduct(v);
        VectorXd x(n);
        if (factor_->pinned) {
            x[0] = 0.0;
            x.tail(n - 1) = factor_->ldlt.solve(b.tail(n - 1));
        } else {
            x = factor_->ldlt.solve(b);
        }
        deflate_constants(x);
        return x;
    };

    // Appends the M-orthonormalized columns of `w` to `q` and returns how many survived.
    auto extend = [&](MatrixXd& q, Eigen::Index used, const MatrixXd& w) {
        Eigen::Index added = 0;
        for (Eigen::Index c = 0; c < w.cols() && used + added < q.cols(); ++c) {
            VectorXd x = w.col(c);
            const double start = std::sqrt(m_dot(mass, x, x));
            if (!(start > 0.0)) continue;
            for (int pass = 0; pass < 2; ++pass) {
                deflate_constants(x);
                const Eigen::Index m = used + added;
                if (m > 0) {
                    const VectorXd coeff = q.leftCols(m).transpose() * mass.cwiseProduct(x);
                    x -= q.leftCols(m) * coeff;
                }
            }
            const double norm = std::sqrt(m_dot(mass, x, x));
            if (norm <= kDependenceRatio * start) continue;
            q.col(used + added) = x / norm;
            ++added;
        }
        return added;
    };

    std::mt19937_64 rng(options_.seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    auto random_block = [&](Eigen::Index cols) {
        MatrixXd r(n, cols);
        for (Eigen::Index c = 0; c < cols; ++c)
            for (Eigen::Index i = 0; i < n; ++i) r(i, c) = uniform(rng);
        return r;
    };

    MatrixXd start(n, block);
    Eigen::Index filled = 0;
    for (const auto& w : warm) {
        if (filled == block) break;
        if (w.size() != n) throw DimensionMismatch("warm-start vector has wrong length");
        start.col(filled++) = w;
    }
    if (filled < block) start.rightCols(block - filled) = random_block(block - filled);

    int iterations = 0;
    double worst = std::numeric_limits<double>::infinity();
    MatrixXd q(n, basis_cap);
    while (true) {
        Eigen::Index used = extend(q, 0, start);
        for (int attempt = 0; used < block && attempt < 8; ++attempt) used += extend(q, used, random_block(block - used));

        Eigen::Index front = 0;
        Eigen::Index front_size = used;
        while (used < basis_cap && iterations < options_.max_iterations) {
            MatrixXd w(n, front_size);
            for (Eigen::Index c = 0; c < front_size; ++c) w.col(c) = apply(q.col(front + c));
            ++iterations;
            Eigen::Index added = extend(q, used, w);
            // Converged directions map back into the basis; keep expanding with fresh ones.
            if (added == 0) added = extend(q, used, random_block(front_size));
            if (added == 0) break;
            front = used;
            front_size = added;
            used += added;
        }

        const auto basis = q.leftCols(used);
        const MatrixXd sq = stiffness_ * basis;
        MatrixXd h = basis.transpose() * sq;
        h = 0.5 * (h + h.transpose()).eval();
        const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(h);
        if (eig.info() != Eigen::Success) throw ConvergenceFailure(iterations, worst, "Rayleigh-Ritz eigensolve failed");

        const Eigen::Index keep = std::min<Eigen::Index>(block, used);
        const MatrixXd ritz = basis * eig.eigenvectors().leftCols(keep);
        const MatrixXd s_ritz = sq * eig.eigenvectors().leftCols(keep);

        worst = 0.0;
        for (Eigen::Index c = 0; c < std::min<Eigen::Index>(k, keep); ++c) {
            const VectorXd mx = mass.cwiseProduct(ritz.col(c));
            const double res = (s_ritz.col(c) - eig.eigenvalues()[c] * mx).norm() / mx.norm();
            worst = std::max(worst, res);
        }
        if (keep >= k && worst <= options_.tol) {
            std::vector<EigenPair> out;
            out.reserve(static_cast<std::size_t>(k));
            for (Eigen::Index c = 0; c < k; ++c) out.push_back(make_pair(stiffness_, mass, ritz.col(c)));
            return out;
        }
        if (iterations >= options_.max_iterations || used >= dim) {
            throw ConvergenceFailure(
                iterations,
                worst,
                "eigen solve stalled after " + std::to_string(iterations) + " iterations (worst residual " +
                    std::to_string(worst) + ")");
        }
        start = ritz;
    }
}

TrackedPairs LaplaceSpectrum::track(const std::vector<EigenPair>& prev, const VectorXd& mass) const
{
    if (prev.empty()) throw Error("nothing to track");
    const int k = static_cast<int>(prev.size());
    const Eigen::Index dim = stiffness_.rows() - (options_.deflate_constants ? 1 : 0);
    const int candidates = static_cast<int>(std::min<Eigen::Index>(k + options_.guard_vectors, dim));

    std::vector<VectorXd> warm;
    warm.reserve(prev.size());
    for (const auto& p : prev) warm.push_back(p.vector);
    std::vector<EigenPair> fresh = solve(mass, candidates, warm);

    const auto nprev = static_cast<Eigen::Index>(prev.size());
    MatrixXd prev_block(mass.size(), nprev);
    for (Eigen::Index j = 0; j < nprev; ++j) prev_block.col(j) = prev[static_cast<std::size_t>(j)].vector;
    const MatrixXd m_prev = mass.asDiagonal() * prev_block;

    // Inside a numerically degenerate cluster the returned basis is arbitrary; rotate
    // it to line up with the previous vectors that live in the same eigenspace.
    const double cluster_gap = 0.5 * options_.tol;
    std::size_t begin = 0;
    while (begin < fresh.size()) {
        std::size_t end = begin + 1;
        while (end < fresh.size() && fresh[end].value - fresh[end - 1].value <= cluster_gap * std::max(1.0, std::abs(fresh[end].value))) ++end;
        const auto size = static_cast<Eigen::Index>(end - begin);
        if (size > 1) {
            MatrixXd span(mass.size(), size);
            for (Eigen::Index c = 0; c < size; ++c) span.col(c) = fresh[begin + static_cast<std::size_t>(c)].vector;
            const MatrixXd proj = span.transpose() * m_prev;
            std::vector<Eigen::Index> members;
            for (Eigen::Index j = 0; j < nprev; ++j) {
                if (proj.col(j).squaredNorm() > 0.5) members.push_back(j);
            }
            std::stable_sort(members.begin(), members.end(), [&](auto a, auto b) {
                return proj.col(a).squaredNorm() > proj.col(b).squaredNorm();
            });
            if (static_cast<Eigen::Index>(members.size()) > size) members.resize(static_cast<std::size_t>(size));
            if (!members.empty()) {
                const auto used = static_cast<Eigen::Index>(members.size());
                MatrixXd b(size, used);
                for (Eigen::Index c = 0; c < used; ++c) b.col(c) = proj.col(members[static_cast<std::size_t>(c)]);
                const Eigen::JacobiSVD<MatrixXd> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
                MatrixXd rotation(size, size);
                rotation.leftCols(used) = svd.matrixU().leftCols(used) * svd.matrixV().transpose();
                rotation.rightCols(size - used) = svd.matrixU().rightCols(size - used);
                const MatrixXd rotated = span * rotation;
                for (Eigen::Index c = 0; c < size; ++c) {
                    fresh[begin + static_cast<std::size_t>(c)] = make_pair(stiffness_, mass, rotated.col(c));
                }
            }
        }
        begin = end;
    }

    // Greedy assignment by decreasing overlap.
    std::vector<std::tuple<double, int, int>> scores;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < candidates; ++j) {
            scores.emplace_back(std::abs(m_prev.col(i).dot(fresh[static_cast<std::size_t>(j)].vector)), i, j);
        }
    }
    std::stable_sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });

    TrackedPairs out;
    out.pairs.resize(static_cast<std::size_t>(k));
    out.sorted_rank.assign(static_cast<std::size_t>(k), -1);
    out.overlap.assign(static_cast<std::size_t>(k), 0.0);
    std::vector<bool> taken(static_cast<std::size_t>(candidates), false);
    for (const auto& [score, i, j] : scores) {
        const auto ui = static_cast<std::size_t>(i);
        const auto uj = static_cast<std::size_t>(j);
        if (out.sorted_rank[ui] >= 0 || taken[uj]) continue;
        taken[uj] = true;
        out.sorted_rank[ui] = j;
        out.overlap[ui] = score;
        EigenPair pair = fresh[uj];
        if (m_prev.col(i).dot(pair.vector) < 0.0) pair.vector = -pair.vector;
        out.pairs[ui] = std::move(pair);
        if (score < kBranchOverlapFloor) out.branch_ambiguity = true;
    }
    // Ranks refer to the ascending order of the continued spectrum.
    std::vector<int> order(static_cast<std::size_t>(candidates));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return fresh[static_cast<std::size_t>(a)].value < fresh[static_cast<std::size_t>(b)].value;
    });
    std::vector<int> rank_of(static_cast<std::size_t>(candidates));
    for (int r = 0; r < candidates; ++r) rank_of[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;
    for (auto& r : out.sorted_rank) r = rank_of[static_cast<std::size_t>(r)];
    return out;
}

std::vector<EigenPair> smallest_eigenpairs(const SparseMatrix& stiffness, const VectorXd& mass, int k, double tol)
{
    SpectrumOptions options;
    options.tol = tol;
    return LaplaceSpectrum(stiffness, options).smallest(mass, k);
}

TrackedPairs track_eigenpairs(const std::vector<EigenPair>& prev, const SparseMatrix& stiffness, const VectorXd& mass, double tol)
{
    SpectrumOptions options;
    options.tol = tol;
    return LaplaceSpectrum(stiffness, options).track(prev, mass);
}

} // namespace ricci
