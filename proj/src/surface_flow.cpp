#include <ricci/surface_flow.hpp>

#include <ricci/bounds.hpp>
#include <ricci/spectrum.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace ricci {

namespace {

void check_state(const ConformalState& state)
{
    const double peak = state.u.cwiseAbs().maxCoeff();
    if (!(peak < kMaxConformalFactor)) {
        throw OverflowError("conformal factor reached |u| = " + std::to_string(peak) + " at t = " + std::to_string(state.t));
    }
}

/// Solves S x = b for b summing to zero, pinning vertex 0.
Eigen::VectorXd pinned_solve(const SparseMatrix& s, Eigen::VectorXd b)
{
    const Eigen::Index n = s.rows();
    b.array() -= b.mean();
    std::vector<Eigen::Triplet<double>> reduced;
    for (Eigen::Index c = 1; c < n; ++c) {
        for (SparseMatrix::InnerIterator it(s, c); it; ++it) {
            if (it.row() > 0) reduced.emplace_back(it.row() - 1, c - 1, it.value());
        }
    }
    SparseMatrix s_red(n - 1, n - 1);
    s_red.setFromTriplets(reduced.begin(), reduced.end());
    const Eigen::SimplicialLDLT<SparseMatrix> ldlt(s_red);
    if (ldlt.info() != Eigen::Success) throw ConvergenceFailure(0, INFINITY, "stiffness factorization failed");
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    x.tail(n - 1) = ldlt.solve(b.tail(n - 1));
    return x;
}

} // namespace

Eigen::VectorXd flow_rhs(const DiscreteOperators& ops, const ConformalState& state)
{
    const double r = mean_curvature_r(ops, state.u);
    return 0.5 * (r - curvature(ops, state.u).array()).matrix();
}

ConformalState step(const DiscreteOperators& ops, const ConformalState& state, double dt)
{
    if (!(dt > 0.0)) throw Error("time step must be positive");
    auto at = [&](const Eigen::VectorXd& du, double frac) { return ConformalState{state.u + frac * dt * du, state.t + frac * dt}; };
    const Eigen::VectorXd k1 = flow_rhs(ops, state);
    const double displacement = k1.cwiseAbs().maxCoeff() * dt;
    if (displacement > kStepDisplacementGuard) {
        throw StepRejected(
            displacement,
            "step rejected at t = " + std::to_string(state.t) + ": max|du/dt| dt = " + std::to_string(displacement) +
                " exceeds " + std::to_string(kStepDisplacementGuard) + "; reduce dt");
    }
    const Eigen::VectorXd k2 = flow_rhs(ops, at(k1, 0.5));
    const Eigen::VectorXd k3 = flow_rhs(ops, at(k2, 0.5));
    const Eigen::VectorXd k4 = flow_rhs(ops, at(k3, 1.0));
    ConformalState next{state.u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), state.t + dt};
    check_state(next);
    return next;
}

Eigen::VectorXd uniformizing_factor(const DiscreteOperators& ops, double tol)
{
    const Eigen::Index n = ops.size();
    const double base_area = ops.base_area();
    // 2 sum(defect) = 4 pi chi holds to rounding; use it rather than the integer chi.
    const double target = 2.0 * ops.angle_defect.sum() / base_area;
    const Eigen::VectorXd weighted_r0 = ops.base_curvature.cwiseProduct(ops.base_mass);

    if (ops.euler_characteristic == 0) {
        Eigen::VectorXd w = pinned_solve(ops.stiffness, -0.5 * weighted_r0);
        const double area = ops.base_mass.dot((2.0 * w).array().exp().matrix());
        w.array() += 0.5 * std::log(base_area / area);
        return w;
    }

    // Newton on F(w) = R0 A + 2 S w - c A e^{2w}.
    auto residual = [&](const Eigen::VectorXd& w) {
        return (weighted_r0 + 2.0 * (ops.stiffness * w) - target * ops.base_mass.cwiseProduct((2.0 * w).array().exp().matrix()))
            .eval();
    };
    auto curvature_gap = [&](const Eigen::VectorXd& w) { return (curvature(ops, w).array() - target).abs().maxCoeff(); };

    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd f = residual(w);
    const double scale = std::max(1.0, std::abs(target));
    constexpr int kMaxNewton = 50;
    for (int iter = 0; iter < kMaxNewton; ++iter) {
        if (curvature_gap(w) <= tol * scale) return w;
        SparseMatrix jac = 2.0 * ops.stiffness;
        const Eigen::VectorXd diag = 2.0 * target * ops.base_mass.cwiseProduct((2.0 * w).array().exp().matrix());
        for (Eigen::Index i = 0; i < n; ++i) jac.coeffRef(i, i) -= diag[i];
        Eigen::SparseLU<SparseMatrix> lu(jac);
        if (lu.info() != Eigen::Success) throw ConvergenceFailure(iter, curvature_gap(w), "uniformization Jacobian is singular");
        const Eigen::VectorXd delta = lu.solve(-f);
        double lambda = 1.0;
        const double f0 = f.norm();
        Eigen::VectorXd trial = w + delta;
        Eigen::VectorXd f_trial = residual(trial);
        while (f_trial.norm() > f0 && lambda > 1e-4) {
            lambda *= 0.5;
            trial = w + lambda * delta;
            f_trial = residual(trial);
        }
        w = std::move(trial);
        f = std::move(f_trial);
    }
    const double gap = curvature_gap(w);
    if (gap <= tol * scale) return w;
    throw ConvergenceFailure(kMaxNewton, gap, "uniformizing factor did not converge (curvature spread " + std::to_string(gap) + ")");
}

FlowTrace run_surface_flow(const TriangleMesh& mesh, const SurfaceFlowConfig& config)
{
    return run_surface_flow(mesh, assemble_operators(mesh), config);
}

FlowTrace run_surface_flow(const TriangleMesh& mesh, const DiscreteOperators& ops, const SurfaceFlowConfig& config)
{
    if (!(config.horizon > 0.0) || !(config.dt > 0.0) || config.stride < 1 || config.k < 1) {
        throw Error("surface flow needs horizon > 0, dt > 0, stride >= 1 and k >= 1");
    }
    ConformalState state{config.initial_u.size() == 0 ? Eigen::VectorXd::Zero(ops.size()) : config.initial_u, 0.0};
    if (state.u.size() != ops.size()) throw DimensionMismatch("initial conformal factor has wrong length");
    check_state(state);

    FlowTrace trace;
    TraceMeta& meta = trace.meta;
    meta.scenario = config.id;
    meta.geometry = config.geometry;
    meta.n = 2;
    meta.chi = ops.euler_characteristic;
    meta.h = mesh.mean_edge_length();
    meta.dt = config.dt;
    meta.horizon = config.horizon;

    const AreaAndMass start = area_and_mass(ops, state.u);
    const Eigen::VectorXd start_curvature = curvature(ops, state.u);
    const double area0 = start.total_area;
    meta.r0 = start_curvature.dot(start.mass) / area0;
    meta.rho0 = start_curvature.minCoeff();
    meta.delta0 = start_curvature.maxCoeff();
    const bool chi_zero = ops.euler_characteristic == 0;
    const double r0 = meta.r0;

    const double horizon = std::min({
        config.horizon,
        blowup_2d(meta.rho0, r0, chi_zero).value_or(INFINITY),
        blowup_2d(meta.delta0, r0, chi_zero).value_or(INFINITY),
    });
    if (horizon < config.horizon) meta.truncated_at = horizon;

    SpectrumOptions spec_options;
    spec_options.tol = config.eig_tol;
    const LaplaceSpectrum spectrum(ops.stiffness, spec_options);
    std::vector<EigenPair> pairs;
    CurvatureHistory history(2);

    auto record = [&](const ConformalState& s, const Eigen::VectorXd& mass, double area, const Eigen::VectorXd& curv) {
        FlowSample row;
        row.t = s.t;
        row.area = area;
        row.r = curv.dot(mass) / area;
        row.min_r = curv.minCoeff();
        row.max_r = curv.maxCoeff();

        const double area_drift = std::abs(area - area0) / area0;
        if (area_drift > config.conservation_tol) {
            throw ConservationViolation("area drifted by " + std::to_string(area_drift) + " (relative) at t = " + std::to_string(s.t));
        }
        const double r_drift = std::abs(row.r - r0);
        if (r_drift > config.conservation_tol * std::max(1.0, std::abs(r0))) {
            throw ConservationViolation("r drifted by " + std::to_string(r_drift) + " at t = " + std::to_string(s.t));
        }

        history.append(s.t, row.r);
        row.sigma = history.sigma().back();
        row.phi = phi_2d(meta.rho0, r0, chi_zero, s.t);
        row.psi = psi_2d(meta.delta0, r0, chi_zero, s.t);
        row.w_plus = weight_2d_plus(meta.rho0, r0, chi_zero, s.t);
        row.w_minus = weight_2d_minus(meta.delta0, r0, chi_zero, s.t);

        if (pairs.empty()) {
            pairs = spectrum.smallest(mass, config.k);
        } else {
            TrackedPairs tracked = spectrum.track(pairs, mass);
            meta.branch_ambiguity = meta.branch_ambiguity || tracked.branch_ambiguity;
            pairs = std::move(tracked.pairs);
        }
        for (const auto& p : pairs) {
            row.lambda.push_back(p.value);
            row.q_plus.push_back(row.w_plus * p.value);
            row.q_minus.push_back(row.w_minus * p.value);
        }
        trace.rows.push_back(std::move(row));
    };

    try {
        record(state, start.mass, area0, start_curvature);
        long steps = static_cast<long>(std::llround(config.horizon / config.dt));
        // Stay strictly before a blowup horizon.
        if (meta.truncated_at) steps = std::min(steps, static_cast<long>(std::ceil(horizon / config.dt)) - 1);
        for (long s = 1; s <= steps; ++s) {
            state = step(ops, state, config.dt);
            state.t = static_cast<double>(s) * config.dt;
            if (s % config.stride == 0 || s == steps) {
                const AreaAndMass am = area_and_mass(ops, state.u);
                record(state, am.mass, am.total_area, curvature(ops, state.u));
            }
        }
    } catch (const Error& e) {
        throw RunAborted(std::move(trace), std::current_exception(), e.what());
    }
    return trace;
}

} // namespace ricci
