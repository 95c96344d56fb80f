#include <ricci/errors.hpp>
#include <ricci/mesh.hpp>
#include <ricci/surface_flow.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace ricci;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd field(const TriangleMesh& m, const std::function<double(const Eigen::Vector3d&)>& f)
{
    Eigen::VectorXd u(m.num_vertices());
    for (int i = 0; i < m.num_vertices(); ++i) u[i] = f(m.vertices()[i]);
    return u;
}

} // namespace

TEST(FlowRhs, FlatTorusIsFixed)
{
    const DiscreteOperators ops = assemble_operators(torus_grid(12, 12, 2 * kPi, 2 * kPi));
    EXPECT_LE(flow_rhs(ops, {Eigen::VectorXd::Zero(ops.size()), 0.0}).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FlowRhs, RoundMetricIsFixed)
{
    const DiscreteOperators ops = assemble_operators(icosphere(3));
    const Eigen::VectorXd w = uniformizing_factor(ops);
    const Eigen::VectorXd r = curvature(ops, w);
    EXPECT_LE(r.maxCoeff() - r.minCoeff(), 1e-10);
    EXPECT_NEAR(area_and_mass(ops, w).total_area, ops.base_area(), 1e-12 * ops.base_area());
    EXPECT_LE(flow_rhs(ops, {w, 0.0}).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FlowRhs, TorusUniformizationIsFlat)
{
    const TriangleMesh m = torus_grid(10, 14, 2.0, 3.0);
    const DiscreteOperators ops = assemble_operators(m);
    const Eigen::VectorXd w = uniformizing_factor(ops);
    EXPECT_LE(curvature(ops, w).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FlowRhs, TorusMatchesAnalyticCurvature)
{
    const TriangleMesh m = torus_grid(64, 64, 2 * kPi, 2 * kPi);
    const DiscreteOperators ops = assemble_operators(m);
    const Eigen::VectorXd u = field(m, [](const Eigen::Vector3d& p) { return 0.1 * std::sin(p.x()); });
    const Eigen::VectorXd expected = field(m, [](const Eigen::Vector3d& p) {
        return -0.5 * std::exp(-0.2 * std::sin(p.x())) * 0.2 * std::sin(p.x());
    });
    EXPECT_NEAR(mean_curvature_r(ops, u), 0.0, 1e-12);
    EXPECT_LE((flow_rhs(ops, {u, 0.0}) - expected).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Step, FixedPointOnlyAdvancesTime)
{
    const DiscreteOperators ops = assemble_operators(torus_grid(8, 8, 2 * kPi, 2 * kPi));
    const ConformalState next = step(ops, {Eigen::VectorXd::Zero(ops.size()), 0.25}, 1e-3);
    EXPECT_EQ(next.t, 0.25 + 1e-3);
    EXPECT_LE(next.u.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Step, DisplacementGuard)
{
    const TriangleMesh m = icosphere(2);
    const DiscreteOperators ops = assemble_operators(m);
    const ConformalState s{field(m, [](const Eigen::Vector3d& p) { return 0.3 * p.x(); }), 0.0};
    const double speed = flow_rhs(ops, s).cwiseAbs().maxCoeff();
    EXPECT_THROW(step(ops, s, 0.2 / speed), StepRejected);
    EXPECT_NO_THROW(step(ops, s, 1e-3));
    EXPECT_THROW(step(ops, s, 0.0), Error);
}

TEST(Step, AreaConservedPerStep)
{
    const TriangleMesh m = icosphere(4);
    const DiscreteOperators ops = assemble_operators(m);
    ConformalState s{uniformizing_factor(ops) + field(m, [](const Eigen::Vector3d& p) { return 0.2 * p.x(); }), 0.0};
    double area = area_and_mass(ops, s.u).total_area;
    for (int j = 0; j < 20; ++j) {
        const ConformalState one = step(ops, s, 1e-3);
        const ConformalState half = step(ops, step(ops, s, 5e-4), 5e-4);
        const double next_area = area_and_mass(ops, one.u).total_area;
        EXPECT_LE(std::abs(next_area - area) / area, 1e-8);
        EXPECT_LE(std::abs(area_and_mass(ops, half.u).total_area - next_area) / area, 1e-12);
        area = next_area;
        s = one;
    }
}

TEST(Step, FourthOrder)
{
    const TriangleMesh m = icosphere(2);
    const DiscreteOperators ops = assemble_operators(m);
    const ConformalState s0{field(m, [](const Eigen::Vector3d& p) { return 0.2 * p.x() + 0.1 * p.y() * p.z(); }), 0.0};
    auto run = [&](int steps) {
        ConformalState s = s0;
        for (int j = 0; j < steps; ++j) s = step(ops, s, 0.2 / steps);
        return s.u;
    };
    const Eigen::VectorXd reference = run(640);
    const double e1 = (run(10) - reference).cwiseAbs().maxCoeff();
    const double e2 = (run(20) - reference).cwiseAbs().maxCoeff();
    EXPECT_GT(e1 / e2, 12.0);
}

// Property: on a non-obtuse mesh the curvature extremes obey the ODE comparison
// rho0 / (1 - rho0 t) <= R <= delta0 / (1 - delta0 t) (r = 0).
TEST(Step, MaximumPrincipleOnTorus)
{
    const TriangleMesh m = torus_grid(24, 24, 2 * kPi, 2 * kPi);
    const DiscreteOperators ops = assemble_operators(m);
    ConformalState s{field(m, [](const Eigen::Vector3d& p) { return 0.3 * std::sin(p.x()) * std::sin(p.y()); }), 0.0};
    const Eigen::VectorXd r0 = curvature(ops, s.u);
    const double rho0 = r0.minCoeff(), delta0 = r0.maxCoeff();
    EXPECT_LT(rho0, 0.0);
    EXPECT_GT(delta0, 0.0);
    for (int j = 0; j < 200; ++j) {
        s = step(ops, s, 2e-3);
        const Eigen::VectorXd r = curvature(ops, s.u);
        EXPECT_GE(r.minCoeff(), rho0 / (1 - rho0 * s.t) - 1e-9);
        EXPECT_LE(r.maxCoeff(), delta0 / (1 - delta0 * s.t) + 1e-9);
    }
}

TEST(Run, FlatTorusIsStationary)
{
    const TriangleMesh m = torus_grid(16, 16, 2 * kPi, 2 * kPi);
    SurfaceFlowConfig config;
    config.horizon = 1.0;
    config.dt = 1e-2;
    config.stride = 10;
    config.k = 2;
    const FlowTrace trace = run_surface_flow(m, config);
    ASSERT_EQ(trace.rows.size(), 11u);
    EXPECT_EQ(trace.meta.chi, 0);
    EXPECT_FALSE(trace.meta.truncated_at);
    const double h = 2 * kPi / 16;
    for (const FlowSample& row : trace.rows) {
        EXPECT_NEAR(row.r, 0.0, 1e-12);
        EXPECT_NEAR(row.phi, 0.0, 1e-12);
        EXPECT_NEAR(row.psi, 0.0, 1e-12);
        EXPECT_NEAR(row.w_plus, 1.0, 1e-12);
        EXPECT_NEAR(row.w_minus, 1.0, 1e-12);
        EXPECT_NEAR(row.lambda[0], 1.0, h * h);
        EXPECT_NEAR(row.q_plus[0], row.lambda[0], 1e-12);
        EXPECT_NEAR(row.q_minus[0], row.lambda[0], 1e-12);
        EXPECT_NEAR(row.lambda[0], trace.rows[0].lambda[0], 1e-10);
    }
}

TEST(Run, PerturbedTorusConvergesInsideEnvelope)
{
    const TriangleMesh m = torus_grid(24, 24, 2 * kPi, 2 * kPi);
    SurfaceFlowConfig config;
    config.initial_u = field(m, [](const Eigen::Vector3d& p) { return 0.3 * std::sin(p.x()) * std::sin(p.y()); });
    config.horizon = 2.0;
    config.dt = 2e-3;
    config.stride = 25;
    config.k = 2;
    const FlowTrace trace = run_surface_flow(m, config);
    ASSERT_TRUE(trace.meta.truncated_at);
    EXPECT_NEAR(*trace.meta.truncated_at, 1.0 / trace.meta.delta0, 1e-12);
    EXPECT_LT(trace.rows.back().t, *trace.meta.truncated_at);
    const double eps = 0.02 * (trace.meta.delta0 - trace.meta.rho0) + 10 * trace.meta.h * trace.meta.h;
    for (const FlowSample& row : trace.rows) {
        EXPECT_GE(row.min_r, row.phi - eps);
        EXPECT_LE(row.max_r, row.psi + eps);
    }
    EXPECT_LT(trace.rows.back().max_r - trace.rows.back().min_r, 0.5 * (trace.meta.delta0 - trace.meta.rho0));
}

TEST(Run, StepSizeRobust)
{
    const TriangleMesh m = icosphere(2);
    const DiscreteOperators ops = assemble_operators(m);
    SurfaceFlowConfig config;
    config.initial_u = uniformizing_factor(ops) + field(m, [](const Eigen::Vector3d& p) { return 0.2 * p.x(); });
    config.horizon = 0.2;
    config.k = 3;
    config.dt = 1e-3;
    config.stride = 200;
    const FlowTrace coarse = run_surface_flow(m, ops, config);
    config.dt = 5e-4;
    config.stride = 400;
    const FlowTrace fine = run_surface_flow(m, ops, config);
    ASSERT_EQ(coarse.rows.size(), fine.rows.size());
    for (int b = 0; b < 3; ++b) EXPECT_NEAR(coarse.rows.back().lambda[b], fine.rows.back().lambda[b], 1e-9);
}

TEST(Run, AbortKeepsPartialTrace)
{
    const TriangleMesh m = icosphere(2);
    SurfaceFlowConfig config;
    config.initial_u = field(m, [](const Eigen::Vector3d& p) { return 0.5 * p.x(); });
    config.dt = 0.5;
    config.stride = 1;
    config.k = 1;
    try {
        run_surface_flow(m, config);
        FAIL() << "expected abort";
    } catch (const RunAborted& e) {
        EXPECT_EQ(e.partial().rows.size(), 1u);
        EXPECT_THROW(std::rethrow_exception(e.cause()), StepRejected);
    }
}

TEST(Run, RejectsRunawayInitialData)
{
    const TriangleMesh m = icosahedron();
    SurfaceFlowConfig config;
    config.initial_u = Eigen::VectorXd::Constant(m.num_vertices(), 400.0);
    EXPECT_THROW(run_surface_flow(m, config), OverflowError);
    config.initial_u = Eigen::VectorXd::Zero(3);
    EXPECT_THROW(run_surface_flow(m, config), DimensionMismatch);
}
