#include <ricci/errors.hpp>
#include <ricci/mesh.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

using namespace ricci;

namespace {

constexpr double kPi = std::numbers::pi;

// Brute-force cotangent stiffness from corner angles; shares no code with the library.
Eigen::MatrixXd dense_cotan(const TriangleMesh& mesh)
{
    const int n = mesh.num_vertices();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (const Face& f : mesh.faces()) {
        for (int c = 0; c < 3; ++c) {
            const int i = f[c], j = f[(c + 1) % 3], k = f[(c + 2) % 3];
            const Eigen::Vector3d a = mesh.edge_vector(k, i);
            const Eigen::Vector3d b = mesh.edge_vector(k, j);
            const double angle = std::acos(a.dot(b) / (a.norm() * b.norm()));
            const double w = 0.5 / std::tan(angle);
            s(i, j) -= w;
            s(j, i) -= w;
            s(i, i) += w;
            s(j, j) += w;
        }
    }
    return s;
}

double triangle_area(const TriangleMesh& mesh, const Face& f)
{
    return 0.5 * mesh.edge_vector(f[0], f[1]).cross(mesh.edge_vector(f[0], f[2])).norm();
}

} // namespace

TEST(BuildMesh, IcosahedronIsClosedSphere)
{
    const TriangleMesh m = icosahedron();
    EXPECT_EQ(m.num_vertices(), 12);
    EXPECT_EQ(m.num_faces(), 20);
    EXPECT_EQ(m.num_edges(), 30);
    EXPECT_EQ(m.euler_characteristic(), 2);
}

TEST(BuildMesh, IcosahedronFacesPointOutward)
{
    const TriangleMesh m = icosahedron();
    for (const Face& f : m.faces()) {
        const Eigen::Vector3d n = m.edge_vector(f[0], f[1]).cross(m.edge_vector(f[0], f[2]));
        EXPECT_GT(n.dot(m.vertices()[f[0]]), 0.0);
    }
}

TEST(BuildMesh, PillowIsAccepted)
{
    std::vector<Eigen::Vector3d> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    const TriangleMesh m = build_mesh(v, {{0, 1, 2}, {0, 2, 1}});
    EXPECT_EQ(m.num_edges(), 3);
    EXPECT_EQ(m.euler_characteristic(), 2);
}

TEST(BuildMesh, Rejections)
{
    std::vector<Eigen::Vector3d> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    auto kind_of = [](auto&& make) {
        try {
            make();
        } catch (const MeshError& e) {
            return e.kind();
        }
        ADD_FAILURE() << "no MeshError";
        return MeshErrorKind::NonManifoldEdge;
    };
    EXPECT_EQ(kind_of([&] { build_mesh(v, {{0, 1, 3}, {0, 3, 1}}); }), MeshErrorKind::IndexOutOfRange);
    EXPECT_EQ(kind_of([&] { build_mesh(v, {{0, 1, 2}, {0, 1, 2}}); }), MeshErrorKind::InconsistentOrientation);
    EXPECT_EQ(kind_of([&] { build_mesh(v, {{0, 1, 2}}); }), MeshErrorKind::NonManifoldEdge);

    auto with_extra = v;
    with_extra.emplace_back(5, 5, 5);
    EXPECT_EQ(kind_of([&] { build_mesh(with_extra, {{0, 1, 2}, {0, 2, 1}}); }), MeshErrorKind::IsolatedVertex);

    std::vector<Eigen::Vector3d> line = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    EXPECT_EQ(kind_of([&] { build_mesh(line, {{0, 1, 2}, {0, 2, 1}}); }), MeshErrorKind::DegenerateFace);
}

TEST(Operators, GaussBonnetOnIcosahedron)
{
    const DiscreteOperators ops = assemble_operators(icosahedron());
    EXPECT_NEAR(ops.angle_defect.sum(), 4.0 * kPi, 1e-9);
    EXPECT_EQ(ops.euler_characteristic, 2);
}

TEST(Operators, FlatTorus)
{
    const TriangleMesh m = torus_grid(16, 12, 2 * kPi, 2 * kPi);
    EXPECT_EQ(m.euler_characteristic(), 0);
    const DiscreteOperators ops = assemble_operators(m);
    EXPECT_LE(ops.base_curvature.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(ops.angle_defect.sum(), 0.0, 1e-10);
    EXPECT_NEAR(ops.base_area(), 4 * kPi * kPi, 1e-10);
}

TEST(Operators, IcosphereMeanCurvatureConverges)
{
    double previous_error = INFINITY;
    for (int level = 1; level <= 4; ++level) {
        const DiscreteOperators ops = assemble_operators(icosphere(level));
        const double mean = ops.base_curvature.mean();
        const double error = std::abs(mean - 2.0);
        EXPECT_LT(error, previous_error) << "level " << level;
        previous_error = error;
        if (level == 4) {
            EXPECT_LT(error, 0.02 * 2.0);
        }
    }
}

TEST(Operators, StiffnessMatchesBruteForceCotangents)
{
    for (const TriangleMesh& m : {icosphere(1), torus_grid(5, 7, 2.0, 3.0)}) {
        const DiscreteOperators ops = assemble_operators(m);
        const Eigen::MatrixXd oracle = dense_cotan(m);
        EXPECT_LE((Eigen::MatrixXd(ops.stiffness) - oracle).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((Eigen::MatrixXd(ops.stiffness) * Eigen::VectorXd::Ones(m.num_vertices())).cwiseAbs().maxCoeff(), 1e-12);

        Eigen::VectorXd lumped = Eigen::VectorXd::Zero(m.num_vertices());
        for (const Face& f : m.faces()) {
            for (int c : f) lumped[c] += triangle_area(m, f) / 3.0;
        }
        EXPECT_LE((ops.base_mass - lumped).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Curvature, ZeroFactorGivesBaseCurvatureExactly)
{
    const DiscreteOperators ops = assemble_operators(icosphere(2));
    const Eigen::VectorXd r = curvature(ops, Eigen::VectorXd::Zero(ops.size()));
    for (int i = 0; i < ops.size(); ++i) EXPECT_EQ(r[i], ops.base_curvature[i]);
}

TEST(Curvature, ConstantFactorRescales)
{
    const DiscreteOperators ops = assemble_operators(icosphere(3));
    const double c = 0.37;
    const Eigen::VectorXd r = curvature(ops, Eigen::VectorXd::Constant(ops.size(), c));
    EXPECT_LE((r - std::exp(-2 * c) * ops.base_curvature).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Curvature, SecondOrderOnFlatTorus)
{
    // R of e^{2u}(dx^2 + dy^2) is -2 e^{-2u} Laplacian(u); u = 0.1 sin x gives e^{-0.2 sin x} 0.2 sin x.
    std::vector<double> errors;
    for (int n : {16, 32, 64}) {
        const TriangleMesh m = torus_grid(n, n, 2 * kPi, 2 * kPi);
        const DiscreteOperators ops = assemble_operators(m);
        Eigen::VectorXd u(m.num_vertices());
        Eigen::VectorXd exact(m.num_vertices());
        for (int i = 0; i < m.num_vertices(); ++i) {
            const double x = m.vertices()[i].x();
            u[i] = 0.1 * std::sin(x);
            exact[i] = std::exp(-0.2 * std::sin(x)) * 0.2 * std::sin(x);
        }
        errors.push_back((curvature(ops, u) - exact).cwiseAbs().maxCoeff());
    }
    EXPECT_GT(errors[0] / errors[1], 3.5);
    EXPECT_GT(errors[1] / errors[2], 3.5);
}

TEST(AreaAndMass, Examples)
{
    const DiscreteOperators sphere = assemble_operators(icosphere(4));
    EXPECT_NEAR(area_and_mass(sphere, Eigen::VectorXd::Zero(sphere.size())).total_area, 4 * kPi, 0.01 * 4 * kPi);
    const AreaAndMass scaled = area_and_mass(sphere, Eigen::VectorXd::Constant(sphere.size(), std::log(2.0)));
    EXPECT_NEAR(scaled.total_area, 4 * sphere.base_area(), 1e-12 * sphere.base_area());

    const DiscreteOperators torus = assemble_operators(torus_grid(8, 8, 2 * kPi, 2 * kPi));
    EXPECT_NEAR(area_and_mass(torus, Eigen::VectorXd::Zero(torus.size())).total_area, 4 * kPi * kPi, 1e-12);

    EXPECT_THROW(area_and_mass(torus, Eigen::VectorXd::Constant(torus.size(), 400.0)), OverflowError);
}

TEST(MeanCurvature, GaussBonnet)
{
    const DiscreteOperators ops = assemble_operators(icosphere(3));
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(ops.size());
    EXPECT_NEAR(mean_curvature_r(ops, zero), 8 * kPi / area_and_mass(ops, zero).total_area, 1e-12);
}

// Property: r = 4 pi chi / area for every conformal factor, and sum R m = 4 pi chi.
TEST(MeanCurvature, TopologicalUnderRandomFactors)
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal(0.0, 0.4);
    const DiscreteOperators sphere = assemble_operators(icosphere(2));
    const DiscreteOperators torus = assemble_operators(torus_grid(12, 10, 3.0, 2.0));
    for (int trial = 0; trial < 100; ++trial) {
        for (const DiscreteOperators* ops : {&sphere, &torus}) {
            Eigen::VectorXd u(ops->size());
            for (auto& x : u) x = normal(rng);
            const AreaAndMass am = area_and_mass(*ops, u);
            const double total = curvature(*ops, u).dot(am.mass);
            EXPECT_NEAR(total, 4 * kPi * ops->euler_characteristic, 1e-9);
            const double r = mean_curvature_r(*ops, u);
            if (ops->euler_characteristic == 0) {
                EXPECT_NEAR(r, 0.0, 1e-9);
            } else {
                EXPECT_NEAR(r, 8 * kPi / am.total_area, 1e-8 * std::abs(r));
            }
        }
    }
}

TEST(OffIo, RoundTripIsBitExact)
{
    const TriangleMesh m = icosphere(2);
    const auto path = std::filesystem::temp_directory_path() / "ricci_roundtrip.off";
    write_off(m, path);
    const TriangleMesh back = read_off(path);
    ASSERT_EQ(back.num_vertices(), m.num_vertices());
    ASSERT_EQ(back.faces(), m.faces());
    for (int i = 0; i < m.num_vertices(); ++i) EXPECT_EQ(back.vertices()[i], m.vertices()[i]);
    std::filesystem::remove(path);
}

TEST(OffIo, Malformed)
{
    const auto dir = std::filesystem::temp_directory_path();
    auto write = [&](const std::string& name, const std::string& text) {
        const auto p = dir / name;
        std::ofstream(p) << text;
        return p;
    };
    EXPECT_THROW(read_off(write("ricci_bad1.off", "OFF\n3 1 0\n0 0 0\n1 0 0\n")), ParseError);
    EXPECT_THROW(read_off(write("ricci_bad2.off", "PLY\n")), ParseError);
    EXPECT_THROW(read_off(write("ricci_bad3.off", "OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n4 0 1 2 3\n")), ParseError);
    EXPECT_THROW(read_off(dir / "ricci_missing.off"), ParseError);
    const auto ok = write("ricci_ok.off", "OFF # comment\n3 2 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n3 0 2 1\n");
    EXPECT_EQ(read_off(ok).num_faces(), 2);
}
