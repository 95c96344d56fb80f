#pragma once

#include <ricci/homogeneous.hpp>
#include <ricci/mesh.hpp>
#include <ricci/surface_flow.hpp>
#include <ricci/trace.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace ricci {

struct GeometrySpec
{
    enum class Kind { icosphere, torus_grid, off_file, product_spheres };
    Kind kind = Kind::icosphere;
    int level = 3;
    int nx = 32, ny = 32;
    double lx = 0.0, ly = 0.0;
    std::filesystem::path path;
    int p = 1, q = 2;
    double a0 = 1.0, b0 = 1.0;

    std::string label() const;
};

///
/// Initial conformal factor on top of the base metric. Named fields take one amplitude
/// argument and are evaluated at vertex positions (x, y, z):
///
///   none, const(A) = A, x_coord(A) = A x, sin_x(A) = A sin x,
///   sin_x_sin_y(A) = A sin x sin y, cos2x_sin2y(A) = A (cos 2x + sin(2y) / 2),
///   file(path) = one value per vertex, whitespace separated.
///
struct PerturbationSpec
{
    std::string field = "none";
    double amplitude = 0.0;
    std::filesystem::path path;

    std::string label() const;
};

/// `round` starts from the constant-curvature metric conformal to the mesh metric.
enum class BaseMetric { round, embedded };

struct Scenario
{
    std::string id = "scenario";
    GeometrySpec geometry;
    PerturbationSpec perturbation;
    BaseMetric base = BaseMetric::round;
    double horizon = 1.0;
    double dt = 1e-3;
    int stride = 10;
    int k = 4;
    double eig_tol = 1e-9;
    double conservation_tol = 1e-6;
    std::optional<double> verify_tol;
    std::filesystem::path output;
    std::filesystem::path report;
};

/// `key = value` lines, `#` comments. Relative paths resolve against `base_dir`.
/// Throws ParseError on unknown keys, malformed values or violated invariants.
Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// Accepts decimal literals and products/quotients with `pi`, e.g. `2*pi`, `pi/2`.
double parse_number(const std::string& text);

GeometrySpec parse_geometry(const std::string& text);
PerturbationSpec parse_perturbation(const std::string& text);

TriangleMesh build_geometry(const GeometrySpec& geometry);
Eigen::VectorXd evaluate_perturbation(const PerturbationSpec& perturbation, const TriangleMesh& mesh);

struct PreparedSurface
{
    TriangleMesh mesh;
    DiscreteOperators ops;
    SurfaceFlowConfig config;
};

PreparedSurface prepare_surface(const Scenario& scenario);
ProductScenario prepare_product(const Scenario& scenario);

/// Runs the scenario's flow (surface or product) and returns its trace.
FlowTrace simulate(const Scenario& scenario);

} // namespace ricci
