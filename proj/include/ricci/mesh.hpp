#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SparseCore>

namespace ricci {

using Face = std::array<int, 3>;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Fundamental domain of a doubly periodic planar mesh. Edge vectors are taken
/// with the minimum-image convention, which turns a planar grid into a flat torus.
struct PeriodicBox
{
    double lx = 0.0;
    double ly = 0.0;
};

///
/// Closed, oriented triangle mesh carrying the base (t = 0) metric.
///
/// Instances are only produced by build_mesh(), which enforces that every edge is
/// shared by exactly two faces with opposite orientation, that every vertex is
/// referenced, and that no triangle is degenerate.
///
class TriangleMesh
{
public:
    const std::vector<Eigen::Vector3d>& vertices() const noexcept { return vertices_; }
    const std::vector<Face>& faces() const noexcept { return faces_; }
    const std::optional<PeriodicBox>& period() const noexcept { return period_; }

    int num_vertices() const noexcept { return static_cast<int>(vertices_.size()); }
    int num_faces() const noexcept { return static_cast<int>(faces_.size()); }
    int num_edges() const noexcept { return num_edges_; }
    int euler_characteristic() const noexcept { return num_vertices() - num_edges() + num_faces(); }

    /// Vector from vertex `from` to vertex `to`, unwrapped across the periodic box if any.
    Eigen::Vector3d edge_vector(int from, int to) const;

    double mean_edge_length() const noexcept { return mean_edge_length_; }

private:
    friend TriangleMesh build_mesh(
        std::vector<Eigen::Vector3d> vertices,
        std::vector<Face> faces,
        std::optional<PeriodicBox> period);

    std::vector<Eigen::Vector3d> vertices_;
    std::vector<Face> faces_;
    std::optional<PeriodicBox> period_;
    int num_edges_ = 0;
    double mean_edge_length_ = 0.0;
};

/// Faces whose area is below this fraction of the mean face area are rejected.
inline constexpr double kDegenerateAreaFraction = 1e-12;

/// Validates raw arrays and returns a mesh; throws MeshError on any violation.
TriangleMesh build_mesh(
    std::vector<Eigen::Vector3d> vertices,
    std::vector<Face> faces,
    std::optional<PeriodicBox> period = std::nullopt);

///
/// Discrete Laplace-Beltrami data of the base metric.
///
/// The smooth Laplacian of a function f is approximated by -(S f)_i / A_i, where S is
/// the cotangent stiffness matrix and A the barycentric lumped vertex area. In two
/// dimensions S is invariant under conformal change, so only the mass carries the
/// metric's time dependence along the flow.
///
struct DiscreteOperators
{
    SparseMatrix stiffness;
    Eigen::VectorXd base_mass;      ///< A_i
    Eigen::VectorXd angle_defect;   ///< 2pi minus the incident corner angles
    Eigen::VectorXd base_curvature; ///< R0_i = 2 * defect_i / A_i (scalar, i.e. twice Gauss)
    int euler_characteristic = 0;

    int size() const noexcept { return static_cast<int>(base_mass.size()); }
    double base_area() const noexcept { return base_mass.sum(); }
};

DiscreteOperators assemble_operators(const TriangleMesh& mesh);

/// Scalar curvature of e^{2u} g0 by the conformal law R = e^{-2u} (R0 + 2 S u / A).
Eigen::VectorXd curvature(const DiscreteOperators& ops, const Eigen::VectorXd& u);

struct AreaAndMass
{
    double total_area = 0.0;
    Eigen::VectorXd mass; ///< diagonal entries A_i e^{2 u_i}
};

/// Throws OverflowError when some 2 u_i exceeds kMaxExponent.
AreaAndMass area_and_mass(const DiscreteOperators& ops, const Eigen::VectorXd& u);

inline constexpr double kMaxExponent = 700.0;

/// Average scalar curvature r = sum R_i m_i / sum m_i.
double mean_curvature_r(const DiscreteOperators& ops, const Eigen::VectorXd& u);

// Generators.
TriangleMesh icosahedron();
/// Icosahedron refined `level` times by midpoint subdivision, projected onto the unit sphere.
TriangleMesh icosphere(int level);
/// Flat torus [0, lx) x [0, ly) sampled by an nx x ny grid of right triangles.
TriangleMesh torus_grid(int nx, int ny, double lx, double ly);

// OFF input/output (ASCII, triangles only).
TriangleMesh read_off(const std::filesystem::path& path);
void write_off(const TriangleMesh& mesh, const std::filesystem::path& path);

} // namespace ricci
