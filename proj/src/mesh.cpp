#include <ricci/mesh.hpp>

#include <ricci/errors.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>

namespace ricci {

namespace {

std::string face_label(std::size_t f)
{
    return "face " + std::to_string(f);
}

double wrap(double d, double period)
{
    return d - period * std::round(d / period);
}

/// Interior angle at the corner from which `a` and `b` emanate.
double corner_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b)
{
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

} // namespace

Eigen::Vector3d TriangleMesh::edge_vector(int from, int to) const
{
    Eigen::Vector3d d = vertices_[static_cast<std::size_t>(to)] - vertices_[static_cast<std::size_t>(from)];
    if (period_) {
        d.x() = wrap(d.x(), period_->lx);
        d.y() = wrap(d.y(), period_->ly);
    }
    return d;
}

TriangleMesh build_mesh(
    std::vector<Eigen::Vector3d> vertices,
    std::vector<Face> faces,
    std::optional<PeriodicBox> period)
{
    const auto nv = static_cast<std::int64_t>(vertices.size());
    if (faces.empty()) {
        throw MeshError(MeshErrorKind::NonManifoldEdge, "mesh has no faces");
    }

    for (std::size_t f = 0; f < faces.size(); ++f) {
        for (int idx : faces[f]) {
            if (idx < 0 || idx >= nv) {
                throw MeshError(
                    MeshErrorKind::IndexOutOfRange,
                    face_label(f) + " references vertex " + std::to_string(idx) + " but V = " +
                        std::to_string(nv));
            }
        }
        const auto& [i, j, k] = faces[f];
        if (i == j || j == k || k == i) {
            throw MeshError(MeshErrorKind::DegenerateFace, face_label(f) + " repeats a vertex");
        }
    }

    // Directed half-edge multiplicities. A closed oriented surface uses each
    // directed edge once and its reverse once.
    std::unordered_map<std::int64_t, int> directed;
    directed.reserve(faces.size() * 3);
    for (const auto& face : faces) {
        for (int c = 0; c < 3; ++c) {
            const std::int64_t a = face[static_cast<std::size_t>(c)];
            const std::int64_t b = face[static_cast<std::size_t>((c + 1) % 3)];
            ++directed[a * nv + b];
        }
    }
    int num_half_edges = 0;
    for (const auto& [key, count] : directed) {
        const std::int64_t a = key / nv;
        const std::int64_t b = key % nv;
        const auto rev = directed.find(b * nv + a);
        const int reverse_count = rev == directed.end() ? 0 : rev->second;
        const std::string label = "edge (" + std::to_string(a) + ", " + std::to_string(b) + ")";
        if (count + reverse_count != 2) {
            throw MeshError(
                MeshErrorKind::NonManifoldEdge,
                label + " has " + std::to_string(count + reverse_count) + " incident faces");
        }
        if (count != 1) {
            throw MeshError(MeshErrorKind::InconsistentOrientation, label + " is traversed twice in the same direction");
        }
        num_half_edges += count;
    }

    std::vector<bool> referenced(vertices.size(), false);
    for (const auto& face : faces) {
        for (int idx : face) referenced[static_cast<std::size_t>(idx)] = true;
    }
    if (const auto it = std::find(referenced.begin(), referenced.end(), false); it != referenced.end()) {
        throw MeshError(
            MeshErrorKind::IsolatedVertex,
            "vertex " + std::to_string(it - referenced.begin()) + " belongs to no face");
    }

    TriangleMesh mesh;
    mesh.vertices_ = std::move(vertices);
    mesh.faces_ = std::move(faces);
    mesh.period_ = period;
    mesh.num_edges_ = num_half_edges / 2;

    std::vector<double> areas(mesh.faces_.size());
    double area_sum = 0.0;
    double length_sum = 0.0;
    for (std::size_t f = 0; f < mesh.faces_.size(); ++f) {
        const auto& [i, j, k] = mesh.faces_[f];
        const Eigen::Vector3d e0 = mesh.edge_vector(i, j);
        const Eigen::Vector3d e1 = mesh.edge_vector(i, k);
        areas[f] = 0.5 * e0.cross(e1).norm();
        area_sum += areas[f];
        // Each undirected edge is seen from both of its faces.
        length_sum += e0.norm() + mesh.edge_vector(j, k).norm() + e1.norm();
    }
    const double mean_area = area_sum / static_cast<double>(areas.size());
    for (std::size_t f = 0; f < areas.size(); ++f) {
        if (!(areas[f] > kDegenerateAreaFraction * mean_area)) {
            throw MeshError(MeshErrorKind::DegenerateFace, face_label(f) + " has (near) zero area");
        }
    }
    mesh.mean_edge_length_ = length_sum / (2.0 * mesh.num_edges_);
    return mesh;
}

DiscreteOperators assemble_operators(const TriangleMesh& mesh)
{
    const int nv = mesh.num_vertices();
    DiscreteOperators ops;
    ops.base_mass = Eigen::VectorXd::Zero(nv);
    ops.angle_defect = Eigen::VectorXd::Constant(nv, 2.0 * std::numbers::pi);
    ops.euler_characteristic = mesh.euler_characteristic();

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(mesh.faces().size() * 12);
    // Faces are visited in storage order so the reduction is reproducible.
    for (const auto& face : mesh.faces()) {
        const double area = 0.5 * mesh.edge_vector(face[0], face[1]).cross(mesh.edge_vector(face[0], face[2])).norm();
        for (int c = 0; c < 3; ++c) {
            const int k = face[static_cast<std::size_t>(c)];
            const int i = face[static_cast<std::size_t>((c + 1) % 3)];
            const int j = face[static_cast<std::size_t>((c + 2) % 3)];
            const Eigen::Vector3d a = mesh.edge_vector(k, i);
            const Eigen::Vector3d b = mesh.edge_vector(k, j);
            // cotangent of the corner at k weights the opposite edge (i, j)
            const double half_cot = 0.5 * a.dot(b) / a.cross(b).norm();
            triplets.emplace_back(i, j, -half_cot);
            triplets.emplace_back(j, i, -half_cot);
            triplets.emplace_back(i, i, half_cot);
            triplets.emplace_back(j, j, half_cot);

            ops.angle_defect[k] -= corner_angle(a, b);
            ops.base_mass[k] += area / 3.0;
        }
    }
    ops.stiffness.resize(nv, nv);
    ops.stiffness.setFromTriplets(triplets.begin(), triplets.end());
    ops.stiffness.makeCompressed();

    ops.base_curvature = 2.0 * ops.angle_defect.cwiseQuotient(ops.base_mass);
    return ops;
}

Eigen::VectorXd curvature(const DiscreteOperators& ops, const Eigen::VectorXd& u)
{
    const Eigen::VectorXd su = ops.stiffness * u;
    Eigen::VectorXd r(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        r[i] = std::exp(-2.0 * u[i]) * (ops.base_curvature[i] + 2.0 * su[i] / ops.base_mass[i]);
    }
    return r;
}

AreaAndMass area_and_mass(const DiscreteOperators& ops, const Eigen::VectorXd& u)
{
    AreaAndMass out;
    out.mass.resize(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (!(2.0 * u[i] <= kMaxExponent)) {
            throw OverflowError(
                "conformal factor overflow at vertex " + std::to_string(i) + " (u = " + std::to_string(u[i]) + ")");
        }
        out.mass[i] = ops.base_mass[i] * std::exp(2.0 * u[i]);
    }
    out.total_area = out.mass.sum();
    return out;
}

double mean_curvature_r(const DiscreteOperators& ops, const Eigen::VectorXd& u)
{
    const AreaAndMass am = area_and_mass(ops, u);
    const Eigen::VectorXd r = curvature(ops, u);
    return r.dot(am.mass) / am.total_area;
}

TriangleMesh icosahedron()
{
    const double phi = std::numbers::phi;
    std::vector<Eigen::Vector3d> v = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (auto& p : v) p.normalize();
    std::vector<Face> f = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };
    return build_mesh(std::move(v), std::move(f));
}

TriangleMesh icosphere(int level)
{
    if (level < 0) throw Error("icosphere level must be non-negative");
    const TriangleMesh base = icosahedron();
    std::vector<Eigen::Vector3d> v = base.vertices();
    std::vector<Face> f = base.faces();
    for (int l = 0; l < level; ++l) {
        std::unordered_map<std::int64_t, int> midpoint;
        const auto n = static_cast<std::int64_t>(v.size());
        auto mid = [&](int a, int b) {
            const std::int64_t key = std::min(a, b) * n + std::max(a, b);
            if (const auto it = midpoint.find(key); it != midpoint.end()) return it->second;
            v.push_back((v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]).normalized());
            const int idx = static_cast<int>(v.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<Face> refined;
        refined.reserve(f.size() * 4);
        for (const auto& [a, b, c] : f) {
            const int ab = mid(a, b);
            const int bc = mid(b, c);
            const int ca = mid(c, a);
            refined.push_back({a, ab, ca});
            refined.push_back({b, bc, ab});
            refined.push_back({c, ca, bc});
            refined.push_back({ab, bc, ca});
        }
        f = std::move(refined);
    }
    return build_mesh(std::move(v), std::move(f));
}

TriangleMesh torus_grid(int nx, int ny, double lx, double ly)
{
    if (nx < 3 || ny < 3) throw Error("torus grid needs at least 3 samples per direction");
    if (!(lx > 0.0) || !(ly > 0.0)) throw Error("torus grid periods must be positive");
    std::vector<Eigen::Vector3d> v;
    v.reserve(static_cast<std::size_t>(nx * ny));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            v.emplace_back(lx * i / nx, ly * j / ny, 0.0);
        }
    }
    auto id = [&](int i, int j) { return ((j + ny) % ny) * nx + ((i + nx) % nx); };
    std::vector<Face> f;
    f.reserve(static_cast<std::size_t>(2 * nx * ny));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return build_mesh(std::move(v), std::move(f), PeriodicBox{lx, ly});
}

} // namespace ricci
