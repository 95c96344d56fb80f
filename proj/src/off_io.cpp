#include <ricci/errors.hpp>
#include <ricci/mesh.hpp>

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

namespace ricci {

namespace {

/// Next non-empty line with `#` comments stripped.
bool next_line(std::istream& in, std::string& line)
{
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
}

} // namespace

TriangleMesh read_off(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open OFF file " + path.string());

    std::string line;
    if (!next_line(in, line)) throw ParseError(path.string() + ": empty file");
    std::istringstream header(line);
    std::string magic;
    header >> magic;
    if (magic != "OFF") throw ParseError(path.string() + ": missing OFF header");

    // Counts may share the header line.
    long nv = -1, nf = -1, ne = 0;
    if (!(header >> nv >> nf)) {
        if (!next_line(in, line)) throw ParseError(path.string() + ": missing counts line");
        std::istringstream counts(line);
        if (!(counts >> nv >> nf)) throw ParseError(path.string() + ": malformed counts line");
        counts >> ne;
    }
    if (nv <= 0 || nf <= 0) throw ParseError(path.string() + ": vertex and face counts must be positive");

    std::vector<Eigen::Vector3d> vertices(static_cast<std::size_t>(nv));
    for (auto& p : vertices) {
        if (!next_line(in, line)) throw ParseError(path.string() + ": truncated vertex list");
        std::istringstream ls(line);
        if (!(ls >> p.x() >> p.y() >> p.z())) throw ParseError(path.string() + ": malformed vertex line '" + line + "'");
    }
    std::vector<Face> faces(static_cast<std::size_t>(nf));
    for (auto& f : faces) {
        if (!next_line(in, line)) throw ParseError(path.string() + ": truncated face list");
        std::istringstream ls(line);
        int arity = 0;
        if (!(ls >> arity >> f[0] >> f[1] >> f[2])) throw ParseError(path.string() + ": malformed face line '" + line + "'");
        if (arity != 3) throw ParseError(path.string() + ": only triangle faces are supported");
    }
    return build_mesh(std::move(vertices), std::move(faces));
}

void write_off(const TriangleMesh& mesh, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_faces() << ' ' << mesh.num_edges() << '\n';
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& p : mesh.vertices()) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    for (const auto& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

} // namespace ricci
