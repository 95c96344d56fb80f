#include <ricci/scenario.hpp>

#include <ricci/errors.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace ricci {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Splits `name(arg, arg, ...)`; no parentheses means no arguments.
std::pair<std::string, std::vector<std::string>> call_syntax(const std::string& text)
{
    const std::string s = trim(text);
    const auto open = s.find('(');
    if (open == std::string::npos) return {s, {}};
    if (s.back() != ')') throw ParseError("missing ')' in '" + s + "'");
    std::vector<std::string> args;
    std::istringstream ss(s.substr(open + 1, s.size() - open - 2));
    std::string arg;
    while (std::getline(ss, arg, ',')) args.push_back(trim(arg));
    return {trim(s.substr(0, open)), args};
}

double literal(const std::string& text)
{
    const std::string s = trim(text);
    if (s == "pi") return std::numbers::pi;
    double value = 0.0;
    const char* begin = s.data() + (s.starts_with('+') ? 1 : 0);
    const auto [end, ec] = std::from_chars(begin, s.data() + s.size(), value);
    if (s.empty() || ec != std::errc() || end != s.data() + s.size()) throw ParseError("not a number: '" + text + "'");
    return value;
}

int parse_int(const std::string& text)
{
    const double v = parse_number(text);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ParseError("not an integer: '" + text + "'");
    return static_cast<int>(v);
}

void expect_args(const std::string& name, const std::vector<std::string>& args, std::size_t count)
{
    if (args.size() != count) {
        throw ParseError(name + " takes " + std::to_string(count) + " argument(s), got " + std::to_string(args.size()));
    }
}

} // namespace

double parse_number(const std::string& text)
{
    const std::string s = trim(text);
    if (s.empty()) throw ParseError("empty number");
    // Left-to-right product/quotient of literals.
    double value = 1.0;
    char op = '*';
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || ((s[i] == '*' || s[i] == '/') && i > 0 && s[i - 1] != 'e' && s[i - 1] != 'E')) {
            const double factor = literal(s.substr(start, i - start));
            value = op == '*' ? value * factor : value / factor;
            if (i < s.size()) op = s[i];
            start = i + 1;
        }
    }
    if (!std::isfinite(value)) throw ParseError("non-finite number: '" + text + "'");
    return value;
}

std::string GeometrySpec::label() const
{
    switch (kind) {
    case Kind::icosphere: return "icosphere(" + std::to_string(level) + ")";
    case Kind::torus_grid:
        return "torus_grid(" + std::to_string(nx) + "," + std::to_string(ny) + "," + format_double(lx) + "," + format_double(ly) + ")";
    case Kind::off_file: return "off_file(" + path.string() + ")";
    case Kind::product_spheres:
        return "product_spheres(" + std::to_string(p) + "," + std::to_string(q) + "," + format_double(a0) + "," + format_double(b0) + ")";
    }
    return "?";
}

std::string PerturbationSpec::label() const
{
    if (field == "none") return "none";
    if (field == "file") return "file(" + path.string() + ")";
    return field + "(" + format_double(amplitude) + ")";
}

GeometrySpec parse_geometry(const std::string& text)
{
    const auto [name, args] = call_syntax(text);
    GeometrySpec g;
    if (name == "icosphere") {
        expect_args(name, args, 1);
        g.kind = GeometrySpec::Kind::icosphere;
        g.level = parse_int(args[0]);
        if (g.level < 0 || g.level > 7) throw ParseError("icosphere level must be in [0, 7]");
    } else if (name == "torus_grid") {
        expect_args(name, args, 4);
        g.kind = GeometrySpec::Kind::torus_grid;
        g.nx = parse_int(args[0]);
        g.ny = parse_int(args[1]);
        g.lx = parse_number(args[2]);
        g.ly = parse_number(args[3]);
        if (g.nx < 3 || g.ny < 3 || !(g.lx > 0) || !(g.ly > 0)) throw ParseError("torus_grid needs nx, ny >= 3 and positive periods");
    } else if (name == "off_file") {
        expect_args(name, args, 1);
        g.kind = GeometrySpec::Kind::off_file;
        g.path = args[0];
    } else if (name == "product_spheres") {
        expect_args(name, args, 4);
        g.kind = GeometrySpec::Kind::product_spheres;
        g.p = parse_int(args[0]);
        g.q = parse_int(args[1]);
        g.a0 = parse_number(args[2]);
        g.b0 = parse_number(args[3]);
        if (g.p < 1 || g.q < 2 || !(g.a0 > 0) || !(g.b0 > 0)) throw ParseError("product_spheres needs p >= 1, q >= 2, positive radii");
    } else {
        throw ParseError("unknown geometry '" + name + "'");
    }
    return g;
}

PerturbationSpec parse_perturbation(const std::string& text)
{
    const auto [name, args] = call_syntax(text);
    PerturbationSpec p;
    p.field = name;
    if (name == "none") {
        expect_args(name, args, 0);
    } else if (name == "file") {
        expect_args(name, args, 1);
        p.path = args[0];
    } else if (name == "const" || name == "x_coord" || name == "sin_x" || name == "sin_x_sin_y" || name == "cos2x_sin2y") {
        expect_args(name, args, 1);
        p.amplitude = parse_number(args[0]);
    } else {
        throw ParseError("unknown perturbation field '" + name + "'");
    }
    return p;
}

Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir)
{
    Scenario s;
    std::string line;
    int line_no = 0;
    auto resolve = [&](const std::filesystem::path& p) { return p.is_relative() && !base_dir.empty() ? base_dir / p : p; };
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "scenario line " + std::to_string(line_no);
        if (eq == std::string::npos) throw ParseError(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "id") s.id = value;
            else if (key == "geometry") s.geometry = parse_geometry(value);
            else if (key == "perturbation") s.perturbation = parse_perturbation(value);
            else if (key == "base_metric") {
                if (value == "round") s.base = BaseMetric::round;
                else if (value == "embedded") s.base = BaseMetric::embedded;
                else throw ParseError("base_metric must be 'round' or 'embedded'");
            }
            else if (key == "horizon") s.horizon = parse_number(value);
            else if (key == "dt") s.dt = parse_number(value);
            else if (key == "stride") s.stride = parse_int(value);
            else if (key == "k") s.k = parse_int(value);
            else if (key == "eig_tol") s.eig_tol = parse_number(value);
            else if (key == "conservation_tol") s.conservation_tol = parse_number(value);
            else if (key == "verify_tol") s.verify_tol = parse_number(value);
            else if (key == "output") s.output = value;
            else if (key == "report") s.report = value;
            else throw ParseError("unknown key '" + key + "'");
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    if (!(s.horizon > 0.0)) throw ParseError("horizon must be positive");
    if (!(s.dt > 0.0)) throw ParseError("dt must be positive");
    if (s.stride < 1) throw ParseError("stride must be at least 1");
    if (s.k < 1) throw ParseError("k must be at least 1");
    if (!(s.eig_tol > 0.0)) throw ParseError("eig_tol must be positive");
    if (s.geometry.kind == GeometrySpec::Kind::off_file) s.geometry.path = resolve(s.geometry.path);
    if (s.perturbation.field == "file") s.perturbation.path = resolve(s.perturbation.path);
    if (!s.output.empty()) s.output = resolve(s.output);
    if (!s.report.empty()) s.report = resolve(s.report);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario " + path.string());
    return parse_scenario(in, path.parent_path());
}

TriangleMesh build_geometry(const GeometrySpec& g)
{
    switch (g.kind) {
    case GeometrySpec::Kind::icosphere: return icosphere(g.level);
    case GeometrySpec::Kind::torus_grid: return torus_grid(g.nx, g.ny, g.lx, g.ly);
    case GeometrySpec::Kind::off_file: return read_off(g.path);
    case GeometrySpec::Kind::product_spheres: break;
    }
    throw DimensionMismatch("product_spheres is not a mesh geometry");
}

Eigen::VectorXd evaluate_perturbation(const PerturbationSpec& p, const TriangleMesh& mesh)
{
    const int n = mesh.num_vertices();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    if (p.field == "none") return u;
    if (p.field == "file") {
        std::ifstream in(p.path);
        if (!in) throw ParseError("cannot open perturbation file " + p.path.string());
        for (int i = 0; i < n; ++i) {
            if (!(in >> u[i])) throw ParseError("perturbation file " + p.path.string() + " has fewer than " + std::to_string(n) + " values");
        }
        double extra = 0.0;
        if (in >> extra) throw ParseError("perturbation file " + p.path.string() + " has more than " + std::to_string(n) + " values");
        return u;
    }
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector3d& x = mesh.vertices()[static_cast<std::size_t>(i)];
        double v = 0.0;
        if (p.field == "const") v = 1.0;
        else if (p.field == "x_coord") v = x.x();
        else if (p.field == "sin_x") v = std::sin(x.x());
        else if (p.field == "sin_x_sin_y") v = std::sin(x.x()) * std::sin(x.y());
        else if (p.field == "cos2x_sin2y") v = std::cos(2.0 * x.x()) + 0.5 * std::sin(2.0 * x.y());
        else throw ParseError("unknown perturbation field '" + p.field + "'");
        u[i] = p.amplitude * v;
    }
    return u;
}

PreparedSurface prepare_surface(const Scenario& scenario)
{
    TriangleMesh mesh = build_geometry(scenario.geometry);
    DiscreteOperators ops = assemble_operators(mesh);
    SurfaceFlowConfig config;
    config.id = scenario.id;
    config.geometry = scenario.geometry.label();
    config.initial_u = evaluate_perturbation(scenario.perturbation, mesh);
    if (scenario.base == BaseMetric::round) config.initial_u += uniformizing_factor(ops);
    config.horizon = scenario.horizon;
    config.dt = scenario.dt;
    config.stride = scenario.stride;
    config.k = scenario.k;
    config.eig_tol = scenario.eig_tol;
    config.conservation_tol = scenario.conservation_tol;
    return {std::move(mesh), std::move(ops), std::move(config)};
}

ProductScenario prepare_product(const Scenario& scenario)
{
    if (scenario.geometry.kind != GeometrySpec::Kind::product_spheres) throw DimensionMismatch("not a product_spheres scenario");
    ProductScenario p;
    p.id = scenario.id;
    p.initial.p = scenario.geometry.p;
    p.initial.q = scenario.geometry.q;
    p.initial.a = scenario.geometry.a0;
    p.initial.b = scenario.geometry.b0;
    p.horizon = scenario.horizon;
    p.dt = scenario.dt;
    p.stride = scenario.stride;
    p.k = scenario.k;
    return p;
}

FlowTrace simulate(const Scenario& scenario)
{
    if (scenario.geometry.kind == GeometrySpec::Kind::product_spheres) {
        FlowTrace trace = run_product(prepare_product(scenario));
        trace.meta.extra["perturbation"] = "none";
        return trace;
    }
    const PreparedSurface prepared = prepare_surface(scenario);
    FlowTrace trace = [&] {
        try {
            return run_surface_flow(prepared.mesh, prepared.ops, prepared.config);
        } catch (RunAborted& e) {
            FlowTrace partial = e.partial();
            partial.meta.extra["perturbation"] = scenario.perturbation.label();
            partial.meta.extra["base_metric"] = scenario.base == BaseMetric::round ? "round" : "embedded";
            throw RunAborted(std::move(partial), e.cause(), e.what());
        }
    }();
    trace.meta.extra["perturbation"] = scenario.perturbation.label();
    trace.meta.extra["base_metric"] = scenario.base == BaseMetric::round ? "round" : "embedded";
    return trace;
}

} // namespace ricci
