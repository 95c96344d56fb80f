#include <ricci/trace.hpp>

#include <ricci/errors.hpp>

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ricci {

namespace {

double parse_double(std::string_view text, const std::string& context)
{
    // from_chars rejects a leading '+'
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) {
        throw ParseError(context + ": not a number: '" + std::string(text) + "'");
    }
    return value;
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

void apply_meta(TraceMeta& meta, const std::string& key, const std::string& value)
{
    const std::string ctx = "meta " + key;
    if (key == "scenario") meta.scenario = value;
    else if (key == "geometry") meta.geometry = value;
    else if (key == "n") meta.n = static_cast<int>(parse_double(value, ctx));
    else if (key == "chi") meta.chi = static_cast<int>(parse_double(value, ctx));
    else if (key == "rho0") meta.rho0 = parse_double(value, ctx);
    else if (key == "delta0") meta.delta0 = parse_double(value, ctx);
    else if (key == "r0") meta.r0 = parse_double(value, ctx);
    else if (key == "h") meta.h = parse_double(value, ctx);
    else if (key == "dt") meta.dt = parse_double(value, ctx);
    else if (key == "horizon") meta.horizon = parse_double(value, ctx);
    else if (key == "truncated_at") meta.truncated_at = parse_double(value, ctx);
    else if (key == "branch_ambiguity") meta.branch_ambiguity = value == "true";
    else if (key == "plus_hypothesis_end") meta.plus_hypothesis_end = parse_double(value, ctx);
    else if (key == "minus_hypothesis_end") meta.minus_hypothesis_end = parse_double(value, ctx);
    else meta.extra[key] = value;
}

} // namespace

std::string format_double(double x)
{
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

std::string trace_header(int k)
{
    std::string h = "t,r,min_R,max_R,area,sigma,phi,psi,w_plus,w_minus";
    for (const char* prefix : {"lam_", "Q_plus_", "Q_minus_"}) {
        for (int i = 1; i <= k; ++i) h += "," + std::string(prefix) + std::to_string(i);
    }
    return h;
}

void write_trace_csv(const FlowTrace& trace, std::ostream& out)
{
    const TraceMeta& m = trace.meta;
    auto line = [&](const std::string& key, const std::string& value) { out << "# " << key << '=' << value << '\n'; };
    line("scenario", m.scenario);
    line("geometry", m.geometry);
    line("n", std::to_string(m.n));
    if (m.chi) line("chi", std::to_string(*m.chi));
    line("rho0", format_double(m.rho0));
    line("delta0", format_double(m.delta0));
    line("r0", format_double(m.r0));
    line("h", format_double(m.h));
    line("dt", format_double(m.dt));
    line("horizon", format_double(m.horizon));
    if (m.truncated_at) line("truncated_at", format_double(*m.truncated_at));
    line("branch_ambiguity", m.branch_ambiguity ? "true" : "false");
    if (m.plus_hypothesis_end) line("plus_hypothesis_end", format_double(*m.plus_hypothesis_end));
    if (m.minus_hypothesis_end) line("minus_hypothesis_end", format_double(*m.minus_hypothesis_end));
    for (const auto& [key, value] : m.extra) line(key, value);

    const int k = trace.k();
    out << trace_header(k) << '\n';
    for (const auto& row : trace.rows) {
        out << format_double(row.t);
        for (double x : {row.r, row.min_r, row.max_r, row.area, row.sigma, row.phi, row.psi, row.w_plus, row.w_minus}) {
            out << ',' << format_double(x);
        }
        for (const auto* column : {&row.lambda, &row.q_plus, &row.q_minus}) {
            for (double x : *column) out << ',' << format_double(x);
        }
        out << '\n';
    }
}

void write_trace_csv(const FlowTrace& trace, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    write_trace_csv(trace, out);
}

FlowTrace read_trace_csv(std::istream& in)
{
    FlowTrace trace;
    std::string line;
    bool have_header = false;
    int k = 0;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (have_header) continue;
            const auto body = line.find_first_not_of("# ");
            const auto eq = line.find('=');
            if (body == std::string::npos || eq == std::string::npos || eq < body) continue;
            apply_meta(trace.meta, line.substr(body, eq - body), line.substr(eq + 1));
            continue;
        }
        const std::vector<std::string> fields = split(line, ',');
        if (!have_header) {
            constexpr std::size_t fixed = 10;
            if (fields.size() < fixed + 3 || (fields.size() - fixed) % 3 != 0) {
                throw ParseError("line " + std::to_string(line_no) + ": malformed trace header");
            }
            k = static_cast<int>((fields.size() - fixed) / 3);
            if (line != trace_header(k)) throw ParseError("line " + std::to_string(line_no) + ": unexpected trace header '" + line + "'");
            have_header = true;
            continue;
        }
        const std::string ctx = "line " + std::to_string(line_no);
        if (fields.size() != static_cast<std::size_t>(10 + 3 * k)) {
            throw ParseError(ctx + ": expected " + std::to_string(10 + 3 * k) + " fields, got " + std::to_string(fields.size()));
        }
        FlowSample row;
        double* scalars[] = {&row.t, &row.r, &row.min_r, &row.max_r, &row.area, &row.sigma, &row.phi, &row.psi, &row.w_plus, &row.w_minus};
        std::size_t f = 0;
        for (double* target : scalars) *target = parse_double(fields[f++], ctx);
        for (auto* column : {&row.lambda, &row.q_plus, &row.q_minus}) {
            for (int i = 0; i < k; ++i) column->push_back(parse_double(fields[f++], ctx));
        }
        if (!trace.rows.empty() && !(row.t > trace.rows.back().t)) throw ParseError(ctx + ": times must increase strictly");
        trace.rows.push_back(std::move(row));
    }
    if (!have_header) throw ParseError("trace has no header row");
    if (trace.rows.empty()) throw ParseError("trace has no samples");
    return trace;
}

FlowTrace read_trace_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open trace " + path.string());
    return read_trace_csv(in);
}

} // namespace ricci
