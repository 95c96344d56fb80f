#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ricci {

/// One time sample of a flow.
struct FlowSample
{
    double t = 0.0;
    double r = 0.0;
    double min_r = 0.0;
    double max_r = 0.0;
    double area = 0.0; ///< total volume of (M, g(t))
    double sigma = 0.0;
    double phi = 0.0;
    double psi = 0.0;
    double w_plus = 1.0;
    double w_minus = 1.0;
    std::vector<double> lambda; ///< tracked eigenvalue branches
    std::vector<double> q_plus; ///< w_plus * lambda
    std::vector<double> q_minus;
};

struct TraceMeta
{
    std::string scenario;
    std::string geometry;
    int n = 2;
    std::optional<int> chi; ///< surfaces only
    double rho0 = 0.0;
    double delta0 = 0.0;
    double r0 = 0.0;
    double h = 0.0; ///< mean edge length (0 for exact reductions)
    double dt = 0.0;
    double horizon = 0.0;             ///< requested end time
    std::optional<double> truncated_at; ///< bound blowup horizon that cut the run short
    bool branch_ambiguity = false;
    /// End of the initial interval on which the Einstein-tensor hypotheses hold.
    std::optional<double> plus_hypothesis_end;
    std::optional<double> minus_hypothesis_end;
    std::map<std::string, std::string> extra;
};

struct FlowTrace
{
    TraceMeta meta;
    std::vector<FlowSample> rows;

    int k() const { return rows.empty() ? 0 : static_cast<int>(rows.front().lambda.size()); }
    double t_end() const { return rows.empty() ? 0.0 : rows.back().t; }
};

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);

/// Header row of the trace CSV for k eigenvalue branches.
std::string trace_header(int k);

/// Metadata as `# key=value` lines, then the header, then one row per sample.
void write_trace_csv(const FlowTrace& trace, std::ostream& out);
void write_trace_csv(const FlowTrace& trace, const std::filesystem::path& path);

/// Throws ParseError on malformed input.
FlowTrace read_trace_csv(std::istream& in);
FlowTrace read_trace_csv(const std::filesystem::path& path);

} // namespace ricci
