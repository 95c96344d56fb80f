// ricci_monotone: simulate flows, verify monotone quantities, check eigenvalue rates.
//
// Exit codes: 0 all verdicts pass, 1 some verdict fails, 2 bad input, 3 numerical failure.

#include <ricci/errors.hpp>
#include <ricci/monotone.hpp>
#include <ricci/rate_check.hpp>
#include <ricci/scenario.hpp>
#include <ricci/surface_flow.hpp>
#include <ricci/trace.hpp>

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

enum Exit { kPass = 0, kFail = 1, kBadInput = 2, kNumerical = 3 };

std::filesystem::path default_output(const ricci::Scenario& s, const std::string& suffix)
{
    return std::filesystem::path(s.id + suffix);
}

void write_trace_or_throw(const ricci::FlowTrace& trace, const std::filesystem::path& path)
{
    ricci::write_trace_csv(trace, path);
    std::cerr << "trace written to " << path.string() << '\n';
}

void print_summary(const ricci::FlowTrace& trace)
{
    std::ostringstream line;
    line << "tEnd=" << trace.t_end() << " r0=" << trace.meta.r0;
    line << " chi=" << (trace.meta.chi ? std::to_string(*trace.meta.chi) : std::string("n/a"));
    if (!trace.rows.empty() && !trace.rows.front().lambda.empty()) {
        line << " lambda1(0)=" << trace.rows.front().lambda.front() << " lambda1(tEnd)=" << trace.rows.back().lambda.front();
    }
    if (trace.meta.truncated_at) line << " truncated_at=" << *trace.meta.truncated_at;
    std::cout << line.str() << '\n';
}

int run_simulate(const std::string& scenario_path, const std::string& output_override)
{
    const ricci::Scenario scenario = ricci::load_scenario(scenario_path);
    std::filesystem::path out = !output_override.empty() ? std::filesystem::path(output_override)
                                : !scenario.output.empty() ? scenario.output
                                                           : default_output(scenario, "_trace.csv");
    try {
        const ricci::FlowTrace trace = ricci::simulate(scenario);
        write_trace_or_throw(trace, out);
        print_summary(trace);
        return kPass;
    } catch (const ricci::RunAborted& e) {
        write_trace_or_throw(e.partial(), out);
        std::cerr << "run aborted: " << e.what() << '\n';
        return kNumerical;
    }
}

int run_verify(const std::string& trace_path, const std::vector<std::string>& names, std::optional<double> tol, const std::string& report_path)
{
    const ricci::FlowTrace trace = ricci::read_trace_csv(std::filesystem::path(trace_path));
    std::vector<ricci::QuantityKind> kinds;
    for (const auto& name : names) kinds.push_back(ricci::parse_quantity(name));
    if (kinds.empty()) {
        if (trace.meta.n == 2) kinds = {ricci::QuantityKind::Q2plus, ricci::QuantityKind::Q2minus};
        else kinds = {ricci::QuantityKind::Q1plus, ricci::QuantityKind::Q1minus};
    }
    const double used_tol = tol ? *tol : trace.meta.n == 2 ? ricci::default_tolerance(trace.meta.h, trace.meta.dt)
                                                           : ricci::default_tolerance(0.0, trace.meta.dt);
    if (!(used_tol >= 0.0)) throw ricci::ParseError("tolerance must be non-negative");
    const auto reports = ricci::verify_trace(trace, kinds, used_tol);
    const std::filesystem::path report = report_path.empty() ? std::filesystem::path(trace_path + ".report.csv") : std::filesystem::path(report_path);
    std::ofstream out(report);
    if (!out) throw ricci::ParseError("cannot write report " + report.string());
    ricci::write_reports_csv(reports, out);
    ricci::write_reports_text(reports, std::cout);
    return ricci::all_pass(reports) ? kPass : kFail;
}

int run_rate_check(const std::string& scenario_path, const std::string& output_override, int branch)
{
    const ricci::Scenario scenario = ricci::load_scenario(scenario_path);
    if (scenario.geometry.kind == ricci::GeometrySpec::Kind::product_spheres) {
        throw ricci::DimensionMismatch("rate-check works on surface scenarios only");
    }
    const ricci::PreparedSurface prepared = ricci::prepare_surface(scenario);
    const ricci::RateCheckReport report = ricci::rate_check(prepared.ops, prepared.config, branch);
    const std::filesystem::path out_path = !output_override.empty() ? std::filesystem::path(output_override)
                                           : !scenario.report.empty() ? scenario.report
                                                                      : default_output(scenario, "_rates.csv");
    std::ofstream out(out_path);
    if (!out) throw ricci::ParseError("cannot write " + out_path.string());
    ricci::write_rate_csv(report, out);
    std::cout << "checked=" << report.checked << " skipped=" << report.skipped << " max_relative_gap=" << report.max_gap
              << " tol=" << report.tolerance << '\n';
    if (report.all_skipped()) {
        std::cerr << "warning: every sample was skipped (eigenvalue not simple); nothing was compared\n";
        return kPass;
    }
    std::cout << (report.pass() ? "rate check passes" : "rate check FAILS") << '\n';
    return report.pass() ? kPass : kFail;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Monotone eigenvalue quantities along the normalized Ricci flow"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads for linear algebra (default: RM_THREADS or 1)")->check(CLI::PositiveNumber);

    std::string scenario_path, output, trace_path, report_path;
    std::string quantities;
    std::optional<double> tol;
    int branch = 1;

    auto* sim = app.add_subcommand("simulate", "Run a scenario and write its trace CSV");
    sim->add_option("scenario", scenario_path, "Scenario file")->required();
    sim->add_option("-o,--output", output, "Trace CSV path (overrides the scenario)");

    auto* ver = app.add_subcommand("verify", "Check monotonicity of quantities in a trace");
    ver->add_option("trace", trace_path, "Trace CSV")->required();
    ver->add_option("--quantities", quantities, "Comma-separated list of Q1plus, Q1minus, Q2plus, Q2minus");
    ver->add_option("--tol", tol, "Relative violation tolerance");
    ver->add_option("--report", report_path, "Report CSV path (default <trace>.report.csv)");

    auto* rate = app.add_subcommand("rate-check", "Compare finite-difference eigenvalue rates with the rate formula");
    rate->add_option("scenario", scenario_path, "Scenario file")->required();
    rate->add_option("-o,--output", output, "Rate CSV path");
    rate->add_option("--branch", branch, "1-based eigenvalue branch")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kBadInput;
    }

    try {
        if (threads == 0) {
            if (const char* env = std::getenv("RM_THREADS")) {
                threads = std::atoi(env);
                if (threads < 1) throw ricci::ParseError("RM_THREADS must be a positive integer");
            } else {
                threads = 1;
            }
        }
        Eigen::setNbThreads(threads);

        if (*sim) return run_simulate(scenario_path, output);
        if (*ver) {
            std::vector<std::string> names;
            std::stringstream ss(quantities);
            for (std::string item; std::getline(ss, item, ',');) {
                if (!item.empty()) names.push_back(item);
            }
            return run_verify(trace_path, names, tol, report_path);
        }
        if (*rate) return run_rate_check(scenario_path, output, branch - 1);
    } catch (const ricci::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const ricci::MeshError& e) {
        std::cerr << "mesh error: " << e.what() << '\n';
        return kBadInput;
    } catch (const ricci::DimensionMismatch& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const ricci::Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kBadInput;
}
