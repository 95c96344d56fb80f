#pragma once

#include <ricci/mesh.hpp>
#include <ricci/surface_flow.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace ricci {

/// One comparison of a centred finite difference of lambda against the rate formula.
struct RateRow
{
    double t = 0.0;
    double lambda = 0.0;
    double finite_difference = 0.0;
    double formula = 0.0;
    double relative_gap = 0.0;
    bool skipped = false;
    std::string note;
};

struct RateCheckReport
{
    std::vector<RateRow> rows;
    double tolerance = 0.05;
    double max_gap = 0.0;
    int checked = 0;
    int skipped = 0;

    bool pass() const noexcept { return max_gap <= tolerance; }
    bool all_skipped() const noexcept { return checked == 0; }
};

/// Magnitudes of the finite difference below this are compared absolutely.
inline constexpr double kRateFloor = 1e-8;

///
/// Runs the flow of `config` and at every stride multiple compares
/// (lambda(t + dt) - lambda(t - dt)) / (2 dt) along tracked branch `branch`
/// with the rate formula evaluated at t. Rows where the eigenvalue is not
/// simple are marked skipped.
///
RateCheckReport rate_check(
    const DiscreteOperators& ops,
    const SurfaceFlowConfig& config,
    int branch = 0,
    double tolerance = 0.05);

void write_rate_csv(const RateCheckReport& report, std::ostream& out);

} // namespace ricci
