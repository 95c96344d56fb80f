#pragma once

#include <ricci/mesh.hpp>
#include <ricci/spectrum.hpp>
#include <ricci/surface_flow.hpp>
#include <ricci/trace.hpp>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ricci {

enum class Direction { nondecreasing, nonincreasing };

///
/// Q1plus / Q1minus: general-dimension weights exp(int[(2/n) r - phi]) and
/// exp((2/n) sigma - int psi) times lambda. Q2plus / Q2minus: the surface closed-form
/// weights times lambda.
///
enum class QuantityKind { Q1plus, Q1minus, Q2plus, Q2minus };

std::string to_string(QuantityKind kind);
std::string to_string(Direction direction);
QuantityKind parse_quantity(const std::string& name);
/// Direction the quantity is proven to follow.
Direction proven_direction(QuantityKind kind);

/// weight(t) * lambda(t) along one tracked eigenvalue branch.
struct QuantitySeries
{
    QuantityKind kind = QuantityKind::Q2plus;
    int branch = 1; ///< 1-based
    std::vector<double> t;
    std::vector<double> value;
    /// Empty when the curvature hypothesis fails at t = 0.
    bool hypothesis_holds = true;
    std::string note;
};

/// Throws DimensionMismatch for Q2* on traces with n != 2. Series end at the first
/// bound blowup or where the curvature hypothesis stops holding.
std::vector<QuantitySeries> quantity_series(const FlowTrace& trace, QuantityKind kind);

enum class Verdict { pass, fail, skipped };
std::string to_string(Verdict verdict);

struct MonotoneReport
{
    std::string quantity;
    Direction direction = Direction::nondecreasing;
    std::vector<double> t;
    std::vector<double> value;
    double tol = 0.0;
    double max_violation = 0.0;
    Verdict verdict = Verdict::skipped;
    double t_end = 0.0;
    /// Reported for reference only; does not count toward an overall pass.
    bool informational = false;
    std::string note;
};

/// Values below this magnitude are compared in absolute rather than relative terms.
inline constexpr double kViolationFloor = 1e-12;

/// Largest relative step against `direction`; pass iff it is at most `tol`.
MonotoneReport verdict(std::span<const double> t, std::span<const double> values, Direction direction, double tol);

/// 1e-6 analytic slack plus discretization allowances 10 h^2 and 10 dt.
double default_tolerance(double h, double dt);

/// Reports for every branch of each requested quantity. On chi = 0 surfaces the minus
/// quantity (1 - delta0 t) lambda is also reported as nondecreasing (informational).
std::vector<MonotoneReport> verify_trace(const FlowTrace& trace, std::span<const QuantityKind> kinds, double tol);

bool all_pass(std::span<const MonotoneReport> reports);

void write_reports_csv(std::span<const MonotoneReport> reports, std::ostream& out);
void write_reports_text(std::span<const MonotoneReport> reports, std::ostream& out);

/// Throws DegenerateEigenvalue unless `pairs[index]` is separated from every other pair
/// by more than ten times the larger residual (and a relative floor).
void require_simple(std::span<const EigenPair> pairs, std::size_t index);

///
/// Right-hand side of the eigenvalue evolution formula on a surface, where the
/// Einstein term vanishes:
///
///   d lambda / dt = lambda * sum (R_i - r) v_i^2 m_i / sum v_i^2 m_i,   m = A e^{2u}.
///
/// Returns 0 when R is constant (any vector of the eigenspace gives 0); otherwise the
/// pair must pass require_simple.
///
double eigen_rate_rhs(const DiscreteOperators& ops, const ConformalState& state, std::span<const EigenPair> pairs, std::size_t index);

/// Spread of R, relative to max(1, |r|), below which the metric counts as a fixed point.
inline constexpr double kUniformCurvature = 1e-10;
inline constexpr double kRelativeGapFloor = 1e-10;

} // namespace ricci
