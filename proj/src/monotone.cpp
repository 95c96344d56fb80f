#include <ricci/monotone.hpp>

#include <ricci/bounds.hpp>
#include <ricci/errors.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace ricci {

std::string to_string(QuantityKind kind)
{
    switch (kind) {
    case QuantityKind::Q1plus: return "Q1plus";
    case QuantityKind::Q1minus: return "Q1minus";
    case QuantityKind::Q2plus: return "Q2plus";
    case QuantityKind::Q2minus: return "Q2minus";
    }
    return "?";
}

std::string to_string(Direction direction)
{
    return direction == Direction::nondecreasing ? "nondecreasing" : "nonincreasing";
}

std::string to_string(Verdict verdict)
{
    switch (verdict) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::skipped: return "skipped";
    }
    return "?";
}

QuantityKind parse_quantity(const std::string& name)
{
    for (auto kind : {QuantityKind::Q1plus, QuantityKind::Q1minus, QuantityKind::Q2plus, QuantityKind::Q2minus}) {
        if (to_string(kind) == name) return kind;
    }
    throw ParseError("unknown quantity '" + name + "' (expected Q1plus, Q1minus, Q2plus or Q2minus)");
}

Direction proven_direction(QuantityKind kind)
{
    return kind == QuantityKind::Q1plus || kind == QuantityKind::Q2plus ? Direction::nondecreasing : Direction::nonincreasing;
}

namespace {

bool is_plus(QuantityKind kind)
{
    return kind == QuantityKind::Q1plus || kind == QuantityKind::Q2plus;
}

/// Number of leading rows on which the curvature hypothesis holds.
std::size_t hypothesis_rows(const FlowTrace& trace, QuantityKind kind, std::string& note)
{
    const auto& rows = trace.rows;
    const TraceMeta& meta = trace.meta;
    if (meta.n == 2) {
        // The Einstein tensor vanishes on surfaces; only Q1minus needs Rc = R g / 2 >= 0.
        if (kind != QuantityKind::Q1minus) return rows.size();
        std::size_t j = 0;
        while (j < rows.size() && rows[j].min_r >= 0.0) ++j;
        if (j < rows.size()) note = "Rc >= 0 fails from t = " + format_double(rows[j].t);
        return j;
    }
    const std::optional<double>& end = is_plus(kind) ? meta.plus_hypothesis_end : meta.minus_hypothesis_end;
    if (!end) return rows.size();
    if (*end < 0.0) {
        note = "FlagNeverHolds";
        return 0;
    }
    std::size_t j = 0;
    while (j < rows.size() && rows[j].t <= *end) ++j;
    if (j < rows.size()) note = "hypothesis holds until t = " + format_double(*end);
    return j;
}

} // namespace

std::vector<QuantitySeries> quantity_series(const FlowTrace& trace, QuantityKind kind)
{
    const TraceMeta& meta = trace.meta;
    const bool surface_kind = kind == QuantityKind::Q2plus || kind == QuantityKind::Q2minus;
    if (surface_kind && meta.n != 2) {
        throw DimensionMismatch(to_string(kind) + " is defined for surfaces only (trace has n = " + std::to_string(meta.n) + ")");
    }
    std::string note;
    const std::size_t valid = hypothesis_rows(trace, kind, note);
    const int k = trace.k();
    std::vector<QuantitySeries> out(static_cast<std::size_t>(k));
    for (int b = 0; b < k; ++b) {
        out[static_cast<std::size_t>(b)].kind = kind;
        out[static_cast<std::size_t>(b)].branch = b + 1;
        out[static_cast<std::size_t>(b)].hypothesis_holds = valid > 0;
        out[static_cast<std::size_t>(b)].note = note;
    }

    // Columns already hold the natural weights: closed forms on surfaces, the general
    // weights in higher dimension. Q1* on a surface is rebuilt from the r column.
    const bool from_columns = surface_kind || meta.n != 2;
    CurvatureHistory history(meta.n);
    for (std::size_t j = 0; j < valid; ++j) {
        const FlowSample& row = trace.rows[j];
        double weight = 0.0;
        if (from_columns) {
            weight = is_plus(kind) ? row.w_plus : row.w_minus;
        } else {
            history.append(row.t, row.r);
            try {
                weight = is_plus(kind) ? weight_plus(meta.n, meta.rho0, history, row.t) : weight_minus(meta.n, meta.delta0, history, row.t);
            } catch (const BoundBlowup& e) {
                for (auto& s : out) s.note = "bound blowup at t* = " + format_double(e.horizon());
                break;
            }
        }
        for (int b = 0; b < k; ++b) {
            auto& s = out[static_cast<std::size_t>(b)];
            const double lambda = row.lambda[static_cast<std::size_t>(b)];
            s.t.push_back(row.t);
            if (from_columns) {
                s.value.push_back(is_plus(kind) ? row.q_plus[static_cast<std::size_t>(b)] : row.q_minus[static_cast<std::size_t>(b)]);
            } else {
                s.value.push_back(weight * lambda);
            }
        }
    }
    return out;
}

MonotoneReport verdict(std::span<const double> t, std::span<const double> values, Direction direction, double tol)
{
    if (t.size() != values.size()) throw DimensionMismatch("time and value series differ in length");
    if (values.size() < 2) throw Error("a monotonicity verdict needs at least two samples");
    MonotoneReport report;
    report.direction = direction;
    report.t.assign(t.begin(), t.end());
    report.value.assign(values.begin(), values.end());
    report.tol = tol;
    report.t_end = t.back();
    const double sign = direction == Direction::nondecreasing ? 1.0 : -1.0;
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 < values.size(); ++j) {
        const double against = sign * (values[j] - values[j + 1]);
        worst = std::max(worst, against / std::max(std::abs(values[j]), kViolationFloor));
    }
    report.max_violation = worst;
    report.verdict = worst <= tol ? Verdict::pass : Verdict::fail;
    return report;
}

double default_tolerance(double h, double dt)
{
    return 1e-6 + 10.0 * h * h + 10.0 * dt;
}

std::vector<MonotoneReport> verify_trace(const FlowTrace& trace, std::span<const QuantityKind> kinds, double tol)
{
    std::vector<MonotoneReport> reports;
    for (const QuantityKind kind : kinds) {
        std::vector<Direction> directions = {proven_direction(kind)};
        // The chi = 0 minus quantity is stated as non-decreasing although the argument
        // (and the parallel statements) give non-increasing; report both.
        const bool torus_minus = kind == QuantityKind::Q2minus && trace.meta.chi && *trace.meta.chi == 0;
        if (torus_minus) directions.push_back(Direction::nondecreasing);

        for (const QuantitySeries& series : quantity_series(trace, kind)) {
            for (const Direction direction : directions) {
                MonotoneReport report;
                if (series.t.size() >= 2) {
                    report = verdict(series.t, series.value, direction, tol);
                } else {
                    report.direction = direction;
                    report.tol = tol;
                    report.t = series.t;
                    report.value = series.value;
                    report.t_end = series.t.empty() ? 0.0 : series.t.back();
                    report.verdict = Verdict::skipped;
                }
                report.quantity = to_string(kind) + "_" + std::to_string(series.branch);
                report.note = series.note;
                if (direction != proven_direction(kind)) {
                    report.informational = true;
                    report.note = report.note.empty() ? "direction as stated for chi = 0" : report.note + "; direction as stated for chi = 0";
                }
                reports.push_back(std::move(report));
            }
        }
    }
    return reports;
}

bool all_pass(std::span<const MonotoneReport> reports)
{
    return std::all_of(reports.begin(), reports.end(), [](const MonotoneReport& r) {
        return r.informational || r.verdict != Verdict::fail;
    });
}

void write_reports_csv(std::span<const MonotoneReport> reports, std::ostream& out)
{
    out << "quantity,direction,tol,max_violation,verdict,t_end\n";
    for (const auto& r : reports) {
        out << r.quantity << ',' << to_string(r.direction) << ',' << format_double(r.tol) << ',' << format_double(r.max_violation)
            << ',' << to_string(r.verdict) << ',' << format_double(r.t_end) << '\n';
    }
}

void write_reports_text(std::span<const MonotoneReport> reports, std::ostream& out)
{
    for (const auto& r : reports) {
        out << std::left << std::setw(12) << r.quantity << ' ' << std::setw(14) << to_string(r.direction) << ' '
            << std::setw(7) << to_string(r.verdict) << " max_violation=" << std::scientific << std::setprecision(3)
            << r.max_violation << " tol=" << r.tol << std::defaultfloat << " t_end=" << r.t_end;
        if (r.informational) out << " [informational]";
        if (!r.note.empty()) out << " (" << r.note << ')';
        out << '\n';
    }
    const bool ok = all_pass(reports);
    out << (ok ? "all verdicts pass" : "some verdicts FAIL") << '\n';
}

void require_simple(std::span<const EigenPair> pairs, std::size_t index)
{
    if (index >= pairs.size()) throw Error("eigenpair index out of range");
    const EigenPair& pair = pairs[index];
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        if (j == index) continue;
        const double gap = std::abs(pairs[j].value - pair.value);
        const double needed = 10.0 * std::max({pair.residual, pairs[j].residual, kRelativeGapFloor * std::max(1.0, std::abs(pair.value))});
        if (gap <= needed) {
            throw DegenerateEigenvalue(
                "eigenvalue " + format_double(pair.value) + " is not simple (gap " + format_double(gap) + " to a neighbour)");
        }
    }
}

double eigen_rate_rhs(const DiscreteOperators& ops, const ConformalState& state, std::span<const EigenPair> pairs, std::size_t index)
{
    if (index >= pairs.size()) throw Error("eigenpair index out of range");
    const AreaAndMass am = area_and_mass(ops, state.u);
    const Eigen::VectorXd curv = curvature(ops, state.u);
    const double r = curv.dot(am.mass) / am.total_area;
    if ((curv.array() - r).abs().maxCoeff() <= kUniformCurvature * std::max(1.0, std::abs(r))) return 0.0;
    require_simple(pairs, index);
    const EigenPair& pair = pairs[index];
    const Eigen::ArrayXd weighted = pair.vector.array().square() * am.mass.array();
    return pair.value * ((curv.array() - r) * weighted).sum() / weighted.sum();
}

} // namespace ricci
