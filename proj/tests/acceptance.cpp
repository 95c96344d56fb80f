// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <ricci/bounds.hpp>
#include <ricci/errors.hpp>
#include <ricci/homogeneous.hpp>
#include <ricci/mesh.hpp>
#include <ricci/monotone.hpp>
#include <ricci/rate_check.hpp>
#include <ricci/scenario.hpp>
#include <ricci/spectrum.hpp>
#include <ricci/surface_flow.hpp>

#include <boost/numeric/odeint.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ricci;

namespace {

namespace fs = std::filesystem;
namespace odeint = boost::numeric::odeint;

constexpr double kPi = std::numbers::pi;

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string sci(double x)
{
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << x;
    return os.str();
}

Scenario scenario(const std::string& name)
{
    return load_scenario(fs::path(RICCI_SCENARIO_DIR) / (name + ".scn"));
}

/// Simulated traces are shared between criteria.
const FlowTrace& trace(const std::string& name)
{
    static std::map<std::string, FlowTrace> cache;
    auto it = cache.find(name);
    if (it == cache.end()) it = cache.emplace(name, simulate(scenario(name))).first;
    return it->second;
}

/// Steps the scenario's flow over its full horizon (ignoring bound blowups) and
/// records the worst r and area drift over the stride samples.
struct Conservation
{
    double r_gap = 0.0;   ///< max |r - 4 pi chi / area| / max(1, |r0|)
    double area_drift = 0.0;
    double t_end = 0.0;
};

Conservation conservation(const std::string& name)
{
    const Scenario s = scenario(name);
    const PreparedSurface prep = prepare_surface(s);
    const DiscreteOperators& ops = prep.ops;
    const double gauss_bonnet = 4.0 * kPi * ops.euler_characteristic;

    ConformalState state{prep.config.initial_u, 0.0};
    const AreaAndMass start = area_and_mass(ops, state.u);
    const double area0 = start.total_area;
    const double r0 = mean_curvature_r(ops, state.u);
    Conservation c;
    auto sample = [&] {
        const AreaAndMass am = area_and_mass(ops, state.u);
        const double r = curvature(ops, state.u).dot(am.mass) / am.total_area;
        c.r_gap = std::max(c.r_gap, std::abs(r - gauss_bonnet / am.total_area) / std::max(1.0, std::abs(r0)));
        c.area_drift = std::max(c.area_drift, std::abs(am.total_area - area0) / area0);
        c.t_end = state.t;
    };
    sample();
    const long steps = std::lround(s.horizon / s.dt);
    for (long j = 1; j <= steps; ++j) {
        state = step(ops, state, s.dt);
        state.t = j * s.dt;
        if (j % s.stride == 0 || j == steps) sample();
    }
    return c;
}

const Conservation& cached_conservation(const std::string& name)
{
    static std::map<std::string, Conservation> cache;
    auto it = cache.find(name);
    if (it == cache.end()) it = cache.emplace(name, conservation(name)).first;
    return it->second;
}

const std::vector<std::string> kSurfaces = {"torus_perturbed", "icosphere_perturbed"};

Outcome gauss_bonnet()
{
    Outcome o{true, ""};
    for (const auto& name : kSurfaces) {
        const Conservation& c = cached_conservation(name);
        o.pass = o.pass && c.r_gap <= 1e-6 && c.t_end >= 2.0 - 1e-12;
        o.detail += name + " max|r - 4 pi chi/area|/max(1,|r0|)=" + sci(c.r_gap) + " to t=" + std::to_string(c.t_end) + "; ";
    }
    return o;
}

Outcome volume()
{
    Outcome o{true, ""};
    for (const auto& name : kSurfaces) {
        const Conservation& c = cached_conservation(name);
        o.pass = o.pass && c.area_drift <= 1e-6 && c.t_end >= 2.0 - 1e-12;
        o.detail += name + " area drift=" + sci(c.area_drift) + "; ";
    }
    return o;
}

Outcome envelope()
{
    Outcome o{true, ""};
    for (const auto& name : kSurfaces) {
        const FlowTrace& tr = trace(name);
        const double eps = 0.02 * (tr.meta.delta0 - tr.meta.rho0) + 10.0 * tr.meta.h * tr.meta.h;
        double worst = -INFINITY;
        for (const auto& row : tr.rows) worst = std::max({worst, row.phi - row.min_r, row.max_r - row.psi});
        o.pass = o.pass && worst <= eps;
        o.detail += name + " worst excursion=" + sci(worst) + " eps=" + sci(eps) + " t_end=" + std::to_string(tr.t_end()) + "; ";
    }
    return o;
}

Outcome surface_quantity(QuantityKind kind)
{
    Outcome o{true, ""};
    for (const auto& name : kSurfaces) {
        const FlowTrace& tr = trace(name);
        const double tol = default_tolerance(tr.meta.h, tr.meta.dt);
        const std::vector<QuantityKind> kinds = {kind};
        for (const auto& r : verify_trace(tr, kinds, tol)) {
            if (!r.informational) o.pass = o.pass && r.verdict == Verdict::pass;
            o.detail += name + " " + r.quantity + " " + to_string(r.direction) + " " + to_string(r.verdict) +
                        (r.informational ? " [informational]" : "") + " maxViolation=" + sci(r.max_violation) +
                        " tol=" + sci(tol) + "; ";
        }
    }
    return o;
}

Outcome product_minus()
{
    const Scenario s = scenario("s1xs2");
    // Hypothesis flags along the full requested horizon.
    ProductSphereState state = prepare_product(s).initial;
    bool flags = condition_flags(state).minus_ok;
    const long steps = std::lround(s.horizon / s.dt);
    for (long j = 1; j <= steps; ++j) {
        state = product_step(state, s.dt);
        flags = flags && condition_flags(state).minus_ok;
    }

    const FlowTrace& tr = trace("s1xs2");
    const double tol = default_tolerance(0.0, tr.meta.dt);
    const std::vector<QuantityKind> kinds = {QuantityKind::Q1minus};
    Outcome o{flags, "minus flags on [0, " + std::to_string(s.horizon) + "]: " + (flags ? "true" : "false") + "; "};
    if (tr.meta.truncated_at) o.detail += "bounds blow up at t*=" + std::to_string(*tr.meta.truncated_at) + "; ";
    for (const auto& r : verify_trace(tr, kinds, tol)) {
        o.pass = o.pass && r.verdict == Verdict::pass;
        o.detail += r.quantity + " " + to_string(r.verdict) + " maxViolation=" + sci(r.max_violation) + " tol=" + sci(tol) +
                    " on [0, " + std::to_string(r.t_end) + "]; ";
    }
    return o;
}

Outcome rate()
{
    const PreparedSurface prep = prepare_surface(scenario("torus_rate"));
    const RateCheckReport report = rate_check(prep.ops, prep.config);
    return {report.checked > 0 && report.max_gap <= 0.05,
            "max relative gap=" + sci(report.max_gap) + " over " + std::to_string(report.checked) + " samples (" +
                std::to_string(report.skipped) + " skipped)"};
}

Outcome closed_forms()
{
    const double expected = 2.0 / (1.0 + std::exp(2.0));
    const auto history = CurvatureHistory::constant(2, 2.0, 1.0, 100);
    const double quadrature = phi_general(2, 1.0, history, 1.0);
    const double closed = phi_2d(1.0, 2.0, false, 1.0);

    std::vector<double> y = {1.0};
    auto rhs = [](const std::vector<double>& x, std::vector<double>& dx, double) { dx[0] = x[0] * (x[0] - 2.0); };
    odeint::integrate_adaptive(odeint::make_controlled<odeint::runge_kutta_dopri5<std::vector<double>>>(1e-14, 1e-14), rhs, y, 0.0, 1.0, 1e-4);

    const auto psi_history = CurvatureHistory::constant(2, 2.0, 1.0, 100);
    const double horizon = upper_bound(2, 3.0).blowup_horizon(psi_history).value_or(INFINITY);
    const double horizon_gap = std::abs(horizon - std::log(1.5) / 2.0);

    const double gap = std::max({std::abs(quadrature - expected), std::abs(closed - expected), std::abs(y[0] - expected)});
    return {gap <= 1e-8 && horizon_gap <= 1e-10,
            "phi(1) quadrature=" + sci(quadrature) + " closed=" + sci(closed) + " ode=" + sci(y[0]) + " max gap=" + sci(gap) +
                "; psi horizon gap=" + sci(horizon_gap)};
}

Outcome weight_identity()
{
    double worst = 0.0;
    for (const auto& [rho0, r0] : {std::pair{1.0, 2.0}, std::pair{-0.5, 1.5}, std::pair{-2.0, -1.0}}) {
        const auto history = CurvatureHistory::constant(2, r0, 1.0, 99);
        for (int j = 0; j < 100; ++j) {
            const double t = j / 99.0;
            const double w = weight_2d_plus(rho0, r0, false, t);
            worst = std::max(worst, std::abs(weight_plus(2, rho0, history, t) - w) / w);
        }
    }
    Outcome o{worst <= 1e-10, "max relative weight gap=" + sci(worst) + "; "};
    for (const auto& name : kSurfaces) {
        const FlowTrace& tr = trace(name);
        const double tol = default_tolerance(tr.meta.h, tr.meta.dt);
        const std::vector<QuantityKind> q1 = {QuantityKind::Q1plus};
        const std::vector<QuantityKind> q2 = {QuantityKind::Q2plus};
        const auto a = verify_trace(tr, q1, tol);
        const auto b = verify_trace(tr, q2, tol);
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i) same = a[i].verdict == b[i].verdict;
        o.pass = o.pass && same;
        o.detail += name + " Q1plus/Q2plus verdicts " + (same ? "coincide" : "differ") + "; ";
    }
    return o;
}

Outcome spectrum()
{
    // Dense oracle with randomized lumped masses.
    double dense_gap = 0.0;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> factor(0.5, 2.0);
    for (const TriangleMesh& mesh : {icosphere(2), torus_grid(16, 16, 2 * kPi, 2 * kPi), torus_grid(12, 20, 3.0, 5.0)}) {
        const DiscreteOperators ops = assemble_operators(mesh);
        Eigen::VectorXd mass = ops.base_mass;
        for (auto& m : mass) m *= factor(rng);
        const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(ops.stiffness), Eigen::MatrixXd(mass.asDiagonal()));
        const auto pairs = smallest_eigenpairs(ops.stiffness, mass, 6, 1e-10);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const double oracle = eig.eigenvalues()[static_cast<Eigen::Index>(i) + 1];
            dense_gap = std::max(dense_gap, std::abs(pairs[i].value - oracle) / oracle);
        }
    }

    std::vector<double> sphere_errors;
    for (int level = 2; level <= 4; ++level) {
        const DiscreteOperators ops = assemble_operators(icosphere(level));
        sphere_errors.push_back(std::abs(smallest_eigenpairs(ops.stiffness, ops.base_mass, 1, 1e-9)[0].value - 2.0) / 2.0);
    }
    const bool converging = sphere_errors[0] > sphere_errors[1] && sphere_errors[1] > sphere_errors[2];

    const int n = 64;
    const double h = 2 * kPi / n;
    const DiscreteOperators torus = assemble_operators(torus_grid(n, n, 2 * kPi, 2 * kPi));
    const double torus_error = std::abs(smallest_eigenpairs(torus.stiffness, torus.base_mass, 1, 1e-9)[0].value - 1.0);

    return {dense_gap <= 1e-7 && sphere_errors[2] <= 0.02 && converging && torus_error <= h * h,
            "dense oracle gap=" + sci(dense_gap) + "; icosphere lambda1 relative error levels 2..4=" + sci(sphere_errors[0]) +
                "," + sci(sphere_errors[1]) + "," + sci(sphere_errors[2]) + "; torus 64x64 |lambda1 - 1|=" + sci(torus_error) +
                " h^2=" + sci(h * h)};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"r equals 4 pi chi / area", gauss_bonnet},
        {"area constancy", volume},
        {"curvature envelope", envelope},
        {"Q2plus nondecreasing", [] { return surface_quantity(QuantityKind::Q2plus); }},
        {"Q2minus nonincreasing", [] { return surface_quantity(QuantityKind::Q2minus); }},
        {"S1xS2 Q1minus nonincreasing", product_minus},
        {"eigenvalue rate formula", rate},
        {"bound closed forms", closed_forms},
        {"weight identity", weight_identity},
        {"spectral correctness", spectrum},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << " | " << o.detail
                  << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << std::endl;
    return failures == 0 ? 0 : 1;
}
