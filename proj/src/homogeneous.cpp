#include <ricci/homogeneous.hpp>

#include <ricci/bounds.hpp>
#include <ricci/errors.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ricci {

namespace {

/// Slack when comparing Ricci eigenvalues with R / 2, relative to max(1, curvature scale).
constexpr double kFlagSlack = 1e-12;

double unit_sphere_volume(int dim)
{
    const double half = 0.5 * (dim + 1);
    return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

} // namespace

void validate(const ProductSphereState& state)
{
    if (state.p < 1 || state.q < 2) throw DimensionMismatch("product spheres need p >= 1 and q >= 2");
    if (!(state.a > 0.0) || !(state.b > 0.0)) throw Error("product sphere radii must be positive");
}

double scalar_curvature(const ProductSphereState& s)
{
    return s.p * (s.p - 1) / (s.a * s.a) + s.q * (s.q - 1) / (s.b * s.b);
}

double normalized_volume(const ProductSphereState& s)
{
    return unit_sphere_volume(s.p) * std::pow(s.a, s.p) * unit_sphere_volume(s.q) * std::pow(s.b, s.q);
}

ProductRates product_rhs(const ProductSphereState& s)
{
    const double r = scalar_curvature(s);
    const double n = s.n();
    return {(-(s.p - 1) + r / n * s.a * s.a) / s.a, (-(s.q - 1) + r / n * s.b * s.b) / s.b};
}

ProductSphereState product_step(const ProductSphereState& s, double dt)
{
    auto at = [&](const ProductRates& k, double frac) {
        ProductSphereState x = s;
        x.a += frac * dt * k.da;
        x.b += frac * dt * k.db;
        return x;
    };
    const ProductRates k1 = product_rhs(s);
    const ProductRates k2 = product_rhs(at(k1, 0.5));
    const ProductRates k3 = product_rhs(at(k2, 0.5));
    const ProductRates k4 = product_rhs(at(k3, 1.0));
    ProductSphereState next = s;
    next.a += dt / 6.0 * (k1.da + 2.0 * k2.da + 2.0 * k3.da + k4.da);
    next.b += dt / 6.0 * (k1.db + 2.0 * k2.db + 2.0 * k3.db + k4.db);
    next.t += dt;
    if (!(next.a > 0.0) || !(next.b > 0.0)) throw OverflowError("a sphere factor collapsed at t = " + std::to_string(next.t));
    return next;
}

double mode_value(const ProductSphereState& s, int l, int m)
{
    return l * (l + s.p - 1) / (s.a * s.a) + m * (m + s.q - 1) / (s.b * s.b);
}

std::vector<ProductMode> product_modes(const ProductSphereState& s, int k)
{
    if (k < 1) throw Error("k must be at least 1");
    // The pure circle/sphere modes l = 1..k are already k distinct values, so no
    // mode with l > k or m > k can be among the k smallest.
    std::vector<ProductMode> all;
    for (int l = 0; l <= k; ++l) {
        for (int m = 0; m <= k; ++m) {
            if (l == 0 && m == 0) continue;
            all.push_back({l, m, mode_value(s, l, m)});
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const ProductMode& x, const ProductMode& y) { return x.value < y.value; });
    std::vector<ProductMode> out;
    for (const auto& mode : all) {
        if (!out.empty() && std::abs(mode.value - out.back().value) <= 1e-12 * mode.value) continue;
        out.push_back(mode);
        if (static_cast<int>(out.size()) == k) break;
    }
    return out;
}

std::vector<double> product_spectrum(const ProductSphereState& s, int k)
{
    std::vector<double> values;
    for (const auto& mode : product_modes(s, k)) values.push_back(mode.value);
    return values;
}

ConditionFlags condition_flags(const ProductSphereState& s)
{
    const double ric_a = (s.p - 1) / (s.a * s.a);
    const double ric_b = (s.q - 1) / (s.b * s.b);
    const double half_r = 0.5 * scalar_curvature(s);
    const double slack = kFlagSlack * std::max({1.0, std::abs(half_r), std::abs(ric_a), std::abs(ric_b)});
    ConditionFlags flags;
    flags.plus_ok = ric_a >= half_r - slack && ric_b >= half_r - slack;
    flags.minus_ok = ric_a >= -slack && ric_b >= -slack && ric_a <= half_r + slack && ric_b <= half_r + slack;
    return flags;
}

FlowTrace run_product(const ProductScenario& scenario)
{
    ProductSphereState state = scenario.initial;
    state.t = 0.0;
    validate(state);
    if (!(scenario.horizon > 0.0) || !(scenario.dt > 0.0) || scenario.stride < 1 || scenario.k < 1) {
        throw Error("product run needs horizon > 0, dt > 0, stride >= 1 and k >= 1");
    }
    const int n = state.n();

    FlowTrace trace;
    TraceMeta& meta = trace.meta;
    meta.scenario = scenario.id;
    meta.geometry = "product_spheres(" + std::to_string(state.p) + "," + std::to_string(state.q) + ")";
    meta.n = n;
    meta.r0 = scalar_curvature(state);
    meta.rho0 = meta.r0;
    meta.delta0 = meta.r0;
    meta.dt = scenario.dt;
    meta.horizon = scenario.horizon;

    const std::vector<ProductMode> branches = product_modes(state, scenario.k);
    CurvatureHistory history(n);
    const RiccatiBound lower = lower_bound(n, meta.rho0);
    const RiccatiBound upper = upper_bound(n, meta.delta0);
    bool plus_holding = true;
    bool minus_holding = true;

    // Returns false once a bound has blown up; the sample is then dropped.
    auto record = [&](const ProductSphereState& s) {
        const double r = scalar_curvature(s);
        history.append(s.t, r);
        FlowSample row;
        row.t = s.t;
        row.r = r;
        row.min_r = r;
        row.max_r = r;
        row.area = normalized_volume(s);
        row.sigma = history.sigma().back();
        try {
            row.phi = lower.value(history, s.t);
            row.psi = upper.value(history, s.t);
            row.w_plus = std::exp(2.0 / n * row.sigma - lower.integral(history, s.t));
            row.w_minus = std::exp(2.0 / n * row.sigma - upper.integral(history, s.t));
        } catch (const BoundBlowup& e) {
            meta.truncated_at = e.horizon();
            return false;
        }
        for (const auto& mode : branches) {
            const double lambda = mode_value(s, mode.l, mode.m);
            row.lambda.push_back(lambda);
            row.q_plus.push_back(row.w_plus * lambda);
            row.q_minus.push_back(row.w_minus * lambda);
        }

        const ConditionFlags flags = condition_flags(s);
        if (plus_holding && !flags.plus_ok) {
            plus_holding = false;
            meta.plus_hypothesis_end = trace.rows.empty() ? -1.0 : trace.rows.back().t;
        }
        if (minus_holding && !flags.minus_ok) {
            minus_holding = false;
            meta.minus_hypothesis_end = trace.rows.empty() ? -1.0 : trace.rows.back().t;
        }
        trace.rows.push_back(std::move(row));
        return true;
    };

    record(state);
    const auto steps = static_cast<long>(std::llround(scenario.horizon / scenario.dt));
    for (long s = 1; s <= steps; ++s) {
        state = product_step(state, scenario.dt);
        state.t = static_cast<double>(s) * scenario.dt;
        if (s % scenario.stride == 0 || s == steps) {
            if (!record(state)) break;
        }
    }
    if (plus_holding) meta.plus_hypothesis_end = trace.t_end();
    if (minus_holding) meta.minus_hypothesis_end = trace.t_end();
    return trace;
}

} // namespace ricci
