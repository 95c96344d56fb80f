#include <ricci/bounds.hpp>

#include <ricci/errors.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace ricci {

namespace {

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 4> kNodes = {
    0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
constexpr std::array<double, 4> kWeights = {
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

constexpr double kHorizonWidth = 1e-13;

template <typename F>
double gauss_legendre(F&& f, double a, double b)
{
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < kNodes.size(); ++i) {
        sum += kWeights[i] * (f(mid - half * kNodes[i]) + f(mid + half * kNodes[i]));
    }
    return half * sum;
}

BoundBlowup blowup_error(double horizon)
{
    return BoundBlowup(horizon, "curvature bound blows up at t* = " + std::to_string(horizon));
}

} // namespace

CurvatureHistory::CurvatureHistory(int dimension)
    : dimension_(dimension)
{
    if (dimension < 2) throw DimensionMismatch("dimension must be at least 2");
}

CurvatureHistory CurvatureHistory::constant(int dimension, double r, double horizon, int intervals)
{
    CurvatureHistory h(dimension);
    for (int i = 0; i <= intervals; ++i) h.append(horizon * i / intervals, r);
    return h;
}

void CurvatureHistory::append(double t, double r)
{
    if (!std::isfinite(t) || !std::isfinite(r)) throw Error("non-finite curvature sample");
    if (times_.empty()) {
        if (t != 0.0) throw Error("curvature history must start at t = 0");
        times_.push_back(0.0);
        r_.push_back(r);
        sigma_.push_back(0.0);
        exp_integral_.push_back(0.0);
        return;
    }
    if (!(t > times_.back())) throw Error("curvature history times must increase strictly");
    times_.push_back(t);
    r_.push_back(r);
    const std::size_t j = times_.size() - 2;
    const double h = t - times_[j];
    sigma_.push_back(sigma_[j] + 0.5 * h * (r_[j] + r));
    exp_integral_.push_back(exp_integral_[j] + exp_integral_in_segment(j, h));
}

std::size_t CurvatureHistory::segment(double t) const
{
    if (times_.empty()) throw Error("empty curvature history");
    const double end = times_.back();
    if (t < 0.0 || t > end * (1.0 + 1e-14) + 1e-300) {
        throw Error("t = " + std::to_string(t) + " lies outside the sampled range [0, " + std::to_string(end) + "]");
    }
    if (times_.size() == 1) return 0;
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - times_.begin() - 1, 0));
    return std::min(idx, times_.size() - 2);
}

double CurvatureHistory::sigma_in_segment(std::size_t j, double s) const
{
    const double h = times_[j + 1] - times_[j];
    return sigma_[j] + r_[j] * s + 0.5 * (r_[j + 1] - r_[j]) / h * s * s;
}

double CurvatureHistory::exp_integral_in_segment(std::size_t j, double s) const
{
    if (s <= 0.0) return 0.0;
    const double c = 2.0 / dimension_;
    const double scale = c * std::max(std::abs(r_[j]), std::abs(r_[j + 1])) * s;
    const int pieces = 1 + static_cast<int>(scale / 0.5);
    double sum = 0.0;
    for (int p = 0; p < pieces; ++p) {
        const double a = s * p / pieces;
        const double b = s * (p + 1) / pieces;
        sum += gauss_legendre([&](double x) { return std::exp(-c * sigma_in_segment(j, x)); }, a, b);
    }
    return sum;
}

double CurvatureHistory::sigma_at(double t) const
{
    const std::size_t j = segment(t);
    if (times_.size() == 1) return 0.0;
    return sigma_in_segment(j, t - times_[j]);
}

double CurvatureHistory::exp_integral_at(double t) const
{
    const std::size_t j = segment(t);
    if (times_.size() == 1) return 0.0;
    if (t == times_[j + 1]) return exp_integral_[j + 1];
    return exp_integral_[j] + exp_integral_in_segment(j, t - times_[j]);
}

double RiccatiBound::denominator(const CurvatureHistory& history, double t) const
{
    return 1.0 / initial - rate * history.exp_integral_at(t);
}

double RiccatiBound::value(const CurvatureHistory& history, double t) const
{
    if (initial == 0.0) return 0.0;
    const double d = denominator(history, t);
    if (!(initial * d > 0.0)) throw blowup_error(blowup_horizon(history).value_or(t));
    const double c = 2.0 / history.dimension();
    return 1.0 / (std::exp(c * history.sigma_at(t)) * d);
}

double RiccatiBound::integral(const CurvatureHistory& history, double t) const
{
    if (initial == 0.0) return 0.0;
    const double d = denominator(history, t);
    if (!(initial * d > 0.0)) throw blowup_error(blowup_horizon(history).value_or(t));
    return -std::log(initial * d) / rate;
}

std::optional<double> RiccatiBound::blowup_horizon(const CurvatureHistory& history) const
{
    // I(t) increases, so only a positive start can reach the root 1/y0 = rate I.
    if (!(initial > 0.0)) return std::nullopt;
    const double target = 1.0 / (rate * initial);
    const auto t = history.times();
    std::size_t j = 0;
    while (j < t.size() && history.exp_integral_at(t[j]) < target) ++j;
    if (j == t.size()) return std::nullopt;
    if (j == 0) return 0.0;
    double lo = t[j - 1];
    double hi = t[j];
    while (hi - lo > kHorizonWidth) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (history.exp_integral_at(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

RiccatiBound lower_bound(int n, double rho0)
{
    return {2.0 / n, rho0};
}

RiccatiBound upper_bound(int /*n*/, double delta0)
{
    return {2.0, delta0};
}

RiccatiBound surface_upper_bound(double delta0)
{
    return {1.0, delta0};
}

double phi_general(int n, double rho0, const CurvatureHistory& history, double t)
{
    if (history.dimension() != n) throw DimensionMismatch("history dimension differs from n");
    return lower_bound(n, rho0).value(history, t);
}

double psi_general(int n, double delta0, const CurvatureHistory& history, double t)
{
    if (history.dimension() != n) throw DimensionMismatch("history dimension differs from n");
    return upper_bound(n, delta0).value(history, t);
}

double weight_plus(int n, double rho0, const CurvatureHistory& history, double t)
{
    if (history.dimension() != n) throw DimensionMismatch("history dimension differs from n");
    return std::exp(2.0 / n * history.sigma_at(t) - lower_bound(n, rho0).integral(history, t));
}

double weight_minus(int n, double delta0, const CurvatureHistory& history, double t)
{
    if (history.dimension() != n) throw DimensionMismatch("history dimension differs from n");
    return std::exp(2.0 / n * history.sigma_at(t) - upper_bound(n, delta0).integral(history, t));
}

std::optional<double> blowup_2d(double y0, double r0, bool chi_zero)
{
    if (!(y0 > 0.0)) return std::nullopt;
    if (chi_zero) return 1.0 / y0;
    // 1 = (1 - r0/y0) e^{r0 t}
    const double arg = y0 / (y0 - r0);
    if (!(arg > 0.0) || !std::isfinite(arg)) return std::nullopt;
    const double t = std::log(arg) / r0;
    if (t > 0.0 && std::isfinite(t)) return t;
    return std::nullopt;
}

namespace {

double riccati_2d(double y0, double r0, bool chi_zero, double t)
{
    if (y0 == 0.0) return 0.0;
    if (const auto horizon = blowup_2d(y0, r0, chi_zero); horizon && t >= *horizon) throw blowup_error(*horizon);
    if (chi_zero) return y0 / (1.0 - y0 * t);
    if (r0 == 0.0) throw Error("closed form for chi != 0 requires r0 != 0");
    const double den = 1.0 - (1.0 - r0 / y0) * std::exp(r0 * t);
    // The denominator keeps the sign it has at t = 0 (r0 / y0) until the horizon.
    if (!(den * (r0 / y0) > 0.0)) throw Error("denominator changed sign before the blowup horizon");
    return r0 / den;
}

} // namespace

double phi_2d(double rho0, double r0, bool chi_zero, double t)
{
    return riccati_2d(rho0, r0, chi_zero, t);
}

double psi_2d(double delta0, double r0, bool chi_zero, double t)
{
    return riccati_2d(delta0, r0, chi_zero, t);
}

double weight_2d(double y0, double r0, bool chi_zero, double t)
{
    if (chi_zero) {
        if (std::abs(r0) > 1e-8) throw Error("chi = 0 requires r0 = 0, got " + std::to_string(r0));
        return 1.0 - y0 * t;
    }
    if (r0 == 0.0) throw Error("weight for chi != 0 requires r0 != 0");
    const double grow = std::exp(r0 * t);
    return std::abs(y0 / r0 - y0 / r0 * grow + grow);
}

BoundsState evaluate_bounds(int n, double rho0, double delta0, const CurvatureHistory& history)
{
    if (history.dimension() != n) throw DimensionMismatch("history dimension differs from n");
    BoundsState s;
    s.n = n;
    s.rho0 = rho0;
    s.delta0 = delta0;
    s.r0 = history.r().front();
    const RiccatiBound lower = lower_bound(n, rho0);
    const RiccatiBound upper = upper_bound(n, delta0);
    s.phi_blowup = lower.blowup_horizon(history);
    s.psi_blowup = upper.blowup_horizon(history);
    const double limit = std::min(s.phi_blowup.value_or(INFINITY), s.psi_blowup.value_or(INFINITY));

    const auto t = history.times();
    for (std::size_t j = 0; j < t.size() && t[j] < limit; ++j) {
        s.times.push_back(t[j]);
        s.r.push_back(history.r()[j]);
        s.sigma.push_back(history.sigma()[j]);
        s.phi.push_back(lower.value(history, t[j]));
        s.psi.push_back(upper.value(history, t[j]));
        s.int_phi.push_back(lower.integral(history, t[j]));
        s.int_psi.push_back(upper.integral(history, t[j]));
    }
    return s;
}

} // namespace ricci
