#pragma once

#include <optional>
#include <span>
#include <vector>

namespace ricci {

///
/// Samples of the average scalar curvature r(t) on a strictly increasing time grid
/// starting at t = 0, together with the two integrals every curvature bound needs:
///
///   sigma(t) = int_0^t r,             I(t) = int_0^t exp(-(2/n) sigma).
///
/// r is interpolated linearly between samples. sigma is then exactly the composite
/// trapezoid rule on the samples; I is integrated per interval with Gauss-Legendre
/// quadrature of the (piecewise quadratic) sigma, which is exact to rounding when r is
/// constant.
///
class CurvatureHistory
{
public:
    explicit CurvatureHistory(int dimension);

    /// Uniform grid on [0, horizon] with `intervals` steps and r constant.
    static CurvatureHistory constant(int dimension, double r, double horizon, int intervals);

    void append(double t, double r);

    int dimension() const noexcept { return dimension_; }
    std::span<const double> times() const noexcept { return times_; }
    std::span<const double> r() const noexcept { return r_; }
    std::span<const double> sigma() const noexcept { return sigma_; }
    bool empty() const noexcept { return times_.empty(); }
    double end_time() const { return times_.back(); }

    double sigma_at(double t) const;
    double exp_integral_at(double t) const;

private:
    std::size_t segment(double t) const;
    double sigma_in_segment(std::size_t j, double s) const;
    double exp_integral_in_segment(std::size_t j, double s) const;

    int dimension_;
    std::vector<double> times_;
    std::vector<double> r_;
    std::vector<double> sigma_;
    std::vector<double> exp_integral_;
};

///
/// Solution of the comparison ODE y' = rate * y * (y - (2 / (n rate)) r(t)), y(0) = y0,
/// in the integrated form
///
///   y(t) = 1 / ( e^{(2/n) sigma(t)} (1/y0 - rate * I(t)) ).
///
/// rate = 2/n gives the lower bound phi (R >= phi); rate = 2 gives the upper bound psi
/// valid under Rc >= 0; on surfaces the sharp upper bound uses rate = 1, the same ODE
/// as phi. y0 = 0 is the identically zero solution.
///
struct RiccatiBound
{
    double rate = 1.0;
    double initial = 0.0;

    /// Throws BoundBlowup when t is at or past the horizon.
    double value(const CurvatureHistory& history, double t) const;
    /// int_0^t y, equal to -(1/rate) log(y0 * (1/y0 - rate I(t))).
    double integral(const CurvatureHistory& history, double t) const;
    /// First time inside the sampled range where y escapes to +infinity.
    std::optional<double> blowup_horizon(const CurvatureHistory& history) const;

private:
    double denominator(const CurvatureHistory& history, double t) const;
};

RiccatiBound lower_bound(int n, double rho0);
RiccatiBound upper_bound(int n, double delta0);
/// psi for surfaces: psi' = psi (psi - r).
RiccatiBound surface_upper_bound(double delta0);

double phi_general(int n, double rho0, const CurvatureHistory& history, double t);
double psi_general(int n, double delta0, const CurvatureHistory& history, double t);

/// exp( int_0^t [(2/n) r - phi] ).
double weight_plus(int n, double rho0, const CurvatureHistory& history, double t);
/// exp( (2/n) sigma(t) - int_0^t psi ).
double weight_minus(int n, double delta0, const CurvatureHistory& history, double t);

// Closed forms on surfaces, where r is the constant r0 = 4 pi chi / area.
double phi_2d(double rho0, double r0, bool chi_zero, double t);
double psi_2d(double delta0, double r0, bool chi_zero, double t);
/// Horizon of y' = y (y - r0), y(0) = y0, if it blows up forward in time.
std::optional<double> blowup_2d(double y0, double r0, bool chi_zero);

/// |y0/r0 - (y0/r0) e^{r0 t} + e^{r0 t}| (chi != 0) or 1 - y0 t (chi == 0).
double weight_2d(double y0, double r0, bool chi_zero, double t);
inline double weight_2d_plus(double rho0, double r0, bool chi_zero, double t)
{
    return weight_2d(rho0, r0, chi_zero, t);
}
inline double weight_2d_minus(double delta0, double r0, bool chi_zero, double t)
{
    return weight_2d(delta0, r0, chi_zero, t);
}

/// Sampled bound data along a history (the integrating factors of the monotone quantities).
struct BoundsState
{
    int n = 2;
    double rho0 = 0.0;
    double delta0 = 0.0;
    double r0 = 0.0;
    std::vector<double> times;
    std::vector<double> r;
    std::vector<double> sigma;
    std::vector<double> phi;
    std::vector<double> psi;
    std::vector<double> int_phi;
    std::vector<double> int_psi;
    std::optional<double> phi_blowup;
    std::optional<double> psi_blowup;
};

/// Evaluates phi and psi (general laws) on every sample strictly before the first
/// blowup horizon; later samples are dropped.
BoundsState evaluate_bounds(int n, double rho0, double delta0, const CurvatureHistory& history);

} // namespace ricci
