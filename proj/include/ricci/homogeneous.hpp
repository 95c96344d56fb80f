#pragma once

#include <ricci/trace.hpp>

#include <string>
#include <vector>

namespace ricci {

///
/// Product of round spheres S^p(a) x S^q(b). The normalized Ricci flow preserves the
/// product structure and reduces to an ODE for the radii; scalar curvature is
/// spatially constant, so r = R and rho0 = delta0 = R(0).
///
/// p = 1 is a flat circle factor (Rc = 0 along it, eigenvalues l^2 / a^2).
///
struct ProductSphereState
{
    int p = 1;
    int q = 2;
    double a = 1.0;
    double b = 1.0;
    double t = 0.0;

    int n() const noexcept { return p + q; }
};

void validate(const ProductSphereState& state);

/// R = p(p-1)/a^2 + q(q-1)/b^2.
double scalar_curvature(const ProductSphereState& state);

/// Vol(S^p(a) x S^q(b)) = |S^p| a^p |S^q| b^q.
double normalized_volume(const ProductSphereState& state);

struct ProductRates
{
    double da = 0.0;
    double db = 0.0;
};

/// d(a^2)/dt = -2(p-1) + (2r/n) a^2 and likewise for b.
ProductRates product_rhs(const ProductSphereState& state);

/// Classical RK4 step of the radii ODE.
ProductSphereState product_step(const ProductSphereState& state, double dt);

/// Laplacian mode l(l+p-1)/a^2 + m(m+q-1)/b^2.
struct ProductMode
{
    int l = 0;
    int m = 0;
    double value = 0.0;
};

double mode_value(const ProductSphereState& state, int l, int m);

/// The k smallest distinct nonzero eigenvalues with one representative mode each.
std::vector<ProductMode> product_modes(const ProductSphereState& state, int k);
std::vector<double> product_spectrum(const ProductSphereState& state, int k);

/// Curvature hypotheses of the general-dimension quantities, equality counted as satisfied:
/// plus needs Rc - R g / 2 >= 0, minus needs 0 <= Rc <= R g / 2.
struct ConditionFlags
{
    bool plus_ok = false;
    bool minus_ok = false;
};

ConditionFlags condition_flags(const ProductSphereState& state);

struct ProductScenario
{
    std::string id = "product";
    ProductSphereState initial;
    double horizon = 1.0;
    double dt = 1e-3;
    int stride = 1;
    int k = 2;
};

///
/// Integrates the radii, samples every `stride` steps, and fills the trace with the
/// general-dimension bounds and weights computed from the sampled r. Eigenvalue
/// branches follow the modes that are lowest at t = 0. The run ends at the earliest
/// bound blowup. Hypothesis intervals go to the trace metadata (negative end = never).
///
FlowTrace run_product(const ProductScenario& scenario);

} // namespace ricci
