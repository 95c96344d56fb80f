#pragma once

#include <ricci/errors.hpp>
#include <ricci/mesh.hpp>
#include <ricci/trace.hpp>

#include <exception>
#include <string>

#include <Eigen/Core>

namespace ricci {

/// Metric g(t) = e^{2u} g(0) on a surface.
struct ConformalState
{
    Eigen::VectorXd u;
    double t = 0.0;
};

/// Largest |u| a state may carry before the run is considered divergent.
inline constexpr double kMaxConformalFactor = 350.0;
/// A step may move no vertex's u by more than this amount.
inline constexpr double kStepDisplacementGuard = 0.1;

/// du/dt = (r - R) / 2, the normalized Ricci flow for g = e^{2u} g0 in dimension two.
Eigen::VectorXd flow_rhs(const DiscreteOperators& ops, const ConformalState& state);

/// One classical fourth-order Runge-Kutta step. Throws StepRejected when
/// max|du/dt| * dt exceeds kStepDisplacementGuard, OverflowError on runaway states.
ConformalState step(const DiscreteOperators& ops, const ConformalState& state, double dt);

/// Conformal factor w with constant curvature e^{-2w}(R0 + 2 S w / A) = 4 pi chi / area
/// and unchanged total area: the discrete round (uniformized) metric.
Eigen::VectorXd uniformizing_factor(const DiscreteOperators& ops, double tol = 1e-12);

struct SurfaceFlowConfig
{
    std::string id = "surface";
    std::string geometry = "mesh";
    Eigen::VectorXd initial_u; ///< empty means u = 0
    double horizon = 1.0;
    double dt = 1e-3;
    int stride = 10;
    int k = 4;
    double eig_tol = 1e-9;
    /// Relative tolerance of the per-sample area and r conservation assertions.
    double conservation_tol = 1e-6;
};

/// Conservation assertion failed along a run.
class ConservationViolation : public Error
{
public:
    using Error::Error;
};

/// A run stopped on an error; carries the rows recorded so far.
class RunAborted : public Error
{
public:
    RunAborted(FlowTrace partial, std::exception_ptr cause, const std::string& what)
        : Error(what), partial_(std::move(partial)), cause_(std::move(cause))
    {}
    const FlowTrace& partial() const noexcept { return partial_; }
    const std::exception_ptr& cause() const noexcept { return cause_; }

private:
    FlowTrace partial_;
    std::exception_ptr cause_;
};

///
/// Integrates the surface flow and samples every `stride` steps: curvature extremes,
/// area, r, the closed-form surface bounds and weights, and k tracked eigenvalue
/// branches with their monotone quantities. Rows stop before the horizon of psi.
///
FlowTrace run_surface_flow(const TriangleMesh& mesh, const DiscreteOperators& ops, const SurfaceFlowConfig& config);
FlowTrace run_surface_flow(const TriangleMesh& mesh, const SurfaceFlowConfig& config);

} // namespace ricci
