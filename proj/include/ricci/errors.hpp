#pragma once

#include <stdexcept>
#include <string>

namespace ricci {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class MeshErrorKind {
    NonManifoldEdge,
    InconsistentOrientation,
    DegenerateFace,
    IndexOutOfRange,
    IsolatedVertex,
};

class MeshError : public Error
{
public:
    MeshError(MeshErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
    MeshErrorKind kind() const noexcept { return kind_; }

private:
    MeshErrorKind kind_;
};

/// Conformal factor left the representable range (runaway flow).
class OverflowError : public Error
{
public:
    using Error::Error;
};

/// Explicit step would move some vertex by more than the displacement guard.
class StepRejected : public Error
{
public:
    StepRejected(double displacement, const std::string& what) : Error(what), displacement_(displacement) {}
    double displacement() const noexcept { return displacement_; }

private:
    double displacement_;
};

class ConvergenceFailure : public Error
{
public:
    ConvergenceFailure(int iterations, double worst_residual, const std::string& what)
        : Error(what), iterations_(iterations), worst_residual_(worst_residual)
    {}
    int iterations() const noexcept { return iterations_; }
    double worst_residual() const noexcept { return worst_residual_; }

private:
    int iterations_;
    double worst_residual_;
};

/// A curvature bound escapes to infinity at `horizon()`.
class BoundBlowup : public Error
{
public:
    BoundBlowup(double horizon, const std::string& what) : Error(what), horizon_(horizon) {}
    double horizon() const noexcept { return horizon_; }

private:
    double horizon_;
};

class DimensionMismatch : public Error
{
public:
    using Error::Error;
};

/// The eigenvalue is not separated from its neighbours; its derivative is not defined.
class DegenerateEigenvalue : public Error
{
public:
    using Error::Error;
};

class ParseError : public Error
{
public:
    using Error::Error;
};

} // namespace ricci
