#pragma once

#include <stdexcept>
#include <string>

namespace levygibbs {

/// Base of every recoverable failure raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// |u|^p quadrature left the representable range.
class QuadratureOverflow : public Error
{
public:
    using Error::Error;
};

/// Inversion cutoffs leave more characteristic-function mass outside the
/// rectangle than the requested tolerance.
class CutoffTooSmall : public Error
{
public:
    using Error::Error;
};

/// Rejection sampling hit its attempt budget before collecting enough fields.
class BudgetExhausted : public Error
{
public:
    BudgetExhausted(const std::string& what, unsigned long long attempts, unsigned long long accepted)
      : Error(what)
      , attempts_(attempts)
      , accepted_(accepted)
    {}

    unsigned long long attempts() const { return attempts_; }
    unsigned long long accepted() const { return accepted_; }

private:
    unsigned long long attempts_;
    unsigned long long accepted_;
};

class MissingDensity : public Error
{
public:
    using Error::Error;
};

/// Effective sample size of an importance-weighted ensemble fell below the floor.
class DegenerateWeights : public Error
{
public:
    using Error::Error;
};

class InsufficientTailEvents : public Error
{
public:
    using Error::Error;
};

/// Time stepping diverged or the step violates the stability bound.
class Instability : public Error
{
public:
    using Error::Error;
};

class MismatchedSpec : public Error
{
public:
    using Error::Error;
};

/// Invalid user configuration; the message names the violated invariant.
class ConfigError : public Error
{
public:
    using Error::Error;
};

} // namespace levygibbs
