#pragma once

#include <stdexcept>
#include <string>

namespace bubble {

/// Base of every error raised by the library.
class BubbleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluation requested inside |sigma - f| <= eps where the potential diverges.
class SingularBand : public BubbleError {
public:
    using BubbleError::BubbleError;
};

class DomainError : public BubbleError {
public:
    using BubbleError::BubbleError;
};

/// Regime/model combination without a solution (e.g. NegSigma for a lognormal bubble).
class Unsupported : public BubbleError {
public:
    using BubbleError::BubbleError;
};

class NonIntegrablePayoff : public BubbleError {
public:
    using BubbleError::BubbleError;
};

/// Raised by the PDE solvers when the solution leaves its a-priori bound.
class InstabilityDetected : public BubbleError {
public:
    using BubbleError::BubbleError;
};

class TooFewPaths : public BubbleError {
public:
    using BubbleError::BubbleError;
};

} // namespace bubble
