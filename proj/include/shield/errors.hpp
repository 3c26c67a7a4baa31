#pragma once

#include <stdexcept>
#include <string>

namespace shield {

// Local demand at a site exceeds what its nodes can absorb. Signals an
// out-of-contract candidate; the encoding layer repairs or rejects it.
class CapacityExceeded : public std::runtime_error {
 public:
  explicit CapacityExceeded(const std::string& what) : std::runtime_error(what) {}
};

// rho > 0 requested on a site that sells neither a clean premium nor an
// annual clean contract.
class InvalidPremium : public std::runtime_error {
 public:
  explicit InvalidPremium(const std::string& what) : std::runtime_error(what) {}
};

// Total demand exceeds fleet capacity; no feasible assignment exists.
class InfeasibleScenario : public std::runtime_error {
 public:
  explicit InfeasibleScenario(const std::string& what) : std::runtime_error(what) {}
};

// Malformed scenario/assignment file.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Well-formed file violating a schema invariant; message names the field path.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Too few rows to train the forest; callers fall back to random starts.
class InsufficientData : public std::runtime_error {
 public:
  explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

// Feature vector length does not match the trained model.
class ArityMismatch : public std::runtime_error {
 public:
  explicit ArityMismatch(const std::string& what) : std::runtime_error(what) {}
};

// Hypervolume requested for more objectives than the exact algorithms cover.
class ArityUnsupported : public std::runtime_error {
 public:
  explicit ArityUnsupported(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace shield
