#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "rough_transport/vec.hpp"

namespace rough_transport {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// field_library
class SingularPoint : public Error {
 public:
  using Error::Error;
};
class BadKernel : public Error {
 public:
  using Error::Error;
};
class SplitViolation : public Error {
 public:
  SplitViolation(const std::string& what, double t, Vec witness)
      : Error(what), t_(t), witness_(witness) {}
  double time() const { return t_; }
  const Vec& witness() const { return witness_; }

 private:
  double t_;
  Vec witness_;
};

// lagrangian_flow
class StepBlowup : public Error {
 public:
  StepBlowup(const std::string& what, std::size_t seed) : Error(what), seed_(seed) {}
  std::size_t seed() const { return seed_; }

 private:
  std::size_t seed_;
};
class DivergenceUnbounded : public Error {
 public:
  using Error::Error;
};
class DomainTooSmall : public Error {
 public:
  using Error::Error;
};

// solution_rep
class AllTruncated : public Error {
 public:
  AllTruncated(const std::string& what, std::size_t seed) : Error(what), seed_(seed) {}
  std::size_t seed() const { return seed_; }

 private:
  std::size_t seed_;
};
class JacobianVanished : public Error {
 public:
  using Error::Error;
};

// weak_form_diagnostics
class SupportOverflow : public Error {
 public:
  using Error::Error;
};
class UnboundedDamping : public Error {
 public:
  using Error::Error;
};

// bmo_toolkit
class EmptyBall : public Error {
 public:
  using Error::Error;
};
class DegenerateFit : public Error {
 public:
  using Error::Error;
};
class NegativeInput : public Error {
 public:
  using Error::Error;
};
class LambdaTooSmall : public Error {
 public:
  using Error::Error;
};
class BadSplit : public Error {
 public:
  using Error::Error;
};

// scenarios_cli
class ParseError : public Error {
 public:
  using Error::Error;
};
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace rough_transport
