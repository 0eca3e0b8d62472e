#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace loewner {

/// Precondition violated by the caller (bad argument, empty input, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A point lies on (or inside) the hull of a chain, so the mapping-out
/// function is not single valued there. `atom_index` is the first atom
/// whose slit contains the point.
class SwallowedError : public DomainError {
 public:
  SwallowedError(std::size_t atom_index, const std::string& what)
      : DomainError(what), atom_index_(atom_index) {}

  std::size_t atom_index() const noexcept { return atom_index_; }

 private:
  std::size_t atom_index_;
};

/// Unzipping met a sample whose image does not enlarge the hull, or a path
/// that passes through its own past hull. `sample_index` refers to the
/// input path.
class NotATraceError : public std::runtime_error {
 public:
  enum class Kind { not_strictly_increasing, crosses_hull, swallowed };

  NotATraceError(Kind kind, std::size_t sample_index, const std::string& what)
      : std::runtime_error(what), kind_(kind), sample_index_(sample_index) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t sample_index() const noexcept { return sample_index_; }

 private:
  Kind kind_;
  std::size_t sample_index_;
};

/// An iterative numerical procedure failed to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace loewner
