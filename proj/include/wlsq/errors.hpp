#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wlsq {

/// Invalid input: dimension mismatch, violated precondition, bad parameter.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point lies outside the model domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A truncation or enumeration budget was exhausted before the requested
/// accuracy was reached. `achieved` carries the best remainder (or radius).
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// An internal guarantee failed (envelope violation, subsampling bound miss).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The sampling matrix does not have full column rank.
class RankDeficientError : public std::runtime_error {
 public:
  RankDeficientError(const std::string& what, std::size_t rank, std::size_t columns)
      : std::runtime_error(what), rank_(rank), columns_(columns) {}
  std::size_t rank() const noexcept { return rank_; }
  std::size_t columns() const noexcept { return columns_; }

 private:
  std::size_t rank_;
  std::size_t columns_;
};

}  // namespace wlsq
