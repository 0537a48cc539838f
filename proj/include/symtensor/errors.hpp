#pragma once

#include <stdexcept>
#include <string>

namespace symtensor {

/// Dimension or order mismatch between operands.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Index outside the extent of a tensor or block grid.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Mode index not smaller than the tensor order.
class ModeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Invalid algorithm or model parameters (divisibility, order bounds, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A block dimension that does not divide the tensor dimension.
class BlockDivisibilityError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

/// Input expected to be symmetric is not, beyond the given tolerance.
class SymmetryError : public std::runtime_error {
 public:
  SymmetryError(const std::string& what, std::string worst_index,
                std::string worst_partner, double worst_deviation)
      : std::runtime_error(what),
        worst_index_(std::move(worst_index)),
        worst_partner_(std::move(worst_partner)),
        worst_deviation_(worst_deviation) {}

  const std::string& worst_index() const noexcept { return worst_index_; }
  const std::string& worst_partner() const noexcept { return worst_partner_; }
  double worst_deviation() const noexcept { return worst_deviation_; }

 private:
  std::string worst_index_;
  std::string worst_partner_;
  double worst_deviation_;
};

/// Exact integer arithmetic left the representable range.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Malformed binary tensor file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace symtensor
