#include "fdsurvey/error.hpp"

#include <sstream>

namespace fdsurvey {

namespace {

std::string cap_message(std::uint64_t required, std::uint64_t cap) {
  std::ostringstream os;
  os << "enumeration needs " << required << " samples but the cap is " << cap
     << "; raise the cap to at least " << required;
  return os.str();
}

std::string variance_message(std::size_t index, double variance) {
  std::ostringstream os;
  os << "degenerate variance " << variance << " at grid point " << index;
  return os.str();
}

}  // namespace

EnumerationCapError::EnumerationCapError(std::uint64_t required, std::uint64_t cap)
    : ValidationError(cap_message(required, cap)), required_(required), cap_(cap) {}

DegenerateVarianceError::DegenerateVarianceError(std::size_t grid_index, double variance)
    : NumericalError(variance_message(grid_index, variance)),
      grid_index_(grid_index),
      variance_(variance) {}

}  // namespace fdsurvey
