#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace apg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised for invalid inputs, violated preconditions and malformed documents.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace apg
