#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace invstat {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ErrorCode {
  InvalidStructure,
  DimensionMismatch,
  ZeroLengthMember,
  AllNodesAnchored,
  InconsistentSystem,
  NonPositiveStiffness,
  NonPositiveLength,
  EmptyFeasibleBox,
  Parse,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidStructure: return "InvalidStructure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroLengthMember: return "ZeroLengthMember";
    case ErrorCode::AllNodesAnchored: return "AllNodesAnchored";
    case ErrorCode::InconsistentSystem: return "InconsistentSystem";
    case ErrorCode::NonPositiveStiffness: return "NonPositiveStiffness";
    case ErrorCode::NonPositiveLength: return "NonPositiveLength";
    case ErrorCode::EmptyFeasibleBox: return "EmptyFeasibleBox";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code. `index` is the offending
/// member/cable/node when one exists, otherwise -1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, int index = -1)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  int index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  int index_;
};

inline void require(bool condition, ErrorCode code, const std::string& message,
                    int index = -1) {
  if (!condition) throw Error(code, message, index);
}

}  // namespace invstat
