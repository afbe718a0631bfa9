#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lacuna {

enum class ErrorCode {
  EmptyPlan,
  RatioViolation,
  WidthViolation,
  UnreducibleBlock,
  UnknownPreset,
  InvalidParam,
  GridTooSmall,
  ResolutionExceeded,
  LambdaCollapse,
  DivergentInput,
  Io,
  Format,
};

constexpr std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyPlan: return "EmptyPlan";
    case ErrorCode::RatioViolation: return "RatioViolation";
    case ErrorCode::WidthViolation: return "WidthViolation";
    case ErrorCode::UnreducibleBlock: return "UnreducibleBlock";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::InvalidParam: return "InvalidParam";
    case ErrorCode::GridTooSmall: return "GridTooSmall";
    case ErrorCode::ResolutionExceeded: return "ResolutionExceeded";
    case ErrorCode::LambdaCollapse: return "LambdaCollapse";
    case ErrorCode::DivergentInput: return "DivergentInput";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Format: return "Format";
  }
  return "Unknown";
}

// All library failures are reported through this type. `index` carries the
// 1-based block or step number when the failure is tied to one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail,
        std::optional<std::int64_t> index = std::nullopt)
      : std::runtime_error(std::string(error_name(code)) + ": " + detail),
        code_(code),
        index_(index),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::int64_t> index() const noexcept { return index_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::optional<std::int64_t> index_;
  std::string detail_;
};

}  // namespace lacuna
