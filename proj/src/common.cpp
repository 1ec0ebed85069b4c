#include <charconv>
#include <cmath>
#include <system_error>

#include "prisample/error.hpp"
#include "prisample/numeric.hpp"

namespace prisample {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingFeature: return "MissingFeature";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::InvalidFeature: return "InvalidFeature";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::EmptyMaster: return "EmptyMaster";
    case ErrorCode::MasterMismatch: return "MasterMismatch";
    case ErrorCode::AlreadyExhausted: return "AlreadyExhausted";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case ErrorCode::InsufficientNodes: return "InsufficientNodes";
    case ErrorCode::MalformedCurve: return "MalformedCurve";
    case ErrorCode::MalformedMaster: return "MalformedMaster";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view text) noexcept {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = first + text.size();
  const auto res = std::from_chars(first, last, value);
  if (text.empty() || res.ec != std::errc{} || res.ptr != last) return std::nullopt;
  return value;
}

std::optional<std::uint64_t> parse_uint(std::string_view text) noexcept {
  std::uint64_t value = 0;
  const auto* first = text.data();
  const auto* last = first + text.size();
  const auto res = std::from_chars(first, last, value);
  if (text.empty() || res.ec != std::errc{} || res.ptr != last) return std::nullopt;
  return value;
}

}  // namespace prisample
