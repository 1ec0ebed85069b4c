#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace prisample {

// Neumaier's variant of Kahan summation. Heavy-tailed magnitudes make the
// plain running sum lose the small terms entirely.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }

  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

// Shortest representation that parses back to the same double.
// Locale-independent.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text) noexcept;
std::optional<std::uint64_t> parse_uint(std::string_view text) noexcept;

}  // namespace prisample
