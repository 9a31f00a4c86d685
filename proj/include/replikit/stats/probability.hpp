#pragma once

#include <cmath>
#include <string>

#include "replikit/error.hpp"

namespace replikit {

// A real number in [0,1]. Construction validates; reading is implicit.
class Probability {
 public:
  constexpr Probability() = default;

  Probability(double value) : value_(value) {  // NOLINT(google-explicit-constructor)
    if (!(value >= 0.0 && value <= 1.0)) {
      throw InputError("probability out of range [0,1]: " + std::to_string(value));
    }
  }

  // Clamps into [0,1]; for values produced by arithmetic that may drift by an ulp.
  static Probability clamped(double value) {
    if (std::isnan(value)) throw NumericalError("probability is NaN");
    return Probability(value < 0.0 ? 0.0 : (value > 1.0 ? 1.0 : value));
  }

  constexpr double value() const { return value_; }
  constexpr operator double() const { return value_; }  // NOLINT(google-explicit-constructor)

 private:
  double value_ = 0.0;
};

}  // namespace replikit
