#pragma once

#include <cmath>

#include "loopsoup/core_types.hpp"

namespace loopsoup {

/// Neumaier-compensated complex accumulator.
class CompensatedSum {
 public:
  CompensatedSum& operator+=(Complex v) {
    add(re_, re_c_, v.real());
    add(im_, im_c_, v.imag());
    return *this;
  }
  Complex value() const { return {re_ + re_c_, im_ + im_c_}; }

 private:
  static void add(double& sum, double& comp, double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }

  double re_ = 0.0, im_ = 0.0, re_c_ = 0.0, im_c_ = 0.0;
};

}  // namespace loopsoup
