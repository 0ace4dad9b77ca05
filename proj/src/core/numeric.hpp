#pragma once

#include <cmath>

namespace icnet::detail {

// Neumaier compensated accumulator. Order-dependent but deterministic, and
// accurate enough that reordering the same terms changes the sum by ~1 ulp.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace icnet::detail
