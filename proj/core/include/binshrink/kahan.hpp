#pragma once

namespace binshrink {

// Kahan-Neumaier compensated accumulator. The alternating sums in this library
// cancel heavily; plain summation loses the result long before the inputs
// overflow, the compensated form keeps ~1 ulp of the exact sum.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x)) {
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

}  // namespace binshrink
