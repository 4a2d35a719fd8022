#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace rrproc {

// Neumaier-compensated accumulator. The renewal recursions and Monte Carlo
// reductions all target agreement near 1e-12, so plain summation is not enough.
class Kahan {
  public:
    void add(double x) {
        double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    void add(const Kahan& other) {
        add(other.sum_);
        add(other.comp_);
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
    Kahan acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

// Compensated dot product of two equal-length ranges.
inline double compensated_dot(std::span<const double> a, std::span<const double> b) {
    Kahan acc;
    for (size_t i = 0; i < a.size(); ++i) acc.add(a[i] * b[i]);
    return acc.value();
}

}  // namespace rrproc
