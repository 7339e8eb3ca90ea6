#ifndef CLICKCRAFT_NUMERIC_HPP
#define CLICKCRAFT_NUMERIC_HPP

#include <cmath>
#include <cstdint>

namespace clickcraft {

/// Binomial coefficient as a double; zero outside 0 <= k <= n.
inline double binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || n < 0 || k > n) {
        return 0.0;
    }
    if (k > n - k) {
        k = n - k;
    }
    double result = 1.0;
    for (std::int64_t i = 1; i <= k; ++i) {
        result = result * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    // exact below 2^53 up to the rounding of the running product
    return result < 9.0e15 ? std::round(result) : result;
}

/// Neumaier (improved Kahan) running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            carry_ += (sum_ - t) + x;
        } else {
            carry_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) {
        add(x);
        return *this;
    }
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

} // namespace clickcraft

#endif
