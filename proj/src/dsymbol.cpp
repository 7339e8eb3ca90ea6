#include "clickcraft/dsymbol.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "clickcraft/error.hpp"
#include "clickcraft/numeric.hpp"

namespace clickcraft {

namespace {

// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
struct DoubleDouble {
    double hi = 0.0;
    double lo = 0.0;
};

DoubleDouble two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    const double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

DoubleDouble quick_two_sum(double a, double b) {
    const double s = a + b;
    return {s, b - (s - a)};
}

DoubleDouble operator+(DoubleDouble a, DoubleDouble b) {
    DoubleDouble s = two_sum(a.hi, b.hi);
    DoubleDouble t = two_sum(a.lo, b.lo);
    s.lo += t.hi;
    s = quick_two_sum(s.hi, s.lo);
    s.lo += t.lo;
    return quick_two_sum(s.hi, s.lo);
}

DoubleDouble operator*(DoubleDouble a, DoubleDouble b) {
    const double p = a.hi * b.hi;
    const double err = std::fma(a.hi, b.hi, -p);
    return quick_two_sum(p, err + (a.hi * b.lo + a.lo * b.hi));
}

DoubleDouble operator/(DoubleDouble a, double b) {
    const double q1 = a.hi / b;
    // remainder a - q1*b, exact in the leading part
    const double p = q1 * b;
    const double perr = std::fma(q1, b, -p);
    DoubleDouble r = two_sum(a.hi, -p);
    r.lo += a.lo - perr;
    const double q2 = (r.hi + r.lo) / b;
    return quick_two_sum(q1, q2);
}

DoubleDouble pow(DoubleDouble base, int exponent) {
    DoubleDouble result{1.0, 0.0};
    while (exponent > 0) {
        if (exponent & 1) {
            result = result * base;
        }
        base = base * base;
        exponent >>= 1;
    }
    return result;
}

void check_indices(const DSymbolParams& params, int k, int m) {
    if (k < 0 || m < 0) {
        throw ValidationError("D-symbol indices must be non-negative");
    }
    if (k > params.n) {
        throw ValidationError("D-symbol index k=" + std::to_string(k) + " exceeds N=" + std::to_string(params.n));
    }
}

} // namespace

void DSymbolParams::validate() const {
    if (n < 1) {
        throw ValidationError("number of diodes must be at least 1");
    }
    if (!std::isfinite(tau) || !std::isfinite(sigma)) {
        throw ValidationError("D-symbol parameters must be finite");
    }
}

DSymbolParams click_params(int n, double eta) {
    return DSymbolParams{n, 1.0 - eta, eta};
}

DSymbolTable::DSymbolTable(DSymbolParams params, int kmax, int mmax, std::vector<double> values)
    : params_(params), kmax_(kmax), mmax_(mmax), values_(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>(kmax + 1) * static_cast<std::size_t>(mmax + 1)) {
        throw std::invalid_argument("DSymbolTable: value count does not match (kmax+1)(mmax+1)");
    }
}

double DSymbolTable::at(int k, int m) const {
    if (k < 0 || m < 0 || k > kmax_ || m > mmax_) {
        throw std::out_of_range("DSymbolTable index (" + std::to_string(k) + "," + std::to_string(m) + ") out of range");
    }
    return values_[index(k, m)];
}

std::vector<double> DSymbolTable::row(int k) const {
    if (k < 0 || k > kmax_) {
        throw std::out_of_range("DSymbolTable row out of range");
    }
    const auto first = values_.begin() + static_cast<std::ptrdiff_t>(index(k, 0));
    return {first, first + mmax_ + 1};
}

double d_direct(const DSymbolParams& params, int k, int m) {
    params.validate();
    check_indices(params, k, m);

    const DoubleDouble step = DoubleDouble{params.sigma, 0.0} / static_cast<double>(params.n);
    DoubleDouble choose{1.0, 0.0}; // C(k, j)
    CompensatedSum hi;
    CompensatedSum lo;
    for (int j = 0; j <= k; ++j) {
        if (j > 0) {
            choose = choose * DoubleDouble{static_cast<double>(k - j + 1), 0.0} / static_cast<double>(j);
        }
        const DoubleDouble base = DoubleDouble{params.tau, 0.0} + step * DoubleDouble{static_cast<double>(j), 0.0};
        DoubleDouble term = choose * pow(base, m);
        if ((k - j) % 2 == 1) {
            term = DoubleDouble{-term.hi, -term.lo};
        }
        hi.add(term.hi);
        lo.add(term.lo);
    }
    const DoubleDouble total = two_sum(hi.value(), lo.value());
    return binomial(params.n, k) * (total.hi + total.lo);
}

DSymbolTable d_recursive(const DSymbolParams& params, int kmax, int mmax) {
    params.validate();
    if (kmax < 0 || mmax < 0) {
        throw ValidationError("D-symbol table bounds must be non-negative");
    }
    if (kmax > params.n) {
        throw ValidationError("D-symbol table kmax=" + std::to_string(kmax) + " exceeds N=" + std::to_string(params.n));
    }

    const auto cols = static_cast<std::size_t>(mmax + 1);
    std::vector<double> values(static_cast<std::size_t>(kmax + 1) * cols, 0.0);
    const double n = static_cast<double>(params.n);

    values[0] = 1.0;
    for (int m = 1; m <= mmax; ++m) {
        values[static_cast<std::size_t>(m)] = params.tau * values[static_cast<std::size_t>(m - 1)];
    }
    for (int k = 1; k <= kmax; ++k) {
        const double stay = params.tau + params.sigma * k / n;
        const double feed = params.sigma * (n - k + 1) / n;
        double* row = values.data() + static_cast<std::size_t>(k) * cols;
        const double* prev = row - cols;
        // D_{k,m} = 0 for m < k; start on the diagonal.
        for (int m = k; m <= mmax; ++m) {
            row[m] = std::fma(stay, row[m - 1], feed * prev[m - 1]);
        }
    }
    return DSymbolTable(params, kmax, mmax, std::move(values));
}

double d_diagonal(const DSymbolParams& params, int k) {
    params.validate();
    check_indices(params, k, k);
    const double n = static_cast<double>(params.n);
    double result = 1.0;
    for (int i = 0; i < k; ++i) {
        result *= params.sigma * (n - i) / n;
    }
    return result;
}

} // namespace clickcraft
