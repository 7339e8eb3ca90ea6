#include "clickcraft/dsymbol_exact.hpp"

#include <string>

#include "clickcraft/error.hpp"

namespace clickcraft {

namespace {

mpz_class choose(unsigned long n, unsigned long k) {
    mpz_class result;
    mpz_bin_uiui(result.get_mpz_t(), n, k);
    return result;
}

mpq_class power(const mpq_class& base, unsigned long exponent) {
    mpz_class num;
    mpz_class den;
    mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), exponent);
    mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), exponent);
    mpq_class result(num, den);
    result.canonicalize();
    return result;
}

} // namespace

mpq_class d_exact(const ExactDSymbolParams& params, int k, int m) {
    if (params.n < 1) {
        throw ValidationError("number of diodes must be at least 1");
    }
    if (k < 0 || m < 0) {
        throw ValidationError("D-symbol indices must be non-negative");
    }
    if (k > params.n) {
        throw ValidationError("D-symbol index k=" + std::to_string(k) + " exceeds N=" + std::to_string(params.n));
    }

    const mpq_class step = params.sigma / mpq_class(params.n);
    mpq_class sum = 0;
    for (int j = 0; j <= k; ++j) {
        mpq_class term = power(params.tau + step * j, static_cast<unsigned long>(m));
        term *= mpq_class(choose(static_cast<unsigned long>(k), static_cast<unsigned long>(j)));
        if ((k - j) % 2 == 1) {
            sum -= term;
        } else {
            sum += term;
        }
    }
    sum *= mpq_class(choose(static_cast<unsigned long>(params.n), static_cast<unsigned long>(k)));
    sum.canonicalize();
    return sum;
}

} // namespace clickcraft
