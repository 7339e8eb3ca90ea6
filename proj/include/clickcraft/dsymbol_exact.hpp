#ifndef CLICKCRAFT_DSYMBOL_EXACT_HPP
#define CLICKCRAFT_DSYMBOL_EXACT_HPP

#include <gmpxx.h>

namespace clickcraft {

struct ExactDSymbolParams {
    int n = 1;
    mpq_class tau;
    mpq_class sigma;
};

/// Exact rational value of the alternating-sum definition of D_{k,m}.
/// Validation oracle only; cost grows with the bit length of (tau + sigma j/N)^m.
mpq_class d_exact(const ExactDSymbolParams& params, int k, int m);

} // namespace clickcraft

#endif
