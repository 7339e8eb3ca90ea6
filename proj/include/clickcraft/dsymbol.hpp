#ifndef CLICKCRAFT_DSYMBOL_HPP
#define CLICKCRAFT_DSYMBOL_HPP

#include <cstddef>
#include <vector>

namespace clickcraft {

/// Parameters of the click kernel D^{tau,sigma}_{k,m} for a system of n diodes.
///
/// For click counting with quantum efficiency eta one uses tau = 1 - eta and
/// sigma = eta; the conditional processes use tau = -eta', sigma = eta'.
struct DSymbolParams {
    int n = 1;
    double tau = 0.0;
    double sigma = 0.0;

    /// Throws ValidationError unless n >= 1 and tau, sigma are finite.
    void validate() const;
};

/// Click-probability parameters (tau, sigma) = (1 - eta, eta).
DSymbolParams click_params(int n, double eta);

/// Immutable table of D_{k,m} for 0 <= k <= kmax, 0 <= m <= mmax.
class DSymbolTable {
public:
    DSymbolTable(DSymbolParams params, int kmax, int mmax, std::vector<double> values);

    const DSymbolParams& params() const { return params_; }
    int kmax() const { return kmax_; }
    int mmax() const { return mmax_; }

    /// D_{k,m}; throws std::out_of_range outside the table.
    double at(int k, int m) const;
    double operator()(int k, int m) const { return values_[index(k, m)]; }

    /// Row k as a vector over m = 0..mmax.
    std::vector<double> row(int k) const;

private:
    std::size_t index(int k, int m) const {
        return static_cast<std::size_t>(k) * static_cast<std::size_t>(mmax_ + 1) + static_cast<std::size_t>(m);
    }

    DSymbolParams params_;
    int kmax_;
    int mmax_;
    std::vector<double> values_;
};

/// Direct alternating sum C(N,k) sum_j C(k,j) (-1)^{k-j} (tau + sigma j/N)^m.
///
/// Terms are evaluated in double-double precision and accumulated with
/// compensation, so the result survives cancellation ratios up to ~1e20.
/// Slow; meant for cross-checks.
double d_direct(const DSymbolParams& params, int k, int m);

/// Table filled by the three-term recursion
///   D_{k,m} = (tau + sigma k/N) D_{k,m-1} + sigma (N-k+1)/N D_{k-1,m-1}
/// from D_{0,0} = 1, D_{k,0} = 0 (k > 0), D_{0,m} = tau^m.
DSymbolTable d_recursive(const DSymbolParams& params, int kmax, int mmax);

/// Closed form of the diagonal, (sigma/N)^k N!/(N-k)!.
double d_diagonal(const DSymbolParams& params, int k);

} // namespace clickcraft

#endif
