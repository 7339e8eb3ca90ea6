#ifndef CLICKCRAFT_POVM_HPP
#define CLICKCRAFT_POVM_HPP

#include <span>
#include <vector>

namespace clickcraft {

/// N equal-split on-off diodes with quantum efficiency eta.
struct DetectorConfig {
    int n = 1;
    double eta = 1.0;

    void validate() const;
};

/// Probabilities c_0..c_N of k clicks.
struct ClickDistribution {
    std::vector<double> probs;

    double total() const;
    double mean() const;
};

enum class POVMKind { click, photoelectric };

/// Diagonal of a POVM element in the Fock basis, weights[m] for m < cutoff.
struct DiagonalPOVMElement {
    std::vector<double> weights;
    POVMKind kind = POVMKind::click;
    int k = 0;
    DetectorConfig det;
};

/// Pi_k = sum_m D^{1-eta,eta}_{k,m} |m><m|, truncated to m < cutoff.
DiagonalPOVMElement click_povm_element(const DetectorConfig& det, int k, int cutoff);

/// All N+1 click elements at once; element k is entry k.
std::vector<DiagonalPOVMElement> click_povm(const DetectorConfig& det, int cutoff);

/// c_k = sum_m D^{1-eta,eta}_{k,m} p_m. The result sums to sum(p).
ClickDistribution click_statistics(std::span<const double> photon_dist, const DetectorConfig& det);

/// Photoelectric counting element P_k = sum_{m>=k} C(m,k) eta^k (1-eta)^{m-k} |m><m|.
/// Exists for every k >= 0; at eta = 1 it is exactly |k><k|.
DiagonalPOVMElement photoelectric_element(double eta, int k, int cutoff);

/// ||P_k - Pi_k||_op split into the scanned part and a certified tail bound.
struct OperatorNormDistance {
    double sup = 0.0;        // max over m < cutoff
    int argmax = 0;
    double tail_bound = 0.0; // bound on |P_k - Pi_k| for m >= cutoff
    double value = 0.0;      // max(sup, tail_bound)
};

/// Operator-norm distance between the click and photoelectric elements.
/// Only k <= N is meaningful: P_k for k > N has no click counterpart.
OperatorNormDistance operator_norm_distance(const DetectorConfig& det, int k, int cutoff);

} // namespace clickcraft

#endif
