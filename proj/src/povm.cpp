#include "clickcraft/povm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "clickcraft/dsymbol.hpp"
#include "clickcraft/error.hpp"
#include "clickcraft/numeric.hpp"

namespace clickcraft {

void DetectorConfig::validate() const {
    if (n < 1) {
        throw ValidationError("detector needs at least one diode, got N=" + std::to_string(n));
    }
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw ValidationError("quantum efficiency must lie in [0,1], got " + std::to_string(eta));
    }
}

double ClickDistribution::total() const {
    CompensatedSum sum;
    for (double p : probs) {
        sum += p;
    }
    return sum.value();
}

double ClickDistribution::mean() const {
    CompensatedSum sum;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        sum += static_cast<double>(k) * probs[k];
    }
    return sum.value();
}

namespace {

void check_click_index(const DetectorConfig& det, int k) {
    if (k < 0 || k > det.n) {
        throw ValidationError("click number k=" + std::to_string(k) + " outside 0..N=" + std::to_string(det.n));
    }
}

void check_cutoff(int cutoff) {
    if (cutoff < 1) {
        throw ValidationError("Fock cutoff must be positive");
    }
}

} // namespace

DiagonalPOVMElement click_povm_element(const DetectorConfig& det, int k, int cutoff) {
    det.validate();
    check_click_index(det, k);
    check_cutoff(cutoff);
    const DSymbolTable table = d_recursive(click_params(det.n, det.eta), k, cutoff - 1);
    return {table.row(k), POVMKind::click, k, det};
}

std::vector<DiagonalPOVMElement> click_povm(const DetectorConfig& det, int cutoff) {
    det.validate();
    check_cutoff(cutoff);
    const DSymbolTable table = d_recursive(click_params(det.n, det.eta), det.n, cutoff - 1);
    std::vector<DiagonalPOVMElement> elements;
    elements.reserve(static_cast<std::size_t>(det.n + 1));
    for (int k = 0; k <= det.n; ++k) {
        elements.push_back({table.row(k), POVMKind::click, k, det});
    }
    return elements;
}

ClickDistribution click_statistics(std::span<const double> photon_dist, const DetectorConfig& det) {
    det.validate();
    if (photon_dist.empty()) {
        return ClickDistribution{std::vector<double>(static_cast<std::size_t>(det.n + 1), 0.0)};
    }
    CompensatedSum mass;
    for (double p : photon_dist) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw ValidationError("photon distribution entries must be finite and non-negative");
        }
        mass += p;
    }
    if (mass.value() > 1.0 + 1e-10) {
        throw ValidationError("photon distribution sums to more than one");
    }

    const int mmax = static_cast<int>(photon_dist.size()) - 1;
    const DSymbolTable table = d_recursive(click_params(det.n, det.eta), det.n, mmax);
    ClickDistribution result;
    result.probs.resize(static_cast<std::size_t>(det.n + 1));
    for (int k = 0; k <= det.n; ++k) {
        CompensatedSum c;
        for (int m = k; m <= mmax; ++m) {
            c += table(k, m) * photon_dist[static_cast<std::size_t>(m)];
        }
        result.probs[static_cast<std::size_t>(k)] = c.value();
    }
    return result;
}

DiagonalPOVMElement photoelectric_element(double eta, int k, int cutoff) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw ValidationError("quantum efficiency must lie in [0,1]");
    }
    if (k < 0) {
        throw ValidationError("photoelectric count must be non-negative");
    }
    check_cutoff(cutoff);

    std::vector<double> weights(static_cast<std::size_t>(cutoff), 0.0);
    if (k < cutoff) {
        double w = std::pow(eta, k);
        weights[static_cast<std::size_t>(k)] = w;
        // C(m,k) eta^k (1-eta)^{m-k} = w_{m-1} (1-eta) m/(m-k)
        for (int m = k + 1; m < cutoff; ++m) {
            w *= (1.0 - eta) * static_cast<double>(m) / static_cast<double>(m - k);
            weights[static_cast<std::size_t>(m)] = w;
        }
    }
    return {std::move(weights), POVMKind::photoelectric, k, DetectorConfig{1, eta}};
}

OperatorNormDistance operator_norm_distance(const DetectorConfig& det, int k, int cutoff) {
    det.validate();
    check_click_index(det, k);
    check_cutoff(cutoff);

    OperatorNormDistance result;
    if (det.eta == 0.0) {
        // both elements are the identity (k = 0) or vanish (k >= 1)
        return result;
    }

    const DiagonalPOVMElement click = click_povm_element(det, k, cutoff + 1);
    const DiagonalPOVMElement photo = photoelectric_element(det.eta, k, cutoff + 1);
    for (int m = 0; m < cutoff; ++m) {
        const double diff = std::abs(photo.weights[static_cast<std::size_t>(m)] - click.weights[static_cast<std::size_t>(m)]);
        if (diff > result.sup) {
            result.sup = diff;
            result.argmax = m;
        }
    }

    // Both weight sequences are non-negative, so |P - Pi| <= max(P, Pi) on the tail.
    const double m0 = static_cast<double>(cutoff);
    double photo_tail = 1.0;
    if (m0 >= k) {
        // ratio w_{m+1}/w_m = (1-eta)(m+1)/(m+1-k) decreases in m
        const double ratio = (1.0 - det.eta) * (m0 + 1.0) / (m0 + 1.0 - k);
        if (ratio < 1.0) {
            photo_tail = photo.weights[static_cast<std::size_t>(cutoff)];
        }
    }
    double click_tail = 1.0;
    if (k < det.n) {
        // Pi_k(m) <= C(N,k) P(all photons miss the other N-k diodes)
        const double miss = 1.0 - det.eta * static_cast<double>(det.n - k) / det.n;
        click_tail = std::min(1.0, binomial(det.n, k) * std::pow(miss, m0));
    }
    if (k == 0) {
        // the k = 0 elements coincide, (1-eta)^m in both cases
        photo_tail = click_tail = 0.0;
    }
    result.tail_bound = std::max(photo_tail, click_tail);
    result.value = std::max(result.sup, result.tail_bound);
    return result;
}

} // namespace clickcraft
