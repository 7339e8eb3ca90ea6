#ifndef CLICKCRAFT_PROCESSES_HPP
#define CLICKCRAFT_PROCESSES_HPP

// Click-conditioned state engineering protocols as input-output maps on
// P functions: heralding, multi-photon subtraction, multi-photon addition and
// their composition (addition followed by subtraction).
//
// Every map returns the unnormalized output together with its trace, which is
// the probability of the conditioning click event.

#include <vector>

#include <Eigen/Dense>

#include "clickcraft/fock.hpp"
#include "clickcraft/outcome.hpp"
#include "clickcraft/pfunc.hpp"
#include "clickcraft/povm.hpp"

namespace clickcraft {

/// Beam splitter tap + click detector on the reflected beam.
struct SubtractionSpec {
    BeamSplitterConfig bs;
    DetectorConfig det;
    int k = 0;

    /// eta r^2 / t^2
    double eta_eff() const;
    void validate() const;
};

/// Two-mode squeezer + click detector on the idler.
struct AdditionSpec {
    SqueezerConfig sq;
    DetectorConfig det;
    int k = 0;

    /// eta nu^2 / mu^2
    double eta_eff() const;
    void validate() const;
};

/// k1-click addition followed by k2-click subtraction.
struct AmplifySpec {
    AdditionSpec add;
    SubtractionSpec sub;

    void validate() const;
};

using MixtureOutcome = ProcessOutcome<PhaseSpaceMixture>;

MixtureOutcome normalize(const MixtureOutcome& outcome);
ProcessOutcome<DensityMatrix> normalize(const ProcessOutcome<DensityMatrix>& outcome);

/// Heralded mode-A state after k clicks on mode B.
ProcessOutcome<DensityMatrix> herald(const TwoModeDensityMatrix& input, const DetectorConfig& det, int k);

struct HeraldedDistribution {
    std::vector<double> unnormalized; // (1-omega) omega^n D_{k,n}
    std::vector<double> normalized;
    double probability = 0.0;
};

/// Photon statistics of the phase-diffused TMSV heralded on k clicks, summed
/// until the geometric tail drops below 1e-18 of the leading weight.
HeraldedDistribution herald_tmsv_distribution(double omega, const DetectorConfig& det, int k);

/// Loss by t, then the k-click factor with eta' = eta r^2/t^2.
MixtureOutcome subtract(const PhaseSpaceMixture& input, const SubtractionSpec& spec);

/// Amplifier noise mu, then the k-click factor with eta' = eta nu^2/mu^2 applied
/// to the normally ordered symbol of the noisy state.
MixtureOutcome add(const PhaseSpaceMixture& input, const AdditionSpec& spec);

/// Composition subtract(add(input)). Authoritative route.
MixtureOutcome amplify(const PhaseSpaceMixture& input, const AmplifySpec& spec);
MixtureOutcome amplify(complex beta, const AmplifySpec& spec);

/// Coefficients of the closed-form output for a coherent input |beta>:
///   P(alpha) = sum_{j1,j2} f/pi exp(-l2|alpha|^2 + 2 l1 Re(alpha conj(beta)) - l0 |beta|^2).
struct AmplifyCoefficients {
    int j1 = 0;
    int j2 = 0;
    double f = 0.0;
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};
std::vector<AmplifyCoefficients> amplify_coefficients(const AmplifySpec& spec);

/// Independent route: the closed-form coefficients completed to Gaussian terms.
MixtureOutcome amplify_closed_form(complex beta, const AmplifySpec& spec);

/// Click probability of the subtraction protocol on a displaced thermal input,
/// C(N,k) sum_j C(k,j)(-1)^{k-j} exp(-(1-1/g_j)|alpha0|^2/nbar)/g_j with
/// g_j = 1 + eta r^2 nbar (1 - j/N). nbar = 0 is the coherent limit.
double probability_subtraction_displaced_thermal(complex alpha0, double nbar, const SubtractionSpec& spec);

/// Addition counterpart, g_j = 1 + eta nu^2 (nbar+1)(1 - j/N), exponent over nbar + 1.
double probability_addition_displaced_thermal(complex alpha0, double nbar, const AdditionSpec& spec);

/// (N1+1) x (N2+1) probabilities of (k1, k2) for a coherent input. The k
/// fields of the template are ignored.
Eigen::MatrixXd probability_table(const AmplifySpec& spec, complex beta);

/// Variance of the k = 0 addition output for a coherent input,
/// nu^2 (1-eta) / (1 + eta nu^2).
double effective_sigma2(const SqueezerConfig& sq, double eta);

/// Squeezer that yields a given sigma^2 at efficiency eta.
SqueezerConfig squeezer_for_sigma2(double sigma2, double eta);

} // namespace clickcraft

#endif
