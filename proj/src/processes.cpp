#include "clickcraft/processes.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "clickcraft/dsymbol.hpp"
#include "clickcraft/error.hpp"
#include "clickcraft/numeric.hpp"

namespace clickcraft {

using std::numbers::pi;

namespace {

void check_clicks(const DetectorConfig& det, int k) {
    if (k < 0 || k > det.n) {
        throw ValidationError("click number k=" + std::to_string(k) + " outside 0..N=" + std::to_string(det.n));
    }
}

MixtureOutcome with_probability(PhaseSpaceMixture p) {
    const double prob = integral(p);
    return {std::move(p), prob};
}

} // namespace

double SubtractionSpec::eta_eff() const {
    const double r = bs.r();
    return det.eta * r * r / (bs.t * bs.t);
}

void SubtractionSpec::validate() const {
    bs.validate();
    det.validate();
    check_clicks(det, k);
}

double AdditionSpec::eta_eff() const {
    const double mu = sq.mu();
    const double nu = sq.nu();
    return det.eta * nu * nu / (mu * mu);
}

void AdditionSpec::validate() const {
    sq.validate();
    if (sq.xi == 0.0) {
        throw ValidationError("addition needs a pumped squeezer (xi > 0); xi = 0 generates no pairs");
    }
    det.validate();
    check_clicks(det, k);
}

void AmplifySpec::validate() const {
    add.validate();
    sub.validate();
    if (!(add.det.eta < 1.0)) {
        throw ValidationError("amplification requires eta1 < 1: at eta1 = 1 the output P function acquires "
                              "delta-shaped contributions");
    }
}

MixtureOutcome normalize(const MixtureOutcome& outcome) {
    if (!(outcome.probability > 0.0)) {
        throw NumericalError("cannot normalize an outcome of zero probability");
    }
    MixtureOutcome out = outcome;
    for (GaussianTerm& g : out.state.gaussians) {
        g.c /= outcome.probability;
    }
    for (DeltaTerm& d : out.state.deltas) {
        d.c /= outcome.probability;
    }
    return out;
}

ProcessOutcome<DensityMatrix> normalize(const ProcessOutcome<DensityMatrix>& outcome) {
    return {outcome.state.normalized(), outcome.probability};
}

ProcessOutcome<DensityMatrix> herald(const TwoModeDensityMatrix& input, const DetectorConfig& det, int k) {
    return condition_on_clicks(input, det, k);
}

HeraldedDistribution herald_tmsv_distribution(double omega, const DetectorConfig& det, int k) {
    if (!(omega > 0.0 && omega < 1.0)) {
        throw ValidationError("phase-diffused TMSV requires 0 < omega < 1");
    }
    det.validate();
    check_clicks(det, k);

    const int nmax = std::max(k, static_cast<int>(std::ceil(std::log(1e-18) / std::log(omega))));
    const DSymbolTable table = d_recursive(click_params(det.n, det.eta), k, nmax);
    HeraldedDistribution out;
    out.unnormalized.resize(static_cast<std::size_t>(nmax + 1));
    CompensatedSum total;
    double weight = 1.0 - omega;
    for (int n = 0; n <= nmax; ++n) {
        const double p = weight * table(k, n);
        out.unnormalized[static_cast<std::size_t>(n)] = p;
        total += p;
        weight *= omega;
    }
    out.probability = total.value();
    out.normalized = out.unnormalized;
    if (out.probability > 0.0) {
        for (double& p : out.normalized) {
            p /= out.probability;
        }
    }
    return out;
}

MixtureOutcome subtract(const PhaseSpaceMixture& input, const SubtractionSpec& spec) {
    spec.validate();
    PhaseSpaceMixture lossy = scale_loss(input, spec.bs.t);
    return with_probability(prune(multiply_click_factor(lossy, spec.eta_eff(), spec.det.n, spec.k)));
}

MixtureOutcome add(const PhaseSpaceMixture& input, const AdditionSpec& spec) {
    spec.validate();
    // Heralding and output modes are entangled by the squeezer, so the click
    // factor acts inside the normal ordering, not on the P function.
    const PhaseSpaceMixture noisy = to_normal_form(convolve_noise(input, spec.sq.mu()));
    const PhaseSpaceMixture conditioned = multiply_click_factor(noisy, spec.eta_eff(), spec.det.n, spec.k);
    return with_probability(prune(from_normal_form(conditioned)));
}

MixtureOutcome amplify(const PhaseSpaceMixture& input, const AmplifySpec& spec) {
    spec.validate();
    const MixtureOutcome added = add(input, spec.add);
    return subtract(added.state, spec.sub);
}

MixtureOutcome amplify(complex beta, const AmplifySpec& spec) {
    return amplify(PhaseSpaceMixture::coherent(beta), spec);
}

std::vector<AmplifyCoefficients> amplify_coefficients(const AmplifySpec& spec) {
    spec.validate();
    const int n1 = spec.add.det.n;
    const int n2 = spec.sub.det.n;
    const int k1 = spec.add.k;
    const int k2 = spec.sub.k;
    const double eta1 = spec.add.det.eta;
    const double eta2 = spec.sub.det.eta;
    const double mu = spec.add.sq.mu();
    const double nu2 = spec.add.sq.nu() * spec.add.sq.nu();
    const double t = spec.sub.bs.t;
    const double r2 = 1.0 - t * t;

    std::vector<AmplifyCoefficients> coeffs;
    for (int j1 = 0; j1 <= k1; ++j1) {
        const double x1 = 1.0 - static_cast<double>(j1) / n1;
        const double gap = nu2 * (1.0 - eta1 * x1);
        for (int j2 = 0; j2 <= k2; ++j2) {
            const double x2 = 1.0 - static_cast<double>(j2) / n2;
            const double sign = (k1 - j1 + k2 - j2) % 2 == 0 ? 1.0 : -1.0;
            AmplifyCoefficients c;
            c.j1 = j1;
            c.j2 = j2;
            c.f = binomial(n1, k1) * binomial(n2, k2) * binomial(k1, j1) * binomial(k2, j2) * sign / (t * t * gap);
            c.lambda2 = (1.0 + eta1 * nu2 * x1) / (t * t * gap) + eta2 * r2 * x2 / (t * t);
            c.lambda1 = mu / (t * gap);
            c.lambda0 = 1.0 + 1.0 / gap;
            coeffs.push_back(c);
        }
    }
    return coeffs;
}

MixtureOutcome amplify_closed_form(complex beta, const AmplifySpec& spec) {
    PhaseSpaceMixture p;
    const double b2 = std::norm(beta);
    for (const AmplifyCoefficients& c : amplify_coefficients(spec)) {
        // complete the square in alpha
        p.gaussians.push_back({c.f / pi * std::exp((c.lambda1 * c.lambda1 / c.lambda2 - c.lambda0) * b2),
                               c.lambda1 / c.lambda2 * beta, c.lambda2});
    }
    return with_probability(std::move(p));
}

namespace {

// C(N,k) sum_j C(k,j) (-1)^{k-j} exp(-rate_j |alpha0|^2 / g_j) / g_j, g_j = 1 + rate_j * width.
// The alternating sum cancels like the D-symbol does, so it runs in extended precision.
double displaced_thermal_probability(complex alpha0, double eta_scaled, double width, const DetectorConfig& det, int k) {
    const long double a2 = std::norm(alpha0);
    long double sum = 0.0L;
    long double comp = 0.0L;
    long double choose = 1.0L; // C(k, j)
    for (int j = 0; j <= k; ++j) {
        const long double rate = static_cast<long double>(eta_scaled) * (det.n - j) / det.n;
        const long double g = 1.0L + rate * width;
        // (1 - 1/g)/width = rate/g, which stays finite as width -> 0
        const long double sign = (k - j) % 2 == 0 ? 1.0L : -1.0L;
        const long double term = sign * choose * std::exp(-rate * a2 / g) / g;
        const long double t = sum + term;
        comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
        choose = choose * (k - j) / (j + 1);
    }
    return static_cast<double>(binomial(det.n, k) * (sum + comp));
}

} // namespace

double probability_subtraction_displaced_thermal(complex alpha0, double nbar, const SubtractionSpec& spec) {
    spec.validate();
    if (!(nbar >= 0.0)) {
        throw ValidationError("thermal photon number must be non-negative");
    }
    const double r = spec.bs.r();
    return displaced_thermal_probability(alpha0, spec.det.eta * r * r, nbar, spec.det, spec.k);
}

double probability_addition_displaced_thermal(complex alpha0, double nbar, const AdditionSpec& spec) {
    spec.validate();
    if (!(nbar >= 0.0)) {
        throw ValidationError("thermal photon number must be non-negative");
    }
    const double nu = spec.sq.nu();
    return displaced_thermal_probability(alpha0, spec.det.eta * nu * nu, nbar + 1.0, spec.det, spec.k);
}

Eigen::MatrixXd probability_table(const AmplifySpec& spec, complex beta) {
    AmplifySpec cell = spec;
    cell.add.k = 0;
    cell.sub.k = 0;
    cell.validate();
    const PhaseSpaceMixture input = PhaseSpaceMixture::coherent(beta);
    Eigen::MatrixXd table(spec.add.det.n + 1, spec.sub.det.n + 1);
    for (int k1 = 0; k1 <= spec.add.det.n; ++k1) {
        cell.add.k = k1;
        const MixtureOutcome added = add(input, cell.add);
        for (int k2 = 0; k2 <= spec.sub.det.n; ++k2) {
            cell.sub.k = k2;
            table(k1, k2) = subtract(added.state, cell.sub).probability;
        }
    }
    return table;
}

double effective_sigma2(const SqueezerConfig& sq, double eta) {
    sq.validate();
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw ValidationError("quantum efficiency must lie in [0,1]");
    }
    const double nu2 = sq.nu() * sq.nu();
    return nu2 * (1.0 - eta) / (1.0 + eta * nu2);
}

SqueezerConfig squeezer_for_sigma2(double sigma2, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw ValidationError("quantum efficiency must lie in [0,1]");
    }
    if (!(sigma2 >= 0.0)) {
        throw ValidationError("variance must be non-negative");
    }
    const double denom = 1.0 - eta - eta * sigma2;
    if (!(denom > 0.0)) {
        throw ValidationError("no squeezer reaches this variance at the given efficiency");
    }
    return SqueezerConfig{std::asinh(std::sqrt(sigma2 / denom))};
}

} // namespace clickcraft
