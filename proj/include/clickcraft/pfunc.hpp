#ifndef CLICKCRAFT_PFUNC_HPP
#define CLICKCRAFT_PFUNC_HPP

#include <complex>
#include <vector>

namespace clickcraft {

using complex = std::complex<double>;

/// c * exp(-a |alpha - z|^2). c may be negative (nonclassical outputs).
struct GaussianTerm {
    double c = 0.0;
    complex z;
    double a = 1.0;

    double operator()(complex alpha) const;
    double integral() const;
};

/// c * delta^2(alpha - z); a coherent component.
struct DeltaTerm {
    double c = 0.0;
    complex z;
};

/// Finite sum of isotropic Gaussians and delta terms.
///
/// Used for Glauber-Sudarshan P functions and, for the addition protocol, for
/// normally ordered symbols F with rho = :F(a^dag, a):. The two are related by
/// F = P * exp(-|alpha|^2) (to_normal_form / from_normal_form).
struct PhaseSpaceMixture {
    std::vector<GaussianTerm> gaussians;
    std::vector<DeltaTerm> deltas;
    double dropped = 0.0; // accumulated |integral| removed by prune()

    std::size_t size() const { return gaussians.size() + deltas.size(); }
    /// Smooth part at alpha; delta terms are not rasterized.
    double operator()(complex alpha) const;
    /// sum_i |c_i| exp(-a_i |alpha - z_i|^2): the scale against which
    /// cancellation in operator() is judged.
    double magnitude(complex alpha) const;

    static PhaseSpaceMixture coherent(complex beta);
    /// exp(-|alpha|^2/nbar) / (pi nbar); nbar = 0 gives the vacuum delta.
    static PhaseSpaceMixture thermal(double nbar);
    static PhaseSpaceMixture displaced_thermal(complex alpha0, double nbar);
};

/// Loss map: P(alpha) -> P(alpha/t)/t^2.
PhaseSpaceMixture scale_loss(const PhaseSpaceMixture& p, double t);

/// Parametric-amplifier noise: amplitude gain mu plus convolution with a
/// thermal kernel of variance mu^2 - 1. mu = 1 is the identity.
PhaseSpaceMixture convolve_noise(const PhaseSpaceMixture& p, double mu);

/// Pointwise product with the k-click factor
///   C(N,k) exp(-eta_eff |alpha|^2 (N-k)/N) (1 - exp(-eta_eff |alpha|^2/N))^k,
/// expanded binomially. Term count grows by (k+1).
PhaseSpaceMixture multiply_click_factor(const PhaseSpaceMixture& p, double eta_eff, int n, int k);

/// P -> F = P * exp(-|alpha|^2); deltas become unit-width Gaussians.
PhaseSpaceMixture to_normal_form(const PhaseSpaceMixture& p);

/// F -> P. Requires every Gaussian exponent a <= 1; a == 1 maps back to a
/// delta term, a > 1 has no P function and throws ValidationError.
PhaseSpaceMixture from_normal_form(const PhaseSpaceMixture& f);

/// Drops terms whose |integral| is below rel_tol times the mixture's absolute
/// integral; the removed amount is added to `dropped`.
PhaseSpaceMixture prune(const PhaseSpaceMixture& p, double rel_tol = 1e-15);

/// sum c pi/a over Gaussians + sum c over deltas.
double integral(const PhaseSpaceMixture& p);

/// Closed-form phase-space moment, integral of P(alpha) conj(alpha)^p alpha^q,
/// i.e. <a^dag^p a^q> when p is a P function. Orders p + q <= 6.
complex moment(const PhaseSpaceMixture& p, int order_dag, int order_a);

struct GridSpec {
    double re_min = -1.0;
    double re_max = 1.0;
    double im_min = -1.0;
    double im_max = 1.0;
    int n_re = 1;
    int n_im = 1;

    void validate() const;
    double re(int i) const;
    double im(int j) const;
};

/// Smooth-part values at cell centres, row-major with rows along Im(alpha):
/// values[j * n_re + i] = P(re(i) + i im(j)).
struct Grid {
    GridSpec spec;
    std::vector<double> values;
    std::vector<DeltaTerm> deltas;

    double at(int i, int j) const { return values[static_cast<std::size_t>(j) * spec.n_re + i]; }
};

/// Thread count comes from CLICKCRAFT_THREADS (default: hardware
/// concurrency). Values do not depend on the thread count.
Grid evaluate_grid(const PhaseSpaceMixture& p, const GridSpec& grid);

} // namespace clickcraft

#endif
