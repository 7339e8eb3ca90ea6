#ifndef CLICKCRAFT_FOCK_HPP
#define CLICKCRAFT_FOCK_HPP

// Truncated Fock-space oracle. Everything here is brute-force linear algebra
// on |0>..|d-1>, independent of the phase-space closed forms.

#include <complex>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "clickcraft/outcome.hpp"
#include "clickcraft/povm.hpp"

namespace clickcraft {

using complex = std::complex<double>;

inline constexpr double default_tail_tol = 1e-10;

/// Single-mode density matrix on |0>..|cutoff-1>. May be unnormalized
/// (conditional states); the trace is then the event probability.
class DensityMatrix {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(Eigen::MatrixXcd entries);

    int cutoff() const { return static_cast<int>(entries_.rows()); }
    const Eigen::MatrixXcd& matrix() const { return entries_; }
    complex operator()(int p, int q) const { return entries_(p, q); }

    double trace() const;
    DensityMatrix normalized() const;
    /// Zero-padded (or cropped) copy with a new cutoff.
    DensityMatrix resized(int cutoff) const;

    /// Throws NumericalError if not Hermitian, not PSD or trace > 1.
    void check(double hermitian_tol = 1e-12, double psd_tol = 1e-10) const;

private:
    Eigen::MatrixXcd entries_;
};

struct Cutoffs {
    int a = 1;
    int b = 1;
};

/// rho_{p,q,r,s} |p><q| (x) |r><s|, stored as a (da*db)^2 matrix with joint
/// index p*db + r.
class TwoModeDensityMatrix {
public:
    TwoModeDensityMatrix() = default;
    TwoModeDensityMatrix(Cutoffs cutoffs, Eigen::MatrixXcd entries);

    Cutoffs cutoffs() const { return cutoffs_; }
    const Eigen::MatrixXcd& matrix() const { return entries_; }
    int index(int p, int r) const { return p * cutoffs_.b + r; }
    complex operator()(int p, int q, int r, int s) const { return entries_(index(p, r), index(q, s)); }

    double trace() const;
    DensityMatrix reduced_a() const;
    DensityMatrix reduced_b() const;
    void check(double hermitian_tol = 1e-12, double psd_tol = 1e-10) const;

private:
    Cutoffs cutoffs_;
    Eigen::MatrixXcd entries_;
};

TwoModeDensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b);

/// Two-mode squeezer exp(xi (a^dag b^dag - a b)); mu = cosh xi, nu = sinh xi.
struct SqueezerConfig {
    double xi = 0.0;

    static SqueezerConfig from_mu(double mu);
    double mu() const;
    double nu() const;
    void validate() const;
};

/// Beam splitter with amplitude transmissivity t and reflectivity r = sqrt(1-t^2):
/// |alpha, 0> -> |t alpha, r alpha>.
struct BeamSplitterConfig {
    double t = 1.0;

    double r() const;
    void validate() const;
};

namespace states {
struct Vacuum {};
struct Coherent {
    complex alpha;
};
struct Thermal {
    double nbar = 0.0;
};
struct DisplacedThermal {
    complex alpha;
    double nbar = 0.0;
};
struct Fock {
    int n = 0;
};
} // namespace states

using SingleModeState = std::variant<states::Vacuum, states::Coherent, states::Thermal, states::DisplacedThermal, states::Fock>;

/// Truncated, renormalized state. Throws NumericalError when the probability
/// mass below the cutoff is smaller than 1 - tail_tol.
DensityMatrix make_state(const SingleModeState& kind, int cutoff, double tail_tol = default_tail_tol);

/// Phase-diffused two-mode squeezed vacuum (1-omega) sum_n omega^n |n,n><n,n|.
TwoModeDensityMatrix make_phase_diffused_tmsv(double omega, int cutoff, double tail_tol = default_tail_tol);

/// Smallest cutoff whose truncated trace is at least 1 - tail_tol.
int suggest_cutoff(const SingleModeState& kind, double tail_tol = default_tail_tol);

/// Ancilla cutoff for a squeezer acting on an input of mean photon number
/// input_mean: tail of the idler's thermal marginal, times a 1.5 headroom.
int suggest_squeezer_cutoff(double input_mean, const SqueezerConfig& sq, double tail_tol = default_tail_tol);

std::vector<double> photon_distribution(const DensityMatrix& state);

/// exp of the truncated generator, stored block-wise on its invariant subspaces.
class TwoModeUnitary {
public:
    static TwoModeUnitary beam_splitter(const BeamSplitterConfig& bs, Cutoffs cutoffs);
    static TwoModeUnitary two_mode_squeezer(const SqueezerConfig& sq, Cutoffs cutoffs);

    Cutoffs cutoffs() const { return cutoffs_; }
    TwoModeDensityMatrix apply(const TwoModeDensityMatrix& state) const;
    Eigen::MatrixXd dense() const;

    /// Non-zero entries (p', r', amplitude) of U|p, r>.
    struct Entry {
        int a;
        int b;
        double amplitude;
    };
    std::vector<Entry> column(int p, int r) const;

private:
    struct Block {
        std::vector<int> indices; // joint indices p*db + r
        Eigen::MatrixXd u;
    };

    explicit TwoModeUnitary(Cutoffs cutoffs) : cutoffs_(cutoffs) {}
    void locate();

    Cutoffs cutoffs_;
    std::vector<Block> blocks_;
    std::vector<std::pair<int, int>> where_; // joint index -> (block, position)
};

TwoModeDensityMatrix apply_beam_splitter(const TwoModeDensityMatrix& state, const BeamSplitterConfig& bs);
TwoModeDensityMatrix apply_two_mode_squeezer(const TwoModeDensityMatrix& state, const SqueezerConfig& sq);

/// tr_B(rho [1 (x) Pi]) for a diagonal POVM element on mode B.
ProcessOutcome<DensityMatrix> condition_on_weights(const TwoModeDensityMatrix& state, std::span<const double> weights);

/// Conditional state of mode A after k clicks of det on mode B (heralding).
ProcessOutcome<DensityMatrix> condition_on_clicks(const TwoModeDensityMatrix& state, const DetectorConfig& det, int k);

/// Mode B starts in vacuum, the two modes pass `mixer`, and mode B is measured
/// with a diagonal POVM. Equivalent to building rho (x) |0><0|, applying the
/// unitary and conditioning, without forming the two-mode matrix.
ProcessOutcome<DensityMatrix> condition_after_mixing(const DensityMatrix& input, const TwoModeUnitary& mixer,
                                                     std::span<const double> weights_b);

/// Subtraction oracle: beam splitter with vacuum ancilla, k clicks on the
/// reflected mode. The output cutoff equals the input cutoff (photon number is
/// conserved, so nothing is truncated).
ProcessOutcome<DensityMatrix> fock_subtract(const DensityMatrix& input, const BeamSplitterConfig& bs,
                                            const DetectorConfig& det, int k);

/// Addition oracle: two-mode squeezer with vacuum idler, k clicks on the idler.
/// The idler is truncated at ancilla_cutoff; the output cutoff is
/// input cutoff + ancilla_cutoff.
ProcessOutcome<DensityMatrix> fock_add(const DensityMatrix& input, const SqueezerConfig& sq, const DetectorConfig& det,
                                       int k, int ancilla_cutoff);

struct Moment {
    complex value;
    double tail_ratio = 0.0; // share of |value| carried by the top cutoff/8 indices
    bool converged(double tol = 1e-8) const { return tail_ratio <= tol; }
};

/// tr(rho a^dag^p a^q).
Moment normally_ordered_moment(const DensityMatrix& state, int p, int q);

} // namespace clickcraft

#endif
