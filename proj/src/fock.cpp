#include "clickcraft/fock.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "clickcraft/error.hpp"
#include "clickcraft/numeric.hpp"

namespace clickcraft {

// ---------------------------------------------------------------- matrices

DensityMatrix::DensityMatrix(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) {
        throw std::invalid_argument("DensityMatrix must be square");
    }
}

double DensityMatrix::trace() const {
    return entries_.trace().real();
}

DensityMatrix DensityMatrix::normalized() const {
    const double tr = trace();
    if (!(tr > 0.0)) {
        throw NumericalError("cannot normalize a state with vanishing trace");
    }
    return DensityMatrix(entries_ / tr);
}

DensityMatrix DensityMatrix::resized(int cutoff) const {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(cutoff, cutoff);
    const int keep = std::min(cutoff, this->cutoff());
    out.topLeftCorner(keep, keep) = entries_.topLeftCorner(keep, keep);
    return DensityMatrix(std::move(out));
}

namespace {

void check_operator(const Eigen::MatrixXcd& m, double hermitian_tol, double psd_tol) {
    const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (asym > hermitian_tol) {
        throw NumericalError("state is not Hermitian (deviation " + std::to_string(asym) + ")");
    }
    const Eigen::MatrixXcd herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
    const double lowest = solver.eigenvalues().minCoeff();
    if (lowest < -psd_tol) {
        throw NumericalError("state has a negative eigenvalue " + std::to_string(lowest));
    }
    if (m.trace().real() > 1.0 + 1e-12) {
        throw NumericalError("state trace exceeds one");
    }
}

} // namespace

void DensityMatrix::check(double hermitian_tol, double psd_tol) const {
    check_operator(entries_, hermitian_tol, psd_tol);
}

TwoModeDensityMatrix::TwoModeDensityMatrix(Cutoffs cutoffs, Eigen::MatrixXcd entries)
    : cutoffs_(cutoffs), entries_(std::move(entries)) {
    const Eigen::Index dim = static_cast<Eigen::Index>(cutoffs.a) * cutoffs.b;
    if (entries_.rows() != dim || entries_.cols() != dim) {
        throw std::invalid_argument("TwoModeDensityMatrix dimension does not match cutoffs");
    }
}

double TwoModeDensityMatrix::trace() const {
    return entries_.trace().real();
}

DensityMatrix TwoModeDensityMatrix::reduced_a() const {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(cutoffs_.a, cutoffs_.a);
    for (int p = 0; p < cutoffs_.a; ++p) {
        for (int q = 0; q < cutoffs_.a; ++q) {
            complex sum = 0.0;
            for (int r = 0; r < cutoffs_.b; ++r) {
                sum += (*this)(p, q, r, r);
            }
            out(p, q) = sum;
        }
    }
    return DensityMatrix(std::move(out));
}

DensityMatrix TwoModeDensityMatrix::reduced_b() const {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(cutoffs_.b, cutoffs_.b);
    for (int r = 0; r < cutoffs_.b; ++r) {
        for (int s = 0; s < cutoffs_.b; ++s) {
            complex sum = 0.0;
            for (int p = 0; p < cutoffs_.a; ++p) {
                sum += (*this)(p, p, r, s);
            }
            out(r, s) = sum;
        }
    }
    return DensityMatrix(std::move(out));
}

void TwoModeDensityMatrix::check(double hermitian_tol, double psd_tol) const {
    check_operator(entries_, hermitian_tol, psd_tol);
}

TwoModeDensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
    const int da = a.cutoff();
    const int db = b.cutoff();
    Eigen::MatrixXcd out(da * db, da * db);
    for (int p = 0; p < da; ++p) {
        for (int q = 0; q < da; ++q) {
            out.block(p * db, q * db, db, db) = a(p, q) * b.matrix();
        }
    }
    return TwoModeDensityMatrix({da, db}, std::move(out));
}

// ---------------------------------------------------------------- optics

SqueezerConfig SqueezerConfig::from_mu(double mu) {
    if (!(mu >= 1.0)) {
        throw ValidationError("squeezer requires mu = cosh(xi) >= 1");
    }
    return SqueezerConfig{std::acosh(mu)};
}

double SqueezerConfig::mu() const {
    return std::cosh(xi);
}

double SqueezerConfig::nu() const {
    return std::sinh(xi);
}

void SqueezerConfig::validate() const {
    if (!(xi >= 0.0) || !std::isfinite(xi)) {
        throw ValidationError("squeezing parameter xi must be finite and non-negative");
    }
}

double BeamSplitterConfig::r() const {
    return std::sqrt(std::max(0.0, 1.0 - t * t));
}

void BeamSplitterConfig::validate() const {
    if (!(t > 0.0 && t < 1.0)) {
        throw ValidationError("beam splitter transmissivity must lie strictly inside (0,1), got " + std::to_string(t));
    }
}

// ---------------------------------------------------------------- states

namespace {

// Cap on Fock indices used when summing thermal tails.
constexpr int max_support = 1 << 14;

std::vector<complex> coherent_amplitudes(complex alpha, int cutoff) {
    std::vector<complex> amp(static_cast<std::size_t>(cutoff));
    complex c = std::exp(-0.5 * std::norm(alpha));
    for (int n = 0; n < cutoff; ++n) {
        if (n > 0) {
            c *= alpha / std::sqrt(static_cast<double>(n));
        }
        amp[static_cast<std::size_t>(n)] = c;
    }
    return amp;
}

int thermal_support(double nbar) {
    if (nbar <= 0.0) {
        return 1;
    }
    const double ratio = nbar / (nbar + 1.0);
    const int n = static_cast<int>(std::ceil(std::log(1e-18) / std::log(ratio)));
    return std::clamp(n + 1, 1, max_support);
}

// Unnormalized truncation of the state to |0>..|cutoff-1>.
Eigen::MatrixXcd truncated(const SingleModeState& kind, int cutoff) {
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(cutoff, cutoff);
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, states::Vacuum>) {
                rho(0, 0) = 1.0;
            } else if constexpr (std::is_same_v<T, states::Coherent>) {
                const auto amp = coherent_amplitudes(s.alpha, cutoff);
                const Eigen::Map<const Eigen::VectorXcd> v(amp.data(), cutoff);
                rho = v * v.adjoint();
            } else if constexpr (std::is_same_v<T, states::Thermal>) {
                if (!(s.nbar >= 0.0)) {
                    throw ValidationError("thermal photon number must be non-negative");
                }
                const double ratio = s.nbar / (s.nbar + 1.0);
                double p = 1.0 / (s.nbar + 1.0);
                for (int n = 0; n < cutoff; ++n) {
                    rho(n, n) = p;
                    p *= ratio;
                }
            } else if constexpr (std::is_same_v<T, states::DisplacedThermal>) {
                if (!(s.nbar >= 0.0)) {
                    throw ValidationError("thermal photon number must be non-negative");
                }
                if (s.nbar == 0.0) {
                    rho = truncated(states::Coherent{s.alpha}, cutoff);
                    return;
                }
                // D(alpha)|n> = (a^dag - alpha*) D(alpha)|n-1> / sqrt(n); row m of
                // column n only needs rows m-1, m of column n-1, so the
                // truncated columns are exact.
                const auto first = coherent_amplitudes(s.alpha, cutoff);
                Eigen::VectorXcd col = Eigen::Map<const Eigen::VectorXcd>(first.data(), cutoff);
                const double ratio = s.nbar / (s.nbar + 1.0);
                double p = 1.0 / (s.nbar + 1.0);
                const int support = thermal_support(s.nbar);
                for (int n = 0; n < support; ++n) {
                    if (n > 0) {
                        Eigen::VectorXcd next(cutoff);
                        for (int m = cutoff - 1; m >= 0; --m) {
                            const complex up = m > 0 ? std::sqrt(static_cast<double>(m)) * col(m - 1) : complex(0.0);
                            next(m) = (up - std::conj(s.alpha) * col(m)) / std::sqrt(static_cast<double>(n));
                        }
                        col = std::move(next);
                        p *= ratio;
                    }
                    rho.noalias() += p * col * col.adjoint();
                }
            } else if constexpr (std::is_same_v<T, states::Fock>) {
                if (s.n < 0) {
                    throw ValidationError("Fock state index must be non-negative");
                }
                if (s.n < cutoff) {
                    rho(s.n, s.n) = 1.0;
                }
            }
        },
        kind);
    return rho;
}

} // namespace

DensityMatrix make_state(const SingleModeState& kind, int cutoff, double tail_tol) {
    if (cutoff < 1) {
        throw ValidationError("Fock cutoff must be positive");
    }
    Eigen::MatrixXcd rho = truncated(kind, cutoff);
    const double tr = rho.trace().real();
    if (tr < 1.0 - tail_tol) {
        throw NumericalError("cutoff " + std::to_string(cutoff) + " too small: truncated trace " + std::to_string(tr));
    }
    rho /= tr;
    return DensityMatrix(std::move(rho));
}

TwoModeDensityMatrix make_phase_diffused_tmsv(double omega, int cutoff, double tail_tol) {
    if (!(omega > 0.0 && omega < 1.0)) {
        throw ValidationError("phase-diffused TMSV requires 0 < omega < 1");
    }
    if (cutoff < 1) {
        throw ValidationError("Fock cutoff must be positive");
    }
    const int dim = cutoff * cutoff;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
    double w = 1.0 - omega;
    double tr = 0.0;
    for (int n = 0; n < cutoff; ++n) {
        rho(n * cutoff + n, n * cutoff + n) = w;
        tr += w;
        w *= omega;
    }
    if (tr < 1.0 - tail_tol) {
        throw NumericalError("cutoff " + std::to_string(cutoff) + " too small for omega=" + std::to_string(omega));
    }
    rho /= tr;
    return TwoModeDensityMatrix({cutoff, cutoff}, std::move(rho));
}

int suggest_cutoff(const SingleModeState& kind, double tail_tol) {
    for (int trial = 64; trial <= max_support; trial *= 2) {
        const Eigen::MatrixXcd rho = truncated(kind, trial);
        CompensatedSum mass;
        for (int n = 0; n < trial; ++n) {
            mass += rho(n, n).real();
            if (mass.value() >= 1.0 - tail_tol) {
                return n + 1;
            }
        }
    }
    throw NumericalError("no cutoff below " + std::to_string(max_support) + " reaches the tail tolerance");
}

int suggest_squeezer_cutoff(double input_mean, const SqueezerConfig& sq, double tail_tol) {
    sq.validate();
    // The idler marginal carries nu^2 (<n_in> + 1) photons; a thermal tail of
    // that mean bounds it from above.
    const double nbar = sq.nu() * sq.nu() * (std::max(0.0, input_mean) + 1.0);
    if (nbar <= 0.0) {
        return 1;
    }
    const double ratio = nbar / (nbar + 1.0);
    const double base = std::ceil(std::log(tail_tol) / std::log(ratio));
    return static_cast<int>(std::ceil(1.5 * std::max(1.0, base)));
}

std::vector<double> photon_distribution(const DensityMatrix& state) {
    std::vector<double> p(static_cast<std::size_t>(state.cutoff()));
    for (int n = 0; n < state.cutoff(); ++n) {
        p[static_cast<std::size_t>(n)] = std::max(0.0, state(n, n).real());
    }
    return p;
}

// ---------------------------------------------------------------- unitaries

TwoModeUnitary TwoModeUnitary::beam_splitter(const BeamSplitterConfig& bs, Cutoffs cutoffs) {
    bs.validate();
    const double theta = std::acos(bs.t);
    TwoModeUnitary u(cutoffs);
    // theta (b^dag a - a^dag b) conserves p + r
    for (int total = 0; total <= cutoffs.a + cutoffs.b - 2; ++total) {
        const int lo = std::max(0, total - cutoffs.b + 1);
        const int hi = std::min(cutoffs.a - 1, total);
        const int size = hi - lo + 1;
        Block block;
        Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(size, size);
        for (int i = 0; i < size; ++i) {
            const int p = lo + i;
            const int r = total - p;
            block.indices.push_back(p * cutoffs.b + r);
            if (i > 0) {
                // b^dag a |p,r> = sqrt(p (r+1)) |p-1, r+1>
                const double amp = theta * std::sqrt(static_cast<double>(p) * (r + 1));
                gen(i - 1, i) += amp;
                gen(i, i - 1) -= amp;
            }
        }
        block.u = size == 1 ? Eigen::MatrixXd::Identity(1, 1) : Eigen::MatrixXd(gen.exp());
        u.blocks_.push_back(std::move(block));
    }
    u.locate();
    return u;
}

TwoModeUnitary TwoModeUnitary::two_mode_squeezer(const SqueezerConfig& sq, Cutoffs cutoffs) {
    sq.validate();
    TwoModeUnitary u(cutoffs);
    // xi (a^dag b^dag - a b) conserves p - r
    for (int diff = -(cutoffs.b - 1); diff <= cutoffs.a - 1; ++diff) {
        Block block;
        std::vector<std::pair<int, int>> modes;
        for (int r = std::max(0, -diff); r < cutoffs.b && r + diff < cutoffs.a; ++r) {
            modes.emplace_back(r + diff, r);
            block.indices.push_back((r + diff) * cutoffs.b + r);
        }
        const int size = static_cast<int>(modes.size());
        Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(size, size);
        for (int i = 0; i + 1 < size; ++i) {
            // a^dag b^dag |p,r> = sqrt((p+1)(r+1)) |p+1, r+1>
            const auto [p, r] = modes[static_cast<std::size_t>(i)];
            const double amp = sq.xi * std::sqrt(static_cast<double>(p + 1) * (r + 1));
            gen(i + 1, i) += amp;
            gen(i, i + 1) -= amp;
        }
        block.u = size == 1 ? Eigen::MatrixXd::Identity(1, 1) : Eigen::MatrixXd(gen.exp());
        u.blocks_.push_back(std::move(block));
    }
    u.locate();
    return u;
}

void TwoModeUnitary::locate() {
    where_.assign(static_cast<std::size_t>(cutoffs_.a) * cutoffs_.b, {-1, -1});
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        for (std::size_t i = 0; i < blocks_[b].indices.size(); ++i) {
            where_[static_cast<std::size_t>(blocks_[b].indices[i])] = {static_cast<int>(b), static_cast<int>(i)};
        }
    }
}

TwoModeDensityMatrix TwoModeUnitary::apply(const TwoModeDensityMatrix& state) const {
    if (state.cutoffs().a != cutoffs_.a || state.cutoffs().b != cutoffs_.b) {
        throw ValidationError("state cutoffs do not match the unitary");
    }
    const Eigen::MatrixXcd& rho = state.matrix();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
    for (const Block& left : blocks_) {
        const Eigen::MatrixXcd ul = left.u.cast<complex>();
        for (const Block& right : blocks_) {
            const Eigen::MatrixXcd sub = rho(left.indices, right.indices);
            if (sub.cwiseAbs().maxCoeff() == 0.0) {
                continue;
            }
            out(left.indices, right.indices) = ul * sub * right.u.transpose().cast<complex>();
        }
    }
    return TwoModeDensityMatrix(cutoffs_, std::move(out));
}

Eigen::MatrixXd TwoModeUnitary::dense() const {
    const Eigen::Index dim = static_cast<Eigen::Index>(cutoffs_.a) * cutoffs_.b;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
    for (const Block& block : blocks_) {
        out(block.indices, block.indices) = block.u;
    }
    return out;
}

std::vector<TwoModeUnitary::Entry> TwoModeUnitary::column(int p, int r) const {
    if (p < 0 || r < 0 || p >= cutoffs_.a || r >= cutoffs_.b) {
        throw std::out_of_range("TwoModeUnitary::column index outside the truncated space");
    }
    const auto [b, pos] = where_[static_cast<std::size_t>(p * cutoffs_.b + r)];
    const Block& block = blocks_[static_cast<std::size_t>(b)];
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < block.indices.size(); ++i) {
        const double amp = block.u(static_cast<Eigen::Index>(i), pos);
        if (amp != 0.0) {
            entries.push_back({block.indices[i] / cutoffs_.b, block.indices[i] % cutoffs_.b, amp});
        }
    }
    return entries;
}

TwoModeDensityMatrix apply_beam_splitter(const TwoModeDensityMatrix& state, const BeamSplitterConfig& bs) {
    const Cutoffs c = state.cutoffs();
    if (c.a != c.b) {
        throw ValidationError("beam splitter requires equal mode cutoffs");
    }
    return TwoModeUnitary::beam_splitter(bs, c).apply(state);
}

TwoModeDensityMatrix apply_two_mode_squeezer(const TwoModeDensityMatrix& state, const SqueezerConfig& sq) {
    const Cutoffs c = state.cutoffs();
    if (c.a != c.b) {
        throw ValidationError("two-mode squeezer requires equal mode cutoffs");
    }
    return TwoModeUnitary::two_mode_squeezer(sq, c).apply(state);
}

// ---------------------------------------------------------------- conditioning

ProcessOutcome<DensityMatrix> condition_on_weights(const TwoModeDensityMatrix& state, std::span<const double> weights) {
    const Cutoffs c = state.cutoffs();
    const int mmax = std::min<int>(c.b, static_cast<int>(weights.size()));
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(c.a, c.a);
    for (int p = 0; p < c.a; ++p) {
        for (int q = 0; q < c.a; ++q) {
            complex sum = 0.0;
            for (int m = 0; m < mmax; ++m) {
                sum += weights[static_cast<std::size_t>(m)] * state(p, q, m, m);
            }
            out(p, q) = sum;
        }
    }
    DensityMatrix rho(std::move(out));
    const double prob = rho.trace();
    return {std::move(rho), prob};
}

ProcessOutcome<DensityMatrix> condition_on_clicks(const TwoModeDensityMatrix& state, const DetectorConfig& det, int k) {
    const DiagonalPOVMElement element = click_povm_element(det, k, state.cutoffs().b);
    return condition_on_weights(state, element.weights);
}

ProcessOutcome<DensityMatrix> condition_after_mixing(const DensityMatrix& input, const TwoModeUnitary& mixer,
                                                     std::span<const double> weights_b) {
    const Cutoffs c = mixer.cutoffs();
    const int din = input.cutoff();
    if (din > c.a) {
        throw ValidationError("input cutoff exceeds the mixer's mode-A cutoff");
    }
    const int mmax = std::min<int>(c.b, static_cast<int>(weights_b.size()));

    // by_m[p][m]: entries of U|p,0> with idler photon number m
    std::vector<std::vector<std::vector<std::pair<int, double>>>> by_m(static_cast<std::size_t>(din));
    for (int p = 0; p < din; ++p) {
        auto& slots = by_m[static_cast<std::size_t>(p)];
        slots.resize(static_cast<std::size_t>(mmax));
        for (const auto& e : mixer.column(p, 0)) {
            if (e.b < mmax) {
                slots[static_cast<std::size_t>(e.b)].emplace_back(e.a, e.amplitude);
            }
        }
    }

    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(c.a, c.a);
    for (int p = 0; p < din; ++p) {
        for (int q = 0; q < din; ++q) {
            const complex rho_pq = input(p, q);
            if (rho_pq == 0.0) {
                continue;
            }
            for (int m = 0; m < mmax; ++m) {
                const double w = weights_b[static_cast<std::size_t>(m)];
                if (w == 0.0) {
                    continue;
                }
                for (const auto& [a1, amp1] : by_m[static_cast<std::size_t>(p)][static_cast<std::size_t>(m)]) {
                    for (const auto& [a2, amp2] : by_m[static_cast<std::size_t>(q)][static_cast<std::size_t>(m)]) {
                        out(a1, a2) += rho_pq * (w * amp1 * amp2);
                    }
                }
            }
        }
    }
    DensityMatrix rho(std::move(out));
    const double prob = rho.trace();
    return {std::move(rho), prob};
}

ProcessOutcome<DensityMatrix> fock_subtract(const DensityMatrix& input, const BeamSplitterConfig& bs,
                                            const DetectorConfig& det, int k) {
    const int d = input.cutoff();
    const TwoModeUnitary mixer = TwoModeUnitary::beam_splitter(bs, {d, d});
    const DiagonalPOVMElement element = click_povm_element(det, k, d);
    return condition_after_mixing(input, mixer, element.weights);
}

ProcessOutcome<DensityMatrix> fock_add(const DensityMatrix& input, const SqueezerConfig& sq, const DetectorConfig& det,
                                       int k, int ancilla_cutoff) {
    if (ancilla_cutoff < 1) {
        throw ValidationError("ancilla cutoff must be positive");
    }
    const int d = input.cutoff();
    const TwoModeUnitary mixer = TwoModeUnitary::two_mode_squeezer(sq, {d + ancilla_cutoff, ancilla_cutoff});
    const DiagonalPOVMElement element = click_povm_element(det, k, ancilla_cutoff);
    return condition_after_mixing(input, mixer, element.weights);
}

// ---------------------------------------------------------------- moments

Moment normally_ordered_moment(const DensityMatrix& state, int p, int q) {
    if (p < 0 || q < 0) {
        throw ValidationError("moment orders must be non-negative");
    }
    const int d = state.cutoff();
    // a^dag^p a^q |i> = c_i |i - q + p>, so tr(rho a^dag^p a^q) = sum_i c_i rho(i, i-q+p)
    std::vector<complex> terms;
    for (int i = q; i < d; ++i) {
        const int j = i - q + p;
        if (j >= d) {
            break;
        }
        double c = 1.0;
        for (int l = 0; l < q; ++l) {
            c *= std::sqrt(static_cast<double>(i - l));
        }
        for (int l = 1; l <= p; ++l) {
            c *= std::sqrt(static_cast<double>(i - q + l));
        }
        terms.push_back(c * state(i, j));
    }
    complex value = 0.0;
    for (const complex& t : terms) {
        value += t;
    }
    const std::size_t window = std::max<std::size_t>(1, static_cast<std::size_t>(d) / 8);
    double tail = 0.0;
    for (std::size_t i = terms.size() > window ? terms.size() - window : 0; i < terms.size(); ++i) {
        tail += std::abs(terms[i]);
    }
    const double scale = std::abs(value);
    Moment m;
    m.value = value;
    m.tail_ratio = scale > 0.0 ? tail / scale : (tail > 0.0 ? 1.0 : 0.0);
    return m;
}

} // namespace clickcraft
