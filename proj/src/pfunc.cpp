#include "clickcraft/pfunc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <thread>

#include "clickcraft/error.hpp"
#include "clickcraft/numeric.hpp"

namespace clickcraft {

using std::numbers::pi;

double GaussianTerm::operator()(complex alpha) const {
    return c * std::exp(-a * std::norm(alpha - z));
}

double GaussianTerm::integral() const {
    return c * pi / a;
}

double PhaseSpaceMixture::operator()(complex alpha) const {
    double sum = 0.0;
    for (const GaussianTerm& g : gaussians) {
        sum += g(alpha);
    }
    return sum;
}

double PhaseSpaceMixture::magnitude(complex alpha) const {
    double sum = 0.0;
    for (const GaussianTerm& g : gaussians) {
        sum += std::abs(g(alpha));
    }
    return sum;
}

PhaseSpaceMixture PhaseSpaceMixture::coherent(complex beta) {
    PhaseSpaceMixture p;
    p.deltas.push_back({1.0, beta});
    return p;
}

PhaseSpaceMixture PhaseSpaceMixture::thermal(double nbar) {
    return displaced_thermal(0.0, nbar);
}

PhaseSpaceMixture PhaseSpaceMixture::displaced_thermal(complex alpha0, double nbar) {
    if (!(nbar >= 0.0) || !std::isfinite(nbar)) {
        throw ValidationError("thermal photon number must be finite and non-negative");
    }
    if (nbar == 0.0) {
        return coherent(alpha0);
    }
    PhaseSpaceMixture p;
    p.gaussians.push_back({1.0 / (pi * nbar), alpha0, 1.0 / nbar});
    return p;
}

PhaseSpaceMixture scale_loss(const PhaseSpaceMixture& p, double t) {
    if (!(t > 0.0 && t <= 1.0)) {
        throw ValidationError("loss transmissivity must lie in (0,1], got " + std::to_string(t));
    }
    PhaseSpaceMixture out;
    out.dropped = p.dropped;
    out.gaussians.reserve(p.gaussians.size());
    for (const GaussianTerm& g : p.gaussians) {
        out.gaussians.push_back({g.c / (t * t), t * g.z, g.a / (t * t)});
    }
    for (const DeltaTerm& d : p.deltas) {
        out.deltas.push_back({d.c, t * d.z});
    }
    return out;
}

PhaseSpaceMixture convolve_noise(const PhaseSpaceMixture& p, double mu) {
    if (!(mu >= 1.0) || !std::isfinite(mu)) {
        throw ValidationError("noise map requires mu >= 1, got " + std::to_string(mu));
    }
    if (mu == 1.0) {
        return p;
    }
    const double mu2 = mu * mu;
    const double var = mu2 - 1.0;
    PhaseSpaceMixture out;
    out.dropped = p.dropped;
    out.gaussians.reserve(p.size());
    for (const GaussianTerm& g : p.gaussians) {
        // variance 1/a scales by mu^2 under the gain, then adds mu^2 - 1
        const double a = 1.0 / (mu2 / g.a + var);
        out.gaussians.push_back({g.c * a / g.a, mu * g.z, a});
    }
    for (const DeltaTerm& d : p.deltas) {
        out.gaussians.push_back({d.c / (pi * var), mu * d.z, 1.0 / var});
    }
    return out;
}

PhaseSpaceMixture multiply_click_factor(const PhaseSpaceMixture& p, double eta_eff, int n, int k) {
    if (!(eta_eff >= 0.0) || !std::isfinite(eta_eff)) {
        throw ValidationError("effective efficiency must be finite and non-negative");
    }
    if (n < 1) {
        throw ValidationError("detector needs at least one diode");
    }
    if (k < 0 || k > n) {
        throw ValidationError("click number k=" + std::to_string(k) + " outside 0..N=" + std::to_string(n));
    }
    PhaseSpaceMixture out;
    out.dropped = p.dropped;
    if (eta_eff == 0.0) {
        // factor is 1 for k = 0 and vanishes identically otherwise
        if (k == 0) {
            out.gaussians = p.gaussians;
            out.deltas = p.deltas;
        }
        return out;
    }

    std::vector<double> weight(static_cast<std::size_t>(k + 1));
    std::vector<double> rate(static_cast<std::size_t>(k + 1));
    for (int j = 0; j <= k; ++j) {
        const double sign = (k - j) % 2 == 0 ? 1.0 : -1.0;
        weight[static_cast<std::size_t>(j)] = sign * binomial(n, k) * binomial(k, j);
        rate[static_cast<std::size_t>(j)] = eta_eff * (1.0 - static_cast<double>(j) / n);
    }

    out.gaussians.reserve(p.gaussians.size() * weight.size());
    for (const GaussianTerm& g : p.gaussians) {
        for (int j = 0; j <= k; ++j) {
            const double b = rate[static_cast<std::size_t>(j)];
            const double a = g.a + b;
            // exp(-a0|x-z|^2) exp(-b|x|^2) = exp(-a|x - a0 z/a|^2) exp(-a0 b |z|^2 / a)
            out.gaussians.push_back(
                {weight[static_cast<std::size_t>(j)] * g.c * std::exp(-g.a * b / a * std::norm(g.z)), g.a * g.z / a, a});
        }
    }
    out.deltas.reserve(p.deltas.size() * weight.size());
    for (const DeltaTerm& d : p.deltas) {
        for (int j = 0; j <= k; ++j) {
            out.deltas.push_back(
                {weight[static_cast<std::size_t>(j)] * d.c * std::exp(-rate[static_cast<std::size_t>(j)] * std::norm(d.z)), d.z});
        }
    }
    return out;
}

PhaseSpaceMixture to_normal_form(const PhaseSpaceMixture& p) {
    PhaseSpaceMixture f;
    f.dropped = p.dropped;
    f.gaussians.reserve(p.size());
    for (const GaussianTerm& g : p.gaussians) {
        f.gaussians.push_back({g.c * pi / (g.a + 1.0), g.z, g.a / (g.a + 1.0)});
    }
    for (const DeltaTerm& d : p.deltas) {
        f.gaussians.push_back({d.c, d.z, 1.0});
    }
    return f;
}

PhaseSpaceMixture from_normal_form(const PhaseSpaceMixture& f) {
    if (!f.deltas.empty()) {
        throw ValidationError("a normally ordered symbol cannot contain delta terms");
    }
    constexpr double singular_tol = 1e-12;
    PhaseSpaceMixture p;
    p.dropped = f.dropped;
    for (const GaussianTerm& g : f.gaussians) {
        const double gap = 1.0 - g.a;
        if (gap < -singular_tol) {
            throw ValidationError("normally ordered Gaussian with exponent " + std::to_string(g.a) +
                                  " > 1 has no P function");
        }
        if (std::abs(gap) <= singular_tol) {
            p.deltas.push_back({g.c, g.z});
            continue;
        }
        p.gaussians.push_back({g.c / (pi * gap), g.z, g.a / gap});
    }
    return p;
}

PhaseSpaceMixture prune(const PhaseSpaceMixture& p, double rel_tol) {
    double scale = 0.0;
    for (const GaussianTerm& g : p.gaussians) {
        scale += std::abs(g.integral());
    }
    for (const DeltaTerm& d : p.deltas) {
        scale += std::abs(d.c);
    }
    const double threshold = rel_tol * scale;
    PhaseSpaceMixture out;
    out.dropped = p.dropped;
    for (const GaussianTerm& g : p.gaussians) {
        if (std::abs(g.integral()) < threshold) {
            out.dropped += std::abs(g.integral());
        } else {
            out.gaussians.push_back(g);
        }
    }
    for (const DeltaTerm& d : p.deltas) {
        if (std::abs(d.c) < threshold) {
            out.dropped += std::abs(d.c);
        } else {
            out.deltas.push_back(d);
        }
    }
    return out;
}

double integral(const PhaseSpaceMixture& p) {
    CompensatedSum sum;
    for (const GaussianTerm& g : p.gaussians) {
        sum += g.integral();
    }
    for (const DeltaTerm& d : p.deltas) {
        sum += d.c;
    }
    return sum.value();
}

complex moment(const PhaseSpaceMixture& p, int order_dag, int order_a) {
    if (order_dag < 0 || order_a < 0) {
        throw ValidationError("moment orders must be non-negative");
    }
    if (order_dag + order_a > 6) {
        throw ValidationError("closed-form moments are provided up to total order 6");
    }
    auto ipow = [](complex z, int e) {
        complex r = 1.0;
        for (int i = 0; i < e; ++i) {
            r *= z;
        }
        return r;
    };
    complex sum = 0.0;
    for (const GaussianTerm& g : p.gaussians) {
        // alpha = z + w with E[conj(w)^i w^j] = delta_ij i! / a^i under the normalized Gaussian
        complex inner = 0.0;
        double factorial = 1.0;
        for (int i = 0; i <= std::min(order_dag, order_a); ++i) {
            if (i > 0) {
                factorial *= i;
            }
            inner += binomial(order_dag, i) * binomial(order_a, i) * factorial / std::pow(g.a, i) *
                     ipow(std::conj(g.z), order_dag - i) * ipow(g.z, order_a - i);
        }
        sum += g.integral() * inner;
    }
    for (const DeltaTerm& d : p.deltas) {
        sum += d.c * ipow(std::conj(d.z), order_dag) * ipow(d.z, order_a);
    }
    return sum;
}

void GridSpec::validate() const {
    if (n_re < 1 || n_im < 1) {
        throw ValidationError("grid needs at least one cell in each direction");
    }
    if (!std::isfinite(re_min) || !std::isfinite(re_max) || !std::isfinite(im_min) || !std::isfinite(im_max) ||
        !(re_max >= re_min) || !(im_max >= im_min)) {
        throw ValidationError("grid bounds must be finite and ordered");
    }
}

double GridSpec::re(int i) const {
    return re_min + (i + 0.5) * (re_max - re_min) / n_re;
}

double GridSpec::im(int j) const {
    return im_min + (j + 0.5) * (im_max - im_min) / n_im;
}

namespace {

unsigned thread_count() {
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CLICKCRAFT_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) {
            threads = std::min(threads, static_cast<unsigned>(cap));
        }
    }
    return threads;
}

} // namespace

Grid evaluate_grid(const PhaseSpaceMixture& p, const GridSpec& spec) {
    spec.validate();
    Grid grid{spec, std::vector<double>(static_cast<std::size_t>(spec.n_re) * spec.n_im), p.deltas};

    const unsigned threads = std::min<unsigned>(thread_count(), static_cast<unsigned>(spec.n_im));
    auto rows = [&](unsigned first) {
        for (int j = static_cast<int>(first); j < spec.n_im; j += static_cast<int>(threads)) {
            const double im = spec.im(j);
            for (int i = 0; i < spec.n_re; ++i) {
                grid.values[static_cast<std::size_t>(j) * spec.n_re + i] = p(complex(spec.re(i), im));
            }
        }
    };
    if (threads <= 1) {
        rows(0);
        return grid;
    }
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back(rows, t);
    }
    for (auto& th : pool) {
        th.join();
    }
    return grid;
}

} // namespace clickcraft
