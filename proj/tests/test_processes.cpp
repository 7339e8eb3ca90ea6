#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "clickcraft/dsymbol.hpp"
#include "clickcraft/error.hpp"
#include "clickcraft/numeric.hpp"
#include "clickcraft/processes.hpp"

using namespace clickcraft;

namespace {

const SubtractionSpec thermal_sub{BeamSplitterConfig{0.7}, DetectorConfig{16, 0.8}, 0};
const AdditionSpec thermal_add{SqueezerConfig::from_mu(1.4), DetectorConfig{16, 0.8}, 0};

AmplifySpec amp_spec(int k1, int k2) {
    return {AdditionSpec{SqueezerConfig::from_mu(1.5), DetectorConfig{4, 0.5}, k1},
            SubtractionSpec{BeamSplitterConfig{2.0 / 3.0}, DetectorConfig{4, 0.5}, k2}};
}

// every normally ordered moment with p + q <= 4, relative to the largest one
void check_moments(const PhaseSpaceMixture& mix, const DensityMatrix& rho, double tol) {
    double scale = 0.0;
    for (int p = 0; p <= 4; ++p) {
        for (int q = 0; p + q <= 4; ++q) {
            scale = std::max(scale, std::abs(moment(mix, p, q)));
        }
    }
    for (int p = 0; p <= 4; ++p) {
        for (int q = 0; p + q <= 4; ++q) {
            const Moment ref = normally_ordered_moment(rho, p, q);
            CHECK(ref.converged(1e-9));
            CHECK(std::abs(moment(mix, p, q) - ref.value) <= tol * scale);
        }
    }
}

// sum of |c| pi/a: the cancellation scale behind integral()
double absolute_integral(const PhaseSpaceMixture& p) {
    double sum = 0.0;
    for (const GaussianTerm& g : p.gaussians) {
        sum += std::abs(g.integral());
    }
    for (const DeltaTerm& d : p.deltas) {
        sum += std::abs(d.c);
    }
    return sum;
}

} // namespace

TEST_CASE("TMSV heralding") {
    const DetectorConfig det{64, 0.95};
    const auto zero = herald_tmsv_distribution(0.25, det, 0);
    for (int n = 1; n < 10; ++n) {
        CHECK(zero.normalized[static_cast<std::size_t>(n)] / zero.normalized[static_cast<std::size_t>(n - 1)] ==
              doctest::Approx(0.25 * 0.05).epsilon(1e-10));
    }

    for (int k : {1, 4, 16}) {
        const auto dist = herald_tmsv_distribution(0.25, det, k);
        const auto peak = std::max_element(dist.normalized.begin(), dist.normalized.end()) - dist.normalized.begin();
        CHECK(peak == k);
        // same numbers from the Fock oracle
        const int d = 40;
        const auto fock = herald(make_phase_diffused_tmsv(0.25, d), det, k);
        CHECK(std::abs(fock.probability - dist.probability) < 1e-10);
        const int common = std::min<int>(d, static_cast<int>(dist.unnormalized.size()));
        for (int n = 0; n < common; ++n) {
            CHECK(std::abs(fock.state(n, n).real() - dist.unnormalized[static_cast<std::size_t>(n)]) < 1e-10);
        }
    }

    double total = 0.0;
    for (int k = 0; k <= 64; ++k) {
        total += herald_tmsv_distribution(0.25, det, k).probability;
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
    CHECK_THROWS_AS(herald_tmsv_distribution(0.25, det, 65), ValidationError);
    CHECK_THROWS_AS(herald_tmsv_distribution(1.0, det, 1), ValidationError);
}

TEST_CASE("heralded single photon fidelity grows along the N ladder at eta = 1") {
    double prev = 0.0;
    for (int n : {2, 4, 8, 16, 32, 64}) {
        const auto dist = herald_tmsv_distribution(0.25, {n, 1.0}, 1);
        CHECK(dist.normalized[1] > prev);
        prev = dist.normalized[1];
    }
    CHECK(prev > 0.99);
}

TEST_CASE("subtraction examples") {
    const complex beta(0.9, 0.4);
    SubtractionSpec spec = thermal_sub;
    const auto out = subtract(PhaseSpaceMixture::coherent(beta), spec);
    REQUIRE(out.state.deltas.size() == 1);
    CHECK(std::abs(out.state.deltas[0].z - 0.7 * beta) < 1e-15);
    CHECK(out.probability == doctest::Approx(std::exp(-0.8 * 0.51 * std::norm(beta))).epsilon(1e-14));

    const auto vac = PhaseSpaceMixture::coherent(0.0);
    for (int k = 0; k <= 16; ++k) {
        spec.k = k;
        CHECK(subtract(vac, spec).probability == (k == 0 ? 1.0 : 0.0));
    }

    // thermal input: the output is the click factor times a thermal state of t^2 nbar
    const PhaseSpaceMixture lossy = PhaseSpaceMixture::thermal(0.49 * 0.5);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k <= 3; ++k) {
        spec.k = k;
        const auto th = subtract(PhaseSpaceMixture::thermal(0.5), spec);
        for (int i = 0; i < 100; ++i) {
            const complex alpha(u(rng), u(rng));
            const double x = spec.eta_eff() * std::norm(alpha) / 16;
            const double factor = binomial(16, k) * std::exp(-x * (16 - k)) * std::pow(-std::expm1(-x), k);
            CHECK(std::abs(th.state(alpha) - factor * lossy(alpha)) <= 1e-12 * th.state.magnitude(alpha) + 1e-300);
        }
    }
    CHECK_THROWS_AS(subtract(vac, {BeamSplitterConfig{1.0}, DetectorConfig{4, 0.5}, 0}), ValidationError);
}

TEST_CASE("addition examples") {
    const auto out = add(PhaseSpaceMixture::coherent(complex(0.3, -0.2)), thermal_add);
    REQUIRE(out.state.gaussians.size() == 1);
    const double mean = std::norm(moment(out.state, 0, 1) / out.probability);
    const double var = (moment(out.state, 1, 1) / out.probability).real() - mean;
    CHECK(var == doctest::Approx(effective_sigma2(thermal_add.sq, 0.8)).epsilon(1e-12));
    CHECK_THROWS_AS(add(PhaseSpaceMixture::coherent(0.0), {SqueezerConfig{0.0}, DetectorConfig{4, 0.5}, 0}),
                    ValidationError);
}

TEST_CASE("addition output on a thermal input oscillates radially") {
    AdditionSpec spec = thermal_add;
    int previous = -1;
    for (int k = 1; k <= 3; ++k) {
        spec.k = k;
        const auto out = add(PhaseSpaceMixture::thermal(0.5), spec);
        int changes = 0;
        double last = out.state(0.0);
        for (int i = 1; i <= 4000; ++i) {
            const double v = out.state(complex(i * 0.002, 0.0));
            if (std::abs(v) < 1e-14 * out.state.magnitude(complex(i * 0.002, 0.0))) {
                continue;
            }
            if ((v < 0) != (last < 0)) {
                ++changes;
            }
            last = v;
        }
        CHECK(changes > previous);
        previous = changes;
    }
}

TEST_CASE("probability partition") {
    const std::vector<PhaseSpaceMixture> inputs = {PhaseSpaceMixture::coherent(complex(0.8, 0.3)),
                                                   PhaseSpaceMixture::thermal(0.5),
                                                   PhaseSpaceMixture::displaced_thermal(complex(0.8, 0.3), 2.0)};
    for (const auto& in : inputs) {
        SubtractionSpec s = thermal_sub;
        AdditionSpec a = thermal_add;
        double ts = 0.0;
        double ta = 0.0;
        for (int k = 0; k <= 16; ++k) {
            s.k = k;
            a.k = k;
            ts += subtract(in, s).probability;
            ta += add(in, a).probability;
        }
        CHECK(std::abs(ts - 1.0) < 1e-9);
        CHECK(std::abs(ta - 1.0) < 1e-9);
    }
}

TEST_CASE("moment bridge to the Fock oracle") {
    const int d = 40;
    const complex alpha0(0.4, 0.2);
    for (int k = 0; k <= 3; ++k) {
        SubtractionSpec s = thermal_sub;
        s.k = k;
        const auto mix = subtract(PhaseSpaceMixture::displaced_thermal(alpha0, 0.5), s);
        const auto fock = fock_subtract(make_state(states::DisplacedThermal{alpha0, 0.5}, d, 1e-14), s.bs, s.det, k);
        CHECK(std::abs(mix.probability - fock.probability) < 1e-9);
        check_moments(mix.state, fock.state, 1e-7);

        AdditionSpec a = thermal_add;
        a.k = k;
        const auto amix = add(PhaseSpaceMixture::displaced_thermal(alpha0, 0.5), a);
        const auto afock = fock_add(make_state(states::DisplacedThermal{alpha0, 0.5}, d, 1e-14), a.sq, a.det, k, 48);
        CHECK(std::abs(amix.probability - afock.probability) < 1e-9);
        check_moments(amix.state, afock.state, 1e-7);
    }
}

TEST_CASE("amplify: composition against the Fock oracle") {
    for (auto [k1, k2] : {std::pair{0, 0}, {1, 1}, {2, 0}}) {
        const AmplifySpec spec = amp_spec(k1, k2);
        const complex beta(0.5, 0.3);
        const auto mix = amplify(beta, spec);
        const auto added = fock_add(make_state(states::Coherent{beta}, 24, 1e-14), spec.add.sq, spec.add.det, k1, 48);
        const auto out = fock_subtract(added.state, spec.sub.bs, spec.sub.det, k2);
        CHECK(std::abs(mix.probability - out.probability) < 1e-9);
        check_moments(mix.state, out.state, 1e-7);
    }
}

TEST_CASE("amplify: composition and closed form agree pointwise") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const complex beta(std::sqrt(0.5), 0.0);
    for (int k1 = 0; k1 <= 4; ++k1) {
        for (int k2 = 0; k2 <= 4; ++k2) {
            const AmplifySpec spec = amp_spec(k1, k2);
            const auto a = amplify(beta, spec);
            const auto b = amplify_closed_form(beta, spec);
            CHECK(std::abs(a.probability - b.probability) < 1e-12);
            for (int i = 0; i < 1000; ++i) {
                const complex alpha(u(rng), u(rng));
                const double scale = std::max(a.state.magnitude(alpha), 1e-300);
                CHECK(std::abs(a.state(alpha) - b.state(alpha)) <= 1e-8 * scale);
            }
        }
    }
    CHECK_THROWS_AS(amplify(beta, {AdditionSpec{SqueezerConfig::from_mu(1.5), DetectorConfig{4, 1.0}, 0},
                                   SubtractionSpec{BeamSplitterConfig{0.5}, DetectorConfig{4, 0.5}, 0}}),
                    ValidationError);
}

TEST_CASE("sigma^2 closed form") {
    CHECK(effective_sigma2(SqueezerConfig::from_mu(1.4), 1.0) == 0.0);
    CHECK(effective_sigma2(SqueezerConfig::from_mu(1.4), 0.0) == doctest::Approx(0.96).epsilon(1e-14));
    CHECK(effective_sigma2(SqueezerConfig::from_mu(1.4), 0.8) == doctest::Approx(0.96 * 0.2 / 1.768).epsilon(1e-14));
    CHECK(effective_sigma2(SqueezerConfig::from_mu(1.4), 0.8) == doctest::Approx(0.108597).epsilon(1e-6));

    const SqueezerConfig sq = squeezer_for_sigma2(0.3, 0.4);
    CHECK(effective_sigma2(sq, 0.4) == doctest::Approx(0.3).epsilon(1e-13));
    CHECK_THROWS_AS(effective_sigma2(sq, 1.2), ValidationError);
}

TEST_CASE("displaced-thermal probabilities") {
    for (complex alpha0 : {complex(0.0), complex(0.8, 0.3)}) {
        for (double nbar : {0.0, 0.5, 2.0}) {
            SubtractionSpec s = thermal_sub;
            AdditionSpec a = thermal_add;
            double ta = 0.0;
            for (int k = 0; k <= 16; ++k) {
                s.k = k;
                a.k = k;
                const auto in = PhaseSpaceMixture::displaced_thermal(alpha0, nbar);
                // the mixture integral inherits the alternating-sum cancellation at large k
                const auto sub = subtract(in, s);
                CHECK(std::abs(probability_subtraction_displaced_thermal(alpha0, nbar, s) - sub.probability) <
                      1e-10 + 1e-15 * absolute_integral(sub.state));
                const double pa = probability_addition_displaced_thermal(alpha0, nbar, a);
                const auto added = add(in, a);
                CHECK(std::abs(pa - added.probability) < 1e-10 + 1e-15 * absolute_integral(added.state));
                ta += pa;
            }
            CHECK(std::abs(ta - 1.0) < 1e-10);
        }
    }
    SubtractionSpec s = thermal_sub;
    CHECK(probability_subtraction_displaced_thermal(0.0, 0.0, s) == 1.0);
    s.k = 2;
    CHECK(probability_subtraction_displaced_thermal(0.0, 0.0, s) == doctest::Approx(0.0).epsilon(1e-15));

    // squeezed vacuum idler: the k-click probability of a thermal state with nbar = nu^2
    AdditionSpec a = thermal_add;
    a.k = 2;
    const double nu2 = a.sq.nu() * a.sq.nu();
    const DSymbolTable table = d_recursive(click_params(16, 0.8), 2, 400);
    double ref = 0.0;
    for (int m = 0; m <= 400; ++m) {
        ref += std::pow(nu2 / (1 + nu2), m) / (1 + nu2) * table(2, m);
    }
    CHECK(probability_addition_displaced_thermal(0.0, 0.0, a) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("probability table") {
    const AmplifySpec spec = amp_spec(0, 0);
    const complex beta(std::sqrt(0.5), 0.0);
    const Eigen::MatrixXd table = probability_table(spec, beta);
    CHECK(table.rows() == 5);
    CHECK(table.cols() == 5);
    CHECK(std::abs(table.sum() - 1.0) < 1e-12);
    for (int k1 = 0; k1 <= 4; ++k1) {
        AdditionSpec a = spec.add;
        a.k = k1;
        // marginal over k2 is the addition-only probability
        CHECK(std::abs(table.row(k1).sum() - probability_addition_displaced_thermal(beta, 0.0, a)) < 1e-12);
    }
    const Eigen::MatrixXd rotated = probability_table(spec, std::polar(std::abs(beta), 1.1));
    CHECK((rotated - table).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("structural duality") {
    // both pipelines reduce to the same click-factor map with their own eta'
    const PhaseSpaceMixture in = PhaseSpaceMixture::displaced_thermal(complex(0.2, 0.1), 0.4);
    SubtractionSpec s = thermal_sub;
    s.k = 2;
    const auto viaspec = subtract(in, s);
    CHECK(s.eta_eff() == doctest::Approx(0.8 * 0.51 / 0.49).epsilon(1e-14));
    const auto direct = prune(multiply_click_factor(scale_loss(in, s.bs.t), s.eta_eff(), 16, 2));
    CHECK(viaspec.probability == integral(direct));

    AdditionSpec a = thermal_add;
    a.k = 2;
    const double mu2 = 1.96;
    CHECK(a.eta_eff() == doctest::Approx(0.8 * (mu2 - 1) / mu2).epsilon(1e-14));
    const auto added = add(in, a);
    const auto manual =
        prune(from_normal_form(multiply_click_factor(to_normal_form(convolve_noise(in, a.sq.mu())), a.eta_eff(), 16, 2)));
    CHECK(added.probability == integral(manual));
}

TEST_CASE("normalize") {
    SubtractionSpec s = thermal_sub;
    s.k = 1;
    const auto out = normalize(subtract(PhaseSpaceMixture::thermal(0.5), s));
    CHECK(integral(out.state) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(normalize(MixtureOutcome{PhaseSpaceMixture{}, 0.0}), NumericalError);
}
