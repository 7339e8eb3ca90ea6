// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>

#include "clickcraft/dsymbol.hpp"
#include "clickcraft/dsymbol_exact.hpp"
#include "clickcraft/fock.hpp"
#include "clickcraft/povm.hpp"
#include "clickcraft/processes.hpp"

using namespace clickcraft;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// Reference probability table, percent; rows k1, columns k2.
constexpr std::array<std::array<double, 5>, 5> reference_table = {{
    {16.80, 8.83, 2.47, 0.39, 0.03},
    {8.46, 12.38, 6.85, 1.88, 0.22},
    {3.17, 8.24, 7.90, 3.54, 0.65},
    {0.81, 3.32, 4.99, 3.48, 0.99},
    {0.11, 0.67, 1.52, 1.60, 0.70},
}};

AmplifySpec table_spec() {
    return {AdditionSpec{SqueezerConfig::from_mu(1.5), DetectorConfig{4, 0.5}, 0},
            SubtractionSpec{BeamSplitterConfig{2.0 / 3.0}, DetectorConfig{4, 0.5}, 0}};
}

// max |computed - printed| in percentage points, and the number of cells above tol
std::pair<double, int> compare_table(const Eigen::MatrixXd& table, double tol) {
    double worst = 0.0;
    int off = 0;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            const double d = std::abs(100.0 * table(i, j) - reference_table[i][j]);
            worst = std::max(worst, d);
            off += d > tol ? 1 : 0;
        }
    }
    return {worst, off};
}

Verdict table_reproduction() {
    const Eigen::MatrixXd table = probability_table(table_spec(), std::sqrt(0.5));
    const auto [worst, off] = compare_table(table, 0.005);
    const Eigen::MatrixXd alt = probability_table(table_spec(), std::sqrt(2.0));
    const auto [alt_worst, alt_off] = compare_table(alt, 0.005);
    return {off == 0,
            "beta=1/sqrt2: " + std::to_string(off) + "/25 cells off, max dev " + fmt("%.4f", worst) +
                " pp, (0,0)=" + fmt("%.2f%%", 100 * table(0, 0)) + "; info only, beta=sqrt2: " +
                std::to_string(alt_off) + "/25 off, max dev " + fmt("%.4f", alt_worst) + " pp"};
}

Verdict povm_completeness() {
    double worst = 0.0;
    for (int n : {1, 4, 16, 64}) {
        for (double eta : {0.25, 0.5, 0.8, 0.95, 1.0}) {
            const auto povm = click_povm({n, eta}, 257);
            for (int m = 0; m <= 256; ++m) {
                double sum = 0.0;
                for (const auto& el : povm) {
                    sum += el.weights[static_cast<std::size_t>(m)];
                }
                worst = std::max(worst, std::abs(sum - 1.0));
            }
        }
    }
    return {worst < 1e-10, "max |sum_k Pi_k - 1| = " + fmt("%.3g", worst)};
}

Verdict dsymbol_agreement() {
    double worst_rel = 0.0;
    double worst_abs_small = 0.0;
    int checked = 0;
    int failures = 0;
    for (int n : {1, 4, 16, 64}) {
        for (auto [num, den] : {std::pair{1, 4}, {1, 2}, {4, 5}, {19, 20}}) {
            const double eta = static_cast<double>(num) / den;
            // exact rational of the very double the float paths see
            const ExactDSymbolParams exact_params{n, 1 - mpq_class(eta), mpq_class(eta)};
            const DSymbolParams params = click_params(n, eta);
            const int kmax = std::min(n, 16);
            const DSymbolTable table = d_recursive(params, kmax, 128);
            for (int k = 0; k <= kmax; ++k) {
                for (int m = 0; m <= 128; ++m) {
                    const double exact = d_exact(exact_params, k, m).get_d();
                    for (double value : {table(k, m), d_direct(params, k, m)}) {
                        ++checked;
                        const double err = std::abs(value - exact);
                        const double rel = exact != 0.0 ? err / std::abs(exact) : (err == 0.0 ? 0.0 : INFINITY);
                        if (rel < 1e-9) {
                            worst_rel = std::max(worst_rel, rel);
                        } else if (err < 1e-12) {
                            worst_abs_small = std::max(worst_abs_small, err);
                        } else {
                            ++failures;
                        }
                    }
                }
            }
        }
    }
    return {failures == 0, std::to_string(checked) + " comparisons, " + std::to_string(failures) +
                               " failures, max rel err " + fmt("%.3g", worst_rel) +
                               ", max abs err on near-zero values " + fmt("%.3g", worst_abs_small)};
}

double rel_diff(complex a, complex b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale > 1e-12 ? std::abs(a - b) / scale : std::abs(a - b) / 1e-12;
}

// normalized moments of order <= 4 and the probability, mixture vs Fock oracle
void compare_outcome(const MixtureOutcome& mix, const ProcessOutcome<DensityMatrix>& fock, double& moment_err,
                     double& prob_err) {
    prob_err = std::max(prob_err, std::abs(mix.probability - fock.probability));
    for (int p = 0; p <= 4; ++p) {
        for (int q = 0; p + q <= 4; ++q) {
            const complex a = moment(mix.state, p, q) / mix.probability;
            const complex b = normally_ordered_moment(fock.state, p, q).value / fock.probability;
            moment_err = std::max(moment_err, rel_diff(a, b));
        }
    }
}

Verdict oracle_equivalence() {
    const double nbar = 0.5;
    const int d = 32;
    const int ancilla = 32;
    const DensityMatrix input = make_state(states::Thermal{nbar}, d, 1e-14);
    double moment_err = 0.0;
    double prob_err = 0.0;
    for (int k = 0; k <= 3; ++k) {
        const SubtractionSpec sub{BeamSplitterConfig{0.7}, DetectorConfig{16, 0.8}, k};
        compare_outcome(subtract(PhaseSpaceMixture::thermal(nbar), sub), fock_subtract(input, sub.bs, sub.det, k),
                        moment_err, prob_err);
        const AdditionSpec add_spec{SqueezerConfig::from_mu(1.4), DetectorConfig{16, 0.8}, k};
        compare_outcome(add(PhaseSpaceMixture::thermal(nbar), add_spec),
                        fock_add(input, add_spec.sq, add_spec.det, k, ancilla), moment_err, prob_err);
    }
    return {moment_err < 1e-6 && prob_err < 1e-7, "cutoff " + std::to_string(d + ancilla) + ", max moment rel err " +
                                                      fmt("%.3g", moment_err) + ", max probability err " +
                                                      fmt("%.3g", prob_err)};
}

Verdict sigma2_closed_form() {
    double worst = 0.0;
    const complex beta(0.6, -0.35);
    for (double mu : {1.05, 1.2, 1.4, 1.5, 2.0}) {
        for (double eta : {0.1, 0.3, 0.5, 0.8, 0.95}) {
            const AdditionSpec spec{SqueezerConfig::from_mu(mu), DetectorConfig{8, eta}, 0};
            const MixtureOutcome out = add(PhaseSpaceMixture::coherent(beta), spec);
            const complex mean = moment(out.state, 0, 1) / out.probability;
            const double var = (moment(out.state, 1, 1) / out.probability).real() - std::norm(mean);
            worst = std::max(worst, std::abs(var - effective_sigma2(spec.sq, eta)));
        }
    }
    return {worst < 1e-10, "25 (mu, eta) points, max |var - sigma^2| = " + fmt("%.3g", worst)};
}

Verdict displaced_thermal_normalizations() {
    double integral_err = 0.0;
    double fock_err = 0.0;
    for (complex alpha0 : {complex(0.0), complex(0.8, 0.3)}) {
        for (double nbar : {0.0, 0.5, 2.0}) {
            const SingleModeState state = states::DisplacedThermal{alpha0, nbar};
            const DensityMatrix rho = make_state(state, suggest_cutoff(state, 1e-13), 1e-13);
            const PhaseSpaceMixture p = PhaseSpaceMixture::displaced_thermal(alpha0, nbar);
            const SqueezerConfig sq = SqueezerConfig::from_mu(1.4);
            const int ancilla = suggest_squeezer_cutoff(std::norm(alpha0) + nbar, sq, 1e-12);
            for (int k = 0; k <= 3; ++k) {
                const SubtractionSpec sub{BeamSplitterConfig{0.7}, DetectorConfig{16, 0.8}, k};
                const double ps = probability_subtraction_displaced_thermal(alpha0, nbar, sub);
                integral_err = std::max(integral_err, std::abs(ps - subtract(p, sub).probability));
                fock_err = std::max(fock_err, std::abs(ps - fock_subtract(rho, sub.bs, sub.det, k).probability));

                const AdditionSpec add_spec{sq, DetectorConfig{16, 0.8}, k};
                const double pa = probability_addition_displaced_thermal(alpha0, nbar, add_spec);
                integral_err = std::max(integral_err, std::abs(pa - add(p, add_spec).probability));
                fock_err = std::max(fock_err, std::abs(pa - fock_add(rho, sq, add_spec.det, k, ancilla).probability));
            }
        }
    }
    return {integral_err < 1e-10 && fock_err < 1e-7,
            "max |closed - integral| = " + fmt("%.3g", integral_err) + ", max |closed - Fock trace| = " + fmt("%.3g", fock_err)};
}

Verdict operator_norm_convergence() {
    std::string ladder;
    bool decreasing = true;
    double first = 0.0;
    double prev = INFINITY;
    double last = 0.0;
    for (int n : {2, 4, 8, 16, 32, 64}) {
        const double v = operator_norm_distance({n, 0.5}, 1, 2048).value;
        if (n == 2) {
            first = v;
        }
        decreasing = decreasing && v < prev;
        prev = v;
        last = v;
        ladder += (ladder.empty() ? "" : " ") + fmt("%.4g", v);
    }
    bool projector = true;
    for (int k = 0; k <= 12; ++k) {
        const auto el = photoelectric_element(1.0, k, 64);
        for (int m = 0; m < 64; ++m) {
            projector = projector && el.weights[static_cast<std::size_t>(m)] == (m == k ? 1.0 : 0.0);
        }
    }
    return {decreasing && last < 0.25 * first && projector,
            "distance ladder " + ladder + "; ratio N=64/N=2 " + fmt("%.3f", last / first) +
                (projector ? "; eta=1 elements are exact projectors" : "; eta=1 elements NOT exact projectors")};
}

Verdict heralding_limit() {
    const HeraldedDistribution h = herald_tmsv_distribution(0.25, {64, 0.95}, 1);
    const auto peak = std::max_element(h.normalized.begin(), h.normalized.end()) - h.normalized.begin();
    const double f1 = herald_tmsv_distribution(0.25, {1024, 1.0}, 1).normalized[1];
    const double f2 = herald_tmsv_distribution(0.25, {1024, 1.0 - 1e-6}, 1).normalized[1];
    return {peak == 1 && f1 > 0.99 && f2 > 0.99, "N=64 peak at n=" + std::to_string(peak) +
                                                     "; N=1024 fidelity with |1>: " + fmt("%.6f", f1) +
                                                     " (eta=1), " + fmt("%.6f", f2) + " (eta=1-1e-6)"};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict determinism() {
    std::string cli = CLICKCRAFT_CLI_PATH;
    if (const char* env = std::getenv("CLICKCRAFT_CLI_PATH")) {
        cli = env;
    }
    const std::string config = std::string(CLICKCRAFT_CONFIG_DIR) + "/table1.json";
    const auto base = std::filesystem::temp_directory_path() / "clickcraft_acceptance_determinism";
    std::filesystem::remove_all(base);
    std::vector<std::filesystem::path> dirs = {base / "run1", base / "run2"};
    for (const auto& dir : dirs) {
        const std::string cmd = "\"" + cli + "\" amplify --config \"" + config + "\" --out \"" + dir.string() + "\" --manifest";
        if (std::system(cmd.c_str()) != 0) {
            return {false, "CLI run failed: " + cmd};
        }
    }
    int files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
        const auto name = entry.path().filename();
        if (slurp(entry.path()) != slurp(dirs[1] / name) || slurp(entry.path()).empty()) {
            return {false, name.string() + " differs between runs"};
        }
        ++files;
    }
    std::filesystem::remove_all(base);
    return {files >= 2, std::to_string(files) + " output files byte-identical across two runs"};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s; // 0: no runtime bound
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "Reference (k1,k2) probability table", 10, table_reproduction},
        {2, "POVM completeness", 5, povm_completeness},
        {3, "D-symbol triple agreement", 30, dsymbol_agreement},
        {4, "Oracle equivalence", 120, oracle_equivalence},
        {5, "sigma^2 closed form", 0, sigma2_closed_form},
        {6, "Displaced-thermal normalizations", 0, displaced_thermal_normalizations},
        {7, "Operator-norm convergence", 0, operator_norm_convergence},
        {8, "Heralding limit", 0, heralding_limit},
        {9, "Determinism", 0, determinism},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.limit_s > 0 && secs > c.limit_s) {
            v.pass = false;
            v.detail += "; runtime over " + fmt("%.0f s", c.limit_s);
        }
        failed += v.pass ? 0 : 1;
        std::printf("[%s] %d %s (%.2f s): %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, secs, v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
