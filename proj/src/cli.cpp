#include "clickcraft/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string_view>

#include "clickcraft/error.hpp"
#include "clickcraft/fock.hpp"
#include "clickcraft/povm.hpp"
#include "clickcraft/processes.hpp"
#include "clickcraft/version.hpp"

namespace clickcraft::cli {

using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// config access

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

void allow_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) {
        fail(where, "expected an object");
    }
    for (const auto& item : obj.items()) {
        if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
            fail(where, "unknown key \"" + item.key() + "\"");
        }
    }
}

const json& member(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.is_object() || !obj.contains(key)) {
        fail(where, "missing \"" + key + "\"");
    }
    return obj.at(key);
}

double as_number(const json& value, const std::string& where) {
    if (!value.is_number()) {
        fail(where, "expected a number");
    }
    return value.get<double>();
}

int as_int(const json& value, const std::string& where) {
    if (!value.is_number_integer()) {
        fail(where, "expected an integer");
    }
    return value.get<int>();
}

double number(const json& obj, const std::string& where, const std::string& key) {
    return as_number(member(obj, where, key), where + "." + key);
}

int integer(const json& obj, const std::string& where, const std::string& key) {
    return as_int(member(obj, where, key), where + "." + key);
}

// a number (real) or [re, im]
complex amplitude(const json& value, const std::string& where) {
    if (value.is_number()) {
        return {value.get<double>(), 0.0};
    }
    if (value.is_array() && value.size() == 2 && value[0].is_number() && value[1].is_number()) {
        return {value[0].get<double>(), value[1].get<double>()};
    }
    fail(where, "expected a number or [re, im]");
}

DetectorConfig detector(const json& obj, const std::string& where) {
    allow_keys(obj, where, {"N", "eta"});
    DetectorConfig det{integer(obj, where, "N"), number(obj, where, "eta")};
    det.validate();
    return det;
}

BeamSplitterConfig beam_splitter(const json& obj, const std::string& where) {
    allow_keys(obj, where, {"t"});
    BeamSplitterConfig bs{number(obj, where, "t")};
    bs.validate();
    return bs;
}

SqueezerConfig squeezer(const json& obj, const std::string& where) {
    allow_keys(obj, where, {"mu", "xi"});
    if (obj.contains("mu") == obj.contains("xi")) {
        fail(where, "give exactly one of \"mu\" and \"xi\"");
    }
    SqueezerConfig sq = obj.contains("mu") ? SqueezerConfig::from_mu(number(obj, where, "mu"))
                                           : SqueezerConfig{number(obj, where, "xi")};
    sq.validate();
    return sq;
}

PhaseSpaceMixture mixture(const json& in) {
    const std::string where = "input";
    const json& kind = member(in, where, "kind");
    if (!kind.is_string()) {
        fail(where + ".kind", "expected a string");
    }
    const std::string k = kind.get<std::string>();
    if (k == "vacuum") {
        allow_keys(in, where, {"kind"});
        return PhaseSpaceMixture::coherent(0.0);
    }
    if (k == "coherent") {
        allow_keys(in, where, {"kind", "alpha"});
        return PhaseSpaceMixture::coherent(amplitude(member(in, where, "alpha"), where + ".alpha"));
    }
    if (k == "thermal") {
        allow_keys(in, where, {"kind", "nbar"});
        return PhaseSpaceMixture::thermal(number(in, where, "nbar"));
    }
    if (k == "displaced_thermal") {
        allow_keys(in, where, {"kind", "alpha", "nbar"});
        return PhaseSpaceMixture::displaced_thermal(amplitude(member(in, where, "alpha"), where + ".alpha"),
                                                    number(in, where, "nbar"));
    }
    fail(where + ".kind", "\"" + k + "\" has no P-function input (vacuum, coherent, thermal, displaced_thermal)");
}

std::vector<double> photon_numbers(const json& in) {
    const std::string where = "input";
    const json& kind = member(in, where, "kind");
    if (!kind.is_string()) {
        fail(where + ".kind", "expected a string");
    }
    const std::string k = kind.get<std::string>();
    if (k == "photon_distribution") {
        allow_keys(in, where, {"kind", "p"});
        const json& p = member(in, where, "p");
        if (!p.is_array() || p.empty()) {
            fail(where + ".p", "expected a non-empty array");
        }
        std::vector<double> out;
        for (const json& v : p) {
            out.push_back(as_number(v, where + ".p"));
        }
        return out;
    }
    SingleModeState state;
    if (k == "vacuum") {
        allow_keys(in, where, {"kind"});
        state = states::Vacuum{};
    } else if (k == "coherent") {
        allow_keys(in, where, {"kind", "alpha"});
        state = states::Coherent{amplitude(member(in, where, "alpha"), where + ".alpha")};
    } else if (k == "thermal") {
        allow_keys(in, where, {"kind", "nbar"});
        state = states::Thermal{number(in, where, "nbar")};
    } else if (k == "displaced_thermal") {
        allow_keys(in, where, {"kind", "alpha", "nbar"});
        state = states::DisplacedThermal{amplitude(member(in, where, "alpha"), where + ".alpha"),
                                         number(in, where, "nbar")};
    } else if (k == "fock") {
        allow_keys(in, where, {"kind", "n"});
        state = states::Fock{integer(in, where, "n")};
    } else {
        fail(where + ".kind", "unknown state \"" + k + "\"");
    }
    constexpr double tol = 1e-14;
    return photon_distribution(make_state(state, suggest_cutoff(state, tol), tol));
}

// "all", an integer, or a list of integers
std::vector<int> click_list(const json& value, int n, const std::string& where) {
    std::vector<int> ks;
    if (value.is_string() && value.get<std::string>() == "all") {
        for (int k = 0; k <= n; ++k) {
            ks.push_back(k);
        }
    } else if (value.is_number_integer()) {
        ks.push_back(value.get<int>());
    } else if (value.is_array()) {
        for (const json& v : value) {
            ks.push_back(as_int(v, where));
        }
    } else {
        fail(where, "expected \"all\", an integer or a list of integers");
    }
    for (int k : ks) {
        if (k < 0 || k > n) {
            throw ValidationError(where + ": click number " + std::to_string(k) + " outside 0.." + std::to_string(n));
        }
    }
    return ks;
}

std::optional<GridSpec> grid_spec(const json& config, bool& normalize) {
    normalize = true;
    if (!config.contains("grid")) {
        return std::nullopt;
    }
    const json& g = config.at("grid");
    const std::string where = "grid";
    allow_keys(g, where, {"re", "im", "n", "normalize"});
    auto pair = [&](const std::string& key) {
        const json& v = member(g, where, key);
        if (!v.is_array() || v.size() != 2) {
            fail(where + "." + key, "expected a two-element array");
        }
        return v;
    };
    const json re = pair("re");
    const json im = pair("im");
    const json n = pair("n");
    GridSpec spec{as_number(re[0], "grid.re"), as_number(re[1], "grid.re"), as_number(im[0], "grid.im"),
                  as_number(im[1], "grid.im"),  as_int(n[0], "grid.n"),      as_int(n[1], "grid.n")};
    if (g.contains("normalize")) {
        if (!g.at("normalize").is_boolean()) {
            fail("grid.normalize", "expected a boolean");
        }
        normalize = g.at("normalize").get<bool>();
    }
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------
// output rendering

struct Cell {
    std::string text;
    bool quoted = false;
};

Cell num(double x) {
    return {format_double(x)};
}

Cell whole(long long x) {
    return {std::to_string(x)};
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

std::string quote(const std::string& s) {
    return json(s).dump();
}

std::string render(const Table& t, Format format) {
    std::ostringstream os;
    if (format == Format::csv) {
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            os << (i ? "," : "") << t.columns[i];
        }
        os << '\n';
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                os << (i ? "," : "") << row[i].text;
            }
            os << '\n';
        }
        return os.str();
    }
    os << "{\n  \"columns\": [";
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        os << (i ? ", " : "") << quote(t.columns[i]);
    }
    os << "],\n  \"rows\": [";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        os << (r ? ",\n" : "\n") << "    [";
        for (std::size_t i = 0; i < t.rows[r].size(); ++i) {
            const Cell& c = t.rows[r][i];
            os << (i ? ", " : "") << (c.quoted ? quote(c.text) : c.text);
        }
        os << "]";
    }
    os << (t.rows.empty() ? "]\n}\n" : "\n  ]\n}\n");
    return os.str();
}

std::string extension(Format f) {
    return f == Format::csv ? ".csv" : ".json";
}

void emit_grid(std::vector<OutputFile>& files, const std::string& stem, const MixtureOutcome& outcome,
               const GridSpec& spec, bool normalize, Format format) {
    const double scale = normalize && outcome.probability > 0.0 ? 1.0 / outcome.probability : 1.0;
    const Grid grid = evaluate_grid(outcome.state, spec);
    std::ostringstream os;
    if (format == Format::csv) {
        os << "re,im,value\n";
        for (int j = 0; j < spec.n_im; ++j) {
            for (int i = 0; i < spec.n_re; ++i) {
                os << format_double(spec.re(i)) << ',' << format_double(spec.im(j)) << ','
                   << format_double(grid.at(i, j) * scale) << '\n';
            }
        }
        files.push_back({stem + ".csv", os.str()});
        if (!grid.deltas.empty()) {
            Table deltas{{"c", "re", "im"}, {}};
            for (const DeltaTerm& d : grid.deltas) {
                deltas.rows.push_back({num(d.c * scale), num(d.z.real()), num(d.z.imag())});
            }
            files.push_back({stem + "_deltas.csv", render(deltas, format)});
        }
        return;
    }
    os << "{\n  \"grid\": {\"re_min\": " << format_double(spec.re_min) << ", \"re_max\": " << format_double(spec.re_max)
       << ", \"im_min\": " << format_double(spec.im_min) << ", \"im_max\": " << format_double(spec.im_max)
       << ", \"n_re\": " << spec.n_re << ", \"n_im\": " << spec.n_im << ", \"layout\": \"row-major, rows along im\"},\n"
       << "  \"normalized\": " << (normalize ? "true" : "false") << ",\n"
       << "  \"probability\": " << format_double(outcome.probability) << ",\n  \"values\": [";
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        os << (i ? (i % static_cast<std::size_t>(spec.n_re) == 0 ? ",\n    " : ", ") : "\n    ")
           << format_double(grid.values[i] * scale);
    }
    os << "\n  ],\n  \"deltas\": [";
    for (std::size_t i = 0; i < grid.deltas.size(); ++i) {
        const DeltaTerm& d = grid.deltas[i];
        os << (i ? ", " : "") << "{\"c\": " << format_double(d.c * scale) << ", \"re\": " << format_double(d.z.real())
           << ", \"im\": " << format_double(d.z.imag()) << "}";
    }
    os << "]\n}\n";
    files.push_back({stem + ".json", os.str()});
}

// ---------------------------------------------------------------------------
// protocols

struct Context {
    json& config;
    Format format;
    json derived = json::object();
    std::vector<OutputFile> files;
};

const std::set<std::string>& common_keys() {
    static const std::set<std::string> keys{"schema", "protocol", "description", "output"};
    return keys;
}

void check_top_level(const json& config, std::initializer_list<std::string_view> extra) {
    for (const auto& item : config.items()) {
        if (common_keys().count(item.key()) == 0 && std::find(extra.begin(), extra.end(), item.key()) == extra.end()) {
            fail("config", "unknown key \"" + item.key() + "\" for this protocol");
        }
    }
}

Table probability_rows(const std::vector<int>& ks, const std::vector<double>& probs) {
    Table t{{"k", "probability", "percent"}, {}};
    for (std::size_t i = 0; i < ks.size(); ++i) {
        t.rows.push_back({whole(ks[i]), num(probs[i]), {format_percent(probs[i])}});
    }
    return t;
}

void run_herald(Context& ctx) {
    json& cfg = ctx.config;
    check_top_level(cfg, {"input", "detector", "clicks"});
    const json& in = member(cfg, "config", "input");
    allow_keys(in, "input", {"kind", "omega"});
    if (member(in, "input", "kind") != "tmsv") {
        fail("input.kind", "herald takes a phase-diffused two-mode squeezed vacuum (\"tmsv\")");
    }
    const double omega = number(in, "input", "omega");
    const DetectorConfig det = detector(member(cfg, "config", "detector"), "detector");
    if (!cfg.contains("clicks")) {
        cfg["clicks"] = "all";
    }
    const std::vector<int> ks = click_list(cfg.at("clicks"), det.n, "clicks");

    Table dist{{"k", "n", "unnormalized", "normalized"}, {}};
    std::vector<double> probs;
    for (int k : ks) {
        const HeraldedDistribution h = herald_tmsv_distribution(omega, det, k);
        for (std::size_t n = 0; n < h.unnormalized.size(); ++n) {
            dist.rows.push_back({whole(k), whole(static_cast<long long>(n)), num(h.unnormalized[n]), num(h.normalized[n])});
        }
        probs.push_back(h.probability);
    }
    ctx.files.push_back({"distribution" + extension(ctx.format), render(dist, ctx.format)});
    ctx.files.push_back({"probabilities" + extension(ctx.format), render(probability_rows(ks, probs), ctx.format)});
}

template <class Spec, class Map>
void run_single(Context& ctx, Spec spec, Map map) {
    json& cfg = ctx.config;
    const PhaseSpaceMixture input = mixture(member(cfg, "config", "input"));
    spec.det = detector(member(cfg, "config", "detector"), "detector");
    if (!cfg.contains("clicks")) {
        cfg["clicks"] = "all";
    }
    const std::vector<int> ks = click_list(cfg.at("clicks"), spec.det.n, "clicks");
    bool normalize = true;
    const std::optional<GridSpec> grid = grid_spec(cfg, normalize);

    spec.k = 0;
    spec.validate();
    ctx.derived["eta_eff"] = spec.eta_eff();

    std::vector<double> probs;
    std::vector<OutputFile> grids;
    for (int k : ks) {
        spec.k = k;
        const MixtureOutcome out = map(input, spec);
        probs.push_back(out.probability);
        if (grid) {
            emit_grid(grids, "grid_k" + std::to_string(k), out, *grid, normalize, ctx.format);
        }
    }
    ctx.files.push_back({"probabilities" + extension(ctx.format), render(probability_rows(ks, probs), ctx.format)});
    ctx.files.insert(ctx.files.end(), grids.begin(), grids.end());
}

void run_subtract(Context& ctx) {
    check_top_level(ctx.config, {"input", "detector", "beam_splitter", "clicks", "grid"});
    SubtractionSpec spec;
    spec.bs = beam_splitter(member(ctx.config, "config", "beam_splitter"), "beam_splitter");
    ctx.derived["r"] = spec.bs.r();
    run_single(ctx, spec, [](const PhaseSpaceMixture& p, const SubtractionSpec& s) { return subtract(p, s); });
}

void run_add(Context& ctx) {
    check_top_level(ctx.config, {"input", "detector", "squeezer", "clicks", "grid"});
    AdditionSpec spec;
    spec.sq = squeezer(member(ctx.config, "config", "squeezer"), "squeezer");
    ctx.derived["xi"] = spec.sq.xi;
    ctx.derived["mu"] = spec.sq.mu();
    ctx.derived["nu"] = spec.sq.nu();
    run_single(ctx, spec, [](const PhaseSpaceMixture& p, const AdditionSpec& s) { return add(p, s); });
}

void run_amplify(Context& ctx) {
    json& cfg = ctx.config;
    check_top_level(cfg, {"input", "addition", "subtraction", "clicks", "grid"});
    const PhaseSpaceMixture input = mixture(member(cfg, "config", "input"));
    const json& a = member(cfg, "config", "addition");
    const json& s = member(cfg, "config", "subtraction");
    allow_keys(a, "addition", {"squeezer", "detector"});
    allow_keys(s, "subtraction", {"beam_splitter", "detector"});
    AmplifySpec spec;
    spec.add.sq = squeezer(member(a, "addition", "squeezer"), "addition.squeezer");
    spec.add.det = detector(member(a, "addition", "detector"), "addition.detector");
    spec.sub.bs = beam_splitter(member(s, "subtraction", "beam_splitter"), "subtraction.beam_splitter");
    spec.sub.det = detector(member(s, "subtraction", "detector"), "subtraction.detector");
    spec.validate();
    ctx.derived["addition"] = {{"xi", spec.add.sq.xi}, {"mu", spec.add.sq.mu()}, {"nu", spec.add.sq.nu()},
                               {"eta_eff", spec.add.eta_eff()}};
    ctx.derived["subtraction"] = {{"r", spec.sub.bs.r()}, {"eta_eff", spec.sub.eta_eff()}};

    // grids for the listed (k1, k2); the probability table is always complete
    if (!cfg.contains("clicks")) {
        cfg["clicks"] = "all";
    }
    std::vector<std::pair<int, int>> grid_clicks;
    const json& clicks = cfg.at("clicks");
    if (clicks.is_string() && clicks.get<std::string>() == "all") {
        for (int k1 = 0; k1 <= spec.add.det.n; ++k1) {
            for (int k2 = 0; k2 <= spec.sub.det.n; ++k2) {
                grid_clicks.emplace_back(k1, k2);
            }
        }
    } else if (clicks.is_array()) {
        for (const json& pair : clicks) {
            if (!pair.is_array() || pair.size() != 2) {
                fail("clicks", "expected \"all\" or a list of [k1, k2] pairs");
            }
            const int k1 = as_int(pair[0], "clicks");
            const int k2 = as_int(pair[1], "clicks");
            if (k1 < 0 || k1 > spec.add.det.n || k2 < 0 || k2 > spec.sub.det.n) {
                throw ValidationError("clicks: (" + std::to_string(k1) + ", " + std::to_string(k2) + ") out of range");
            }
            grid_clicks.emplace_back(k1, k2);
        }
    } else {
        fail("clicks", "expected \"all\" or a list of [k1, k2] pairs");
    }
    bool normalize = true;
    const std::optional<GridSpec> grid = grid_spec(cfg, normalize);

    Table table{{"k1", "k2", "probability", "percent"}, {}};
    std::vector<OutputFile> grids;
    for (int k1 = 0; k1 <= spec.add.det.n; ++k1) {
        spec.add.k = k1;
        const MixtureOutcome added = add(input, spec.add);
        for (int k2 = 0; k2 <= spec.sub.det.n; ++k2) {
            spec.sub.k = k2;
            const MixtureOutcome out = subtract(added.state, spec.sub);
            table.rows.push_back({whole(k1), whole(k2), num(out.probability), {format_percent(out.probability)}});
            const bool wanted = std::find(grid_clicks.begin(), grid_clicks.end(), std::pair{k1, k2}) != grid_clicks.end();
            if (grid && wanted) {
                emit_grid(grids, "grid_k1_" + std::to_string(k1) + "_k2_" + std::to_string(k2), out, *grid, normalize,
                          ctx.format);
            }
        }
    }
    ctx.files.push_back({"table" + extension(ctx.format), render(table, ctx.format)});
    ctx.files.insert(ctx.files.end(), grids.begin(), grids.end());
}

void run_clickstats(Context& ctx) {
    check_top_level(ctx.config, {"input", "detector"});
    const std::vector<double> p = photon_numbers(member(ctx.config, "config", "input"));
    const DetectorConfig det = detector(member(ctx.config, "config", "detector"), "detector");
    const ClickDistribution c = click_statistics(p, det);
    Table t{{"k", "probability"}, {}};
    for (std::size_t k = 0; k < c.probs.size(); ++k) {
        t.rows.push_back({whole(static_cast<long long>(k)), num(c.probs[k])});
    }
    ctx.derived["mean_clicks"] = c.mean();
    ctx.files.push_back({"clicks" + extension(ctx.format), render(t, ctx.format)});
}

void run_errorbound(Context& ctx) {
    json& cfg = ctx.config;
    check_top_level(cfg, {"detector", "clicks", "ladder", "cutoff"});
    const json& d = member(cfg, "config", "detector");
    allow_keys(d, "detector", {"eta"});
    const double eta = number(d, "detector", "eta");
    const int k = integer(cfg, "config", "clicks");
    if (!cfg.contains("cutoff")) {
        cfg["cutoff"] = 4096;
    }
    const int cutoff = integer(cfg, "config", "cutoff");
    const json& ladder = member(cfg, "config", "ladder");
    if (!ladder.is_array() || ladder.empty()) {
        fail("ladder", "expected a non-empty list of detector sizes");
    }
    Table t{{"N", "sup", "argmax", "tail_bound", "value"}, {}};
    for (const json& n : ladder) {
        const OperatorNormDistance dist = operator_norm_distance({as_int(n, "ladder"), eta}, k, cutoff);
        t.rows.push_back({whole(n.get<int>()), num(dist.sup), whole(dist.argmax), num(dist.tail_bound), num(dist.value)});
    }
    ctx.files.push_back({"errorbound" + extension(ctx.format), render(t, ctx.format)});
}

void apply_overrides(const std::string& protocol, json& cfg, const Overrides& o) {
    const bool amp = protocol == "amplify";
    if (o.eta) {
        if (amp) {
            cfg["addition"]["detector"]["eta"] = *o.eta;
            cfg["subtraction"]["detector"]["eta"] = *o.eta;
        } else {
            cfg["detector"]["eta"] = *o.eta;
        }
    }
    if (o.k) {
        if (amp) {
            fail("--k", "amplify takes (k1, k2) pairs from the config \"clicks\" field");
        }
        cfg["clicks"] = *o.k;
    }
    if (!o.n.empty()) {
        if (protocol == "errorbound") {
            cfg["ladder"] = o.n;
        } else if (o.n.size() != 1) {
            fail("--N", "a list of detector sizes is only meaningful for errorbound");
        } else if (amp) {
            cfg["addition"]["detector"]["N"] = o.n[0];
            cfg["subtraction"]["detector"]["N"] = o.n[0];
        } else {
            cfg["detector"]["N"] = o.n[0];
        }
    }
    if (o.grid) {
        const GridSpec g = parse_grid(*o.grid);
        const bool normalize = cfg.contains("grid") && cfg["grid"].is_object() && cfg["grid"].contains("normalize")
                                   ? cfg["grid"]["normalize"].get<bool>()
                                   : true;
        cfg["grid"] = {{"re", {g.re_min, g.re_max}}, {"im", {g.im_min, g.im_max}}, {"n", {g.n_re, g.n_im}},
                       {"normalize", normalize}};
    }
    if (o.format) {
        cfg["output"]["format"] = *o.format == Format::csv ? "csv" : "json";
    }
}

} // namespace

Format parse_format(const std::string& text) {
    if (text == "csv") {
        return Format::csv;
    }
    if (text == "json") {
        return Format::json;
    }
    throw ConfigError("format must be csv or json, got \"" + text + "\"");
}

std::vector<std::string> protocols() {
    return {"herald", "subtract", "add", "amplify", "clickstats", "errorbound"};
}

json load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
}

RunResult run(const std::string& protocol, json config, const Overrides& overrides, bool manifest) {
    const auto known = protocols();
    if (std::find(known.begin(), known.end(), protocol) == known.end()) {
        throw ConfigError("unknown protocol \"" + protocol + "\"");
    }
    if (config.is_null()) {
        config = json::object();
    }
    if (!config.is_object()) {
        fail("config", "expected a JSON object");
    }
    if (config.contains("schema") && config.at("schema") != config_schema) {
        fail("config.schema", "unsupported schema version (expected " + std::to_string(config_schema) + ")");
    }
    if (config.contains("protocol") && config.at("protocol") != protocol) {
        fail("config.protocol", "config was written for \"" + config.at("protocol").dump() + "\"");
    }
    config["schema"] = config_schema;
    config["protocol"] = protocol;
    apply_overrides(protocol, config, overrides);

    Format format = Format::csv;
    if (config.contains("output")) {
        allow_keys(config.at("output"), "output", {"format"});
        if (config.at("output").contains("format")) {
            const json& f = config.at("output").at("format");
            if (!f.is_string()) {
                fail("output.format", "expected a string");
            }
            format = parse_format(f.get<std::string>());
        }
    }
    config["output"]["format"] = format == Format::csv ? "csv" : "json";

    Context ctx{config, format, json::object(), {}};
    try {
        if (protocol == "herald") {
            run_herald(ctx);
        } else if (protocol == "subtract") {
            run_subtract(ctx);
        } else if (protocol == "add") {
            run_add(ctx);
        } else if (protocol == "amplify") {
            run_amplify(ctx);
        } else if (protocol == "clickstats") {
            run_clickstats(ctx);
        } else {
            run_errorbound(ctx);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    RunResult result{std::move(ctx.files), config};
    if (manifest) {
        json m;
        m["clickcraft_version"] = version;
        m["schema"] = config_schema;
        m["protocol"] = protocol;
        m["config"] = config;
        m["derived"] = ctx.derived;
        m["outputs"] = json::array();
        for (const OutputFile& f : result.files) {
            m["outputs"].push_back(f.name);
        }
        result.files.push_back({"manifest.json", m.dump(2) + "\n"});
    }
    return result;
}

void write_outputs(const RunResult& result, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
    for (const OutputFile& f : result.files) {
        std::ofstream out(dir / f.name, std::ios::binary | std::ios::trunc);
        out << f.content;
        if (!out) {
            throw ConfigError("cannot write " + (dir / f.name).string());
        }
    }
}

int exit_code(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) != nullptr || dynamic_cast<const json::exception*>(&e) != nullptr) {
        return 1;
    }
    if (dynamic_cast<const ValidationError*>(&e) != nullptr) {
        return 2;
    }
    return 3;
}

std::string format_double(double x) {
    if (!std::isfinite(x)) {
        throw NumericalError("non-finite value in output");
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string format_percent(double probability) {
    const double x = 100.0 * probability;
    if (!std::isfinite(x) || std::abs(x) >= 1e15) {
        throw NumericalError("probability out of range for percent formatting");
    }
    // exact decimal expansion of the double, then round half to even
    const int len = std::snprintf(nullptr, 0, "%.1100f", std::abs(x));
    std::string digits(static_cast<std::size_t>(len) + 1, '\0');
    std::snprintf(digits.data(), digits.size(), "%.1100f", std::abs(x));
    digits.resize(static_cast<std::size_t>(len));
    const std::size_t dot = digits.find('.');
    long long hundredths = std::stoll(digits.substr(0, dot)) * 100 + (digits[dot + 1] - '0') * 10 + (digits[dot + 2] - '0');
    const std::string rest = digits.substr(dot + 3);
    const bool above_half = rest[0] > '5' || (rest[0] == '5' && rest.find_first_not_of('0', 1) != std::string::npos);
    const bool tie = rest[0] == '5' && !above_half;
    if (above_half || (tie && hundredths % 2 == 1)) {
        ++hundredths;
    }
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%lld.%02lld", x < 0 && hundredths > 0 ? "-" : "", hundredths / 100,
                  hundredths % 100);
    return buf;
}

GridSpec parse_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        parts.push_back(part);
    }
    if (parts.size() != 6) {
        throw ConfigError("--grid expects re0,re1,im0,im1,nre,nim");
    }
    auto real = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) {
            throw ConfigError("--grid: \"" + s + "\" is not a number");
        }
        return v;
    };
    auto count = [&](const std::string& s) {
        const double v = real(s);
        if (v != std::floor(v) || std::abs(v) > 1e7) {
            throw ConfigError("--grid: \"" + s + "\" is not a point count");
        }
        return static_cast<int>(v);
    };
    GridSpec spec{real(parts[0]), real(parts[1]), real(parts[2]), real(parts[3]), count(parts[4]), count(parts[5])};
    spec.validate();
    return spec;
}

} // namespace clickcraft::cli
