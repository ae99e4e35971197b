#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "efmuon/counterexample.hpp"
#include "efmuon/linalg.hpp"
#include "efmuon/norms.hpp"
#include "efmuon/optim.hpp"
#include "efmuon/random.hpp"
#include "efmuon/schedule.hpp"

namespace efmuon::harness {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kPropertyFailure = 1, kConfigError = 2, kNumericalFailure = 3 };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Stepsize rule as written in a config file.
struct ScheduleSpec {
    std::string kind = "inv_t";  // constant | inv_t | inv_sqrt_t | table | uniform_table | adaptive_nuclear
    double lambda = 0.0;
    std::vector<double> values;
    // uniform_table: `length` draws from U[low, high] using the run seed
    double low = 0.0;
    double high = 0.0;
    std::size_t length = 0;
    bool nonincreasing = false;
};

struct InitSpec {
    std::string kind = "cex1";  // cex1 | random | explicit
    double r = 1.0;
    double delta = 0.0;
    std::optional<ScheduleSpec> schedule;  // cex1: schedule defining R_t, defaults to the run schedule
    double scale = 1.0;                    // random: entry standard deviation
    std::vector<double> diag;              // explicit: leading diagonal entries
    std::vector<std::vector<double>> matrix;
};

struct ProductSpecConfig {
    std::vector<std::pair<std::size_t, std::size_t>> layers;
    double s = 1.0;
    std::size_t k = 1;
};

struct ExperimentConfig {
    std::string preset;
    std::string method = "muon";
    double beta = 0.0;
    std::optional<double> c;            // nullopt means "auto"
    std::optional<std::string> c_rule;  // cex1 | cex2 | damped
    ScheduleSpec schedule;
    std::size_t T = 100;
    InitSpec init;
    std::size_t rows = 2;
    std::size_t cols = 2;
    std::uint64_t seed = 0;
    std::optional<std::string> norm;  // EF-M compressor
    std::optional<ProductSpecConfig> product;
    std::string ef_form = "residual";  // residual | iterate_difference
    bool bound = false;
    std::optional<double> bound_delta;
    std::string selection = "zero";  // zero | plus | minus
    std::string polar = "exact";     // exact | ns
    int ns_iters = tol::newton_schulz_iters;
    double noise = 0.0;  // stddev of additive subgradient noise
    std::string out = "trace.csv";
};

inline std::vector<std::string> preset_names() {
    return {"cex1-damped", "efm-damped", "cex2-regmuon", "cex2-muon-table"};
}

/// Hard-coded configurations; the two damped presets use beta = 0.9,
/// c = (1 - beta)/(2(1 + beta)) and the initialization (1 + log 2, 1 - log 2).
inline std::optional<ExperimentConfig> preset(const std::string& name) {
    ExperimentConfig c;
    c.preset = name;
    if (name == "cex1-damped" || name == "efm-damped") {
        c.beta = 0.9;
        c.c_rule = "damped";
        c.T = 5000;
        c.init.kind = "cex1";
        c.init.schedule = ScheduleSpec{};
        c.init.schedule->kind = "inv_t";
        if (name == "cex1-damped") {
            c.method = "muon";
            c.schedule.kind = "inv_t";
            c.out = "cex1-damped.csv";
        } else {
            c.method = "efmuon";
            c.schedule.kind = "inv_sqrt_t";
            c.bound = true;
            c.out = "efm-damped.csv";
        }
        return c;
    }
    if (name == "cex2-regmuon" || name == "cex2-muon-table") {
        c.beta = 0.2;
        c.c_rule = "cex2";
        c.T = 2000;
        c.init.kind = "random";
        if (name == "cex2-regmuon") {
            c.method = "regmuon";
            c.schedule.kind = "constant";
            c.schedule.lambda = 0.05;
        } else {
            c.method = "muon";
            c.schedule.kind = "uniform_table";
            c.schedule.low = 0.001;
            c.schedule.high = 0.1;
            c.schedule.length = 2001;
        }
        c.out = name + ".csv";
        return c;
    }
    return std::nullopt;
}

namespace detail {

inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

// Line of the first occurrence of "key" in the source; 0 when absent.
inline std::size_t key_line(const std::string& text, const std::string& key) {
    const auto pos = text.find('"' + key + '"');
    return pos == std::string::npos ? 0 : line_col(text, pos).first;
}

class Reader {
public:
    explicit Reader(const std::string& text) : text_{text} {}

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        const std::size_t line = key_line(text_, key);
        throw ConfigError(line ? "config:" + std::to_string(line) + ": " + key + ": " + msg : key + ": " + msg);
    }

    template <class T>
    T get(const json& j, const std::string& key) const {
        try {
            return j.get<T>();
        } catch (const json::exception&) {
            fail(key, std::string("wrong type (") + j.type_name() + ")");
        }
    }

    double number(const json& j, const std::string& key) const {
        if (!j.is_number())
            fail(key, std::string("expected a number, got ") + j.type_name());
        const double v = j.get<double>();
        if (!std::isfinite(v))
            fail(key, "must be finite");
        return v;
    }

    std::size_t count(const json& j, const std::string& key) const {
        if (!j.is_number_unsigned())
            fail(key, "expected a nonnegative integer");
        return j.get<std::size_t>();
    }

    std::string string(const json& j, const std::string& key) const {
        if (!j.is_string())
            fail(key, std::string("expected a string, got ") + j.type_name());
        return j.get<std::string>();
    }

    ScheduleSpec schedule(const json& j, const std::string& key) const {
        ScheduleSpec s;
        if (j.is_string()) {
            s.kind = j.get<std::string>();
        } else if (j.is_object()) {
            for (const auto& [k, v] : j.items()) {
                if (k == "kind") s.kind = string(v, k);
                else if (k == "lambda") s.lambda = number(v, k);
                else if (k == "values") s.values = get<std::vector<double>>(v, k);
                else if (k == "low") s.low = number(v, k);
                else if (k == "high") s.high = number(v, k);
                else if (k == "length") s.length = count(v, k);
                else if (k == "nonincreasing") s.nonincreasing = get<bool>(v, k);
                else fail(k, "unknown schedule field");
            }
        } else {
            fail(key, "expected a schedule name or object");
        }
        static const char* kinds[] = {"constant", "inv_t", "inv_sqrt_t", "table", "uniform_table", "adaptive_nuclear"};
        if (std::find(std::begin(kinds), std::end(kinds), s.kind) == std::end(kinds))
            fail(key, "unknown schedule kind '" + s.kind + "'");
        return s;
    }

    InitSpec init(const json& j) const {
        if (!j.is_object())
            fail("init", "expected an object");
        InitSpec s;
        for (const auto& [k, v] : j.items()) {
            if (k == "kind") s.kind = string(v, k);
            else if (k == "r") s.r = number(v, k);
            else if (k == "delta") s.delta = number(v, k);
            else if (k == "schedule") s.schedule = schedule(v, k);
            else if (k == "scale") s.scale = number(v, k);
            else if (k == "diag") s.diag = get<std::vector<double>>(v, k);
            else if (k == "matrix") s.matrix = get<std::vector<std::vector<double>>>(v, k);
            else fail(k, "unknown init field");
        }
        if (s.kind != "cex1" && s.kind != "random" && s.kind != "explicit")
            fail("init", "unknown init kind '" + s.kind + "'");
        return s;
    }

    ProductSpecConfig product(const json& j) const {
        if (!j.is_object())
            fail("product", "expected an object");
        ProductSpecConfig p;
        for (const auto& [k, v] : j.items()) {
            if (k == "layers") {
                for (const auto& l : get<std::vector<std::vector<std::size_t>>>(v, k)) {
                    if (l.size() != 2)
                        fail(k, "each layer is [rows, cols]");
                    p.layers.emplace_back(l[0], l[1]);
                }
            } else if (k == "s") {
                p.s = number(v, k);
            } else if (k == "k") {
                p.k = count(v, k);
            } else {
                fail(k, "unknown product field");
            }
        }
        return p;
    }

private:
    const std::string& text_;
};

}  // namespace detail

/// Parses a JSON config on top of `base`. Errors carry the offending line.
inline ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {}) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ConfigError("config:" + std::to_string(line) + ":" + std::to_string(col) + ": syntax error");
    }
    if (!j.is_object())
        throw ConfigError("config:1: top level must be an object");

    const detail::Reader rd(text);
    ExperimentConfig c = std::move(base);
    for (const auto& [k, v] : j.items()) {
        if (k == "preset") {
            c.preset = rd.string(v, k);
        } else if (k == "method") {
            c.method = rd.string(v, k);
            if (!parse_method(c.method))
                rd.fail(k, "unknown method '" + c.method + "'");
        } else if (k == "beta") {
            c.beta = rd.number(v, k);
        } else if (k == "c") {
            if (v.is_string() && v.get<std::string>() == "auto")
                c.c.reset();
            else
                c.c = rd.number(v, k);
        } else if (k == "c_rule") {
            c.c_rule = rd.string(v, k);
            if (*c.c_rule != "cex1" && *c.c_rule != "cex2" && *c.c_rule != "damped")
                rd.fail(k, "expected cex1, cex2 or damped");
        } else if (k == "schedule") {
            c.schedule = rd.schedule(v, k);
        } else if (k == "T") {
            c.T = rd.count(v, k);
        } else if (k == "init") {
            c.init = rd.init(v);
        } else if (k == "rows") {
            c.rows = rd.count(v, k);
        } else if (k == "cols") {
            c.cols = rd.count(v, k);
        } else if (k == "seed") {
            c.seed = rd.get<std::uint64_t>(v, k);
        } else if (k == "norm") {
            if (v.is_null())
                c.norm.reset();
            else
                c.norm = rd.string(v, k);
        } else if (k == "product") {
            c.product = rd.product(v);
        } else if (k == "ef_form") {
            c.ef_form = rd.string(v, k);
            if (c.ef_form != "residual" && c.ef_form != "iterate_difference")
                rd.fail(k, "expected residual or iterate_difference");
        } else if (k == "bound") {
            c.bound = rd.get<bool>(v, k);
        } else if (k == "bound_delta") {
            c.bound_delta = rd.number(v, k);
        } else if (k == "selection") {
            c.selection = rd.string(v, k);
            if (c.selection != "zero" && c.selection != "plus" && c.selection != "minus")
                rd.fail(k, "expected zero, plus or minus");
        } else if (k == "polar") {
            c.polar = rd.string(v, k);
            if (c.polar != "exact" && c.polar != "ns")
                rd.fail(k, "expected exact or ns");
        } else if (k == "ns_iters") {
            c.ns_iters = static_cast<int>(rd.count(v, k));
        } else if (k == "noise") {
            c.noise = rd.number(v, k);
            if (c.noise < 0.0)
                rd.fail(k, "must be nonnegative");
        } else if (k == "out") {
            c.out = rd.string(v, k);
        } else {
            rd.fail(k, "unknown field");
        }
    }
    return c;
}

inline json schedule_to_json(const ScheduleSpec& s) {
    json j{{"kind", s.kind}};
    if (s.kind == "constant" || s.kind == "adaptive_nuclear")
        j["lambda"] = s.lambda;
    if (s.kind == "table")
        j["values"] = s.values;
    if (s.kind == "uniform_table") {
        j["low"] = s.low;
        j["high"] = s.high;
        j["length"] = s.length;
        j["nonincreasing"] = s.nonincreasing;
    }
    return j;
}

inline json to_json(const ExperimentConfig& c) {
    json init{{"kind", c.init.kind}};
    if (c.init.kind == "cex1") {
        init["r"] = c.init.r;
        init["delta"] = c.init.delta;
        if (c.init.schedule)
            init["schedule"] = schedule_to_json(*c.init.schedule);
    } else if (c.init.kind == "random") {
        init["scale"] = c.init.scale;
    } else {
        if (!c.init.diag.empty())
            init["diag"] = c.init.diag;
        if (!c.init.matrix.empty())
            init["matrix"] = c.init.matrix;
    }
    json j{{"method", c.method},
           {"beta", c.beta},
           {"schedule", schedule_to_json(c.schedule)},
           {"T", c.T},
           {"init", init},
           {"rows", c.rows},
           {"cols", c.cols},
           {"seed", c.seed},
           {"ef_form", c.ef_form},
           {"bound", c.bound},
           {"selection", c.selection},
           {"polar", c.polar},
           {"ns_iters", c.ns_iters},
           {"noise", c.noise},
           {"out", c.out}};
    if (!c.preset.empty())
        j["preset"] = c.preset;
    j["c"] = c.c ? json(*c.c) : json("auto");
    if (c.c_rule)
        j["c_rule"] = *c.c_rule;
    if (c.norm)
        j["norm"] = *c.norm;
    if (c.bound_delta)
        j["bound_delta"] = *c.bound_delta;
    if (c.product) {
        json layers = json::array();
        for (const auto& [r, cl] : c.product->layers)
            layers.push_back({r, cl});
        j["product"] = {{"layers", layers}, {"s", c.product->s}, {"k", c.product->k}};
    }
    return j;
}

/// "auto" c: (1-beta)/2 for cex1 initializations, 1/2 - beta otherwise,
/// (1-beta)/(2(1+beta)) under the damped rule.
inline double resolve_c(const ExperimentConfig& cfg) {
    if (cfg.c)
        return *cfg.c;
    const std::string rule = cfg.c_rule ? *cfg.c_rule : (cfg.init.kind == "cex1" ? "cex1" : "cex2");
    if (rule == "cex1")
        return (1.0 - cfg.beta) / 2.0;
    if (rule == "damped")
        return (1.0 - cfg.beta) / (2.0 * (1.0 + cfg.beta));
    if (!(cfg.beta < 0.5))
        throw ConfigError("c: auto rule 1/2 - beta needs beta < 1/2");
    return 0.5 - cfg.beta;
}

inline StepSchedule build_schedule(const ScheduleSpec& s, std::uint64_t seed) {
    if (s.kind == "constant") return StepSchedule::constant(s.lambda);
    if (s.kind == "inv_t") return StepSchedule::inv_t();
    if (s.kind == "inv_sqrt_t") return StepSchedule::inv_sqrt_t();
    if (s.kind == "table") return StepSchedule::table(s.values);
    if (s.kind == "adaptive_nuclear") return StepSchedule::adaptive_nuclear(s.lambda);
    if (s.kind == "uniform_table") {
        if (!(s.low > 0.0 && s.high >= s.low) || s.length == 0)
            throw ConfigError("schedule: uniform_table needs 0 < low <= high and length > 0");
        Rng rng(seed ^ 0x5eedULL);
        std::vector<double> v(s.length);
        for (double& x : v)
            x = s.low == s.high ? s.low : uniform(rng, s.low, s.high);
        if (s.nonincreasing)
            std::sort(v.begin(), v.end(), std::greater<>());
        return StepSchedule::table(std::move(v));
    }
    throw ConfigError("schedule: unknown kind '" + s.kind + "'");
}

/// Parses "l1", "l2", "linf", "lp:<p>", "op", "nuclear".
inline NormSpec parse_norm(const std::string& s) {
    if (s == "l1") return NormSpec::l1();
    if (s == "l2") return NormSpec::l2();
    if (s == "linf") return NormSpec::linf();
    if (s == "op" || s == "operator") return NormSpec::op();
    if (s == "nuclear") return NormSpec::nuclear();
    if (s.rfind("lp:", 0) == 0) {
        try {
            return NormSpec::lp(std::stod(s.substr(3)));
        } catch (const std::logic_error&) {
        }
    }
    throw ConfigError("norm: unknown norm '" + s + "'");
}

inline SubgradientSelection parse_selection(const std::string& s) {
    if (s == "zero") return SubgradientSelection::framework_zero();
    if (s == "plus") return SubgradientSelection::fixed_sign(1.0);
    if (s == "minus") return SubgradientSelection::fixed_sign(-1.0);
    throw ConfigError("selection: expected zero, plus or minus");
}

inline Matrix build_init(const ExperimentConfig& cfg, const StepSchedule& run_schedule) {
    const auto& in = cfg.init;
    if (in.kind == "cex1") {
        const StepSchedule s = in.schedule ? build_schedule(*in.schedule, cfg.seed) : run_schedule;
        try {
            return cex1_build(0.0, s, in.r, in.delta, std::max<std::size_t>(cfg.T, 1), cfg.rows, cfg.cols).W0;
        } catch (const InfeasibleInit& e) {
            throw ConfigError(std::string("init: ") + e.what());
        }
    }
    if (in.kind == "random") {
        Rng rng(cfg.seed);
        return gaussian_matrix(rng, cfg.rows, cfg.cols, in.scale);
    }
    Matrix W(cfg.rows, cfg.cols);
    if (!in.matrix.empty()) {
        if (in.matrix.size() != cfg.rows)
            throw ConfigError("init: matrix row count differs from rows");
        for (std::size_t i = 0; i < cfg.rows; ++i) {
            if (in.matrix[i].size() != cfg.cols)
                throw ConfigError("init: matrix column count differs from cols");
            for (std::size_t j = 0; j < cfg.cols; ++j)
                W(i, j) = in.matrix[i][j];
        }
    } else {
        if (in.diag.size() > std::min(cfg.rows, cfg.cols))
            throw ConfigError("init: too many diagonal entries");
        for (std::size_t i = 0; i < in.diag.size(); ++i)
            W(i, i) = in.diag[i];
    }
    return W;
}

struct ExperimentResult {
    std::vector<TraceRow> rows;
    double c = 0.0;
    Matrix W0;
    json resolved;  // config with c resolved
};

/// Runs a configured experiment on the kinky function. Config problems raise
/// ConfigError; failures of the linear algebra raise NumericalError.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const auto method = parse_method(cfg.method);
    if (!method)
        throw ConfigError("method: unknown method '" + cfg.method + "'");
    if (!(cfg.beta >= 0.0 && cfg.beta < 1.0))
        throw ConfigError("beta: must lie in [0, 1)");
    if (cfg.rows < 2 || cfg.cols < 2)
        throw ConfigError("rows/cols: kinky function needs at least 2x2");

    ExperimentResult res;
    res.c = resolve_c(cfg);
    if (!(res.c > 0.0 && res.c < 1.0))
        throw ConfigError("c: resolved value " + std::to_string(res.c) + " outside (0, 1)");

    StepSchedule schedule = StepSchedule::constant(1.0);
    try {
        schedule = build_schedule(cfg.schedule, cfg.seed);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("schedule: ") + e.what());
    }
    res.W0 = build_init(cfg, schedule);

    const KinkyFunction f(res.c, cfg.rows, cfg.cols);
    const auto sel = parse_selection(cfg.selection);
    PolarOptions popts;
    popts.backend = cfg.polar == "ns" ? PolarBackend::NewtonSchulz : PolarBackend::Exact;
    popts.ns_iters = cfg.ns_iters;

    RunConfig rc;
    rc.method = *method;
    rc.ef_form = cfg.ef_form == "iterate_difference" ? EfErrorForm::IterateDifference : EfErrorForm::Residual;
    if (cfg.norm)
        rc.norm = parse_norm(*cfg.norm);

    const bool product_method = *method == Method::MuonMax || *method == Method::EFMuonMax;
    if (product_method) {
        if (!cfg.product)
            throw ConfigError("product: required by " + cfg.method);
        std::vector<ProductNormSpec::Dims> dims;
        for (const auto& [r, c] : cfg.product->layers)
            dims.push_back({r, c});
        try {
            rc.product = ProductNormSpec(dims, cfg.product->s, cfg.product->k);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("product: ") + e.what());
        }
        if (dims.front().rows != cfg.rows || dims.front().cols != cfg.cols)
            throw ConfigError("product: first layer must have shape rows x cols");
    }

    if (cfg.bound) {
        double delta = 1.0;
        if (cfg.bound_delta) {
            delta = *cfg.bound_delta;
        } else if (*method == Method::EFMuon) {
            delta = 1.0 / static_cast<double>(std::min(cfg.rows, cfg.cols));
        } else if (*method == Method::EFM) {
            delta = rc.norm ? compressor_constants(*rc.norm, cfg.rows, cfg.cols).delta : 1.0;
        } else if (*method == Method::EFMuonMax) {
            delta = compressor_constants(*rc.product).delta;
        } else {
            throw ConfigError("bound: only defined for error-feedback methods");
        }
        if (!(delta > 0.0 && delta <= 1.0))
            throw ConfigError("bound_delta: must lie in (0, 1]");
        rc.bound = BoundParams{delta, lipschitz_bound(res.c), f.distance_to_minimizers(res.W0)};
    }

    try {
        if (product_method) {
            ParamPoint W = rc.product->zeros();
            W.matrices.front() = res.W0;
            auto oracle = f.product_oracle(sel);
            if (cfg.noise > 0.0)
                oracle = noisy_oracle(std::move(oracle), cfg.noise, cfg.seed + 1);
            auto tr = run(rc, oracle, make_state(std::move(W), cfg.beta, schedule, popts), cfg.T);
            res.rows = std::move(tr.rows);
        } else {
            auto oracle = f.oracle(sel);
            if (cfg.noise > 0.0)
                oracle = noisy_oracle(std::move(oracle), cfg.noise, cfg.seed + 1);
            auto tr = run(rc, oracle, make_state(res.W0, cfg.beta, schedule, popts), cfg.T);
            res.rows = std::move(tr.rows);
        }
    } catch (const NumericalError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    } catch (const std::logic_error& e) {
        throw ConfigError(e.what());
    }

    res.resolved = to_json(cfg);
    res.resolved["c"] = res.c;
    return res;
}

inline constexpr const char* csv_header = "t,lambda,f,w11,w22,sum_diag,diff_diag,grad_fro,favg,bound";

namespace detail {
inline void put(std::string& line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    line += buf;
}
}  // namespace detail

inline void write_csv(std::ostream& os, const std::vector<TraceRow>& rows) {
    os << csv_header << '\n';
    std::string line;
    for (const auto& r : rows) {
        line = std::to_string(r.t);
        for (double v : {r.lambda, r.f, r.w11, r.w22, r.w11 + r.w22, r.w11 - r.w22, r.grad_fro, r.favg}) {
            line += ',';
            detail::put(line, v);
        }
        line += ',';
        if (!std::isnan(r.bound))
            detail::put(line, r.bound);
        os << line << '\n';
    }
}

inline std::string csv_string(const std::vector<TraceRow>& rows) {
    std::ostringstream os;
    write_csv(os, rows);
    return os.str();
}

/// Reads back a trace written by write_csv.
inline std::vector<TraceRow> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != csv_header)
        throw std::invalid_argument("read_csv: missing or unexpected header");
    std::vector<TraceRow> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        if (!line.empty() && line.back() == ',')
            cells.emplace_back();
        if (cells.size() != 10)
            throw std::invalid_argument("read_csv: line " + std::to_string(lineno) + " has " +
                                        std::to_string(cells.size()) + " columns");
        TraceRow r;
        r.t = std::stoull(cells[0]);
        r.lambda = std::stod(cells[1]);
        r.f = std::stod(cells[2]);
        r.w11 = std::stod(cells[3]);
        r.w22 = std::stod(cells[4]);
        r.grad_fro = std::stod(cells[7]);
        r.favg = std::stod(cells[8]);
        r.bound = cells[9].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cells[9]);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace efmuon::harness
