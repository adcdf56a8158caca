#include "dwsim/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dwsim/io.hpp"

namespace dw {

using Json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw ConfigError("config field '" + field + "': " + what);
}

const Json& require_field(const Json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) fail(path + key, "missing");
    return obj.at(key);
}

double as_number(const Json& v, const std::string& field) {
    if (!v.is_number()) fail(field, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(field, "must be finite");
    return x;
}

std::uint64_t as_count(const Json& v, const std::string& field) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) fail(field, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

void reject_unknown(const Json& obj, std::initializer_list<std::string_view> keys, const std::string& path) {
    for (const auto& [k, _] : obj.items()) {
        bool known = false;
        for (auto allowed : keys) known = known || k == allowed;
        if (!known) fail(path + k, "unknown field");
    }
}

std::vector<double> number_list(const Json& v, const std::string& field) {
    if (!v.is_array()) fail(field, "expected an array");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_number(v[k], field + "[" + std::to_string(k) + "]"));
    return out;
}

// "r" and "mu" share this shape; `scale_key` is m_bar_r / m_bar_u.
VectorSpec parse_vector_spec(const Json& v, const std::string& field, const std::string& scale_key,
                             const std::string& value_key, std::size_t n) {
    if (v.is_array()) {
        std::vector<double> values = number_list(v, field);
        if (values.size() != n) fail(field, "expected " + std::to_string(n) + " entries, got " + std::to_string(values.size()));
        return values;
    }
    if (!v.is_object()) fail(field, "expected an array or an object with 'kind'");
    const Json& kind = require_field(v, "kind", field + ".");
    if (kind == "scaled-uniform") {
        reject_unknown(v, {"kind", scale_key}, field + ".");
        return ScaledUniform{as_number(require_field(v, scale_key, field + "."), field + "." + scale_key)};
    }
    if (kind == "homogeneous") {
        reject_unknown(v, {"kind", value_key}, field + ".");
        return Homogeneous{as_number(require_field(v, value_key, field + "."), field + "." + value_key)};
    }
    fail(field + ".kind", "expected 'scaled-uniform' or 'homogeneous'");
}

InitSpec parse_init(const Json& v, std::size_t n, std::size_t d) {
    if (v.is_array()) {
        if (v.size() != n) fail("init", "expected " + std::to_string(n) + " rows");
        Matrix m(n, d);
        for (std::size_t r = 0; r < n; ++r) {
            const std::string field = "init[" + std::to_string(r) + "]";
            std::vector<double> row = number_list(v[r], field);
            if (row.size() != d) fail(field, "expected " + std::to_string(d) + " columns");
            for (std::size_t c = 0; c < d; ++c) m(r, c) = row[c];
        }
        return m;
    }
    if (!v.is_object()) fail("init", "expected a matrix or an object with 'kind'");
    if (require_field(v, "kind", "init.") != "uniform-box") fail("init.kind", "expected 'uniform-box'");
    reject_unknown(v, {"kind", "low", "high"}, "init.");
    UniformBox box{as_number(require_field(v, "low", "init."), "init.low"),
                   as_number(require_field(v, "high", "init."), "init.high")};
    if (!(box.low < box.high)) fail("init", "low must be < high");
    return box;
}

std::vector<double> realize(const VectorSpec& spec, std::size_t n, RandomStream stream) {
    if (const auto* values = std::get_if<std::vector<double>>(&spec)) return *values;
    if (const auto* h = std::get_if<Homogeneous>(&spec)) return std::vector<double>(n, h->value);
    const double scale = std::get<ScaledUniform>(spec).scale;
    std::vector<double> out(n);
    for (double& v : out) v = scale * stream.uniform_open01();
    return out;
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j, {"n", "d", "r", "mu", "init", "horizon", "stop", "tau_eps", "seeds", "record_stride"}, "");

    ExperimentConfig cfg;
    cfg.n = as_count(require_field(j, "n", ""), "n");
    cfg.d = as_count(require_field(j, "d", ""), "d");
    if (cfg.n < 3) fail("n", "must be >= 3, got " + std::to_string(cfg.n));
    if (cfg.d < 1) fail("d", "must be >= 1");
    cfg.r = parse_vector_spec(require_field(j, "r", ""), "r", "m_bar_r", "value", cfg.n);
    cfg.mu = parse_vector_spec(require_field(j, "mu", ""), "mu", "m_bar_u", "mu_star", cfg.n);
    cfg.init = parse_init(require_field(j, "init", ""), cfg.n, cfg.d);

    if (j.contains("horizon")) cfg.horizon = as_count(j["horizon"], "horizon");
    cfg.stop = StopRule::defaults(cfg.n);
    if (j.contains("stop")) {
        const Json& s = j["stop"];
        if (!s.is_object()) fail("stop", "expected an object");
        reject_unknown(s, {"freeze_window", "diam_tol", "horizon_cap", "min_steps"}, "stop.");
        if (s.contains("freeze_window")) cfg.stop.freeze_window = as_count(s["freeze_window"], "stop.freeze_window");
        if (s.contains("diam_tol")) cfg.stop.diam_tol = as_number(s["diam_tol"], "stop.diam_tol");
        if (s.contains("horizon_cap")) cfg.stop.horizon_cap = as_count(s["horizon_cap"], "stop.horizon_cap");
        if (s.contains("min_steps")) cfg.stop.min_steps = as_count(s["min_steps"], "stop.min_steps");
        try {
            cfg.stop.validate();
        } catch (const InvalidParameter& e) {
            fail("stop", e.what());
        }
    }
    if (j.contains("tau_eps")) {
        cfg.tau_eps = number_list(j["tau_eps"], "tau_eps");
        for (double e : cfg.tau_eps)
            if (!(e > 0.0)) fail("tau_eps", "entries must be positive");
    }
    if (j.contains("seeds")) {
        const Json& s = j["seeds"];
        if (!s.is_object()) fail("seeds", "expected an object");
        reject_unknown(s, {"master_seed", "run_count"}, "seeds.");
        if (s.contains("master_seed")) cfg.master_seed = as_count(s["master_seed"], "seeds.master_seed");
        if (s.contains("run_count")) cfg.run_count = as_count(s["run_count"], "seeds.run_count");
        if (cfg.run_count < 1) fail("seeds.run_count", "must be >= 1");
    }
    if (j.contains("record_stride")) cfg.record_stride = as_count(j["record_stride"], "record_stride");

    // surface parameter-range errors now rather than inside a batch
    try {
        setup_run(cfg, 0);
    } catch (const InvalidParameter& e) {
        throw ConfigError(std::string("config values rejected: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read config " + path.string());
    std::ostringstream os;
    os << f.rdbuf();
    return parse_config(os.str());
}

RunSetup setup_run(const ExperimentConfig& cfg, std::size_t run_index) {
    const RandomStream run = RandomStream(cfg.master_seed).substream(run_index);
    std::vector<double> r = realize(cfg.r, cfg.n, run.substream(0));
    std::vector<double> mu = realize(cfg.mu, cfg.n, run.substream(1));
    AgentParams params(cfg.d, std::move(r), std::move(mu));

    Matrix x;
    if (const auto* m = std::get_if<Matrix>(&cfg.init)) {
        x = *m;
    } else {
        const UniformBox box = std::get<UniformBox>(cfg.init);
        RandomStream s = run.substream(2);
        x = Matrix(cfg.n, cfg.d);
        for (std::size_t k = 0; k < cfg.n; ++k)
            for (std::size_t c = 0; c < cfg.d; ++c) x(k, c) = s.uniform(box.low, box.high);
    }
    OpinionState initial(0, std::move(x));
    initial.check_conforms(params);
    return RunSetup{std::move(params), std::move(initial), run};
}

RunResult execute_run(const ExperimentConfig& cfg, std::size_t run_index, bool keep_trace) {
    RunSetup setup = setup_run(cfg, run_index);
    SimulationTrace trace = run_simulation(setup.initial, setup.params, setup.dynamics, cfg.horizon, cfg.stop,
                                           TraceOptions{false, cfg.record_stride});
    RunReport report = detect_convergence(trace, cfg.stop, cfg.tau_eps);
    RunResult out{std::move(report), std::move(setup.params), std::nullopt};
    if (keep_trace) out.trace = std::move(trace);
    return out;
}

std::vector<RunResult> run_batch(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& out_dir,
                                 std::size_t trace_runs, unsigned threads) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.run_count));
    std::vector<std::optional<RunResult>> slots(cfg.run_count);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);

    auto worker = [&](unsigned id) {
        try {
            for (std::size_t k = next++; k < cfg.run_count; k = next++) {
                const bool keep = out_dir && k < trace_runs;
                RunResult res = execute_run(cfg, k, keep);
                if (out_dir) {
                    char name[32];
                    std::snprintf(name, sizeof name, "run_%04zu", k);
                    const auto dir = *out_dir / name;
                    ensure_directory(dir);
                    write_text(dir / "report.json", run_report_json(res.report, res.params, cfg.master_seed, k));
                    if (keep) {
                        write_text(dir / "trace.csv", trace_csv(*res.trace));
                        write_text(dir / "events.csv", events_csv(*res.trace));
                        res.trace.reset();
                    }
                }
                slots[k] = std::move(res);
            }
        } catch (...) {
            errors[id] = std::current_exception();
            next = cfg.run_count;
        }
    };
    if (threads <= 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned id = 0; id < threads; ++id) pool.emplace_back(worker, id);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<RunResult> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

std::vector<PresetCell> figure_preset(std::string_view figure, std::size_t seeds, std::uint64_t master_seed) {
    if (figure != "fig1" && figure != "fig2") throw InvalidParameter("unknown preset '" + std::string(figure) + "'");
    if (seeds < 1) throw InvalidParameter("preset needs at least one seed");
    const bool homogeneous = figure == "fig2";
    std::vector<PresetCell> cells;
    for (double m_bar_r : {0.5, 1.0})
        for (double m_bar_u : {0.25, 0.5, 0.75, 1.0}) {
            PresetCell cell;
            cell.m_bar_r = m_bar_r;
            ExperimentConfig& cfg = cell.config;
            cfg.n = 20;
            cfg.d = 2;
            cfg.r = ScaledUniform{m_bar_r};
            std::ostringstream name;
            name << "r" << format_double(m_bar_r);
            if (homogeneous) {
                cell.mu_star = m_bar_u / 2.0;
                cfg.mu = Homogeneous{*cell.mu_star};
                name << "_mustar" << format_double(*cell.mu_star);
            } else {
                cell.m_bar_u = m_bar_u;
                cfg.mu = ScaledUniform{m_bar_u};
                name << "_u" << format_double(m_bar_u);
            }
            cell.name = name.str();
            cfg.init = UniformBox{0.0, 1.0};
            cfg.horizon = 10'000'000;
            cfg.stop = StopRule::defaults(cfg.n);
            cfg.tau_eps = {0.01};
            cfg.master_seed = master_seed;
            cfg.run_count = seeds;
            cells.push_back(std::move(cell));
        }
    return cells;
}

std::vector<CellResult> run_figure(std::string_view figure, std::size_t seeds,
                                   const std::optional<std::filesystem::path>& out_dir, std::uint64_t master_seed,
                                   unsigned threads) {
    std::vector<CellResult> out;
    for (PresetCell& cell : figure_preset(figure, seeds, master_seed)) {
        std::optional<std::filesystem::path> cell_dir;
        if (out_dir) cell_dir = *out_dir / cell.name;
        std::vector<RunResult> runs = run_batch(cell.config, cell_dir, 1, threads);
        std::vector<RunReport> reports;
        for (const RunResult& r : runs) reports.push_back(r.report);
        BatchSummary summary = batch_stats(reports);
        if (cell_dir) write_text(*cell_dir / "summary.json", batch_summary_json(summary));
        out.push_back(CellResult{std::move(cell), std::move(runs), std::move(summary)});
    }
    if (out_dir) write_text(*out_dir / "summary.csv", figure_summary_csv(out));
    return out;
}

std::string figure_summary_csv(const std::vector<CellResult>& cells) {
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    std::string out = "cell,m_bar_r,m_bar_u,mu_star,runs,converged,consensus_frequency,tau_eps,tau_mean,tau_median,"
                      "tau_censored,xi_mean,xi_max\n";
    for (const CellResult& c : cells) {
        const BatchSummary& s = c.summary;
        out += c.cell.name + "," + format_double(c.cell.m_bar_r) + "," + opt(c.cell.m_bar_u) + "," +
               opt(c.cell.mu_star) + "," + std::to_string(s.runs) + "," + std::to_string(s.converged) + "," +
               format_double(s.consensus_frequency) + ",";
        if (s.tau.empty())
            out += ",,,";
        else
            out += format_double(s.tau[0].eps) + "," + opt(s.tau[0].mean) + "," + opt(s.tau[0].median) + "," +
                   std::to_string(s.tau[0].censored);
        out += "," + format_double(s.xi_mean) + "," + std::to_string(s.xi_max) + "\n";
    }
    return out;
}

}  // namespace dw
