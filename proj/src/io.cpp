#include "dwsim/io.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

#include <json.hpp>

namespace dw {

using Json = nlohmann::ordered_json;

namespace {

Json index_list(const IndexSet& members) {
    Json out = Json::array();
    for (AgentIndex k : members) out.push_back(k + 1);
    return out;
}

Json pair_list(const std::vector<UnorderedPair>& pairs) {
    Json out = Json::array();
    for (const UnorderedPair& p : pairs) out.push_back(Json::array({p.i + 1, p.j + 1}));
    return out;
}

Json matrix_json(const Matrix& m) {
    Json out = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) out.push_back(Json(std::vector<double>(m.row(r).begin(), m.row(r).end())));
    return out;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

void append_edges(std::string& out, const std::vector<DirectedEdge>& edges) {
    for (std::size_t k = 0; k < edges.size(); ++k) {
        if (k) out += ';';
        out += std::to_string(edges[k].from + 1);
        out += '>';
        out += std::to_string(edges[k].to + 1);
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string trace_csv(const SimulationTrace& trace) {
    std::string out = "t,agent";
    for (std::size_t c = 0; c < trace.params.d(); ++c) out += ",x" + std::to_string(c + 1);
    out += '\n';
    for (const OpinionState& s : trace.snapshots)
        for (AgentIndex k = 0; k < s.n(); ++k) {
            out += std::to_string(s.t);
            out += ',';
            out += std::to_string(k + 1);
            for (double v : s.x.row(k)) {
                out += ',';
                out += format_double(v);
            }
            out += '\n';
        }
    return out;
}

std::string events_csv(const SimulationTrace& trace) {
    std::string out = "t,edges_added,edges_removed\n";
    for (const EdgeEvent& e : trace.edge_events) {
        out += std::to_string(e.t);
        out += ',';
        append_edges(out, e.added);
        out += ',';
        append_edges(out, e.removed);
        out += '\n';
    }
    return out;
}

std::string run_report_json(const RunReport& report, const AgentParams& params, std::uint64_t master_seed,
                            std::uint64_t run_index) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["master_seed"] = master_seed;
    j["run_index"] = run_index;
    j["n"] = params.n();
    j["d"] = params.d();
    j["r"] = params.r();
    j["mu"] = params.mu();
    j["converged"] = report.converged;
    j["steps"] = report.steps;
    j["limits"] = matrix_json(report.limits);
    Json taus = Json::array();
    for (const TauEntry& t : report.tau_table)
        taus.push_back({{"eps", t.eps}, {"tau", t.tau ? Json(*t.tau) : Json(nullptr)}, {"censored", !t.tau}});
    j["tau"] = taus;
    j["xi"] = report.xi.xi;
    j["last_change"] = report.xi.last_change ? Json(*report.xi.last_change) : Json(nullptr);
    Json parts = Json::array();
    for (const ClusterSet& c : report.final_partition)
        parts.push_back({{"members", index_list(c.members)}, {"diameter", c.eps}});
    j["partition"] = parts;
    j["separation_ok"] = report.separation_ok;
    j["boundary_pairs"] = pair_list(report.boundary_pairs);
    j["separation_violations"] = pair_list(report.separation_violations);
    return j.dump(2) + "\n";
}

std::string batch_summary_json(const BatchSummary& s) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["runs"] = s.runs;
    j["converged"] = s.converged;
    j["consensus"] = s.consensus;
    j["consensus_frequency"] = s.consensus_frequency;
    Json taus = Json::array();
    for (const TauSummary& t : s.tau)
        taus.push_back({{"eps", t.eps},
                        {"defined", t.defined},
                        {"censored", t.censored},
                        {"mean", optional_number(t.mean)},
                        {"median", optional_number(t.median)}});
    j["tau"] = taus;
    j["xi_mean"] = s.xi_mean;
    j["xi_median"] = s.xi_median;
    j["xi_max"] = s.xi_max;
    return j.dump(2) + "\n";
}

std::string merge_trace_json(const MergeTrace& tr, const OpinionState& final_state) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["hub"] = tr.hub + 1;
    j["partner"] = tr.partner + 1;
    j["members"] = index_list(tr.members);
    j["eps"] = tr.eps;
    j["schedule_origin_t"] = tr.schedule.origin_t;
    j["schedule"] = pair_list(tr.schedule.steps);
    j["phase_times"] = tr.phase_times;
    j["delta_lambda"] = tr.delta_lambda;
    j["delta_norm_max"] = tr.delta_norm_max;
    Json lambdas = Json::array();
    for (const auto& l : tr.lambda) lambdas.push_back(l);
    j["lambda"] = lambdas;
    j["round_targets"] = index_list(tr.round_targets);
    j["rounds"] = tr.rounds;
    j["t_lambda_end"] = tr.t_lambda_end;
    j["t_final"] = tr.t_final;
    j["step6_diameters"] = tr.step6_diameters;
    j["length_bound"] = tr.length_bound;
    j["rounds_bound"] = tr.rounds_bound;
    j["step6_bound"] = tr.step6_bound;
    j["checks"] = {{"max_decomposition_residual", tr.max_decomposition_residual},
                   {"step1_landing_ok", tr.step1_landing_ok},
                   {"step4_reach_ok", tr.step4_reach_ok},
                   {"round_contraction_ok", tr.round_contraction_ok},
                   {"delta_lambda_monotone", tr.delta_lambda_monotone},
                   {"step6_contraction_ok", tr.step6_contraction_ok}};
    j["final_t"] = final_state.t;
    j["final_opinions"] = matrix_json(final_state.x);
    return j.dump(2) + "\n";
}

std::string slow_report_json(const SlowInstance& inst, const SlowVerification& v) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["K"] = inst.K;
    j["r"] = inst.params.r();
    j["mu"] = inst.params.mu();
    j["epsilon"] = inst.epsilon;
    j["a"] = inst.a;
    j["initial"] = matrix_json(inst.initial.x);
    j["passed"] = v.passed();
    j["checks"] = {{"no_early_edge", v.no_early_edge},         {"landing_ok", v.landing_ok},
                   {"boundary_edge_ok", v.boundary_edge_ok},   {"tau_certificate_ok", v.tau_certificate_ok},
                   {"telescoping_ok", v.telescoping_ok},       {"padding_fixed", v.padding_fixed}};
    j["landing_deviation"] = v.landing_deviation;
    j["max_telescoping_error"] = v.max_telescoping_error;
    j["boundary_gap"] = v.boundary_gap;
    j["rounding_resolved"] = v.rounding_resolved;
    return j.dump(2) + "\n";
}

int check_report_schema(std::string_view json_text) {
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const Json::parse_error& e) {
        throw InvalidParameter(std::string("report is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("schema_version") || !j["schema_version"].is_string())
        throw InvalidParameter("report has no schema_version string");
    const std::string v = j["schema_version"].get<std::string>();
    int major = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), major);
    if (res.ec != std::errc() || (res.ptr != v.data() + v.size() && *res.ptr != '.'))
        throw InvalidParameter("malformed schema_version '" + v + "'");
    if (major != kSchemaMajor) throw InvalidParameter("unsupported schema major version " + std::to_string(major));
    return major;
}

void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create directory " + dir.string() + (ec ? ": " + ec.message() : ""));
}

void write_text(const std::filesystem::path& path, std::string_view content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw IoError("write to " + path.string() + " failed");
}

}  // namespace dw
