#include "dagnet/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dagnet/errors.hpp"

namespace dagnet {

using nlohmann::json;

namespace {

// byte offset -> "line L, column C" for parse diagnostics
std::string locate(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json parse_strict(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(what + ": " + e.what() + " (" + locate(text, e.byte) + ")");
    }
}

void require_keys(const json& obj, std::initializer_list<const char*> keys,
                  const std::string& what) {
    if (!obj.is_object()) throw ParseError(what + " must be a JSON object");
    for (const char* k : keys)
        if (!obj.contains(k)) throw ParseError(what + " is missing key '" + std::string(k) + "'");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) throw ParseError(what + " has unknown key '" + it.key() + "'");
    }
}

int require_int(const json& v, const std::string& what) {
    if (!v.is_number_integer()) throw ParseError(what + " must be an integer");
    return v.get<int>();
}

double require_finite(const json& v, const std::string& what) {
    if (!v.is_number()) throw ParseError(what + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ParseError(what + " must be finite");
    return d;
}

}  // namespace

Dag dag_from_json(const std::string& text) {
    const json j = parse_strict(text, "graph");
    require_keys(j, {"nodes", "edges"}, "graph");
    if (!j["nodes"].is_array() || !j["edges"].is_array())
        throw ParseError("graph nodes/edges must be arrays");

    const int n = static_cast<int>(j["nodes"].size());
    std::vector<Role> roles(n);
    std::vector<bool> node_seen(n, false);
    for (const json& nd : j["nodes"]) {
        require_keys(nd, {"id", "role"}, "node");
        const int id = require_int(nd["id"], "node id");
        if (id < 0 || id >= n) throw ParseError("node ids must be dense 0..n-1, got " +
                                                std::to_string(id));
        if (node_seen[id]) throw ParseError("duplicate node id " + std::to_string(id));
        node_seen[id] = true;
        if (!nd["role"].is_string()) throw ParseError("node role must be a string");
        roles[id] = role_from_string(nd["role"].get<std::string>());
    }

    const int m = static_cast<int>(j["edges"].size());
    std::vector<Edge> edges(m);
    std::vector<bool> edge_seen(m, false);
    for (const json& ed : j["edges"]) {
        require_keys(ed, {"id", "src", "dst"}, "edge");
        const int id = require_int(ed["id"], "edge id");
        if (id < 0 || id >= m) throw ParseError("edge ids must be dense 0..m-1, got " +
                                                std::to_string(id));
        if (edge_seen[id]) throw ParseError("duplicate edge id " + std::to_string(id));
        edge_seen[id] = true;
        edges[id] = {id, require_int(ed["src"], "edge src"), require_int(ed["dst"], "edge dst")};
    }
    try {
        return Dag(std::move(roles), std::move(edges));
    } catch (const CycleDetected&) {
        throw;
    } catch (const InvalidGraph& e) {
        throw ParseError(std::string("invalid graph: ") + e.what());
    }
}

std::string dag_to_json(const Dag& dag) {
    json nodes = json::array();
    for (NodeId v = 0; v < dag.num_nodes(); ++v)
        nodes.push_back({{"id", v}, {"role", to_string(dag.role(v))}});
    json edges = json::array();
    for (const Edge& e : dag.edges())
        edges.push_back({{"id", e.id}, {"src", e.src}, {"dst", e.dst}});
    return json{{"nodes", nodes}, {"edges", edges}}.dump(2);
}

namespace {

// Shared shape for {"<int-id>": number} maps with an exact id universe.
std::vector<double> id_map_from_json(const std::string& text, const std::vector<int>& ids,
                                     const std::string& what) {
    const json j = parse_strict(text, what);
    if (!j.is_object()) throw ParseError(what + " must be a JSON object");
    std::vector<double> out(ids.size());
    std::vector<bool> seen(ids.size(), false);
    for (auto it = j.begin(); it != j.end(); ++it) {
        int id = 0;
        try {
            std::size_t pos = 0;
            id = std::stoi(it.key(), &pos);
            if (pos != it.key().size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw ParseError(what + " key '" + it.key() + "' is not an integer id");
        }
        const auto at = std::find(ids.begin(), ids.end(), id);
        if (at == ids.end())
            throw ParseError(what + " key " + std::to_string(id) + " is not a valid id");
        const std::size_t slot = static_cast<std::size_t>(at - ids.begin());
        if (seen[slot]) throw ParseError(what + " repeats id " + std::to_string(id));
        seen[slot] = true;
        out[slot] = require_finite(it.value(), what + " value for id " + std::to_string(id));
    }
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (!seen[i]) throw ParseError(what + " is missing id " + std::to_string(ids[i]));
    return out;
}

std::string id_map_to_json(const std::vector<int>& ids, const std::vector<double>& values) {
    json j = json::object();
    for (std::size_t i = 0; i < ids.size(); ++i) j[std::to_string(ids[i])] = values[i];
    return j.dump(2);
}

}  // namespace

Parameters params_from_json(const std::string& text, const Dag& dag) {
    std::vector<int> ids(dag.num_edges());
    for (int e = 0; e < dag.num_edges(); ++e) ids[e] = e;
    return id_map_from_json(text, ids, "parameters");
}

std::string params_to_json(const Dag& dag, const Parameters& theta) {
    std::vector<int> ids(dag.num_edges());
    for (int e = 0; e < dag.num_edges(); ++e) ids[e] = e;
    return id_map_to_json(ids, theta);
}

BalanceVector balance_from_json(const std::string& text, const Dag& dag) {
    return id_map_from_json(text, dag.hidden(), "balance");
}

std::string balance_to_json(const Dag& dag, const BalanceVector& c) {
    return id_map_to_json(dag.hidden(), c);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r' && ch != ' ' && ch != '\t') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

Dataset dataset_from_csv(const std::string& text, const Dag& dag, bool bias_added) {
    std::vector<std::string> lines;
    {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            const bool blank =
                line.find_first_not_of(" \t\r") == std::string::npos;
            if (!blank) lines.push_back(line);
        }
    }
    if (lines.size() < 2) throw ParseError("dataset needs a header and at least one row");

    // The virtual bias input (highest input id) is synthesized, not read.
    std::vector<NodeId> expected_inputs = dag.inputs();
    NodeId bias_node = -1;
    if (bias_added) {
        if (expected_inputs.empty()) throw ParseError("graph has no inputs");
        bias_node = expected_inputs.back();
        expected_inputs.pop_back();
    }

    const std::vector<std::string> header = split_csv_line(lines[0]);
    std::vector<int> input_slot(dag.num_nodes(), -1);
    std::vector<int> output_slot(dag.num_nodes(), -1);
    {
        std::vector<int> in_pos, out_pos;
        for (std::size_t col = 0; col < header.size(); ++col) {
            const std::string& h = header[col];
            if (h.size() < 2 || (h[0] != 'x' && h[0] != 'y'))
                throw ParseError("dataset column '" + h + "' must be x<id> or y<id>");
            int id = 0;
            try {
                std::size_t pos = 0;
                id = std::stoi(h.substr(1), &pos);
                if (pos != h.size() - 1) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw ParseError("dataset column '" + h + "' has a malformed id");
            }
            if (h[0] == 'x') {
                if (id < 0 || id >= dag.num_nodes() || dag.role(id) != Role::input ||
                    id == bias_node)
                    throw ParseError("column '" + h + "' does not name a data input node");
                if (input_slot[id] >= 0) throw ParseError("duplicate column '" + h + "'");
                input_slot[id] = static_cast<int>(col);
            } else {
                if (id < 0 || id >= dag.num_nodes() || dag.role(id) != Role::output)
                    throw ParseError("column '" + h + "' does not name an output node");
                if (output_slot[id] >= 0) throw ParseError("duplicate column '" + h + "'");
                output_slot[id] = static_cast<int>(col);
            }
        }
    }
    for (NodeId v : expected_inputs)
        if (input_slot[v] < 0) throw ParseError("dataset is missing column x" + std::to_string(v));
    for (NodeId v : dag.outputs())
        if (output_slot[v] < 0) throw ParseError("dataset is missing column y" + std::to_string(v));

    const std::size_t rows = lines.size() - 1;
    Dataset data{Matrix(rows, dag.inputs().size()), Matrix(rows, dag.outputs().size())};
    for (std::size_t r = 0; r < rows; ++r) {
        const std::vector<std::string> cells = split_csv_line(lines[r + 1]);
        if (cells.size() != header.size())
            throw ParseError("row " + std::to_string(r + 2) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        auto cell_value = [&](int col) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(cells[col], &pos);
                if (pos != cells[col].size() || !std::isfinite(v)) throw std::invalid_argument("");
                return v;
            } catch (const std::exception&) {
                throw ParseError("row " + std::to_string(r + 2) + ", column " +
                                 std::to_string(col + 1) + ": bad number '" + cells[col] + "'");
            }
        };
        for (std::size_t i = 0; i < dag.inputs().size(); ++i) {
            const NodeId v = dag.inputs()[i];
            data.inputs(r, i) = (v == bias_node) ? 1.0 : cell_value(input_slot[v]);
        }
        for (std::size_t i = 0; i < dag.outputs().size(); ++i)
            data.targets(r, i) = cell_value(output_slot[dag.outputs()[i]]);
    }
    return data;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string dataset_to_csv(const Dag& dag, const Dataset& data, bool bias_added) {
    std::vector<NodeId> input_cols = dag.inputs();
    if (bias_added && !input_cols.empty()) input_cols.pop_back();

    std::ostringstream out;
    bool first = true;
    for (NodeId v : input_cols) {
        out << (first ? "" : ",") << 'x' << v;
        first = false;
    }
    for (NodeId v : dag.outputs()) out << ",y" << v;
    out << '\n';
    for (std::size_t r = 0; r < data.inputs.rows(); ++r) {
        first = true;
        for (std::size_t i = 0; i < input_cols.size(); ++i) {
            out << (first ? "" : ",") << format_double(data.inputs(r, i));
            first = false;
        }
        for (std::size_t i = 0; i < data.targets.cols(); ++i)
            out << ',' << format_double(data.targets(r, i));
        out << '\n';
    }
    return out.str();
}

namespace {

json witnesses_json(const ConnectednessReport& report) {
    json arr = json::array();
    for (const Witness& w : report.witnesses)
        arr.push_back({{"bottleneck", w.bottleneck},
                       {"side", to_string(w.side)},
                       {"set", w.set},
                       {"c_sum", w.c_sum}});
    return arr;
}

}  // namespace

std::string connectedness_report_to_json(const ConnectednessReport& report,
                                         const std::vector<std::vector<NodeId>>* zero_sum,
                                         const double* construct_residual) {
    json j{{"connected", report.connected}, {"witnesses", witnesses_json(report)}};
    if (zero_sum != nullptr) {
        j["zero_sum_subsets"] = *zero_sum;
        j["singularities_possible"] = !zero_sum->empty();
    }
    if (construct_residual != nullptr) j["construct_residual"] = *construct_residual;
    return j.dump(2);
}

std::string singularity_report_to_json(const SingularityReport& report) {
    json j{{"rank_topological", report.rank_topological},
           {"rank_numerical", report.rank_numerical},
           {"singular_values", report.singular_values},
           {"disconnected_sets", report.disconnected},
           {"zero_edges", report.zero_edges},
           {"tau_zero", report.tau_zero},
           {"tau_rank", report.tau_rank}};
    return j.dump(2);
}

namespace {

void append_header(std::ostringstream& out, const TrainRecord& r) {
    out << "step,task_loss,reg_value,drift,null_sigma_count";
    for (NodeId v : r.hidden_nodes) out << ",c_" << v;
    const std::size_t k = r.snapshots.empty() ? 0 : r.snapshots.front().sigma.size();
    for (std::size_t i = 0; i < k; ++i) out << ",sigma_" << i;
    for (NodeId v : r.hidden_nodes) out << ",s_" << v;
    for (NodeId v : r.hidden_nodes) out << ",smax_" << v;
    out << '\n';
}

}  // namespace

std::string record_to_csv(const TrainRecord& record) {
    std::ostringstream out;
    append_header(out, record);
    for (const Snapshot& s : record.snapshots) {
        out << s.step << ',' << format_double(s.task_loss) << ',' << format_double(s.reg_value)
            << ',' << format_double(s.drift) << ',' << s.null_sigma_count;
        for (double v : s.c) out << ',' << format_double(v);
        for (double v : s.sigma) out << ',' << format_double(v);
        for (double v : s.score_s) out << ',' << format_double(v);
        for (double v : s.score_smax) out << ',' << format_double(v);
        out << '\n';
    }
    return out.str();
}

std::string record_to_long_csv(const TrainRecord& record) {
    std::ostringstream out;
    out << "step,series,key,value\n";
    for (const Snapshot& s : record.snapshots) {
        out << s.step << ",task_loss,," << format_double(s.task_loss) << '\n';
        out << s.step << ",reg_value,," << format_double(s.reg_value) << '\n';
        out << s.step << ",drift,," << format_double(s.drift) << '\n';
        out << s.step << ",null_sigma_count,," << s.null_sigma_count << '\n';
        for (std::size_t i = 0; i < s.c.size(); ++i)
            out << s.step << ",c," << record.hidden_nodes[i] << ',' << format_double(s.c[i])
                << '\n';
        for (std::size_t i = 0; i < s.sigma.size(); ++i)
            out << s.step << ",sigma," << i << ',' << format_double(s.sigma[i]) << '\n';
        for (std::size_t i = 0; i < s.score_s.size(); ++i)
            out << s.step << ",s," << record.hidden_nodes[i] << ','
                << format_double(s.score_s[i]) << '\n';
        for (std::size_t i = 0; i < s.score_smax.size(); ++i)
            out << s.step << ",smax," << record.hidden_nodes[i] << ','
                << format_double(s.score_smax[i]) << '\n';
    }
    return out.str();
}

std::string record_to_json(const TrainRecord& record) {
    json snaps = json::array();
    for (const Snapshot& s : record.snapshots)
        snaps.push_back({{"step", s.step},
                         {"task_loss", s.task_loss},
                         {"reg_value", s.reg_value},
                         {"drift", s.drift},
                         {"c", s.c},
                         {"sigma", s.sigma},
                         {"null_sigma_count", s.null_sigma_count},
                         {"s", s.score_s},
                         {"smax", s.score_smax}});
    json j{{"hidden_nodes", record.hidden_nodes}, {"c0", record.c0}, {"snapshots", snaps}};
    return j.dump(2);
}

std::string null_model_to_csv(const std::vector<std::pair<int, double>>& tail) {
    std::ostringstream out;
    out << "k,p_at_least_k\n";
    for (const auto& [k, p] : tail) out << k << ',' << format_double(p) << '\n';
    return out.str();
}

std::string prune_curve_to_csv(const std::vector<std::pair<int, double>>& curve) {
    std::ostringstream out;
    out << "k,loss\n";
    for (const auto& [k, l] : curve) out << k << ',' << format_double(l) << '\n';
    return out.str();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp + "'");
        out << content;
        out.flush();
        if (!out) throw Error("short write to '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string manifest_to_json(const std::string& command,
                             const std::vector<ManifestInput>& inputs,
                             const std::string& config_json,
                             const std::vector<std::string>& outputs) {
    json ins = json::array();
    for (const ManifestInput& i : inputs) {
        char hex[19];
        std::snprintf(hex, sizeof(hex), "0x%016llx",
                      static_cast<unsigned long long>(i.content_hash));
        ins.push_back({{"path", i.path}, {"fnv1a64", hex}});
    }
    json j{{"command", command},
           {"version", kToolVersion},
           {"inputs", ins},
           {"config", json::parse(config_json)},
           {"outputs", outputs}};
    return j.dump(2);
}

}  // namespace dagnet
