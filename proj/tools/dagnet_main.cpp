// dagnet: train and analyze feed-forward DAG ReLU networks.
//
// Exit codes: 0 success (analyze: connected), 2 analysis negative
// (analyze: disconnected), 1 any error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dagnet/errors.hpp"
#include "dagnet/io.hpp"

using namespace dagnet;
using nlohmann::json;

namespace {

struct LoadedInput {
    std::string path;
    std::string text;
};

LoadedInput slurp(const std::string& path) {
    return {path, read_text_file(path)};
}

std::vector<ManifestInput> manifest_inputs(const std::vector<LoadedInput>& ins) {
    std::vector<ManifestInput> out;
    for (const LoadedInput& i : ins) out.push_back({i.path, fnv1a64(i.text)});
    return out;
}

void emit_manifest(const std::string& manifest_path, const std::string& command,
                   const std::vector<LoadedInput>& ins, const json& config,
                   const std::vector<std::string>& outputs) {
    if (manifest_path.empty()) return;
    write_text_atomic(manifest_path,
                      manifest_to_json(command, manifest_inputs(ins), config.dump(), outputs));
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-")
        std::cout << content << (content.ends_with('\n') ? "" : "\n");
    else
        write_text_atomic(path, content);
}

InitScheme parse_init(const std::string& spec, const Dag& dag) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "uniform") {
        const auto comma = rest.find(',');
        if (comma == std::string::npos)
            throw InvalidArgument("--init uniform needs 'uniform:a,b'");
        return InitScheme::uniform(std::stod(rest.substr(0, comma)),
                                   std::stod(rest.substr(comma + 1)));
    }
    if (kind == "normal") {
        if (rest.empty()) throw InvalidArgument("--init normal needs 'normal:s'");
        return InitScheme::normal(std::stod(rest));
    }
    if (kind == "file") {
        if (rest.empty()) throw InvalidArgument("--init file needs 'file:path'");
        return InitScheme::explicit_theta(params_from_json(read_text_file(rest), dag));
    }
    throw InvalidArgument("unknown init scheme '" + spec + "'");
}

Activation parse_activation(const std::string& spec) {
    if (spec == "relu") return Activation::relu();
    const std::string prefix = "leaky:";
    if (spec.rfind(prefix, 0) == 0) return Activation::leaky(std::stod(spec.substr(prefix.size())));
    throw InvalidArgument("unknown activation '" + spec + "' (relu or leaky:<gamma>)");
}

// ---- analyze -------------------------------------------------------------

int cmd_analyze(const std::string& graph_path, const std::string& params_path,
                const std::string& c_path, const std::string& backend_name,
                const std::string& out_path, const std::string& manifest_path) {
    std::vector<LoadedInput> ins{slurp(graph_path)};
    const Dag dag = dag_from_json(ins[0].text);

    BalanceVector c;
    if (!params_path.empty()) {
        ins.push_back(slurp(params_path));
        c = balance(dag, params_from_json(ins.back().text, dag));
    } else if (!c_path.empty()) {
        ins.push_back(slurp(c_path));
        c = balance_from_json(ins.back().text, dag);
    } else {
        throw InvalidArgument("analyze needs --params or --c");
    }

    ConnectednessReport report;
    if (backend_name == "both") {
        report = is_connected(dag, c, Backend::flow);
        const ConnectednessReport check = is_connected(dag, c, Backend::enumerate);
        if (check.connected != report.connected)
            throw Error("flow and enumerate backends disagree on connectedness");
    } else {
        report = is_connected(dag, c, backend_from_string(backend_name));
    }

    std::optional<std::vector<std::vector<NodeId>>> zero_sum;
    if (static_cast<int>(dag.hidden().size()) <= kZeroSumCap)
        zero_sum = zero_sum_subsets(dag, c, kSignTol);

    // Every balance is attainable; report how tightly the constructive
    // solver hits this one.
    const Parameters witness_theta = feasible_construct(dag, c);
    const BalanceVector reached = balance(dag, witness_theta);
    double residual = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        residual = std::max(residual, std::abs(reached[i] - c[i]));

    const json config{{"backend", backend_name}};
    emit_manifest(manifest_path, "analyze", ins, config, {out_path});
    emit(out_path,
         connectedness_report_to_json(report, zero_sum ? &*zero_sum : nullptr, &residual));
    return report.connected ? 0 : 2;
}

// ---- train ---------------------------------------------------------------

int cmd_train(const std::string& graph_path, const std::string& data_path, TrainConfig cfg,
              const std::string& init_spec, const std::string& act_spec, bool bias,
              const std::string& out_record, const std::string& out_params,
              const std::string& out_long, const std::string& out_json,
              const std::string& manifest_path) {
    std::vector<LoadedInput> ins{slurp(graph_path), slurp(data_path)};
    Dag dag = dag_from_json(ins[0].text);
    if (bias) dag = with_bias(dag);
    const Dataset data = dataset_from_csv(ins[1].text, dag, bias);

    cfg.init = parse_init(init_spec, dag);
    cfg.act = parse_activation(act_spec);

    const json config{{"lr", cfg.lr},
                      {"steps", cfg.steps},
                      {"loss", to_string(cfg.loss)},
                      {"regularizer", to_string(cfg.reg)},
                      {"alpha", cfg.alpha},
                      {"batch", cfg.batch_size},
                      {"seed", cfg.seed},
                      {"log_every", cfg.log_every},
                      {"init", init_spec},
                      {"activation", act_spec},
                      {"bias", bias}};
    std::vector<std::string> outputs{out_record, out_params};
    if (!out_long.empty()) outputs.push_back(out_long);
    if (!out_json.empty()) outputs.push_back(out_json);
    emit_manifest(manifest_path, "train", ins, config, outputs);

    const TrainResult result = train(dag, data, cfg);

    emit(out_record, record_to_csv(result.record));
    emit(out_params, params_to_json(dag, result.theta));
    if (!out_long.empty()) emit(out_long, record_to_long_csv(result.record));
    if (!out_json.empty()) emit(out_json, record_to_json(result.record));
    return 0;
}

// ---- prune ---------------------------------------------------------------

int cmd_prune(const std::string& graph_path, const std::string& params_path,
              const std::string& data_path, const std::string& order_name,
              const std::string& k_spec, const std::string& loss_name,
              const std::string& act_spec, const std::string& out_path,
              const std::string& out_graph, const std::string& out_params,
              const std::string& manifest_path) {
    std::vector<LoadedInput> ins{slurp(graph_path), slurp(params_path), slurp(data_path)};
    const Dag dag = dag_from_json(ins[0].text);
    const Parameters theta = params_from_json(ins[1].text, dag);
    const Dataset data = dataset_from_csv(ins[2].text, dag);
    const PruneOrder order = prune_order_from_string(order_name);
    const LossKind kind = loss_kind_from_string(loss_name);
    const Activation act = parse_activation(act_spec);

    const int h = static_cast<int>(dag.hidden().size());
    int k_max = h;
    if (k_spec != "all") {
        k_max = std::stoi(k_spec);
        if (k_max < 0 || k_max > h) throw InvalidArgument("--k out of range 0.." + std::to_string(h));
    }

    const json config{{"order", order_name}, {"k", k_spec}, {"loss", loss_name}};
    std::vector<std::string> outputs{out_path};
    if (!out_graph.empty()) outputs.push_back(out_graph);
    if (!out_params.empty()) outputs.push_back(out_params);
    emit_manifest(manifest_path, "prune", ins, config, outputs);

    std::vector<std::pair<int, double>> curve = prune_curve(dag, act, theta, data, kind, order);
    curve.resize(k_max + 1);
    emit(out_path, prune_curve_to_csv(curve));

    if (!out_graph.empty() || !out_params.empty()) {
        const PruneOutcome pruned = prune_neurons(dag, theta, order, k_max);
        if (!pruned.removed_stranded.empty()) {
            std::cerr << "note: removing stranded hidden nodes:";
            for (NodeId v : pruned.removed_stranded) std::cerr << ' ' << v;
            std::cerr << '\n';
        }
        if (!out_graph.empty()) emit(out_graph, dag_to_json(pruned.dag));
        if (!out_params.empty()) emit(out_params, params_to_json(pruned.dag, pruned.theta));
    }
    return 0;
}

// ---- singularity ---------------------------------------------------------

int cmd_singularity(const std::string& graph_path, const std::string& params_path,
                    double tau_zero, double tau_rank_factor, const std::string& out_path,
                    const std::string& manifest_path) {
    std::vector<LoadedInput> ins{slurp(graph_path), slurp(params_path)};
    const Dag dag = dag_from_json(ins[0].text);
    const Parameters theta = params_from_json(ins[1].text, dag);

    const json config{{"tau_zero", tau_zero}, {"tau_rank_factor", tau_rank_factor}};
    emit_manifest(manifest_path, "singularity", ins, config, {out_path});

    const SingularityReport rep = singularity_report(dag, theta, tau_zero, tau_rank_factor);
    emit(out_path, singularity_report_to_json(rep));
    return 0;
}

// ---- nullmodel -----------------------------------------------------------

int cmd_nullmodel(const std::string& graph_path, double p, const std::string& mode_name, long n,
                  std::uint64_t seed, const std::string& out_path,
                  const std::string& manifest_path) {
    std::vector<LoadedInput> ins{slurp(graph_path)};
    const Dag dag = dag_from_json(ins[0].text);

    NullModelMode mode = NullModelMode::exact();
    if (mode_name == "mc")
        mode = NullModelMode::monte_carlo(n, seed);
    else if (mode_name != "exact")
        throw InvalidArgument("--mode must be exact or mc");

    const json config{{"p", p}, {"mode", mode_name}, {"n", n}, {"seed", seed}};
    emit_manifest(manifest_path, "nullmodel", ins, config, {out_path});

    emit(out_path, null_model_to_csv(null_model(dag, p, mode)));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Train and analyze feed-forward DAG ReLU networks"};
    app.require_subcommand(1);

    std::string graph_path, params_path, c_path, data_path;
    std::string out_path, out_graph, out_params_path, out_record, out_long, out_json;
    std::string manifest_path;
    std::string backend_name = "flow", order_name = "s", k_spec = "all";
    std::string loss_name = "mse", init_spec = "uniform:-1,1", act_spec = "relu";
    std::string mode_name = "exact";
    std::string reg_name = "none";
    bool bias = false;
    double p = 0.5, tau_zero = kDefaultTauZero, tau_rank_factor = kDefaultTauRankFactor;
    long mc_n = 100000;
    TrainConfig cfg;

    CLI::App* analyze = app.add_subcommand("analyze", "Connectedness and singularity feasibility");
    analyze->add_option("--graph", graph_path, "graph JSON")->required();
    analyze->add_option("--params", params_path, "parameters JSON (balance computed from it)");
    analyze->add_option("--c", c_path, "balance JSON");
    analyze->add_option("--backend", backend_name, "flow|enumerate|both");
    analyze->add_option("--out", out_path, "report path (default stdout)");
    analyze->add_option("--manifest", manifest_path, "manifest path");

    CLI::App* train_cmd = app.add_subcommand("train", "Gradient-flow training with regularizers");
    train_cmd->add_option("--graph", graph_path, "graph JSON")->required();
    train_cmd->add_option("--data", data_path, "dataset CSV")->required();
    train_cmd->add_option("--out-record", out_record, "snapshot CSV")->required();
    train_cmd->add_option("--out-params", out_params_path, "final parameters JSON")->required();
    train_cmd->add_option("--out-long", out_long, "long-format CSV for plotting");
    train_cmd->add_option("--out-json", out_json, "record JSON");
    train_cmd->add_option("--lr", cfg.lr, "learning rate");
    train_cmd->add_option("--steps", cfg.steps, "step count (>= 1)");
    train_cmd->add_option("--loss", loss_name, "mse|logistic");
    train_cmd->add_option("--regularizer", reg_name, "none|l1|l2|nuclear");
    CLI::Option* alpha_opt = train_cmd->add_option(
        "--alpha", cfg.alpha,
        "regularizer strength (default: reference value per regularizer)");
    train_cmd->add_option("--batch", cfg.batch_size, "mini-batch size, 0 = full batch");
    train_cmd->add_option("--seed", cfg.seed, "init seed");
    train_cmd->add_option("--log-every", cfg.log_every, "snapshot period");
    train_cmd->add_option("--init", init_spec, "uniform:a,b | normal:s | file:path");
    train_cmd->add_option("--act", act_spec, "relu | leaky:<gamma>");
    train_cmd->add_flag("--bias", bias, "add a virtual always-1 input wired to every hidden node");
    train_cmd->add_option("--manifest", manifest_path, "manifest path");

    CLI::App* prune_cmd = app.add_subcommand("prune", "Score-ordered neuron pruning curve");
    prune_cmd->add_option("--graph", graph_path, "graph JSON")->required();
    prune_cmd->add_option("--params", params_path, "parameters JSON")->required();
    prune_cmd->add_option("--data", data_path, "dataset CSV")->required();
    prune_cmd->add_option("--order", order_name, "s|s_max");
    prune_cmd->add_option("--k", k_spec, "all or a count");
    prune_cmd->add_option("--loss", loss_name, "mse|logistic");
    prune_cmd->add_option("--act", act_spec, "relu | leaky:<gamma>");
    prune_cmd->add_option("--out", out_path, "curve CSV (default stdout)");
    prune_cmd->add_option("--out-graph", out_graph, "pruned graph JSON at k");
    prune_cmd->add_option("--out-params", out_params_path, "pruned parameters JSON at k");
    prune_cmd->add_option("--manifest", manifest_path, "manifest path");

    CLI::App* sing = app.add_subcommand("singularity", "Jacobian rank and disconnected sets");
    sing->add_option("--graph", graph_path, "graph JSON")->required();
    sing->add_option("--params", params_path, "parameters JSON")->required();
    sing->add_option("--tau-zero", tau_zero, "edge-cut threshold on |theta|");
    sing->add_option("--tau-rank", tau_rank_factor, "numerical-rank factor of sigma_max");
    sing->add_option("--out", out_path, "report path (default stdout)");
    sing->add_option("--manifest", manifest_path, "manifest path");

    CLI::App* nullm = app.add_subcommand("nullmodel", "Edge-drop null model tail probabilities");
    nullm->add_option("--graph", graph_path, "graph JSON")->required();
    nullm->add_option("--p", p, "edge drop probability")->required();
    nullm->add_option("--mode", mode_name, "exact|mc");
    nullm->add_option("--n", mc_n, "monte carlo samples");
    nullm->add_option("--seed", cfg.seed, "monte carlo seed");
    nullm->add_option("--out", out_path, "CSV path (default stdout)");
    nullm->add_option("--manifest", manifest_path, "manifest path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (analyze->parsed())
            return cmd_analyze(graph_path, params_path, c_path, backend_name, out_path,
                               manifest_path);
        if (train_cmd->parsed()) {
            cfg.loss = loss_kind_from_string(loss_name);
            cfg.reg = regularizer_from_string(reg_name);
            if (alpha_opt->count() == 0) cfg.alpha = reference_alpha(cfg.reg);
            return cmd_train(graph_path, data_path, cfg, init_spec, act_spec, bias, out_record,
                             out_params_path, out_long, out_json, manifest_path);
        }
        if (prune_cmd->parsed())
            return cmd_prune(graph_path, params_path, data_path, order_name, k_spec, loss_name,
                             act_spec, out_path, out_graph, out_params_path, manifest_path);
        if (sing->parsed())
            return cmd_singularity(graph_path, params_path, tau_zero, tau_rank_factor, out_path,
                                   manifest_path);
        if (nullm->parsed())
            return cmd_nullmodel(graph_path, p, mode_name, mc_n, cfg.seed, out_path,
                                 manifest_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
