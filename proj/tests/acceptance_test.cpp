// End-to-end acceptance suite. Each check prints one PASS/FAIL line and the
// binary exits nonzero if any fails. Budgets are generous on purpose: every
// tolerance is pinned here, not tuned at runtime.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "dagnet/invariant.hpp"
#include "dagnet/singularity.hpp"
#include "dagnet/trainer.hpp"
#include "helpers.hpp"

using namespace dagnet;
using namespace testutil;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.empty() ? "" : " -- ",
                detail.c_str());
    if (!ok) ++g_failures;
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// ---- 1. conservation along training, first-order in the step size ----------

void criterion_1() {
    const Dag mlp = mlp_dag({2, 4, 1});
    const Dataset data = sum_dataset(256, 42);

    TrainConfig cfg;
    cfg.steps = 1000;
    cfg.lr = 1e-3;
    cfg.seed = 5;
    cfg.init = InitScheme::uniform(-1.0, 1.0);
    cfg.log_every = 10;

    const TrainResult coarse = train(mlp, data, cfg);
    double worst = 0.0;
    for (const Snapshot& s : coarse.record.snapshots) worst = std::max(worst, s.drift);

    cfg.lr = 5e-4;
    const TrainResult fine = train(mlp, data, cfg);
    const double ratio =
        coarse.record.snapshots.back().drift / fine.record.snapshots.back().drift;

    report("1 conservation drift <= 1e-2 over 1000 steps", worst <= 1e-2,
           "max drift " + fmt(worst));
    report("1 halving lr cuts final drift by 1.5x-4x", ratio >= 1.5 && ratio <= 4.0,
           "ratio " + fmt(ratio));
}

// ---- 2. flow and enumeration backends agree -------------------------------

void criterion_2() {
    std::mt19937_64 rng(1001);
    int agree = 0, total = 0, witness_ok = 0, witness_total = 0;
    for (int trial = 0; trial < 220; ++trial) {
        const Dag dag = random_dag(rng, 6);
        BalanceVector c(dag.hidden().size());
        for (double& v : c) v = static_cast<double>(uniform_int(rng, -5, 5));

        const ConnectednessReport rf = is_connected(dag, c, Backend::flow);
        const ConnectednessReport re = is_connected(dag, c, Backend::enumerate);
        ++total;
        if (rf.connected == re.connected) ++agree;

        for (const auto* rep : {&rf, &re}) {
            for (const Witness& w : rep->witnesses) {
                ++witness_total;
                double sum = 0.0;
                for (NodeId u : w.set) sum += c[dag.hidden_row(u)];
                const bool closed = closure_holds(dag, w.bottleneck, w.set, w.side == Side::out);
                const bool sign_ok = w.side == Side::out ? sum < 0.0 : sum > 0.0;
                if (closed && sign_ok && std::abs(sum - w.c_sum) < 1e-12) ++witness_ok;
            }
        }
    }
    report("2 backends agree on 220 random graphs", agree == total,
           std::to_string(agree) + "/" + std::to_string(total));
    report("2 every witness re-verifies", witness_ok == witness_total,
           std::to_string(witness_ok) + "/" + std::to_string(witness_total));
}

// ---- 3. single-output MLP rule --------------------------------------------

void criterion_3() {
    std::mt19937_64 rng(2002);
    int ok = 0, total = 0;
    for (const auto& layers :
         {std::vector<int>{2, 4, 1}, {3, 2, 1}, {2, 3, 3, 1}, {2, 2, 2, 1}, {3, 4, 2, 1}}) {
        const Dag mlp = mlp_dag(layers);
        const int last_width = layers[layers.size() - 2];
        for (int trial = 0; trial < 50; ++trial) {
            BalanceVector c(mlp.hidden().size());
            for (double& v : c) v = uniform(rng, -5.0, 5.0);
            bool expect = true;
            for (int i = 0; i < last_width; ++i) expect = expect && c[c.size() - 1 - i] >= 0.0;
            ++total;
            if (is_connected(mlp, c, Backend::flow).connected == expect) ++ok;
        }
    }
    report("3 MLP connectedness == last-layer sign rule (250 draws)", ok == total,
           std::to_string(ok) + "/" + std::to_string(total));
}

// ---- 4. toy-net learning obstruction ---------------------------------------

void criterion_4() {
    const Dag toy = obstruction_toy_dag();
    const Dataset data = neg_sum_dataset(256, 7);
    const EdgeId out_edge = 6;  // (4,5)

    auto run = [&](double theta_e) {
        Parameters theta = obstruction_toy_theta(theta_e);
        bool sign_constant = true;
        const double sign0 = theta[out_edge] > 0.0 ? 1.0 : -1.0;
        for (int step = 0; step < 10000; ++step) {
            const Parameters g = gradient(toy, Activation::relu(), theta, data, LossKind::mse);
            theta = gf_step(theta, g, 3e-3);
            const double s = theta[out_edge] > 0.0 ? 1.0 : (theta[out_edge] < 0.0 ? -1.0 : 0.0);
            if (s != sign0) sign_constant = false;
        }
        return std::make_pair(loss(toy, Activation::relu(), theta, data, LossKind::mse),
                              sign_constant);
    };

    const bool blocked_is_disconnected =
        !is_connected(toy, balance(toy, obstruction_toy_theta(1.0)), Backend::flow).connected;
    const auto [blocked_loss, blocked_sign_constant] = run(1.0);
    const auto [free_loss, free_sign_constant] = run(std::sqrt(3.0));

    report("4 theta_e=1 init is disconnected", blocked_is_disconnected);
    report("4 output-edge sign frozen over 1e4 steps", blocked_sign_constant);
    report("4 connected run reaches loss < 1e-3", free_loss < 1e-3, "loss " + fmt(free_loss));
    report("4 blocked run stuck above 10x the connected loss",
           blocked_loss > 10.0 * free_loss && !free_sign_constant,
           fmt(blocked_loss) + " vs " + fmt(free_loss));
}

// ---- 5. rank formula --------------------------------------------------------

void criterion_5() {
    std::mt19937_64 rng(3003);
    int ok = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Dag dag = random_dag(rng, 10, 0.5);
        Parameters theta(dag.num_edges());
        for (double& t : theta)
            t = uniform01(rng) < 0.3 ? 0.0 : uniform(rng, 0.5, 1.5) * (uniform01(rng) < 0.5 ? -1 : 1);

        const auto sv = singular_values(jacobian(reduced_incidence(dag), theta));
        const double sigma_max = sv.empty() ? 0.0 : sv.front();
        int num_rank = 0;
        for (double s : sv)
            if (s > 1e-8 * sigma_max) ++num_rank;
        if (num_rank == rank_via_topology(dag, theta, 0.0)) ++ok;
    }
    report("5 SVD rank equals topological rank on 100 sparse draws", ok == 100,
           std::to_string(ok) + "/100");
}

// ---- 6. zeroed neurons never revive -----------------------------------------

void criterion_6() {
    const Dag mlp = mlp_dag({2, 4, 1});
    const Dataset data = sum_dataset(64, 9);
    std::mt19937_64 rng(4004);
    Parameters theta = random_theta(rng, mlp);
    const NodeId victim = mlp.hidden()[uniform_int(rng, 0, 3)];
    std::vector<EdgeId> cut;
    for (EdgeId e : mlp.in_edges(victim)) cut.push_back(e);
    for (EdgeId e : mlp.out_edges(victim)) cut.push_back(e);
    for (EdgeId e : cut) theta[e] = 0.0;

    bool gradients_zero = true, weights_zero = true;
    for (int step = 0; step < 10000; ++step) {
        const Parameters g = gradient(mlp, Activation::relu(), theta, data, LossKind::mse);
        for (EdgeId e : cut) gradients_zero = gradients_zero && g[e] == 0.0;
        theta = gf_step(theta, g, 1e-3);
        for (EdgeId e : cut) weights_zero = weights_zero && theta[e] == 0.0;
    }
    report("6 cut-edge gradients exactly zero for 1e4 steps", gradients_zero);
    report("6 cut edges remain bit-zero for 1e4 steps", weights_zero);
}

// ---- 7. rank preserved from generic initializations --------------------------

void criterion_7() {
    const Dag mlp = mlp_dag({2, 4, 1});
    const Dataset data = sum_dataset(64, 11);
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(5005 + seed);
        Parameters theta = random_theta(rng, mlp);
        bool full_rank = true;
        for (int step = 0; step < 10000; ++step) {
            theta = gf_step(theta,
                            gradient(mlp, Activation::relu(), theta, data, LossKind::mse), 1e-3);
            if (step % 100 == 0)
                full_rank = full_rank && rank_via_topology(mlp, theta, 0.0) == 4;
        }
        full_rank = full_rank && rank_via_topology(mlp, theta, 0.0) == 4;
        if (full_rank) ++ok;
    }
    report("7 topological rank stays full over 1e4 steps x 20 seeds", ok == 20,
           std::to_string(ok) + "/20");
}

// ---- 8. every balance is reachable -------------------------------------------

void criterion_8() {
    std::mt19937_64 rng(6006);
    int ok = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Dag dag = random_dag(rng);
        BalanceVector c(dag.hidden().size());
        for (double& v : c) v = uniform(rng, -10.0, 10.0);
        const Parameters theta = feasible_construct(dag, c);
        bool nonneg = true;
        for (double t : theta) nonneg = nonneg && t >= 0.0;
        if (nonneg && max_abs_diff(balance(dag, theta), c) <= 1e-9) ++ok;
    }
    report("8 feasible_construct residual <= 1e-9 with theta >= 0 (100 draws)", ok == 100,
           std::to_string(ok) + "/100");
}

// ---- 9 + 10. nuclear regularization disconnects neurons; pruning is lossless --

struct Shallow20Run {
    Parameters theta;
    int disconnected;  // sigma <= 1e-3 at the end
};

Shallow20Run run_shallow20(const Dag& net, const Dataset& train_data, Regularizer reg,
                           double alpha, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.steps = 6000;
    cfg.lr = 1e-3;
    cfg.loss = LossKind::logistic;
    cfg.reg = reg;
    cfg.alpha = alpha;
    cfg.seed = seed;
    cfg.init = InitScheme::uniform(-0.5, 0.5);
    cfg.log_every = 6000;  // only the final snapshot matters here

    const TrainResult r = train(net, train_data, cfg);
    return {r.theta, r.record.snapshots.back().null_sigma_count};
}

void criteria_9_10() {
    const Dag net = mlp_dag({2, 20, 1});
    const Dataset train_data = diag_dataset(256, 123);
    const Dataset test_data = diag_dataset(512, 321);

    double nuclear_avg = 0.0;
    int l2_total = 0, none_total = 0;
    bool lossless_ok = true, vanilla_worse = true;
    double worst_change = 0.0;

    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Shallow20Run nuc = run_shallow20(net, train_data, Regularizer::nuclear, 0.05, seed);
        const Shallow20Run l2 = run_shallow20(net, train_data, Regularizer::l2, 0.01, seed);
        const Shallow20Run none = run_shallow20(net, train_data, Regularizer::none, 0.0, seed);
        nuclear_avg += nuc.disconnected;
        l2_total += l2.disconnected;
        none_total += none.disconnected;

        // 10: drop every neuron flagged disconnected at tau_zero = 1e-3
        const auto dead_sets = disconnected_sets(net, nuc.theta, kDefaultTauZero);
        std::vector<NodeId> dead;
        for (const auto& s : dead_sets) dead.insert(dead.end(), s.begin(), s.end());

        const double before = loss(net, Activation::relu(), nuc.theta, test_data,
                                   LossKind::logistic);
        const PruneOutcome pruned = prune_nodes(net, nuc.theta, dead);
        const double after = loss(pruned.dag, Activation::relu(), pruned.theta, test_data,
                                  LossKind::logistic);
        const double change = std::abs(after - before);
        worst_change = std::max(worst_change, change);
        lossless_ok = lossless_ok && change <= 1e-4;

        // same removal count from the unregularized run hits live neurons
        const double none_before =
            loss(net, Activation::relu(), none.theta, test_data, LossKind::logistic);
        const PruneOutcome none_pruned =
            prune_neurons(net, none.theta, PruneOrder::s, static_cast<int>(dead.size()));
        const double none_after = loss(none_pruned.dag, Activation::relu(), none_pruned.theta,
                                       test_data, LossKind::logistic);
        vanilla_worse = vanilla_worse && std::abs(none_after - none_before) > change;
    }
    nuclear_avg /= 10.0;

    report("9 nuclear run disconnects >= 10/20 neurons (avg over 10 seeds)", nuclear_avg >= 10.0,
           "avg " + fmt(nuclear_avg));
    report("9 l2 and unregularized runs disconnect none", l2_total == 0 && none_total == 0,
           "l2 " + std::to_string(l2_total) + ", none " + std::to_string(none_total));
    report("10 pruning flagged neurons moves test loss <= 1e-4", lossless_ok,
           "worst " + fmt(worst_change));
    report("10 vanilla nets degrade strictly more under equal-count pruning", vanilla_worse);
}

// ---- 11. null model ----------------------------------------------------------

void criterion_11() {
    const Dag chain = chain_dag(1);
    const auto exact_chain = null_model(chain, 0.5, NullModelMode::exact());
    report("11 chain tail P(>=1) at p=1/2 equals 3/4 exactly",
           std::abs(exact_chain[1].second - 0.75) < 1e-15, fmt(exact_chain[1].second));

    std::mt19937_64 rng(7007);
    int graphs = 0, ok = 0, comparisons = 0;
    while (graphs < 20) {
        const Dag dag = random_dag(rng, 4);
        if (dag.num_edges() > 15) continue;
        ++graphs;
        const double p = uniform(rng, 0.1, 0.9);
        const long n = 100000;
        const auto exact = null_model(dag, p, NullModelMode::exact());
        const auto mc = null_model(dag, p, NullModelMode::monte_carlo(n, rng()));
        for (std::size_t k = 0; k < exact.size(); ++k) {
            const double pe = exact[k].second;
            const double se = std::sqrt(pe * (1.0 - pe) / static_cast<double>(n));
            ++comparisons;
            if (std::abs(mc[k].second - pe) <= 3.0 * se + 1e-12) ++ok;
        }
    }
    report("11 monte carlo within 3 standard errors of exact on 20 graphs", ok == comparisons,
           std::to_string(ok) + "/" + std::to_string(comparisons));
}

// ---- 12. nuclear-norm gradient -----------------------------------------------

void criterion_12() {
    std::mt19937_64 rng(8008);
    int checked = 0, ok = 0;
    while (checked < 50) {
        const Dag dag = random_dag(rng, 5);
        const ReducedIncidence bt = reduced_incidence(dag);
        const Parameters theta = random_theta(rng, dag, 0.3, 2.0);

        const auto sv = singular_values(jacobian(bt, theta));
        bool separated = !sv.empty() && sv.back() > 1e-3;
        for (std::size_t i = 0; i + 1 < sv.size(); ++i)
            separated = separated && sv[i] - sv[i + 1] > 1e-3;
        if (!separated) continue;
        ++checked;

        const NuclearNormResult r = nuclear_norm_and_grad(bt, theta);
        const auto fd = central_difference(
            [&](const Parameters& t) { return nuclear_norm_and_grad(bt, t).value; }, theta);
        double scale = 1e-9;
        for (double v : fd) scale = std::max(scale, std::abs(v));
        double worst = 0.0;
        for (std::size_t e = 0; e < fd.size(); ++e)
            worst = std::max(worst, std::abs(r.grad[e] - fd[e]));
        if (worst <= 1e-4 * scale) ++ok;
    }
    report("12 nuclear gradient matches finite differences at 50 generic points", ok == 50,
           std::to_string(ok) + "/50");
}

}  // namespace

int main() {
    struct Timed {
        const char* name;
        void (*fn)();
    };
    const std::vector<Timed> checks = {
        {"conservation", criterion_1}, {"backends", criterion_2},   {"mlp-rule", criterion_3},
        {"obstruction", criterion_4},  {"rank-formula", criterion_5}, {"invariance", criterion_6},
        {"rank-preserved", criterion_7}, {"non-empty", criterion_8}, {"induction+pruning",
                                                                      criteria_9_10},
        {"null-model", criterion_11},  {"nuclear-grad", criterion_12}};

    for (const Timed& c : checks) {
        const double t0 = now_seconds();
        c.fn();
        std::printf("       (%s: %.2fs)\n", c.name, now_seconds() - t0);
    }
    if (g_failures > 0) {
        std::printf("%d acceptance check(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all acceptance checks passed\n");
    return 0;
}
