// Command-line driver: train, evaluate, and curvature-sweep temporal graph
// models, and generate synthetic datasets.
//
// Exit codes: 0 success, 1 usage/general error, 2 dataset missing or
// malformed, 3 non-finite training loss (last good checkpoint retained),
// 4 checkpoint/config mismatch.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "hvgnn/hvgnn.hpp"

namespace {

struct FlagCapture {
    std::map<std::string, std::string> kv;
    void set(const std::string& key, const std::string& value) { kv[key] = value; }
};

void add_common_flags(CLI::App* cmd, std::string& config_path, FlagCapture& flags) {
    cmd->add_option("--config", config_path, "key=value config file (flags override it)");
    auto opt = [cmd, &flags](const std::string& flag, const std::string& key, const std::string& help) {
        cmd->add_option_function<std::string>(
            flag, [&flags, key](const std::string& v) { flags.set(key, v); }, help);
    };
    opt("--data", "data", "edge-list CSV path");
    opt("--labels", "labels", "node,label CSV path");
    cmd->add_option_function<std::string>(
           "--geometry", [&flags](const std::string& v) { flags.set("geometry", v); },
           "model geometry")
        ->check(CLI::IsMember({"hvgnn", "evgnn", "tgnn_l", "tgnn_r"}));
    opt("--dim", "dim", "embedding dimension (even)");
    opt("--layers", "layers", "stacked attention layers");
    opt("--logk", "logk", "log curvature parameter K");
    cmd->add_flag_function(
        "--trainable-k", [&flags](std::int64_t) { flags.set("trainable_k", "1"); }, "learn K = exp(kappa)");
    opt("--lr", "lr", "learning rate");
    opt("--epochs", "epochs", "epoch budget");
    opt("--steps", "steps", "cap on total optimizer steps (0 = use epochs)");
    opt("--batch", "batch", "positive edges per step");
    opt("--seed", "seed", "run seed (full determinism)");
    opt("--max-neighbors", "max_neighbors", "most recent past events per node");
    opt("--out", "out", "output directory");
    cmd->add_option_function<std::string>(
           "--split", [&flags](const std::string& v) { flags.set("split", v); }, "evaluation split")
        ->check(CLI::IsMember({"transductive", "inductive"}));
    opt("--checkpoint", "checkpoint", "checkpoint path (eval)");
    opt("--fd-r", "fd_r", "Fermi-Dirac radius");
    opt("--fd-t", "fd_t", "Fermi-Dirac temperature");
    opt("--n-mc", "n_mc", "Monte Carlo samples per node per step");
    cmd->add_flag_function(
        "--remap-ids", [&flags](std::int64_t) { flags.set("remap_ids", "1"); },
        "densify arbitrary id tokens (DBLP-style exports)");
    opt("--logk-grid", "logk_grid", "comma-separated log K grid (sweep)");
    // gen-synthetic settings
    opt("--communities", "communities", "synthetic: number of communities");
    opt("--nodes", "nodes", "synthetic: number of nodes");
    opt("--events", "events", "synthetic: number of events");
    opt("--p-in", "p_in", "synthetic: intra-community odds");
    opt("--p-out", "p_out", "synthetic: inter-community odds");
}

hvgnn::RunConfig build_config(const std::string& config_path, const FlagCapture& flags) {
    hvgnn::RunConfig rc;
    if (!config_path.empty()) hvgnn::apply_config(rc, hvgnn::parse_config_file(config_path));
    hvgnn::apply_config(rc, flags.kv); // flags win
    return rc;
}

int dispatch(const std::string& cmd, const hvgnn::RunConfig& rc) {
    using namespace hvgnn;
    if (cmd == "gen-synthetic") return cmd_gen_synthetic(rc);
    if (rc.data_path.empty()) {
        std::cerr << "error: no dataset given (--data)\n";
        return 2;
    }
    TemporalGraph g;
    try {
        g = load_dataset(rc);
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (cmd == "train") return cmd_train(rc, g);
    if (cmd == "eval") return cmd_eval(rc, g);
    if (cmd == "sweep-curvature") return cmd_sweep(rc, g);
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hyperbolic variational temporal graph networks"};
    app.require_subcommand(1);

    std::string config_path;
    FlagCapture flags;
    const char* names[] = {"train", "eval", "sweep-curvature", "gen-synthetic"};
    const char* descs[] = {"fit a model and write metrics + checkpoint", "score a checkpoint on a split",
                           "train and evaluate across a log K grid", "write a synthetic temporal graph"};
    for (int i = 0; i < 4; ++i) add_common_flags(app.add_subcommand(names[i], descs[i]), config_path, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        const hvgnn::RunConfig rc = build_config(config_path, flags);
        for (int i = 0; i < 4; ++i)
            if (app.get_subcommand(names[i])->parsed()) return dispatch(names[i], rc);
        return 1;
    } catch (const hvgnn::training_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const hvgnn::configuration_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        const std::string what = e.what();
        return what.find("load_checkpoint") != std::string::npos ? 4 : 1;
    } catch (const hvgnn::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const hvgnn::input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const hvgnn::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
