// Command-line front end: gen, train, eval, cf, serve.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "countermachine/counterfactual.hpp"
#include "countermachine/data.hpp"
#include "countermachine/json_io.hpp"
#include "countermachine/model_io.hpp"
#include "countermachine/service.hpp"
#include "countermachine/training.hpp"

namespace {

using nlohmann::json;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur.push_back(c);
        }
    }
    if (!cur.empty() || !out.empty()) out.push_back(cur);
    return out;
}

cfm::FeatureVector parse_features(const cfm::TskModel& model, const std::string& text) {
    const auto cells = split_list(text);
    cfm::FeatureVector x(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        double v = 0.0;
        const auto* end = cells[i].data() + cells[i].size();
        const auto res = std::from_chars(cells[i].data(), end, v);
        if (cells[i].empty() || res.ec != std::errc() || res.ptr != end)
            throw UsageError("--features: '" + cells[i] + "' is not a number");
        x(static_cast<Eigen::Index>(i)) = v;
    }
    try {
        cfm::validate_features(model, x);
    } catch (const cfm::Error& e) {
        throw UsageError(std::string("--features: ") + e.what());
    }
    return x;
}

void print_json(const json& doc) { std::cout << doc.dump(2) << '\n'; }

struct GenOptions {
    long rows = 0;
    std::string out;
    double noise = 0.05;
};

struct TrainOptions {
    std::string data;
    std::string out;
    std::size_t train_per_class = 500;
    std::size_t test_per_class = 392;
    cfm::TrainConfig config;
};

struct EvalOptions {
    std::string model;
    std::string features;
};

struct CfOptions {
    std::string model;
    std::string features;
    std::string target;
    std::string free;
    bool realistic_locks = false;
    double margin = 0.1;
    std::string trace_csv;
    bool full_trace = false;
    cfm::AnnealConfig anneal;
};

struct ServeOptions {
    std::string model;
    cfm::ServiceConfig service;
};

int run_gen(const GenOptions& o, std::uint64_t seed) {
    if (o.rows <= 0) throw UsageError("--rows must be > 0");
    if (!(o.noise >= 0.0 && o.noise <= 1.0)) throw UsageError("--noise must be in [0, 1]");
    cfm::GroundTruth truth;
    truth.label_noise = o.noise;
    const auto records = cfm::generate_synthetic(static_cast<std::size_t>(o.rows), seed, truth);
    cfm::save_csv(o.out, records);
    std::size_t war = 0;
    for (const auto& r : records) war += r.label == cfm::Label::War ? 1 : 0;
    std::cerr << "wrote " << records.size() << " rows (" << war << " war) to " << o.out << '\n';
    print_json({{"rows", records.size()}, {"war", war}, {"peace", records.size() - war}, {"seed", seed}, {"out", o.out}});
    return 0;
}

int run_train(TrainOptions o, std::uint64_t seed) {
    o.config.seed = seed;
    try {
        o.config.validate();
    } catch (const cfm::Error& e) {
        throw UsageError(e.what());
    }
    const auto records = cfm::load_csv(o.data);
    const auto dataset = cfm::normalize(records);
    const auto [train, test] = cfm::split_balanced(dataset, o.train_per_class, o.test_per_class, seed);
    const auto fitted = cfm::fit(train.samples(), test.samples(), dataset.feature_names, o.config);
    cfm::save_model(fitted.model, o.out);
    std::cerr << "trained " << fitted.model.n_rules() << " rules on " << train.size() << " rows; test accuracy "
              << fitted.report.test_acc << "; model written to " << o.out << '\n';
    print_json(cfm::to_json(fitted.report));
    return 0;
}

int run_eval(const EvalOptions& o) {
    const auto model = cfm::load_model(o.model);
    const auto x = parse_features(model, o.features);
    const auto eval = cfm::evaluate(model, x);
    const auto label = model.label_encoding().classify(eval.y);
    std::cerr << "y = " << eval.y << " -> " << cfm::to_string(label) << '\n';
    print_json({{"feature_names", model.feature_names()},
                {"y", eval.y},
                {"class", std::string(cfm::to_string(label))},
                {"degenerate_activation", eval.degenerate}});
    return 0;
}

int run_cf(CfOptions o, bool free_given, std::uint64_t seed) {
    if (free_given && o.realistic_locks) throw UsageError("--free and --realistic-locks are mutually exclusive");
    o.anneal.seed = seed;
    const auto model = cfm::load_model(o.model);

    cfm::CounterfactualQuery query;
    query.factual = parse_features(model, o.features);
    try {
        query.desired_consequent = model.label_encoding().value_of(cfm::parse_label(o.target));
        if (free_given)
            query.free_mask = cfm::free_mask_from_names(model.feature_names(), split_list(o.free));
        else if (o.realistic_locks)
            query.free_mask = cfm::realistic_free_mask(model.feature_names());
        else
            query.free_mask.assign(static_cast<std::size_t>(model.n_inputs()), true);
        query.anneal = o.anneal;
        query.success_margin = o.margin;
        cfm::validate_query(model, query);
    } catch (const cfm::Error& e) {
        throw UsageError(e.what());
    }

    const auto result = cfm::find_counterfactual(model, query);
    if (!o.trace_csv.empty()) {
        std::ofstream out(o.trace_csv, std::ios::binary);
        if (!out) throw cfm::Error("cannot open '" + o.trace_csv + "' for writing");
        cfm::write_trace_csv(out, result.trace);
    }
    std::cerr << (result.no_free_variables ? "no free variables; " : "") << "y = " << result.achieved_y << " ("
              << cfm::to_string(result.achieved_class) << "), error = " << result.error
              << (result.success ? ", success" : ", no success") << '\n';
    print_json(cfm::to_json(result, model.feature_names(), o.full_trace));
    return 0;
}

int run_serve(const ServeOptions& o) {
    cfm::Service service(cfm::load_model(o.model));
    std::cerr << "serving " << o.model << " on " << o.service.host << ":" << o.service.port << '\n';
    cfm::run_server(service, o.service);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Counterfactual search over Takagi-Sugeno conflict models"};
    app.set_config("--config", "", "TOML/INI file mirroring the command-line flags");
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    auto add_seed = [&seed](CLI::App* sub) {
        sub->add_option("--seed", seed, "Random seed")->envname("COUNTERMACHINE_SEED");
    };

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dyad CSV");
    gen_cmd->add_option("--rows", gen.rows, "Number of rows")->required();
    gen_cmd->add_option("--out", gen.out, "Output CSV path")->required();
    gen_cmd->add_option("--noise", gen.noise, "Label noise rate")->capture_default_str();
    add_seed(gen_cmd);

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Fit a model and print the training report");
    train_cmd->add_option("--data", train.data, "Input CSV")->required();
    train_cmd->add_option("--out", train.out, "Output model JSON")->required();
    train_cmd->add_option("--train-per-class", train.train_per_class, "Training rows per class")->capture_default_str();
    train_cmd->add_option("--test-per-class", train.test_per_class, "Test rows per class")->capture_default_str();
    train_cmd->add_option("--epochs", train.config.epochs, "Training epochs")->capture_default_str();
    train_cmd->add_option("--mfs", train.config.mfs_per_input, "Membership functions per input")->capture_default_str();
    train_cmd->add_option("--lr", train.config.premise_learning_rate, "Premise learning rate")->capture_default_str();
    train_cmd->add_option("--ridge", train.config.ridge_lambda, "Ridge regularization")->capture_default_str();
    train_cmd->add_option("--rule-cap", train.config.rule_cap, "Maximum grid rule count")->capture_default_str();
    add_seed(train_cmd);

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate the model at one antecedent");
    eval_cmd->add_option("--model", eval.model, "Model JSON")->required();
    eval_cmd->add_option("--features", eval.features, "Comma-separated normalized features")->required();
    add_seed(eval_cmd);

    CfOptions cf;
    auto* cf_cmd = app.add_subcommand("cf", "Search for a counterfactual antecedent");
    cf_cmd->add_option("--model", cf.model, "Model JSON")->required();
    cf_cmd->add_option("--features", cf.features, "Factual antecedent, comma-separated")->required();
    cf_cmd->add_option("--target", cf.target, "Desired consequent")->required()->check(CLI::IsMember({"war", "peace"}));
    auto* free_opt = cf_cmd->add_option("--free", cf.free, "Features the search may change (default: all)");
    cf_cmd->add_flag("--realistic-locks", cf.realistic_locks, "Lock distance, contiguity and major_power");
    cf_cmd->add_option("--t0", cf.anneal.initial_temperature, "Initial temperature")->capture_default_str();
    cf_cmd->add_option("--cooling", cf.anneal.cooling_factor, "Geometric cooling factor")->capture_default_str();
    cf_cmd->add_option("--steps", cf.anneal.steps_per_temperature, "Steps per temperature")->capture_default_str();
    cf_cmd->add_option("--min-temp", cf.anneal.min_temperature, "Stop below this temperature")->capture_default_str();
    cf_cmd->add_option("--scale", cf.anneal.proposal_scale, "Proposal scale")->capture_default_str();
    cf_cmd->add_option("--target-error", cf.anneal.target_error, "Stop at this error")->capture_default_str();
    cf_cmd->add_option("--max-evals", cf.anneal.max_evaluations, "Evaluation budget")->capture_default_str();
    cf_cmd->add_option("--restarts", cf.anneal.restarts, "Independent restarts")->capture_default_str();
    cf_cmd->add_option("--margin", cf.margin, "Success margin from the decision threshold")->capture_default_str();
    cf_cmd->add_option("--trace-csv", cf.trace_csv, "Write the accepted-step trace as CSV");
    cf_cmd->add_flag("--full-trace", cf.full_trace, "Include every trace record in the JSON output");
    add_seed(cf_cmd);

    ServeOptions serve;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the model over HTTP");
    serve_cmd->add_option("--model", serve.model, "Model JSON")->required();
    serve_cmd->add_option("--host", serve.service.host, "Bind address")->capture_default_str();
    serve_cmd->add_option("--port", serve.service.port, "Port")->capture_default_str();
    serve_cmd->add_option("--allow-origin", serve.service.allow_origin, "CORS origin for the explorer UI");
    add_seed(serve_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*gen_cmd) return run_gen(gen, seed);
        if (*train_cmd) return run_train(train, seed);
        if (*eval_cmd) return run_eval(eval);
        if (*cf_cmd) return run_cf(cf, free_opt->count() > 0, seed);
        if (*serve_cmd) return run_serve(serve);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
