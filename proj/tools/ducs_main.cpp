// ducs: train-dynamics | select | retrain-eval | experiment | trace inspect |
//       report render
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure,
// 5 partial experiment failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <json.hpp>

#include "ducs/errors.hpp"
#include "ducs/harness.hpp"
#include "ducs/kvfile.hpp"

namespace {

using namespace ducs;

struct DatasetFlags {
    std::string spec;
    double train_frac = 0.8;
    double val_frac = 0.1;
    std::uint64_t split_seed = 42;
    std::uint32_t classes = 0;

    void attach(CLI::App* cmd, bool required) {
        auto* opt = cmd->add_option("--dataset", spec,
                                    "idx:IMAGES,LABELS | csv:PATH:LABELCOL | blobs:SPEC");
        if (required) opt->required();
        cmd->add_option("--train-frac", train_frac, "train split fraction");
        cmd->add_option("--val-frac", val_frac, "validation split fraction");
        cmd->add_option("--split-seed", split_seed, "split shuffle seed");
        cmd->add_option("--classes", classes, "override inferred class count");
    }

    DatasetOptions options() const {
        DatasetOptions parsed = DatasetOptions::parse(spec);
        parsed.train_frac = train_frac;
        parsed.val_frac = val_frac;
        parsed.split_seed = split_seed;
        parsed.class_override = classes;
        return parsed;
    }
};

struct SelectFlags {
    std::string method = "ducs";
    double beta = 0.1;
    std::uint32_t window_start = 0;
    std::uint32_t window_k = 10;
    std::string w_mode = "range";
    bool grid_search = false;
    std::uint32_t grid_step = 10;

    void attach(CLI::App* cmd) {
        cmd->add_option("--method", method, "ducs|random|entropy|forgetting|el2n|aum");
        cmd->add_option("--beta", beta, "selection ratio in (0,1]");
        cmd->add_option("--window-start", window_start,
                        "1-based window start epoch (0 = latest window)");
        cmd->add_option("--window-k", window_k, "sliding window length");
        cmd->add_option("--w-mode", w_mode, "range|zscore|fixed:F");
        cmd->add_flag("--grid-search", grid_search,
                      "grid-search the window start (needs --dataset and --config)");
        cmd->add_option("--grid-step", grid_step, "grid search step");
    }

    SelectOptions options(std::uint64_t seed) const {
        SelectOptions parsed;
        parsed.method = parse_method(method);
        parsed.beta = beta;
        parsed.window_start = window_start;
        parsed.window_k = window_k;
        parsed.w_mode = WSpec::parse(w_mode);
        parsed.grid_search = grid_search;
        parsed.grid_step = grid_step;
        parsed.seed = seed;
        return parsed;
    }
};

TrainConfig load_config(const std::string& path, bool seed_given,
                        std::uint64_t seed) {
    TrainConfig config = TrainConfig::from_file(path);
    if (seed_given) config.seed = seed;
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"DUCS: dynamic unreliability-driven coreset selection"};
    app.require_subcommand(1);
    int exit_code = 0;

    // --- train-dynamics ---------------------------------------------------
    auto* cmd_train = app.add_subcommand(
        "train-dynamics", "train the surrogate and record per-epoch dynamics");
    struct {
        std::string config;
        std::string out;
        std::uint64_t seed = 0;
        bool extended = false;
        DatasetFlags dataset;
    } train_args;
    cmd_train->add_option("--config", train_args.config, "train config file")
        ->required();
    train_args.dataset.attach(cmd_train, true);
    cmd_train->add_option("--out", train_args.out, "trace output path")->required();
    auto* train_seed_opt =
        cmd_train->add_option("--seed", train_args.seed, "override config seed");
    cmd_train->add_flag("--extended-trace", train_args.extended,
                        "also record probability channels (DUCSTRC2)");
    cmd_train->callback([&] {
        const TrainConfig config = load_config(
            train_args.config, train_seed_opt->count() > 0, train_args.seed);
        const DatasetBundle bundle = harness::load_dataset(train_args.dataset.options());
        const harness::SurrogateRun run =
            harness::train_dynamics(bundle, config, train_args.extended, &std::cout);
        dynamics::write_trace(run.trace, train_args.out);
        std::cout << "trace written to " << train_args.out << "\n";
    });

    // --- select -----------------------------------------------------------
    auto* cmd_select = app.add_subcommand("select", "score a trace and select a coreset");
    struct {
        std::string trace;
        std::string out;
        std::string report_csv;
        std::string config;
        std::uint64_t seed = 1;
        DatasetFlags dataset;
        SelectFlags select;
    } select_args;
    cmd_select->add_option("--trace", select_args.trace, "trace file")->required();
    cmd_select->add_option("--out", select_args.out, "coreset output path")->required();
    cmd_select->add_option("--report-csv", select_args.report_csv,
                           "scores CSV path (default: <out>.scores.csv)");
    cmd_select->add_option("--config", select_args.config,
                           "train config (grid-search evaluator)");
    cmd_select->add_option("--seed", select_args.seed,
                           "seed for the random baseline / grid evaluator");
    select_args.dataset.attach(cmd_select, false);
    select_args.select.attach(cmd_select);
    cmd_select->callback([&] {
        const TrainingTrace trace = dynamics::read_trace(select_args.trace);
        DatasetBundle bundle;
        const bool have_dataset = !select_args.dataset.spec.empty();
        if (have_dataset) bundle = harness::load_dataset(select_args.dataset.options());
        TrainConfig config;
        const bool have_config = !select_args.config.empty();
        if (have_config) config = TrainConfig::from_file(select_args.config);
        const harness::SelectionResult result = harness::run_select(
            trace, select_args.select.options(select_args.seed),
            have_dataset ? &bundle : nullptr, have_config ? &config : nullptr);
        result.coreset.to_file(select_args.out);
        const std::string csv_path = select_args.report_csv.empty()
                                         ? select_args.out + ".scores.csv"
                                         : select_args.report_csv;
        if (result.is_ducs) {
            selection::write_report_csv(result.report, csv_path);
        } else {
            selection::write_scores_csv(result.scores, csv_path);
        }
        std::cout << "selected " << result.coreset.size << " of "
                  << trace.sample_count << " samples (scorer "
                  << result.coreset.scorer_name << ", window "
                  << result.coreset.window_start << "," << result.coreset.window_k
                  << ", w " << result.coreset.w << ")\n";
    });

    // --- retrain-eval -----------------------------------------------------
    auto* cmd_retrain =
        app.add_subcommand("retrain-eval", "retrain on a coreset and evaluate");
    struct {
        std::string coreset;
        std::string config;
        std::string out;
        std::vector<std::uint64_t> seeds{1, 2, 3};
        DatasetFlags dataset;
    } retrain_args;
    retrain_args.dataset.attach(cmd_retrain, true);
    cmd_retrain->add_option("--coreset", retrain_args.coreset, "coreset file")
        ->required();
    cmd_retrain->add_option("--config", retrain_args.config, "train config file")
        ->required();
    cmd_retrain->add_option("--seeds", retrain_args.seeds, "retrain seeds")
        ->delimiter(',');
    cmd_retrain->add_option("--out", retrain_args.out, "JSON fragment output path");
    cmd_retrain->callback([&] {
        const DatasetBundle bundle =
            harness::load_dataset(retrain_args.dataset.options());
        const CoresetSpec coreset = CoresetSpec::from_file(retrain_args.coreset);
        const TrainConfig config = TrainConfig::from_file(retrain_args.config);
        const harness::RetrainStats stats = harness::retrain_eval(
            bundle, coreset, config, retrain_args.seeds, &std::cout);
        std::cout << "mean " << stats.mean;
        if (stats.accuracies.size() >= 2) std::cout << " std " << stats.stddev;
        std::cout << " over " << stats.accuracies.size() << " seed(s)\n";
        if (!retrain_args.out.empty()) {
            nlohmann::json fragment;
            fragment["scorer"] = coreset.scorer_name;
            fragment["beta"] = coreset.beta;
            fragment["M"] = coreset.size;
            fragment["seeds"] = retrain_args.seeds;
            fragment["accuracies"] = stats.accuracies;
            fragment["mean"] = stats.mean;
            if (stats.accuracies.size() >= 2) {
                fragment["std"] = stats.stddev;
            } else {
                fragment["std"] = nullptr;
            }
            std::ofstream out(retrain_args.out);
            if (!out) throw DataError("cannot write " + retrain_args.out);
            out << fragment.dump(2) << "\n";
        }
    });

    // --- experiment ---------------------------------------------------------
    auto* cmd_experiment = app.add_subcommand(
        "experiment", "full benchmark: train, select, retrain per method/beta/seed");
    struct {
        std::string config;
        std::string out;
        std::vector<std::string> methods{"ducs", "random"};
        std::vector<double> betas{0.05};
        std::vector<std::uint64_t> seeds{1, 2, 3};
        bool extended = false;
        DatasetFlags dataset;
        SelectFlags select;
    } exp_args;
    exp_args.dataset.attach(cmd_experiment, true);
    cmd_experiment->add_option("--config", exp_args.config, "train config file")
        ->required();
    cmd_experiment->add_option("--out", exp_args.out, "output directory")->required();
    cmd_experiment->add_option("--methods", exp_args.methods, "scorers to compare")
        ->delimiter(',');
    cmd_experiment->add_option("--betas", exp_args.betas, "selection ratios")
        ->delimiter(',');
    cmd_experiment->add_option("--seeds", exp_args.seeds, "experiment seeds")
        ->delimiter(',');
    cmd_experiment->add_flag("--extended-trace", exp_args.extended,
                             "record probability channels in traces");
    exp_args.select.attach(cmd_experiment);
    cmd_experiment->callback([&] {
        ExperimentOptions options;
        options.dataset = exp_args.dataset.options();
        options.config = TrainConfig::from_file(exp_args.config);
        for (const auto& name : exp_args.methods) {
            options.methods.push_back(parse_method(name));
        }
        options.betas = exp_args.betas;
        options.seeds = exp_args.seeds;
        options.select = exp_args.select.options(1);
        options.extended_trace = exp_args.extended;
        options.out_dir = exp_args.out;
        const int failed = harness::run_experiment(options, std::cout);
        if (failed > 0) exit_code = 5;
    });

    // --- trace inspect ------------------------------------------------------
    auto* cmd_trace = app.add_subcommand("trace", "trace file utilities");
    cmd_trace->require_subcommand(1);
    auto* cmd_inspect = cmd_trace->add_subcommand(
        "inspect", "dump per-sample final F, last-window V and last d");
    struct {
        std::string trace;
        std::string out;
        std::uint32_t window_k = 10;
    } inspect_args;
    cmd_inspect->add_option("--trace", inspect_args.trace, "trace file")->required();
    cmd_inspect->add_option("--window-k", inspect_args.window_k, "window length");
    cmd_inspect->add_option("--out", inspect_args.out, "output path (default stdout)");
    cmd_inspect->callback([&] {
        const TrainingTrace trace = dynamics::read_trace(inspect_args.trace);
        if (inspect_args.out.empty()) {
            dynamics::inspect(trace, std::cout, inspect_args.window_k);
        } else {
            std::ofstream out(inspect_args.out);
            if (!out) throw DataError("cannot write " + inspect_args.out);
            dynamics::inspect(trace, out, inspect_args.window_k);
        }
    });

    // --- report render --------------------------------------------------------
    auto* cmd_report = app.add_subcommand("report", "report utilities");
    cmd_report->require_subcommand(1);
    auto* cmd_render = cmd_report->add_subcommand(
        "render", "regenerate the accuracy CSV and the (F,V) scatter");
    struct {
        std::string report;
        std::string out_csv;
        std::string scores;
        std::string coreset;
        std::string out_svg;
    } render_args;
    cmd_render->add_option("--report", render_args.report, "report.json path");
    cmd_render->add_option("--out-csv", render_args.out_csv,
                           "accuracy table CSV output");
    cmd_render->add_option("--scores", render_args.scores, "index,V,F,U scores CSV");
    cmd_render->add_option("--coreset", render_args.coreset,
                           "coreset file marking selected points");
    cmd_render->add_option("--out-svg", render_args.out_svg, "scatter SVG output");
    cmd_render->callback([&] {
        const bool render_csv = !render_args.report.empty();
        const bool render_svg = !render_args.scores.empty();
        if (!render_csv && !render_svg) {
            throw UsageError("report render needs --report and/or --scores");
        }
        if (render_csv) {
            if (render_args.out_csv.empty()) {
                throw UsageError("--report needs --out-csv");
            }
            harness::render_table_csv(render_args.report, render_args.out_csv);
        }
        if (render_svg) {
            if (render_args.out_svg.empty()) {
                throw UsageError("--scores needs --out-svg");
            }
            harness::render_scatter_from_csv(render_args.scores, render_args.coreset,
                                             render_args.out_svg);
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
