#include "ducs/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ducs/errors.hpp"
#include "ducs/kvfile.hpp"

namespace ducs {

DatasetOptions DatasetOptions::parse(const std::string& flag_value) {
    DatasetOptions options;
    options.raw = flag_value;
    if (flag_value.rfind("idx:", 0) == 0) {
        options.kind = Kind::Idx;
        const std::string rest = flag_value.substr(4);
        const auto comma = rest.find(',');
        if (comma == std::string::npos) {
            throw UsageError("--dataset idx needs 'idx:IMAGES,LABELS'");
        }
        options.images_path = rest.substr(0, comma);
        options.labels_path = rest.substr(comma + 1);
    } else if (flag_value.rfind("csv:", 0) == 0) {
        options.kind = Kind::Csv;
        const std::string rest = flag_value.substr(4);
        const auto colon = rest.rfind(':');
        if (colon == std::string::npos) {
            throw UsageError("--dataset csv needs 'csv:PATH:LABELCOL'");
        }
        options.csv_path = rest.substr(0, colon);
        options.label_column = rest.substr(colon + 1);
    } else if (flag_value.rfind("blobs:", 0) == 0) {
        options.kind = Kind::Blobs;
        options.blobs = BlobSpec::parse(flag_value.substr(6));
    } else {
        throw UsageError("--dataset must start with idx:, csv: or blobs:, got '" +
                         flag_value + "'");
    }
    return options;
}

namespace harness {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

double mean_of(const std::vector<double>& values) {
    double sum = 0.0;
    for (const double v : values) sum += v;
    return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

std::string to_hex(std::uint64_t value) {
    std::ostringstream out;
    out << std::hex << value;
    return out.str();
}

double population_std(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    const double mean = mean_of(values);
    double m2 = 0.0;
    for (const double v : values) m2 += (v - mean) * (v - mean);
    return std::sqrt(m2 / static_cast<double>(values.size()));
}

void check_fingerprint(std::uint64_t expected, std::uint64_t actual,
                       const char* what) {
    if (expected != actual) {
        std::ostringstream msg;
        msg << std::hex << what << " fingerprint " << expected
            << " does not match dataset fingerprint " << actual;
        throw DataError(msg.str());
    }
}

std::vector<std::int32_t> train_labels(const DatasetBundle& bundle) {
    std::vector<std::int32_t> labels;
    for (std::uint32_t i = 0; i < bundle.sample_count; ++i) {
        if (bundle.split_tags[i] == Split::Train) labels.push_back(bundle.labels[i]);
    }
    return labels;
}

/// Absolute dataset rows of a coreset: coreset indices address the train
/// split in dataset order; rows come back sorted ascending so a beta = 1
/// coreset reproduces the surrogate run bit for bit.
std::vector<std::uint32_t> coreset_rows(const DatasetBundle& bundle,
                                        const CoresetSpec& coreset) {
    check_fingerprint(coreset.fingerprint, bundle.fingerprint, "coreset");
    const std::vector<std::uint32_t> train_rows = bundle.rows_with(Split::Train);
    std::vector<std::uint32_t> rows;
    rows.reserve(coreset.indices.size());
    for (const std::uint32_t index : coreset.indices) {
        if (index >= train_rows.size()) {
            throw DataError("coreset index " + std::to_string(index) +
                            " outside train split of size " +
                            std::to_string(train_rows.size()));
        }
        rows.push_back(train_rows[index]);
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

std::string format_beta(double beta) { return kvfile::format_double(beta); }

json config_json(const TrainConfig& config) {
    json j;
    j["epochs"] = config.epochs;
    j["batch_size"] = config.batch_size;
    j["learning_rate"] = config.learning_rate;
    j["momentum"] = config.momentum;
    j["seed"] = config.seed;
    j["anneal_epochs"] = config.anneal_epochs;
    j["lambda_max"] = config.lambda_max;
    j["ce_mode"] = to_string(config.ce_mode);
    j["layer_dims"] = config.layer_dims;
    return j;
}

} // namespace

DatasetBundle load_dataset(const DatasetOptions& options) {
    DatasetBundle bundle;
    switch (options.kind) {
        case DatasetOptions::Kind::Idx:
            bundle = data::load_idx(options.images_path, options.labels_path,
                                    options.class_override);
            break;
        case DatasetOptions::Kind::Csv:
            bundle = data::load_csv(options.csv_path, options.label_column,
                                    options.class_override);
            break;
        case DatasetOptions::Kind::Blobs:
            bundle = data::generate_blobs(options.blobs);
            break;
    }
    data::split(bundle, options.train_frac, options.val_frac, options.split_seed);
    return bundle;
}

SurrogateRun train_dynamics(const DatasetBundle& bundle, const TrainConfig& config,
                            bool extended, std::ostream* log) {
    const std::vector<std::uint32_t> train_rows = bundle.rows_with(Split::Train);
    if (train_rows.empty()) throw DataError("train split is empty");
    const std::vector<int> dims =
        config.resolve_layer_dims(bundle.dim, bundle.class_count);

    SurrogateRun run;
    run.model = model::init(dims, config.seed);
    TraceBuilder builder(static_cast<std::uint32_t>(train_rows.size()),
                         bundle.class_count,
                         static_cast<std::uint32_t>(config.epochs), config.seed,
                         bundle.fingerprint, extended);
    Trainer trainer(run.model, config);
    trainer.train({&bundle, train_rows}, &builder, log);
    run.trace = builder.finalize();
    return run;
}

SelectionResult run_select(const TrainingTrace& trace, const SelectOptions& options,
                           const DatasetBundle* dataset,
                           const TrainConfig* retrain_config) {
    if (dataset != nullptr) {
        check_fingerprint(trace.dataset_fingerprint, dataset->fingerprint, "trace");
    }

    SelectionResult result;
    if (options.method == ScoreMethod::Ducs) {
        result.is_ducs = true;
        const std::uint32_t k = std::min(options.window_k, trace.epoch_count);
        std::uint32_t start = options.window_start != 0
                                  ? options.window_start
                                  : trace.epoch_count - k + 1;
        if (options.grid_search) {
            if (dataset == nullptr || retrain_config == nullptr) {
                throw UsageError("--grid-search needs --dataset and --config for "
                                 "the retrain evaluator");
            }
            // Short-budget evaluator: retrain 25 epochs on the candidate
            // coreset, score on the validation split.
            TrainConfig short_config = *retrain_config;
            short_config.epochs = std::min(25, retrain_config->epochs);
            const std::uint64_t eval_seed = options.seed;
            start = selection::window_grid_search(
                trace, k, options.grid_step, options.beta, options.w_mode,
                [&](const CoresetSpec& candidate) {
                    CoresetSpec stamped = candidate;
                    stamped.fingerprint = trace.dataset_fingerprint;
                    return retrain_accuracy(*dataset, stamped, short_config,
                                            eval_seed, Split::Val);
                });
        }
        result.report = selection::unreliability_scores(trace, start, k, options.w_mode);
        result.coreset = selection::select_top(result.report, options.beta, "ducs");
    } else {
        const std::vector<std::int32_t> labels =
            dataset != nullptr ? train_labels(*dataset) : std::vector<std::int32_t>{};
        result.scores = selection::baseline_scores(
            trace, options.method, options.seed,
            dataset != nullptr ? &labels : nullptr);
        UnreliabilityReport wrapped;
        wrapped.V = result.scores;
        wrapped.F.assign(result.scores.size(), 0.0);
        wrapped.U = result.scores;
        wrapped.w = 0.0;
        result.coreset = selection::select_top(wrapped, options.beta,
                                               method_name(options.method));
    }
    result.coreset.fingerprint = trace.dataset_fingerprint;
    return result;
}

double retrain_accuracy(const DatasetBundle& bundle, const CoresetSpec& coreset,
                        const TrainConfig& config, std::uint64_t seed,
                        Split eval_split) {
    const std::vector<std::uint32_t> rows = coreset_rows(bundle, coreset);
    if (rows.empty()) throw DataError("coreset is empty");
    const std::vector<std::uint32_t> eval_rows = bundle.rows_with(eval_split);
    if (eval_rows.empty()) {
        throw DataError(std::string("evaluation split is empty: ") +
                        (eval_split == Split::Val ? "val" : "test"));
    }
    TrainConfig run_config = config;
    run_config.seed = seed;
    const std::vector<int> dims =
        run_config.resolve_layer_dims(bundle.dim, bundle.class_count);
    MlpClassifier net = model::init(dims, seed);
    Trainer trainer(net, run_config);
    trainer.train({&bundle, rows}, nullptr, nullptr);
    return model::evaluate(net, {&bundle, eval_rows});
}

RetrainStats retrain_eval(const DatasetBundle& bundle, const CoresetSpec& coreset,
                          const TrainConfig& config,
                          std::span<const std::uint64_t> seeds, std::ostream* log) {
    if (seeds.empty()) throw UsageError("retrain-eval needs at least one seed");
    RetrainStats stats;
    for (const std::uint64_t seed : seeds) {
        const double acc =
            retrain_accuracy(bundle, coreset, config, seed, Split::Test);
        stats.accuracies.push_back(acc);
        if (log != nullptr) {
            (*log) << "retrain seed " << seed << " test_acc " << acc << "\n";
        }
    }
    stats.mean = mean_of(stats.accuracies);
    stats.stddev = population_std(stats.accuracies);
    return stats;
}

void write_scatter_svg(const std::string& path, const std::vector<double>& F,
                       const std::vector<double>& V,
                       const std::vector<std::uint32_t>& selected) {
    constexpr int kWidth = 800;
    constexpr int kHeight = 600;
    constexpr int kMargin = 60;

    double v_floor = 1e300;
    double v_ceil = 0.0;
    for (const double v : V) {
        if (v > 0.0) v_floor = std::min(v_floor, v);
        v_ceil = std::max(v_ceil, v);
    }
    if (v_ceil <= 0.0) { // all-zero variances: degenerate but plottable
        v_floor = 1e-12;
        v_ceil = 1.0;
    } else {
        v_floor = std::min(v_floor, v_ceil) / 10.0;
    }
    const double log_lo = std::floor(std::log10(v_floor));
    const double log_hi = std::ceil(std::log10(v_ceil));
    const double f_hi = std::max(1e-12, *std::max_element(F.begin(), F.end()));

    const auto x_of = [&](double f) {
        return kMargin + (f / f_hi) * (kWidth - 2 * kMargin);
    };
    const auto y_of = [&](double v) {
        const double lv = std::log10(std::max(v, v_floor));
        const double frac = (lv - log_lo) / std::max(1e-12, log_hi - log_lo);
        return kHeight - kMargin - frac * (kHeight - 2 * kMargin);
    };
    const auto coord = [](double value) {
        char buffer[32];
        std::snprintf(buffer, sizeof(buffer), "%.2f", value);
        return std::string(buffer);
    };

    std::vector<std::uint8_t> is_selected(F.size(), 0);
    for (const std::uint32_t index : selected) {
        if (index < is_selected.size()) is_selected[index] = 1;
    }

    std::ofstream out(path);
    if (!out) throw DataError("cannot write SVG: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\""
        << kWidth - kMargin << "\" y2=\"" << kHeight - kMargin
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin
        << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 15
        << "\" text-anchor=\"middle\" font-size=\"14\">forgetting frequency F</text>\n";
    out << "<text x=\"18\" y=\"" << kHeight / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
        << kHeight / 2 << ")\">confidence variance V (log)</text>\n";
    for (int d = static_cast<int>(log_lo); d <= static_cast<int>(log_hi); ++d) {
        const double y = y_of(std::pow(10.0, d));
        out << "<text x=\"" << kMargin - 6 << "\" y=\"" << coord(y + 4)
            << "\" text-anchor=\"end\" font-size=\"10\">1e" << d << "</text>\n";
    }
    for (double f = 0.0; f <= f_hi + 1e-12; f += f_hi / 4.0) {
        out << "<text x=\"" << coord(x_of(f)) << "\" y=\"" << kHeight - kMargin + 16
            << "\" text-anchor=\"middle\" font-size=\"10\">" << coord(f)
            << "</text>\n";
        if (f_hi / 4.0 <= 0.0) break;
    }

    // unselected first so the selected markers stay visible
    for (std::size_t pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < F.size(); ++i) {
            if (static_cast<std::size_t>(is_selected[i]) != pass) continue;
            out << "<circle cx=\"" << coord(x_of(F[i])) << "\" cy=\""
                << coord(y_of(V[i])) << "\" r=\"" << (pass ? 3 : 2) << "\" fill=\""
                << (pass ? "#d62728" : "#9ecae1") << "\" fill-opacity=\""
                << (pass ? "0.9" : "0.5") << "\"/>\n";
        }
    }
    out << "</svg>\n";
    if (!out) throw DataError("SVG write failed: " + path);
}

namespace {

void write_table_csv_from_json(const json& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write table CSV: " + path);
    out << "method,beta,M,mean,std,n_seeds,status\n";
    const auto& cells = report.at("cells");
    for (auto method_it = cells.begin(); method_it != cells.end(); ++method_it) {
        for (auto beta_it = method_it->begin(); beta_it != method_it->end();
             ++beta_it) {
            const json& cell = *beta_it;
            out << method_it.key() << "," << beta_it.key() << ","
                << cell.at("M").dump() << ",";
            if (cell.at("mean").is_null()) {
                out << ",";
            } else {
                out << kvfile::format_double(cell.at("mean").get<double>()) << ",";
            }
            if (cell.at("std").is_null()) {
                out << ",";
            } else {
                out << kvfile::format_double(cell.at("std").get<double>()) << ",";
            }
            out << cell.at("n_seeds").dump() << ","
                << cell.at("status").get<std::string>() << "\n";
        }
    }
    if (!out) throw DataError("table CSV write failed: " + path);
}

} // namespace

int run_experiment(const ExperimentOptions& options, std::ostream& log) {
    if (options.methods.empty() || options.betas.empty() || options.seeds.empty()) {
        throw UsageError("experiment needs at least one method, beta and seed");
    }
    for (const double beta : options.betas) {
        if (!(beta > 0.0) || beta > 1.0) {
            throw UsageError("beta must be in (0, 1], got " + format_beta(beta));
        }
    }
    fs::create_directories(options.out_dir);
    const auto out_path = [&](const std::string& name) {
        return (fs::path(options.out_dir) / name).string();
    };

    const auto t_start = std::chrono::steady_clock::now();
    double secs_train = 0.0;
    double secs_select = 0.0;
    double secs_retrain = 0.0;
    const auto elapsed = [](auto from) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - from)
            .count();
    };

    const DatasetBundle bundle = load_dataset(options.dataset);
    const std::vector<std::uint32_t> test_rows = bundle.rows_with(Split::Test);
    const std::uint32_t n_train =
        static_cast<std::uint32_t>(bundle.rows_with(Split::Train).size());

    const bool needs_extended =
        options.extended_trace ||
        std::any_of(options.methods.begin(), options.methods.end(),
                    [](ScoreMethod m) {
                        return m == ScoreMethod::Entropy || m == ScoreMethod::El2n ||
                               m == ScoreMethod::Aum;
                    });

    json report;
    report["dataset"] = {
        {"descriptor", options.dataset.raw},
        {"samples", bundle.sample_count},
        {"dim", bundle.dim},
        {"classes", bundle.class_count},
        {"train", n_train},
        {"val", bundle.rows_with(Split::Val).size()},
        {"test", test_rows.size()},
        {"fingerprint", to_hex(bundle.fingerprint)},
    };
    report["config"] = config_json(options.config);
    report["select"] = {
        {"window_k", options.select.window_k},
        {"window_start", options.select.window_start},
        {"w_mode", options.select.w_mode.str()},
        {"grid_search", options.select.grid_search},
        {"grid_step", options.select.grid_step},
    };
    json seeds_json = json::array();
    for (const auto seed : options.seeds) seeds_json.push_back(seed);
    report["seeds"] = seeds_json;
    json betas_json = json::array();
    for (const auto beta : options.betas) betas_json.push_back(beta);
    report["betas"] = betas_json;
    json methods_json = json::array();
    for (const auto method : options.methods) methods_json.push_back(method_name(method));
    report["methods"] = methods_json;

    int failed_cells = 0;
    std::vector<double> reference_accs;
    json cells;
    // cells[method][beta] = {M, accuracies[], errors{}, mean, std, status}
    for (const auto method : options.methods) {
        json per_beta;
        for (const double beta : options.betas) {
            per_beta[format_beta(beta)] = {{"M", nullptr},
                                           {"accuracies", json::array()},
                                           {"errors", json::object()},
                                           {"mean", nullptr},
                                           {"std", nullptr},
                                           {"n_seeds", 0},
                                           {"status", "ok"}};
        }
        cells[method_name(method)] = per_beta;
    }
    const auto mark_failed = [&](ScoreMethod method, double beta,
                                 std::uint64_t seed, const std::string& msg) {
        json& cell = cells[method_name(method)][format_beta(beta)];
        cell["errors"][std::to_string(seed)] = msg;
        cell["status"] = "failed";
        ++failed_cells;
    };

    for (const std::uint64_t seed : options.seeds) {
        log << "=== seed " << seed << " ===\n";
        TrainConfig config = options.config;
        config.seed = seed;

        SurrogateRun surrogate;
        bool trace_ok = true;
        const auto t_train = std::chrono::steady_clock::now();
        try {
            surrogate = train_dynamics(bundle, config, needs_extended, &log);
            dynamics::write_trace(surrogate.trace,
                                  out_path("trace_seed" + std::to_string(seed) + ".trc"));
        } catch (const std::exception& e) {
            trace_ok = false;
            log << "train-dynamics failed for seed " << seed << ": " << e.what()
                << "\n";
            for (const auto method : options.methods) {
                for (const double beta : options.betas) {
                    mark_failed(method, beta, seed, e.what());
                }
            }
        }
        secs_train += elapsed(t_train);
        if (!trace_ok) continue;

        if (!test_rows.empty()) {
            reference_accs.push_back(
                model::evaluate(surrogate.model, {&bundle, test_rows}));
        }

        for (const auto method : options.methods) {
            SelectOptions select = options.select;
            select.method = method;
            select.seed = seed;

            const auto t_select = std::chrono::steady_clock::now();
            SelectionResult scored;
            try {
                // beta applies at select_top below; score once per method.
                select.beta = options.betas.front();
                scored = run_select(surrogate.trace, select, &bundle, &config);
                const std::string tag =
                    method_name(method) + "_seed" + std::to_string(seed);
                if (scored.is_ducs) {
                    selection::write_report_csv(scored.report,
                                                out_path("scores_" + tag + ".csv"));
                } else {
                    selection::write_scores_csv(scored.scores,
                                                out_path("scores_" + tag + ".csv"));
                }
            } catch (const std::exception& e) {
                log << "selection failed for " << method_name(method) << " seed "
                    << seed << ": " << e.what() << "\n";
                for (const double beta : options.betas) {
                    mark_failed(method, beta, seed, e.what());
                }
                secs_select += elapsed(t_select);
                continue;
            }
            secs_select += elapsed(t_select);

            if (scored.is_ducs && seed == options.seeds.front()) {
                // one scatter per run: smallest beta of the first seed
                const double smallest =
                    *std::min_element(options.betas.begin(), options.betas.end());
                const CoresetSpec marked =
                    selection::select_top(scored.report, smallest, "ducs");
                write_scatter_svg(out_path("scatter_seed" + std::to_string(seed) +
                                           ".svg"),
                                  scored.report.F, scored.report.V, marked.indices);
            }

            for (const double beta : options.betas) {
                CoresetSpec coreset;
                try {
                    if (scored.is_ducs) {
                        coreset = selection::select_top(scored.report, beta, "ducs");
                    } else {
                        UnreliabilityReport wrapped;
                        wrapped.V = scored.scores;
                        wrapped.F.assign(scored.scores.size(), 0.0);
                        wrapped.U = scored.scores;
                        coreset = selection::select_top(wrapped, beta,
                                                        method_name(method));
                    }
                    coreset.fingerprint = surrogate.trace.dataset_fingerprint;
                    coreset.to_file(out_path("coreset_" + method_name(method) +
                                             "_beta" + format_beta(beta) + "_seed" +
                                             std::to_string(seed) + ".txt"));
                } catch (const std::exception& e) {
                    mark_failed(method, beta, seed, e.what());
                    continue;
                }

                const auto t_retrain = std::chrono::steady_clock::now();
                try {
                    const double acc =
                        retrain_accuracy(bundle, coreset, config, seed, Split::Test);
                    json& cell = cells[method_name(method)][format_beta(beta)];
                    cell["M"] = coreset.size;
                    cell["accuracies"].push_back(acc);
                    cell["n_seeds"] = cell["accuracies"].size();
                    log << method_name(method) << " beta " << format_beta(beta)
                        << " seed " << seed << " M " << coreset.size << " test_acc "
                        << acc << "\n";
                } catch (const std::exception& e) {
                    log << "retrain failed for " << method_name(method) << " beta "
                        << format_beta(beta) << " seed " << seed << ": " << e.what()
                        << "\n";
                    mark_failed(method, beta, seed, e.what());
                }
                secs_retrain += elapsed(t_retrain);
            }
        }
    }

    for (const auto method : options.methods) {
        for (const double beta : options.betas) {
            json& cell = cells[method_name(method)][format_beta(beta)];
            std::vector<double> accs;
            for (const auto& a : cell["accuracies"]) accs.push_back(a.get<double>());
            if (!accs.empty()) {
                cell["mean"] = mean_of(accs);
                if (accs.size() >= 2) cell["std"] = population_std(accs);
            }
        }
    }
    report["cells"] = cells;

    if (!reference_accs.empty()) {
        json full;
        full["accuracies"] = reference_accs;
        full["mean"] = mean_of(reference_accs);
        if (reference_accs.size() >= 2) {
            full["std"] = population_std(reference_accs);
        } else {
            full["std"] = nullptr;
        }
        report["full_reference"] = full;
    } else {
        report["full_reference"] = nullptr;
    }

    report["wall_clock_s"] = {
        {"train_dynamics", secs_train},
        {"select", secs_select},
        {"retrain", secs_retrain},
        {"total", elapsed(t_start)},
    };

    {
        std::ofstream out(out_path("report.json"));
        if (!out) throw DataError("cannot write report.json");
        out << report.dump(2) << "\n";
    }
    write_table_csv_from_json(report, out_path("accuracy_table.csv"));

    log << "experiment done: " << failed_cells << " failed cell(s), report at "
        << out_path("report.json") << "\n";
    return failed_cells;
}

void render_table_csv(const std::string& report_json_path,
                      const std::string& out_csv_path) {
    std::ifstream in(report_json_path);
    if (!in) throw DataError("cannot open report JSON: " + report_json_path);
    json report;
    try {
        in >> report;
    } catch (const json::exception& e) {
        throw DataError("bad report JSON " + report_json_path + ": " + e.what());
    }
    write_table_csv_from_json(report, out_csv_path);
}

void render_scatter_from_csv(const std::string& scores_csv_path,
                             const std::string& coreset_path,
                             const std::string& out_svg_path) {
    std::ifstream in(scores_csv_path);
    if (!in) throw DataError("cannot open scores CSV: " + scores_csv_path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty scores CSV");
    if (line.rfind("index,V,F,U", 0) != 0) {
        throw DataError("scores CSV " + scores_csv_path +
                        " is not an index,V,F,U report (rescore with method ducs)");
    }
    std::vector<double> V;
    std::vector<double> F;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ','); // index
        std::getline(ls, cell, ',');
        V.push_back(std::stod(cell));
        std::getline(ls, cell, ',');
        F.push_back(std::stod(cell));
    }
    std::vector<std::uint32_t> selected;
    if (!coreset_path.empty()) {
        selected = CoresetSpec::from_file(coreset_path).indices;
    }
    write_scatter_svg(out_svg_path, F, V, selected);
}

} // namespace harness
} // namespace ducs
