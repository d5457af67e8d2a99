#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ducs/data.hpp"
#include "ducs/dynamics.hpp"
#include "ducs/model.hpp"
#include "ducs/selection.hpp"

namespace ducs {

/// Parsed form of the --dataset flag:
///   idx:IMAGES,LABELS | csv:PATH:LABELCOL | blobs:SPEC
/// plus the split configuration shared by every phase of a run.
struct DatasetOptions {
    enum class Kind { Idx, Csv, Blobs };
    Kind kind = Kind::Blobs;
    std::string images_path;
    std::string labels_path;
    std::string csv_path;
    std::string label_column;
    BlobSpec blobs;
    std::string raw; // verbatim flag value, echoed into reports
    double train_frac = 0.8;
    double val_frac = 0.1;
    std::uint64_t split_seed = 42;
    std::uint32_t class_override = 0;

    static DatasetOptions parse(const std::string& flag_value);
};

struct SelectOptions {
    ScoreMethod method = ScoreMethod::Ducs;
    double beta = 0.1;
    std::uint32_t window_start = 0; // 0 = latest window T-k+1
    std::uint32_t window_k = 10;
    WSpec w_mode;
    bool grid_search = false;
    std::uint32_t grid_step = 10;
    std::uint64_t seed = 1; // random baseline and grid evaluator
};

struct ExperimentOptions {
    DatasetOptions dataset;
    TrainConfig config;
    std::vector<ScoreMethod> methods;
    std::vector<double> betas;
    std::vector<std::uint64_t> seeds;
    SelectOptions select;
    bool extended_trace = false;
    std::string out_dir;
};

namespace harness {

/// Loads per DatasetOptions and applies the stratified split.
DatasetBundle load_dataset(const DatasetOptions& options);

struct SurrogateRun {
    TrainingTrace trace;
    MlpClassifier model;
};

/// Trains the surrogate on the train split for config.epochs and records the
/// per-epoch dynamics of every training sample.
SurrogateRun train_dynamics(const DatasetBundle& bundle, const TrainConfig& config,
                            bool extended, std::ostream* log);

struct SelectionResult {
    CoresetSpec coreset;
    UnreliabilityReport report;  // populated for DUCS
    std::vector<double> scores;  // populated for baselines
    bool is_ducs = false;
};

/// Scores the trace and selects the coreset. `dataset` is optional except
/// for el2n (labels) and grid search (retrain evaluator); when present its
/// fingerprint must match the trace. `retrain_config` powers grid search.
SelectionResult run_select(const TrainingTrace& trace, const SelectOptions& options,
                           const DatasetBundle* dataset,
                           const TrainConfig* retrain_config);

/// Retrains on the coreset rows with a fresh seed and evaluates on the given
/// split of the same bundle. Fingerprints must match.
double retrain_accuracy(const DatasetBundle& bundle, const CoresetSpec& coreset,
                        const TrainConfig& config, std::uint64_t seed,
                        Split eval_split);

struct RetrainStats {
    std::vector<double> accuracies;
    double mean = 0.0;
    double stddev = 0.0; // population std; meaningful for >= 2 seeds
};

RetrainStats retrain_eval(const DatasetBundle& bundle, const CoresetSpec& coreset,
                          const TrainConfig& config,
                          std::span<const std::uint64_t> seeds, std::ostream* log);

/// Full benchmark: per seed, train dynamics once, run every (method, beta)
/// selection, retrain each coreset, and write trace/coreset/CSV/JSON/SVG
/// artifacts under options.out_dir. Returns the number of failed cells;
/// failures are recorded in the report and do not stop the run.
int run_experiment(const ExperimentOptions& options, std::ostream& log);

/// (F, V) scatter with selected points marked; V on a log axis.
void write_scatter_svg(const std::string& path, const std::vector<double>& F,
                       const std::vector<double>& V,
                       const std::vector<std::uint32_t>& selected);

/// `report render` backends: regenerate the accuracy-table CSV from a report
/// JSON, and the scatter SVG from an index,V,F,U scores CSV.
void render_table_csv(const std::string& report_json_path,
                      const std::string& out_csv_path);
void render_scatter_from_csv(const std::string& scores_csv_path,
                             const std::string& coreset_path,
                             const std::string& out_svg_path);

} // namespace harness
} // namespace ducs
