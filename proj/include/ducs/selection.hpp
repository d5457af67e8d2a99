#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ducs/dynamics.hpp"

namespace ducs {

/// Per-sample unreliability decomposition: U = w * F + V over a fixed
/// confidence window, F taken at the final epoch.
struct UnreliabilityReport {
    std::vector<double> V;
    std::vector<double> F;
    std::vector<double> U;
    double w = 0.0;
    std::uint32_t window_start = 0; // 1-based epoch
    std::uint32_t window_k = 0;
};

/// How the temperature coefficient w aligns the F and V scales.
struct WSpec {
    enum class Mode { Range, ZScore, Fixed };
    Mode mode = Mode::Range;
    double fixed_value = 1.0;

    static WSpec parse(const std::string& text); // range | zscore | fixed:<v>
    std::string str() const;
};

struct CoresetSpec {
    double beta = 0.0;
    std::uint32_t size = 0;
    std::vector<std::uint32_t> indices; // rank order (descending score)
    std::string scorer_name;
    std::uint32_t window_start = 0;
    std::uint32_t window_k = 0;
    double w = 0.0;
    std::uint64_t fingerprint = 0;

    static constexpr const char* kTieRule = "U desc, then F desc, then index asc";

    void to_file(const std::string& path) const;
    static CoresetSpec from_file(const std::string& path);
};

enum class ScoreMethod { Ducs, Random, Entropy, Forgetting, El2n, Aum };

ScoreMethod parse_method(const std::string& text);
std::string method_name(ScoreMethod method);

namespace selection {

UnreliabilityReport unreliability_scores(const TrainingTrace& trace,
                                         std::uint32_t window_start,
                                         std::uint32_t k, const WSpec& w_mode);

/// Indices of the ceil(beta * N) largest U, descending; ties broken by
/// higher F, then lower index.
CoresetSpec select_top(const UnreliabilityReport& report, double beta,
                       const std::string& scorer_name = "ducs");

/// Enumerates window starts {1, 1+grid_step, ...} up to T-k+1, scores and
/// selects at each, and returns the start whose coreset maximizes the
/// supplied evaluator (validation accuracy); ties go to the latest window.
std::uint32_t window_grid_search(
    const TrainingTrace& trace, std::uint32_t k, std::uint32_t grid_step,
    double beta, const WSpec& w_mode,
    const std::function<double(const CoresetSpec&)>& evaluator);

/// Baseline scorers; higher score = selected first. Random draws from the
/// seeded generator; entropy/el2n/aum need extended-trace channels, and
/// el2n additionally needs the dataset labels.
std::vector<double> baseline_scores(const TrainingTrace& trace,
                                    ScoreMethod method, std::uint64_t seed,
                                    const std::vector<std::int32_t>* labels);

/// CSV exports: `index,V,F,U` for DUCS, `index,score` for baselines.
void write_report_csv(const UnreliabilityReport& report, const std::string& path);
void write_scores_csv(const std::vector<double>& scores, const std::string& path);

} // namespace selection
} // namespace ducs
