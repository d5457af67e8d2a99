#include "ducs/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ducs/errors.hpp"
#include "ducs/kernels.hpp"
#include "ducs/kvfile.hpp"
#include "ducs/rng.hpp"

namespace ducs {

WSpec WSpec::parse(const std::string& text) {
    WSpec spec;
    if (text == "range") {
        spec.mode = Mode::Range;
    } else if (text == "zscore") {
        spec.mode = Mode::ZScore;
    } else if (text.rfind("fixed:", 0) == 0) {
        spec.mode = Mode::Fixed;
        try {
            spec.fixed_value = std::stod(text.substr(6));
        } catch (const std::exception&) {
            throw UsageError("bad w-mode value: '" + text + "'");
        }
    } else {
        throw UsageError("w-mode must be range, zscore or fixed:<value>, got '" +
                         text + "'");
    }
    return spec;
}

std::string WSpec::str() const {
    switch (mode) {
        case Mode::Range: return "range";
        case Mode::ZScore: return "zscore";
        case Mode::Fixed: return "fixed:" + kvfile::format_double(fixed_value);
    }
    return "range";
}

ScoreMethod parse_method(const std::string& text) {
    if (text == "ducs") return ScoreMethod::Ducs;
    if (text == "random") return ScoreMethod::Random;
    if (text == "entropy") return ScoreMethod::Entropy;
    if (text == "forgetting") return ScoreMethod::Forgetting;
    if (text == "el2n") return ScoreMethod::El2n;
    if (text == "aum") return ScoreMethod::Aum;
    throw UsageError("unknown method '" + text +
                     "' (expected ducs|random|entropy|forgetting|el2n|aum)");
}

std::string method_name(ScoreMethod method) {
    switch (method) {
        case ScoreMethod::Ducs: return "ducs";
        case ScoreMethod::Random: return "random";
        case ScoreMethod::Entropy: return "entropy";
        case ScoreMethod::Forgetting: return "forgetting";
        case ScoreMethod::El2n: return "el2n";
        case ScoreMethod::Aum: return "aum";
    }
    return "?";
}

void CoresetSpec::to_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write coreset file: " + path);
    out << "# scorer=" << scorer_name << "\n";
    out << "# beta=" << kvfile::format_double(beta) << "\n";
    out << "# M=" << size << "\n";
    out << "# window=" << window_start << "," << window_k << "\n";
    out << "# w=" << kvfile::format_double(w) << "\n";
    std::ostringstream fp;
    fp << std::hex << fingerprint;
    out << "# fingerprint=" << fp.str() << "\n";
    for (const std::uint32_t index : indices) out << index << "\n";
    if (!out) throw DataError("coreset write failed: " + path);
}

CoresetSpec CoresetSpec::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open coreset file: " + path);
    CoresetSpec spec;
    std::string line;
    bool have_m = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            auto key = line.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(' '));
            key.erase(key.find_last_not_of(' ') + 1);
            const std::string value = line.substr(eq + 1);
            if (key == "scorer") {
                spec.scorer_name = value;
            } else if (key == "beta") {
                spec.beta = std::stod(value);
            } else if (key == "M") {
                spec.size = static_cast<std::uint32_t>(std::stoul(value));
                have_m = true;
            } else if (key == "window") {
                const auto comma = value.find(',');
                if (comma == std::string::npos) {
                    throw DataError("coreset file " + path + ": bad window line");
                }
                spec.window_start =
                    static_cast<std::uint32_t>(std::stoul(value.substr(0, comma)));
                spec.window_k =
                    static_cast<std::uint32_t>(std::stoul(value.substr(comma + 1)));
            } else if (key == "w") {
                spec.w = std::stod(value);
            } else if (key == "fingerprint") {
                spec.fingerprint = std::stoull(value, nullptr, 16);
            }
            continue;
        }
        try {
            spec.indices.push_back(static_cast<std::uint32_t>(std::stoul(line)));
        } catch (const std::exception&) {
            throw DataError("coreset file " + path + ": bad index line '" + line + "'");
        }
    }
    if (!have_m) throw DataError("coreset file " + path + ": missing '# M=' header");
    if (spec.indices.size() != spec.size) {
        throw DataError("coreset file " + path + ": header says M=" +
                        std::to_string(spec.size) + " but " +
                        std::to_string(spec.indices.size()) + " indices follow");
    }
    return spec;
}

namespace selection {

namespace {

double population_std(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double m2 = 0.0;
    for (const double v : values) m2 += (v - mean) * (v - mean);
    return std::sqrt(m2 / static_cast<double>(values.size()));
}

double resolve_w(const WSpec& spec, const std::vector<double>& variances,
                 const std::vector<double>& frequencies) {
    switch (spec.mode) {
        case WSpec::Mode::Fixed:
            return spec.fixed_value;
        case WSpec::Mode::ZScore: {
            const double f_std = population_std(frequencies);
            if (f_std == 0.0) return 1.0;
            return population_std(variances) / f_std;
        }
        case WSpec::Mode::Range:
        default: {
            const auto [f_lo, f_hi] =
                std::minmax_element(frequencies.begin(), frequencies.end());
            const double f_range = *f_hi - *f_lo;
            if (f_range == 0.0) return 1.0;
            const auto [v_lo, v_hi] =
                std::minmax_element(variances.begin(), variances.end());
            return (*v_hi - *v_lo) / f_range;
        }
    }
}

/// ceil(beta * n) with a snap for floating-point noise around exact
/// integers (e.g. 0.05 * 1000).
std::uint32_t coreset_size(double beta, std::uint32_t n) {
    const double product = beta * static_cast<double>(n);
    const double rounded = std::round(product);
    if (std::abs(product - rounded) < 1e-9 * std::max(1.0, product)) {
        return static_cast<std::uint32_t>(rounded);
    }
    return static_cast<std::uint32_t>(std::ceil(product));
}

} // namespace

UnreliabilityReport unreliability_scores(const TrainingTrace& trace,
                                         std::uint32_t window_start,
                                         std::uint32_t k, const WSpec& w_mode) {
    UnreliabilityReport report;
    report.window_start = window_start;
    report.window_k = k;
    report.V = dynamics::inward_variances(trace, window_start, k);
    report.F.resize(trace.sample_count);
    kernels::forgetting_final(trace.correctness.data(), trace.sample_count,
                              trace.epoch_count, report.F.data(), nullptr, nullptr);
    report.w = resolve_w(w_mode, report.V, report.F);
    report.U.resize(trace.sample_count);
    for (std::size_t i = 0; i < report.U.size(); ++i) {
        report.U[i] = report.w * report.F[i] + report.V[i];
    }
    return report;
}

CoresetSpec select_top(const UnreliabilityReport& report, double beta,
                       const std::string& scorer_name) {
    if (!(beta > 0.0) || beta > 1.0) {
        throw UsageError("beta must be in (0, 1], got " + kvfile::format_double(beta));
    }
    const std::uint32_t n = static_cast<std::uint32_t>(report.U.size());
    if (n == 0) throw DataError("select_top: empty report");

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                         if (report.U[a] != report.U[b]) return report.U[a] > report.U[b];
                         if (report.F[a] != report.F[b]) return report.F[a] > report.F[b];
                         return a < b;
                     });

    CoresetSpec spec;
    spec.beta = beta;
    spec.size = coreset_size(beta, n);
    spec.indices.assign(order.begin(), order.begin() + spec.size);
    spec.scorer_name = scorer_name;
    spec.window_start = report.window_start;
    spec.window_k = report.window_k;
    spec.w = report.w;
    return spec;
}

std::uint32_t window_grid_search(
    const TrainingTrace& trace, std::uint32_t k, std::uint32_t grid_step,
    double beta, const WSpec& w_mode,
    const std::function<double(const CoresetSpec&)>& evaluator) {
    if (grid_step < 1) throw UsageError("grid_step must be >= 1");
    if (k < 1 || k > trace.epoch_count) {
        throw UsageError("window length " + std::to_string(k) +
                         " outside 1.." + std::to_string(trace.epoch_count));
    }
    const std::uint32_t last_start = trace.epoch_count - k + 1;
    std::uint32_t best_start = 1;
    double best_acc = -1.0;
    for (std::uint32_t start = 1; start <= last_start; start += grid_step) {
        const UnreliabilityReport report =
            unreliability_scores(trace, start, k, w_mode);
        const CoresetSpec coreset = select_top(report, beta);
        double acc = 0.0;
        try {
            acc = evaluator(coreset);
        } catch (const NumericError& e) {
            throw NumericError("grid search candidate window_start=" +
                               std::to_string(start) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError("grid search candidate window_start=" +
                            std::to_string(start) + ": " + e.what());
        }
        if (acc >= best_acc) { // ties go to the latest window
            best_acc = acc;
            best_start = start;
        }
    }
    return best_start;
}

std::vector<double> baseline_scores(const TrainingTrace& trace,
                                    ScoreMethod method, std::uint64_t seed,
                                    const std::vector<std::int32_t>* labels) {
    const std::uint32_t n = trace.sample_count;
    const std::uint32_t t_count = trace.epoch_count;
    const std::uint32_t c_count = trace.class_count;
    std::vector<double> scores(n, 0.0);

    const auto need_extended = [&](const char* channel) {
        if (!trace.extended()) {
            throw TraceError(TraceError::Kind::MissingChannel,
                             "method '" + method_name(method) + "' needs the " +
                                 std::string(channel) +
                                 " channel; re-run train-dynamics with "
                                 "--extended-trace");
        }
    };

    switch (method) {
        case ScoreMethod::Ducs:
            throw UsageError("DUCS scoring goes through unreliability_scores");
        case ScoreMethod::Random: {
            PhiloxRng rng(seed, rng_stream::make(rng_stream::kRandomScores));
            for (double& s : scores) s = rng.next_double();
            break;
        }
        case ScoreMethod::Forgetting: {
            // Toneva-style forgetting count; never-learned samples rank above
            // any finite count.
            std::vector<double> frequency(n);
            std::vector<std::uint32_t> events(n);
            std::vector<std::uint8_t> never(n);
            kernels::forgetting_final(trace.correctness.data(), n, t_count,
                                      frequency.data(), events.data(), never.data());
            for (std::uint32_t i = 0; i < n; ++i) {
                scores[i] = never[i] ? static_cast<double>(t_count) + 1.0
                                     : static_cast<double>(events[i]);
            }
            break;
        }
        case ScoreMethod::Entropy: {
            need_extended("final-epoch probability");
            for (std::uint32_t i = 0; i < n; ++i) {
                double entropy = 0.0;
                for (std::uint32_t c = 0; c < c_count; ++c) {
                    const double p =
                        trace.final_probs[static_cast<std::size_t>(i) * c_count + c];
                    if (p > 0.0) entropy -= p * std::log(p);
                }
                scores[i] = entropy;
            }
            break;
        }
        case ScoreMethod::El2n: {
            need_extended("final-epoch probability");
            if (labels == nullptr) {
                throw DataError(
                    "method 'el2n' needs dataset labels; pass --dataset to select");
            }
            if (labels->size() != n) {
                throw DataError("el2n: label count " + std::to_string(labels->size()) +
                                " does not match trace rows " + std::to_string(n));
            }
            for (std::uint32_t i = 0; i < n; ++i) {
                double sum_sq = 0.0;
                for (std::uint32_t c = 0; c < c_count; ++c) {
                    const double p =
                        trace.final_probs[static_cast<std::size_t>(i) * c_count + c];
                    const double y =
                        static_cast<std::uint32_t>((*labels)[i]) == c ? 1.0 : 0.0;
                    sum_sq += (p - y) * (p - y);
                }
                scores[i] = std::sqrt(sum_sq);
            }
            break;
        }
        case ScoreMethod::Aum: {
            need_extended("per-epoch probability margin");
            for (std::uint32_t i = 0; i < n; ++i) {
                double sum = 0.0;
                for (std::uint32_t t = 0; t < t_count; ++t) {
                    sum += trace.margin[static_cast<std::size_t>(i) * t_count + t];
                }
                scores[i] = -sum / static_cast<double>(t_count);
            }
            break;
        }
    }
    return scores;
}

void write_report_csv(const UnreliabilityReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write report CSV: " + path);
    out << "index,V,F,U\n";
    for (std::size_t i = 0; i < report.U.size(); ++i) {
        out << i << "," << kvfile::format_double(report.V[i]) << ","
            << kvfile::format_double(report.F[i]) << ","
            << kvfile::format_double(report.U[i]) << "\n";
    }
    if (!out) throw DataError("report CSV write failed: " + path);
}

void write_scores_csv(const std::vector<double>& scores, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write scores CSV: " + path);
    out << "index,score\n";
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out << i << "," << kvfile::format_double(scores[i]) << "\n";
    }
    if (!out) throw DataError("scores CSV write failed: " + path);
}

} // namespace selection
} // namespace ducs
