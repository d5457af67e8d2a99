#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ducs/model.hpp"

namespace ducs {

/// Per-sample, per-epoch dynamics of one surrogate run. Confidence is held in
/// float32 (matching the file format); all computation over it is double.
/// Extended traces (format DUCSTRC2) add the softmax probability margin per
/// epoch and the final-epoch probability rows, which the entropy/EL2N/AUM
/// baselines need.
struct TrainingTrace {
    std::uint32_t sample_count = 0;
    std::uint32_t class_count = 0;
    std::uint32_t epoch_count = 0;
    std::uint64_t seed = 0;
    std::uint64_t dataset_fingerprint = 0;
    std::vector<float> confidence;         // N x T, row-major by sample
    std::vector<std::uint8_t> correctness; // N x T, values 0/1
    std::vector<float> margin;             // N x T when extended, else empty
    std::vector<float> final_probs;        // N x C when extended, else empty

    bool extended() const { return !margin.empty(); }
    float conf(std::uint32_t i, std::uint32_t t) const {
        return confidence[static_cast<std::size_t>(i) * epoch_count + t];
    }
    std::uint8_t correct(std::uint32_t i, std::uint32_t t) const {
        return correctness[static_cast<std::size_t>(i) * epoch_count + t];
    }
    std::span<const std::uint8_t> correctness_row(std::uint32_t i) const {
        return {correctness.data() + static_cast<std::size_t>(i) * epoch_count,
                epoch_count};
    }
};

struct ForgettingStats {
    std::vector<std::uint8_t> events;      // N x T
    std::vector<std::uint32_t> cumulative; // N x T
    std::vector<double> frequency_final;   // N
};

/// DynamicsSink that assembles a TrainingTrace during training.
class TraceBuilder final : public DynamicsSink {
public:
    TraceBuilder(std::uint32_t sample_count, std::uint32_t class_count,
                 std::uint32_t epoch_count, std::uint64_t seed,
                 std::uint64_t dataset_fingerprint, bool extended);

    bool wants_probabilities() const override { return extended_; }
    void on_epoch(int epoch, std::span<const float> confidence,
                  std::span<const std::uint8_t> correctness,
                  std::span<const float> margins) override;
    void on_final_probabilities(std::span<const float> probs) override;

    TrainingTrace finalize();

private:
    TrainingTrace trace_;
    bool extended_;
    int epochs_seen_ = 0;
};

namespace dynamics {

/// gamma_t = 1 iff d_{t-1} = 1 and d_t = 0; gamma_1 = 0 (no predecessor).
std::vector<std::uint8_t> forgetting_events(std::span<const std::uint8_t> row);

/// R_t / t, with the override F = 1 when no correct prediction exists in
/// epochs 1..t. t is 1-based.
double forgetting_frequency(std::span<const std::uint8_t> row, std::uint32_t t);

ForgettingStats forgetting_stats(const TrainingTrace& trace);

/// Per-sample population variance of confidence over epochs
/// [window_start, window_start + k); window_start is 1-based.
std::vector<double> inward_variances(const TrainingTrace& trace,
                                     std::uint32_t window_start, std::uint32_t k);

// Binary trace files: magic DUCSTRC1 (or DUCSTRC2 with the extended
// channels), little-endian u32 N, u32 C, u32 T, u64 seed, u64 fingerprint,
// N*T float32 confidences, ceil(N*T/8) packed correctness bits (LSB first),
// extended channels when present, and a trailing CRC32 of all prior bytes.
void write_trace(const TrainingTrace& trace, const std::string& path);
TrainingTrace read_trace(const std::string& path);

/// Debug dump: one line per sample with index, final F, last-window V, last d.
void inspect(const TrainingTrace& trace, std::ostream& out, std::uint32_t window_k);

} // namespace dynamics
} // namespace ducs
