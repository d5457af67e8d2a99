#include "ducs/dynamics.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <ostream>

#include "ducs/errors.hpp"
#include "ducs/kernels.hpp"

namespace ducs {

TraceBuilder::TraceBuilder(std::uint32_t sample_count, std::uint32_t class_count,
                           std::uint32_t epoch_count, std::uint64_t seed,
                           std::uint64_t dataset_fingerprint, bool extended)
    : extended_(extended) {
    trace_.sample_count = sample_count;
    trace_.class_count = class_count;
    trace_.epoch_count = epoch_count;
    trace_.seed = seed;
    trace_.dataset_fingerprint = dataset_fingerprint;
    const std::size_t cells =
        static_cast<std::size_t>(sample_count) * epoch_count;
    trace_.confidence.assign(cells, 0.0f);
    trace_.correctness.assign(cells, 0);
    if (extended) {
        trace_.margin.assign(cells, 0.0f);
        trace_.final_probs.assign(
            static_cast<std::size_t>(sample_count) * class_count, 0.0f);
    }
}

void TraceBuilder::on_epoch(int epoch, std::span<const float> confidence,
                            std::span<const std::uint8_t> correctness,
                            std::span<const float> margins) {
    if (epoch != epochs_seen_ + 1) {
        throw DataError("trace builder received epoch " + std::to_string(epoch) +
                        " after epoch " + std::to_string(epochs_seen_));
    }
    if (confidence.size() != trace_.sample_count ||
        correctness.size() != trace_.sample_count) {
        throw DataError("trace builder: row count mismatch");
    }
    const std::uint32_t t = static_cast<std::uint32_t>(epoch) - 1;
    for (std::uint32_t i = 0; i < trace_.sample_count; ++i) {
        const std::size_t cell =
            static_cast<std::size_t>(i) * trace_.epoch_count + t;
        trace_.confidence[cell] = confidence[i];
        trace_.correctness[cell] = correctness[i];
        if (extended_) trace_.margin[cell] = margins[i];
    }
    epochs_seen_ = epoch;
}

void TraceBuilder::on_final_probabilities(std::span<const float> probs) {
    if (!extended_) return;
    if (probs.size() != trace_.final_probs.size()) {
        throw DataError("trace builder: final probability block size mismatch");
    }
    std::memcpy(trace_.final_probs.data(), probs.data(),
                probs.size() * sizeof(float));
}

TrainingTrace TraceBuilder::finalize() {
    if (epochs_seen_ != static_cast<int>(trace_.epoch_count)) {
        throw DataError("trace builder finalized after " +
                        std::to_string(epochs_seen_) + " of " +
                        std::to_string(trace_.epoch_count) + " epochs");
    }
    return std::move(trace_);
}

namespace dynamics {

std::vector<std::uint8_t> forgetting_events(std::span<const std::uint8_t> row) {
    std::vector<std::uint8_t> events(row.size(), 0);
    for (std::size_t t = 1; t < row.size(); ++t) {
        events[t] = row[t - 1] == 1 && row[t] == 0 ? 1 : 0;
    }
    return events;
}

double forgetting_frequency(std::span<const std::uint8_t> row, std::uint32_t t) {
    if (t < 1 || t > row.size()) {
        throw UsageError("forgetting_frequency: epoch " + std::to_string(t) +
                         " outside 1.." + std::to_string(row.size()));
    }
    std::uint32_t events = 0;
    bool any_correct = false;
    for (std::uint32_t e = 0; e < t; ++e) {
        if (row[e]) any_correct = true;
        if (e > 0 && row[e - 1] == 1 && row[e] == 0) ++events;
    }
    if (!any_correct) return 1.0;
    return static_cast<double>(events) / static_cast<double>(t);
}

ForgettingStats forgetting_stats(const TrainingTrace& trace) {
    const std::uint32_t n = trace.sample_count;
    const std::uint32_t t_count = trace.epoch_count;
    ForgettingStats stats;
    stats.events.assign(static_cast<std::size_t>(n) * t_count, 0);
    stats.cumulative.assign(static_cast<std::size_t>(n) * t_count, 0);
    stats.frequency_final.assign(n, 0.0);
    kernels::forgetting_final(trace.correctness.data(), n, t_count,
                              stats.frequency_final.data(), nullptr, nullptr);
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::size_t base = static_cast<std::size_t>(i) * t_count;
        std::uint32_t running = 0;
        for (std::uint32_t t = 0; t < t_count; ++t) {
            const bool event = t > 0 && trace.correctness[base + t - 1] == 1 &&
                               trace.correctness[base + t] == 0;
            stats.events[base + t] = event ? 1 : 0;
            running += event ? 1u : 0u;
            stats.cumulative[base + t] = running;
        }
    }
    return stats;
}

std::vector<double> inward_variances(const TrainingTrace& trace,
                                     std::uint32_t window_start, std::uint32_t k) {
    if (window_start < 1 || k < 1 ||
        window_start + k - 1 > trace.epoch_count) {
        throw UsageError("inward_variances: window [" + std::to_string(window_start) +
                         ", " + std::to_string(window_start + k - 1) +
                         "] outside epochs 1.." + std::to_string(trace.epoch_count));
    }
    return kernels::row_variances(trace.confidence.data(), trace.sample_count,
                                  trace.epoch_count, window_start - 1, k);
}

namespace {

constexpr char kMagicV1[8] = {'D', 'U', 'C', 'S', 'T', 'R', 'C', '1'};
constexpr char kMagicV2[8] = {'D', 'U', 'C', 'S', 'T', 'R', 'C', '2'};

template <class T>
void put(std::vector<std::uint8_t>& out, T value) {
    // little-endian scalar append
    for (std::size_t byte = 0; byte < sizeof(T); ++byte) {
        out.push_back(static_cast<std::uint8_t>(value >> (8 * byte)));
    }
}

void put_f32(std::vector<std::uint8_t>& out, std::span<const float> values) {
    const std::size_t offset = out.size();
    out.resize(offset + values.size() * sizeof(float));
    std::memcpy(out.data() + offset, values.data(), values.size() * sizeof(float));
}

std::size_t packed_bit_bytes(std::size_t cells) { return (cells + 7) / 8; }

} // namespace

void write_trace(const TrainingTrace& trace, const std::string& path) {
    const std::size_t cells =
        static_cast<std::size_t>(trace.sample_count) * trace.epoch_count;
    if (trace.confidence.size() != cells || trace.correctness.size() != cells) {
        throw DataError("write_trace: trace matrices are not fully populated");
    }

    std::vector<std::uint8_t> buffer;
    const bool extended = trace.extended();
    const char* magic = extended ? kMagicV2 : kMagicV1;
    buffer.insert(buffer.end(), magic, magic + 8);
    put<std::uint32_t>(buffer, trace.sample_count);
    put<std::uint32_t>(buffer, trace.class_count);
    put<std::uint32_t>(buffer, trace.epoch_count);
    put<std::uint64_t>(buffer, trace.seed);
    put<std::uint64_t>(buffer, trace.dataset_fingerprint);
    put_f32(buffer, trace.confidence);

    std::vector<std::uint8_t> bits(packed_bit_bytes(cells), 0);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        if (trace.correctness[cell]) bits[cell / 8] |= static_cast<std::uint8_t>(1u << (cell % 8));
    }
    buffer.insert(buffer.end(), bits.begin(), bits.end());

    if (extended) {
        put_f32(buffer, trace.margin);
        put_f32(buffer, trace.final_probs);
    }

    const auto crc = static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), buffer.data(), static_cast<uInt>(buffer.size())));
    put<std::uint32_t>(buffer, crc);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write trace file: " + path);
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size()));
    if (!out) throw DataError("trace write failed: " + path);
}

namespace {

template <class T>
T get(const std::vector<std::uint8_t>& bytes, std::size_t& offset) {
    T value = 0;
    for (std::size_t byte = 0; byte < sizeof(T); ++byte) {
        value |= static_cast<T>(bytes[offset + byte]) << (8 * byte);
    }
    offset += sizeof(T);
    return value;
}

} // namespace

TrainingTrace read_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open trace file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());

    if (bytes.size() < 8) {
        throw TraceError(TraceError::Kind::Truncated,
                         "trace file " + path + " truncated: expected at least 8 bytes, found " +
                             std::to_string(bytes.size()));
    }
    bool extended = false;
    if (std::memcmp(bytes.data(), kMagicV1, 8) == 0) {
        extended = false;
    } else if (std::memcmp(bytes.data(), kMagicV2, 8) == 0) {
        extended = true;
    } else if (std::memcmp(bytes.data(), "DUCSTRC", 7) == 0) {
        throw TraceError(TraceError::Kind::Version,
                         "trace file " + path + " has unsupported format version '" +
                             std::string(1, static_cast<char>(bytes[7])) + "'");
    } else {
        throw TraceError(TraceError::Kind::BadMagic,
                         "trace file " + path + " has bad magic (not a DUCS trace)");
    }

    constexpr std::size_t kHeaderSize = 8 + 4 + 4 + 4 + 8 + 8;
    if (bytes.size() < kHeaderSize) {
        throw TraceError(TraceError::Kind::Truncated,
                         "trace file " + path + " truncated: expected at least " +
                             std::to_string(kHeaderSize) + " bytes, found " +
                             std::to_string(bytes.size()));
    }
    std::size_t offset = 8;
    TrainingTrace trace;
    trace.sample_count = get<std::uint32_t>(bytes, offset);
    trace.class_count = get<std::uint32_t>(bytes, offset);
    trace.epoch_count = get<std::uint32_t>(bytes, offset);
    trace.seed = get<std::uint64_t>(bytes, offset);
    trace.dataset_fingerprint = get<std::uint64_t>(bytes, offset);

    const std::size_t cells =
        static_cast<std::size_t>(trace.sample_count) * trace.epoch_count;
    std::size_t expected = kHeaderSize + cells * sizeof(float) + packed_bit_bytes(cells);
    if (extended) {
        expected += cells * sizeof(float) +
                    static_cast<std::size_t>(trace.sample_count) *
                        trace.class_count * sizeof(float);
    }
    expected += sizeof(std::uint32_t); // trailing crc
    if (bytes.size() != expected) {
        throw TraceError(TraceError::Kind::Truncated,
                         "trace file " + path + " truncated: expected " +
                             std::to_string(expected) + " bytes, found " +
                             std::to_string(bytes.size()));
    }

    const std::size_t payload = bytes.size() - sizeof(std::uint32_t);
    const auto stored_crc = [&] {
        std::size_t crc_offset = payload;
        return get<std::uint32_t>(bytes, crc_offset);
    }();
    const auto computed_crc = static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), bytes.data(), static_cast<uInt>(payload)));
    if (stored_crc != computed_crc) {
        throw TraceError(TraceError::Kind::Checksum,
                         "trace file " + path + " checksum mismatch");
    }

    trace.confidence.resize(cells);
    std::memcpy(trace.confidence.data(), bytes.data() + offset, cells * sizeof(float));
    offset += cells * sizeof(float);

    trace.correctness.resize(cells);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        trace.correctness[cell] =
            (bytes[offset + cell / 8] >> (cell % 8)) & 1u;
    }
    offset += packed_bit_bytes(cells);

    if (extended) {
        trace.margin.resize(cells);
        std::memcpy(trace.margin.data(), bytes.data() + offset, cells * sizeof(float));
        offset += cells * sizeof(float);
        const std::size_t prob_count =
            static_cast<std::size_t>(trace.sample_count) * trace.class_count;
        trace.final_probs.resize(prob_count);
        std::memcpy(trace.final_probs.data(), bytes.data() + offset,
                    prob_count * sizeof(float));
        offset += prob_count * sizeof(float);
    }
    return trace;
}

void inspect(const TrainingTrace& trace, std::ostream& out, std::uint32_t window_k) {
    const std::uint32_t k = std::min(window_k, trace.epoch_count);
    const std::uint32_t start = trace.epoch_count - k + 1;
    const std::vector<double> variances = inward_variances(trace, start, k);
    out << "# samples=" << trace.sample_count << " classes=" << trace.class_count
        << " epochs=" << trace.epoch_count << " seed=" << trace.seed
        << " fingerprint=" << trace.dataset_fingerprint
        << (trace.extended() ? " extended" : "") << "\n";
    out << "# index final_F last_window_V last_d\n";
    for (std::uint32_t i = 0; i < trace.sample_count; ++i) {
        const double f =
            forgetting_frequency(trace.correctness_row(i), trace.epoch_count);
        out << i << " " << f << " " << variances[i] << " "
            << static_cast<int>(trace.correct(i, trace.epoch_count - 1)) << "\n";
    }
}

} // namespace dynamics
} // namespace ducs
