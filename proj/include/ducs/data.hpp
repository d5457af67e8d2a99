#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace ducs {

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };

/// Immutable after load/generation; features live in [0,1].
struct DatasetBundle {
    std::uint32_t sample_count = 0;
    std::uint32_t dim = 0;
    std::uint32_t class_count = 0;
    std::vector<double> features;      // sample_count x dim, row-major
    std::vector<std::int32_t> labels;  // class indices in [0, class_count)
    std::vector<Split> split_tags;     // everything Train until split() runs
    std::uint64_t fingerprint = 0;

    std::span<const double> row(std::uint32_t i) const {
        return {features.data() + static_cast<std::size_t>(i) * dim, dim};
    }
    std::vector<double> one_hot_row(std::uint32_t i) const;
    std::vector<std::uint32_t> rows_with(Split tag) const;
};

/// Synthetic Gaussian-blob generator. Classes 0 and 1 form the designated
/// confusable pair: their within-class std is widened by overlap_boost.
struct BlobSpec {
    std::uint32_t class_count = 3;
    std::uint32_t dim = 32;
    std::uint32_t samples_per_class = 1000;
    double center_spread = 10.0;
    double within_std = 1.0;
    double overlap_boost = 0.0;
    std::uint64_t seed = 1;

    void validate() const;
    static BlobSpec from_kv(const std::map<std::string, std::string>& kv);
    static BlobSpec from_file(const std::string& path);
    /// Accepts either a path to a key=value file or an inline
    /// "key=value,key=value" string.
    static BlobSpec parse(const std::string& text);
    void to_file(const std::string& path) const;
};

namespace data {

/// Big-endian IDX pair (images magic 0x00000803, labels magic 0x00000801).
/// Pixels are scaled by 1/255; the class count is max label + 1 unless
/// class_override > 0.
DatasetBundle load_idx(const std::string& images_path,
                       const std::string& labels_path,
                       std::uint32_t class_override = 0);

/// Numeric CSV with a header row. label_column holds integer class ids
/// 0..C-1; every other column is min-max normalized to [0,1] (constant
/// columns map to 0).
DatasetBundle load_csv(const std::string& path, const std::string& label_column,
                       std::uint32_t class_override = 0);

DatasetBundle generate_blobs(const BlobSpec& spec);

/// Stratified, seeded split: per class floor(frac * n) to train and val,
/// the remainder to test (or to train when no test share was requested).
void split(DatasetBundle& bundle, double train_frac, double val_frac,
           std::uint64_t seed);

/// FNV-1a 64 over the feature doubles then the label int32s, little-endian,
/// in index order.
std::uint64_t fingerprint(std::span<const double> features,
                          std::span<const std::int32_t> labels);

} // namespace data
} // namespace ducs
