#include "ducs/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "ducs/errors.hpp"
#include "ducs/kvfile.hpp"
#include "ducs/rng.hpp"

namespace ducs {

std::vector<double> DatasetBundle::one_hot_row(std::uint32_t i) const {
    std::vector<double> row(class_count, 0.0);
    row[static_cast<std::size_t>(labels[i])] = 1.0;
    return row;
}

std::vector<std::uint32_t> DatasetBundle::rows_with(Split tag) const {
    std::vector<std::uint32_t> rows;
    for (std::uint32_t i = 0; i < sample_count; ++i) {
        if (split_tags[i] == tag) rows.push_back(i);
    }
    return rows;
}

void BlobSpec::validate() const {
    if (class_count < 2) throw DataError("blobs: class_count must be >= 2");
    if (dim == 0 || samples_per_class == 0) {
        throw DataError("blobs: dim and samples_per_class must be positive");
    }
    if (center_spread <= 0.0 || within_std < 0.0 || overlap_boost < 0.0) {
        throw DataError("blobs: center_spread must be > 0, stds must be >= 0");
    }
}

BlobSpec BlobSpec::from_kv(const std::map<std::string, std::string>& kv) {
    BlobSpec spec;
    spec.class_count = static_cast<std::uint32_t>(kvfile::get_int(kv, "class_count"));
    spec.dim = static_cast<std::uint32_t>(kvfile::get_int(kv, "dim"));
    spec.samples_per_class =
        static_cast<std::uint32_t>(kvfile::get_int(kv, "samples_per_class"));
    spec.center_spread = kvfile::get_double(kv, "center_spread");
    spec.within_std = kvfile::get_double(kv, "within_std");
    spec.overlap_boost = kvfile::get_double(kv, "overlap_boost");
    spec.seed = kvfile::get_u64(kv, "seed");
    spec.validate();
    return spec;
}

BlobSpec BlobSpec::from_file(const std::string& path) {
    return from_kv(kvfile::read_file(path));
}

BlobSpec BlobSpec::parse(const std::string& text) {
    if (text.find('=') == std::string::npos) return from_file(text);
    std::string lines = text;
    std::replace(lines.begin(), lines.end(), ',', '\n');
    return from_kv(kvfile::parse(lines));
}

void BlobSpec::to_file(const std::string& path) const {
    kvfile::write_file(
        path, {{"class_count", std::to_string(class_count)},
               {"dim", std::to_string(dim)},
               {"samples_per_class", std::to_string(samples_per_class)},
               {"center_spread", kvfile::format_double(center_spread)},
               {"within_std", kvfile::format_double(within_std)},
               {"overlap_boost", kvfile::format_double(overlap_boost)},
               {"seed", std::to_string(seed)}});
}

namespace data {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803u;
constexpr std::uint32_t kLabelsMagic = 0x00000801u;

std::vector<std::uint8_t> read_all_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                        const std::string& path) {
    if (offset + 4 > bytes.size()) {
        throw DataError("truncated IDX header in " + path);
    }
    return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
           (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
           static_cast<std::uint32_t>(bytes[offset + 3]);
}

void finalize(DatasetBundle& bundle, std::uint32_t class_override) {
    std::int32_t max_label = -1;
    for (const std::int32_t label : bundle.labels) {
        max_label = std::max(max_label, label);
    }
    bundle.class_count =
        class_override > 0 ? class_override : static_cast<std::uint32_t>(max_label + 1);
    if (bundle.class_count < 2) {
        throw DataError("dataset needs at least 2 classes, found " +
                        std::to_string(bundle.class_count));
    }
    for (std::size_t i = 0; i < bundle.labels.size(); ++i) {
        if (bundle.labels[i] < 0 ||
            static_cast<std::uint32_t>(bundle.labels[i]) >= bundle.class_count) {
            throw DataError("label " + std::to_string(bundle.labels[i]) +
                            " at sample " + std::to_string(i) +
                            " is outside [0, " + std::to_string(bundle.class_count) +
                            ")");
        }
    }
    bundle.split_tags.assign(bundle.sample_count, Split::Train);
    bundle.fingerprint = fingerprint(bundle.features, bundle.labels);
}

} // namespace

DatasetBundle load_idx(const std::string& images_path,
                       const std::string& labels_path,
                       std::uint32_t class_override) {
    const auto image_bytes = read_all_bytes(images_path);
    const auto label_bytes = read_all_bytes(labels_path);

    const std::uint32_t image_magic = read_be32(image_bytes, 0, images_path);
    if (image_magic != kImagesMagic) {
        std::ostringstream msg;
        msg << "bad IDX image magic in " << images_path << ": expected 0x"
            << std::hex << kImagesMagic << ", found 0x" << image_magic;
        throw DataError(msg.str());
    }
    const std::uint32_t label_magic = read_be32(label_bytes, 0, labels_path);
    if (label_magic != kLabelsMagic) {
        std::ostringstream msg;
        msg << "bad IDX label magic in " << labels_path << ": expected 0x"
            << std::hex << kLabelsMagic << ", found 0x" << label_magic;
        throw DataError(msg.str());
    }

    const std::uint32_t image_count = read_be32(image_bytes, 4, images_path);
    const std::uint32_t rows = read_be32(image_bytes, 8, images_path);
    const std::uint32_t cols = read_be32(image_bytes, 12, images_path);
    const std::uint32_t label_count = read_be32(label_bytes, 4, labels_path);
    if (image_count != label_count) {
        throw DataError("IDX dimension mismatch: " + std::to_string(image_count) +
                        " images vs " + std::to_string(label_count) + " labels");
    }

    const std::size_t dim = static_cast<std::size_t>(rows) * cols;
    const std::size_t expected_pixels = 16 + dim * image_count;
    if (image_bytes.size() < expected_pixels) {
        throw DataError("truncated IDX image file " + images_path + ": expected " +
                        std::to_string(expected_pixels) + " bytes, found " +
                        std::to_string(image_bytes.size()));
    }
    const std::size_t expected_labels = 8 + static_cast<std::size_t>(label_count);
    if (label_bytes.size() < expected_labels) {
        throw DataError("truncated IDX label file " + labels_path + ": expected " +
                        std::to_string(expected_labels) + " bytes, found " +
                        std::to_string(label_bytes.size()));
    }

    DatasetBundle bundle;
    bundle.sample_count = image_count;
    bundle.dim = static_cast<std::uint32_t>(dim);
    bundle.features.resize(dim * image_count);
    for (std::size_t i = 0; i < bundle.features.size(); ++i) {
        bundle.features[i] = static_cast<double>(image_bytes[16 + i]) / 255.0;
    }
    bundle.labels.resize(label_count);
    for (std::size_t i = 0; i < label_count; ++i) {
        bundle.labels[i] = static_cast<std::int32_t>(label_bytes[8 + i]);
    }
    finalize(bundle, class_override);
    return bundle;
}

DatasetBundle load_csv(const std::string& path, const std::string& label_column,
                       std::uint32_t class_override) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty CSV file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    std::size_t label_index = header.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == label_column) label_index = c;
    }
    if (label_index == header.size()) {
        throw DataError("CSV " + path + " has no column named '" + label_column + "'");
    }

    const std::size_t dim = header.size() - 1;
    if (dim == 0) throw DataError("CSV " + path + " has no feature columns");

    DatasetBundle bundle;
    bundle.dim = static_cast<std::uint32_t>(dim);
    std::size_t row_number = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row_number;
        std::istringstream ls(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ls, cell, ',')) {
            if (col >= header.size()) break;
            char* end = nullptr;
            const double value = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0') {
                throw DataError("CSV parse error at row " + std::to_string(row_number) +
                                ", column '" + header[col] + "': '" + cell + "'");
            }
            if (col == label_index) {
                if (value != std::floor(value) || value < 0.0) {
                    throw DataError("non-integer label at row " +
                                    std::to_string(row_number) + ": '" + cell + "'");
                }
                bundle.labels.push_back(static_cast<std::int32_t>(value));
            } else {
                bundle.features.push_back(value);
            }
            ++col;
        }
        if (col != header.size()) {
            throw DataError("CSV row " + std::to_string(row_number) + " has " +
                            std::to_string(col) + " cells, header has " +
                            std::to_string(header.size()));
        }
    }
    if (row_number == 0) throw DataError("CSV " + path + " has no data rows");
    bundle.sample_count = static_cast<std::uint32_t>(row_number);

    // Per-column min-max normalization; constant columns become 0.
    for (std::size_t c = 0; c < dim; ++c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < row_number; ++i) {
            const double v = bundle.features[i * dim + c];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double range = hi - lo;
        for (std::size_t i = 0; i < row_number; ++i) {
            double& v = bundle.features[i * dim + c];
            v = range > 0.0 ? (v - lo) / range : 0.0;
        }
    }
    finalize(bundle, class_override);
    return bundle;
}

DatasetBundle generate_blobs(const BlobSpec& spec) {
    spec.validate();
    const std::uint32_t n = spec.class_count * spec.samples_per_class;
    const std::uint32_t d = spec.dim;

    // Class centers: Gram-Schmidt over seeded Gaussian directions, scaled by
    // center_spread. For class_count > dim the surplus directions stay merely
    // normalized.
    std::vector<std::vector<double>> centers(spec.class_count,
                                             std::vector<double>(d));
    PhiloxRng center_rng(spec.seed, rng_stream::make(rng_stream::kBlobCenters));
    for (auto& center : centers) {
        for (double& x : center) x = center_rng.next_normal();
    }
    for (std::uint32_t c = 0; c < spec.class_count; ++c) {
        for (std::uint32_t prev = 0; prev < c && prev < d; ++prev) {
            double dot = 0.0;
            for (std::uint32_t j = 0; j < d; ++j) {
                dot += centers[c][j] * centers[prev][j];
            }
            for (std::uint32_t j = 0; j < d; ++j) {
                centers[c][j] -= dot * centers[prev][j];
            }
        }
        double norm_sq = 0.0;
        for (const double x : centers[c]) norm_sq += x * x;
        const double norm = std::sqrt(norm_sq);
        if (norm < 1e-12) {
            throw NumericError("blob center collapsed during orthonormalization");
        }
        for (double& x : centers[c]) x /= norm;
    }
    for (auto& center : centers) {
        for (double& x : center) x *= spec.center_spread;
    }

    DatasetBundle bundle;
    bundle.sample_count = n;
    bundle.dim = d;
    bundle.class_count = spec.class_count;
    bundle.features.resize(static_cast<std::size_t>(n) * d);
    bundle.labels.resize(n);

    PhiloxRng sample_rng(spec.seed, rng_stream::make(rng_stream::kBlobSamples));
    std::size_t row = 0;
    for (std::uint32_t c = 0; c < spec.class_count; ++c) {
        const double sigma = spec.within_std + (c < 2 ? spec.overlap_boost : 0.0);
        for (std::uint32_t s = 0; s < spec.samples_per_class; ++s, ++row) {
            bundle.labels[row] = static_cast<std::int32_t>(c);
            double* dst = bundle.features.data() + row * d;
            for (std::uint32_t j = 0; j < d; ++j) {
                dst[j] = centers[c][j] + sigma * sample_rng.next_normal();
            }
        }
    }

    // Affine map to [0,1] per dimension; a degenerate dimension maps to 0.
    for (std::uint32_t j = 0; j < d; ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::uint32_t i = 0; i < n; ++i) {
            const double v = bundle.features[static_cast<std::size_t>(i) * d + j];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double range = hi - lo;
        for (std::uint32_t i = 0; i < n; ++i) {
            double& v = bundle.features[static_cast<std::size_t>(i) * d + j];
            v = range > 0.0 ? (v - lo) / range : 0.0;
        }
    }

    bundle.split_tags.assign(n, Split::Train);
    bundle.fingerprint = fingerprint(bundle.features, bundle.labels);
    return bundle;
}

void split(DatasetBundle& bundle, double train_frac, double val_frac,
           std::uint64_t seed) {
    if (train_frac <= 0.0 || val_frac < 0.0 || train_frac + val_frac > 1.0 + 1e-12) {
        throw DataError("split fractions invalid: train=" +
                        kvfile::format_double(train_frac) + " val=" +
                        kvfile::format_double(val_frac));
    }
    const double test_frac = 1.0 - train_frac - val_frac;
    const bool wants_val = val_frac > 0.0;
    const bool wants_test = test_frac > 1e-12;
    const int splits_requested = 1 + (wants_val ? 1 : 0) + (wants_test ? 1 : 0);

    std::vector<std::vector<std::uint32_t>> by_class(bundle.class_count);
    for (std::uint32_t i = 0; i < bundle.sample_count; ++i) {
        by_class[static_cast<std::size_t>(bundle.labels[i])].push_back(i);
    }

    PhiloxRng rng(seed, rng_stream::make(rng_stream::kSplit));
    for (std::uint32_t c = 0; c < bundle.class_count; ++c) {
        auto& rows = by_class[c];
        if (rows.size() < static_cast<std::size_t>(splits_requested)) {
            throw DataError("class " + std::to_string(c) + " has " +
                            std::to_string(rows.size()) + " samples but " +
                            std::to_string(splits_requested) + " splits requested");
        }
        rng.shuffle(rows);
        const std::size_t n_c = rows.size();
        const std::size_t n_train = static_cast<std::size_t>(
            std::floor(train_frac * static_cast<double>(n_c)));
        const std::size_t n_val = static_cast<std::size_t>(
            std::floor(val_frac * static_cast<double>(n_c)));
        for (std::size_t i = 0; i < n_c; ++i) {
            Split tag;
            if (i < n_train) {
                tag = Split::Train;
            } else if (i < n_train + n_val) {
                tag = Split::Val;
            } else if (wants_test) {
                tag = Split::Test;
            } else {
                tag = Split::Train; // leftover crumbs when no test share exists
            }
            bundle.split_tags[rows[i]] = tag;
        }
    }
}

std::uint64_t fingerprint(std::span<const double> features,
                          std::span<const std::int32_t> labels) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    const auto mix = [&hash](const void* data, std::size_t len) {
        const auto* bytes = static_cast<const std::uint8_t*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            hash ^= bytes[i];
            hash *= 0x100000001b3ull;
        }
    };
    for (const double v : features) mix(&v, sizeof(v));
    for (const std::int32_t v : labels) mix(&v, sizeof(v));
    return hash;
}

} // namespace data
} // namespace ducs
