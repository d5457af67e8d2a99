#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ducs/data.hpp"
#include "ducs/evidential.hpp"

namespace ducs {

struct TrainConfig {
    int epochs = 100;
    int batch_size = 128;
    double learning_rate = 0.05;
    double momentum = 0.9;
    std::uint64_t seed = 1;
    int anneal_epochs = 10;
    double lambda_max = 1.0;
    CeMode ce_mode = CeMode::Softmax;
    std::vector<int> layer_dims; // full chain; empty = input -> 128 -> 64 -> C

    void validate() const;
    /// Concrete layer chain for a dataset; checks input/output dims when the
    /// chain was given explicitly.
    std::vector<int> resolve_layer_dims(std::uint32_t input_dim,
                                        std::uint32_t class_count) const;

    static TrainConfig from_kv(const std::map<std::string, std::string>& kv);
    static TrainConfig from_file(const std::string& path);
    void to_file(const std::string& path) const;
};

/// Dense relu MLP; the output layer is affine (logits, no softmax).
struct MlpClassifier {
    std::vector<int> layer_dims;
    std::vector<std::vector<double>> weights; // [layer]: out x in, row-major
    std::vector<std::vector<double>> biases;  // [layer]: out

    int input_dim() const { return layer_dims.front(); }
    int class_count() const { return layer_dims.back(); }
    std::size_t layer_count() const { return weights.size(); }
};

/// A dataset plus the rows visible to a consumer (a split, or a coreset).
struct SampleSet {
    const DatasetBundle* data = nullptr;
    std::vector<std::uint32_t> rows;

    std::size_t size() const { return rows.size(); }
};

/// Receives the end-of-epoch dynamics for every sample of the training set,
/// in sample order. Margins (softmax p_true minus the best other class) and
/// final-epoch probabilities are produced only when requested.
class DynamicsSink {
public:
    virtual ~DynamicsSink() = default;
    virtual bool wants_probabilities() const = 0;
    virtual void on_epoch(int epoch, std::span<const float> confidence,
                          std::span<const std::uint8_t> correctness,
                          std::span<const float> margins) = 0;
    virtual void on_final_probabilities(std::span<const float> probs) = 0;
};

struct EpochSummary {
    double mean_loss = 0.0;
    double train_accuracy = 0.0;
};

/// Mini-batch SGD with momentum on the evidential compound loss. Owns the
/// optimizer state; one driver mutates a model at a time.
class Trainer {
public:
    Trainer(MlpClassifier& model, const TrainConfig& config);

    /// One full pass in a seed-deterministic shuffled order, then the
    /// end-of-epoch recording pass over every sample of `train`.
    EpochSummary train_epoch(const SampleSet& train, int epoch,
                             DynamicsSink* sink);

    /// All config.epochs epochs; per-epoch loss/accuracy lines go to `log`
    /// when given.
    void train(const SampleSet& train, DynamicsSink* sink,
               std::ostream* log = nullptr);

private:
    MlpClassifier& model_;
    TrainConfig config_;
    std::vector<std::vector<double>> velocity_w_;
    std::vector<std::vector<double>> velocity_b_;
};

namespace model {

/// Weights uniform in (-sqrt(6/fan_in), +sqrt(6/fan_in)) from the Philox
/// stream of `seed`; biases zero. Same seed, same bytes.
MlpClassifier init(const std::vector<int>& layer_dims, std::uint64_t seed);

std::vector<double> forward(const MlpClassifier& model,
                            std::span<const double> features);

/// Fraction of argmax-correct predictions (ties to the lowest class index).
double evaluate(const MlpClassifier& model, const SampleSet& set);

} // namespace model
} // namespace ducs
