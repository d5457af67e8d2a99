#include "ducs/model.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "ducs/errors.hpp"
#include "ducs/kernels.hpp"
#include "ducs/kvfile.hpp"
#include "ducs/rng.hpp"

namespace ducs {

void TrainConfig::validate() const {
    if (epochs < 1) throw UsageError("config: epochs must be >= 1");
    if (batch_size < 1) throw UsageError("config: batch_size must be >= 1");
    if (learning_rate <= 0.0) throw UsageError("config: learning_rate must be > 0");
    if (momentum < 0.0 || momentum >= 1.0) {
        throw UsageError("config: momentum must be in [0, 1)");
    }
    if (anneal_epochs < 1) throw UsageError("config: anneal_epochs must be >= 1");
    if (lambda_max < 0.0 || lambda_max > 1.0) {
        throw UsageError("config: lambda_max must be in [0, 1]");
    }
    if (!layer_dims.empty() && layer_dims.size() < 2) {
        throw UsageError("config: layer_dims needs at least input and output");
    }
}

std::vector<int> TrainConfig::resolve_layer_dims(std::uint32_t input_dim,
                                                 std::uint32_t class_count) const {
    if (layer_dims.empty()) {
        return {static_cast<int>(input_dim), 128, 64, static_cast<int>(class_count)};
    }
    if (layer_dims.front() != static_cast<int>(input_dim)) {
        throw DataError("config layer_dims input " + std::to_string(layer_dims.front()) +
                        " does not match dataset dim " + std::to_string(input_dim));
    }
    if (layer_dims.back() != static_cast<int>(class_count)) {
        throw DataError("config layer_dims output " + std::to_string(layer_dims.back()) +
                        " does not match class count " + std::to_string(class_count));
    }
    return layer_dims;
}

TrainConfig TrainConfig::from_kv(const std::map<std::string, std::string>& kv) {
    TrainConfig config;
    config.epochs = static_cast<int>(kvfile::get_int(kv, "epochs"));
    config.batch_size = static_cast<int>(kvfile::get_int(kv, "batch_size"));
    config.learning_rate = kvfile::get_double(kv, "learning_rate");
    config.momentum = kvfile::get_double(kv, "momentum");
    config.seed = kvfile::get_u64(kv, "seed");
    config.anneal_epochs = static_cast<int>(kvfile::get_int(kv, "anneal_epochs"));
    config.lambda_max = kvfile::get_double(kv, "lambda_max");
    config.ce_mode = parse_ce_mode(kvfile::require(kv, "ce_mode"));
    if (const auto it = kv.find("layer_dims"); it != kv.end() && !it->second.empty()) {
        std::istringstream in(it->second);
        std::string cell;
        while (std::getline(in, cell, ',')) {
            config.layer_dims.push_back(std::stoi(cell));
        }
    }
    config.validate();
    return config;
}

TrainConfig TrainConfig::from_file(const std::string& path) {
    return from_kv(kvfile::read_file(path));
}

void TrainConfig::to_file(const std::string& path) const {
    std::string dims;
    for (std::size_t i = 0; i < layer_dims.size(); ++i) {
        if (i > 0) dims += ',';
        dims += std::to_string(layer_dims[i]);
    }
    kvfile::write_file(path,
                       {{"epochs", std::to_string(epochs)},
                        {"batch_size", std::to_string(batch_size)},
                        {"learning_rate", kvfile::format_double(learning_rate)},
                        {"momentum", kvfile::format_double(momentum)},
                        {"seed", std::to_string(seed)},
                        {"anneal_epochs", std::to_string(anneal_epochs)},
                        {"lambda_max", kvfile::format_double(lambda_max)},
                        {"ce_mode", to_string(ce_mode)},
                        {"layer_dims", dims}});
}

namespace model {

MlpClassifier init(const std::vector<int>& layer_dims, std::uint64_t seed) {
    if (layer_dims.size() < 2) {
        throw UsageError("init: layer_dims needs at least input and output");
    }
    for (const int d : layer_dims) {
        if (d < 1) throw UsageError("init: layer dims must be positive");
    }
    MlpClassifier net;
    net.layer_dims = layer_dims;
    PhiloxRng rng(seed, rng_stream::make(rng_stream::kWeightInit));
    for (std::size_t l = 1; l < layer_dims.size(); ++l) {
        const std::size_t in_w = static_cast<std::size_t>(layer_dims[l - 1]);
        const std::size_t out_w = static_cast<std::size_t>(layer_dims[l]);
        const double bound = std::sqrt(6.0 / static_cast<double>(in_w));
        std::vector<double> w(out_w * in_w);
        for (double& x : w) x = (2.0 * rng.next_double() - 1.0) * bound;
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(out_w, 0.0);
    }
    return net;
}

std::vector<double> forward(const MlpClassifier& net,
                            std::span<const double> features) {
    kernels::ForwardScratch scratch;
    std::vector<double> logits(static_cast<std::size_t>(net.class_count()));
    kernels::forward_into(net, features, logits, scratch);
    return logits;
}

double evaluate(const MlpClassifier& net, const SampleSet& set) {
    if (set.rows.empty()) throw DataError("evaluate: split is empty");
    const long correct = kernels::correct_count(net, *set.data, set.rows);
    return static_cast<double>(correct) / static_cast<double>(set.rows.size());
}

} // namespace model

Trainer::Trainer(MlpClassifier& model, const TrainConfig& config)
    : model_(model), config_(config) {
    velocity_w_.resize(model.layer_count());
    velocity_b_.resize(model.layer_count());
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        velocity_w_[l].assign(model.weights[l].size(), 0.0);
        velocity_b_[l].assign(model.biases[l].size(), 0.0);
    }
}

EpochSummary Trainer::train_epoch(const SampleSet& train, int epoch,
                                  DynamicsSink* sink) {
    if (train.rows.empty()) throw DataError("train_epoch: training set is empty");
    const std::size_t n = train.rows.size();
    const double lambda_t = evidential::annealing_coefficient(
        epoch, config_.anneal_epochs, config_.lambda_max);

    std::vector<std::uint32_t> order = train.rows;
    PhiloxRng shuffle_rng(config_.seed,
                          rng_stream::make(rng_stream::kShuffle,
                                           static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    BatchWorkspace ws;
    ParamGrads grads;
    double loss_sum = 0.0;
    const std::size_t batch_size = static_cast<std::size_t>(config_.batch_size);
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t this_batch = std::min(batch_size, n - start);
        const std::span<const std::uint32_t> batch(order.data() + start, this_batch);
        const double batch_loss = kernels::batch_gradient(
            model_, *train.data, batch, lambda_t, config_.ce_mode, ws, grads);
        if (!std::isfinite(batch_loss)) {
            throw NumericError("non-finite loss at epoch " + std::to_string(epoch));
        }
        loss_sum += batch_loss;
        for (std::size_t l = 0; l < model_.layer_count(); ++l) {
            std::vector<double>& w = model_.weights[l];
            std::vector<double>& vw = velocity_w_[l];
            const std::vector<double>& gw = grads.weights[l];
            for (std::size_t j = 0; j < w.size(); ++j) {
                vw[j] = config_.momentum * vw[j] + gw[j];
                w[j] -= config_.learning_rate * vw[j];
            }
            std::vector<double>& b = model_.biases[l];
            std::vector<double>& vb = velocity_b_[l];
            const std::vector<double>& gb = grads.biases[l];
            for (std::size_t j = 0; j < b.size(); ++j) {
                vb[j] = config_.momentum * vb[j] + gb[j];
                b[j] -= config_.learning_rate * vb[j];
            }
        }
    }

    // End-of-epoch recording pass: one parameter snapshot per epoch for
    // every training sample, emitted in sample order.
    const bool extended = sink != nullptr && sink->wants_probabilities();
    std::vector<float> confidence(n);
    std::vector<std::uint8_t> correctness(n);
    std::vector<float> margins(extended ? n : 0);
    std::vector<float> probs;
    const bool final_epoch = epoch == config_.epochs;
    if (extended && final_epoch) {
        probs.resize(n * static_cast<std::size_t>(model_.class_count()));
    }
    kernels::record_pass(model_, *train.data, train.rows, confidence.data(),
                         correctness.data(), extended ? margins.data() : nullptr,
                         probs.empty() ? nullptr : probs.data());
    if (sink != nullptr) {
        sink->on_epoch(epoch, confidence, correctness, margins);
        if (!probs.empty()) sink->on_final_probabilities(probs);
    }

    long correct = 0;
    for (const std::uint8_t c : correctness) correct += c;
    return {loss_sum / static_cast<double>(n),
            static_cast<double>(correct) / static_cast<double>(n)};
}

void Trainer::train(const SampleSet& train, DynamicsSink* sink,
                    std::ostream* log) {
    for (int epoch = 1; epoch <= config_.epochs; ++epoch) {
        const EpochSummary summary = train_epoch(train, epoch, sink);
        if (log != nullptr) {
            (*log) << "epoch " << epoch << " loss " << summary.mean_loss
                   << " train_acc " << summary.train_accuracy << "\n";
        }
    }
}

} // namespace ducs
