#include "ducs/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "ducs/errors.hpp"
#include "ducs/numerics.hpp"

namespace ducs {

void ParamGrads::resize_like(const MlpClassifier& model) {
    weights.resize(model.layer_count());
    biases.resize(model.layer_count());
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        weights[l].assign(model.weights[l].size(), 0.0);
        biases[l].assign(model.biases[l].size(), 0.0);
    }
}

void BatchWorkspace::prepare(const MlpClassifier& model, std::size_t batch_size) {
    const std::size_t layers = model.layer_count();
    act.resize(layers);
    pre.resize(layers + 1);
    delta.resize(layers + 1);
    for (std::size_t l = 0; l < layers; ++l) {
        act[l].resize(batch_size * static_cast<std::size_t>(model.layer_dims[l]));
    }
    for (std::size_t l = 1; l <= layers; ++l) {
        pre[l].resize(batch_size * static_cast<std::size_t>(model.layer_dims[l]));
        delta[l].resize(batch_size * static_cast<std::size_t>(model.layer_dims[l]));
    }
    sample_loss.resize(batch_size);
}

namespace {

int argmax_lowest(std::span<const double> values) {
    int best = 0;
    for (int j = 1; j < static_cast<int>(values.size()); ++j) {
        if (values[static_cast<std::size_t>(j)] >
            values[static_cast<std::size_t>(best)]) {
            best = j;
        }
    }
    return best;
}

void softmax_into(std::span<const double> logits, std::span<double> out) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        out[c] = std::exp(logits[c] - peak);
        sum += out[c];
    }
    for (std::size_t c = 0; c < logits.size(); ++c) out[c] /= sum;
}

// Shared per-sample body of the recording pass.
void record_one(const MlpClassifier& model, const DatasetBundle& data,
                std::uint32_t row, kernels::ForwardScratch& scratch,
                std::vector<double>& logits, std::vector<double>& probs_buf,
                float* conf_out, std::uint8_t* correct_out, float* margin_out,
                float* probs_out) {
    const int c_count = model.class_count();
    logits.resize(static_cast<std::size_t>(c_count));
    kernels::forward_into(model, data.row(row), logits, scratch);

    double sum_sq = 0.0;
    for (const double z : logits) {
        const double alpha = std::max(0.0, z) + 1.0;
        sum_sq += alpha * alpha;
    }
    *conf_out = static_cast<float>(std::sqrt(sum_sq));

    const int predicted = argmax_lowest(logits);
    const int label = data.labels[row];
    *correct_out = predicted == label ? 1 : 0;

    if (margin_out != nullptr || probs_out != nullptr) {
        probs_buf.resize(static_cast<std::size_t>(c_count));
        softmax_into(logits, probs_buf);
        if (margin_out != nullptr) {
            double best_other = -1.0;
            for (int c = 0; c < c_count; ++c) {
                if (c == label) continue;
                best_other = std::max(best_other, probs_buf[static_cast<std::size_t>(c)]);
            }
            *margin_out = static_cast<float>(
                probs_buf[static_cast<std::size_t>(label)] - best_other);
        }
        if (probs_out != nullptr) {
            for (int c = 0; c < c_count; ++c) {
                probs_out[c] = static_cast<float>(probs_buf[static_cast<std::size_t>(c)]);
            }
        }
    }
}

// Phase A of the batch gradient: forward + per-layer deltas for one sample.
void sample_forward_backward(const MlpClassifier& model, const DatasetBundle& data,
                             std::uint32_t row, std::size_t b, double lambda_t,
                             CeMode ce_mode, BatchWorkspace& ws) {
    const std::size_t layers = model.layer_count();
    const auto width = [&](std::size_t l) {
        return static_cast<std::size_t>(model.layer_dims[l]);
    };

    double* input = ws.act[0].data() + b * width(0);
    const auto features = data.row(row);
    std::memcpy(input, features.data(), width(0) * sizeof(double));

    for (std::size_t l = 1; l <= layers; ++l) {
        const std::size_t in_w = width(l - 1);
        const std::size_t out_w = width(l);
        const double* src = l == 1 ? input : ws.act[l - 1].data() + b * in_w;
        const std::vector<double>& w = model.weights[l - 1];
        const std::vector<double>& bias = model.biases[l - 1];
        double* z = ws.pre[l].data() + b * out_w;
        for (std::size_t r = 0; r < out_w; ++r) {
            const double* w_row = w.data() + r * in_w;
            double acc = bias[r];
            for (std::size_t c = 0; c < in_w; ++c) acc += w_row[c] * src[c];
            z[r] = acc;
        }
        if (l < layers) {
            double* a = ws.act[l].data() + b * out_w;
            for (std::size_t r = 0; r < out_w; ++r) a[r] = std::max(0.0, z[r]);
        }
    }

    const std::size_t c_count = width(layers);
    const std::span<const double> logits(ws.pre[layers].data() + b * c_count, c_count);
    const int label = data.labels[row];
    ws.sample_loss[b] =
        evidential::compound_loss_at(logits, label, lambda_t, ce_mode).total;
    evidential::compound_loss_gradient_at(
        logits, label, lambda_t, ce_mode,
        {ws.delta[layers].data() + b * c_count, c_count});

    for (std::size_t l = layers; l >= 2; --l) {
        const std::size_t in_w = width(l - 1);
        const std::size_t out_w = width(l);
        const std::vector<double>& w = model.weights[l - 1];
        const double* d_next = ws.delta[l].data() + b * out_w;
        const double* z_prev = ws.pre[l - 1].data() + b * in_w;
        double* d_prev = ws.delta[l - 1].data() + b * in_w;
        for (std::size_t j = 0; j < in_w; ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < out_w; ++r) {
                acc += w[r * in_w + j] * d_next[r];
            }
            d_prev[j] = z_prev[j] > 0.0 ? acc : 0.0;
        }
    }
}

} // namespace

namespace kernels {

void ForwardScratch::prepare(const MlpClassifier& model) {
    const int max_width =
        *std::max_element(model.layer_dims.begin(), model.layer_dims.end());
    a.resize(static_cast<std::size_t>(max_width));
    b.resize(static_cast<std::size_t>(max_width));
}

void forward_into(const MlpClassifier& model, std::span<const double> features,
                  std::span<double> logits_out, ForwardScratch& scratch) {
    if (features.size() != static_cast<std::size_t>(model.input_dim())) {
        throw DataError("forward: feature length " + std::to_string(features.size()) +
                        " does not match input dim " +
                        std::to_string(model.input_dim()));
    }
    scratch.prepare(model);
    const std::size_t layers = model.layer_count();
    std::copy(features.begin(), features.end(), scratch.a.begin());
    double* cur = scratch.a.data();
    double* next = scratch.b.data();
    for (std::size_t l = 1; l <= layers; ++l) {
        const std::size_t in_w = static_cast<std::size_t>(model.layer_dims[l - 1]);
        const std::size_t out_w = static_cast<std::size_t>(model.layer_dims[l]);
        const std::vector<double>& w = model.weights[l - 1];
        const std::vector<double>& bias = model.biases[l - 1];
        double* dst = l == layers ? logits_out.data() : next;
        for (std::size_t r = 0; r < out_w; ++r) {
            const double* w_row = w.data() + r * in_w;
            double acc = bias[r];
            for (std::size_t c = 0; c < in_w; ++c) acc += w_row[c] * cur[c];
            dst[r] = l == layers ? acc : std::max(0.0, acc);
        }
        std::swap(cur, next);
    }
}

void record_pass(const MlpClassifier& model, const DatasetBundle& data,
                 std::span<const std::uint32_t> rows, float* confidence_out,
                 std::uint8_t* correct_out, float* margin_out, float* probs_out) {
    const int c_count = model.class_count();
    const int threads = omp_get_max_threads();
    std::vector<ForwardScratch> scratch(static_cast<std::size_t>(threads));
    std::vector<std::vector<double>> logits_buf(static_cast<std::size_t>(threads));
    std::vector<std::vector<double>> probs_buf(static_cast<std::size_t>(threads));
    for (auto& s : scratch) s.prepare(model);

#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(rows.size()); ++i) {
        const auto tid = static_cast<std::size_t>(omp_get_thread_num());
        record_one(model, data, rows[static_cast<std::size_t>(i)], scratch[tid],
                   logits_buf[tid], probs_buf[tid], confidence_out + i,
                   correct_out + i,
                   margin_out == nullptr ? nullptr : margin_out + i,
                   probs_out == nullptr ? nullptr : probs_out + i * c_count);
    }
}

double batch_gradient(const MlpClassifier& model, const DatasetBundle& data,
                      std::span<const std::uint32_t> batch, double lambda_t,
                      CeMode ce_mode, BatchWorkspace& ws, ParamGrads& grads) {
    const std::size_t batch_size = batch.size();
    ws.prepare(model, batch_size);
    grads.resize_like(model);
    const std::size_t layers = model.layer_count();

#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(batch_size); ++b) {
        sample_forward_backward(model, data, batch[static_cast<std::size_t>(b)],
                                static_cast<std::size_t>(b), lambda_t, ce_mode, ws);
    }

    // dW_l = delta_l^T act_{l-1} / B with a serial ascending-b inner loop per
    // entry, so the sum order never depends on the thread count.
    const double inv_b = 1.0 / static_cast<double>(batch_size);
    for (std::size_t l = 1; l <= layers; ++l) {
        const std::size_t in_w = static_cast<std::size_t>(model.layer_dims[l - 1]);
        const std::size_t out_w = static_cast<std::size_t>(model.layer_dims[l]);
        const std::vector<double>& a = ws.act[l - 1];
        const std::vector<double>& d = ws.delta[l];
        std::vector<double>& gw = grads.weights[l - 1];
        std::vector<double>& gb = grads.biases[l - 1];
#pragma omp parallel for schedule(static)
        for (std::int64_t r = 0; r < static_cast<std::int64_t>(out_w); ++r) {
            const std::size_t ru = static_cast<std::size_t>(r);
            for (std::size_t c = 0; c < in_w; ++c) {
                double acc = 0.0;
                for (std::size_t b = 0; b < batch_size; ++b) {
                    acc += d[b * out_w + ru] * a[b * in_w + c];
                }
                gw[ru * in_w + c] = acc * inv_b;
            }
            double acc = 0.0;
            for (std::size_t b = 0; b < batch_size; ++b) acc += d[b * out_w + ru];
            gb[ru] = acc * inv_b;
        }
    }

    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batch_size; ++b) loss_sum += ws.sample_loss[b];
    return loss_sum;
}

long correct_count(const MlpClassifier& model, const DatasetBundle& data,
                   std::span<const std::uint32_t> rows) {
    const int threads = omp_get_max_threads();
    std::vector<ForwardScratch> scratch(static_cast<std::size_t>(threads));
    for (auto& s : scratch) s.prepare(model);
    std::vector<double> logits_storage(
        static_cast<std::size_t>(threads) *
        static_cast<std::size_t>(model.class_count()));

    long count = 0;
#pragma omp parallel for schedule(static) reduction(+ : count)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(rows.size()); ++i) {
        const auto tid = static_cast<std::size_t>(omp_get_thread_num());
        const std::span<double> logits(
            logits_storage.data() + tid * static_cast<std::size_t>(model.class_count()),
            static_cast<std::size_t>(model.class_count()));
        const std::uint32_t row = rows[static_cast<std::size_t>(i)];
        forward_into(model, data.row(row), logits, scratch[tid]);
        if (argmax_lowest(logits) == data.labels[row]) ++count;
    }
    return count;
}

std::vector<double> row_variances(const float* confidence, std::uint32_t n,
                                  std::uint32_t t, std::uint32_t start0,
                                  std::uint32_t k) {
    std::vector<double> variances(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        const std::span<const float> row(confidence + i * t, t);
        variances[static_cast<std::size_t>(i)] =
            numerics::window_variance(row, start0, k);
    }
    return variances;
}

void forgetting_final(const std::uint8_t* correctness, std::uint32_t n,
                      std::uint32_t t, double* frequency_out,
                      std::uint32_t* events_out, std::uint8_t* never_correct_out) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        const std::uint8_t* row = correctness + i * t;
        std::uint32_t events = 0;
        bool any_correct = false;
        for (std::uint32_t e = 0; e < t; ++e) {
            if (row[e]) any_correct = true;
            if (e > 0 && row[e - 1] == 1 && row[e] == 0) ++events;
        }
        frequency_out[i] = any_correct
                               ? static_cast<double>(events) / static_cast<double>(t)
                               : 1.0;
        if (events_out != nullptr) events_out[i] = events;
        if (never_correct_out != nullptr) never_correct_out[i] = any_correct ? 0 : 1;
    }
}

} // namespace kernels

namespace reference {

void record_pass(const MlpClassifier& model, const DatasetBundle& data,
                 std::span<const std::uint32_t> rows, float* confidence_out,
                 std::uint8_t* correct_out, float* margin_out, float* probs_out) {
    const int c_count = model.class_count();
    kernels::ForwardScratch scratch;
    scratch.prepare(model);
    std::vector<double> logits_buf;
    std::vector<double> probs_buf;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        record_one(model, data, rows[i], scratch, logits_buf, probs_buf,
                   confidence_out + i, correct_out + i,
                   margin_out == nullptr ? nullptr : margin_out + i,
                   probs_out == nullptr ? nullptr
                                        : probs_out + i * static_cast<std::size_t>(c_count));
    }
}

double batch_gradient(const MlpClassifier& model, const DatasetBundle& data,
                      std::span<const std::uint32_t> batch, double lambda_t,
                      CeMode ce_mode, BatchWorkspace& ws, ParamGrads& grads) {
    const std::size_t batch_size = batch.size();
    ws.prepare(model, batch_size);
    grads.resize_like(model);
    const std::size_t layers = model.layer_count();

    // Classic per-sample accumulation; same addition order per entry as the
    // parallel kernel.
    for (std::size_t b = 0; b < batch_size; ++b) {
        sample_forward_backward(model, data, batch[b], b, lambda_t, ce_mode, ws);
        for (std::size_t l = 1; l <= layers; ++l) {
            const std::size_t in_w = static_cast<std::size_t>(model.layer_dims[l - 1]);
            const std::size_t out_w = static_cast<std::size_t>(model.layer_dims[l]);
            const double* a = ws.act[l - 1].data() + b * in_w;
            const double* d = ws.delta[l].data() + b * out_w;
            std::vector<double>& gw = grads.weights[l - 1];
            std::vector<double>& gb = grads.biases[l - 1];
            for (std::size_t r = 0; r < out_w; ++r) {
                for (std::size_t c = 0; c < in_w; ++c) {
                    gw[r * in_w + c] += d[r] * a[c];
                }
                gb[r] += d[r];
            }
        }
    }

    const double inv_b = 1.0 / static_cast<double>(batch_size);
    for (std::size_t l = 0; l < layers; ++l) {
        for (double& g : grads.weights[l]) g *= inv_b;
        for (double& g : grads.biases[l]) g *= inv_b;
    }

    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batch_size; ++b) loss_sum += ws.sample_loss[b];
    return loss_sum;
}

long correct_count(const MlpClassifier& model, const DatasetBundle& data,
                   std::span<const std::uint32_t> rows) {
    kernels::ForwardScratch scratch;
    scratch.prepare(model);
    std::vector<double> logits(static_cast<std::size_t>(model.class_count()));
    long count = 0;
    for (const std::uint32_t row : rows) {
        kernels::forward_into(model, data.row(row), logits, scratch);
        if (argmax_lowest(logits) == data.labels[row]) ++count;
    }
    return count;
}

std::vector<double> row_variances(const float* confidence, std::uint32_t n,
                                  std::uint32_t t, std::uint32_t start0,
                                  std::uint32_t k) {
    std::vector<double> variances(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::span<const float> row(confidence + static_cast<std::size_t>(i) * t, t);
        variances[i] = numerics::window_variance(row, start0, k);
    }
    return variances;
}

void forgetting_final(const std::uint8_t* correctness, std::uint32_t n,
                      std::uint32_t t, double* frequency_out,
                      std::uint32_t* events_out, std::uint8_t* never_correct_out) {
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint8_t* row = correctness + static_cast<std::size_t>(i) * t;
        std::uint32_t events = 0;
        bool any_correct = false;
        for (std::uint32_t e = 0; e < t; ++e) {
            if (row[e]) any_correct = true;
            if (e > 0 && row[e - 1] == 1 && row[e] == 0) ++events;
        }
        frequency_out[i] = any_correct
                               ? static_cast<double>(events) / static_cast<double>(t)
                               : 1.0;
        if (events_out != nullptr) events_out[i] = events;
        if (never_correct_out != nullptr) never_correct_out[i] = any_correct ? 0 : 1;
    }
}

} // namespace reference
} // namespace ducs
