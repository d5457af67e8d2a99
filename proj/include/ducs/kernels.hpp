#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ducs/model.hpp"

namespace ducs {

struct ParamGrads {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    void resize_like(const MlpClassifier& model);
};

/// Per-batch activations, pre-activations and deltas, reused across batches.
struct BatchWorkspace {
    std::vector<std::vector<double>> act;   // act[0] = inputs; act[l] post-relu
    std::vector<std::vector<double>> pre;   // pre[l], l >= 1
    std::vector<std::vector<double>> delta; // delta[l], l >= 1
    std::vector<double> sample_loss;

    void prepare(const MlpClassifier& model, std::size_t batch_size);
};

// The data-parallel kernels. ducs::kernels runs them under OpenMP,
// ducs::reference is the serial implementation kept for testing; both produce
// bit-identical results for any thread count (per-slot writes, and every
// floating-point accumulator sees the same addition order).
namespace kernels {

/// Forward pass of one sample; scratch holds two layer-wide buffers.
struct ForwardScratch {
    std::vector<double> a;
    std::vector<double> b;
    void prepare(const MlpClassifier& model);
};
void forward_into(const MlpClassifier& model, std::span<const double> features,
                  std::span<double> logits_out, ForwardScratch& scratch);

/// End-of-epoch pass: confidence ||alpha||_2 and argmax correctness per row;
/// optionally the softmax probability margin and (margin_out/probs_out
/// non-null) the full softmax rows.
void record_pass(const MlpClassifier& model, const DatasetBundle& data,
                 std::span<const std::uint32_t> rows, float* confidence_out,
                 std::uint8_t* correct_out, float* margin_out,
                 float* probs_out);

/// Mean compound-loss gradient over a mini-batch; returns the summed loss.
double batch_gradient(const MlpClassifier& model, const DatasetBundle& data,
                      std::span<const std::uint32_t> batch, double lambda_t,
                      CeMode ce_mode, BatchWorkspace& ws, ParamGrads& grads);

long correct_count(const MlpClassifier& model, const DatasetBundle& data,
                   std::span<const std::uint32_t> rows);

/// Population variance of confidence[start0 .. start0+k) per row of an
/// n x t matrix.
std::vector<double> row_variances(const float* confidence, std::uint32_t n,
                                  std::uint32_t t, std::uint32_t start0,
                                  std::uint32_t k);

/// Final forgetting frequency per row: 1 when the row has no correct epoch,
/// else (number of 1->0 transitions) / t. Optional outputs: the raw event
/// count and the never-correct flag.
void forgetting_final(const std::uint8_t* correctness, std::uint32_t n,
                      std::uint32_t t, double* frequency_out,
                      std::uint32_t* events_out, std::uint8_t* never_correct_out);

} // namespace kernels

namespace reference {

void record_pass(const MlpClassifier& model, const DatasetBundle& data,
                 std::span<const std::uint32_t> rows, float* confidence_out,
                 std::uint8_t* correct_out, float* margin_out,
                 float* probs_out);

double batch_gradient(const MlpClassifier& model, const DatasetBundle& data,
                      std::span<const std::uint32_t> batch, double lambda_t,
                      CeMode ce_mode, BatchWorkspace& ws, ParamGrads& grads);

long correct_count(const MlpClassifier& model, const DatasetBundle& data,
                   std::span<const std::uint32_t> rows);

std::vector<double> row_variances(const float* confidence, std::uint32_t n,
                                  std::uint32_t t, std::uint32_t start0,
                                  std::uint32_t k);

void forgetting_final(const std::uint8_t* correctness, std::uint32_t n,
                      std::uint32_t t, double* frequency_out,
                      std::uint32_t* events_out, std::uint8_t* never_correct_out);

} // namespace reference
} // namespace ducs
