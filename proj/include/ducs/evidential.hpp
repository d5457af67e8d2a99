#pragma once

#include <span>
#include <string>
#include <vector>

namespace ducs {

/// Dirichlet belief derived from logits: alpha_c = relu(z_c) + 1, strength
/// Q = sum alpha_c, probs_c = alpha_c / Q. Every alpha_c >= 1 and Q >= C by
/// construction.
struct EvidentialBelief {
    std::vector<double> alpha;
    double strength = 0.0;
    std::vector<double> probs;

    std::size_t class_count() const { return alpha.size(); }
};

/// Per-sample loss decomposition. total is exactly
/// ce_term + dirichlet_term + lambda_t * kl_term.
struct LossBreakdown {
    double ce_term = 0.0;
    double dirichlet_term = 0.0;
    double kl_term = 0.0;
    double lambda_t = 0.0;
    double total = 0.0;
};

/// Classification term of the compound loss: conventional softmax
/// cross-entropy over the logits, or dropped entirely for a pure
/// evidential ablation.
enum class CeMode { Softmax, None };

CeMode parse_ce_mode(const std::string& text);
std::string to_string(CeMode mode);

namespace evidential {

EvidentialBelief dirichlet_from_logits(std::span<const double> logits);

/// psi(Q) - psi(alpha_true); the expected cross-entropy under the belief.
double dirichlet_ce_loss(const EvidentialBelief& belief,
                         std::span<const double> one_hot);

/// alpha_hat = (alpha - 1) .* (1 - y) + 1: the true-class entry drops to the
/// uninformative baseline, incorrect classes keep their evidence.
std::vector<double> remove_incorrect_support(const EvidentialBelief& belief,
                                             std::span<const double> one_hot);

/// KL[Dir(alpha_hat) || Dir(1)] in the standard log-product form; >= 0 with
/// equality iff alpha_hat is all ones. Entries must be >= 1 (1e-12 slack).
double kl_to_uniform(std::span<const double> alpha_hat);

/// lambda_t = lambda_max * min(1, epoch / anneal_epochs).
double annealing_coefficient(int epoch, int anneal_epochs, double lambda_max);

LossBreakdown compound_loss(std::span<const double> logits,
                            std::span<const double> one_hot, double lambda_t,
                            CeMode ce_mode = CeMode::Softmax);

/// Analytic d total / d logits, chained through the relu+1 parameterization
/// (subgradient 0 at the kink). Matches fd_gradient to 1e-5 relative away
/// from kinks.
std::vector<double> compound_loss_gradient(std::span<const double> logits,
                                           std::span<const double> one_hot,
                                           double lambda_t,
                                           CeMode ce_mode = CeMode::Softmax);

/// S = ||alpha||_2, the per-sample confidence score.
double confidence_score(const EvidentialBelief& belief);

// Index-based variants used by the training inner loop; identical math
// without the one-hot round trip.
int one_hot_index(std::span<const double> one_hot);
LossBreakdown compound_loss_at(std::span<const double> logits, int true_class,
                               double lambda_t, CeMode ce_mode);
void compound_loss_gradient_at(std::span<const double> logits, int true_class,
                               double lambda_t, CeMode ce_mode,
                               std::span<double> grad_out);

} // namespace evidential
} // namespace ducs
