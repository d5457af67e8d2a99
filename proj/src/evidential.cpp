#include "ducs/evidential.hpp"

#include <algorithm>
#include <cmath>

#include "ducs/errors.hpp"
#include "ducs/numerics.hpp"

namespace ducs {

CeMode parse_ce_mode(const std::string& text) {
    if (text == "softmax") return CeMode::Softmax;
    if (text == "none") return CeMode::None;
    throw UsageError("ce_mode must be 'softmax' or 'none', got '" + text + "'");
}

std::string to_string(CeMode mode) {
    return mode == CeMode::Softmax ? "softmax" : "none";
}

namespace evidential {

namespace {

constexpr double kOneHotTol = 0.0; // entries must be exact 0/1
constexpr double kAlphaHatSlack = 1e-12;

void check_class_count(std::size_t c) {
    if (c < 2) throw DataError("evidential ops need at least 2 classes");
}

double softmax_ce(std::span<const double> logits, int true_class) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (const double z : logits) sum += std::exp(z - peak);
    return peak + std::log(sum) - logits[static_cast<std::size_t>(true_class)];
}

} // namespace

int one_hot_index(std::span<const double> one_hot) {
    int index = -1;
    for (std::size_t c = 0; c < one_hot.size(); ++c) {
        if (one_hot[c] == 1.0) {
            if (index >= 0) throw DataError("label has more than one hot entry");
            index = static_cast<int>(c);
        } else if (one_hot[c] != kOneHotTol) {
            throw DataError("label entry " + std::to_string(c) +
                            " is neither 0 nor 1");
        }
    }
    if (index < 0) throw DataError("label has no hot entry");
    return index;
}

EvidentialBelief dirichlet_from_logits(std::span<const double> logits) {
    check_class_count(logits.size());
    EvidentialBelief belief;
    belief.alpha.resize(logits.size());
    double strength = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        if (!std::isfinite(logits[c])) {
            throw NumericError("non-finite logit at class " + std::to_string(c));
        }
        belief.alpha[c] = std::max(0.0, logits[c]) + 1.0;
        strength += belief.alpha[c];
    }
    belief.strength = strength;
    belief.probs.resize(logits.size());
    for (std::size_t c = 0; c < logits.size(); ++c) {
        belief.probs[c] = belief.alpha[c] / strength;
    }
    return belief;
}

double dirichlet_ce_loss(const EvidentialBelief& belief,
                         std::span<const double> one_hot) {
    if (one_hot.size() != belief.class_count()) {
        throw DataError("label length does not match class count");
    }
    const int true_class = one_hot_index(one_hot);
    return numerics::digamma(belief.strength) -
           numerics::digamma(belief.alpha[static_cast<std::size_t>(true_class)]);
}

std::vector<double> remove_incorrect_support(const EvidentialBelief& belief,
                                             std::span<const double> one_hot) {
    if (one_hot.size() != belief.class_count()) {
        throw DataError("label length does not match class count");
    }
    const int true_class = one_hot_index(one_hot);
    std::vector<double> alpha_hat(belief.alpha.begin(), belief.alpha.end());
    alpha_hat[static_cast<std::size_t>(true_class)] = 1.0;
    return alpha_hat;
}

double kl_to_uniform(std::span<const double> alpha_hat) {
    check_class_count(alpha_hat.size());
    double strength = 0.0;
    for (std::size_t c = 0; c < alpha_hat.size(); ++c) {
        if (alpha_hat[c] < 1.0 - kAlphaHatSlack) {
            throw NumericError("kl_to_uniform: entry " + std::to_string(c) +
                               " is below 1");
        }
        strength += alpha_hat[c];
    }
    const double c_count = static_cast<double>(alpha_hat.size());
    const double psi_strength = numerics::digamma(strength);
    double value = numerics::log_gamma(strength) - numerics::log_gamma(c_count);
    for (const double a : alpha_hat) {
        value -= numerics::log_gamma(a);
        value += (a - 1.0) * (numerics::digamma(std::max(a, 1.0)) - psi_strength);
    }
    return value;
}

double annealing_coefficient(int epoch, int anneal_epochs, double lambda_max) {
    if (epoch < 1 || anneal_epochs < 1) {
        throw UsageError("annealing_coefficient: epoch and anneal_epochs must be >= 1");
    }
    const double ramp = static_cast<double>(epoch) / static_cast<double>(anneal_epochs);
    return lambda_max * std::min(1.0, ramp);
}

LossBreakdown compound_loss_at(std::span<const double> logits, int true_class,
                               double lambda_t, CeMode ce_mode) {
    check_class_count(logits.size());
    const EvidentialBelief belief = dirichlet_from_logits(logits);
    std::vector<double> alpha_hat(belief.alpha.begin(), belief.alpha.end());
    alpha_hat[static_cast<std::size_t>(true_class)] = 1.0;

    LossBreakdown loss;
    loss.lambda_t = lambda_t;
    loss.ce_term = ce_mode == CeMode::Softmax ? softmax_ce(logits, true_class) : 0.0;
    loss.dirichlet_term =
        numerics::digamma(belief.strength) -
        numerics::digamma(belief.alpha[static_cast<std::size_t>(true_class)]);
    loss.kl_term = kl_to_uniform(alpha_hat);
    loss.total = loss.ce_term + loss.dirichlet_term + lambda_t * loss.kl_term;
    return loss;
}

LossBreakdown compound_loss(std::span<const double> logits,
                            std::span<const double> one_hot, double lambda_t,
                            CeMode ce_mode) {
    if (one_hot.size() != logits.size()) {
        throw DataError("label length does not match class count");
    }
    return compound_loss_at(logits, one_hot_index(one_hot), lambda_t, ce_mode);
}

void compound_loss_gradient_at(std::span<const double> logits, int true_class,
                               double lambda_t, CeMode ce_mode,
                               std::span<double> grad_out) {
    const std::size_t c_count = logits.size();
    check_class_count(c_count);
    const std::size_t true_c = static_cast<std::size_t>(true_class);

    // Softmax cross-entropy: d/dz_j = p_j - y_j.
    if (ce_mode == CeMode::Softmax) {
        const double peak = *std::max_element(logits.begin(), logits.end());
        double sum = 0.0;
        for (const double z : logits) sum += std::exp(z - peak);
        for (std::size_t j = 0; j < c_count; ++j) {
            grad_out[j] = std::exp(logits[j] - peak) / sum;
        }
        grad_out[true_c] -= 1.0;
    } else {
        std::fill(grad_out.begin(), grad_out.end(), 0.0);
    }

    // alpha_j = relu(z_j) + 1 and its masked strength sums.
    double strength = 0.0;      // Q
    double strength_hat = 0.0;  // sum of alpha_hat
    for (std::size_t j = 0; j < c_count; ++j) {
        if (!std::isfinite(logits[j])) {
            throw NumericError("non-finite logit at class " + std::to_string(j));
        }
        const double alpha = std::max(0.0, logits[j]) + 1.0;
        strength += alpha;
        strength_hat += j == true_c ? 1.0 : alpha;
    }

    // Dirichlet term: d/dalpha_j = psi'(Q) - [j == true] psi'(alpha_true).
    const double psi1_strength = numerics::trigamma(strength);
    const double alpha_true = std::max(0.0, logits[true_c]) + 1.0;
    const double psi1_alpha_true = numerics::trigamma(alpha_true);
    // KL term: d/dalpha_hat_j = (alpha_hat_j - 1) psi'(alpha_hat_j)
    //                           - (S_hat - C) psi'(S_hat), zero on true class.
    const double psi1_hat = numerics::trigamma(strength_hat);
    const double hat_excess = strength_hat - static_cast<double>(c_count);

    for (std::size_t j = 0; j < c_count; ++j) {
        if (logits[j] <= 0.0) continue; // relu subgradient 0 at and below 0
        double g = psi1_strength;
        if (j == true_c) {
            g -= psi1_alpha_true;
        } else {
            const double alpha = logits[j] + 1.0;
            g += lambda_t *
                 ((alpha - 1.0) * numerics::trigamma(alpha) - hat_excess * psi1_hat);
        }
        grad_out[j] += g;
    }
}

std::vector<double> compound_loss_gradient(std::span<const double> logits,
                                           std::span<const double> one_hot,
                                           double lambda_t, CeMode ce_mode) {
    if (one_hot.size() != logits.size()) {
        throw DataError("label length does not match class count");
    }
    std::vector<double> grad(logits.size());
    compound_loss_gradient_at(logits, one_hot_index(one_hot), lambda_t, ce_mode,
                              grad);
    return grad;
}

double confidence_score(const EvidentialBelief& belief) {
    double sum_sq = 0.0;
    for (const double a : belief.alpha) sum_sq += a * a;
    return std::sqrt(sum_sq);
}

} // namespace evidential
} // namespace ducs
