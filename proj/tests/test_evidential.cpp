#include <doctest.h>

#include <cmath>
#include <vector>

#include "ducs/errors.hpp"
#include "ducs/evidential.hpp"
#include "ducs/numerics.hpp"
#include "ducs/rng.hpp"

using namespace ducs;
using namespace ducs::evidential;

namespace {

std::vector<double> one_hot(std::size_t c_count, std::size_t hot) {
    std::vector<double> y(c_count, 0.0);
    y[hot] = 1.0;
    return y;
}

// |a - b| <= tol * max(1, |b|): relative with an absolute floor.
bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

} // namespace

TEST_CASE("dirichlet_from_logits clamps and normalizes") {
    {
        const auto b = dirichlet_from_logits(std::vector<double>{0.0, 0.0, 0.0});
        CHECK(b.alpha == std::vector<double>{1.0, 1.0, 1.0});
        CHECK(b.strength == 3.0);
        for (const double p : b.probs) CHECK(p == doctest::Approx(1.0 / 3.0));
    }
    {
        const auto b = dirichlet_from_logits(std::vector<double>{2.0, -1.0, 0.0});
        CHECK(b.alpha == std::vector<double>{3.0, 1.0, 1.0});
        CHECK(b.strength == 5.0);
        CHECK(b.probs[0] == doctest::Approx(0.6));
        CHECK(b.probs[1] == doctest::Approx(0.2));
        CHECK(b.probs[2] == doctest::Approx(0.2));
    }
    {
        const auto b = dirichlet_from_logits(std::vector<double>{-5.0, -5.0});
        CHECK(b.alpha == std::vector<double>{1.0, 1.0});
        CHECK(b.strength == 2.0);
        CHECK(b.probs[0] == 0.5);
        CHECK(b.probs[1] == 0.5);
    }
    double sum = 0.0;
    const auto b = dirichlet_from_logits(std::vector<double>{1.3, 0.2, -0.4, 7.0});
    for (const double p : b.probs) sum += p;
    CHECK(std::abs(sum - 1.0) < 1e-12);
    CHECK_THROWS_AS(
        (void)dirichlet_from_logits(std::vector<double>{
            1.0, std::numeric_limits<double>::quiet_NaN()}),
        NumericError);
}

TEST_CASE("dirichlet cross-entropy loss values") {
    {
        const auto b = dirichlet_from_logits(std::vector<double>{-1.0, -1.0});
        CHECK(std::abs(dirichlet_ce_loss(b, one_hot(2, 0)) - 1.0) < 1e-12);
    }
    {
        const auto b = dirichlet_from_logits(std::vector<double>{0.0, 0.0, 0.0});
        CHECK(std::abs(dirichlet_ce_loss(b, one_hot(3, 1)) - 1.5) < 1e-10);
    }
    {
        // alpha = [3,1,1]: psi(5) - psi(3) = 1/3 + 1/4
        const auto b = dirichlet_from_logits(std::vector<double>{2.0, -1.0, 0.0});
        CHECK(std::abs(dirichlet_ce_loss(b, one_hot(3, 0)) - 7.0 / 12.0) < 1e-10);
    }
    const auto b = dirichlet_from_logits(std::vector<double>{1.0, 2.0});
    CHECK_THROWS_AS((void)dirichlet_ce_loss(b, std::vector<double>{0.5, 0.5}),
                    DataError);
    CHECK_THROWS_AS((void)dirichlet_ce_loss(b, std::vector<double>{1.0, 1.0}),
                    DataError);
    CHECK_THROWS_AS((void)dirichlet_ce_loss(b, std::vector<double>{0.0, 0.0}),
                    DataError);
}

TEST_CASE("dirichlet_ce_loss is strictly positive for C >= 2") {
    PhiloxRng rng(301, 0);
    for (int i = 0; i < 200; ++i) {
        const std::size_t c_count = 2 + rng.next_below(9);
        std::vector<double> logits(c_count);
        for (double& z : logits) z = rng.next_double() * 8.0 - 4.0;
        const auto b = dirichlet_from_logits(logits);
        const std::size_t hot = rng.next_below(c_count);
        CHECK(dirichlet_ce_loss(b, one_hot(c_count, hot)) > 0.0);
    }
}

TEST_CASE("remove_incorrect_support") {
    {
        const auto b = dirichlet_from_logits(std::vector<double>{2.0, -1.0, 0.0});
        CHECK(remove_incorrect_support(b, one_hot(3, 0)) ==
              std::vector<double>{1.0, 1.0, 1.0});
    }
    {
        const auto b = dirichlet_from_logits(std::vector<double>{1.0, 4.0, -2.0});
        CHECK(remove_incorrect_support(b, one_hot(3, 1)) ==
              std::vector<double>{2.0, 1.0, 1.0});
    }
    {
        const auto b = dirichlet_from_logits(std::vector<double>{-1.0, -1.0, -1.0});
        CHECK(remove_incorrect_support(b, one_hot(3, 2)) ==
              std::vector<double>{1.0, 1.0, 1.0});
    }
}

TEST_CASE("kl_to_uniform closed forms") {
    CHECK(std::abs(kl_to_uniform(std::vector<double>{1.0, 1.0, 1.0})) < 1e-12);
    // [2,1]: lgamma(3) - lgamma(2) - lgamma(2) - lgamma(1)
    //        + (2-1)(psi(2) - psi(3)) = ln 2 - 1/2
    CHECK(std::abs(kl_to_uniform(std::vector<double>{2.0, 1.0}) -
                   (std::log(2.0) - 0.5)) < 1e-10);
    const double kl_10 = kl_to_uniform(std::vector<double>{10.0, 1.0, 1.0});
    const double kl_2 = kl_to_uniform(std::vector<double>{2.0, 1.0, 1.0});
    CHECK(kl_10 > kl_2);
    CHECK(kl_2 > 0.0);
    CHECK_THROWS_AS((void)kl_to_uniform(std::vector<double>{0.5, 1.0}), NumericError);
}

TEST_CASE("kl_to_uniform is nonnegative, zero only at all-ones") {
    PhiloxRng rng(302, 0);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t c_count = 2 + rng.next_below(10);
        std::vector<double> alpha_hat(c_count, 1.0);
        for (double& a : alpha_hat) a = 1.0 + rng.next_double() * 20.0;
        const double kl = kl_to_uniform(alpha_hat);
        CHECK(kl >= 0.0);
        double max_excess = 0.0;
        for (const double a : alpha_hat) max_excess = std::max(max_excess, a - 1.0);
        if (max_excess > 1e-2) CHECK(kl > 1e-10);
    }
}

TEST_CASE("annealing coefficient ramp") {
    CHECK(annealing_coefficient(1, 10, 1.0) == doctest::Approx(0.1));
    CHECK(annealing_coefficient(10, 10, 1.0) == 1.0);
    CHECK(annealing_coefficient(200, 10, 1.0) == 1.0);
    CHECK(annealing_coefficient(5, 10, 0.4) == doctest::Approx(0.2));
    for (int epoch = 1; epoch < 40; ++epoch) {
        CHECK(annealing_coefficient(epoch + 1, 13, 0.9) >=
              annealing_coefficient(epoch, 13, 0.9));
    }
}

TEST_CASE("compound loss composes its terms") {
    {
        const auto loss =
            compound_loss(std::vector<double>{0.0, 0.0}, one_hot(2, 0), 0.0);
        CHECK(std::abs(loss.ce_term - std::log(2.0)) < 1e-12);
        CHECK(std::abs(loss.dirichlet_term - 1.0) < 1e-12);
        CHECK(std::abs(loss.total - (std::log(2.0) + 1.0)) < 1e-12);
    }
    {
        const auto loss =
            compound_loss(std::vector<double>{0.0, 0.0, 0.0}, one_hot(3, 1), 1.0);
        CHECK(std::abs(loss.kl_term) < 1e-12);
        CHECK(std::abs(loss.total - (std::log(3.0) + 1.5)) < 1e-10);
    }
    {
        PhiloxRng rng(303, 0);
        std::vector<double> logits(5);
        for (double& z : logits) z = rng.next_double() * 6.0 - 3.0;
        const auto y = one_hot(5, 2);
        const auto loss = compound_loss(logits, y, 0.5);
        const auto belief = dirichlet_from_logits(logits);
        const double dirichlet = dirichlet_ce_loss(belief, y);
        const double kl = kl_to_uniform(remove_incorrect_support(belief, y));
        CHECK(std::abs(loss.dirichlet_term - dirichlet) < 1e-12);
        CHECK(std::abs(loss.kl_term - kl) < 1e-12);
        CHECK(std::abs(loss.total - (loss.ce_term + dirichlet + 0.5 * kl)) < 1e-12);
    }
    {
        const auto loss = compound_loss(std::vector<double>{0.0, 0.0}, one_hot(2, 0),
                                        1.0, CeMode::None);
        CHECK(loss.ce_term == 0.0);
    }
}

TEST_CASE("gradient in the relu dead zone is pure softmax cross-entropy") {
    const std::vector<double> logits{-1.5, -2.0, -3.0};
    const auto y = one_hot(3, 1);
    const auto grad = compound_loss_gradient(logits, y, 0.7);
    // softmax gradient p - y
    double peak = -1.5;
    double sum = 0.0;
    std::vector<double> p(3);
    for (std::size_t c = 0; c < 3; ++c) sum += p[c] = std::exp(logits[c] - peak);
    for (std::size_t c = 0; c < 3; ++c) p[c] /= sum;
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(std::abs(grad[c] - (p[c] - y[c])) < 1e-14);
    }
    // and with ce_mode none the whole gradient vanishes there
    const auto grad_none = compound_loss_gradient(logits, y, 0.7, CeMode::None);
    for (const double g : grad_none) CHECK(g == 0.0);
}

TEST_CASE("analytic gradient matches central differences") {
    PhiloxRng rng(304, 0);
    int checked = 0;
    for (const int c_count : {2, 5, 11}) {
        for (int trial = 0; trial < 34; ++trial) {
            std::vector<double> logits(static_cast<std::size_t>(c_count));
            for (double& z : logits) z = rng.next_double() * 6.0 - 3.0;
            const std::size_t hot = rng.next_below(static_cast<std::uint64_t>(c_count));
            const auto y = one_hot(static_cast<std::size_t>(c_count), hot);
            const double lambda = rng.next_double();
            const CeMode mode = trial % 3 == 0 ? CeMode::None : CeMode::Softmax;

            const auto analytic = compound_loss_gradient(logits, y, lambda, mode);
            const auto fd = numerics::fd_gradient(
                [&](const std::vector<double>& v) {
                    return compound_loss(v, y, lambda, mode).total;
                },
                logits, 1e-5);
            for (std::size_t c = 0; c < logits.size(); ++c) {
                if (std::abs(logits[c]) <= 1e-4) continue; // relu kink
                CHECK(close_rel(analytic[c], fd[c], 1e-5));
            }
            ++checked;
        }
    }
    CHECK(checked >= 100);
}

TEST_CASE("kl term ignores the true class") {
    // alpha_hat is uniform here, so the kl gradient contribution is zero and
    // raising the true-class logit cannot change the kl term.
    const auto y = one_hot(3, 0);
    const auto low = compound_loss(std::vector<double>{0.5, -1.0, -2.0}, y, 1.0);
    const auto high = compound_loss(std::vector<double>{1.7, -1.0, -2.0}, y, 1.0);
    CHECK(low.kl_term == high.kl_term);
    CHECK(low.kl_term == 0.0);

    // with hot evidence on a wrong class the kl term is positive but still
    // insensitive to the true-class logit
    const auto wrong_low = compound_loss(std::vector<double>{0.5, 2.0, -2.0}, y, 1.0);
    const auto wrong_high = compound_loss(std::vector<double>{3.5, 2.0, -2.0}, y, 1.0);
    CHECK(wrong_low.kl_term > 0.0);
    CHECK(wrong_low.kl_term == wrong_high.kl_term);
}

TEST_CASE("confidence score") {
    CHECK(confidence_score(dirichlet_from_logits(std::vector<double>{-1.0, -1.0,
                                                                     -1.0})) ==
          doctest::Approx(std::sqrt(3.0)));
    CHECK(confidence_score(dirichlet_from_logits(std::vector<double>{2.0, -1.0,
                                                                     0.0})) ==
          doctest::Approx(std::sqrt(11.0)));
    CHECK(confidence_score(dirichlet_from_logits(std::vector<double>{3.0, 2.0})) ==
          doctest::Approx(5.0));
}

TEST_CASE("confidence score grows with any single alpha") {
    PhiloxRng rng(305, 0);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> logits(4);
        for (double& z : logits) z = rng.next_double() * 4.0;
        const auto base = confidence_score(dirichlet_from_logits(logits));
        const std::size_t bump = rng.next_below(4);
        logits[bump] += 0.5;
        CHECK(confidence_score(dirichlet_from_logits(logits)) > base);
    }
}
