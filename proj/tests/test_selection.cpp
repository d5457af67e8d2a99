#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <vector>

#include "ducs/errors.hpp"
#include "ducs/rng.hpp"
#include "ducs/selection.hpp"

using namespace ducs;
namespace fs = std::filesystem;

namespace {

TrainingTrace make_trace(std::uint32_t n, std::uint32_t t, std::uint64_t seed,
                         bool extended = false, std::uint32_t c = 3) {
    TrainingTrace trace;
    trace.sample_count = n;
    trace.class_count = c;
    trace.epoch_count = t;
    trace.seed = seed;
    trace.dataset_fingerprint = 0xabcdef12345678ull;
    const std::size_t cells = static_cast<std::size_t>(n) * t;
    trace.confidence.resize(cells);
    trace.correctness.resize(cells);
    PhiloxRng rng(seed, 0);
    for (std::size_t i = 0; i < cells; ++i) {
        trace.confidence[i] = static_cast<float>(rng.next_double() * 20.0 + 1.8);
        trace.correctness[i] = static_cast<std::uint8_t>(rng.next_u32() & 1u);
    }
    if (extended) {
        trace.margin.resize(cells);
        for (float& m : trace.margin) {
            m = static_cast<float>(rng.next_double() * 2.0 - 1.0);
        }
        trace.final_probs.resize(static_cast<std::size_t>(n) * c);
        for (std::uint32_t i = 0; i < n; ++i) {
            double sum = 0.0;
            std::vector<double> raw(c);
            for (auto& p : raw) sum += p = rng.next_double() + 1e-3;
            for (std::uint32_t k = 0; k < c; ++k) {
                trace.final_probs[static_cast<std::size_t>(i) * c + k] =
                    static_cast<float>(raw[k] / sum);
            }
        }
    }
    return trace;
}

std::vector<std::uint32_t> top_by(const std::vector<double>& scores,
                                  std::uint32_t m) {
    std::vector<std::uint32_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return scores[a] > scores[b];
    });
    order.resize(m);
    return order;
}

std::set<std::uint32_t> as_set(const std::vector<std::uint32_t>& v) {
    return {v.begin(), v.end()};
}

} // namespace

TEST_CASE("unreliability report recomposes exactly") {
    const TrainingTrace trace = make_trace(300, 50, 3);
    const auto report =
        selection::unreliability_scores(trace, 41, 10, WSpec{});
    CHECK(report.window_start == 41);
    CHECK(report.window_k == 10);
    for (std::size_t i = 0; i < report.U.size(); ++i) {
        CHECK(std::abs(report.U[i] - (report.w * report.F[i] + report.V[i])) < 1e-12);
        CHECK(report.F[i] >= 0.0);
        CHECK(report.F[i] <= 1.0);
        CHECK(report.V[i] >= 0.0);
    }
    // range mode: w = (maxV - minV) / (maxF - minF)
    const auto [v_lo, v_hi] = std::minmax_element(report.V.begin(), report.V.end());
    const auto [f_lo, f_hi] = std::minmax_element(report.F.begin(), report.F.end());
    CHECK(report.w ==
          doctest::Approx((*v_hi - *v_lo) / (*f_hi - *f_lo)).epsilon(1e-12));
}

TEST_CASE("w degeneracies pick pure-V and pure-F rankings") {
    const TrainingTrace trace = make_trace(256, 40, 7);

    const auto by_v =
        selection::unreliability_scores(trace, 31, 10, WSpec::parse("fixed:0"));
    const auto coreset_v = selection::select_top(by_v, 0.1);
    CHECK(as_set(coreset_v.indices) == as_set(top_by(by_v.V, coreset_v.size)));

    const auto by_f =
        selection::unreliability_scores(trace, 31, 10, WSpec::parse("fixed:1000000"));
    const auto coreset_f = selection::select_top(by_f, 0.1);
    // compare against top-M by F with the documented tie rule (ties by higher
    // F are already equal; fall back to U which is V-dominated, then index)
    std::vector<std::uint32_t> order(trace.sample_count);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (by_f.F[a] != by_f.F[b]) return by_f.F[a] > by_f.F[b];
        return by_f.U[a] > by_f.U[b];
    });
    order.resize(coreset_f.size);
    CHECK(as_set(coreset_f.indices) == as_set(order));
}

TEST_CASE("all-zero variance ranking falls back to F") {
    TrainingTrace trace = make_trace(64, 20, 9);
    std::fill(trace.confidence.begin(), trace.confidence.end(), 3.0f);
    const auto report = selection::unreliability_scores(trace, 11, 10, WSpec{});
    const auto coreset = selection::select_top(report, 0.25);
    CHECK(as_set(coreset.indices) == as_set(top_by(report.F, coreset.size)));
}

TEST_CASE("zscore mode aligns standard deviations") {
    const TrainingTrace trace = make_trace(200, 30, 11);
    const auto report =
        selection::unreliability_scores(trace, 21, 10, WSpec::parse("zscore"));
    const auto stddev = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (const double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double m2 = 0.0;
        for (const double x : v) m2 += (x - mean) * (x - mean);
        return std::sqrt(m2 / static_cast<double>(v.size()));
    };
    CHECK(report.w == doctest::Approx(stddev(report.V) / stddev(report.F)));
}

TEST_CASE("select_top arithmetic and tie rule") {
    UnreliabilityReport report;
    report.U = { 5.0, 5.0, 7.0, 1.0, 5.0 };
    report.F = { 0.2, 0.9, 0.0, 1.0, 0.2 };
    report.V = report.U;
    report.w = 0.0;

    const auto coreset = selection::select_top(report, 0.6);
    CHECK(coreset.size == 3);
    // 7.0 first; then the U=5 tie resolves by higher F (index 1), then lower
    // index (0 before 4)
    CHECK(coreset.indices == std::vector<std::uint32_t>{2, 1, 0});

    CHECK_THROWS_AS((void)selection::select_top(report, 0.0), UsageError);
    CHECK_THROWS_AS((void)selection::select_top(report, 1.5), UsageError);
    CHECK(selection::select_top(report, 1.0).indices.size() == 5);
}

TEST_CASE("ceiling arithmetic across the acceptance grid") {
    const auto size_for = [](double beta, std::uint32_t n) {
        UnreliabilityReport report;
        report.U.assign(n, 0.0);
        report.F.assign(n, 0.0);
        report.V.assign(n, 0.0);
        std::iota(report.U.begin(), report.U.end(), 0.0);
        return selection::select_top(report, beta).size;
    };
    // independent ceiling oracle on exact rationals
    const auto expected = [](double beta, std::uint32_t n) {
        const long double product =
            static_cast<long double>(beta) * static_cast<long double>(n);
        return static_cast<std::uint32_t>(std::ceil(product - 1e-9L));
    };
    for (const double beta : {0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 1.0}) {
        for (const std::uint32_t n : {7u, 100u, 1000u, 34561u}) {
            CHECK(size_for(beta, n) == expected(beta, n));
        }
    }
    CHECK(size_for(0.005, 1000) == 5);
    CHECK(size_for(0.005, 34561) == 173); // ceil(172.805)
    CHECK(size_for(1.0, 7) == 7);
}

TEST_CASE("selection nests across betas on tie-free scores") {
    PhiloxRng rng(71, 0);
    UnreliabilityReport report;
    report.U.resize(500);
    for (double& u : report.U) u = rng.next_double();
    report.F.assign(500, 0.0);
    report.V = report.U;
    const auto small = selection::select_top(report, 0.1);
    const auto large = selection::select_top(report, 0.3);
    const auto large_set = as_set(large.indices);
    for (const std::uint32_t index : small.indices) {
        CHECK(large_set.count(index) == 1);
    }
    // rank order means the prefix is literally shared
    for (std::size_t i = 0; i < small.indices.size(); ++i) {
        CHECK(small.indices[i] == large.indices[i]);
    }
}

TEST_CASE("ranking is invariant under positive scaling") {
    PhiloxRng rng(73, 0);
    UnreliabilityReport report;
    report.U.resize(200);
    for (double& u : report.U) u = rng.next_double() * 5.0;
    report.F.assign(200, 0.0);
    report.V = report.U;
    const auto base = selection::select_top(report, 0.15);
    for (double& u : report.U) u *= 37.5;
    const auto scaled = selection::select_top(report, 0.15);
    CHECK(base.indices == scaled.indices);
}

TEST_CASE("window grid search enumerates the documented candidates") {
    const TrainingTrace trace = make_trace(40, 200, 13);

    std::vector<std::uint32_t> starts;
    const auto count_eval = [&](const CoresetSpec& coreset) {
        starts.push_back(coreset.window_start);
        return 0.5; // constant evaluator: tie goes to the latest window
    };
    const std::uint32_t best =
        selection::window_grid_search(trace, 10, 10, 0.1, WSpec{}, count_eval);
    CHECK(starts.size() == 20);
    CHECK(starts.front() == 1);
    CHECK(starts.back() == 191);
    for (std::size_t i = 1; i < starts.size(); ++i) {
        CHECK(starts[i] - starts[i - 1] == 10);
    }
    CHECK(best == 191);

    // single-candidate degenerate grid
    const TrainingTrace tiny = make_trace(10, 10, 15);
    const std::uint32_t only = selection::window_grid_search(
        tiny, 10, 10, 0.5, WSpec{}, [](const CoresetSpec&) { return 1.0; });
    CHECK(only == 1);

    // the argmax wins when the evaluator is not constant
    const std::uint32_t found = selection::window_grid_search(
        trace, 10, 10, 0.1, WSpec{},
        [](const CoresetSpec& c) { return c.window_start == 51 ? 0.9 : 0.1; });
    CHECK(found == 51);

    // evaluator failures carry the failing start
    try {
        (void)selection::window_grid_search(
            trace, 10, 10, 0.1, WSpec{}, [](const CoresetSpec& c) -> double {
                if (c.window_start == 31) throw DataError("boom");
                return 0.0;
            });
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("window_start=31") != std::string::npos);
    }
}

TEST_CASE("random baseline is seed-stable") {
    const TrainingTrace trace = make_trace(100, 10, 17);
    const auto a = selection::baseline_scores(trace, ScoreMethod::Random, 5, nullptr);
    const auto b = selection::baseline_scores(trace, ScoreMethod::Random, 5, nullptr);
    const auto c = selection::baseline_scores(trace, ScoreMethod::Random, 6, nullptr);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("entropy baseline peaks at uniform probabilities") {
    TrainingTrace trace = make_trace(3, 5, 19, true, 4);
    // row 0 uniform, row 1 peaked, row 2 deterministic
    const float quarter = 0.25f;
    for (int k = 0; k < 4; ++k) trace.final_probs[static_cast<std::size_t>(k)] = quarter;
    trace.final_probs[4] = 0.7f;
    trace.final_probs[5] = 0.1f;
    trace.final_probs[6] = 0.1f;
    trace.final_probs[7] = 0.1f;
    trace.final_probs[8] = 1.0f;
    trace.final_probs[9] = 0.0f;
    trace.final_probs[10] = 0.0f;
    trace.final_probs[11] = 0.0f;
    const auto scores =
        selection::baseline_scores(trace, ScoreMethod::Entropy, 1, nullptr);
    CHECK(scores[0] == doctest::Approx(std::log(4.0)));
    CHECK(scores[0] > scores[1]);
    CHECK(scores[1] > scores[2]);
    CHECK(scores[2] == doctest::Approx(0.0));
}

TEST_CASE("el2n baseline needs labels and scores errors") {
    TrainingTrace trace = make_trace(2, 5, 23, true, 3);
    trace.final_probs = {1.0f, 0.0f, 0.0f, 0.2f, 0.5f, 0.3f};
    const std::vector<std::int32_t> labels{0, 1};
    const auto scores =
        selection::baseline_scores(trace, ScoreMethod::El2n, 1, &labels);
    CHECK(scores[0] == doctest::Approx(0.0)); // perfect one-hot prediction
    CHECK(scores[1] ==
          doctest::Approx(std::sqrt(0.2 * 0.2 + 0.5 * 0.5 + 0.3 * 0.3)));
    CHECK_THROWS_WITH_AS(
        (void)selection::baseline_scores(trace, ScoreMethod::El2n, 1, nullptr),
        doctest::Contains("el2n"), DataError);
}

TEST_CASE("forgetting baseline puts never-correct rows first") {
    TrainingTrace trace = make_trace(3, 6, 29);
    // row 0: learned forever; row 1: two forget events; row 2: never correct
    const std::vector<std::uint8_t> rows = {1, 1, 1, 1, 1, 1,
                                            1, 0, 1, 0, 1, 1,
                                            0, 0, 0, 0, 0, 0};
    trace.correctness = rows;
    const auto scores =
        selection::baseline_scores(trace, ScoreMethod::Forgetting, 1, nullptr);
    CHECK(scores[2] > scores[1]);
    CHECK(scores[1] == 2.0);
    CHECK(scores[0] == 0.0);
}

TEST_CASE("aum baseline averages the stored margins, negated") {
    TrainingTrace trace = make_trace(2, 4, 31, true, 3);
    trace.margin = {0.5f, 0.5f, 0.3f, 0.7f, -0.2f, -0.4f, 0.1f, -0.5f};
    const auto scores = selection::baseline_scores(trace, ScoreMethod::Aum, 1, nullptr);
    CHECK(scores[0] == doctest::Approx(-0.5));
    CHECK(scores[1] == doctest::Approx(0.25));
    CHECK(scores[1] > scores[0]); // the ambiguous sample ranks first
}

TEST_CASE("missing channels raise structured errors naming the method") {
    const TrainingTrace plain = make_trace(10, 5, 37, false);
    for (const auto method :
         {ScoreMethod::Entropy, ScoreMethod::El2n, ScoreMethod::Aum}) {
        try {
            const std::vector<std::int32_t> labels(10, 0);
            (void)selection::baseline_scores(plain, method, 1, &labels);
            FAIL("expected TraceError");
        } catch (const TraceError& e) {
            CHECK(e.kind() == TraceError::Kind::MissingChannel);
            CHECK(std::string(e.what()).find(method_name(method)) !=
                  std::string::npos);
        }
    }
}

TEST_CASE("coreset file round-trip") {
    const fs::path dir = fs::temp_directory_path() / "ducs_test_selection";
    fs::create_directories(dir);
    CoresetSpec spec;
    spec.beta = 0.05;
    spec.size = 4;
    spec.indices = {9, 2, 31, 7};
    spec.scorer_name = "ducs";
    spec.window_start = 91;
    spec.window_k = 10;
    spec.w = 3.25;
    spec.fingerprint = 0xdeadbeef01234567ull;
    const std::string path = (dir / "coreset.txt").string();
    spec.to_file(path);
    const CoresetSpec loaded = CoresetSpec::from_file(path);
    CHECK(loaded.beta == spec.beta);
    CHECK(loaded.size == spec.size);
    CHECK(loaded.indices == spec.indices);
    CHECK(loaded.scorer_name == spec.scorer_name);
    CHECK(loaded.window_start == spec.window_start);
    CHECK(loaded.window_k == spec.window_k);
    CHECK(loaded.w == spec.w);
    CHECK(loaded.fingerprint == spec.fingerprint);

    // header/index count mismatch is rejected
    std::ofstream out(dir / "broken.txt");
    out << "# scorer=ducs\n# beta=0.5\n# M=3\n# window=1,10\n# w=1\n"
        << "# fingerprint=ff\n1\n2\n";
    out.close();
    CHECK_THROWS_AS((void)CoresetSpec::from_file((dir / "broken.txt").string()),
                    DataError);
}

TEST_CASE("csv exports write one row per sample") {
    const fs::path dir = fs::temp_directory_path() / "ducs_test_selection";
    fs::create_directories(dir);
    UnreliabilityReport report;
    report.V = {0.1, 0.2};
    report.F = {1.0, 0.0};
    report.U = {1.1, 0.2};
    report.w = 1.0;
    selection::write_report_csv(report, (dir / "report.csv").string());
    std::ifstream in(dir / "report.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "index,V,F,U");
    std::getline(in, line);
    CHECK(line == "0,0.1,1,1.1");
    std::getline(in, line);
    CHECK(line == "1,0.2,0,0.2");
}
