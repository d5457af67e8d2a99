// Times the OpenMP kernels against the serial reference implementations on a
// synthetic workload and prints one table row per kernel.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <vector>

#include "ducs/data.hpp"
#include "ducs/kernels.hpp"
#include "ducs/model.hpp"
#include "ducs/rng.hpp"

using namespace ducs;

namespace {

template <class F>
double time_best_of(int reps, F&& body) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto start = std::chrono::steady_clock::now();
        body();
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        if (secs < best) best = secs;
    }
    return best;
}

void print_row(const char* name, double serial_s, double parallel_s) {
    std::printf("%-16s %10.4f ms %10.4f ms %8.2fx\n", name, serial_s * 1e3,
                parallel_s * 1e3, serial_s / parallel_s);
}

} // namespace

int main() {
    BlobSpec spec;
    spec.class_count = 10;
    spec.dim = 64;
    spec.samples_per_class = 800;
    spec.center_spread = 8.0;
    spec.within_std = 1.5;
    spec.overlap_boost = 1.0;
    spec.seed = 7;
    const DatasetBundle bundle = data::generate_blobs(spec);
    const std::uint32_t n = bundle.sample_count;

    const MlpClassifier net =
        model::init({static_cast<int>(bundle.dim), 128, 64,
                     static_cast<int>(bundle.class_count)},
                    7);

    std::vector<std::uint32_t> rows(n);
    for (std::uint32_t i = 0; i < n; ++i) rows[i] = i;

    std::printf("threads: %d, samples: %u, dim: %u, classes: %u\n",
                omp_get_max_threads(), n, bundle.dim, bundle.class_count);
    std::printf("%-16s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

    {
        std::vector<float> conf(n);
        std::vector<std::uint8_t> correct(n);
        const double serial_s = time_best_of(3, [&] {
            reference::record_pass(net, bundle, rows, conf.data(), correct.data(),
                                   nullptr, nullptr);
        });
        const double parallel_s = time_best_of(3, [&] {
            kernels::record_pass(net, bundle, rows, conf.data(), correct.data(),
                                 nullptr, nullptr);
        });
        print_row("record_pass", serial_s, parallel_s);
    }

    {
        const std::span<const std::uint32_t> batch(rows.data(), 1024);
        BatchWorkspace ws;
        ParamGrads grads;
        const double serial_s = time_best_of(3, [&] {
            reference::batch_gradient(net, bundle, batch, 0.5, CeMode::Softmax, ws,
                                      grads);
        });
        const double parallel_s = time_best_of(3, [&] {
            kernels::batch_gradient(net, bundle, batch, 0.5, CeMode::Softmax, ws,
                                    grads);
        });
        print_row("batch_gradient", serial_s, parallel_s);
    }

    {
        const std::uint32_t t = 200;
        std::vector<float> conf(static_cast<std::size_t>(n) * t);
        PhiloxRng rng(11, 0);
        for (float& c : conf) c = static_cast<float>(rng.next_double() * 50.0);
        const double serial_s = time_best_of(3, [&] {
            reference::row_variances(conf.data(), n, t, 100, 10);
        });
        const double parallel_s =
            time_best_of(3, [&] { kernels::row_variances(conf.data(), n, t, 100, 10); });
        print_row("row_variances", serial_s, parallel_s);
    }

    {
        const std::uint32_t t = 200;
        std::vector<std::uint8_t> corr(static_cast<std::size_t>(n) * t);
        PhiloxRng rng(13, 1);
        for (auto& c : corr) c = rng.next_u32() & 1u;
        std::vector<double> freq(n);
        const double serial_s = time_best_of(3, [&] {
            reference::forgetting_final(corr.data(), n, t, freq.data(), nullptr,
                                        nullptr);
        });
        const double parallel_s = time_best_of(3, [&] {
            kernels::forgetting_final(corr.data(), n, t, freq.data(), nullptr,
                                      nullptr);
        });
        print_row("forgetting", serial_s, parallel_s);
    }

    return 0;
}
