#include "nva/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

namespace nva::kernels {

namespace {

std::atomic<int> g_forced{-1};

}  // namespace

Isa detected_isa() {
#if defined(__x86_64__) || defined(__i386__)
    static const bool has_avx2 = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return has_avx2 ? Isa::avx2 : Isa::scalar;
#else
    return Isa::scalar;
#endif
}

Isa active_isa() {
    const int forced = g_forced.load(std::memory_order_relaxed);
    if (forced >= 0) return static_cast<Isa>(forced);
    return detected_isa();
}

void force_isa(std::optional<Isa> isa) {
    g_forced.store(isa ? static_cast<int>(*isa) : -1, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void mahalanobis_sq_scalar(std::span<const double> coords, std::size_t n,
                           std::span<const double> mean, std::span<const double> factor,
                           std::span<double> out) {
    const std::size_t d = mean.size();
    for (std::size_t b = 0; b < n; ++b) {
        double total = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            double y = 0.0;
            for (std::size_t j = i; j < d; ++j) y += factor[j * d + i] * (coords[j * n + b] - mean[j]);
            total += y * y;
        }
        out[b] = total;
    }
}

void mahalanobis_sq(std::span<const double> coords, std::size_t n, std::span<const double> mean,
                    std::span<const double> factor, std::span<double> out) {
    if (active_isa() == Isa::avx2 && detected_isa() == Isa::avx2)
        mahalanobis_sq_avx2(coords, n, mean, factor, out);
    else
        mahalanobis_sq_scalar(coords, n, mean, factor, out);
}

void log_sum_exp_columns(std::span<const double> rows, std::size_t rows_count, std::size_t n,
                         std::span<double> out) {
    for (std::size_t b = 0; b < n; ++b) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < rows_count; ++k) m = std::max(m, rows[k * n + b]);
        if (!std::isfinite(m)) {
            out[b] = m;
            continue;
        }
        double s = 0.0;
        for (std::size_t k = 0; k < rows_count; ++k) s += std::exp(rows[k * n + b] - m);
        out[b] = m + std::log(s);
    }
}

}  // namespace nva::kernels
