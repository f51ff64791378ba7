#include "nva/kernels.hpp"

#include <vector>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define NVA_HAVE_X86 1
#else
#define NVA_HAVE_X86 0
#endif

namespace nva::kernels {

#if NVA_HAVE_X86

__attribute__((target("avx2,fma"))) void mahalanobis_sq_avx2(std::span<const double> coords,
                                                             std::size_t n,
                                                             std::span<const double> mean,
                                                             std::span<const double> factor,
                                                             std::span<double> out) {
    const std::size_t d = mean.size();
    thread_local std::vector<double> delta;
    delta.resize(4 * d);
    std::size_t b = 0;
    for (; b + 4 <= n; b += 4) {
        for (std::size_t j = 0; j < d; ++j) {
            const __m256d x = _mm256_loadu_pd(&coords[j * n + b]);
            _mm256_storeu_pd(&delta[4 * j], _mm256_sub_pd(x, _mm256_set1_pd(mean[j])));
        }
        __m256d total = _mm256_setzero_pd();
        for (std::size_t i = 0; i < d; ++i) {
            __m256d y = _mm256_setzero_pd();
            for (std::size_t j = i; j < d; ++j)
                y = _mm256_fmadd_pd(_mm256_set1_pd(factor[j * d + i]), _mm256_loadu_pd(&delta[4 * j]), y);
            total = _mm256_fmadd_pd(y, y, total);
        }
        _mm256_storeu_pd(&out[b], total);
    }
    if (b < n) {
        const std::size_t rest = n - b;
        for (std::size_t r = 0; r < rest; ++r) {
            double total = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                double y = 0.0;
                for (std::size_t j = i; j < d; ++j)
                    y += factor[j * d + i] * (coords[j * n + b + r] - mean[j]);
                total += y * y;
            }
            out[b + r] = total;
        }
    }
}

#else

void mahalanobis_sq_avx2(std::span<const double> coords, std::size_t n,
                         std::span<const double> mean, std::span<const double> factor,
                         std::span<double> out) {
    mahalanobis_sq_scalar(coords, n, mean, factor, out);
}

#endif

}  // namespace nva::kernels
