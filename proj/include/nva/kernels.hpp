#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace nva::kernels {

enum class Isa { scalar, avx2 };

Isa detected_isa();
Isa active_isa();
// Pin the dispatch target; nullopt restores runtime detection.
void force_isa(std::optional<Isa> isa);
const char* isa_name(Isa isa);

// out[b] = |U (x_b - mean)|^2 for the upper-triangular factor U of a precision S = U^T U.
// coords is coordinate-major: coords[i * n + b] is coordinate i of point b.
// factor is column-major d x d; only the upper triangle is read.
void mahalanobis_sq(std::span<const double> coords, std::size_t n, std::span<const double> mean,
                    std::span<const double> factor, std::span<double> out);

void mahalanobis_sq_scalar(std::span<const double> coords, std::size_t n,
                           std::span<const double> mean, std::span<const double> factor,
                           std::span<double> out);
void mahalanobis_sq_avx2(std::span<const double> coords, std::size_t n,
                         std::span<const double> mean, std::span<const double> factor,
                         std::span<double> out);

// out[b] = log(sum_k exp(rows[k * n + b])) over k < rows_count.
void log_sum_exp_columns(std::span<const double> rows, std::size_t rows_count, std::size_t n,
                         std::span<double> out);

}  // namespace nva::kernels
