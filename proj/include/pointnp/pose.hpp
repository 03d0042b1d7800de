#pragma once

#include <span>
#include <vector>

#include "pointnp/types.hpp"

namespace pointnp {

/// Parameters of the trigonometric positional encoding: output channel count
/// (divisible by 6: three axes times interleaved sine/cosine pairs), magnitude
/// alpha and wavelength base beta.
struct PosEParams {
  std::size_t dim = 72;
  double alpha = 1000.0;
  double beta = 100.0;

  void validate() const {
    if (dim == 0 || dim % 6 != 0)
      throw std::invalid_argument("PosEParams: dim must be a positive multiple of 6");
    if (!(alpha > 0.0) || !(beta > 0.0))
      throw std::invalid_argument("PosEParams: alpha and beta must be positive");
  }
};

/// The dim/6 angular frequencies alpha / beta^(6m/dim) shared by every axis.
std::vector<double> pose_frequencies(const PosEParams& params);

/// Encodes one point: Concat(f_x, f_y, f_z) with block[2m] = sin(w_m * v) and
/// block[2m+1] = cos(w_m * v) per axis value v.
std::vector<double> pos_e(const Vec3& p, const PosEParams& params);

/// Row i equals pos_e(points[i], params). Single evaluation path shared with
/// pos_e, so the two agree bitwise.
Matrix pos_e_batch(std::span<const Vec3> points, const PosEParams& params);

namespace detail {

/// Vectorised inner kernel (isolated translation unit; see src/pose_kernel.cpp).
/// freqs has dim/6 entries; out must hold n*dim doubles.
void pos_e_kernel(const Vec3* points, std::size_t n, std::size_t dim, const double* freqs,
                  double* out);

}  // namespace detail

}  // namespace pointnp
