#include "pointnp/pose.hpp"

#include <cmath>

namespace pointnp {

std::vector<double> pose_frequencies(const PosEParams& params) {
  params.validate();
  const std::size_t pairs = params.dim / 6;
  std::vector<double> freqs(pairs);
  for (std::size_t m = 0; m < pairs; ++m)
    freqs[m] = params.alpha /
               std::pow(params.beta, 6.0 * static_cast<double>(m) / static_cast<double>(params.dim));
  return freqs;
}

std::vector<double> pos_e(const Vec3& p, const PosEParams& params) {
  const std::vector<double> freqs = pose_frequencies(params);
  std::vector<double> out(params.dim);
  detail::pos_e_kernel(&p, 1, params.dim, freqs.data(), out.data());
  return out;
}

Matrix pos_e_batch(std::span<const Vec3> points, const PosEParams& params) {
  const std::vector<double> freqs = pose_frequencies(params);
  Matrix out(points.size(), params.dim);
  detail::pos_e_kernel(points.data(), points.size(), params.dim, freqs.data(), out.data.data());
  return out;
}

}  // namespace pointnp
