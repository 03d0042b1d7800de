#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pointnp {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline bool is_finite(const Vec3& a) {
  return std::isfinite(a[0]) && std::isfinite(a[1]) && std::isfinite(a[2]);
}

/// Dense row-major matrix of doubles. Rows are the natural unit of work for
/// the per-point kernels, so row() hands out contiguous spans.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

/// Raw N x 3 coordinate set.
struct PointCloud {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }

  /// N >= 1, all coordinates finite.
  void validate() const {
    if (points.empty()) throw std::invalid_argument("PointCloud: empty cloud");
    for (const Vec3& p : points)
      if (!is_finite(p)) throw std::invalid_argument("PointCloud: non-finite coordinate");
  }
};

/// Coordinates paired with per-point features, as passed between encoder stages.
struct StagePointSet {
  std::vector<Vec3> coords;
  Matrix feats;

  std::size_t size() const { return coords.size(); }

  void validate() const {
    if (coords.size() != feats.rows)
      throw std::invalid_argument("StagePointSet: coords/feats row mismatch");
    if (feats.cols == 0) throw std::invalid_argument("StagePointSet: zero feature dim");
  }
};

/// M x k neighbor table; row j lists reference indices sorted by ascending
/// distance to query j (ties by smaller index), so row(j)[0] is the nearest.
struct NeighborIndex {
  std::size_t rows = 0;
  std::size_t k = 0;
  std::vector<std::uint32_t> indices;

  NeighborIndex() = default;
  NeighborIndex(std::size_t r, std::size_t kk) : rows(r), k(kk), indices(r * kk, 0) {}

  std::span<std::uint32_t> row(std::size_t i) { return {indices.data() + i * k, k}; }
  std::span<const std::uint32_t> row(std::size_t i) const { return {indices.data() + i * k, k}; }
};

/// Pooled whole-cloud descriptor produced by the encoder.
struct GlobalFeature {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

}  // namespace pointnp
