#pragma once

// Grids of manifold points and tangent vectors.
//
// Pixels are stored row-major. Dual fields hold two entries per pixel: k = 0
// is the difference towards (i+1, j), k = 1 towards (i, j+1). Entries that
// would leave the grid are kept as exact zeros.

#include <cstddef>
#include <vector>

#include "pdrssn/manifolds.hpp"

namespace pdrssn {

struct PowerShape {
  std::vector<int> dims;

  std::size_t size() const;
  void validate() const;
};

inline std::size_t PowerShape::size() const {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

inline void PowerShape::validate() const {
  if (dims.empty()) throw InvalidArgument("PowerShape: no dimensions");
  for (int d : dims) {
    if (d <= 0) throw InvalidArgument("PowerShape: dimensions must be positive");
  }
}

template <class M>
struct Image {
  using Point = typename M::Point;

  int rows = 0;
  int cols = 0;
  std::vector<Point> points;

  Image() = default;
  Image(int r, int c, const Point& fill) : rows(r), cols(c), points(std::size_t(r) * c, fill) {
    PowerShape{{r, c}}.validate();
  }

  int pixels() const { return rows * cols; }
  PowerShape shape() const { return {{rows, cols}}; }
  Point& operator()(int i, int j) { return points[std::size_t(i) * cols + j]; }
  const Point& operator()(int i, int j) const { return points[std::size_t(i) * cols + j]; }
};

/// Tangent vectors anchored at the pixels of an image, `channels` per pixel.
template <class M>
struct TangentGrid {
  int rows = 0;
  int cols = 0;
  int channels = 1;
  std::vector<Tangent<M>> values;

  int pixels() const { return rows * cols; }
  Tangent<M>& at(int pixel, int k = 0) { return values[std::size_t(pixel) * channels + k]; }
  const Tangent<M>& at(int pixel, int k = 0) const { return values[std::size_t(pixel) * channels + k]; }

  static TangentGrid zeros(const Image<M>& p, int channels = 1) {
    TangentGrid g{p.rows, p.cols, channels, {}};
    g.values.reserve(std::size_t(p.pixels()) * channels);
    for (const auto& x : p.points)
      for (int k = 0; k < channels; ++k) g.values.push_back(zero_tangent<M>(x));
    return g;
  }
};

template <class M>
struct DualField {
  using Point = typename M::Point;
  using Vector = typename M::Vector;

  int rows = 0;
  int cols = 0;
  Point base;
  std::vector<Vector> values;  ///< rows * cols * 2, index (i * cols + j) * 2 + k

  static DualField zeros(int rows, int cols, const Point& base) {
    return {rows, cols, base, std::vector<Vector>(std::size_t(rows) * cols * 2, M::zero(base))};
  }

  int pixels() const { return rows * cols; }
  bool is_free(int i, int j, int k) const { return k == 0 ? i + 1 < rows : j + 1 < cols; }
  bool is_free(int pixel, int k) const { return is_free(pixel / cols, pixel % cols, k); }
  Vector& at(int pixel, int k) { return values[std::size_t(pixel) * 2 + k]; }
  const Vector& at(int pixel, int k) const { return values[std::size_t(pixel) * 2 + k]; }
  Tangent<M> tangent(int pixel, int k) const { return {base, at(pixel, k)}; }
};

template <class M>
struct FieldPair {
  TangentGrid<M> primal;
  DualField<M> dual;
};

template <class M>
double field_norm(const TangentGrid<M>& g) {
  double s = 0.0;
  for (const auto& v : g.values) s += M::inner(v.anchor, v.value, v.value);
  return std::sqrt(std::max(0.0, s));
}

template <class M>
double field_norm(const DualField<M>& f) {
  double s = 0.0;
  for (const auto& v : f.values) s += M::inner(f.base, v, v);
  return std::sqrt(std::max(0.0, s));
}

template <class M>
double field_norm(const FieldPair<M>& x) {
  const double a = field_norm(x.primal);
  const double b = field_norm(x.dual);
  return std::sqrt(a * a + b * b);
}

/// Sum of pixelwise inner products.
template <class M>
double field_inner(const TangentGrid<M>& a, const TangentGrid<M>& b) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.values.size(); ++n) {
    s += M::inner(a.values[n].anchor, a.values[n].value, b.values[n].value);
  }
  return s;
}

template <class M>
double field_inner(const DualField<M>& a, const DualField<M>& b) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.values.size(); ++n) s += M::inner(a.base, a.values[n], b.values[n]);
  return s;
}

nlohmann::json image_to_json(const Image<Sphere2>& img);
nlohmann::json image_to_json(const Image<Spd3>& img);

/// Accepts {"rows", "cols", "points": [...]} with points listed row-major.
template <class M>
Image<M> image_from_json(const nlohmann::json& j);

}  // namespace pdrssn
