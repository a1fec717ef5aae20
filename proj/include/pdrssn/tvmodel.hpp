#pragma once

// The l2-TV model on manifold-valued images: forward differences via logs,
// the two proximal maps, the reduced optimality vector field and its Newton
// matrix in stacked orthonormal coordinates.
//
// The dual variable lives in the tangent space of a single base point m̃; the
// linearization point of the difference operator is the constant image m̃.

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "pdrssn/image.hpp"
#include "pdrssn/jacobi.hpp"

namespace pdrssn {

enum class TvNorm { Anisotropic = 1, Isotropic = 2 };

std::string_view to_string(TvNorm q);
TvNorm tv_norm_from_string(std::string_view name);

template <class M>
struct TvParams {
  double alpha = 1.0;
  double beta = 0.0;
  double sigma = 0.5;
  double tau = 0.5;
  TvNorm q = TvNorm::Isotropic;
  typename M::Point base_point;

  void validate() const;
};

/// Forward differences log_{p_ij} p_{neighbor}; two channels per pixel,
/// boundary channels are zero at p_ij.
template <class M>
TangentGrid<M> tv_op(const Image<M>& p);

template <class M>
double tv_norm(const TangentGrid<M>& field, TvNorm q);

template <class M>
double cost(const Image<M>& p, const Image<M>& h, const TvParams<M>& params);

/// Differential of tv_op at p applied to v, each entry transported to `base`.
template <class M>
DualField<M> tv_diff(const Image<M>& p, const TangentGrid<M>& v, const typename M::Point& base);

/// Adjoint of tv_diff with respect to the pixelwise metrics.
template <class M>
TangentGrid<M> tv_diff_adjoint(const Image<M>& p, const DualField<M>& eta);

template <class M>
Image<M> prox_data(const Image<M>& p, const Image<M>& h, double alpha, double sigma);

template <class M>
TangentGrid<M> d_prox_data(const Image<M>& p, const Image<M>& h, double alpha, double sigma,
                           const TangentGrid<M>& v);

template <class M>
DualField<M> prox_dual(const DualField<M>& xi, double tau, double beta, TvNorm q);

template <class M>
DualField<M> d_prox_dual(const DualField<M>& xi, const DualField<M>& eta, double tau, double beta,
                         TvNorm q);

/// The reduced vector field X(p, ξ); zero exactly at solutions of the
/// linearized optimality conditions.
template <class M>
FieldPair<M> vector_field(const Image<M>& p, const DualField<M>& xi, const Image<M>& h,
                          const TvParams<M>& params);

/// Row layout of the Newton system: primal pixels row-major, then free dual
/// entries (i, j, k) row-major; each expanded over dim basis coordinates.
class IndexMap {
 public:
  struct Slot {
    bool dual = false;
    int pixel = 0;
    int channel = 0;  ///< dual entry k; 0 for primal rows
    int coord = 0;
  };

  IndexMap() = default;
  IndexMap(int rows, int cols, int dim);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int dim() const { return dim_; }
  int pixels() const { return rows_ * cols_; }
  int free_entries() const { return static_cast<int>(entries_.size()); }
  int size() const { return dim_ * (pixels() + free_entries()); }

  int primal_row(int pixel, int coord) const { return pixel * dim_ + coord; }
  /// Index of dual entry (pixel, k) among the free entries, or -1.
  int entry(int pixel, int k) const { return entry_of_[std::size_t(pixel) * 2 + k]; }
  int dual_row(int entry_index, int coord) const {
    return dim_ * pixels() + entry_index * dim_ + coord;
  }
  const std::array<int, 2>& entry_slot(int entry_index) const { return entries_[entry_index]; }
  Slot slot(int row) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  int dim_ = 0;
  std::vector<std::array<int, 2>> entries_;  // (pixel, k)
  std::vector<int> entry_of_;
};

template <class M>
struct NewtonSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;  ///< coordinates of -X
  IndexMap index_map;
  double x_norm = 0.0;
};

template <class M>
NewtonSystem<M> newton_system(const Image<M>& p, const DualField<M>& xi, const Image<M>& h,
                              const TvParams<M>& params);

/// Coordinates of a field pair in the layout of `map` (primal in onb(p_ij),
/// dual in onb(m̃)).
template <class M>
Eigen::VectorXd to_coords(const FieldPair<M>& x, const IndexMap& map);

template <class M>
FieldPair<M> from_coords(const Eigen::VectorXd& c, const Image<M>& p, const typename M::Point& base,
                         const IndexMap& map);

}  // namespace pdrssn
