#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace evolab::opalg {

enum class BoundaryTag { Interior, Dirichlet0, Neumann };

/// Boundary pieces of an interval or rectangle. In 1D only Left/Right exist.
enum class Side { Left = 0, Right = 1, Bottom = 2, Top = 3 };

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned domain; y-range ignored in 1D.
struct Extent {
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y1 = 1.0;
};

/// Assigns each side to Γ0 (homogeneous Dirichlet) or Γ1 (homogeneous Neumann).
struct BoundarySpec {
  std::array<BoundaryTag, 4> sides{BoundaryTag::Dirichlet0, BoundaryTag::Dirichlet0,
                                   BoundaryTag::Dirichlet0, BoundaryTag::Dirichlet0};

  static BoundarySpec all_dirichlet() { return {}; }
  /// Γ0 = the listed sides, Γ1 = every other side.
  static BoundarySpec dirichlet_on(std::initializer_list<Side> gamma0);

  BoundaryTag operator[](Side s) const { return sides[static_cast<std::size_t>(s)]; }
};

/// Uniform tensor grid with trapezoidal weights. Nodes are stored x-fastest.
///
/// Degrees of freedom are the nodes not tagged Dirichlet0; every discrete
/// operator in the library acts on the dof vector, in dof order.
class Grid {
 public:
  int dimension() const { return dimension_; }
  int n_per_dim() const { return n_; }
  const Extent& extent() const { return extent_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<BoundaryTag>& tags() const { return tags_; }
  std::size_t node_count() const { return nodes_.size(); }

  /// Node index of grid position (i, j); j = 0 in 1D.
  std::size_t node_index(int i, int j = 0) const { return static_cast<std::size_t>(j) * n_ + i; }
  std::array<int, 2> position(std::size_t node) const {
    return {static_cast<int>(node % n_), static_cast<int>(node / n_)};
  }

  /// Node indices of the degrees of freedom, ascending.
  const std::vector<std::size_t>& dofs() const { return dofs_; }
  /// dof number of a node, or -1 for Dirichlet nodes.
  long dof_of(std::size_t node) const { return dof_of_node_[node]; }
  std::size_t dof_count() const { return dofs_.size(); }
  std::vector<double> dof_weights() const;

  /// Nodes on Γ1 (Neumann part of the boundary) with their boundary-measure weights.
  const std::vector<std::size_t>& gamma1_nodes() const { return gamma1_; }
  const std::vector<double>& gamma1_weights() const { return gamma1_w_; }
  bool has_gamma0() const;
  bool has_gamma1() const { return !gamma1_.empty(); }

  /// Measure of the domain (length or area).
  double measure() const;
  bool is_boundary(std::size_t node) const;

 private:
  friend Grid make_grid(int, const Extent&, int, const BoundarySpec&, bool);

  int dimension_ = 1;
  int n_ = 0;
  Extent extent_{};
  double hx_ = 0.0, hy_ = 0.0;
  std::vector<Point> nodes_;
  std::vector<double> weights_;
  std::vector<BoundaryTag> tags_;
  std::vector<std::size_t> dofs_;
  std::vector<long> dof_of_node_;
  std::vector<std::size_t> gamma1_;
  std::vector<double> gamma1_w_;
};

/// Uniform grid on `extent` with `n_per_dim` nodes per direction (boundary included).
/// Throws PreconditionError for n_per_dim < 3, dimension outside {1,2}, or an
/// empty Γ0 when `require_dirichlet` is set.
Grid make_grid(int dimension, const Extent& extent, int n_per_dim, const BoundarySpec& boundary,
               bool require_dirichlet = false);

}  // namespace evolab::opalg
