#include "evolab/opalg/grid.hpp"

#include "evolab/error.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace evolab::opalg {

BoundarySpec BoundarySpec::dirichlet_on(std::initializer_list<Side> gamma0) {
  BoundarySpec boundary;
  boundary.sides.fill(BoundaryTag::Neumann);
  for (Side s : gamma0) boundary.sides[static_cast<std::size_t>(s)] = BoundaryTag::Dirichlet0;
  return boundary;
}

std::vector<double> Grid::dof_weights() const {
  std::vector<double> w;
  w.reserve(dofs_.size());
  for (auto node : dofs_) w.push_back(weights_[node]);
  return w;
}

bool Grid::has_gamma0() const {
  for (auto t : tags_)
    if (t == BoundaryTag::Dirichlet0) return true;
  return false;
}

double Grid::measure() const {
  double m = extent_.x1 - extent_.x0;
  if (dimension_ == 2) m *= extent_.y1 - extent_.y0;
  return m;
}

bool Grid::is_boundary(std::size_t node) const {
  auto [i, j] = position(node);
  bool b = i == 0 || i == n_ - 1;
  if (dimension_ == 2) b = b || j == 0 || j == n_ - 1;
  return b;
}

namespace {

// Sides a node lies on; corners lie on two.
std::vector<Side> sides_of(int i, int j, int n, int dim) {
  std::vector<Side> out;
  if (i == 0) out.push_back(Side::Left);
  if (i == n - 1) out.push_back(Side::Right);
  if (dim == 2) {
    if (j == 0) out.push_back(Side::Bottom);
    if (j == n - 1) out.push_back(Side::Top);
  }
  return out;
}

}  // namespace

Grid make_grid(int dimension, const Extent& extent, int n_per_dim, const BoundarySpec& boundary,
               bool require_dirichlet) {
  if (dimension != 1 && dimension != 2) throw PreconditionError("make_grid: dimension must be 1 or 2");
  if (n_per_dim < 3) {
    std::ostringstream msg;
    msg << "make_grid: n_per_dim = " << n_per_dim << " < 3";
    throw PreconditionError(msg.str());
  }
  if (!(extent.x1 > extent.x0) || (dimension == 2 && !(extent.y1 > extent.y0)))
    throw PreconditionError("make_grid: empty extent");

  Grid g;
  g.dimension_ = dimension;
  g.n_ = n_per_dim;
  g.extent_ = extent;
  g.hx_ = (extent.x1 - extent.x0) / (n_per_dim - 1);
  g.hy_ = dimension == 2 ? (extent.y1 - extent.y0) / (n_per_dim - 1) : 1.0;

  const int ny = dimension == 2 ? n_per_dim : 1;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < n_per_dim; ++i) {
      Point p{extent.x0 + i * g.hx_, dimension == 2 ? extent.y0 + j * g.hy_ : 0.0};
      double wx = (i == 0 || i == n_per_dim - 1) ? 0.5 * g.hx_ : g.hx_;
      double wy = 1.0;
      if (dimension == 2) wy = (j == 0 || j == n_per_dim - 1) ? 0.5 * g.hy_ : g.hy_;
      g.nodes_.push_back(p);
      g.weights_.push_back(wx * wy);

      auto sides = sides_of(i, j, n_per_dim, dimension);
      BoundaryTag tag = BoundaryTag::Interior;
      if (!sides.empty()) {
        tag = BoundaryTag::Neumann;
        for (Side s : sides)
          if (boundary[s] == BoundaryTag::Dirichlet0) tag = BoundaryTag::Dirichlet0;
      }
      g.tags_.push_back(tag);
    }
  }

  g.dof_of_node_.assign(g.nodes_.size(), -1);
  for (std::size_t k = 0; k < g.nodes_.size(); ++k) {
    if (g.tags_[k] == BoundaryTag::Dirichlet0) continue;
    g.dof_of_node_[k] = static_cast<long>(g.dofs_.size());
    g.dofs_.push_back(k);
  }

  // Γ1 measure: a point has unit mass in 1D; along an edge the trapezoidal rule, with
  // a Neumann corner collecting half a cell from each adjacent edge.
  for (std::size_t k = 0; k < g.nodes_.size(); ++k) {
    if (g.tags_[k] != BoundaryTag::Neumann) continue;
    auto [i, j] = g.position(k);
    double w = 0.0;
    if (dimension == 1) {
      w = 1.0;
    } else {
      for (Side s : sides_of(i, j, n_per_dim, dimension)) {
        bool along_y = s == Side::Left || s == Side::Right;
        int pos = along_y ? j : i;
        double h = along_y ? g.hy_ : g.hx_;
        w += (pos == 0 || pos == n_per_dim - 1) ? 0.5 * h : h;
      }
    }
    g.gamma1_.push_back(k);
    g.gamma1_w_.push_back(w);
  }

  if (require_dirichlet && !g.has_gamma0())
    throw PreconditionError("make_grid: Dirichlet model requested but Γ0 is empty");

  double total = std::accumulate(g.weights_.begin(), g.weights_.end(), 0.0);
  if (std::abs(total - g.measure()) > 1e-12 * g.measure())
    throw NumericalError("make_grid: quadrature weights do not sum to the domain measure");
  if (g.dofs_.empty()) throw PreconditionError("make_grid: no degrees of freedom");
  return g;
}

}  // namespace evolab::opalg
