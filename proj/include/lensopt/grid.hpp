#pragma once

#include "lensopt/types.hpp"

#include <Eigen/Core>

#include <array>
#include <initializer_list>
#include <memory>
#include <vector>

namespace lensopt {

namespace detail {
struct AssemblyPattern;
}

/// Uniform rectangle [0, lx] x [0, ly] split into nx * ny bilinear elements.
///
/// Nodes are numbered row by row, node (i, j) -> i + (nx + 1) * j, so node
/// coordinates are (i * lx / nx, j * ly / ny). The boundary node list runs
/// counter-clockwise from the origin.
class Grid {
 public:
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  Scalar lx() const { return lx_; }
  Scalar ly() const { return ly_; }
  Scalar hx() const { return lx_ / nx_; }
  Scalar hy() const { return ly_ / ny_; }
  Scalar area() const { return lx_ * ly_; }

  int node_count() const { return (nx_ + 1) * (ny_ + 1); }
  int element_count() const { return nx_ * ny_; }
  int node(int i, int j) const { return i + (nx_ + 1) * j; }
  Eigen::Vector2d coord(int node) const;

  /// Local node order: (i,j), (i+1,j), (i,j+1), (i+1,j+1).
  std::array<int, 4> element_nodes(int ex, int ey) const;

  const std::vector<int>& boundary_nodes() const { return boundary_; }

  /// Nodal interpolant of a function of (x, y).
  template <typename F>
  Vector interpolate(F&& f) const {
    Vector out(node_count());
    for (int n = 0; n < node_count(); ++n) {
      const Eigen::Vector2d p = coord(n);
      out[n] = f(p.x(), p.y());
    }
    return out;
  }

  const detail::AssemblyPattern& pattern() const { return *pattern_; }

 private:
  friend Grid build_grid(int nx, int ny, Scalar lx, Scalar ly);
  Grid() = default;

  int nx_ = 0;
  int ny_ = 0;
  Scalar lx_ = 0;
  Scalar ly_ = 0;
  std::vector<int> boundary_;
  std::shared_ptr<const detail::AssemblyPattern> pattern_;
};

/// Throws std::invalid_argument unless nx, ny >= 2 and lx, ly > 0.
Grid build_grid(int nx, int ny, Scalar lx, Scalar ly);

/// Sides of the rectangle.
enum class Side { bottom = 0, right = 1, top = 2, left = 3 };

/// Boundary values stored per side so that a corner may carry different
/// values on its two edges. Bottom/top hold nx + 1 values ordered by i,
/// left/right hold ny + 1 values ordered by j.
struct BoundaryTrace {
  std::array<Vector, 4> sides;

  Vector& operator[](Side s) { return sides[static_cast<int>(s)]; }
  const Vector& operator[](Side s) const { return sides[static_cast<int>(s)]; }

  static BoundaryTrace zero(const Grid& grid);
  /// `value` on the listed sides, zero elsewhere.
  static BoundaryTrace uniform(const Grid& grid, Scalar value,
                               std::initializer_list<Side> active);
};

/// M_ij = int w N_i N_j with w interpolated bilinearly, 2x2 Gauss.
SparseOperator assemble_weighted_mass(const Grid& grid, const Vector& weight);

/// K_ij = int w grad N_i . grad N_j, 2x2 Gauss.
SparseOperator assemble_weighted_stiffness(const Grid& grid, const Vector& weight);

/// Lumped (row-sum) mass diagonal for the unit weight.
Vector lumped_mass(const Grid& grid);

/// <g, N_i>_Gamma with trapezoidal quadrature on each boundary edge.
Vector assemble_boundary_load(const Grid& grid, const BoundaryTrace& trace);

/// Discrete L2 norm sqrt(v^T M v) with the unit mass matrix.
Scalar l2_norm(const SparseOperator& mass, const Vector& v);

namespace detail {

/// Reference bilinear element sampled at the 2x2 Gauss points.
struct ReferenceElement {
  // shape[q][a], grad_x[q][a], grad_y[q][a] on an element of size hx x hy
  std::array<std::array<Scalar, 4>, 4> shape{};
  std::array<std::array<Scalar, 4>, 4> grad_x{};
  std::array<std::array<Scalar, 4>, 4> grad_y{};
  Scalar weight = 0;  // quadrature weight times Jacobian, same for all q
};

ReferenceElement reference_element(Scalar hx, Scalar hy);

/// Sparsity shared by every nodal operator on a grid, with the value slot of
/// each element-local pair precomputed.
struct AssemblyPattern {
  SparseOperator skeleton;
  std::vector<std::array<int, 16>> slots;  // per element, a * 4 + b
  ReferenceElement ref;
};

}  // namespace detail

}  // namespace lensopt
