#include "lensopt/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lensopt {

namespace detail {

ReferenceElement reference_element(Scalar hx, Scalar hy) {
  ReferenceElement ref;
  const Scalar g = 0.5 / std::sqrt(3.0);
  const std::array<Scalar, 2> pts{0.5 - g, 0.5 + g};
  int q = 0;
  for (int qy = 0; qy < 2; ++qy) {
    for (int qx = 0; qx < 2; ++qx, ++q) {
      const Scalar s = pts[qx];
      const Scalar t = pts[qy];
      ref.shape[q] = {(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t};
      ref.grad_x[q] = {-(1 - t) / hx, (1 - t) / hx, -t / hx, t / hx};
      ref.grad_y[q] = {-(1 - s) / hy, -s / hy, (1 - s) / hy, s / hy};
    }
  }
  ref.weight = 0.25 * hx * hy;
  return ref;
}

namespace {

std::shared_ptr<const AssemblyPattern> make_pattern(const Grid& grid) {
  auto pattern = std::make_shared<AssemblyPattern>();
  const int n = grid.node_count();
  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(16 * grid.element_count());
  for (int ey = 0; ey < grid.ny(); ++ey) {
    for (int ex = 0; ex < grid.nx(); ++ex) {
      const auto nodes = grid.element_nodes(ex, ey);
      for (int a : nodes) {
        for (int b : nodes) triplets.emplace_back(a, b, 1.0);
      }
    }
  }
  pattern->skeleton.resize(n, n);
  pattern->skeleton.setFromTriplets(triplets.begin(), triplets.end());
  pattern->skeleton.makeCompressed();

  const auto& s = pattern->skeleton;
  auto slot_of = [&](int row, int col) {
    for (int k = s.outerIndexPtr()[row]; k < s.outerIndexPtr()[row + 1]; ++k) {
      if (s.innerIndexPtr()[k] == col) return k;
    }
    throw std::logic_error("assembly pattern is missing an entry");
  };
  pattern->slots.resize(grid.element_count());
  for (int ey = 0; ey < grid.ny(); ++ey) {
    for (int ex = 0; ex < grid.nx(); ++ex) {
      const auto nodes = grid.element_nodes(ex, ey);
      auto& slots = pattern->slots[ex + grid.nx() * ey];
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) slots[4 * a + b] = slot_of(nodes[a], nodes[b]);
      }
    }
  }
  pattern->ref = reference_element(grid.hx(), grid.hy());
  return pattern;
}

}  // namespace
}  // namespace detail

Eigen::Vector2d Grid::coord(int node) const {
  const int i = node % (nx_ + 1);
  const int j = node / (nx_ + 1);
  return {i * lx_ / nx_, j * ly_ / ny_};
}

std::array<int, 4> Grid::element_nodes(int ex, int ey) const {
  return {node(ex, ey), node(ex + 1, ey), node(ex, ey + 1), node(ex + 1, ey + 1)};
}

Grid build_grid(int nx, int ny, Scalar lx, Scalar ly) {
  if (nx < 2 || ny < 2) {
    throw std::invalid_argument("grid needs at least 2 elements per axis, got " +
                                std::to_string(nx) + " x " + std::to_string(ny));
  }
  if (!(lx > 0) || !(ly > 0)) {
    throw std::invalid_argument("grid edge lengths must be positive");
  }
  Grid grid;
  grid.nx_ = nx;
  grid.ny_ = ny;
  grid.lx_ = lx;
  grid.ly_ = ly;
  auto& b = grid.boundary_;
  b.reserve(2 * (nx + ny));
  for (int i = 0; i < nx; ++i) b.push_back(grid.node(i, 0));
  for (int j = 0; j < ny; ++j) b.push_back(grid.node(nx, j));
  for (int i = nx; i > 0; --i) b.push_back(grid.node(i, ny));
  for (int j = ny; j > 0; --j) b.push_back(grid.node(0, j));
  grid.pattern_ = detail::make_pattern(grid);
  return grid;
}

BoundaryTrace BoundaryTrace::zero(const Grid& grid) {
  BoundaryTrace t;
  t[Side::bottom] = Vector::Zero(grid.nx() + 1);
  t[Side::top] = Vector::Zero(grid.nx() + 1);
  t[Side::left] = Vector::Zero(grid.ny() + 1);
  t[Side::right] = Vector::Zero(grid.ny() + 1);
  return t;
}

BoundaryTrace BoundaryTrace::uniform(const Grid& grid, Scalar value,
                                     std::initializer_list<Side> active) {
  BoundaryTrace t = zero(grid);
  for (Side s : active) t[s].setConstant(value);
  return t;
}

namespace {

enum class Form { mass, stiffness };

SparseOperator assemble(const Grid& grid, const Vector& weight, Form form) {
  if (weight.size() != grid.node_count()) {
    throw std::invalid_argument("weight field does not match the grid");
  }
  const auto& pat = grid.pattern();
  const auto& ref = pat.ref;
  SparseOperator op = pat.skeleton;
  Scalar* values = op.valuePtr();
  std::fill(values, values + op.nonZeros(), 0.0);

  for (int ey = 0; ey < grid.ny(); ++ey) {
    for (int ex = 0; ex < grid.nx(); ++ex) {
      const auto nodes = grid.element_nodes(ex, ey);
      const auto& slots = pat.slots[ex + grid.nx() * ey];
      std::array<Scalar, 16> local{};
      for (int q = 0; q < 4; ++q) {
        Scalar wq = 0;
        for (int a = 0; a < 4; ++a) wq += weight[nodes[a]] * ref.shape[q][a];
        wq *= ref.weight;
        if (wq == 0) continue;
        for (int a = 0; a < 4; ++a) {
          for (int b = 0; b < 4; ++b) {
            local[4 * a + b] +=
                form == Form::mass
                    ? wq * ref.shape[q][a] * ref.shape[q][b]
                    : wq * (ref.grad_x[q][a] * ref.grad_x[q][b] +
                            ref.grad_y[q][a] * ref.grad_y[q][b]);
          }
        }
      }
      for (int k = 0; k < 16; ++k) values[slots[k]] += local[k];
    }
  }
  return op;
}

}  // namespace

SparseOperator assemble_weighted_mass(const Grid& grid, const Vector& weight) {
  return assemble(grid, weight, Form::mass);
}

SparseOperator assemble_weighted_stiffness(const Grid& grid, const Vector& weight) {
  return assemble(grid, weight, Form::stiffness);
}

Vector lumped_mass(const Grid& grid) {
  const SparseOperator m = assemble_weighted_mass(grid, Vector::Ones(grid.node_count()));
  return m * Vector::Ones(grid.node_count());
}

Vector assemble_boundary_load(const Grid& grid, const BoundaryTrace& trace) {
  const int nx = grid.nx();
  const int ny = grid.ny();
  if (trace[Side::bottom].size() != nx + 1 || trace[Side::top].size() != nx + 1 ||
      trace[Side::left].size() != ny + 1 || trace[Side::right].size() != ny + 1) {
    throw std::invalid_argument("boundary trace does not match the grid");
  }
  Vector load = Vector::Zero(grid.node_count());
  const Scalar hx = grid.hx();
  const Scalar hy = grid.hy();
  for (int i = 0; i < nx; ++i) {
    const auto& bot = trace[Side::bottom];
    const auto& top = trace[Side::top];
    load[grid.node(i, 0)] += 0.5 * hx * bot[i];
    load[grid.node(i + 1, 0)] += 0.5 * hx * bot[i + 1];
    load[grid.node(i, ny)] += 0.5 * hx * top[i];
    load[grid.node(i + 1, ny)] += 0.5 * hx * top[i + 1];
  }
  for (int j = 0; j < ny; ++j) {
    const auto& left = trace[Side::left];
    const auto& right = trace[Side::right];
    load[grid.node(0, j)] += 0.5 * hy * left[j];
    load[grid.node(0, j + 1)] += 0.5 * hy * left[j + 1];
    load[grid.node(nx, j)] += 0.5 * hy * right[j];
    load[grid.node(nx, j + 1)] += 0.5 * hy * right[j + 1];
  }
  return load;
}

Scalar l2_norm(const SparseOperator& mass, const Vector& v) {
  return std::sqrt(std::max<Scalar>(0, v.dot(mass * v)));
}

}  // namespace lensopt
