#pragma once

#include "lensopt/grid.hpp"
#include "lensopt/linear_solver.hpp"
#include "lensopt/medium.hpp"
#include "lensopt/types.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace lensopt {

/// Uniform time levels t_n = n * tau, n = 0..steps.
struct TimeGrid {
  Scalar tau = 0;
  int steps = 0;

  Scalar final_time() const { return tau * steps; }
  Scalar time(int n) const { return tau * n; }
  int levels() const { return steps + 1; }
  /// Trapezoidal weight of level n (tau/2 at the ends, tau inside).
  Scalar weight(int n) const { return (n == 0 || n == steps) ? 0.5 * tau : tau; }
};

/// The leading coefficient alpha(x, t), given in closed form together with its
/// first two time derivatives, and bounded away from zero.
class AlphaCoefficient {
 public:
  using Fn = std::function<Scalar(Scalar x, Scalar y, Scalar t)>;

  AlphaCoefficient(Fn value, Fn dt, Fn dtt, Scalar lower, Scalar upper, bool time_independent);

  static AlphaCoefficient constant(Scalar value = 1.0);
  /// base + amplitude sin(omega t) cos(pi x / lx) cos(pi y / ly), |amplitude| < base.
  static AlphaCoefficient modulated(Scalar base, Scalar amplitude, Scalar omega, Scalar lx,
                                    Scalar ly);

  Scalar lower_bound() const { return lower_; }
  Scalar upper_bound() const { return upper_; }
  bool time_independent() const { return time_independent_; }

  Vector nodal(const Grid& grid, Scalar t) const;
  Vector nodal_dt(const Grid& grid, Scalar t) const;
  Vector nodal_dtt(const Grid& grid, Scalar t) const;

 private:
  Fn value_, dt_, dtt_;
  Scalar lower_, upper_;
  bool time_independent_;
};

/// Data of the wave problem: Neumann traces g(t_n), initial state and an
/// optional volume source f(t_n) (nodal, one column per level).
struct SourceSpec {
  std::vector<BoundaryTrace> boundary;  // empty, or one trace per level
  Vector u0;
  Vector u1;
  History volume;  // empty, or nodes x levels

  static SourceSpec zero(const Grid& grid, const TimeGrid& time);
  void validate(const Grid& grid, const TimeGrid& time) const;
};

/// Nodal time series u^n, v^n ~ u_t and a^n ~ u_tt.
///
/// v^0 is the prescribed initial velocity, v^n = (u^{n+1} - u^{n-1}) / (2 tau)
/// inside, and both ends of v^N, a^0, a^N use one-sided second-order stencils.
struct WaveTrajectory {
  TimeGrid time;
  History u;
  History v;
  History a;

  static WaveTrajectory zero(const Grid& grid, const TimeGrid& time);
  WaveTrajectory operator-(const WaveTrajectory& other) const;
  WaveTrajectory operator*(Scalar s) const;
};

/// Rebuild v and a from u; `v0` is used at level 0.
WaveTrajectory reconstruct_trajectory(History u, const Vector& v0, const TimeGrid& time);

/// Right-hand-side reaction: none, the linear 2 k beta u_t, or the state's 2 k u_t^2.
struct Reaction {
  enum class Kind { none, linear, quadratic };
  Kind kind = Kind::none;
  const History* beta = nullptr;  // required for Kind::linear

  static Reaction none() { return {}; }
  static Reaction linear(const History& beta) { return {Kind::linear, &beta}; }
  static Reaction quadratic() { return {Kind::quadratic, nullptr}; }
};

/// Fixed-point history of the state solve.
struct PicardReport {
  int sweeps = 0;
  std::vector<Scalar> updates;  // ||u^(m+1) - u^(m)||_U
  std::vector<Scalar> ratios;   // updates[m] / updates[m-1], m >= 1
  bool converged = false;
};

struct StateOptions {
  Scalar picard_tol = 1e-10;
  int picard_max = 30;
  SpdSolveOptions linear{};
  /// Lag only one factor of the quadratic source (2 k w_t u_t) instead of both.
  bool semi_lagged = false;
};

/// Three-level central scheme shared by state, sensitivity and adjoint solves:
///
///   M_alpha (x^{n+1} - 2 x^n + x^{n-1}) / tau^2 + K_c (x^{n+1} + x^{n-1}) / 2
///     +/- K_b (x^{n+1} - x^{n-1}) / (2 tau) = R^n,
///
/// with + forward in time and - for the backward adjoint march. Every step is
/// one SPD solve with M_alpha / tau^2 + K_c / 2 + K_b / (2 tau).
class ThreeLevelScheme {
 public:
  /// Load callback: level n and the history filled so far.
  using Load = std::function<Vector(int n, const History& x)>;

  ThreeLevelScheme(const Grid& grid, const CoefficientFields& coeffs,
                   const AlphaCoefficient& alpha, TimeGrid time, SpdSolveOptions opts = {});

  const Grid& grid() const { return *grid_; }
  const TimeGrid& time() const { return time_; }
  const SparseOperator& unit_mass() const { return mass_; }
  const SparseOperator& stiffness_c() const { return stiff_c_; }
  const SparseOperator& stiffness_b() const { return stiff_b_; }
  SparseOperator mass_alpha(int n) const;

  /// x^0 = x0, x^1 from a second-order Taylor start with velocity v0, then
  /// forward steps. Load(n) is called with levels 0..n filled.
  History march_forward(const Vector& x0, const Vector& v0, const Load& load) const;

  /// Zero terminal data at t = T, marching down to t = 0 with the damping sign
  /// flipped. Load(n) is called with levels n..N filled.
  History march_backward(const Load& load) const;

 private:
  const Grid* grid_;
  const AlphaCoefficient* alpha_;
  TimeGrid time_;
  SpdSolveOptions opts_;
  SparseOperator mass_;
  SparseOperator stiff_c_;
  SparseOperator stiff_b_;
  SparseOperator mass_alpha_const_;  // when alpha is time independent
};

/// Linear problem alpha u_tt - div(c^2 grad u + b grad u_t) = 2 k beta u_t + f
/// with Neumann data g. The reaction uses u_t extrapolated from known levels,
/// so each step stays one SPD solve.
WaveTrajectory solve_linearized(const Grid& grid, const CoefficientFields& coeffs,
                                const AlphaCoefficient& alpha, const Reaction& reaction,
                                const SourceSpec& src, const TimeGrid& time,
                                const SpdSolveOptions& opts = {});

/// Semilinear state with source 2 k(phi) u_t^2, solved by global Picard sweeps
/// w -> u over the whole trajectory. Throws DivergenceError when updates grow
/// three sweeps in a row or picard_max is reached.
std::pair<WaveTrajectory, PicardReport> solve_state(const Grid& grid, const Vector& phi,
                                                    const MediumParams& mp,
                                                    const AlphaCoefficient& alpha,
                                                    const SourceSpec& src, const TimeGrid& time,
                                                    const StateOptions& opts = {});

/// sqrt(max_n ||u^n||_H1^2 + max_n ||v^n||_H1^2 + int ||a||_L2^2).
Scalar u_norm(const Grid& grid, const WaveTrajectory& traj);

/// sqrt(max_n ||u^n||_H1^2 + int ||v||_H1^2).
Scalar x_norm(const Grid& grid, const WaveTrajectory& traj);

/// Discrete energy balance of the three-level scheme at levels n = 1..N-1
/// (entry n-1 holds level n). With w = (u^{n+1} - u^n) / tau, v^n centered and
///   E^{n+1/2} = |w|^2_{M_alpha(t_{n+1/2})} / 2 + (|u^{n+1}|^2_{K_c} + |u^n|^2_{K_c}) / 4,
/// the residual is
///   (E^{n+1/2} - E^{n-1/2}) / tau + |v^n|^2_{K_b} - |v^n|^2_{M_alpha_t} / 2 - (R^n, v^n),
/// R^n being the scheme's load. It vanishes up to solver tolerance for
/// time-independent alpha and is O(tau^2) otherwise.
std::vector<Scalar> energy_identity_residual(const Grid& grid, const WaveTrajectory& traj,
                                             const CoefficientFields& coeffs,
                                             const AlphaCoefficient& alpha,
                                             const SourceSpec& src, const Reaction& reaction);

}  // namespace lensopt
