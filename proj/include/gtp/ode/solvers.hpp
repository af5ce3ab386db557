#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gtp/ode/fields.hpp"

namespace gtp::ode {

enum class Scheme { euler, heun };

/// Convergence order p of the one-step scheme.
int order(Scheme s);
std::string to_string(Scheme s);
Scheme parse_scheme(std::string_view name);

/// One step from t_from to t_to (delta = t_to - t_from, negative when integrating toward 0).
Point solver_step(Scheme scheme, const VectorField& f, std::span<const double> x, double t_from,
                  double t_to);

/// A scheme and a strictly decreasing sequence of positive time points.
class SolverSpec {
 public:
  SolverSpec(Scheme scheme, std::vector<double> time_points);

  /// Equal steps from t down to u, each no longer than h.
  static SolverSpec uniform(Scheme scheme, double t, double u, double h);

  Scheme scheme() const { return scheme_; }
  const std::vector<double>& time_points() const { return points_; }
  std::size_t steps() const { return points_.size() - 1; }
  /// Largest |tau_{k+1} - tau_k|, recomputed from the points.
  double max_step() const;

 private:
  Scheme scheme_;
  std::vector<double> points_;
};

/// Composition of solver_step over the whole sequence (the multi-step propagation).
/// A non-finite state raises NumericError naming the failing step.
Point propagate(const SolverSpec& solver, const VectorField& f, std::span<const double> x_start);

/// Karras-style rho spacing from T down to t_min:
/// point_i = (t_min^(1/rho) + (1 - i/(n-1)) (T^(1/rho) - t_min^(1/rho)))^rho.
struct TimeGrid {
  double T = 5.0;
  double t_min = 0.002;
  double rho = 7.0;
  std::vector<double> points;

  static TimeGrid make(double T, double t_min, std::size_t n_points, double rho);
  std::size_t size() const { return points.size(); }
};

}  // namespace gtp::ode
