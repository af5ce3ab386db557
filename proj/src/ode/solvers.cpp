#include "gtp/ode/solvers.hpp"

#include <cmath>
#include <string>

#include "gtp/common/error.hpp"

namespace gtp::ode {

int order(Scheme s) { return s == Scheme::euler ? 1 : 2; }

std::string to_string(Scheme s) { return s == Scheme::euler ? "euler" : "heun"; }

Scheme parse_scheme(std::string_view name) {
  if (name == "euler") return Scheme::euler;
  if (name == "heun") return Scheme::heun;
  throw ConfigError("unknown solver scheme '" + std::string(name) + "'");
}

Point solver_step(Scheme scheme, const VectorField& f, std::span<const double> x, double t_from,
                  double t_to) {
  if (t_from == t_to) throw ConfigError("solver_step: zero-length step");
  const double delta = t_to - t_from;
  const Point k1 = eval_field(f, x, t_from);
  Point next(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) next[i] = x[i] + delta * k1[i];
  if (scheme == Scheme::euler) return next;

  const Point k2 = eval_field(f, next, t_to);
  for (std::size_t i = 0; i < x.size(); ++i) next[i] = x[i] + 0.5 * delta * (k1[i] + k2[i]);
  return next;
}

SolverSpec::SolverSpec(Scheme scheme, std::vector<double> time_points)
    : scheme_(scheme), points_(std::move(time_points)) {
  if (points_.size() < 2) throw ConfigError("SolverSpec: need at least two time points");
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (!(points_[k] > 0.0)) throw ConfigError("SolverSpec: time points must be positive");
    if (k > 0 && !(points_[k] < points_[k - 1]))
      throw ConfigError("SolverSpec: time points must be strictly decreasing");
  }
}

SolverSpec SolverSpec::uniform(Scheme scheme, double t, double u, double h) {
  if (!(t > u) || !(u > 0.0) || !(h > 0.0))
    throw ConfigError("SolverSpec::uniform: need t > u > 0 and h > 0");
  const auto n = static_cast<std::size_t>(std::ceil((t - u) / h - 1e-9));
  std::vector<double> pts(n + 1);
  for (std::size_t k = 0; k <= n; ++k)
    pts[k] = t + (u - t) * static_cast<double>(k) / static_cast<double>(n);
  pts.back() = u;
  return SolverSpec(scheme, std::move(pts));
}

double SolverSpec::max_step() const {
  double h = 0.0;
  for (std::size_t k = 1; k < points_.size(); ++k) h = std::max(h, std::abs(points_[k] - points_[k - 1]));
  return h;
}

Point propagate(const SolverSpec& solver, const VectorField& f, std::span<const double> x_start) {
  if (!all_finite(x_start)) throw NumericError("propagate: non-finite start state");
  Point x(x_start.begin(), x_start.end());
  const auto& pts = solver.time_points();
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    x = solver_step(solver.scheme(), f, x, pts[k], pts[k + 1]);
    if (!all_finite(x))
      throw NumericError("propagate: non-finite state after step " + std::to_string(k));
  }
  return x;
}

TimeGrid TimeGrid::make(double T, double t_min, std::size_t n_points, double rho) {
  if (!(T > 0.0) || !(t_min > 0.0) || !(t_min < T))
    throw ConfigError("TimeGrid: need 0 < t_min < T");
  if (n_points < 2) throw ConfigError("TimeGrid: need at least two points");
  if (!(rho >= 1.0)) throw ConfigError("TimeGrid: rho must be >= 1");
  TimeGrid g;
  g.T = T;
  g.t_min = t_min;
  g.rho = rho;
  g.points.resize(n_points);
  const double lo = std::pow(t_min, 1.0 / rho);
  const double hi = std::pow(T, 1.0 / rho);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double frac = 1.0 - static_cast<double>(i) / static_cast<double>(n_points - 1);
    g.points[i] = std::pow(lo + frac * (hi - lo), rho);
  }
  g.points.front() = T;
  g.points.back() = t_min;
  return g;
}

}  // namespace gtp::ode
