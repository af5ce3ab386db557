#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gtp/ode/solvers.hpp"

namespace gtp::ode {

/// Compares consistency losses whose teacher targets are propagated with the
/// anchored surrogate field against targets propagated with the exact
/// posterior field, on 1-D Dirac-mixture data and a fixed random flow map.
struct OrderStudyConfig {
  Scheme scheme = Scheme::euler;
  std::vector<double> h_list{0.2, 0.1, 0.05, 0.025};
  std::size_t mc_samples = 100000;
  std::vector<double> atoms{-1.0, 1.0};
  std::vector<double> weights{0.5, 0.5};
  double t = 1.0;    // student time
  double u = 0.2;    // teacher time, reached by the solver
  double s = 0.05;   // common jump target
  std::uint64_t seed = 0;
  /// Reference for the solver-error column: same scheme at min(h) / refine.
  double refine = 16.0;
};

struct OrderRow {
  double h;
  double gap;           // |L_prac(h) - L_ideal(h)|
  double l_prac;
  double l_ideal;
  double solver_error;  // |L_ideal(h) - L_ideal(h_ref)|
};

struct OrderStudy {
  std::vector<OrderRow> rows;
  double l_ideal_ref = 0.0;
  double gap_slope = 0.0;
  double solver_error_slope = 0.0;
};

OrderStudy run_order_study(const OrderStudyConfig& cfg);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace gtp::ode
