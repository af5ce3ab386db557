#include "gtp/ode/order_study.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gtp/common/error.hpp"
#include "gtp/common/rng.hpp"
#include "gtp/ode/flowmap.hpp"

namespace gtp::ode {

namespace {

// Mean over samples of (Phi_theta(x_t, t, s) - Phi_theta(y, u, s))^2 for a
// scalar flow map with no state input.
double consistency_mse(const FlowMapNet& net, const Matrix& student, const std::vector<double>& targets,
                       double u, double s) {
  const std::size_t n = targets.size();
  Matrix y(n, 1);
  for (std::size_t i = 0; i < n; ++i) y(i, 0) = targets[i];
  const std::vector<double> uu(n, u), ss(n, s);
  const Matrix teacher = flowmap_eval_batch(net, Matrix(n, 0), y, uu, ss, true);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = student(i, 0) - teacher(i, 0);
    acc += d * d;
  }
  return acc / static_cast<double>(n);
}

}  // namespace

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("loglog_slope: need >= 2 paired points");
  double mx = 0.0, my = 0.0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::nan("");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

OrderStudy run_order_study(const OrderStudyConfig& cfg) {
  if (cfg.h_list.size() < 3) throw ConfigError("order study: need at least three step sizes");
  if (!(cfg.t > cfg.u && cfg.u > cfg.s && cfg.s >= 0.0)) throw ConfigError("order study: need t > u > s >= 0");
  for (double h : cfg.h_list)
    if (!(h > 0.0 && h < cfg.t)) throw ConfigError("order study: every h must lie in (0, t)");
  if (cfg.mc_samples == 0) throw ConfigError("order study: mc_samples must be >= 1");

  field::PosteriorOracle oracle;
  for (double a : cfg.atoms) oracle.atoms.push_back({a});
  oracle.weights = cfg.weights;
  validate(oracle);

  Rng root(cfg.seed);
  Rng init_rng = root.split(stream::init);
  TimeDomain domain;
  domain.T = std::max(5.0, cfg.t);
  ActorArch arch;
  arch.hidden = {32, 32};
  arch.activation = nn::Activation::tanh;
  FlowMapNet net = make_flowmap_net(0, 1, domain, arch, init_rng, /*zero_output_layer=*/false);

  // Shared Monte-Carlo draws: data atom index and noise.
  const std::size_t n = cfg.mc_samples;
  Rng draw = root.split(stream::diag);
  std::vector<double> x0(n), z(n);
  std::vector<double> cdf(cfg.weights.size());
  std::partial_sum(cfg.weights.begin(), cfg.weights.end(), cdf.begin());
  for (std::size_t i = 0; i < n; ++i) {
    const double r = draw.uniform() * cdf.back();
    const auto idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
    x0[i] = cfg.atoms[std::min(idx, cfg.atoms.size() - 1)];
    z[i] = draw.normal();
  }

  Matrix x_t(n, 1);
  for (std::size_t i = 0; i < n; ++i) x_t(i, 0) = x0[i] + cfg.t * z[i];
  const std::vector<double> tt(n, cfg.t), ss(n, cfg.s);
  const Matrix student = flowmap_eval_batch(net, Matrix(n, 0), x_t, tt, ss, false);

  auto targets = [&](const SolverSpec& solver, bool surrogate) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double xs[1] = {x_t(i, 0)};
      if (surrogate) {
        y[i] = propagate(solver, field::Surrogate{{x0[i]}}, xs)[0];
      } else {
        y[i] = propagate(solver, oracle, xs)[0];
      }
    }
    return y;
  };

  OrderStudy study;
  const double h_min = *std::min_element(cfg.h_list.begin(), cfg.h_list.end());
  const SolverSpec ref_solver = SolverSpec::uniform(cfg.scheme, cfg.t, cfg.u, h_min / cfg.refine);
  study.l_ideal_ref = consistency_mse(net, student, targets(ref_solver, false), cfg.u, cfg.s);

  std::vector<double> hs, gaps, errs;
  for (double h : cfg.h_list) {
    const SolverSpec solver = SolverSpec::uniform(cfg.scheme, cfg.t, cfg.u, h);
    OrderRow row{};
    row.h = solver.max_step();
    row.l_prac = consistency_mse(net, student, targets(solver, true), cfg.u, cfg.s);
    row.l_ideal = consistency_mse(net, student, targets(solver, false), cfg.u, cfg.s);
    row.gap = std::abs(row.l_prac - row.l_ideal);
    row.solver_error = std::abs(row.l_ideal - study.l_ideal_ref);
    study.rows.push_back(row);
    hs.push_back(row.h);
    gaps.push_back(row.gap);
    errs.push_back(row.solver_error);
  }
  study.gap_slope = loglog_slope(hs, gaps);
  study.solver_error_slope = loglog_slope(hs, errs);
  return study;
}

}  // namespace gtp::ode
