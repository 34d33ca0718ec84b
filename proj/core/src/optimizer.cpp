#include "swedge/optimizer.hpp"

#include <cmath>
#include <limits>

#include "swedge/rng.hpp"

namespace swedge {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 40;

double safe_eval(const Objective& f, const Eigen::VectorXd& x, int& evaluations) {
  ++evaluations;
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

Eigen::VectorXd clip(Eigen::VectorXd x, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

// Variables held at a bound by a gradient pointing outward.
std::vector<bool> active_set(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                             const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  std::vector<bool> active(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    active[i] = (x(i) <= lower(i) && g(i) > 0) || (x(i) >= upper(i) && g(i) < 0);
  return active;
}

double projected_norm(const Eigen::VectorXd& g, const std::vector<bool>& active) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (!active[i]) s += g(i) * g(i);
  return std::sqrt(s);
}

OptimizerResult run(const Objective& f, Eigen::VectorXd x, const Eigen::VectorXd& lower,
                    const Eigen::VectorXd& upper, const OptimizerOptions& opt) {
  const Eigen::Index n = x.size();
  OptimizerResult res;
  x = clip(std::move(x), lower, upper);
  double fx = safe_eval(f, x, res.evaluations);
  Eigen::VectorXd g = numeric_gradient(f, x, fx, lower, upper, opt.difference_step, &res.evaluations);
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  if (opt.keep_trace) res.trace.push_back(fx);

  auto active = active_set(x, g, lower, upper);
  double pg = projected_norm(g, active);
  for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
    if (pg < opt.gradient_tolerance) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd d = -h * g;
    for (Eigen::Index i = 0; i < n; ++i)
      if (active[i]) d(i) = 0.0;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      h.setIdentity();
      d = -g;
      for (Eigen::Index i = 0; i < n; ++i)
        if (active[i]) d(i) = 0.0;
      slope = g.dot(d);
    }
    const double len = d.cwiseAbs().maxCoeff();
    if (len > opt.max_step) d *= opt.max_step / len;

    double step = 1.0;
    Eigen::VectorXd x_new = x;
    double f_new = fx;
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      x_new = clip(x + step * d, lower, upper);
      f_new = safe_eval(f, x_new, res.evaluations);
      if (f_new <= fx + kArmijo * g.dot(x_new - x)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!h.isIdentity()) {
        h.setIdentity();
        continue;
      }
      break;
    }

    const Eigen::VectorXd g_new =
        numeric_gradient(f, x_new, f_new, lower, upper, opt.difference_step, &res.evaluations);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
      h = (eye - rho * s * y.transpose()) * h * (eye - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    const double change = std::abs(fx - f_new) / std::max(1.0, std::abs(fx));
    x = x_new;
    fx = f_new;
    g = g_new;
    if (opt.keep_trace) res.trace.push_back(fx);
    active = active_set(x, g, lower, upper);
    pg = projected_norm(g, active);
    if (change < opt.relative_tolerance && pg < opt.loose_gradient_tolerance) {
      res.converged = true;
      ++res.iterations;
      break;
    }
  }
  if (!res.converged && pg < opt.loose_gradient_tolerance) {
    // Backtracking stalled on finite-difference noise at a stationary point.
    res.converged = true;
  }
  res.x = x;
  res.value = fx;
  res.gradient = g;
  res.gradient_norm = pg;
  return res;
}

}  // namespace

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double fx,
                                 const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                 double step, int* evaluations) {
  int evals = 0;
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double up = std::min(x(i) + step, upper(i));
    const double down = std::max(x(i) - step, lower(i));
    probe(i) = up;
    const double f_up = up > x(i) ? safe_eval(f, probe, evals) : fx;
    probe(i) = down;
    const double f_down = down < x(i) ? safe_eval(f, probe, evals) : fx;
    probe(i) = x(i);
    g(i) = (f_up - f_down) / (up - down);
  }
  if (evaluations) *evaluations += evals;
  return g;
}

OptimizerResult minimize_box(const Objective& f, Eigen::VectorXd start, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper, const OptimizerOptions& options) {
  OptimizerResult best = run(f, start, lower, upper, options);
  if (best.converged) return best;

  RandomStream jitter(0x5eed5eedULL, static_cast<std::uint64_t>(start.size()), 0);
  int total_evals = best.evaluations;
  for (int r = 1; r <= options.restarts; ++r) {
    Eigen::VectorXd x0 = start;
    for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) += jitter.normal();
    OptimizerResult attempt = run(f, x0, lower, upper, options);
    total_evals += attempt.evaluations;
    const bool better = (attempt.converged && !best.converged) ||
                        (attempt.converged == best.converged && attempt.value < best.value);
    if (better) {
      best = std::move(attempt);
      best.restarts_used = r;
    }
    if (best.converged) break;
  }
  best.evaluations = total_evals;
  return best;
}

}  // namespace swedge
