#pragma once

// Quasi-Newton minimizer with central-difference gradients, used for the
// ARMA conditional-sum-of-squares and exact likelihood objectives.

#include <Eigen/Dense>

#include <cmath>
#include <functional>

namespace ivfts::detail {

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = 1e-6 * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + step;
    const double up = f(probe);
    probe[i] = x[i] - step;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

inline MinimizeResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                                    Eigen::VectorXd x, int max_iterations = 200,
                                    double gradient_tolerance = 1e-7) {
  MinimizeResult out;
  const Eigen::Index dim = x.size();
  double fx = f(x);
  if (dim == 0 || !std::isfinite(fx)) {
    out.x = x;
    out.value = fx;
    out.converged = std::isfinite(fx);
    return out;
  }
  Eigen::MatrixXd inverse_hessian = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd g = numeric_gradient(f, x);

  int it = 0;
  for (; it < max_iterations; ++it) {
    if (!g.allFinite()) break;
    if (g.lpNorm<Eigen::Infinity>() < gradient_tolerance) {
      out.converged = true;
      break;
    }
    Eigen::VectorXd direction = -inverse_hessian * g;
    double slope = g.dot(direction);
    if (!(slope < 0.0)) {
      inverse_hessian.setIdentity();
      direction = -g;
      slope = -g.squaredNorm();
    }

    double step = 1.0;
    Eigen::VectorXd candidate;
    double fc = fx;
    bool accepted = false;
    for (int backtrack = 0; backtrack < 40; ++backtrack) {
      candidate = x + step * direction;
      fc = f(candidate);
      if (std::isfinite(fc) && fc <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.converged = true;  // no further descent possible at working precision
      break;
    }

    const Eigen::VectorXd g_new = numeric_gradient(f, candidate);
    const Eigen::VectorXd s = candidate - x;
    const Eigen::VectorXd y = g_new - g;
    const double improvement = fx - fc;
    x = candidate;
    g = g_new;
    fx = fc;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim, dim);
      inverse_hessian = (eye - rho * s * y.transpose()) * inverse_hessian *
                            (eye - rho * y * s.transpose()) +
                        rho * s * s.transpose();
    }
    if (improvement <= 1e-14 * (std::abs(fx) + 1e-14)) {
      out.converged = true;
      break;
    }
  }
  out.x = x;
  out.value = fx;
  out.iterations = it;
  return out;
}

}  // namespace ivfts::detail
