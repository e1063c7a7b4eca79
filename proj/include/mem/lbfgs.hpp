#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "mem/error.hpp"

namespace mem::lbfgs {

struct Options {
  std::size_t memory = 10;
  double grad_tol = 1e-9;       // stop when ||grad||_2 <= grad_tol
  std::size_t max_iter = 500;
  double c1 = 1e-4;             // sufficient decrease
  double c2 = 0.9;              // curvature
  std::size_t max_linesearch = 60;
  // Objective changes below approx_eps * (1 + |f|) are treated as rounding
  // noise; inside that band the line search relies on the directional
  // derivative alone (approximate Wolfe conditions).
  double approx_eps = 1e-12;
  double curvature_skip = 1e-12;  // skip pairs with <s,y> <= this * ||s|| ||y||
};

enum class Status { Converged, MaxIterations, LineSearchFailure };

struct Iteration {
  std::size_t index = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  bool approximate = false;  // accepted without a strict, rounding-free decrease
};

struct Result {
  std::vector<double> x;
  std::vector<double> gradient;
  double objective = 0.0;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  Status status = Status::MaxIterations;
  std::vector<Iteration> trace;
};

namespace detail {
inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db), or NaN.
inline double cubic_min(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (!(disc >= 0.0)) return std::nan("");
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double denom = db - da + 2.0 * d2;
  if (denom == 0.0) return std::nan("");
  return b - (b - a) * (db + d2 - d1) / denom;
}
}  // namespace detail

/// Limited-memory BFGS with two-loop recursion and a strong Wolfe line
/// search (bracketing + zoom with safeguarded cubic interpolation).
///
/// `eval(x, grad)` returns f(x) and writes grad f(x) into `grad`.
template <typename Eval>
Result minimize(Eval&& eval, std::vector<double> x0, const Options& opt) {
  if (!(opt.c1 > 0.0 && opt.c1 < opt.c2 && opt.c2 < 1.0))
    mem::detail::fail(ErrorCode::InvalidArgument, "line search needs 0 < c1 < c2 < 1");
  if (opt.memory == 0) mem::detail::fail(ErrorCode::InvalidArgument, "L-BFGS memory must be >= 1");

  const std::size_t n = x0.size();
  Result res;
  res.x = std::move(x0);
  res.gradient.assign(n, 0.0);
  res.objective = eval(std::span<const double>(res.x), std::span<double>(res.gradient));
  res.evaluations = 1;
  res.grad_norm = detail::norm(res.gradient);
  res.trace.push_back({0, res.objective, res.grad_norm, 0.0, false});

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> dir(n), x_trial(n), g_trial(n), alpha_buf;

  auto two_loop = [&] {
    for (std::size_t i = 0; i < n; ++i) dir[i] = -res.gradient[i];
    const std::size_t k = s_hist.size();
    alpha_buf.assign(k, 0.0);
    for (std::size_t j = k; j-- > 0;) {
      alpha_buf[j] = rho_hist[j] * detail::dot(s_hist[j], dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] -= alpha_buf[j] * y_hist[j][i];
    }
    if (k > 0) {
      const double gamma = detail::dot(s_hist.back(), y_hist.back()) / detail::dot(y_hist.back(), y_hist.back());
      for (auto& v : dir) v *= gamma;
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double beta = rho_hist[j] * detail::dot(y_hist[j], dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] += (alpha_buf[j] - beta) * s_hist[j][i];
    }
  };

  struct Point {
    double a, f, d;
  };

  // Returns accepted step (> 0) or 0 on failure; x_trial/g_trial hold the
  // accepted point.
  auto line_search = [&](double a_init, double& f_new, bool& approximate) -> double {
    const double f0 = res.objective;
    const double d0 = detail::dot(res.gradient, dir);
    const double eps_f = opt.approx_eps * (1.0 + std::abs(f0));
    std::size_t budget = opt.max_linesearch;

    auto probe = [&](double a) -> Point {
      for (std::size_t i = 0; i < n; ++i) x_trial[i] = res.x[i] + a * dir[i];
      const double f = eval(std::span<const double>(x_trial), std::span<double>(g_trial));
      ++res.evaluations;
      --budget;
      return {a, f, detail::dot(g_trial, dir)};
    };
    auto armijo = [&](const Point& p) { return p.f <= f0 + opt.c1 * p.a * d0; };
    auto sufficient = [&](const Point& p) { return std::isfinite(p.f) && (armijo(p) || p.f <= f0 + eps_f); };
    auto curvature = [&](const Point& p) { return std::abs(p.d) <= -opt.c2 * d0; };
    auto accept = [&](const Point& p) {
      f_new = p.f;
      // Armijo can hold with no actual decrease once c1 a d0 is below the
      // rounding of f0; such steps are flagged like approximate-Wolfe ones.
      approximate = !armijo(p) || !(p.f < f0);
      return p.a;
    };

    auto zoom = [&](Point lo, Point hi) -> double {
      while (budget > 0) {
        const double lo_a = std::min(lo.a, hi.a), hi_a = std::max(lo.a, hi.a);
        const double width = hi_a - lo_a;
        if (width <= 1e-16 * std::max(1.0, hi_a)) return 0.0;
        double a = detail::cubic_min(lo.a, lo.f, lo.d, hi.a, hi.f, hi.d);
        if (!std::isfinite(a) || a < lo_a + 0.1 * width || a > hi_a - 0.1 * width) a = 0.5 * (lo.a + hi.a);
        const Point p = probe(a);
        if (!sufficient(p) || p.f > lo.f + eps_f) {
          hi = p;
        } else {
          if (curvature(p)) return accept(p);
          if (p.d * (hi.a - lo.a) >= 0.0) hi = lo;
          lo = p;
        }
      }
      return 0.0;
    };

    Point prev{0.0, f0, d0};
    double a = a_init;
    for (std::size_t i = 1; budget > 0; ++i) {
      const Point p = probe(a);
      if (!sufficient(p) || (i > 1 && p.f > prev.f + eps_f)) return zoom(prev, p);
      if (curvature(p)) return accept(p);
      if (p.d >= 0.0) return zoom(p, prev);
      prev = p;
      a *= 2.0;
    }
    return 0.0;
  };

  for (std::size_t iter = 0;; ++iter) {
    if (res.grad_norm <= opt.grad_tol) {
      res.status = Status::Converged;
      return res;
    }
    if (iter >= opt.max_iter) {
      res.status = Status::MaxIterations;
      return res;
    }

    two_loop();
    if (!(detail::dot(res.gradient, dir) < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      two_loop();
    }

    double f_new = 0.0;
    bool approximate = false;
    double step = line_search(s_hist.empty() ? std::min(1.0, 1.0 / res.grad_norm) : 1.0, f_new, approximate);
    if (step == 0.0 && !s_hist.empty()) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      two_loop();
      step = line_search(std::min(1.0, 1.0 / res.grad_norm), f_new, approximate);
    }
    if (step == 0.0) {
      res.status = Status::LineSearchFailure;
      return res;
    }

    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_trial[i] - res.x[i];
      y[i] = g_trial[i] - res.gradient[i];
    }
    const double sy = detail::dot(s, y);
    if (sy > opt.curvature_skip * detail::norm(s) * detail::norm(y)) {
      if (s_hist.size() == opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }

    res.x = x_trial;
    res.gradient = g_trial;
    res.objective = f_new;
    res.grad_norm = detail::norm(res.gradient);
    ++res.iterations;
    res.trace.push_back({res.iterations, res.objective, res.grad_norm, step, approximate});
  }
}

}  // namespace mem::lbfgs
