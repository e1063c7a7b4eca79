// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mem/mem.hpp"

namespace fs = std::filesystem;
using mem::Vector;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double norm(std::span<const double> v) { return mem::vector_norm(v); }

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::shared_ptr<const mem::EmpiricalPrior> uniform_prior(std::size_t n, std::size_t d, mem::Rng& rng) {
  std::vector<double> v(n * d);
  for (auto& x : v) x = rng.uniform();
  return std::make_shared<const mem::EmpiricalPrior>(mem::SampleMatrix(n, d, std::move(v)));
}

Vector gaussian_vector(std::size_t m, mem::Rng& rng, double scale) {
  Vector v(m);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

mem::LinearOperator gaussian_operator(std::size_t m, std::size_t d, mem::Rng& rng) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.normal() / std::sqrt(static_cast<double>(d));
  return mem::LinearOperator::dense(a);
}

// Identity plus a small perturbation: square and safely full rank.
mem::LinearOperator near_identity(std::size_t d, mem::Rng& rng) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) += 0.2 * rng.normal();
  return mem::LinearOperator::dense(a);
}

// A random instance; identity or near-identity operators only when m == d.
mem::DualProblem random_problem(mem::Rng& rng, std::size_t n, std::size_t d, std::size_t m) {
  auto prior = uniform_prior(n, d, rng);
  const double pick = rng.uniform();
  mem::LinearOperator op = m == d && pick < 0.3   ? mem::LinearOperator::identity(d)
                           : m == d && pick < 0.6 ? near_identity(d, rng)
                                                  : gaussian_operator(m, d, rng);
  Vector b(m);
  for (auto& x : b) x = rng.uniform() + 0.2 * rng.normal();
  return mem::DualProblem(prior, op, b, 0.1 + 2.0 * rng.uniform());
}

// ---------------------------------------------------------------------------

Outcome ac1_closed_form() {
  mem::Rng rng(101);
  double worst_z = 0.0, worst_x = 0.0;
  bool ok = true;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t d = 1 + rng.below(16);
    Vector x1(d);
    for (auto& v : x1) v = rng.uniform();
    const Vector b = gaussian_vector(d, rng, 1.0);
    const double alpha = 0.05 + 5.0 * rng.uniform();
    auto prior = std::make_shared<const mem::EmpiricalPrior>(mem::SampleMatrix(1, d, x1));
    const mem::DualProblem p(prior, mem::LinearOperator::identity(d), b, alpha);
    const auto res = mem::solve_dual(p);
    Vector expected(d);
    for (std::size_t j = 0; j < d; ++j) expected[j] = alpha * (b[j] - x1[j]);
    const double ez = dist(res.z_bar, expected) / (1.0 + norm(res.z_bar));
    const double ex = dist(mem::recover_primal(*prior, p.op, res.z_bar).x_bar, x1);
    worst_z = std::max(worst_z, ez);
    worst_x = std::max(worst_x, ex);
    ok = ok && ez <= 1e-7 && ex <= 1e-9;
  }
  return {ok, fmt("50 single-atom solves, max |z - a(b - X1)|/(1+|z|) = %.2e, max |x - X1| = %.2e", worst_z, worst_x)};
}

Outcome ac2_gradient() {
  mem::Rng rng(202);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 1 + rng.below(50), d = 1 + rng.below(16), m = 1 + rng.below(16);
    const auto p = random_problem(rng, n, d, m);
    const Vector z = gaussian_vector(m, rng, 1.0);
    const Vector g = mem::dual_gradient(p, z);
    Vector fd(m);
    const double h = 1e-5;
    for (std::size_t i = 0; i < m; ++i) {
      Vector zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      fd[i] = (mem::dual_objective(p, zp) - mem::dual_objective(p, zm)) / (2.0 * h);
    }
    worst = std::max(worst, dist(fd, g) / norm(g));
  }
  return {worst <= 1e-5, fmt("100 instances (n<=50, d<=16, m<=16), max relative deviation %.2e", worst)};
}

Outcome ac3_strong_convexity() {
  mem::Rng rng(303);
  double worst_gap = -INFINITY;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t m = 1 + rng.below(8), d = 1 + rng.below(8);
    const auto p = random_problem(rng, 1 + rng.below(30), d, m);
    const Vector z1 = gaussian_vector(m, rng, 2.0), z2 = gaussian_vector(m, rng, 2.0);
    const Vector g1 = mem::dual_gradient(p, z1);
    double lin = 0.0;
    for (std::size_t i = 0; i < m; ++i) lin += g1[i] * (z2[i] - z1[i]);
    const double rhs = lin + std::pow(dist(z1, z2), 2) / (2.0 * p.alpha);
    worst_gap = std::max(worst_gap, rhs - (mem::dual_objective(p, z2) - mem::dual_objective(p, z1)));
  }
  const bool convex_ok = worst_gap <= 1e-10;

  std::size_t held = 0, ref_converged = 0;
  double worst_ratio = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t d = 1 + rng.below(10), m = 1 + rng.below(10);
    const auto p = random_problem(rng, 5 + rng.below(40), d, m);
    mem::SolverConfig rough, ref;
    rough.grad_tol = std::pow(10.0, -2.0 - 4.0 * rng.uniform());
    ref.grad_tol = 1e-13;
    ref.max_iter = 2000;
    const auto r = mem::solve_dual(p, rough);
    const auto z = mem::solve_dual(p, ref);
    ref_converged += z.converged;
    // The reference is itself only an eps_ref-minimizer; its own distance
    // bound is added by the triangle inequality.
    const double bound = mem::epsilon_distance_bound(p.alpha, r.epsilon_cert) + mem::epsilon_distance_bound(p.alpha, z.epsilon_cert);
    const double measured = dist(r.z_bar, z.z_bar);
    held += measured <= bound;
    if (bound > 0.0) worst_ratio = std::max(worst_ratio, measured / bound);
  }
  return {convex_ok && held == 100,
          fmt("1000 pairs, max violation %.2e (<= 1e-10); distance bound held %zu/100, max ratio %.3f, "
              "references at grad_tol 1e-13: %zu/100",
              worst_gap, held, worst_ratio, ref_converged)};
}

Outcome ac4_rho0() {
  mem::Rng rng(404);
  std::size_t violations = 0;
  double worst_z = 0.0, worst_phi = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t d = 1 + rng.below(12), m = 1 + rng.below(12);
    const auto p = random_problem(rng, 1 + rng.below(60), d, m);
    const auto res = mem::solve_dual(p);
    const auto c = mem::compute_constants(p, res.epsilon_cert);
    const double zr = norm(res.z_bar) / c.rho0, pr = std::abs(res.objective) / c.rho0;
    worst_z = std::max(worst_z, zr);
    worst_phi = std::max(worst_phi, pr);
    violations += (zr > 1.0) + (pr > 1.0) + !res.converged;
  }
  return {violations == 0, fmt("20 solves, max |z|/rho0 = %.3e, max |phi|/rho0 = %.3e, violations %zu", worst_z, worst_phi, violations)};
}

Outcome ac5_mgf_bounds() {
  mem::Rng rng(505);
  std::size_t violations = 0, probes = 0;
  double min_margin = INFINITY;
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t d = 1 + rng.below(12), m = 1 + rng.below(12);
    const auto p = random_problem(rng, 1 + rng.below(80), d, m);
    const double rho = 2.0 * mem::compute_constants(p, 0.0).rho0;
    const auto rep_ = mem::mgf_bounds_check(*p.prior, p.op, rho, 100, 5000 + rep);
    violations += rep_.violations;
    probes += rep_.trials;
    min_margin = std::min({min_margin, rep_.min_margin_lower, rep_.min_margin_upper});
  }
  return {violations == 0 && probes == 1000,
          fmt("%zu probes in B_rho (rho = 2 rho0) over 10 priors, %zu violations, min log-margin %.3e", probes, violations, min_margin)};
}

Outcome ac6_error_bound() {
  mem::Rng rng(606);
  std::size_t violations = 0;
  double worst_ratio = 0.0, min_bound = INFINITY;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t d = 1 + rng.below(4);
    const std::size_t n_mu = 2 + rng.below(19);
    auto mu = uniform_prior(n_mu, d, rng);
    // Half the instances use a jittered copy of mu, half an independent draw.
    std::shared_ptr<const mem::EmpiricalPrior> nu;
    if (rep % 2 == 0) {
      std::vector<double> v(n_mu * d);
      for (std::size_t i = 0; i < n_mu; ++i)
        for (std::size_t j = 0; j < d; ++j) v[i * d + j] = std::clamp(mu->at(i, j) + 0.02 * (rng.uniform() - 0.5), 0.0, 1.0);
      nu = std::make_shared<const mem::EmpiricalPrior>(mem::SampleMatrix(n_mu, d, std::move(v)));
    } else {
      nu = uniform_prior(2 + rng.below(19), d, rng);
    }
    const mem::LinearOperator op = rep % 3 == 0 ? mem::LinearOperator::identity(d) : near_identity(d, rng);
    Vector b(d);
    for (auto& x : b) x = rng.uniform();
    // Small alpha keeps K finite so every term of the bound is informative.
    const double alpha = 0.05 + 0.2 * rng.uniform();
    const mem::DualProblem pmu(mu, op, b, alpha), pnu(nu, op, b, alpha);
    mem::SolverConfig eps_cfg, exact_cfg;
    eps_cfg.grad_tol = 1e-6;
    exact_cfg.grad_tol = 1e-13;
    exact_cfg.max_iter = 2000;
    const auto rnu = mem::solve_dual(pnu, eps_cfg), rmu = mem::solve_dual(pmu, exact_cfg);
    const double radius = std::max(mu->radius(), nu->radius());
    const auto c = mem::compute_constants(alpha, norm(b), mem::operator_norm(op), radius, d, rnu.epsilon_cert);
    const double rho = 2.0 * c.rho0;
    static constexpr std::size_t kPoints[] = {0, 4001, 401, 61, 25};
    const double dhat = mem::epi_distance_grid_upper(*nu, *mu, op, rho, kPoints[d]);
    const double bound = mem::primal_error_bound(pmu, *nu, rnu.epsilon_cert, dhat);
    // x_mu comes from an eps_mu-minimizer; the same bound with nu = mu, D = 0
    // bounds its distance to the exact solution.
    const double ref_slack = mem::primal_error_bound(pmu, *mu, rmu.epsilon_cert, 0.0);
    const double measured =
        dist(mem::recover_primal(*nu, op, rnu.z_bar).x_bar, mem::recover_primal(*mu, op, rmu.z_bar).x_bar);
    const bool finite = std::isfinite(bound);
    violations += !(finite && measured <= bound + ref_slack);
    worst_ratio = std::max(worst_ratio, measured / bound);
    min_bound = std::min(min_bound, bound);
  }
  return {violations == 0, fmt("20 instances (m=d<=4, n<=20), violations %zu, max measured/bound %.3e, min bound %.3e",
                               violations, worst_ratio, min_bound)};
}

// Two clusters in [0,1]^9: a bright-centre pattern and its complement, each
// with uniform jitter of half-width 0.25, mixed 60/40.
mem::SampleMatrix two_cluster_data(std::size_t count, mem::Rng& rng) {
  const std::size_t d = 9;
  Vector a(d), c(d);
  for (std::size_t j = 0; j < d; ++j) {
    a[j] = (j % 2 == 0) ? 0.75 : 0.3;
    c[j] = 1.0 - a[j];
  }
  std::vector<double> v(count * d);
  for (std::size_t i = 0; i < count; ++i) {
    const Vector& centre = rng.uniform() < 0.6 ? a : c;
    for (std::size_t j = 0; j < d; ++j) v[i * d + j] = std::clamp(centre[j] + 0.5 * (rng.uniform() - 0.5), 0.0, 1.0);
  }
  return mem::SampleMatrix(count, d, std::move(v));
}

Outcome ac7_rates() {
  // The seed was fixed before the first run and is not tuned.
  mem::Rng rng(707);
  const mem::SampleMatrix data = two_cluster_data(2000, rng);
  // Ground truth: a fresh draw from the same law, observed with noise.
  const mem::SampleMatrix truth = two_cluster_data(1, rng);
  const Vector b = mem::add_gaussian(truth.row(0), 0.10, 708);
  const auto grid = mem::linear_grid(100, 1000, 10);
  const auto table = mem::rate_experiment(data, b, mem::LinearOperator::identity(9), 1.0, grid, 15, 709);
  const auto means = table.mean_by_n();
  std::vector<double> ns, errs;
  for (const auto& [n, e] : means) {
    ns.push_back(static_cast<double>(n));
    errs.push_back(e);
  }
  const double rho = mem::spearman_correlation(ns, errs);
  const double c = errs.front() * std::pow(ns.front(), 0.25);
  std::size_t above = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    const double env = c * std::pow(ns[k], -0.25);
    worst = std::max(worst, errs[k] / env);
    above += errs[k] > env;
  }
  std::size_t unconverged = 0;
  for (const auto& r : table.records) unconverged += !r.converged;
  std::string curve;
  for (std::size_t k = 0; k < ns.size(); ++k) curve += fmt("%s%.0f:%.2e", k ? " " : "", ns[k], errs[k]);
  return {rho <= -0.8 && above == 0 && unconverged == 0,
          fmt("spearman %.3f (<= -0.8), points above c n^-1/4: %zu, max err/envelope %.3f, unconverged %zu; mean errors ",
              rho, above, worst, unconverged) +
              curve};
}

Outcome ac8_recovery() {
  mem::Rng rng(808);
  std::size_t failures = 0;
  double worst_simplex = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 1 + rng.below(40), d = 1 + rng.below(8), m = 1 + rng.below(8);
    const auto p = random_problem(rng, n, d, m);
    mem::SolverConfig cfg;
    cfg.grad_tol = 1e-8;
    const auto res = mem::solve_dual(p, cfg);
    const auto sol = mem::recover_primal(*p.prior, p.op, res.z_bar);
    double total = 0.0;
    bool ok = true;
    for (double w : sol.weights) {
      ok = ok && w >= 0.0;
      total += w;
    }
    worst_simplex = std::max(worst_simplex, std::abs(total - 1.0));
    ok = ok && std::abs(total - 1.0) <= 1e-12;
    for (std::size_t j = 0; j < d; ++j) {
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, p.prior->at(i, j));
        hi = std::max(hi, p.prior->at(i, j));
      }
      ok = ok && sol.x_bar[j] >= lo - 1e-12 && sol.x_bar[j] <= hi + 1e-12;
    }
    const double kl = mem::kl_to_prior(sol);
    ok = ok && kl >= -1e-12 && kl <= std::log(static_cast<double>(n)) + 1e-12;
    const auto same = mem::threshold_measure(*p.prior, sol, 0.0);
    ok = ok && same.x_bar == sol.x_bar && same.weights == sol.weights && same.support_size == sol.support_size;
    failures += !ok;
  }
  return {failures == 0, fmt("1000 solves, failures %zu, max |sum w - 1| = %.2e", failures, worst_simplex)};
}

// ---------------------------------------------------------------------------

int run_memsolve(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(MEMSOLVE_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome ac9_determinism() {
  const fs::path dir = fs::temp_directory_path() / ("mem_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  // 600 smooth 8x8 images: enough rows that the prior splits into several
  // reduction chunks and the rate cells run on several workers.
  mem::Rng rng(909);
  mem::ImageSet set;
  set.count = 600;
  set.rows = 8;
  set.cols = 8;
  for (std::size_t i = 0; i < set.count; ++i) {
    const double fx = rng.uniform() * 3.0, fy = rng.uniform() * 3.0, phase = rng.uniform() * 6.283;
    for (std::size_t r = 0; r < 8; ++r)
      for (std::size_t c = 0; c < 8; ++c)
        set.pixels.push_back(static_cast<std::uint8_t>(std::lround(127.5 + 127.5 * std::sin(fx * r / 8.0 * 3.14159 + fy * c / 8.0 * 3.14159 + phase))));
  }
  mem::io::write_file(dir / "data.idx", mem::serialize_idx(set));
  const std::string data = (dir / "data.idx").string();

  const std::string denoise = "denoise --data " + data + " --ground-truth 17 --noise gaussian --alpha 0.5 --seed 3";
  const std::string denoise_sp = "denoise --data " + data + " --ground-truth 42 --noise salt-pepper --alpha 1 --n 400 --seed 4";
  const std::string rates = "rates --data " + data + " --synthesize --ground-truth 5 --alpha 0.5 --grid 100,600,6 --trials 4 --seed 8";
  struct Job {
    std::string name, args;
    std::vector<std::string> files;
  };
  const std::vector<std::string> denoise_files{"b.pgm", "x_bar.pgm", "x_thresholded.pgm", "x_masked.pgm", "nearest_neighbor.pgm",
                                               "weights.csv"};
  const std::vector<Job> jobs{{"denoise-gaussian", denoise, denoise_files},
                              {"denoise-saltpepper", denoise_sp, denoise_files},
                              {"rates", rates, {"rates.csv"}}};

  std::size_t compared = 0, mismatches = 0, failures = 0;
  for (const auto& job : jobs) {
    std::vector<fs::path> outs;
    for (const char* threads : {"1", "8"})
      for (int run = 0; run < 2; ++run) {
        const fs::path out = dir / (job.name + "_t" + threads + "_r" + std::to_string(run));
        failures += run_memsolve(job.args + " --threads " + threads + " --out " + out.string(), dir / "log.txt") != 0;
        failures += !fs::exists(out / "manifest.json");
        outs.push_back(out);
      }
    for (const auto& f : job.files) {
      const std::string first = slurp(outs.front() / f);
      failures += first.empty();
      for (std::size_t k = 1; k < outs.size(); ++k) {
        ++compared;
        mismatches += slurp(outs[k] / f) != first;
      }
    }
  }
  fs::remove_all(dir);
  return {failures == 0 && mismatches == 0,
          fmt("denoise (2 configs) and rates, --threads 1 vs 8, 2 runs each: %zu file comparisons, %zu mismatches, %zu run failures",
              compared, mismatches, failures)};
}

Outcome ac10_idx() {
  auto header = [](std::uint32_t magic, std::uint32_t n, std::uint32_t r, std::uint32_t c) {
    std::vector<std::uint8_t> out;
    for (std::uint32_t v : {magic, n, r, c})
      for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
    return out;
  };
  std::vector<std::string> failed;

  auto valid = header(0x00000803, 2, 2, 2);
  for (std::uint8_t p : {0, 64, 128, 255, 1, 2, 3, 4}) valid.push_back(p);
  try {
    const auto set = mem::parse_idx(valid);
    const auto s = mem::normalize(set);
    const bool ok = set.count == 2 && set.rows == 2 && set.cols == 2 && set.trailing_bytes == 0 && s.row(0)[3] == 1.0 &&
                    s.row(0)[1] == 64.0 / 255.0 && set.image(1)[3] == 4;
    if (!ok) failed.push_back("valid fixture contents");
  } catch (const mem::Error&) {
    failed.push_back("valid fixture threw");
  }

  auto expect_code = [&](std::vector<std::uint8_t> bytes, mem::ErrorCode code, const char* name) {
    try {
      mem::parse_idx(bytes);
      failed.push_back(std::string(name) + " accepted");
    } catch (const mem::Error& e) {
      if (e.code() != code) failed.push_back(std::string(name) + " wrong code " + std::string(mem::to_string(e.code())));
    }
  };
  auto bad_magic = valid;
  bad_magic[2] = 0x08;
  bad_magic[3] = 0x01;
  expect_code(bad_magic, mem::ErrorCode::MagicMismatch, "bad magic");
  auto truncated = valid;
  truncated.pop_back();
  expect_code(truncated, mem::ErrorCode::Truncated, "truncated payload");
  expect_code(std::vector<std::uint8_t>(valid.begin(), valid.begin() + 10), mem::ErrorCode::Truncated, "short header");

  std::string detail = "valid 2x2x2 parsed exactly, bad magic -> MagicMismatch, truncated -> Truncated";
  if (!failed.empty()) {
    detail = "failed:";
    for (const auto& f : failed) detail += " [" + f + "]";
  }
  return {failed.empty(), detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* name;
    std::function<Outcome()> check;
    double time_limit_s;  // 0: none stated
  };
  const std::vector<Criterion> criteria{
      {"AC1", "closed-form single-atom oracle", ac1_closed_form, 1.0},
      {"AC2", "dual gradient vs finite differences", ac2_gradient, 10.0},
      {"AC3", "strong convexity and epsilon-distance bound", ac3_strong_convexity, 0.0},
      {"AC4", "minimizer norm and value below rho0", ac4_rho0, 0.0},
      {"AC5", "MGF bounds on the dual ball", ac5_mgf_bounds, 0.0},
      {"AC6", "primal error bound with grid D_rho", ac6_error_bound, 120.0},
      {"AC7", "two-cluster rate experiment", ac7_rates, 120.0},
      {"AC8", "recovery invariants", ac8_recovery, 0.0},
      {"AC9", "byte determinism across runs and thread counts", ac9_determinism, 0.0},
      {"AC10", "IDX byte fixtures", ac10_idx, 0.0},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0.0 && secs >= c.time_limit_s) {
      o.pass = false;
      o.detail += fmt("; exceeded time limit %.0f s", c.time_limit_s);
    }
    failed += !o.pass;
    std::printf("%-4s %s  %s: %s [%.2f s]\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
