// memsolve: denoise images with an empirical MEM prior, run the sample-size
// rate experiment, and check the explicit constants on a problem instance.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mem/mem.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using mem::Vector;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

// Flag combinations CLI11 cannot express; reported with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string data;
  std::string out;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string blur;
  std::string matrix;
  std::string precision = "float64";
  std::size_t memory = 10;
  double grad_tol = 1e-9;
  std::size_t max_iter = 500;
};

struct DenoiseOptions {
  std::string labels;
  std::string ground_truth;
  std::string noise;
  std::optional<double> level;
  bool raw_sigma = false;
  std::optional<std::size_t> n;
  double threshold = 0.01;
  double mask_gamma = 0.2;
};

struct RatesOptions {
  std::string b;
  bool synthesize = false;
  std::size_t gt_index = 0;
  std::string noise = "gaussian";
  std::optional<double> level;
  bool raw_sigma = false;
  std::string grid;
  std::size_t trials = 15;
  bool timing = false;
};

struct DiagnoseOptions {
  std::string b;
  std::optional<double> rho;
  std::size_t ball_samples = 1000;
};

std::string hex32(std::uint32_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(8);
  os.fill('0');
  os << v;
  return os.str();
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct LoadedData {
  mem::ImageSet images;
  mem::SampleMatrix samples;
  json record;
};

LoadedData load_data(const std::string& path) {
  const mem::io::Bytes raw = mem::io::read_file(path);
  mem::ImageSet set = mem::parse_idx(mem::io::maybe_gunzip(raw));
  mem::SampleMatrix samples = mem::normalize(set);
  json rec = {{"path", path},
              {"crc32", hex32(mem::io::crc32_of(raw))},
              {"bytes", raw.size()},
              {"images", set.count},
              {"rows", set.rows},
              {"cols", set.cols}};
  if (set.trailing_bytes > 0) {
    std::cerr << "warning: " << set.trailing_bytes << " trailing bytes after IDX payload ignored\n";
    rec["trailing_bytes"] = set.trailing_bytes;
  }
  return {std::move(set), std::move(samples), std::move(rec)};
}

json file_record(const std::string& path) {
  const mem::io::Bytes raw = mem::io::read_file(path);
  return {{"path", path}, {"crc32", hex32(mem::io::crc32_of(raw))}, {"bytes", raw.size()}};
}

std::vector<double> parse_number_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string("malformed ") + what + ": '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError(std::string("empty ") + what);
  return out;
}

mem::LinearOperator build_operator(const CommonOptions& o, std::size_t rows, std::size_t cols) {
  if (!o.blur.empty() && !o.matrix.empty()) throw UsageError("--blur and --matrix are mutually exclusive");
  if (!o.blur.empty()) return mem::LinearOperator::separable_blur(parse_number_list(o.blur, "blur kernel"), rows, cols);
  if (!o.matrix.empty()) {
    auto op = mem::load_dense_operator_csv(o.matrix);
    if (op.cols() != rows * cols)
      mem::detail::fail(mem::ErrorCode::DimensionMismatch, "operator has " + std::to_string(op.cols()) +
                                                               " columns, images have " + std::to_string(rows * cols) + " pixels");
    return op;
  }
  return mem::LinearOperator::identity(rows * cols);
}

json operator_record(const CommonOptions& o, const mem::LinearOperator& op) {
  json rec = {{"kind", op.describe()}, {"m", op.rows()}, {"d", op.cols()}};
  if (!o.matrix.empty()) rec["matrix"] = file_record(o.matrix);
  if (!o.blur.empty()) rec["kernel"] = std::vector<double>(op.blur_kernel().begin(), op.blur_kernel().end());
  return rec;
}

mem::SolverConfig solver_config(const CommonOptions& o) {
  mem::SolverConfig cfg;
  cfg.memory = o.memory;
  cfg.grad_tol = o.grad_tol;
  cfg.max_iter = o.max_iter;
  return cfg;
}

json solver_record(const mem::SolverConfig& cfg) {
  return {{"algorithm", "lbfgs-strong-wolfe"},
          {"memory", cfg.memory},
          {"grad_tol", cfg.grad_tol},
          {"max_iter", cfg.max_iter},
          {"wolfe_c1", cfg.wolfe_c1},
          {"wolfe_c2", cfg.wolfe_c2},
          {"start", "zero"}};
}

mem::EmpiricalPrior::Precision precision_of(const CommonOptions& o) {
  return o.precision == "float32" ? mem::EmpiricalPrior::Precision::Float32 : mem::EmpiricalPrior::Precision::Float64;
}

// An observation vector from a PGM (m = rows * cols of the file) or a CSV
// holding m numbers in one row or one column.
Vector load_observation(const std::string& path, std::size_t m) {
  Vector b;
  const mem::io::Bytes raw = mem::io::read_file(path);
  if (raw.size() >= 2 && raw[0] == 'P') {
    const auto img = mem::io::decode_pgm(raw);
    b = img.pixels;
  } else {
    std::size_t rows = 0, cols = 0;
    b = mem::io::parse_csv_matrix(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()), rows, cols);
    if (rows != 1 && cols != 1) mem::detail::fail(mem::ErrorCode::Parse, "observation CSV must be a single row or column");
  }
  if (b.size() != m)
    mem::detail::fail(mem::ErrorCode::DimensionMismatch,
                      "observation has " + std::to_string(b.size()) + " entries, operator outputs " + std::to_string(m));
  return b;
}

std::string vector_csv(std::span<const double> v) {
  std::string s;
  for (double x : v) s += mem::io::format_double(x) + "\n";
  return s;
}

json manifest_base(const std::string& command, const std::vector<std::string>& argv, const CommonOptions& o) {
  return {{"tool", "memsolve"},
          {"command", command},
          {"argv", argv},
          {"started_at", utc_now()},
          {"rng", std::string(mem::Rng::algorithm_id)},
          {"threads", mem::parallel::max_threads()},
          {"precision", o.precision}};
}

void write_manifest(const fs::path& dir, const json& manifest) {
  mem::io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

double level_or_default(const std::optional<double>& level, mem::NoiseSpec::Kind kind) {
  if (level) return *level;
  return kind == mem::NoiseSpec::Kind::Gaussian ? 0.10 : 0.2;
}

mem::NoiseSpec::Kind noise_kind(const std::string& s) {
  return s == "gaussian" ? mem::NoiseSpec::Kind::Gaussian : mem::NoiseSpec::Kind::SaltPepper;
}

std::optional<std::size_t> as_index(const std::string& s) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) return std::nullopt;
  return static_cast<std::size_t>(std::stoull(s));
}

// ---------------------------------------------------------------------------

int cmd_denoise(const CommonOptions& o, const DenoiseOptions& dn, const std::vector<std::string>& argv) {
  LoadedData data = load_data(o.data);
  const std::size_t rows = data.images.rows, cols = data.images.cols, d = rows * cols;
  json inputs = {{"data", data.record}};
  if (!dn.labels.empty()) {
    const auto labels = mem::load_idx_labels_file(dn.labels);
    if (labels.size() != data.images.count) std::cerr << "warning: label count differs from image count\n";
    inputs["labels"] = file_record(dn.labels);
  }

  // Ground truth: a dataset index (held out of the prior) or an external PGM.
  Vector x_gt;
  std::optional<std::size_t> held_out = as_index(dn.ground_truth);
  if (held_out) {
    if (*held_out >= data.samples.rows())
      throw UsageError("--ground-truth index " + dn.ground_truth + " out of range");
    const auto row = data.samples.row(*held_out);
    x_gt.assign(row.begin(), row.end());
    inputs["ground_truth"] = {{"index", *held_out}};
  } else {
    const auto img = mem::io::read_pgm(dn.ground_truth);
    if (img.rows != rows || img.cols != cols)
      mem::detail::fail(mem::ErrorCode::DimensionMismatch, "ground-truth image geometry differs from dataset");
    x_gt = img.pixels;
    inputs["ground_truth"] = file_record(dn.ground_truth);
  }

  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < data.samples.rows(); ++i)
    if (!held_out || i != *held_out) pool.push_back(i);
  const std::size_t n = dn.n.value_or(pool.size());
  const std::uint64_t subsample_seed = mem::derive_seed(o.seed, n, 0);
  const std::uint64_t noise_seed = mem::derive_seed(o.seed, 0, 1);
  std::vector<std::size_t> ids;
  for (std::size_t k : mem::subsample_indices(pool.size(), n, subsample_seed)) ids.push_back(pool[k]);
  std::sort(ids.begin(), ids.end());
  auto prior = std::make_shared<const mem::EmpiricalPrior>(mem::select_rows(data.samples, ids), precision_of(o));

  const mem::LinearOperator op = build_operator(o, rows, cols);
  const mem::NoiseSpec::Kind kind = noise_kind(dn.noise);
  const mem::NoiseSpec spec{kind, level_or_default(dn.level, kind), noise_seed, dn.raw_sigma};
  const Vector b = mem::apply_noise(op.apply(x_gt), spec);
  const bool image_space = op.rows() == d;
  const mem::SolverConfig cfg = solver_config(o);

  const fs::path out(o.out);
  fs::create_directories(out);
  const std::vector<std::string> outputs{image_space ? "b.pgm" : "b.csv", "x_bar.pgm",         "x_thresholded.pgm",
                                         "x_masked.pgm",                  "nearest_neighbor.pgm", "weights.csv"};
  json manifest = manifest_base("denoise", argv, o);
  manifest["parameters"] = {{"alpha", o.alpha},
                            {"n", n},
                            {"noise", mem::to_string(kind)},
                            {"level", spec.level},
                            {"raw_sigma", spec.raw_sigma},
                            {"threshold", dn.threshold},
                            {"mask_gamma", dn.mask_gamma}};
  manifest["seeds"] = {{"base", o.seed}, {"subsample", subsample_seed}, {"noise", noise_seed}};
  manifest["inputs"] = inputs;
  manifest["operator"] = operator_record(o, op);
  manifest["solver"] = solver_record(cfg);
  manifest["outputs"] = outputs;
  write_manifest(out, manifest);

  const mem::DualProblem problem(prior, op, b, o.alpha);
  const mem::DualSolveResult res = mem::solve_dual(problem, cfg);
  const mem::RecoveredSolution sol = mem::recover_primal(*prior, op, res.z_bar);
  const mem::RecoveredSolution thr = mem::threshold_measure(*prior, sol, dn.threshold);
  const Vector masked = mem::pixel_mask(thr.x_bar, dn.mask_gamma);

  // Closest dataset image to the observation, compared in observation space.
  std::size_t nearest = pool.front();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i : pool) {
    const Vector cx = op.apply(data.samples.row(i));
    double dist = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) dist += (cx[j] - b[j]) * (cx[j] - b[j]);
    if (dist < best) {
      best = dist;
      nearest = i;
    }
  }

  if (image_space)
    mem::io::write_pgm(out / "b.pgm", b, rows, cols);
  else
    mem::io::write_text(out / "b.csv", vector_csv(b));
  mem::io::write_pgm(out / "x_bar.pgm", sol.x_bar, rows, cols);
  mem::io::write_pgm(out / "x_thresholded.pgm", thr.x_bar, rows, cols);
  mem::io::write_pgm(out / "x_masked.pgm", masked, rows, cols);
  mem::io::write_pgm(out / "nearest_neighbor.pgm", data.samples.row(nearest), rows, cols);
  mem::io::write_text(out / "weights.csv", mem::weights_csv(sol.weights, ids));

  std::cout << "status          " << mem::to_string(res.status) << " after " << res.iterations << " iterations\n"
            << "grad_norm       " << res.grad_norm << "\n"
            << "epsilon_cert    " << res.epsilon_cert << "\n"
            << "support         " << sol.support_size << " of " << prior->size() << "\n"
            << "support(tau)    " << thr.support_size << "\n"
            << "kl_to_prior     " << mem::kl_to_prior(sol) << "\n"
            << "rel_error(x_gt) " << mem::relative_error(sol.x_bar, x_gt) << "\n"
            << "nearest index   " << nearest << "\n";
  if (!res.converged) {
    std::cerr << "error: dual solve did not converge (" << mem::to_string(res.status) << ")\n";
    return kExitDomain;
  }
  return kExitOk;
}

int cmd_rates(const CommonOptions& o, const RatesOptions& ro, const std::vector<std::string>& argv) {
  if (ro.b.empty() == !ro.synthesize) throw UsageError("exactly one of --b or --synthesize is required");
  LoadedData data = load_data(o.data);
  const std::size_t rows = data.images.rows, cols = data.images.cols;
  const mem::LinearOperator op = build_operator(o, rows, cols);
  json inputs = {{"data", data.record}};

  Vector b;
  std::uint64_t noise_seed = 0;
  json synth;
  if (ro.synthesize) {
    if (ro.gt_index >= data.samples.rows()) throw UsageError("--ground-truth index out of range");
    const mem::NoiseSpec::Kind kind = noise_kind(ro.noise);
    noise_seed = mem::derive_seed(o.seed, 0, 1);
    const mem::NoiseSpec spec{kind, level_or_default(ro.level, kind), noise_seed, ro.raw_sigma};
    b = mem::apply_noise(op.apply(data.samples.row(ro.gt_index)), spec);
    synth = {{"ground_truth_index", ro.gt_index}, {"noise", mem::to_string(kind)}, {"level", spec.level}, {"raw_sigma", spec.raw_sigma}};
    inputs["b"] = {{"synthesized", synth}};
  } else {
    b = load_observation(ro.b, op.rows());
    inputs["b"] = file_record(ro.b);
  }

  const std::size_t total = data.samples.rows();
  std::size_t lo = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(total) / 6.0)));
  std::size_t hi = total, points = 20;
  if (!ro.grid.empty()) {
    const auto g = parse_number_list(ro.grid, "--grid");
    if (g.size() != 3 || g[0] < 1 || g[1] < g[0] || g[2] < 1 || g[0] != std::floor(g[0]) || g[1] != std::floor(g[1]) ||
        g[2] != std::floor(g[2]))
      throw UsageError("--grid expects min,max,points with 1 <= min <= max and points >= 1");
    lo = static_cast<std::size_t>(g[0]);
    hi = static_cast<std::size_t>(g[1]);
    points = static_cast<std::size_t>(g[2]);
  }
  const std::vector<std::size_t> grid = mem::linear_grid(lo, hi, points);
  if (grid.back() > total) mem::detail::fail(mem::ErrorCode::SampleTooLarge, "grid maximum exceeds dataset size");

  mem::RateExperimentOptions opts;
  opts.solver = solver_config(o);
  opts.precision = precision_of(o);

  const fs::path out(o.out);
  fs::create_directories(out);
  json manifest = manifest_base("rates", argv, o);
  manifest["parameters"] = {{"alpha", o.alpha}, {"grid", grid}, {"trials", ro.trials}, {"timing", ro.timing}};
  manifest["seeds"] = {{"base", o.seed},
                       {"noise", noise_seed},
                       {"cell_rule", "splitmix64(seed ^ splitmix64((n << 32) ^ trial ^ (n >> 32)))"}};
  manifest["inputs"] = inputs;
  manifest["operator"] = operator_record(o, op);
  manifest["solver"] = solver_record(opts.solver);
  manifest["outputs"] = {"rates.csv"};
  write_manifest(out, manifest);

  const mem::RateTable table = mem::rate_experiment(data.samples, b, op, o.alpha, grid, ro.trials, o.seed, opts);
  mem::io::write_text(out / "rates.csv", mem::rate_table_csv(table, ro.timing));

  std::size_t failures = 0;
  for (const auto& r : table.records) failures += !r.converged;
  std::cout << "reference: n = " << table.reference_n << ", epsilon_cert = " << table.reference_epsilon << "\n";
  std::cout << "       n   mean_rel_error\n";
  for (const auto& [n, mean] : table.mean_by_n()) {
    std::printf("%8zu   %.6e\n", n, mean);
  }
  if (failures > 0) {
    std::cerr << "error: " << failures << " of " << table.records.size() << " solves did not converge\n";
    return kExitDomain;
  }
  return kExitOk;
}

int cmd_diagnose(const CommonOptions& o, const DiagnoseOptions& dg, const std::vector<std::string>& argv) {
  LoadedData data = load_data(o.data);
  const mem::LinearOperator op = build_operator(o, data.images.rows, data.images.cols);
  const Vector b = load_observation(dg.b, op.rows());
  auto prior = std::make_shared<const mem::EmpiricalPrior>(data.samples, precision_of(o));
  const mem::SolverConfig cfg = solver_config(o);

  const fs::path out(o.out);
  fs::create_directories(out);
  json manifest = manifest_base("diagnose", argv, o);
  manifest["parameters"] = {{"alpha", o.alpha}, {"ball_samples", dg.ball_samples}};
  if (dg.rho) manifest["parameters"]["rho"] = *dg.rho;
  manifest["seeds"] = {{"base", o.seed}};
  manifest["inputs"] = {{"data", data.record}, {"b", file_record(dg.b)}};
  manifest["operator"] = operator_record(o, op);
  manifest["solver"] = solver_record(cfg);
  manifest["outputs"] = {"constants.json", "bounds_report.json"};
  write_manifest(out, manifest);

  const mem::DualProblem problem(prior, op, b, o.alpha);
  const mem::DualSolveResult res = mem::solve_dual(problem, cfg);
  const mem::ProblemConstants c = mem::compute_constants(problem, res.epsilon_cert);
  std::optional<double> smin;
  try {
    smin = mem::sigma_min(op, 1e-12);
  } catch (const mem::Error&) {
  }
  const double t = c.ball_radius_used * c.radius;
  // log of |X| e^{4t} + |X|^2 e^{2t}, finite even when K_hat overflows.
  const double log_k_hat = c.radius > 0.0 ? 4.0 * t + std::log(c.radius + c.radius * c.radius * std::exp(-2.0 * t))
                                          : -std::numeric_limits<double>::infinity();
  auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };

  const double z_norm = mem::vector_norm(res.z_bar);
  json constants = {{"alpha", c.alpha},
                    {"norm_b", c.norm_b},
                    {"op_norm", c.op_norm},
                    {"sigma_min", smin ? json(*smin) : json(nullptr)},
                    {"radius", c.radius},
                    {"d", c.d},
                    {"epsilon", c.epsilon},
                    {"rho_hat", c.rho_hat},
                    {"rho0", c.rho0},
                    {"ball_radius_used", c.ball_radius_used},
                    {"K_hat", finite_or_null(c.K_hat)},
                    {"K", finite_or_null(c.K)},
                    {"log_K_hat", finite_or_null(log_k_hat)},
                    {"solve",
                     {{"status", mem::to_string(res.status)},
                      {"iterations", res.iterations},
                      {"grad_norm", res.grad_norm},
                      {"objective", res.objective},
                      {"z_norm", z_norm},
                      {"z_norm_le_rho_hat", z_norm <= c.rho_hat},
                      {"z_norm_le_rho0", z_norm <= c.rho0},
                      {"abs_objective_le_rho0", std::abs(res.objective) <= c.rho0}}}};

  const double rho = dg.rho.value_or(2.0 * c.rho0);
  const mem::MgfBoundsReport rep = mem::mgf_bounds_check(*prior, op, rho, dg.ball_samples, o.seed);
  json report = {{"rho", rep.rho},
                 {"op_norm", rep.op_norm},
                 {"radius", rep.radius},
                 {"log_lower", rep.log_lower},
                 {"log_upper", rep.log_upper},
                 {"trials", rep.trials},
                 {"violations", rep.violations},
                 {"min_margin_lower", rep.min_margin_lower},
                 {"min_margin_upper", rep.min_margin_upper},
                 {"mean_log_mgf", rep.mean_log_mgf},
                 {"passed", rep.violations == 0}};

  mem::io::write_text(out / "constants.json", constants.dump(2) + "\n");
  mem::io::write_text(out / "bounds_report.json", report.dump(2) + "\n");

  std::cout << "rho_hat " << c.rho_hat << "  rho0 " << c.rho0 << "  log K_hat " << log_k_hat << "\n"
            << "mgf bounds: " << rep.violations << " violations in " << rep.trials << " probes (rho = " << rho << ")\n";
  if (rep.violations > 0) {
    std::cerr << "error: " << mem::to_string(mem::ErrorCode::BoundViolated) << "\n";
    return kExitDomain;
  }
  if (!res.converged) {
    std::cerr << "error: dual solve did not converge (" << mem::to_string(res.status) << ")\n";
    return kExitDomain;
  }
  return kExitOk;
}

int run(std::vector<std::string> args);

int cmd_replay(const std::string& manifest_path, const std::string& out_override) {
  const mem::io::Bytes raw = mem::io::read_file(manifest_path);
  json manifest;
  try {
    manifest = json::parse(raw.begin(), raw.end());
  } catch (const json::exception& e) {
    mem::detail::fail(mem::ErrorCode::Parse, std::string("manifest: ") + e.what());
  }
  if (!manifest.contains("argv") || !manifest["argv"].is_array())
    mem::detail::fail(mem::ErrorCode::Parse, "manifest has no argv array");
  std::vector<std::string> args = manifest["argv"].get<std::vector<std::string>>();
  if (!args.empty() && args.front() == "replay") throw UsageError("refusing to replay a replay manifest");
  if (!out_override.empty()) {
    bool replaced = false;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
      if (args[i] == "--out") {
        args[i + 1] = out_override;
        replaced = true;
      }
    if (!replaced) args.insert(args.end(), {"--out", out_override});
  }
  return run(std::move(args));
}

void add_common(CLI::App* cmd, CommonOptions& o, bool needs_out = true) {
  cmd->add_option("--data", o.data, "IDX image file (optionally gzipped)")->required()->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out", o.out, "output directory");
  if (needs_out) out->required();
  cmd->add_option("--alpha", o.alpha, "fidelity parameter alpha > 0")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "base random seed");
  cmd->add_option("--threads", o.threads, "worker thread cap (default: MEM_THREADS, else all cores)")
      ->check(CLI::Range(1u, 4096u));
  cmd->add_option("--blur", o.blur, "separable blur kernel, odd length, e.g. 0.25,0.5,0.25");
  cmd->add_option("--matrix", o.matrix, "dense forward operator as CSV (m rows, d columns)")->check(CLI::ExistingFile);
  cmd->add_option("--precision", o.precision, "prior storage precision")
      ->check(CLI::IsMember({"float64", "float32"}));
  cmd->add_option("--memory", o.memory, "L-BFGS history pairs")->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
  cmd->add_option("--grad-tol", o.grad_tol, "stop when the dual gradient norm is below this")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", o.max_iter, "L-BFGS iteration limit");
}

int run(std::vector<std::string> args) {
  const std::vector<std::string> argv = args;
  CLI::App app{"Maximum entropy on the mean with empirical priors"};
  app.require_subcommand(1);

  CommonOptions common;
  DenoiseOptions dn;
  RatesOptions ro;
  DiagnoseOptions dg;
  std::string manifest_path, replay_out;

  auto* denoise = app.add_subcommand("denoise", "recover one image from a noisy observation");
  add_common(denoise, common);
  denoise->add_option("--labels", dn.labels, "IDX label file (metadata only)")->check(CLI::ExistingFile);
  denoise->add_option("--ground-truth", dn.ground_truth, "dataset index or PGM path")->required();
  denoise->add_option("--noise", dn.noise, "gaussian or salt-pepper")
      ->required()
      ->check(CLI::IsMember({"gaussian", "salt-pepper"}));
  denoise->add_option("--level", dn.level, "sigma_rel (gaussian, default 0.10) or p (salt-pepper, default 0.2)")
      ->check(CLI::NonNegativeNumber);
  denoise->add_flag("--raw-sigma", dn.raw_sigma, "gaussian per-pixel sigma = level * ||x|| instead of level * ||x|| / sqrt(d)");
  denoise->add_option("--n", dn.n, "prior sample size (default: all but the ground truth)")
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  denoise->add_option("--threshold", dn.threshold, "drop measure weights below this")->check(CLI::Range(0.0, 0.999999));
  denoise->add_option("--mask-gamma", dn.mask_gamma, "pixel masking level")->check(CLI::Range(0.0, 0.499999));

  auto* rates = app.add_subcommand("rates", "relative error against sample size");
  add_common(rates, common);
  rates->add_option("--b", ro.b, "observation (PGM or CSV)")->check(CLI::ExistingFile);
  rates->add_flag("--synthesize", ro.synthesize, "build b from a dataset image plus noise");
  rates->add_option("--ground-truth", ro.gt_index, "dataset index used by --synthesize");
  rates->add_option("--noise", ro.noise, "noise for --synthesize")->check(CLI::IsMember({"gaussian", "salt-pepper"}));
  rates->add_option("--level", ro.level, "noise level for --synthesize")->check(CLI::NonNegativeNumber);
  rates->add_flag("--raw-sigma", ro.raw_sigma, "see denoise --raw-sigma");
  rates->add_option("--grid", ro.grid, "min,max,points (default N/6,N,20)");
  rates->add_option("--trials", ro.trials, "subsamples per grid point")
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  rates->add_flag("--timing", ro.timing, "record wall times (makes rates.csv run-dependent)");

  auto* diagnose = app.add_subcommand("diagnose", "explicit constants and MGF bound check");
  add_common(diagnose, common);
  diagnose->add_option("--b", dg.b, "observation (PGM or CSV)")->required()->check(CLI::ExistingFile);
  diagnose->add_option("--rho", dg.rho, "dual ball radius (default 2 rho0)")->check(CLI::PositiveNumber);
  diagnose->add_option("--ball-samples", dg.ball_samples, "probes in the ball")
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));

  auto* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay->add_option("manifest", manifest_path, "manifest.json")->required()->check(CLI::ExistingFile);
  replay->add_option("--out", replay_out, "output directory (default: the recorded one)");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  mem::parallel::set_max_threads(common.threads > 0 ? common.threads
                                                    : mem::parallel::threads_from_env(std::max(1u, std::thread::hardware_concurrency())));
  try {
    if (*denoise) return cmd_denoise(common, dn, argv);
    if (*rates) return cmd_rates(common, ro, argv);
    if (*diagnose) return cmd_diagnose(common, dg, argv);
    return cmd_replay(manifest_path, replay_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const mem::Error& e) {
    std::cerr << "error [" << mem::to_string(e.code()) << "]: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(std::vector<std::string>(argv + 1, argv + argc)); }
