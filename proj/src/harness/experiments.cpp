#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "csplit/analysis.hpp"
#include "csplit/error.hpp"
#include "csplit/harness.hpp"

namespace csplit::harness {

namespace fs = std::filesystem;

std::string_view reference_mode_name(ReferenceMode mode) {
  switch (mode) {
    case ReferenceMode::Affine:
      return "affine";
    case ReferenceMode::Strang:
      return "strang";
    case ReferenceMode::C3New:
      return "c3new";
  }
  return "?";
}

ReferenceMode parse_reference_mode(std::string_view name) {
  for (ReferenceMode m : {ReferenceMode::Affine, ReferenceMode::Strang, ReferenceMode::C3New}) {
    if (reference_mode_name(m) == name) return m;
  }
  throw ConfigError("unknown reference mode '" + std::string(name) +
                    "'; valid: affine, strang, c3new");
}

std::vector<double> ExperimentConfig::ladder() const {
  if (ladder_k1 < ladder_k0 || ladder_k0 < 0) {
    throw ConfigError("tau ladder needs 0 <= k0 <= k1");
  }
  std::vector<double> out;
  for (int k = ladder_k0; k <= ladder_k1; ++k) out.push_back(std::ldexp(tau0, -k));
  return out;
}

ReferenceMode ExperimentConfig::effective_ref_mode(const ProblemInfo& info) const {
  if (ref_mode) {
    if (*ref_mode == ReferenceMode::Affine && !info.independent_source) {
      throw ConfigError("the affine reference needs a solution-independent source");
    }
    return *ref_mode;
  }
  return info.independent_source ? ReferenceMode::Affine : ReferenceMode::Strang;
}

fs::path ExperimentConfig::effective_cache_dir() const {
  return cache_dir.empty() ? out_dir / "cache" : cache_dir;
}

std::pair<int, int> parse_ladder(std::string_view text) {
  auto to_int = [&](std::string_view s) {
    int v = 0;
    std::size_t used = 0;
    try {
      v = std::stoi(std::string(s), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) {
      throw ConfigError("malformed tau ladder '" + std::string(text) + "', expected k0..k1");
    }
    return v;
  };
  const auto pos = text.find("..");
  std::pair<int, int> out;
  if (pos == std::string_view::npos) {
    out.first = out.second = to_int(text);
  } else {
    out = {to_int(text.substr(0, pos)), to_int(text.substr(pos + 2))};
  }
  if (out.first < 0 || out.second < out.first) {
    throw ConfigError("tau ladder '" + std::string(text) + "' needs 0 <= k0 <= k1");
  }
  return out;
}

std::uint64_t fnv1a(const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string fmt(double v, int precision = 17) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

void logln(const ExperimentConfig& cfg, const std::string& line) {
  if (cfg.log != nullptr) *cfg.log << line << std::endl;
}

struct CacheKey {
  std::string problem;
  double dx;
  double T;
  std::string mode;
  double ref_tau;
  double tol;
  bool zero_source;

  std::string stem() const {
    std::ostringstream s;
    s << problem << (zero_source ? "-zero" : "") << "_dx" << fmt(dx, 6) << "_T" << fmt(T, 6)
      << '_' << mode;
    if (mode != "affine") s << "_tau" << fmt(ref_tau, 6);
    s << "_tol" << fmt(tol, 3);
    return s.str();
  }

  std::vector<std::pair<std::string, std::string>> fields() const {
    return {{"problem", problem},     {"zero_source", zero_source ? "1" : "0"},
            {"dx", fmt(dx)},          {"T", fmt(T)},
            {"mode", mode},           {"tau_ref", fmt(ref_tau)},
            {"expmv_tol", fmt(tol)}};
  }
};

std::optional<Field> load_cache(const fs::path& bin, const fs::path& meta, const CacheKey& key,
                                const std::shared_ptr<const Mesh>& mesh, std::string* why) {
  std::ifstream m(meta);
  if (!m) {
    *why = "";
    return std::nullopt;
  }
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(m, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (const auto& [k, v] : key.fields()) {
    if (kv[k] != v) {
      *why = "sidecar field " + k + " does not match";
      return std::nullopt;
    }
  }
  std::ifstream in(bin, std::ios::binary);
  if (!in) {
    *why = "binary file missing";
    return std::nullopt;
  }
  std::vector<cplx> values(mesh->size());
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(cplx)));
  if (!in || in.peek() != std::char_traits<char>::eof()) {
    *why = "binary file has the wrong length";
    return std::nullopt;
  }
  std::ostringstream sum;
  sum << std::hex << fnv1a(values.data(), values.size() * sizeof(cplx));
  if (kv["checksum"] != sum.str()) {
    *why = "checksum mismatch";
    return std::nullopt;
  }
  return Field(mesh, std::move(values));
}

void store_cache(const fs::path& bin, const fs::path& meta, const CacheKey& key, const Field& u,
                 std::size_t steps) {
  fs::create_directories(bin.parent_path());
  {
    std::ofstream out(bin, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(u.values().data()),
              static_cast<std::streamsize>(u.size() * sizeof(cplx)));
  }
  std::ofstream m(meta, std::ios::trunc);
  for (const auto& [k, v] : key.fields()) m << k << '=' << v << '\n';
  m << "n=" << u.size() << '\n';
  m << "steps=" << steps << '\n';
  m << "checksum=" << std::hex << fnv1a(u.values().data(), u.size() * sizeof(cplx)) << '\n';
}

}  // namespace

Field reference_solution(const ExperimentConfig& cfg, const Problem& problem,
                         const SplittingContext& ctx, ReferenceInfo* info) {
  const ReferenceMode mode = cfg.effective_ref_mode(problem.info);
  const CacheKey key{problem.info.id,       problem.mesh->dx(), cfg.T,
                     std::string(reference_mode_name(mode)), cfg.ref_tau, cfg.expmv.tol,
                     cfg.zero_source};
  const fs::path dir = cfg.effective_cache_dir();
  const fs::path bin = dir / (key.stem() + ".bin");
  const fs::path meta = dir / (key.stem() + ".txt");
  ReferenceInfo local;
  local.mode = mode;
  local.file = bin;

  std::string why;
  if (auto cached = load_cache(bin, meta, key, problem.mesh, &why)) {
    local.from_cache = true;
    if (info != nullptr) *info = local;
    return std::move(*cached);
  }
  if (!why.empty()) {
    logln(cfg, "warning: reference cache " + bin.string() + " rejected (" + why +
                   "), recomputing");
  }

  std::optional<Field> u;
  if (mode == ReferenceMode::Affine) {
    const auto* ind = problem.source.as_independent();
    std::vector<cplx> g(problem.op->lift().begin(), problem.op->lift().end());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += ind->samples[k];
    u = expmv_affine(cfg.T, problem.op->matrix(), g, problem.u0, cfg.expmv);
  } else {
    const SchemeId id = mode == ReferenceMode::Strang ? SchemeId::StrangNaiv : SchemeId::C3New;
    logln(cfg, "computing " + std::string(scheme_name(id)) + " reference with tau = " +
                   fmt(cfg.ref_tau, 6) + " (" +
                   std::to_string(step_count(cfg.ref_tau, cfg.T)) + " steps)");
    IntegrationResult r = integrate(id, problem.u0, cfg.ref_tau, cfg.T, ctx);
    local.steps = r.steps;
    u = std::move(r.u);
  }
  try {
    store_cache(bin, meta, key, *u, local.steps);
  } catch (const std::exception& e) {
    logln(cfg, std::string("warning: could not write reference cache: ") + e.what());
  }
  if (info != nullptr) *info = local;
  return std::move(*u);
}

namespace {

// Runs fn(i) for i in [0, count) on `jobs` threads.
template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  return fmt(v);
}

}  // namespace

ConvergenceResult run_convergence(const ExperimentConfig& cfg, bool write) {
  cfg.expmv.validate();
  const Problem problem =
      build_problem(cfg.problem, ProblemOptions{cfg.dx, cfg.zero_source});
  const SplittingContext ctx = make_context(problem, ContextOptions{cfg.expmv, false});
  ConvergenceResult result;
  const Field ref = reference_solution(cfg, problem, ctx, &result.reference);
  result.reference_norm = l2_norm(ref);

  const std::vector<double> taus = cfg.ladder();
  struct Cell {
    SchemeId id;
    std::size_t k;
  };
  std::vector<Cell> cells;
  for (SchemeId id : cfg.methods) {
    for (std::size_t k = 0; k < taus.size(); ++k) cells.push_back({id, k});
  }
  std::vector<ConvergenceRow> rows(cells.size());
  std::mutex log_mutex;
  parallel_for(cells.size(), cfg.jobs, [&](std::size_t i) {
    const Cell& c = cells[i];
    ConvergenceRow& row = rows[i];
    row.problem = problem.info.id;
    row.method = c.id;
    row.tau = taus[c.k];
    row.order_pairwise = std::nan("");
    const auto t0 = std::chrono::steady_clock::now();
    try {
      IntegrationResult r = integrate(c.id, problem.u0, row.tau, cfg.T, ctx);
      row.n_steps = r.steps;
      row.stats = r.stats;
      row.error_l2 = l2_norm(r.u - ref);
    } catch (const std::exception& e) {
      row.failure = e.what();
      row.error_l2 = std::nan("");
    }
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::lock_guard lock(log_mutex);
    logln(cfg, std::string(scheme_name(c.id)) + " tau=" + fmt(row.tau, 6) + " error=" +
                   fmt(row.error_l2, 6) + (row.failure.empty() ? "" : " FAILED: " + row.failure));
  });

  // Round-off floor: the flows are exact only to the Krylov tolerance. A stepped
  // reference adds its own error, estimated against a run with twice its step.
  result.floor = cfg.expmv.tol * result.reference_norm;
  if (result.reference.mode != ReferenceMode::Affine) {
    ExperimentConfig coarse = cfg;
    coarse.ref_tau = 2.0 * cfg.ref_tau;
    try {
      const Field ref2 = reference_solution(coarse, problem, ctx);
      result.reference.error_estimate = l2_norm(ref - ref2);
      result.floor = std::max(result.floor, result.reference.error_estimate);
    } catch (const ConfigError& e) {
      logln(cfg, std::string("warning: no reference error estimate: ") + e.what());
    }
  }
  for (SchemeId id : cfg.methods) {
    std::vector<double> t, e;
    ConvergenceRow* prev = nullptr;
    for (auto& row : rows) {
      if (row.method != id) continue;
      if (prev != nullptr && prev->error_l2 > 0.0 && row.error_l2 > 0.0) {
        row.order_pairwise = std::log(prev->error_l2 / row.error_l2) / std::log(prev->tau / row.tau);
      }
      prev = &row;
      if (row.failure.empty() && row.error_l2 > 0.0) {
        t.push_back(row.tau);
        e.push_back(row.error_l2);
      }
    }
    OrderFit fit{id};
    fit.floor = result.floor;
    fit.slope_all = analysis::filtered_slope(t, e, 0.0);
    fit.slope_filtered = analysis::filtered_slope(t, e, result.floor, &fit.points_used);
    result.fits.push_back(fit);
  }
  result.rows = std::move(rows);

  if (write) {
    fs::create_directories(cfg.out_dir);
    result.csv = cfg.out_dir / (problem.info.id + "_convergence.csv");
    std::ofstream out(result.csv, std::ios::trunc);
    out << kConvergenceHeader << '\n';
    for (const auto& row : result.rows) {
      out << row.problem << ',' << scheme_name(row.method) << ',' << fmt(row.tau) << ','
          << csv_number(row.error_l2) << ',' << csv_number(row.order_pairwise) << ','
          << row.n_steps << ',' << row.stats.n_diffusion_flows << ','
          << row.stats.n_source_flows << ',' << row.stats.n_corrector_flows << ','
          << (cfg.deterministic ? std::string("0") : fmt(row.wall_time_s, 6)) << '\n';
    }
    result.orders_csv = cfg.out_dir / (problem.info.id + "_orders.csv");
    std::ofstream orders(result.orders_csv, std::ios::trunc);
    orders << "problem,method,slope_all,slope_filtered,points_used,floor\n";
    for (const auto& fit : result.fits) {
      orders << problem.info.id << ',' << scheme_name(fit.method) << ','
             << csv_number(fit.slope_all) << ',' << csv_number(fit.slope_filtered) << ','
             << fit.points_used << ',' << fmt(fit.floor) << '\n';
    }
  }
  return result;
}

ErrorField run_errorfield(const ExperimentConfig& cfg, SchemeId method, double tau, bool write) {
  cfg.expmv.validate();
  const Problem problem =
      build_problem(cfg.problem, ProblemOptions{cfg.dx, cfg.zero_source});
  const SplittingContext ctx = make_context(problem, ContextOptions{cfg.expmv, false});
  const Field ref = reference_solution(cfg, problem, ctx);
  const IntegrationResult r = integrate(method, problem.u0, tau, cfg.T, ctx);

  const Mesh& mesh = *problem.mesh;
  ErrorField field;
  field.dim = mesh.dim();
  field.closed_per_axis = mesh.closed_per_axis();
  field.mesh = problem.mesh;
  field.interior_abs_error.resize(mesh.size());
  for (std::size_t k = 0; k < mesh.size(); ++k) {
    field.interior_abs_error[k] = std::abs(r.u[k] - ref[k]);
  }
  const std::size_t m = mesh.closed_per_axis();
  const std::size_t rows = mesh.dim() == 1 ? 1 : m;
  for (std::size_t j = 0; j < rows; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t jj = mesh.dim() == 1 ? 1 : j;
      field.x.push_back(mesh.coord(i));
      field.y.push_back(mesh.dim() == 1 ? 0.0 : mesh.coord(j));
      field.abs_error.push_back(mesh.is_interior(i, jj)
                                    ? field.interior_abs_error[mesh.interior_index(i, jj)]
                                    : 0.0);
    }
  }

  if (write) {
    fs::create_directories(cfg.out_dir);
    std::ostringstream name;
    name << problem.info.id << '_' << scheme_name(method) << "_tau" << fmt(tau, 6)
         << "_errorfield.csv";
    field.csv = cfg.out_dir / name.str();
    std::ofstream out(field.csv, std::ios::trunc);
    out << (field.dim == 1 ? "x,abs_error\n" : "x,y,abs_error\n");
    for (std::size_t k = 0; k < field.x.size(); ++k) {
      out << fmt(field.x[k]) << ',';
      if (field.dim == 2) out << fmt(field.y[k]) << ',';
      out << fmt(field.abs_error[k]) << '\n';
    }
  }
  return field;
}

}  // namespace csplit::harness
