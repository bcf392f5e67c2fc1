#pragma once

// Data ingestion, parameter sweeps and CSV serialization of plane tables and
// traces.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "ibpf/diagnostics.hpp"
#include "ibpf/drs.hpp"
#include "ibpf/error.hpp"
#include "ibpf/formulations.hpp"
#include "ibpf/plane.hpp"
#include "ibpf/prob.hpp"
#include "ibpf/rng.hpp"

namespace ibpf {

namespace detail {

inline std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Splits one CSV line; double quotes group fields and "" escapes a quote.
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline std::optional<double> try_parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* b = s.data();
  const char* e = b + s.size();
  if (*b == '+') ++b;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) return std::nullopt;
  return v;
}

inline double parse_double(const std::string& s, const std::string& where) {
  const auto v = try_parse_double(s);
  if (!v) throw ParseError(where + ": not a number: '" + s + "'");
  return *v;
}

inline std::vector<std::vector<std::string>> read_csv_rows(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}

}  // namespace detail

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Joint table from a CSV of |X| rows by |Y| numeric columns. A first row
/// with any non-numeric field is taken as a header.
inline JointPMF read_joint_csv(std::istream& in, const std::string& name = "joint csv") {
  auto rows = detail::read_csv_rows(in);
  if (!rows.empty()) {
    const bool header = std::any_of(rows[0].begin(), rows[0].end(),
                                    [](const std::string& f) { return !detail::try_parse_double(f); });
    if (header) rows.erase(rows.begin());
  }
  if (rows.empty()) throw ParseError(name + ": no data rows");
  const std::size_t ny = rows[0].size();
  std::vector<double> flat;
  flat.reserve(rows.size() * ny);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != ny)
      throw ParseError(name + ": row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                       " fields, expected " + std::to_string(ny));
    for (std::size_t c = 0; c < ny; ++c)
      flat.push_back(detail::parse_double(rows[r][c], name + " row " + std::to_string(r) + " col " + std::to_string(c)));
  }
  return build_joint(rows.size(), ny, flat);
}

inline JointPMF ingest_joint_csv(const std::string& path) {
  auto in = detail::open_input(path);
  return read_joint_csv(in, path);
}

/// The 3x3 synthetic instance: uniform p(x) and the channel p(y|x) below.
inline JointPMF synthetic_joint_3x3() {
  // columns x1..x3 of p(y|x)
  const std::vector<double> y_given_x = {0.90, 0.08, 0.40,  //
                                         0.025, 0.82, 0.05,  //
                                         0.075, 0.10, 0.55};
  return joint_from_channel(CondProbVector(3, 3, y_given_x), ProbVector::uniform(3));
}

struct RecordsJoint {
  JointPMF joint;
  std::vector<std::string> x_cols, y_cols;
  std::vector<std::vector<std::string>> x_alphabets, y_alphabets;  // per column, sorted
};

namespace detail {

// Sorts numerically when every value parses as a number, else lexicographically.
inline std::vector<std::string> sorted_alphabet(const std::set<std::string>& vals) {
  std::vector<std::string> out(vals.begin(), vals.end());
  const bool numeric = std::all_of(out.begin(), out.end(), [](const std::string& s) { return try_parse_double(s).has_value(); });
  if (numeric)
    std::stable_sort(out.begin(), out.end(),
                     [](const std::string& a, const std::string& b) { return *try_parse_double(a) < *try_parse_double(b); });
  return out;
}

}  // namespace detail

/// Categorical records (CSV with header) to a joint pmf. Y ranges over the
/// product alphabet of `y_cols`, X over that of `x_cols` (default: every other
/// column). `smoothing` is added to every (x, y) cell before normalizing.
inline RecordsJoint read_records_csv(std::istream& in, const std::vector<std::string>& y_cols,
                                     double smoothing = 1e-3, std::vector<std::string> x_cols = {},
                                     const std::string& name = "records csv") {
  if (!(smoothing >= 0.0)) throw ConfigError("smoothing must be >= 0");
  if (y_cols.empty()) throw ConfigError("at least one Y column is required");
  auto rows = detail::read_csv_rows(in);
  if (rows.empty()) throw ParseError(name + ": missing header");
  const auto header = rows[0];
  rows.erase(rows.begin());
  if (rows.empty()) throw ParseError(name + ": no records");

  auto col_index = [&](const std::string& c) {
    const auto it = std::find(header.begin(), header.end(), c);
    if (it == header.end()) throw ConfigError(name + ": no column named '" + c + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> yi, xi;
  for (const auto& c : y_cols) yi.push_back(col_index(c));
  if (x_cols.empty())
    for (const auto& h : header)
      if (std::find(y_cols.begin(), y_cols.end(), h) == y_cols.end()) x_cols.push_back(h);
  if (x_cols.empty()) throw ConfigError(name + ": no X columns left");
  for (const auto& c : x_cols) {
    if (std::find(y_cols.begin(), y_cols.end(), c) != y_cols.end())
      throw ConfigError(name + ": column '" + c + "' is both X and Y");
    xi.push_back(col_index(c));
  }

  for (std::size_t r = 0; r < rows.size(); ++r)
    if (rows[r].size() != header.size())
      throw ParseError(name + ": record " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                       " fields, header has " + std::to_string(header.size()));

  auto alphabets = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::vector<std::string>> out;
    for (std::size_t c : idx) {
      std::set<std::string> vals;
      for (const auto& row : rows) vals.insert(row[c]);
      out.push_back(detail::sorted_alphabet(vals));
    }
    return out;
  };
  RecordsJoint res;
  res.x_cols = x_cols;
  res.y_cols = y_cols;
  res.x_alphabets = alphabets(xi);
  res.y_alphabets = alphabets(yi);

  // Mixed-radix index; the first listed column is the most significant digit.
  auto code = [](const std::vector<std::string>& row, const std::vector<std::size_t>& idx,
                 const std::vector<std::vector<std::string>>& alpha) {
    std::size_t v = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto& a = alpha[k];
      const auto pos = static_cast<std::size_t>(std::find(a.begin(), a.end(), row[idx[k]]) - a.begin());
      v = v * a.size() + pos;
    }
    return v;
  };
  std::size_t nx = 1, ny = 1;
  for (const auto& a : res.x_alphabets) nx *= a.size();
  for (const auto& a : res.y_alphabets) ny *= a.size();

  std::vector<double> counts(nx * ny, smoothing);
  for (const auto& row : rows) counts[code(row, xi, res.x_alphabets) * ny + code(row, yi, res.y_alphabets)] += 1.0;
  res.joint = build_joint(nx, ny, counts);
  return res;
}

inline RecordsJoint ingest_records_csv(const std::string& path, const std::vector<std::string>& y_cols,
                                       double smoothing = 1e-3, std::vector<std::string> x_cols = {}) {
  auto in = detail::open_input(path);
  return read_records_csv(in, y_cols, smoothing, std::move(x_cols), path);
}

/// Column names of the six binary attributes of the heart-failure records.
inline std::vector<std::string> heart_failure_binary_columns() {
  return {"anaemia", "diabetes", "high_blood_pressure", "sex", "smoking", "DEATH_EVENT"};
}

/// Writes `n` synthetic records over the six binary heart-failure attributes.
/// A latent risk variable couples the attributes so that the joint is not a
/// product distribution.
inline void write_synthetic_records(std::ostream& out, std::size_t n, std::uint64_t seed) {
  const auto cols = heart_failure_binary_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << '\n';
  CounterRng rng(seed);
  const double base[6] = {0.43, 0.42, 0.35, 0.65, 0.32, 0.32};
  const double lift[6] = {0.15, 0.05, 0.20, 0.10, 0.25, 0.35};
  for (std::size_t i = 0; i < n; ++i) {
    const double risk = rng.uniform();
    for (std::size_t k = 0; k < 6; ++k) {
      const double p = std::clamp(base[k] + lift[k] * (risk - 0.5) * 2.0, 0.02, 0.98);
      out << (k ? "," : "") << (rng.uniform() < p ? 1 : 0);
    }
    out << '\n';
  }
}

/// "v", "a,b,c" or "lo:hi:steps" (inclusive, evenly spaced).
inline std::vector<double> parse_grid(const std::string& text) {
  const std::string s = detail::trim(text);
  if (s.empty()) throw ConfigError("empty parameter list");
  if (s.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() != 3) throw ConfigError("range must be lo:hi:steps, got '" + s + "'");
    const double lo = detail::parse_double(detail::trim(parts[0]), "range lo");
    const double hi = detail::parse_double(detail::trim(parts[1]), "range hi");
    const double steps = detail::parse_double(detail::trim(parts[2]), "range steps");
    if (!(steps >= 1.0) || steps != std::floor(steps)) throw ConfigError("range steps must be a positive integer");
    const auto n = static_cast<std::size_t>(steps);
    if (n == 1) return {lo};
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
  }
  std::vector<double> out;
  for (const auto& f : detail::split_csv_line(s)) out.push_back(detail::parse_double(f, "parameter list"));
  return out;
}

inline Formulation parse_formulation(const std::string& s) {
  if (s == "ib-th") return Formulation::IbTh;
  if (s == "ib-mv") return Formulation::IbMv;
  if (s == "pf") return Formulation::Pf;
  throw ConfigError("unknown formulation '" + s + "' (ib-th, ib-mv, pf)");
}

inline Variant parse_variant(const std::string& s) {
  if (s == "alg1") return Variant::Alg1;
  if (s == "alg2") return Variant::Alg2;
  throw ConfigError("unknown variant '" + s + "' (alg1, alg2)");
}

inline RunStatus parse_status(const std::string& s) {
  for (auto st : {RunStatus::Converged, RunStatus::MaxIters, RunStatus::Stalled, RunStatus::NumericalFailure})
    if (s == to_string(st)) return st;
  throw ParseError("unknown run status '" + s + "'");
}

/// Where the joint distribution comes from.
struct InputSpec {
  enum class Kind { Builtin, JointCsv, Records };
  Kind kind = Kind::Builtin;
  std::string path;  // unused for Builtin
  std::vector<std::string> y_cols, x_cols;
  double smoothing = 1e-3;
};

inline JointPMF load_input(const InputSpec& in) {
  switch (in.kind) {
    case InputSpec::Kind::Builtin: return synthetic_joint_3x3();
    case InputSpec::Kind::JointCsv: return ingest_joint_csv(in.path);
    case InputSpec::Kind::Records: return ingest_records_csv(in.path, in.y_cols, in.smoothing, in.x_cols).joint;
  }
  throw ConfigError("unknown input kind");
}

struct SweepConfig {
  Formulation formulation = Formulation::IbTh;
  std::optional<Variant> variant;  // default: the formulation's natural variant
  std::vector<double> alphas = {1.0};
  std::vector<double> cs = {1.0};
  std::vector<double> tradeoffs = {0.5};  // gamma (IB) or beta (PF)
  std::size_t nz = 3;
  std::size_t restarts = 1;
  std::uint64_t seed = 0;
  StopConfig stop;
  InnerConfig inner;
  SmoothnessProfile profile;
  InputSpec input;
  bool keep_traces = false;
  std::size_t threads = 0;  // 0: hardware concurrency

  Variant effective_variant() const { return variant ? *variant : natural_variant(formulation); }

  void validate() const {
    if (alphas.empty() || cs.empty() || tradeoffs.empty()) throw ConfigError("sweep lists must be nonempty");
    if (restarts < 1) throw ConfigError("restarts must be >= 1");
    if (!(stop.tol > 0.0)) throw ConfigError("tol must be > 0");
    if (formulation == Formulation::Custom) throw ConfigError("sweeps need a built-in formulation");
    inner.validate();
    profile.validate();
  }
};

struct PlaneRow {
  Formulation formulation = Formulation::IbTh;
  Variant variant = Variant::Alg1;
  double alpha = 1.0;
  double c = 1.0;
  double tradeoff = 0.0;
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::MaxIters;
  std::size_t iters = 0;
  double L_c = 0.0;
  double i_xz = 0.0;
  double i_yz = 0.0;
};

struct SweepResult {
  std::vector<PlaneRow> rows;
  std::vector<Trace> traces;  // parallel to rows when keep_traces
  std::vector<std::string> warnings;
};

/// One solver run reduced to a plane row.
inline PlaneRow run_one(const SplitProblem& pr, Variant variant, std::uint64_t seed,
                        const RunOptions& opt, Trace* keep = nullptr) {
  PlaneRow row;
  row.formulation = pr.formulation;
  row.variant = variant;
  row.alpha = pr.alpha;
  row.c = pr.c;
  row.tradeoff = pr.tradeoff;
  row.seed = seed;
  try {
    auto res = run(pr, variant, random_init(pr, seed), opt);
    const auto& last = res.trace.rows.back();
    row.status = res.trace.status;
    row.iters = last.k;
    row.L_c = last.L_c;
    const auto pt = info_plane_point(encoder_of(pr, res.state), *pr.joint);
    row.i_xz = pt.i_xz;
    row.i_yz = pt.i_yz;
    if (keep) *keep = std::move(res.trace);
  } catch (const NumericalDomainError&) {
    row.status = RunStatus::NumericalFailure;
    row.L_c = row.i_xz = row.i_yz = std::nan("");
  }
  return row;
}

/// Runs every (tradeoff, c, alpha, restart) combination. Restart r uses
/// derive_seed(seed, r) at every grid point, so runs are paired across the
/// grid. Output order is the grid order regardless of thread scheduling.
inline SweepResult sweep(const SweepConfig& cfg, const JointPMF& joint) {
  cfg.validate();
  const Variant variant = cfg.effective_variant();
  auto shared = std::make_shared<const JointPMF>(joint);

  struct Job {
    double t, c, a;
    std::size_t r;
  };
  std::vector<Job> jobs;
  for (double t : cfg.tradeoffs)
    for (double c : cfg.cs)
      for (double a : cfg.alphas)
        for (std::size_t r = 0; r < cfg.restarts; ++r) jobs.push_back({t, c, a, r});

  // Build each grid point once; this also surfaces config errors before any thread starts.
  std::map<std::tuple<double, double, double>, SplitProblem> problems;
  SweepResult out;
  for (const auto& j : jobs) {
    const auto key = std::make_tuple(j.t, j.c, j.a);
    if (problems.count(key)) continue;
    auto pr = build_problem(cfg.formulation, j.t, joint, cfg.nz, j.c, j.a);
    pr.joint = shared;
    validate_run_config(pr, variant);
    for (const auto& w : pr.warnings) out.warnings.push_back(w);
    problems.emplace(key, std::move(pr));
  }

  RunOptions opt;
  opt.inner = cfg.inner;
  opt.stop = cfg.stop;
  opt.record_info = cfg.keep_traces;

  out.rows.resize(jobs.size());
  if (cfg.keep_traces) out.traces.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& j = jobs[i];
      const auto& pr = problems.at(std::make_tuple(j.t, j.c, j.a));
      out.rows[i] = run_one(pr, variant, derive_seed(cfg.seed, j.r), opt,
                            cfg.keep_traces ? &out.traces[i] : nullptr);
    }
  };
  std::size_t n_threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < n_threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return out;
}

struct AverageRow {
  Formulation formulation = Formulation::IbTh;
  Variant variant = Variant::Alg1;
  double alpha = 1.0, c = 1.0, tradeoff = 0.0;
  std::size_t runs = 0;
  double converged_fraction = 0.0;
  double mean_L_c = 0.0, mean_i_xz = 0.0, mean_i_yz = 0.0;  // over all runs with finite values
  double best_L_c = 0.0, best_i_xz = 0.0, best_i_yz = 0.0;  // run with the lowest final L_c
};

/// Per grid point: convergence fraction, averages over all runs (convergent
/// and divergent alike) and the best run.
inline std::vector<AverageRow> average_plane(const std::vector<PlaneRow>& rows) {
  std::vector<AverageRow> out;
  std::map<std::tuple<int, int, double, double, double>, std::vector<const PlaneRow*>> groups;
  std::vector<std::tuple<int, int, double, double, double>> order;
  for (const auto& r : rows) {
    const auto key = std::make_tuple(static_cast<int>(r.formulation), static_cast<int>(r.variant), r.tradeoff, r.c, r.alpha);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  for (const auto& key : order) {
    const auto& g = groups[key];
    AverageRow a;
    a.formulation = g[0]->formulation;
    a.variant = g[0]->variant;
    a.alpha = g[0]->alpha;
    a.c = g[0]->c;
    a.tradeoff = g[0]->tradeoff;
    a.runs = g.size();
    std::vector<RunStatus> st;
    std::size_t finite = 0;
    const PlaneRow* best = nullptr;
    for (const auto* r : g) {
      st.push_back(r->status);
      if (!std::isfinite(r->L_c)) continue;
      ++finite;
      a.mean_L_c += r->L_c;
      a.mean_i_xz += r->i_xz;
      a.mean_i_yz += r->i_yz;
      if (!best || r->L_c < best->L_c) best = r;
    }
    a.converged_fraction = convergence_percentage(st);
    const double nan = std::nan("");
    if (finite) {
      a.mean_L_c /= static_cast<double>(finite);
      a.mean_i_xz /= static_cast<double>(finite);
      a.mean_i_yz /= static_cast<double>(finite);
    } else {
      a.mean_L_c = a.mean_i_xz = a.mean_i_yz = nan;
    }
    a.best_L_c = best ? best->L_c : nan;
    a.best_i_xz = best ? best->i_xz : nan;
    a.best_i_yz = best ? best->i_yz : nan;
    out.push_back(a);
  }
  return out;
}

inline constexpr const char* kPlaneHeader =
    "formulation,variant,alpha,c,tradeoff,seed,status,iters,L_c_bits,I_xz_bits,I_yz_bits";
inline constexpr const char* kTraceHeader = "k,L_c_bits,residual_l1sq,dp2,dq2,dBq2,dnu2,I_xz_bits,I_yz_bits";
inline constexpr const char* kAverageHeader =
    "formulation,variant,alpha,c,tradeoff,runs,converged_fraction,mean_L_c_bits,mean_I_xz_bits,"
    "mean_I_yz_bits,best_L_c_bits,best_I_xz_bits,best_I_yz_bits";

inline void write_plane_csv(std::ostream& out, const std::vector<PlaneRow>& rows) {
  out << kPlaneHeader << '\n';
  for (const auto& r : rows)
    out << to_string(r.formulation) << ',' << to_string(r.variant) << ',' << format_double(r.alpha) << ','
        << format_double(r.c) << ',' << format_double(r.tradeoff) << ',' << r.seed << ',' << to_string(r.status)
        << ',' << r.iters << ',' << format_double(r.L_c) << ',' << format_double(r.i_xz) << ','
        << format_double(r.i_yz) << '\n';
}

namespace detail {

inline void expect_header(const std::vector<std::vector<std::string>>& rows, const char* header,
                          const std::string& what) {
  if (rows.empty()) throw ParseError(what + ": empty file");
  if (split_csv_line(header) != rows[0]) throw ParseError(what + ": unexpected header");
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& where) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(where + ": not an integer: '" + s + "'");
  return v;
}

inline double parse_real_or_nan(const std::string& s, const std::string& where) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return parse_double(s, where);
}

}  // namespace detail

inline std::vector<PlaneRow> read_plane_csv(std::istream& in) {
  const auto rows = detail::read_csv_rows(in);
  detail::expect_header(rows, kPlaneHeader, "plane csv");
  std::vector<PlaneRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    const std::string at = "plane csv line " + std::to_string(i + 1);
    if (f.size() != 11) throw ParseError(at + ": expected 11 fields");
    PlaneRow r;
    r.formulation = parse_formulation(f[0]);
    r.variant = parse_variant(f[1]);
    r.alpha = detail::parse_double(f[2], at);
    r.c = detail::parse_double(f[3], at);
    r.tradeoff = detail::parse_double(f[4], at);
    r.seed = detail::parse_u64(f[5], at);
    r.status = parse_status(f[6]);
    r.iters = static_cast<std::size_t>(detail::parse_u64(f[7], at));
    r.L_c = detail::parse_real_or_nan(f[8], at);
    r.i_xz = detail::parse_real_or_nan(f[9], at);
    r.i_yz = detail::parse_real_or_nan(f[10], at);
    out.push_back(r);
  }
  return out;
}

inline void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.rows)
    out << r.k << ',' << format_double(r.L_c) << ',' << format_double(r.residual_l1sq) << ','
        << format_double(r.dp2) << ',' << format_double(r.dq2) << ',' << format_double(r.dBq2) << ','
        << format_double(r.dnu2) << ',' << format_double(r.i_xz) << ',' << format_double(r.i_yz) << '\n';
}

/// Trace rows back from CSV. ||A dp|| is not stored, so dAp2 comes back NaN.
inline Trace read_trace_csv(std::istream& in) {
  const auto rows = detail::read_csv_rows(in);
  detail::expect_header(rows, kTraceHeader, "trace csv");
  Trace t;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    const std::string at = "trace csv line " + std::to_string(i + 1);
    if (f.size() != 9) throw ParseError(at + ": expected 9 fields");
    TraceRow r;
    r.k = static_cast<std::size_t>(detail::parse_u64(f[0], at));
    double* dst[] = {&r.L_c, &r.residual_l1sq, &r.dp2, &r.dq2, &r.dBq2, &r.dnu2, &r.i_xz, &r.i_yz};
    for (std::size_t k = 0; k < 8; ++k) *dst[k] = detail::parse_real_or_nan(f[k + 1], at);
    if (r.k != t.rows.size()) throw ParseError(at + ": iteration index not contiguous");
    t.rows.push_back(r);
  }
  if (t.rows.empty()) throw ParseError("trace csv: no rows");
  return t;
}

inline void write_average_csv(std::ostream& out, const std::vector<AverageRow>& rows) {
  out << kAverageHeader << '\n';
  for (const auto& a : rows)
    out << to_string(a.formulation) << ',' << to_string(a.variant) << ',' << format_double(a.alpha) << ','
        << format_double(a.c) << ',' << format_double(a.tradeoff) << ',' << a.runs << ','
        << format_double(a.converged_fraction) << ',' << format_double(a.mean_L_c) << ','
        << format_double(a.mean_i_xz) << ',' << format_double(a.mean_i_yz) << ',' << format_double(a.best_L_c)
        << ',' << format_double(a.best_i_xz) << ',' << format_double(a.best_i_yz) << '\n';
}

}  // namespace ibpf
