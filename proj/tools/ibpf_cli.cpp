// ibpf: information bottleneck / privacy funnel solvers from the command line.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ibpf/config_json.hpp"
#include "ibpf/ibpf.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace ibpf;

namespace {

struct InputOpts {
  std::string input;
  bool records = false;
  std::string y_cols, x_cols;
  double smoothing = 1e-3;

  void add(CLI::App* app) {
    app->add_option("--input", input, "joint table CSV (rows x, columns y) or records CSV with --records");
    app->add_flag("--records", records, "treat --input as categorical records with a header");
    app->add_option("--y-cols", y_cols, "comma-separated Y columns of the records");
    app->add_option("--x-cols", x_cols, "comma-separated X columns (default: all others)");
    app->add_option("--smoothing", smoothing, "count added to every (x,y) cell of the records");
  }

  static std::vector<std::string> split(const std::string& s) {
    if (s.empty()) return {};
    return detail::split_csv_line(s);
  }

  InputSpec spec() const {
    InputSpec in;
    if (input.empty()) return in;
    in.path = input;
    if (records) {
      in.kind = InputSpec::Kind::Records;
      in.y_cols = split(y_cols);
      in.x_cols = split(x_cols);
      in.smoothing = smoothing;
    } else {
      in.kind = InputSpec::Kind::JointCsv;
    }
    return in;
  }
};

struct SolverOpts {
  std::string formulation, variant, tradeoff, c = "1", alpha = "1";
  std::size_t nz = 3, restarts = 1, threads = 0;
  std::uint64_t seed = 0;
  double tol = 2e-6;
  std::size_t max_iters = 20000;
  int inner_steps = 1;
  double step0 = 0.01;
  double eps_z = 0.01, eps_zx = 0.01, eps_zy = 0.01;
  std::string out, config;
  bool trace = false;

  std::vector<CLI::Option*> opts;
  CLI::Option* tradeoff_opt = nullptr;

  void add(CLI::App* app, const char* tradeoff_flag, bool with_form) {
    if (with_form) app->add_option("--formulation", formulation, "ib-th, ib-mv or pf");
    tradeoff_opt = app->add_option(tradeoff_flag, tradeoff, "trade-off: value, list a,b or range lo:hi:steps");
    opts = {
        app->add_option("--c", c, "penalty: value, list or range"),
        app->add_option("--alpha", alpha, "relaxation: value, list or range"),
        app->add_option("--variant", variant, "alg1 or alg2 (default: alg1 for ib-th, alg2 otherwise)"),
        app->add_option("--nz", nz, "|Z|"),
        app->add_option("--restarts", restarts, "random restarts per grid point"),
        app->add_option("--seed", seed, "master seed"),
        app->add_option("--tol", tol, "stop when ||Ap - Bq||_1^2 < tol"),
        app->add_option("--max-iters", max_iters, "outer iteration cap"),
        app->add_option("--inner-steps", inner_steps, "gradient steps per block update"),
        app->add_option("--step0", step0, "initial inner step size"),
        app->add_option("--threads", threads, "worker threads (0: all cores)"),
        app->add_flag("--trace", trace, "write per-run trace CSVs"),
        app->add_option("--eps-z", eps_z, "profile floor for p(z)"),
        app->add_option("--eps-zx", eps_zx, "profile floor for p(z|x)"),
        app->add_option("--eps-zy", eps_zy, "profile floor for p(z|y)"),
    };
    app->add_option("--out", out, "output directory");
    app->add_option("--config", config, "JSON sweep configuration; flags override it");
  }

  bool given(const std::string& name) const {
    for (auto* o : opts)
      if (o->check_name(name)) return o->count() > 0;
    return false;
  }

  // JSON first (if any), then every flag that was given explicitly.
  SweepConfig build(Formulation default_form, const InputOpts& in) const {
    SweepConfig cfg;
    cfg.formulation = default_form;
    if (!config.empty()) {
      std::ifstream f(config);
      if (!f) throw ConfigError("cannot open config '" + config + "'");
      nlohmann::json j;
      try {
        f >> j;
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
      if (!j.contains("formulation")) j["formulation"] = to_string(default_form);
      cfg = sweep_config_from_json(j);
    } else {
      cfg.tradeoffs = {};
    }
    if (!formulation.empty()) cfg.formulation = parse_formulation(formulation);
    if (tradeoff_opt->count() > 0) cfg.tradeoffs = parse_grid(tradeoff);
    if (given("--c") || config.empty()) cfg.cs = parse_grid(c);
    if (given("--alpha") || config.empty()) cfg.alphas = parse_grid(alpha);
    if (given("--variant")) cfg.variant = parse_variant(variant);
    if (given("--nz") || config.empty()) cfg.nz = nz;
    if (given("--restarts") || config.empty()) cfg.restarts = restarts;
    if (given("--seed") || config.empty()) cfg.seed = seed;
    if (given("--tol") || config.empty()) cfg.stop.tol = tol;
    if (given("--max-iters") || config.empty()) cfg.stop.max_iters = max_iters;
    if (given("--inner-steps") || config.empty()) cfg.inner.inner_steps = inner_steps;
    if (given("--step0") || config.empty()) cfg.inner.step0 = step0;
    if (given("--threads") || config.empty()) cfg.threads = threads;
    if (given("--trace")) cfg.keep_traces = true;
    if (given("--eps-z") || config.empty()) cfg.profile.eps_z = eps_z;
    if (given("--eps-zx") || config.empty()) cfg.profile.eps_zx = eps_zx;
    if (given("--eps-zy") || config.empty()) cfg.profile.eps_zy = eps_zy;
    if (!in.input.empty()) cfg.input = in.spec();
    if (cfg.tradeoffs.empty()) throw ConfigError(tradeoff_opt->get_name() + " is required");
    cfg.validate();
    return cfg;
  }
};

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw ConfigError("cannot write '" + p.string() + "'");
  return f;
}

int do_sweep(const SweepConfig& cfg, const std::string& out_dir) {
  const auto joint = load_input(cfg.input);
  const auto res = sweep(cfg, joint);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
  const auto avg = average_plane(res.rows);
  if (out_dir.empty()) {
    write_plane_csv(std::cout, res.rows);
  } else {
    const fs::path dir(out_dir);
    auto plane = open_out(dir / "plane.csv");
    write_plane_csv(plane, res.rows);
    auto av = open_out(dir / "averages.csv");
    write_average_csv(av, avg);
    auto js = open_out(dir / "config.json");
    js << sweep_config_to_json(cfg).dump(2) << '\n';
    for (std::size_t i = 0; i < res.traces.size(); ++i) {
      std::ostringstream name;
      name << "run_" << std::setw(5) << std::setfill('0') << i << ".csv";
      auto t = open_out(dir / "traces" / name.str());
      write_trace_csv(t, res.traces[i]);
    }
    std::cerr << res.rows.size() << " runs written to " << dir.string() << '\n';
  }
  for (const auto& a : avg)
    std::cerr << to_string(a.formulation) << " tradeoff=" << a.tradeoff << " c=" << a.c << " alpha=" << a.alpha
              << " converged=" << a.converged_fraction << " best L_c=" << a.best_L_c << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information bottleneck and privacy funnel solvers (ADMM / Douglas-Rachford splitting)"};
  app.require_subcommand(1);

  // ib-sweep / pf-sweep
  InputOpts ib_in, pf_in;
  SolverOpts ib, pf;
  auto* ib_cmd = app.add_subcommand("ib-sweep", "IB sweep over gamma, c, alpha and restarts");
  ib.add(ib_cmd, "--gamma", true);
  ib_in.add(ib_cmd);
  auto* pf_cmd = app.add_subcommand("pf-sweep", "privacy funnel sweep over beta, c, alpha and restarts");
  pf.add(pf_cmd, "--beta", false);
  pf_in.add(pf_cmd);

  // ba
  InputOpts ba_in;
  std::string ba_gamma;
  std::size_t ba_nz = 3, ba_restarts = 20, ba_max_iters = 100000;
  std::uint64_t ba_seed = 0;
  double ba_tol = 1e-10;
  std::string ba_out;
  auto* ba_cmd = app.add_subcommand("ba", "Blahut-Arimoto IB curve");
  ba_cmd->add_option("--gamma", ba_gamma, "value, list or range lo:hi:steps")->required();
  ba_cmd->add_option("--nz", ba_nz, "|Z|");
  ba_cmd->add_option("--restarts", ba_restarts, "random restarts per gamma (best kept)");
  ba_cmd->add_option("--seed", ba_seed, "master seed");
  ba_cmd->add_option("--tol", ba_tol, "max-norm change of p(z|x) at convergence");
  ba_cmd->add_option("--max-iters", ba_max_iters, "iteration cap");
  ba_cmd->add_option("--out", ba_out, "output directory");
  ba_in.add(ba_cmd);

  // run
  InputOpts run_in;
  SolverOpts run_o;
  auto* run_cmd = app.add_subcommand("run", "single solver run with a full trace");
  run_o.add(run_cmd, "--tradeoff,--gamma,--beta", true);
  run_in.add(run_cmd);

  // greedy-pf
  InputOpts gr_in;
  std::string gr_out;
  auto* gr_cmd = app.add_subcommand("greedy-pf", "greedy merge-two privacy funnel from Z = X down to one cluster");
  gr_cmd->add_option("--out", gr_out, "output directory");
  gr_in.add(gr_cmd);

  // threshold
  InputOpts th_in;
  std::string th_form = "ib-th";
  double th_alpha = 1.0, th_tradeoff = 0.5;
  std::size_t th_nz = 3;
  SmoothnessProfile th_prof;
  auto* th_cmd = app.add_subcommand("threshold", "minimum penalty coefficient for a smoothness profile");
  th_cmd->add_option("--formulation", th_form, "ib-th, ib-mv or pf");
  th_cmd->add_option("--alpha", th_alpha, "relaxation");
  th_cmd->add_option("--tradeoff,--gamma,--beta", th_tradeoff, "gamma or beta");
  th_cmd->add_option("--nz", th_nz, "|Z|");
  th_cmd->add_option("--eps-z", th_prof.eps_z, "floor for p(z)");
  th_cmd->add_option("--eps-zx", th_prof.eps_zx, "floor for p(z|x)");
  th_cmd->add_option("--eps-zy", th_prof.eps_zy, "floor for p(z|y)");
  th_in.add(th_cmd);

  // check
  InputOpts ck_in;
  std::string ck_trace, ck_form = "ib-th", ck_variant;
  double ck_tradeoff = 0.5, ck_c = 1.0, ck_alpha = 1.0, ck_tail = 0.5;
  std::size_t ck_nz = 3;
  std::optional<double> ck_lstar;
  SmoothnessProfile ck_prof;
  auto* ck_cmd = app.add_subcommand("check", "sufficient-decrease and rate report for a trace CSV");
  ck_cmd->add_option("--trace-file", ck_trace, "trace CSV written by run or --trace")->required();
  ck_cmd->add_option("--formulation", ck_form, "ib-th, ib-mv or pf");
  ck_cmd->add_option("--variant", ck_variant, "alg1 or alg2");
  ck_cmd->add_option("--tradeoff,--gamma,--beta", ck_tradeoff, "gamma or beta of the run");
  ck_cmd->add_option("--c", ck_c, "penalty of the run");
  ck_cmd->add_option("--alpha", ck_alpha, "relaxation of the run");
  ck_cmd->add_option("--nz", ck_nz, "|Z|");
  ck_cmd->add_option("--L-star", ck_lstar, "reference loss (default: trace minimum - 1e-9)");
  ck_cmd->add_option("--tail", ck_tail, "fraction of the trace used for the rate fit");
  ck_cmd->add_option("--eps-z", ck_prof.eps_z, "floor for p(z)");
  ck_cmd->add_option("--eps-zx", ck_prof.eps_zx, "floor for p(z|x)");
  ck_cmd->add_option("--eps-zy", ck_prof.eps_zy, "floor for p(z|y)");
  ck_in.add(ck_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (ib_cmd->parsed()) {
      auto cfg = ib.build(Formulation::IbTh, ib_in);
      if (cfg.formulation == Formulation::Pf) throw ConfigError("ib-sweep needs ib-th or ib-mv");
      return do_sweep(cfg, ib.out);
    }
    if (pf_cmd->parsed()) {
      auto cfg = pf.build(Formulation::Pf, pf_in);
      if (cfg.formulation != Formulation::Pf) throw ConfigError("pf-sweep needs formulation pf");
      return do_sweep(cfg, pf.out);
    }
    if (ba_cmd->parsed()) {
      const auto joint = load_input(ba_in.spec());
      BaConfig bc;
      bc.tol = ba_tol;
      bc.max_iters = ba_max_iters;
      std::ostringstream csv;
      csv << "gamma,iters,converged,objective_bits,I_xz_bits,I_yz_bits\n";
      for (double g : parse_grid(ba_gamma)) {
        const auto r = ba_ib_best(g, joint, ba_nz, ba_restarts, ba_seed, bc);
        csv << format_double(g) << ',' << r.iters << ',' << (r.converged ? 1 : 0) << ','
            << format_double(r.objective) << ',' << format_double(r.point.i_xz) << ','
            << format_double(r.point.i_yz) << '\n';
      }
      if (ba_out.empty()) {
        std::cout << csv.str();
      } else {
        auto f = open_out(fs::path(ba_out) / "ba.csv");
        f << csv.str();
      }
      return 0;
    }
    if (run_cmd->parsed()) {
      auto cfg = run_o.build(Formulation::IbTh, run_in);
      if (cfg.tradeoffs.size() != 1 || cfg.cs.size() != 1 || cfg.alphas.size() != 1)
        throw ConfigError("run takes single values for the trade-off, --c and --alpha");
      const auto joint = load_input(cfg.input);
      auto pr = build_problem(cfg.formulation, cfg.tradeoffs[0], joint, cfg.nz, cfg.cs[0], cfg.alphas[0]);
      for (const auto& w : pr.warnings) std::cerr << "warning: " << w << '\n';
      const double c_min = penalty_threshold(cfg.formulation, cfg.alphas[0], cfg.profile, joint, cfg.nz, cfg.tradeoffs[0]);
      if (cfg.cs[0] < c_min)
        std::cerr << "warning: c = " << cfg.cs[0] << " is below the threshold " << c_min << " for this profile\n";
      RunOptions opt;
      opt.inner = cfg.inner;
      opt.stop = cfg.stop;
      const auto seed = derive_seed(cfg.seed, 0);
      const auto res = run(pr, cfg.effective_variant(), random_init(pr, seed), opt);
      if (run_o.out.empty()) {
        write_trace_csv(std::cout, res.trace);
      } else {
        auto f = open_out(fs::path(run_o.out) / "trace.csv");
        write_trace_csv(f, res.trace);
      }
      const auto& last = res.trace.rows.back();
      std::cerr << "status=" << to_string(res.trace.status) << " iters=" << last.k << " L_c=" << last.L_c
                << " I_xz=" << last.i_xz << " I_yz=" << last.i_yz << '\n';
      return 0;
    }
    if (gr_cmd->parsed()) {
      const auto joint = load_input(gr_in.spec());
      std::ostringstream csv;
      csv << "nz,I_xz_bits,I_yz_bits,clusters\n";
      for (const auto& s : greedy_pf_merge_two(joint)) {
        std::string cl;
        for (std::size_t z = 0; z < s.clusters.size(); ++z) {
          cl += z ? " | " : "";
          for (std::size_t k = 0; k < s.clusters[z].size(); ++k) cl += (k ? " " : "") + std::to_string(s.clusters[z][k]);
        }
        csv << s.clusters.size() << ',' << format_double(s.point.i_xz) << ',' << format_double(s.point.i_yz) << ",\""
            << cl << "\"\n";
      }
      if (gr_out.empty()) {
        std::cout << csv.str();
      } else {
        auto f = open_out(fs::path(gr_out) / "greedy.csv");
        f << csv.str();
      }
      return 0;
    }
    if (th_cmd->parsed()) {
      const auto joint = load_input(th_in.spec());
      const auto f = parse_formulation(th_form);
      const auto k = derive_constants(f, joint, th_nz, th_tradeoff, th_prof);
      const double c_min = penalty_threshold(f, th_alpha, th_prof, joint, th_nz, th_tradeoff);
      std::cout << std::setprecision(10) << "c_min " << c_min << '\n'
                << "L_p " << k.L_p << "\nL_q " << k.L_q << "\nsigma_F " << k.sigma_F << "\nsigma_G " << k.sigma_G
                << "\nomega_G " << k.omega_G << "\nM_q " << k.M_q << "\nzeta " << k.zeta << '\n';
      return 0;
    }
    if (ck_cmd->parsed()) {
      const auto joint = load_input(ck_in.spec());
      std::ifstream tf(ck_trace);
      if (!tf) throw ConfigError("cannot open '" + ck_trace + "'");
      const auto trace = read_trace_csv(tf);
      const auto f = parse_formulation(ck_form);
      const auto variant = ck_variant.empty() ? natural_variant(f) : parse_variant(ck_variant);
      const auto k = derive_constants(f, joint, ck_nz, ck_tradeoff, ck_prof);
      const auto rep = sufficient_decrease_report(trace, variant, CertificateConstants::from(k, ck_c, ck_alpha));
      double lmin = trace.rows.front().L_c;
      for (const auto& r : trace.rows) lmin = std::min(lmin, r.L_c);
      const double lstar = ck_lstar ? *ck_lstar : lmin - 1e-9;
      const auto fit = rate_fit(trace, lstar, ck_tail);
      std::cout << std::setprecision(6) << "checked " << rep.checked << "\nviolations " << rep.violations.size()
                << "\nfraction_ok " << rep.fraction_ok << "\ncertified " << (rep.certified ? "yes" : "no")
                << "\ndelta_p " << rep.binding.delta_p << "\ndelta_q " << rep.binding.delta_q << "\ndelta_nu "
                << rep.binding.delta_nu << '\n';
      if (!rep.note.empty()) std::cout << "note " << rep.note << '\n';
      if (fit.ok)
        std::cout << "rate_Q " << fit.Q << "\nrate_r2 " << fit.r2 << "\nrate_points " << fit.points << '\n';
      else
        std::cout << "rate_fit failed: " << fit.message << '\n';
      return 0;
    }
  } catch (const ibpf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
