#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ibpf/config_json.hpp"
#include "support.hpp"

using namespace ibpf;

namespace {

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

std::string fixture_path() { return std::string(IBPF_SOURCE_DIR) + "/data/synthetic_3x3.csv"; }

}  // namespace

TEST(JointCsv, FixtureRecoversExample) {
  const auto j = ingest_joint_csv(fixture_path());
  const auto ref = oracle::example_joint();
  ASSERT_EQ(j.nx, 3u);
  ASSERT_EQ(j.ny, 3u);
  for (std::size_t x = 0; x < 3; ++x) {
    EXPECT_NEAR(j.p_x[x], 1.0 / 3.0, 1e-12);
    for (std::size_t y = 0; y < 3; ++y) EXPECT_NEAR(j.at(x, y), ref.at(x, y), 1e-12);
  }
  const auto builtin = synthetic_joint_3x3();
  for (std::size_t k = 0; k < 9; ++k) EXPECT_NEAR(builtin.table[k], ref.table[k], 1e-15);
}

TEST(JointCsv, UnnormalizedAndHeaderless) {
  std::istringstream in("1,1\n1,1\n");
  const auto j = read_joint_csv(in);
  for (double v : j.table) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(JointCsv, Errors) {
  std::istringstream neg("a,b\n0.1,0.2\n0.3,-0.4\n");
  try {
    read_joint_csv(neg);
    FAIL() << "negative entry accepted";
  } catch (const InvalidDistribution& e) {
    EXPECT_NE(std::string(e.what()).find("row 1, col 1"), std::string::npos) << e.what();
  }
  std::istringstream ragged("1,2\n3\n");
  EXPECT_THROW(read_joint_csv(ragged), ParseError);
  std::istringstream empty("");
  EXPECT_THROW(read_joint_csv(empty), ParseError);
  std::istringstream text("1,2\n3,x\n");
  EXPECT_THROW(read_joint_csv(text), ParseError);
  EXPECT_THROW(ingest_joint_csv("/nonexistent/file.csv"), Error);
}

TEST(Records, HeartFailureShape) {
  std::stringstream buf;
  write_synthetic_records(buf, 299, 7);
  const auto rj = read_records_csv(buf, {"sex", "DEATH_EVENT"}, 1e-3);
  EXPECT_EQ(rj.joint.ny, 4u);
  EXPECT_EQ(rj.joint.nx, 16u);
  for (double v : rj.joint.table) EXPECT_GT(v, 0.0);
  EXPECT_EQ(rj.x_cols, (std::vector<std::string>{"anaemia", "diabetes", "high_blood_pressure", "smoking"}));
}

TEST(Records, CountsAndCoding) {
  std::istringstream in("a,b,y\n0,1,u\n1,1,v\n1,1,v\n0,0,u\n");
  const auto rj = read_records_csv(in, {"y"}, 0.0);
  ASSERT_EQ(rj.joint.nx, 4u);
  ASSERT_EQ(rj.joint.ny, 2u);
  // x = 2a + b
  EXPECT_DOUBLE_EQ(rj.joint.at(1, 0), 0.25);
  EXPECT_DOUBLE_EQ(rj.joint.at(3, 1), 0.5);
  EXPECT_DOUBLE_EQ(rj.joint.at(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(rj.joint.at(2, 0), 0.0);
}

TEST(Records, SingleRecordNoSmoothing) {
  std::istringstream in("a,y\n3,1\n");
  const auto rj = read_records_csv(in, {"y"}, 0.0);
  EXPECT_EQ(rj.joint.nx, 1u);
  EXPECT_EQ(rj.joint.ny, 1u);
  EXPECT_EQ(rj.joint.table[0], 1.0);
}

TEST(Records, Errors) {
  auto bad = [](const std::string& text, const std::vector<std::string>& y, std::vector<std::string> x = {}) {
    std::istringstream in(text);
    (void)read_records_csv(in, y, 1e-3, std::move(x));
  };
  EXPECT_THROW(bad("a,y\n0,1\n", {"z"}), ConfigError);
  EXPECT_THROW(bad("a,y\n", {"y"}), ParseError);
  EXPECT_THROW(bad("a,y\n0\n", {"y"}), ParseError);
  EXPECT_THROW(bad("a,y\n0,1\n", {"y"}, {"y"}), ConfigError);
  EXPECT_THROW(bad("a,y\n0,1\n", {}), ConfigError);
  std::istringstream in("a,y\n0,1\n");
  EXPECT_THROW(read_records_csv(in, {"y"}, -1.0), ConfigError);
}

TEST(Grid, Parsing) {
  EXPECT_EQ(parse_grid("0.5"), (std::vector<double>{0.5}));
  EXPECT_EQ(parse_grid("1,2, 3"), (std::vector<double>{1, 2, 3}));
  const auto r = parse_grid("0:1:5");
  ASSERT_EQ(r.size(), 5u);
  EXPECT_DOUBLE_EQ(r[1], 0.25);
  EXPECT_EQ(r.back(), 1.0);
  EXPECT_THROW(parse_grid("0:1"), ConfigError);
  EXPECT_THROW(parse_grid("0:1:2.5"), ConfigError);
  EXPECT_THROW(parse_grid(""), ConfigError);
  EXPECT_THROW(parse_grid("a,b"), ParseError);
}

TEST(Csv, PlaneRoundTrip) {
  std::vector<PlaneRow> rows(3);
  rows[0] = {Formulation::IbTh, Variant::Alg1, 1.0, 8.0, 0.154, 123456789012345ULL, RunStatus::Converged, 42,
             -0.41193871234567, 1.2345678901234567, 0.1 + 0.2};
  rows[1] = {Formulation::IbMv, Variant::Alg2, 0.7, 15.0, 1.0 / 3.0, 0, RunStatus::MaxIters, 20000, 1e-300, 0, 5e-324};
  rows[2] = {Formulation::Pf, Variant::Alg2, 1.5, 7000, 3.5, 9, RunStatus::NumericalFailure, 0, std::nan(""),
             std::nan(""), std::nan("")};
  std::stringstream buf;
  write_plane_csv(buf, rows);
  EXPECT_EQ(buf.str().substr(0, buf.str().find('\n')),
            "formulation,variant,alpha,c,tradeoff,seed,status,iters,L_c_bits,I_xz_bits,I_yz_bits");
  const auto back = read_plane_csv(buf);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].formulation, rows[i].formulation);
    EXPECT_EQ(back[i].variant, rows[i].variant);
    EXPECT_EQ(back[i].alpha, rows[i].alpha);
    EXPECT_EQ(back[i].c, rows[i].c);
    EXPECT_EQ(back[i].tradeoff, rows[i].tradeoff);
    EXPECT_EQ(back[i].seed, rows[i].seed);
    EXPECT_EQ(back[i].status, rows[i].status);
    EXPECT_EQ(back[i].iters, rows[i].iters);
    EXPECT_TRUE(same(back[i].L_c, rows[i].L_c));
    EXPECT_TRUE(same(back[i].i_xz, rows[i].i_xz));
    EXPECT_TRUE(same(back[i].i_yz, rows[i].i_yz));
  }
}

TEST(Csv, TraceRoundTrip) {
  const auto j = oracle::example_joint();
  const auto pr = build_ib_th(0.3, j, 3, 4.0);
  const auto res = run(pr, Variant::Alg1, random_init(pr, 1));
  std::stringstream buf;
  write_trace_csv(buf, res.trace);
  EXPECT_EQ(buf.str().substr(0, buf.str().find('\n')), "k,L_c_bits,residual_l1sq,dp2,dq2,dBq2,dnu2,I_xz_bits,I_yz_bits");
  const auto back = read_trace_csv(buf);
  ASSERT_EQ(back.rows.size(), res.trace.rows.size());
  for (std::size_t i = 0; i < back.rows.size(); ++i) {
    const auto &a = back.rows[i], &b = res.trace.rows[i];
    EXPECT_EQ(a.k, b.k);
    EXPECT_TRUE(same(a.L_c, b.L_c));
    EXPECT_TRUE(same(a.residual_l1sq, b.residual_l1sq));
    EXPECT_TRUE(same(a.dp2, b.dp2));
    EXPECT_TRUE(same(a.dq2, b.dq2));
    EXPECT_TRUE(same(a.dBq2, b.dBq2));
    EXPECT_TRUE(same(a.dnu2, b.dnu2));
    EXPECT_TRUE(same(a.i_xz, b.i_xz));
    EXPECT_TRUE(same(a.i_yz, b.i_yz));
    EXPECT_TRUE(std::isnan(a.dAp2));
  }
  std::istringstream gap(std::string(kTraceHeader) + "\n0,1,1,0,0,0,0,0,0\n2,1,1,0,0,0,0,0,0\n");
  EXPECT_THROW(read_trace_csv(gap), ParseError);
  std::istringstream wrong("k,L\n0,1\n");
  EXPECT_THROW(read_trace_csv(wrong), ParseError);
}

TEST(Sweep, DeterministicBytes) {
  SweepConfig cfg;
  cfg.formulation = Formulation::IbMv;
  cfg.tradeoffs = {0.2, 0.4};
  cfg.cs = {10.0};
  cfg.restarts = 3;
  cfg.seed = 99;
  cfg.stop.max_iters = 500;
  const auto j = oracle::example_joint();
  auto bytes = [&](std::size_t threads) {
    cfg.threads = threads;
    std::stringstream buf;
    write_plane_csv(buf, sweep(cfg, j).rows);
    return buf.str();
  };
  const auto a = bytes(1), b = bytes(1), c = bytes(4);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);

  cfg.restarts = 1;
  cfg.threads = 0;
  std::stringstream x, y;
  write_plane_csv(x, sweep(cfg, j).rows);
  write_plane_csv(y, sweep(cfg, j).rows);
  EXPECT_EQ(x.str(), y.str());
}

TEST(Sweep, GridOrderAndPairedSeeds) {
  SweepConfig cfg;
  cfg.formulation = Formulation::IbTh;
  cfg.tradeoffs = {0.3, 0.5};
  cfg.cs = {2.0, 4.0};
  cfg.alphas = {0.8, 1.0};
  cfg.restarts = 2;
  cfg.seed = 5;
  cfg.stop.max_iters = 50;
  cfg.keep_traces = true;
  const auto res = sweep(cfg, oracle::example_joint());
  ASSERT_EQ(res.rows.size(), 16u);
  ASSERT_EQ(res.traces.size(), 16u);
  std::size_t i = 0;
  for (double t : cfg.tradeoffs)
    for (double c : cfg.cs)
      for (double a : cfg.alphas)
        for (std::size_t r = 0; r < 2; ++r, ++i) {
          EXPECT_EQ(res.rows[i].tradeoff, t);
          EXPECT_EQ(res.rows[i].c, c);
          EXPECT_EQ(res.rows[i].alpha, a);
          EXPECT_EQ(res.rows[i].seed, derive_seed(5, r));
          EXPECT_EQ(res.rows[i].iters, res.traces[i].rows.back().k);
          EXPECT_EQ(res.rows[i].L_c, res.traces[i].rows.back().L_c);
        }
  const auto avg = average_plane(res.rows);
  ASSERT_EQ(avg.size(), 8u);
  EXPECT_EQ(avg[0].runs, 2u);
  EXPECT_EQ(avg[0].best_L_c, std::min(res.rows[0].L_c, res.rows[1].L_c));
  EXPECT_NEAR(avg[0].mean_L_c, 0.5 * (res.rows[0].L_c + res.rows[1].L_c), 1e-15);
}

TEST(Sweep, ConfigValidation) {
  SweepConfig cfg;
  cfg.cs.clear();
  EXPECT_THROW(sweep(cfg, oracle::example_joint()), ConfigError);
  cfg = {};
  cfg.restarts = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.stop.tol = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.formulation = Formulation::IbMv;
  cfg.alphas = {2.0};
  EXPECT_THROW(sweep(cfg, oracle::example_joint()), ConfigError);
}

TEST(Json, RoundTripAndOverrides) {
  const auto j = nlohmann::json::parse(R"({
    "formulation": "pf", "alpha": 1.0, "c": "10:30:3", "tradeoff": [2, 3.5],
    "nz": 4, "restarts": 7, "seed": 11,
    "stop": {"tol": 1e-8}, "inner": {"inner_steps": 5},
    "input": {"records": "heart.csv", "y_cols": ["sex", "DEATH_EVENT"]}
  })");
  const auto cfg = sweep_config_from_json(j);
  EXPECT_EQ(cfg.formulation, Formulation::Pf);
  EXPECT_EQ(cfg.effective_variant(), Variant::Alg2);
  EXPECT_EQ(cfg.cs, (std::vector<double>{10, 20, 30}));
  EXPECT_EQ(cfg.tradeoffs, (std::vector<double>{2, 3.5}));
  EXPECT_EQ(cfg.nz, 4u);
  EXPECT_EQ(cfg.restarts, 7u);
  EXPECT_EQ(cfg.stop.tol, 1e-8);
  EXPECT_EQ(cfg.stop.max_iters, 20000u);
  EXPECT_EQ(cfg.inner.inner_steps, 5);
  EXPECT_EQ(cfg.inner.step0, 0.01);
  EXPECT_EQ(cfg.input.kind, InputSpec::Kind::Records);
  EXPECT_EQ(cfg.input.smoothing, 1e-3);
  const auto again = sweep_config_from_json(sweep_config_to_json(cfg));
  EXPECT_EQ(sweep_config_to_json(again), sweep_config_to_json(cfg));

  EXPECT_THROW(sweep_config_from_json(nlohmann::json::parse(R"({"formulation": "xx"})")), ConfigError);
  EXPECT_THROW(sweep_config_from_json(nlohmann::json::parse(R"({"nz": "three"})")), ConfigError);
  EXPECT_THROW(sweep_config_from_json(nlohmann::json::parse(R"({"restarts": 0})")), ConfigError);
  EXPECT_THROW(sweep_config_from_json(nlohmann::json::parse("[1]")), ConfigError);
}
