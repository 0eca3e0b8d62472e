#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "support/fixtures.hpp"

using namespace loewner;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("loewner_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string file(const std::string& name) const { return (dir_ / name).string(); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "loewner");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return cli::run(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(Cli, TraceOfZeroDriverIsTheSlit) {
  ASSERT_EQ(run({"gen-driver", "--kind", "constant", "--c", "0", "--out", file("zero.json")}), 0);
  ASSERT_EQ(run({"trace", "--driver", file("zero.json"), "--steps", "1000", "--out",
                 file("trace.json"), "--svg", file("trace.svg")}),
            0)
      << err_.str();
  auto g = io::read_path(file("trace.json"));
  EXPECT_EQ(g.parametrisation(), Parametrisation::capacity);
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_LT(std::abs(g[i] - Complex(0, 2.0 * std::sqrt(g.time(i)))), 1e-3);
  EXPECT_NE(io::read_text(file("trace.svg")).find("<polyline"), std::string::npos);
}

TEST_F(Cli, CheckLgpOnRetraceLimitFails) {
  io::write_path(file("rem.json"), fixtures::retrace_path(0.0, 300));
  EXPECT_EQ(run({"check-lgp", "--trace", file("rem.json"), "--eps", "0.1"}), 1);
  EXPECT_NE(out_.str().find("not strictly increasing"), std::string::npos) << out_.str();
}

TEST_F(Cli, CheckLgpOnTracePasses) {
  io::write_path(file("sin.json"), drive_to_trace(fixtures::sin_driver(500), 500));
  EXPECT_EQ(run({"check-lgp", "--trace", file("sin.json"), "--eps", "0.1", "--T", "1",
                 "--markov"}),
            0)
      << out_.str();
}

TEST_F(Cli, UnzipWritesDriverAndChain) {
  io::write_path(file("sin.csv"), drive_to_trace(fixtures::sin_driver(500), 500));
  ASSERT_EQ(run({"unzip", "--trace", file("sin.csv"), "--out", file("d.csv"), "--chain",
                 file("c.json")}),
            0)
      << err_.str();
  auto xi = io::read_driver(file("d.csv"));
  for (std::size_t k = 0; k < xi.size(); ++k)
    EXPECT_NEAR(xi.values()[k], std::sin(xi.times()[k]), 2e-2);
  auto c = io::chain_from_json(io::read_json(file("c.json")));
  EXPECT_NEAR(c.duration(), 1.0, 1e-6);
}

TEST_F(Cli, MapoutAndBoundaryTime) {
  io::write_path(file("slit.json"), drive_to_trace(fixtures::zero_driver(), 1000));
  ASSERT_EQ(run({"mapout", "--trace", file("slit.json"), "--t", "0.5", "--recentre", "--out",
                 file("tail.json")}),
            0)
      << err_.str();
  auto tail = io::read_path(file("tail.json"));
  EXPECT_NEAR(tail.start_time(), 0.5, 1e-12);
  ASSERT_EQ(run({"boundary-time", "--trace", file("slit.json"), "--h", "0.2,0.1", "--out",
                 file("bt.json")}),
            0)
      << err_.str();
  auto j = io::read_json(file("bt.json"));
  EXPECT_NEAR(j["measure"][0].get<double>(), 0.01, 1e-4);
}

TEST_F(Cli, ConvergeOnApproxFamilyDecreases) {
  io::write_path(file("arcs.json"), fixtures::bouncing_arcs(2, 500));
  std::vector<std::string> outs;
  for (const char* eps : {"0.2", "0.1", "0.05"}) {
    std::string o = file(std::string("simple_") + eps + ".json");
    ASSERT_EQ(run({"approx-simple", "--trace", file("arcs.json"), "--eps", eps, "--stages", "8",
                   "--out", o, "--schedule", file("sched.json"), "--report", file("rep.json"),
                   "--no-driver-report"}),
              0)
        << err_.str();
    outs.push_back(o);
  }
  auto sched = io::read_json(file("sched.json"));
  EXPECT_EQ(sched["cut_times"].size(), 8u);
  ASSERT_EQ(run({"converge", "--trace", file("arcs.json"), "--approx", outs[0], outs[1], outs[2],
                 "--out", file("conv.json")}),
            0)
      << err_.str();
  auto rep = io::read_json(file("conv.json"));
  for (std::size_t k = 1; k < 3; ++k) {
    EXPECT_LT(rep["trace_distances"][k].get<double>(), rep["trace_distances"][k - 1].get<double>());
    EXPECT_LT(rep["driver_distances"][k].get<double>(),
              rep["driver_distances"][k - 1].get<double>());
  }
}

TEST_F(Cli, HcapIsDeterministicForASeed) {
  ASSERT_EQ(run({"hcap", "--slit", "2", "--mc", "--samples", "20000", "--seed", "5", "--out",
                 file("a.json")}),
            0);
  ASSERT_EQ(run({"--threads", "2", "hcap", "--slit", "2", "--mc", "--samples", "20000", "--seed",
                 "5", "--out", file("b.json")}),
            0);
  auto a = io::read_json(file("a.json")), b = io::read_json(file("b.json"));
  EXPECT_EQ(a["mc"]["mean"], b["mc"]["mean"]);
  EXPECT_NEAR(a["series"].get<double>(), 2.0, 1e-12);
}

TEST_F(Cli, GenDriverKinds) {
  for (const char* kind : {"constant", "sin", "sqrt", "random-walk"})
    EXPECT_EQ(run({"gen-driver", "--kind", kind, "--n", "64", "--out", file("d.json")}), 0) << kind;
  ASSERT_EQ(run({"gen-driver", "--kind", "random-walk", "--seed", "3", "--out", file("a.json")}), 0);
  ASSERT_EQ(run({"gen-driver", "--kind", "random-walk", "--seed", "3", "--out", file("b.json")}), 0);
  EXPECT_EQ(io::read_text(file("a.json")), io::read_text(file("b.json")));
  auto xi = io::read_driver(file("a.json"));
  double m = 0.0;
  for (double v : xi.values()) m = std::max(m, std::abs(v));
  EXPECT_NEAR(m, 1.0, 1e-12);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({"trace", "--driver", file("x.json"), "--bogus"}), 2);
  EXPECT_NE(err_.str().find("Usage"), std::string::npos);
  EXPECT_EQ(run({"frobnicate"}), 2);
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"trace", "--driver", file("missing.json")}), 2);
  EXPECT_NE(err_.str().find("input error"), std::string::npos);
}

TEST_F(Cli, HelpExitsZero) {
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_NE(out_.str().find("approx-simple"), std::string::npos);
  EXPECT_EQ(run({"boundary-time", "--help"}), 0);
}

TEST_F(Cli, CrossingPolylineIsNotATrace) {
  io::write_path(file("x.json"), fixtures::crossing_polyline());
  EXPECT_EQ(run({"unzip", "--trace", file("x.json")}), 1);
  EXPECT_NE(err_.str().find("not a trace"), std::string::npos);
}
