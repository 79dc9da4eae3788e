#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "svp/config.hpp"
#include "svp/harness.hpp"
#include "svp/svg.hpp"

using namespace svp;

namespace {

const std::string kDomain = R"(svp-lab-config 1
[domain]
n = 2
k = 1
base = 1
alpha = 1
beta = 5
lateral = neumann
)";

int error_line(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string first_data_header(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line))
    if (!line.starts_with("#")) return line;
  return "";
}

}  // namespace

TEST(Config, ParsesBlocksAndDefaults) {
  const RunConfig cfg = parse_config(kDomain + "[bc]\nlow = cos(pi*x1)\nhigh = 2\n[mesh]\nh = 1/16\n[task solve]\n");
  EXPECT_DOUBLE_EQ(cfg.domain.beta_star(), 2.0);
  EXPECT_DOUBLE_EQ(cfg.h, 1.0 / 16.0);
  EXPECT_EQ(cfg.op.p(), 2.0);
  ASSERT_EQ(cfg.tasks.size(), 1u);
  EXPECT_EQ(cfg.tasks[0].kind, "solve");
  EXPECT_TRUE(cfg.wants("csv"));
}

TEST(Config, ReportsLineNumbers) {
  EXPECT_EQ(error_line("svp-lab-config 1\n[domain]\nn = 2\nlateral = sideways\n"), 4);
  EXPECT_EQ(error_line(kDomain + "bogus = 1\n"), 9);
  EXPECT_EQ(error_line(kDomain + "n = 2\n"), 9);
  EXPECT_EQ(error_line("wrong header\n"), 1);
  EXPECT_EQ(error_line(kDomain + "[task frobnicate]\n"), 9);
  EXPECT_EQ(error_line(kDomain + "[task svp]\nstations = 1, x\n"), 10);
}

TEST(Config, RejectsCapsBeyondTheMeshDimension) {
  EXPECT_THROW((void)parse_config(kDomain + "[bc]\nlow = x3\n"), ConfigError);
}

TEST(Config, DuplicateTaskNamesAreSuffixed) {
  const RunConfig cfg = parse_config(kDomain + "[task solve]\n[task solve]\n");
  ASSERT_EQ(cfg.tasks.size(), 2u);
  EXPECT_NE(cfg.tasks[0].name, cfg.tasks[1].name);
}

TEST(Config, ListsAndGroups) {
  EXPECT_EQ(parse_list("1, 2 3"), (std::vector<double>{1.0, 2.0, 3.0}));
  const auto r = parse_list("-1 to 1 step 0.5");
  ASSERT_EQ(r.size(), 5u);
  EXPECT_DOUBLE_EQ(r.back(), 1.0);
  const RunConfig cfg = parse_config(kDomain + "[task svp]\nchecks = -1 0 1; 0 0.5 1.5\n");
  const auto g = cfg.tasks[0].groups("checks", 3);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[1], (std::vector<double>{0.0, 0.5, 1.5}));
  EXPECT_THROW((void)cfg.tasks[0].groups("checks", 2), ConfigError);
}

TEST(Harness, SvpTaskWritesTheFixedCsvHeader) {
  const RunConfig cfg = parse_config(kDomain +
                                     "[bc]\nlow = cos(pi*x1)*cosh(pi*x2)\nhigh = cos(pi*x1)*cosh(pi*x2)\n"
                                     "[mesh]\nh = 1/16\n[task svp]\nname = e\nstations = -1 to 1 step 0.5\n");
  RunOptions opt;
  opt.write_files = false;
  const RunOutcome out = run(cfg, opt);
  EXPECT_EQ(out.exit_code, kExitOk) << out.message;
  ASSERT_TRUE(out.files.count("e.csv"));
  EXPECT_EQ(first_data_header(out.files.at("e.csv")), "tau,I,sectionEnergy,dIdtau,C1,C2,mu,lambda");
  ASSERT_TRUE(out.files.count("report.json"));
  EXPECT_TRUE(out.report.contains("provenance"));
}

TEST(Harness, RunTimeConfigProblemsExitWithTwo) {
  const RunConfig cfg = parse_config(kDomain + "[mesh]\nh = 1/8\n[task svp]\nstations = 0, 9\n");
  RunOptions opt;
  opt.write_files = false;
  EXPECT_EQ(run(cfg, opt).exit_code, kExitConfigError);
}

TEST(Harness, MissingFileExitsWithTwo) {
  RunOptions opt;
  opt.write_files = false;
  EXPECT_EQ(run_file("/nonexistent/config.cfg", opt).exit_code, kExitConfigError);
}

TEST(Harness, OutputDirectoryPrecedence) {
  RunConfig cfg = parse_config(kDomain);
  RunOptions opt;
  cfg.output_directory = "from-config";
  EXPECT_EQ(resolve_output_directory(cfg, opt), "from-config");
  opt.out_dir = "from-option";
  EXPECT_EQ(resolve_output_directory(cfg, opt), "from-option");
}

TEST(Svg, IsDeterministic) {
  const std::vector<PlotSeries> series{{"I", {0.0, 1.0, 2.0}, {1.0, 10.0, 100.0}, false}};
  const std::string a = semilog_svg("t", "x", "y", series);
  EXPECT_EQ(a, semilog_svg("t", "x", "y", series));
  EXPECT_TRUE(a.starts_with("<svg") || a.starts_with("<?xml"));
}
