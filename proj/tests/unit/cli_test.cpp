#include "varcomp/cli.hpp"

#include <sstream>

#include "gtest/gtest.h"
#include "json.hpp"
#include "test_support.hpp"

namespace varcomp::cli {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string problem(const std::string& name) { return testing::data_path("problems/" + name); }

TEST(Cli, CheckVariationalAndNonVariational) {
  const Outcome ok = invoke({"check", problem("free_oscillations.vc")});
  EXPECT_EQ(ok.code, kOk) << ok.err;
  EXPECT_NE(ok.out.find("verdict: variational (symbolic)"), std::string::npos);
  const Outcome damped = invoke({"check", problem("damped.vc")});
  EXPECT_EQ(damped.code, kCheckFailed);
  EXPECT_NE(damped.out.find("non-variational"), std::string::npos);
  EXPECT_EQ(invoke({"check", problem("harmonic_lagrangian.vc")}).code, kOk);
}

TEST(Cli, CompleteReportsCompletionAsJson) {
  const Outcome r = invoke({"complete", problem("damped.vc"), "--format", "json", "--reduce-order"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["completion"][1]["expr"], "-a[1,2]*D1(q[1]) - a[2,2]*D1(q[2])");
  EXPECT_NE(j["reduced_lagrangian"], "skipped");
  for (const auto& c : j["numeric_checks"]) EXPECT_NE(c["status"], "failed") << c.dump();
  const Outcome via = invoke({"complete", problem("damped.vc"), "--format", "json", "--via-helmholtz"});
  ASSERT_EQ(via.code, kOk) << via.err;
  EXPECT_EQ(nlohmann::json::parse(via.out)["completion"], j["completion"]);
}

TEST(Cli, CompleteIsDeterministic) {
  const Outcome a = invoke({"complete", problem("wave_2d.vc"), "--format", "json"});
  const Outcome b = invoke({"complete", problem("wave_2d.vc"), "--format", "json"});
  EXPECT_EQ(a.code, kOk) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, DivergentHomotopyExitCode) {
  const Outcome r = invoke({"complete", problem("em_covariant.vc")});
  EXPECT_EQ(r.code, kDivergent);
  EXPECT_NE(r.err.find("weight -1"), std::string::npos) << r.err;
}

TEST(Cli, InputErrors) {
  EXPECT_EQ(invoke({"check", problem("does_not_exist.vc")}).code, kInputError);
  EXPECT_EQ(invoke({"bogus"}).code, kInputError);
  EXPECT_EQ(invoke({}).code, kInputError);
  EXPECT_EQ(invoke({"check", problem("damped.vc"), "--format", "xml"}).code, kInputError);
  EXPECT_EQ(invoke({"--help"}).code, kOk);
}

TEST(Cli, EvalAtPointFile) {
  const Outcome r = invoke({"eval", problem("damped.vc"), "--point", testing::data_path("points/damped.pt")});
  ASSERT_EQ(r.code, kOk) << r.err;
  std::istringstream lines(r.out);
  std::string name, eq;
  double v1 = 0, v2 = 0;
  lines >> name >> eq >> v1;
  EXPECT_EQ(name, "q[1]");
  lines >> name >> eq >> v2;
  EXPECT_EQ(name, "q[2]");
  EXPECT_NEAR(v1, 3.925, 1e-14);
  EXPECT_NEAR(v2, 0.15, 1e-14);
  const Outcome missing = invoke({"eval", problem("cubic_friction.vc"), "--point", testing::data_path("points/damped.pt")});
  EXPECT_EQ(missing.code, kInputError);
}

TEST(Cli, VerifyGrScenarios) {
  const Outcome plane = invoke({"verify-gr", testing::data_path("scenarios/plane.json")});
  EXPECT_EQ(plane.code, kOk) << plane.out << plane.err;
  const Outcome tight = invoke({"verify-gr", testing::data_path("scenarios/tight.json"), "--points", "1"});
  EXPECT_EQ(tight.code, kCheckFailed) << tight.out;
  EXPECT_NE(tight.out.find("failed"), std::string::npos);
}

}  // namespace
}  // namespace varcomp::cli
