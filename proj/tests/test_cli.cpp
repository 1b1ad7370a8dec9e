#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "rtstab_app.hpp"

using namespace rtstab;
namespace fs = std::filesystem;

namespace {

std::string config(const std::string& name) { return std::string(RTSTAB_CONFIG_DIR) + "/" + name; }

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::path(::testing::TempDir()) / name;
  fs::remove_all(d);
  return d;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream is(p);
  return nlohmann::json::parse(is);
}

int run(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  std::ostringstream o, e;
  const int code = app::run(std::move(args), o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

}  // namespace

TEST(Config, ParsesSampleConfig) {
  const auto c = load_config(config("unstable_isothermal.json"));
  EXPECT_EQ(c.law_minus.K(), 2.0);
  EXPECT_EQ(c.numerics.n_minus, 100u);
  EXPECT_EQ(c.numerics.xi_cutoff, 8.0);
  EXPECT_FALSE(c.numerics.dt.has_value());
}

TEST(Config, MissingFieldIsNamed) {
  auto j = nlohmann::json::parse(std::ifstream(config("unstable_isothermal.json")));
  j["geometry"].erase("ell");
  try {
    (void)parse_config(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidInput);
    EXPECT_NE(std::string(e.what()).find("ell"), std::string::npos);
  }
  j = nlohmann::json::parse(std::ifstream(config("unstable_isothermal.json")));
  j["fluids"]["plus"]["mu"] = -1.0;
  EXPECT_THROW(parse_config(j), Error);
  j = nlohmann::json::parse(std::ifstream(config("unstable_isothermal.json")));
  j["fluids"]["minus"]["law"]["kind"] = "vanderwaals";
  EXPECT_THROW(parse_config(j), Error);
}

TEST(Cli, Equilibrium) {
  const auto d = fresh_dir("cli_eq");
  ASSERT_EQ(run({"--config", config("unstable_isothermal.json"), "--out", d.string(),
                 "equilibrium"}),
            0);
  const auto j = read_json(d / "equilibrium.json");
  EXPECT_NEAR(j["jump"].get<double>(), std::exp(1.0) / 2, 1e-8);
  EXPECT_TRUE(j["admissible"].get<bool>());
  std::ifstream is(d / "equilibrium.csv");
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "x3,rho,pressure,h_prime,layer");
}

TEST(Cli, Alpha) {
  std::string out;
  ASSERT_EQ(run({"--config", config("unstable_isothermal.json"), "alpha", "--xi", "1", "--s",
                 "0.001"},
                &out),
            0);
  EXPECT_LT(std::stod(out), 0.0);
}

TEST(Cli, ClassifyRegimes) {
  struct Case {
    const char* file;
    const char* regime;
  };
  for (const Case c : {Case{"unstable_isothermal.json", "nonlinearly_unstable"},
                       Case{"stable_swapped.json", "stable_almost_exponential_decay"},
                       Case{"supercritical_tension.json", "stable_exponential_decay"},
                       Case{"subcritical_tension.json", "nonlinearly_unstable"}}) {
    const auto d = fresh_dir("cli_classify");
    ASSERT_EQ(run({"--config", config(c.file), "--out", d.string(), "classify"}), 0) << c.file;
    const auto j = read_json(d / "classify.json");
    EXPECT_EQ(j["regime"], c.regime) << c.file;
    EXPECT_TRUE(j.contains("decay_claim"));
  }
}

TEST(Cli, ModeAndGrowth) {
  const auto d = fresh_dir("cli_mode");
  ASSERT_EQ(run({"--config", config("unstable_isothermal.json"), "--out", d.string(), "mode",
                 "--xi", "1"}),
            0);
  EXPECT_TRUE(fs::exists(d / "mode.csv"));
  const auto m = read_json(d / "mode.json");
  EXPECT_GT(m["lambda"].get<double>(), 0.07);
  ASSERT_EQ(run({"--config", config("unstable_isothermal.json"), "--out", d.string(), "growth",
                 "--xi", "1"}),
            0);
  EXPECT_EQ(read_json(d / "growth.json")["lambda"], m["lambda"]);
}

TEST(Cli, ModeWithoutGrowthIsSolverError) {
  const auto d = fresh_dir("cli_nomode");
  EXPECT_EQ(run({"--config", config("stable_swapped.json"), "--out", d.string(), "mode", "--xi",
                 "1"}),
            3);
}

TEST(Cli, Extend) {
  const auto d = fresh_dir("cli_extend");
  fs::create_directories(d);
  auto f = make_field(8, 8, 1.0, 1.0);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) f.at(i, j) = std::cos(f.x1(i));
  write_field(f, (d / "grid.csv").string());
  ASSERT_EQ(run({"--config", config("unstable_isothermal.json"), "--out", d.string(), "extend",
                 "--input", (d / "grid.csv").string(), "--m", "2", "--x3", "0", "-1"}),
            0);
  std::ifstream is(d / "extension.csv");
  std::string line;
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 1 + 2 * 64);
}

TEST(Cli, ValidationErrorsExitTwo) {
  std::string err;
  EXPECT_EQ(run({"--config", config("malformed.json"), "classify"}, nullptr, &err), 2);
  EXPECT_FALSE(err.empty());
  EXPECT_EQ(run({"--config", config("unstable_isothermal.json"), "alpha", "--xi", "1"}), 2);
  EXPECT_EQ(run({"--config", "/no/such/file.json", "classify"}), 2);
  EXPECT_EQ(run({"--config", config("unstable_isothermal.json"), "alpha", "--xi", "1", "--s",
                 "-1"}),
            2);
}
