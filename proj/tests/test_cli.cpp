#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <json.hpp>

#include "pmri/config.hpp"
#include "pmri/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path work_root()
{
  fs::path const p = fs::path(PMRI_TEST_WORKDIR) / "cli";
  fs::create_directories(p);
  return p;
}

int run(std::string const &args)
{
  std::string const cmd = std::string(PMRI_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int const status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(fs::path const &p)
{
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(fs::path const &p, std::string const &s)
{
  std::ofstream out(p, std::ios::binary);
  out << s;
}

// 64 x 64 harmonic acquisition with a small network, cheap enough for repeated runs.
std::string small_config(fs::path const &dir, std::string const &method)
{
  auto const path = dir / "config.json";
  write_text(path, json{{"seed", 7},
                        {"phantom", {{"ny", 64}, {"nx", 64}}},
                        {"method", method},
                        {"raki", {{"channels1", 16}, {"channels2", 8}, {"steps", 10}}},
                        {"iraki", {{"steps_per_iter", 5}}}}
                     .dump());
  return path.string();
}

std::string quoted(fs::path const &p) { return "'" + p.string() + "'"; }

// simulate + undersample into dir, returns the config path.
std::string acquire(fs::path const &dir, std::string const &method)
{
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto const cfg = small_config(dir, method);
  REQUIRE(run("simulate --config " + cfg + " --out " + quoted(dir)) == 0);
  REQUIRE(run("undersample --config " + cfg + " --in " + quoted(dir / "reference.ksp") + " --out " + quoted(dir)) == 0);
  return cfg;
}

} // namespace

TEST_CASE("config defaults validate and round-trip through JSON")
{
  pmri::RunConfig const c;
  CHECK_NOTHROW(c.validate());
  auto const back = pmri::RunConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(c.pattern().rate == 4);
  CHECK(c.pattern().acs_count == 18);
  CHECK(c.schedule().n_iter == 25);
}

TEST_CASE("config rejects unknown keys and bad values")
{
  CHECK_THROWS_AS(pmri::RunConfig::from_json(json{{"sed", 1}}), pmri::InvalidArgument);
  CHECK_THROWS_AS(pmri::RunConfig::from_json(json{{"pattern", {{"rat", 4}}}}), pmri::InvalidArgument);
  CHECK_THROWS_AS(pmri::RunConfig::from_json(json{{"method", "sense"}}), pmri::InvalidArgument);
  auto c = pmri::RunConfig::from_json(json{{"pattern", {{"rate", 0}}}});
  CHECK_THROWS_AS(c.validate(), pmri::InvalidArgument);
  c = pmri::RunConfig::from_json(json{{"pattern", {{"acs", 200}}}});
  CHECK_THROWS_AS(c.validate(), pmri::InvalidArgument);
}

TEST_CASE("cli grappa on harmonic coils is exact and the report carries metrics")
{
  auto const dir = work_root() / "grappa";
  auto const cfg = acquire(dir, "grappa");
  REQUIRE(run("reconstruct --config " + cfg + " --in " + quoted(dir / "undersampled.ksp") + " --reference " +
              quoted(dir / "reference.ksp") + " --out " + quoted(dir)) == 0);
  auto const report = json::parse(slurp(dir / "report.json"));
  CHECK(report["method"] == "grappa");
  CHECK(report["metrics"]["nmse"].get<double>() < 1e-10);
  CHECK(report["dims"] == json{8, 64, 64});
  CHECK(fs::exists(dir / "recon.pgm"));
  CHECK(fs::exists(dir / "recon.pfm"));
}

TEST_CASE("cli iraki at R=4 runs 25 stages and is byte-for-byte reproducible")
{
  auto const a = work_root() / "iraki_a";
  auto const b = work_root() / "iraki_b";
  for (auto const &dir : {a, b}) {
    auto const cfg = acquire(dir, "iraki");
    REQUIRE(run("reconstruct --config " + cfg + " --in " + quoted(dir / "undersampled.ksp") + " --reference " +
                quoted(dir / "reference.ksp") + " --out " + quoted(dir)) == 0);
  }
  for (auto const *name : {"reference.ksp", "undersampled.ksp", "recon.ksp", "recon.pfm", "recon.pgm"}) {
    INFO(name);
    CHECK(slurp(a / name) == slurp(b / name));
  }
  auto const report = json::parse(slurp(a / "report.json"));
  CHECK(report["n_stages"] == 25);
  CHECK(report["stages"].size() == 25);
  CHECK(report["stages"][0].contains("nmse"));
}

TEST_CASE("cli exit codes")
{
  auto const dir = work_root() / "errors";
  auto const cfg = acquire(dir, "grappa");
  auto const us = quoted(dir / "undersampled.ksp");

  CHECK(run("simulate --rate 0 --out " + quoted(dir / "x")) == 2);
  CHECK(run("reconstruct --in " + us + " --config " + cfg + " --rate 0 --out " + quoted(dir / "x")) == 2);
  CHECK(run("reconstruct --in " + us + " --config " + cfg + " --method sense --out " + quoted(dir / "x")) == 2);
  CHECK(run("reconstruct --in " + us + " --config " + cfg + " --vcc --rate 3 --out " + quoted(dir / "x")) == 2);
  CHECK(run("reconstruct --in " + quoted(dir / "missing.ksp") + " --config " + cfg + " --out " + quoted(dir / "x")) ==
        3);
  CHECK(run("evaluate --recon " + quoted(dir / "missing.pfm") + " --reference " + quoted(dir / "reference.pfm")) == 3);
  CHECK(run("frobnicate") != 0);

  auto const bad = dir / "bad.json";
  write_text(bad, R"({"seed": 1, "patern": {"rate": 4}})");
  CHECK(run("simulate --config " + quoted(bad) + " --out " + quoted(dir / "x")) == 2);

  auto const garbage = dir / "garbage.ksp";
  write_text(garbage, "KSP1 not really");
  CHECK(run("reconstruct --in " + quoted(garbage) + " --config " + cfg + " --out " + quoted(dir / "x")) == 3);
}

TEST_CASE("cli evaluate of a file against itself")
{
  auto const dir = work_root() / "evaluate";
  acquire(dir, "grappa");
  REQUIRE(run("evaluate --recon " + quoted(dir / "reference.pfm") + " --reference " + quoted(dir / "reference.ksp") +
              " --out " + quoted(dir)) == 0);
  auto const m = json::parse(slurp(dir / "metrics.json"));
  CHECK(m["nmse"].get<double>() < 1e-12);
  CHECK(m["ssim"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  auto const text = slurp(dir / "metrics.txt");
  CHECK(text.find("nmse ") != std::string::npos);
}
