#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bht/errors.hpp"
#include "bht/harness.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bht;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string &path)
{
   std::ifstream in(path);
   std::stringstream ss;
   ss << in.rdbuf();
   return ss.str();
}

fs::path scratch(const std::string &name)
{
   const fs::path p = fs::temp_directory_path() / ("bht_harness_" + name);
   fs::remove_all(p);
   return p;
}

} // namespace

TEST_CASE("ranges")
{
   CHECK(parse_range("4..9").values() == std::vector<int>{4, 5, 6, 7, 8, 9});
   CHECK(parse_range("7").values() == std::vector<int>{7});
   CHECK(parse_range("-20..-2").lo == -20);
   CHECK_THROWS_AS(parse_range("9..4"), ConfigError);
   CHECK_THROWS_AS(parse_range("a..b"), ConfigError);
}

TEST_CASE("key=value configuration")
{
   const ExperimentConfig c = parse_config("# norm sweep\ncurve = monomial:3\nm=4..9\ntrials=12\nseed=99\n"
                                           "tol.slope=-0.3\nregime=small\n");
   CHECK(c.curve == "monomial:3");
   CHECK(c.m->lo == 4);
   CHECK(c.m->hi == 9);
   CHECK_FALSE(c.j.has_value());
   CHECK(c.trials == 12);
   CHECK(c.seed == 99);
   CHECK(c.tol("slope", -0.25) == -0.3);
   CHECK(c.tol("other", 1.5) == 1.5);

   try {
      parse_config("curve=monomial:2\ntrials\n");
      FAIL("no error");
   } catch (const ConfigError &e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
   }
   CHECK_THROWS_AS(parse_config("bogus=1\n"), ConfigError);
   CHECK_THROWS_AS(parse_config("trials=0\n"), ConfigError);
   CHECK_THROWS_AS(parse_config("regime=medium\n"), ConfigError);
}

TEST_CASE("JSON configuration")
{
   const ExperimentConfig c = parse_config(R"({"curve": "laurent:2=1,-2=1", "j": "0", "m": "5..8",
                                               "seed": 3, "tolerances": {"slope": -0.5}})");
   CHECK(c.curve == "laurent:2=1,-2=1");
   CHECK(c.j->lo == 0);
   CHECK(c.m->hi == 8);
   CHECK(c.seed == 3);
   CHECK(c.tol("slope", 0.0) == -0.5);
   try {
      parse_config(R"({"trials": "many"})");
      FAIL("no error");
   } catch (const ConfigError &e) {
      CHECK(std::string(e.what()).find("trials") != std::string::npos);
   }
}

TEST_CASE("verify-curve through run")
{
   ExperimentConfig c;
   c.out_dir = scratch("curve").string();
   c.curve = "monomial:2";
   const VerificationReport ok = run("verify-curve", c);
   CHECK(ok.pass());
   CHECK(fs::exists(ok.csv_path));

   c.curve = "linear";
   const VerificationReport bad = run("verify-curve", c);
   CHECK_FALSE(bad.pass());
   CHECK(slurp(bad.csv_path).find("inf|Q''|=0") != std::string::npos);

   const auto doc = nlohmann::json::parse(slurp(bad.json_path));
   CHECK(doc["schema"] == 1);
   CHECK(doc["command"] == "verify-curve");
   CHECK(doc.contains("environment"));

   // report re-reads the stored checks and reaches the same verdict
   const VerificationReport agg = run("report", c);
   CHECK_FALSE(agg.pass());
   CHECK_THROWS_AS(run("no-such-command", c), ConfigError);
}

TEST_CASE("identical configs give identical output, whatever the thread count")
{
   ExperimentConfig c = parse_config("m=6\ntol.bucket_samples=6\ntol.agreement_samples=30\nseed=5\n");
   c.out_dir = scratch("a").string();
   const std::string one = slurp(run("interaction", c).csv_path);
   c.out_dir = scratch("b").string();
   c.threads = 3;
   const std::string three = slurp(run("interaction", c).csv_path);
   CHECK(one == three);
   CHECK_FALSE(one.empty());
}
