#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include <catch_amalgamated.hpp>

#include "dcoord/bench.hpp"
#include "support.hpp"

using namespace dcoord;
namespace fs = std::filesystem;

namespace {

CampaignSpec tiny_spec(const std::string& out_dir) {
  CampaignSpec spec;
  spec.n_values = {4};
  spec.n_sol_values = {1, 2};
  spec.seed_begin = 1;
  spec.seed_end = 2;
  spec.p_int = 0.3;
  spec.n_d = 4;
  spec.strategies = {PolicyConfig(KFixed{1}), PolicyConfig(KAll{}),
                     PolicyConfig(Dsa{})};
  spec.runs = 3;
  spec.max_iterations = 100000;
  spec.out_dir = out_dir;
  return spec;
}

}  // namespace

TEST_CASE("policy JSON round-trip") {
  for (const char* text :
       {R"({"name":"k1"})", R"({"name":"k3"})", R"({"name":"kall"})",
        R"({"name":"kada","t_start":5,"window":50})",
        R"({"name":"dsa","alpha":0.7,"epsilon":0.1})"}) {
    const auto policy = policy_from_json(nlohmann::json::parse(text));
    const auto j = policy_to_json(policy);
    const auto back = policy_from_json(j);
    CHECK(back.name() == policy.name());
    CHECK(policy_to_json(back) == j);
  }
  CHECK(policy_from_json(nlohmann::json::parse(R"({"name":"k1"})")).name() ==
        "k1");
  CHECK(policy_from_json(nlohmann::json::parse(R"({"name":"k12"})")).name() ==
        "k12");
  CHECK_THROWS_AS(policy_from_json(nlohmann::json::parse(R"({"name":"bogus"})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(policy_from_json(nlohmann::json::parse(R"({"name":"kX"})")),
                  std::invalid_argument);
}

TEST_CASE("campaign spec JSON parsing and round-trip") {
  const auto j = nlohmann::json::parse(R"({
    "n": [4, 6],
    "n_sol": [1],
    "seeds": [0, 3],
    "p_int": 0.25,
    "n_d": 5,
    "strategies": [{"name": "k1"}, {"name": "dsa", "alpha": 0.8}],
    "runs": 7,
    "max_iterations": 5000,
    "enum_limit": 100,
    "rank_mode": "ordinal",
    "out_dir": "somewhere"
  })");
  const auto spec = campaign_spec_from_json(j);
  CHECK(spec.n_values == std::vector<std::uint32_t>{4, 6});
  CHECK(spec.n_sol_values == std::vector<std::uint32_t>{1});
  CHECK(spec.seed_begin == 0);
  CHECK(spec.seed_end == 3);
  CHECK(spec.p_int == 0.25);
  CHECK(spec.n_d == 5);
  REQUIRE(spec.strategies.size() == 2);
  CHECK(spec.strategies[0].name() == "k1");
  CHECK(spec.strategies[1].name() == "dsa_a0.8");
  CHECK(spec.runs == 7);
  CHECK(spec.max_iterations == 5000);
  CHECK(spec.enum_limit == 100);
  CHECK(spec.rank_mode == RankMode::Ordinal);
  CHECK(spec.out_dir == "somewhere");

  const auto round = campaign_spec_from_json(campaign_spec_to_json(spec));
  CHECK(campaign_spec_to_json(round) == campaign_spec_to_json(spec));

  CHECK_THROWS_AS(
      campaign_spec_from_json(nlohmann::json::parse(
          R"({"n":[2],"n_sol":[1],"seeds":[1],"strategies":[{"name":"k1"}]})")),
      std::invalid_argument);
}

TEST_CASE("spec defaults match the library defaults") {
  const auto spec = campaign_spec_from_json(nlohmann::json::parse(
      R"({"n":[4],"n_sol":[1],"seeds":[0,0],"strategies":[{"name":"kall"}]})"));
  CHECK(spec.p_int == 0.3);
  CHECK(spec.n_d == 8);
  CHECK(spec.runs == 100);
  CHECK(spec.max_iterations == 100000);
  CHECK(spec.enum_limit == 1'000'000);
  CHECK(spec.rank_mode == RankMode::Dense);
}

TEST_CASE("spec validation") {
  CampaignSpec spec = tiny_spec("x");
  CHECK_NOTHROW(validate_spec(spec));
  spec.n_values.clear();
  CHECK_THROWS_AS(validate_spec(spec), std::invalid_argument);
  spec = tiny_spec("x");
  spec.seed_begin = 5;
  spec.seed_end = 4;
  CHECK_THROWS_AS(validate_spec(spec), std::invalid_argument);
  spec = tiny_spec("x");
  spec.runs = 0;
  CHECK_THROWS_AS(validate_spec(spec), std::invalid_argument);
  spec = tiny_spec("");
  CHECK_THROWS_AS(validate_spec(spec), std::invalid_argument);
  spec = tiny_spec("x");
  spec.strategies.clear();
  CHECK_THROWS_AS(validate_spec(spec), std::invalid_argument);
}

TEST_CASE("resolve_workers honours the environment override") {
  unsetenv("DCOP_COORD_WORKERS");
  CHECK(resolve_workers(2) == 2);
  CHECK(resolve_workers(1) == 1);
  CHECK(resolve_workers(0) >= 1);
  setenv("DCOP_COORD_WORKERS", "3", 1);
  CHECK(resolve_workers(2) == 3);
  CHECK(resolve_workers(0) == 3);
  setenv("DCOP_COORD_WORKERS", "junk", 1);
  CHECK(resolve_workers(2) == 2);  // unparsable value is ignored
  unsetenv("DCOP_COORD_WORKERS");
}

TEST_CASE("run_campaign produces records, reports and a manifest") {
  testsupport::TempDir dir("campaign");
  const auto spec = tiny_spec(dir.str());
  const auto result = run_campaign(spec, 1);
  CHECK_FALSE(result.was_noop);

  // 2 n_sol values x 2 seeds x 3 strategies x 3 runs
  CHECK(result.records.size() == 36);
  for (const auto& rec : result.records) {
    CHECK(rec.n == 4);
    CHECK(rec.run_seed == mix_seeds(rec.instance_seed, rec.run_index));
    if (rec.converged) {
      REQUIRE(rec.rank.has_value());
      if (*rec.rank == 1) CHECK(*rec.regret_pct == 0.0);
    } else {
      CHECK_FALSE(rec.rank.has_value());
    }
  }

  CHECK(fs::exists(dir.path() / "records.csv"));
  CHECK(fs::exists(dir.path() / "manifest.json"));
  CHECK(fs::exists(dir.path() / "report.csv"));
  CHECK(fs::exists(dir.path() / "report.json"));
  CHECK(fs::exists(dir.path() / "report_convtime.csv"));
  CHECK(fs::exists(dir.path() / "instances" / "inst_n4_s1_seed1.json"));
  CHECK(fs::exists(dir.path() / "solutions" / "sol_n4_s2_seed2.json"));
  CHECK(fs::exists(dir.path() / "parts" / "part_kall_n4_s1_seed1.csv"));

  const auto on_disk = read_records_csv(dir.str("records.csv"));
  CHECK(on_disk == result.records);

  CHECK(result.manifest["complete"] == true);
  CHECK(result.manifest["instances"].size() == 4);
  for (const auto& entry : result.manifest["instances"]) {
    CHECK(entry["status"] == "ok");
    CHECK(entry["enumeration"] == "ok");
    CHECK(entry["solution_count"].get<std::uint64_t>() >= 1);
  }
  CHECK(result.manifest["parts"].size() == 12);
}

TEST_CASE("re-running a completed campaign is a no-op") {
  testsupport::TempDir dir("campaign_noop");
  const auto spec = tiny_spec(dir.str());
  const auto first = run_campaign(spec, 1);
  const std::string bytes_before = testsupport::slurp(dir.str("records.csv"));

  const auto again = run_campaign(spec, 1);
  CHECK(again.was_noop);
  CHECK(again.records == first.records);
  CHECK(testsupport::slurp(dir.str("records.csv")) == bytes_before);
}

TEST_CASE("identical specs in fresh directories agree byte for byte") {
  testsupport::TempDir a("campaign_a"), b("campaign_b");
  auto spec_a = tiny_spec(a.str());
  auto spec_b = tiny_spec(b.str());
  run_campaign(spec_a, 1);
  run_campaign(spec_b, 1);
  CHECK(testsupport::slurp(a.str("records.csv")) ==
        testsupport::slurp(b.str("records.csv")));
  CHECK(testsupport::slurp(a.str("report.csv")) ==
        testsupport::slurp(b.str("report.csv")));
}

TEST_CASE("campaigns resume from partial state") {
  testsupport::TempDir full("campaign_full"), partial("campaign_partial");
  run_campaign(tiny_spec(full.str()), 1);
  const std::string reference = testsupport::slurp(full.str("records.csv"));

  run_campaign(tiny_spec(partial.str()), 1);
  // wreck part of the output, keep the rest
  fs::remove(partial.path() / "records.csv");
  fs::remove(partial.path() / "manifest.json");
  fs::remove(partial.path() / "parts" / "part_k1_n4_s1_seed1.csv");
  fs::remove(partial.path() / "parts" / "part_dsa_n4_s2_seed2.csv");
  fs::remove(partial.path() / "solutions" / "sol_n4_s1_seed2.json");

  const auto result = run_campaign(tiny_spec(partial.str()), 1);
  CHECK_FALSE(result.was_noop);
  CHECK(testsupport::slurp(partial.str("records.csv")) == reference);
}

TEST_CASE("an interrupted campaign restarts to an identical result") {
  testsupport::TempDir full("campaign_ref"), broken("campaign_broken");
  run_campaign(tiny_spec(full.str()), 1);
  const std::string reference = testsupport::slurp(full.str("records.csv"));

  struct Interrupt : std::runtime_error {
    Interrupt() : std::runtime_error("interrupted") {}
  };
  int events = 0;
  CHECK_THROWS_AS(run_campaign(tiny_spec(broken.str()), 1,
                               [&](const CampaignProgress&) {
                                 if (++events == 7) throw Interrupt();
                               }),
                  Interrupt);
  CHECK_FALSE(fs::exists(broken.path() / "records.csv"));

  const auto result = run_campaign(tiny_spec(broken.str()), 1);
  CHECK(result.records.size() == 36);
  CHECK(testsupport::slurp(broken.str("records.csv")) == reference);
}

TEST_CASE("generation failures are recorded without aborting") {
  testsupport::TempDir dir("campaign_genfail");
  CampaignSpec spec;
  spec.n_values = {2};
  spec.n_sol_values = {1, 2};  // n_sol=2 is impossible with n_d=1
  spec.seed_begin = 0;
  spec.seed_end = 1;
  spec.p_int = 0.0;
  spec.n_d = 1;
  spec.strategies = {PolicyConfig(KAll{})};
  spec.runs = 2;
  spec.out_dir = dir.str();

  const auto result = run_campaign(spec, 1);
  // only the two n_sol=1 grid points produce runs
  CHECK(result.records.size() == 4);
  int failed = 0, ok = 0;
  for (const auto& entry : result.manifest["instances"]) {
    if (entry["status"] == "generation_failed") {
      ++failed;
      CHECK_FALSE(entry.contains("instance"));
    } else {
      ++ok;
    }
  }
  CHECK(failed == 2);
  CHECK(ok == 2);
  CHECK(result.manifest["complete"] == true);

  // resuming keeps the failure markers and stays consistent
  const auto again = run_campaign(spec, 1);
  CHECK(again.was_noop);
}

TEST_CASE("enumeration limits leave runs unranked") {
  testsupport::TempDir dir("campaign_limit");
  CampaignSpec spec;
  spec.n_values = {4};
  spec.n_sol_values = {2};
  spec.seed_begin = 1;
  spec.seed_end = 1;
  spec.n_d = 4;
  spec.strategies = {PolicyConfig(KAll{})};
  spec.runs = 3;
  spec.enum_limit = 1;  // two planted solutions guarantee an overflow
  spec.out_dir = dir.str();

  const auto result = run_campaign(spec, 1);
  CHECK(result.records.size() == 3);
  for (const auto& rec : result.records) {
    CHECK_FALSE(rec.rank.has_value());
    CHECK_FALSE(rec.regret_pct.has_value());
  }
  REQUIRE(result.manifest["instances"].size() == 1);
  CHECK(result.manifest["instances"][0]["enumeration"] == "limit_exceeded");
  CHECK_FALSE(fs::exists(dir.path() / "solutions" / "sol_n4_s2_seed1.json"));
}

TEST_CASE("worker pools and the env override reproduce the serial result") {
  testsupport::TempDir serial("campaign_serial"), pooled("campaign_pooled"),
      env("campaign_env");
  run_campaign(tiny_spec(serial.str()), 1);
  run_campaign(tiny_spec(pooled.str()), 4);
  CHECK(testsupport::slurp(serial.str("records.csv")) ==
        testsupport::slurp(pooled.str("records.csv")));

  setenv("DCOP_COORD_WORKERS", "2", 1);
  run_campaign(tiny_spec(env.str()), resolve_workers(0));
  unsetenv("DCOP_COORD_WORKERS");
  CHECK(testsupport::slurp(serial.str("records.csv")) ==
        testsupport::slurp(env.str("records.csv")));
}
