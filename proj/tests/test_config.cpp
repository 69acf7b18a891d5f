#include <catch2/catch_amalgamated.hpp>

#include "rowrl/config.hpp"
#include "rowrl/csv.hpp"
#include "rowrl/svg.hpp"

using namespace rowrl;

TEST_CASE("an empty config file yields the documented defaults") {
  const ExperimentConfig cfg = parse_config("");
  CHECK(cfg.kind == "street_section");
  CHECK(cfg.slots == 48);
  CHECK(cfg.epochs == 150);
  CHECK(cfg.minibatch == 64);
  CHECK(cfg.buffer_capacity == 100000);
  CHECK(cfg.eta == 0.005);
  CHECK(cfg.gamma == 0.99);
  CHECK(cfg.noise_decay == 0.99);
  CHECK(cfg.sigma0 == 0.2);
  CHECK(cfg.amplifier == 1000.0);
  CHECK(cfg.veh_rate == 114.0);
  CHECK(cfg.ped_rate == 21.0);
}

TEST_CASE("config round trip is exact") {
  const std::string text =
      "[network]\nkind = t_junction\nwidth_m = 14.5\n"
      "[demand]\npeak_slots = 14,38\nveh_rate = 90\n"
      "[schedule]\nslots = 24\nseed = 9\n"
      "[train]\nsigma0 = 0.4\nalgo = maddpg\n";
  const ExperimentConfig a = parse_config(text);
  CHECK(a.kind == "t_junction");
  CHECK(a.peak_slot_a == 14);
  CHECK(a.peak_slot_b == 38);
  CHECK(a.sigma0 == 0.4);
  const ExperimentConfig b = parse_config(serialize_config(a));
  CHECK(serialize_config(a) == serialize_config(b));
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(parse_config("")));
}

TEST_CASE("unknown keys are reported by name") {
  try {
    parse_config("[network]\nkind = street_section\nwdith_m = 13\n");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("network.wdith_m") != std::string::npos);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("[nope]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[train]\nepochs = many\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[train]\nepochs\n"), ConfigError);
}

TEST_CASE("comments and blank lines are ignored") {
  const ExperimentConfig cfg = parse_config(
      "# experiment\n\n[train]\nepochs = 10 ; short run\n");
  CHECK(cfg.epochs == 10);
}

TEST_CASE("variant and timing strings are validated") {
  ExperimentConfig cfg;
  cfg.reward_variant = "as_printed";
  CHECK(cfg.env_params().reward_variant == RewardVariant::as_printed);
  cfg.reward_variant = "cubed";
  CHECK_THROWS_AS(cfg.env_params(), ConfigError);
  cfg.reward_variant = "squared";
  cfg.timing = "off";
  CHECK_FALSE(cfg.hyperparams().record_wall);
  cfg.timing = "maybe";
  CHECK_THROWS_AS(cfg.hyperparams(), ConfigError);
  cfg.timing = "wall";
  cfg.algo = "sarsa";
  CHECK_THROWS_AS(cfg.parse_algo(), ConfigError);
}

TEST_CASE("csv parser reads the metrics schema back") {
  const std::string text =
      std::string(kMetricsHeader) + "\n" +
      "0,ddpg,street_section,1,0.2,0,2100.5,0.4,1.2,7.9,1.2,0.5,12.5\n" +
      "1,ddpg,street_section,1,0.2,3,2200.25,0.45,1.1,8,1.25,0.4,13\n";
  const CsvTable t = parse_csv(text);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.number(1, t.column("epoch_reward")) == 2200.25);
  CHECK(t.rows[0][t.column("algo")] == "ddpg");
  CHECK_THROWS_AS(t.column("nope"), DomainError);
  CHECK_THROWS_AS(parse_csv(std::string(kMetricsHeader) + "\n1,2\n"),
                  DomainError);
}

TEST_CASE("svg rendering is deterministic and labels every series") {
  PlotSeries a{"ddpg", {{0, 2100}, {1, 2200}, {2, 2300}}};
  PlotSeries b{"maddpg", {{0, 2050}, {1, 2250}, {2, 2400}}};
  const std::string one = render_line_chart({a, b}, "epoch", "reward");
  const std::string two = render_line_chart({a, b}, "epoch", "reward");
  CHECK(one == two);
  CHECK(one.find("ddpg") != std::string::npos);
  CHECK(one.find("maddpg") != std::string::npos);
  CHECK(one.find("<polyline") != std::string::npos);
  CHECK_THROWS_AS(render_line_chart({}, "x", "y"), DomainError);
  CHECK_THROWS_AS(render_line_chart({PlotSeries{"empty", {}}}, "x", "y"),
                  DomainError);
}
