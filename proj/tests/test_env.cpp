#include <catch2/catch_amalgamated.hpp>

#include "rowrl/env.hpp"

using namespace rowrl;

namespace {

constexpr double kW = 13.0;
const double kPsi = 1.5 / 13.0;

// Brute-force leftover-minimising lane search, the oracle for choose_lanes.
int oracle_lanes(double a, double w, double psi) {
  const double carriageway = (1.0 - a - psi) * w;
  int best = 1;
  double best_leftover = std::numeric_limits<double>::infinity();
  for (int l = 1; l <= 10; ++l) {
    const double leftover = carriageway - (3.5 * l + 0.5);
    if (leftover >= -1e-9 && leftover < best_leftover) {
      best_leftover = leftover;
      best = l;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("clip_action enforces the trust region") {
  CHECK(clip_action(0.05, kW, kPsi) ==
        Catch::Approx(0.11538461538461539).margin(1e-15));
  CHECK(clip_action(0.90, kW, kPsi) ==
        Catch::Approx(0.5769230769230769).margin(1e-15));
  CHECK(clip_action(0.30, kW, kPsi) == 0.30);
  // 5 m street with a 1.5 m facility belt admits no feasible split
  CHECK_THROWS_AS(clip_action(0.3, 5.0, 1.5 / 5.0), DomainError);
}

TEST_CASE("choose_lanes picks the largest fitting lane count") {
  CHECK(choose_lanes(0.20, kW, kPsi) == 2);  // 8.9 m carriageway
  CHECK(choose_lanes(clip_upper_bound(kW, kPsi), kW, kPsi) == 1);  // 4.0 m
  // carriageway just below two-lane width
  const double a749 = 1.0 - kPsi - 7.49 / kW;
  CHECK(choose_lanes(a749, kW, kPsi) == 1);
}

TEST_CASE("choose_lanes agrees with the brute-force minimiser") {
  for (double w = 6.0; w <= 20.0 + 1e-9; w += 0.5) {
    for (double fac : {0.5, 1.5, 2.5}) {
      const double psi = fac / w;
      if (clip_lower_bound(w) > clip_upper_bound(w, psi) + 1e-9) continue;
      for (int ai = 0; ai <= 100; ++ai) {
        const double a = clip_action(ai / 100.0, w, psi);
        INFO("w=" << w << " fac=" << fac << " a=" << a);
        REQUIRE(choose_lanes(a, w, psi) == oracle_lanes(a, w, psi));
      }
    }
  }
}

TEST_CASE("snap_beta returns residual width to the sidewalk") {
  CHECK(snap_beta(2, kW, kPsi) ==
        Catch::Approx(0.3076923076923077).margin(1e-15));
  CHECK(snap_beta(1, kW, kPsi) ==
        Catch::Approx(clip_upper_bound(kW, kPsi)).margin(1e-15));
  for (int l = 1; l <= 2; ++l)
    CHECK(choose_lanes(snap_beta(l, kW, kPsi), kW, kPsi) == l);
  CHECK_THROWS_AS(snap_beta(0, kW, kPsi), DomainError);
  CHECK_THROWS_AS(snap_beta(4, kW, kPsi), DomainError);  // sidewalk < 1.5 m
}

TEST_CASE("clip, lanes and snap compose into feasible configurations") {
  for (double w = 6.0; w <= 20.0 + 1e-9; w += 0.5) {
    for (double fac : {0.5, 1.5, 2.5}) {
      const double psi = fac / w;
      if (clip_lower_bound(w) > clip_upper_bound(w, psi) + 1e-9) continue;
      for (double raw = -10.0; raw <= 10.0 + 1e-9; raw += 0.25) {
        const double a = clip_action(raw, w, psi);
        const int lanes = choose_lanes(a, w, psi);
        const double beta = snap_beta(lanes, w, psi);
        INFO("w=" << w << " fac=" << fac << " raw=" << raw);
        REQUIRE(lanes >= 1);
        REQUIRE(beta * w >= 1.5 - 1e-9);
        REQUIRE((1.0 - beta - psi) * w >= 3.5 * lanes + 0.5 - 1e-9);
      }
    }
  }
}

TEST_CASE("aggregate_state averages the slot's observations") {
  std::vector<ObservationRecord> recs;
  for (int h = 0; h < 10; ++h)
    recs.push_back(ObservationRecord{0, h, 3, 2, 0.0, 0.0});
  RowState s = aggregate_state(recs);
  CHECK(s.mean_veh_count == 3.0);
  CHECK(s.mean_ped_count == 2.0);

  recs.clear();
  for (int h = 0; h < 180; ++h)
    recs.push_back(ObservationRecord{1, h, h, 0, 0.0, 0.0});
  CHECK(aggregate_state(recs).mean_veh_count == Catch::Approx(89.5));

  // random records vs an independent sum
  std::mt19937_64 rng = make_rng(11, 0);
  recs.clear();
  double veh_sum = 0, ped_sum = 0;
  for (int h = 0; h < 60; ++h) {
    ObservationRecord r{2, h, uniform_int(rng, 0, 40), uniform_int(rng, 0, 80),
                        0.0, 0.0};
    veh_sum += r.veh_count;
    ped_sum += r.ped_count;
    recs.push_back(r);
  }
  const RowState rs = aggregate_state(recs);
  CHECK(rs.mean_veh_count == Catch::Approx(veh_sum / 60.0).margin(1e-12));
  CHECK(rs.mean_ped_count == Catch::Approx(ped_sum / 60.0).margin(1e-12));

  CHECK_THROWS_AS(aggregate_state({}), DomainError);
}

TEST_CASE("immediate_reward sums the quadratic gains") {
  // everyone at top speed, beta + psi = 0.5
  std::vector<ObservationRecord> recs;
  for (int h = 0; h < 4; ++h) recs.push_back({0, h, 5, 3, 5.0, 3.0});
  RewardBreakdown r = immediate_reward(recs, 0.5 - kPsi, 1, kPsi);
  CHECK(r.g_veh == Catch::Approx(1.0).margin(1e-12));
  CHECK(r.g_ped == Catch::Approx(1.0).margin(1e-12));
  CHECK(r.g_act == Catch::Approx(0.5).margin(1e-12));
  CHECK(r.amplified == Catch::Approx(2500.0).margin(1e-9));
}

TEST_CASE("empty traffic counts as unimpeded") {
  std::vector<ObservationRecord> recs(6);
  const double beta = 0.4231 - kPsi;
  RewardBreakdown r = immediate_reward(recs, beta, 1, kPsi);
  CHECK(r.g_veh == 1.0);
  CHECK(r.g_ped == 1.0);
  CHECK(r.g == Catch::Approx(2.4231).margin(1e-12));
}

TEST_CASE("amplified rewards stay inside (0, 3000)") {
  std::mt19937_64 rng = make_rng(12, 0);
  for (int probe = 0; probe < 200; ++probe) {
    std::vector<ObservationRecord> recs;
    for (int h = 0; h < 12; ++h) {
      ObservationRecord r;
      r.veh_count = uniform_int(rng, 0, 30);
      r.ped_count = uniform_int(rng, 0, 50);
      r.veh_speed_ratio_sum = r.veh_count * uniform01(rng);
      r.ped_speed_ratio_sum = r.ped_count * uniform01(rng);
      recs.push_back(r);
    }
    const double w = uniform(rng, 7.0, 20.0);
    const double psi = uniform(rng, 0.03, 0.2);
    const double a = clip_action(uniform(rng, -1, 2), w, psi);
    const int lanes = choose_lanes(a, w, psi);
    const double beta = snap_beta(lanes, w, psi);
    const RewardBreakdown r = immediate_reward(recs, beta, lanes, psi);
    REQUIRE(r.amplified > 0.0);
    REQUIRE(r.amplified < 3000.0);
    REQUIRE((r.g_veh >= 0.0 && r.g_veh <= 1.0));
    REQUIRE((r.g_ped >= 0.0 && r.g_ped <= 1.0));
    REQUIRE((r.g_act > 0.0 && r.g_act < 1.0));
  }
}

TEST_CASE("as_printed variant applies the beta*lanes factor") {
  std::vector<ObservationRecord> recs;
  recs.push_back({0, 0, 4, 2, 2.0, 1.0});  // mean ratios 0.5 each
  const double beta = 0.3, psi = 0.1;
  RewardBreakdown r =
      immediate_reward(recs, beta, 2, psi, RewardVariant::as_printed);
  CHECK(r.g_veh == Catch::Approx(0.5 * beta * 2).margin(1e-12));
  CHECK(r.g_ped == Catch::Approx(0.5 * beta * 2).margin(1e-12));
  CHECK(r.g_act == Catch::Approx(0.4).margin(1e-12));
}

TEST_CASE("redistribute_rewards: mean for centralised, identity otherwise") {
  const std::vector<double> in{1000.0, 2000.0};
  const auto cent = redistribute_rewards(in, RewardMode::centralised);
  CHECK(cent == std::vector<double>{1500.0, 1500.0});
  CHECK(redistribute_rewards(in, RewardMode::distributive) == in);
  // idempotence and sum preservation
  CHECK(redistribute_rewards(cent, RewardMode::centralised) == cent);
  CHECK(cent[0] + cent[1] == Catch::Approx(in[0] + in[1]));
  // single edge: both modes identical
  CHECK(redistribute_rewards({42.0}, RewardMode::centralised) ==
        redistribute_rewards({42.0}, RewardMode::distributive));
  CHECK_THROWS_AS(redistribute_rewards({}, RewardMode::centralised),
                  DomainError);
}

TEST_CASE("episode start slots follow the two-phase rule") {
  std::mt19937_64 rng = make_rng(13, 0);
  for (int epoch = 0; epoch < 20; ++epoch)
    CHECK(reset_start_slot(epoch, 48, rng) == 0);
  for (int epoch = 20; epoch < 200; ++epoch) {
    const int e = reset_start_slot(epoch, 48, rng);
    REQUIRE(e >= 1);
    REQUIRE(e <= 46);
  }
  std::mt19937_64 a = make_rng(14, 0), b = make_rng(14, 0);
  CHECK(reset_start_slot(25, 48, a) == reset_start_slot(25, 48, b));
  CHECK_THROWS_AS(reset_start_slot(0, 2, rng), DomainError);
}

TEST_CASE("epoch_reward normalises by slots and edges") {
  std::vector<std::vector<double>> r(2, std::vector<double>(48, 1000.0));
  CHECK(epoch_reward(r, 0, 48) == Catch::Approx(1000.0).margin(1e-12));
  std::vector<std::vector<double>> r24(2, std::vector<double>(24, 1000.0));
  CHECK(epoch_reward(r24, 24, 48) == Catch::Approx(1000.0).margin(1e-12));
  std::vector<std::vector<double>> zeros(3, std::vector<double>(48, 0.0));
  CHECK(epoch_reward(zeros, 0, 48) == 0.0);
  std::vector<std::vector<double>> ragged{std::vector<double>(47, 1.0),
                                          std::vector<double>(48, 1.0)};
  CHECK_THROWS_AS(epoch_reward(ragged, 0, 48), DomainError);
}
