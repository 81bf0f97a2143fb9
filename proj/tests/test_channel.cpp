// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mdagg/channel.hpp"

using namespace mdagg;

namespace {
ChannelTable shipped_table() {
  return ChannelTable::from_csv(std::string(MDAGG_DATA_DIR) +
                                "/channel_synthetic.csv");
}
}  // namespace

TEST_CASE("binary entropy endpoints, symmetry, and reference value") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(binary_entropy(0.11) ==
        doctest::Approx(0.499915958164528).epsilon(1e-12));
  CHECK(binary_entropy(0.05) ==
        doctest::Approx(0.28639695711595613).epsilon(1e-12));
  CHECK(binary_entropy(0.3) ==
        doctest::Approx(binary_entropy(0.7)).epsilon(1e-15));
  CHECK_THROWS_AS(binary_entropy(-0.01), std::domain_error);
  CHECK_THROWS_AS(binary_entropy(1.01), std::domain_error);
}

TEST_CASE("BSC capacity is 1 - H(p)") {
  CHECK(bsc_capacity(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(bsc_capacity(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(bsc_capacity(0.11) ==
        doctest::Approx(0.500084041835472).epsilon(1e-12));
}

TEST_CASE("effective crossover of cascaded BSCs") {
  CHECK(effective_crossover(0.1, 0.2) == doctest::Approx(0.26).epsilon(1e-15));
  CHECK(effective_crossover(0.0, 0.3) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(effective_crossover(0.5, 0.25) ==
        doctest::Approx(0.5).epsilon(1e-15));
  // order does not matter
  CHECK(effective_crossover(0.07, 0.4) ==
        doctest::Approx(effective_crossover(0.4, 0.07)).epsilon(1e-15));
}

TEST_CASE("first-event error from frame error rate") {
  // FER of 0.5 over 8640 measured bits.
  CHECK(first_event_error_from_fer(0.5, 8640) ==
        doctest::Approx(8.0222150151573835e-5).epsilon(1e-12));
  CHECK(first_event_error_from_fer(0.0, 8640) == 0.0);
  // round trip: erasing 8640 bits at that pu reproduces the FER
  const double pu = first_event_error_from_fer(0.5, 8640);
  CHECK(frame_erasure_prob(pu, 8640) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(first_event_error_from_fer(1.0, 8640), std::domain_error);
  CHECK_THROWS_AS(first_event_error_from_fer(-0.1, 8640), std::domain_error);
  CHECK_THROWS_AS(first_event_error_from_fer(0.5, 0), std::domain_error);
}

TEST_CASE("frame erasure probability") {
  CHECK(frame_erasure_prob(0.0, 1000) == 0.0);
  CHECK(frame_erasure_prob(1.0, 8) == 1.0);
  CHECK(frame_erasure_prob(0.2, 0) == 0.0);
  CHECK(frame_erasure_prob(1e-3, 100) ==
        doctest::Approx(1.0 - std::pow(1.0 - 1e-3, 100)).epsilon(1e-12));
}

TEST_CASE("channel table interpolation and clamping") {
  ChannelTable t = ChannelTable::from_rows({
      {10.0, 12.0, 0.20, 0.50, 8640},
      {20.0, 12.0, 0.10, 0.30, 8640},
      {30.0, 12.0, 0.02, 0.10, 8640},
      {10.0, 54.0, 0.40, 0.90, 8640},
      {30.0, 54.0, 0.10, 0.40, 8640},
  });
  CHECK(t.rates().size() == 2);
  CHECK(t.rates()[0] == 12.0);
  CHECK(t.rates()[1] == 54.0);
  // exact nodes
  CHECK(t.crossover_at(20.0, 12.0) == doctest::Approx(0.10).epsilon(1e-12));
  // linear between nodes
  CHECK(t.crossover_at(15.0, 12.0) == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(t.crossover_at(25.0, 12.0) == doctest::Approx(0.06).epsilon(1e-12));
  CHECK(t.crossover_at(20.0, 54.0) == doctest::Approx(0.25).epsilon(1e-12));
  // clamped outside the measured range
  CHECK(t.crossover_at(-5.0, 12.0) == doctest::Approx(0.20).epsilon(1e-12));
  CHECK(t.crossover_at(99.0, 12.0) == doctest::Approx(0.02).epsilon(1e-12));
  // unknown rate names the available ones
  CHECK_THROWS_AS(t.crossover_at(20.0, 24.0), std::invalid_argument);
  try {
    t.crossover_at(20.0, 24.0);
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("12") != std::string::npos);
    CHECK(msg.find("54") != std::string::npos);
  }
}

TEST_CASE("first-event error interpolates FER then converts") {
  ChannelTable t = ChannelTable::from_rows({
      {10.0, 12.0, 0.20, 0.50, 8640},
      {20.0, 12.0, 0.10, 0.30, 8640},
  });
  const double fer_mid = 0.40;
  CHECK(t.first_event_error_at(15.0, 12.0) ==
        doctest::Approx(first_event_error_from_fer(fer_mid, 8640))
            .epsilon(1e-12));
}

TEST_CASE("channel table input validation") {
  CHECK_THROWS_AS(ChannelTable::from_rows({}), std::invalid_argument);
  // crossover beyond 0.5 is not a BSC
  CHECK_THROWS_AS(
      ChannelTable::from_rows({{10.0, 12.0, 0.75, 0.5, 8640}}),
      std::invalid_argument);
  // FER of exactly 1 cannot be inverted to a finite pu
  CHECK_THROWS_AS(
      ChannelTable::from_rows({{10.0, 12.0, 0.2, 1.0, 8640}}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      ChannelTable::from_rows({{10.0, 12.0, 0.2, 0.5, 0}}),
      std::invalid_argument);
}

TEST_CASE("shipped synthetic table reference points") {
  const ChannelTable t = shipped_table();
  CHECK(t.rates().size() == 8);
  CHECK(t.crossover_at(14.0, 12.0) ==
        doctest::Approx(0.00408128557658).epsilon(1e-9));
  CHECK(t.first_event_error_at(14.0, 12.0) ==
        doctest::Approx(0.000556349354733).epsilon(1e-9));
  CHECK(t.crossover_at(16.0, 6.0) ==
        doctest::Approx(2.78695029293e-07).epsilon(1e-9));
  CHECK(t.first_event_error_at(16.0, 6.0) ==
        doctest::Approx(9.48618454899e-07).epsilon(1e-9));
  CHECK(t.crossover_at(35.0, 54.0) ==
        doctest::Approx(3.07208730111e-06).epsilon(1e-9));
  CHECK(t.first_event_error_at(35.0, 54.0) ==
        doctest::Approx(1.00504300674e-05).epsilon(1e-9));
}

TEST_CASE("csv parser rejects malformed tables") {
  CHECK_THROWS(ChannelTable::from_csv(std::string(MDAGG_DATA_DIR) +
                                      "/does_not_exist.csv"));
}
