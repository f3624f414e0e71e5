#include <gtest/gtest.h>

#include <algorithm>

#include "pixel/gesture.hpp"
#include "pixel/rng.hpp"
#include "support.hpp"

namespace pixel {
namespace {

using testing::make_skeleton;
using testing::Pose;

template <typename E>
std::size_t count_of(const std::vector<GestureEvent>& evs) {
  return static_cast<std::size_t>(
      std::count_if(evs.begin(), evs.end(), [](const auto& e) { return std::holds_alternative<E>(e); }));
}

TEST(ClassifyZone, Examples) {
  const ZoneConfig cfg;
  EXPECT_EQ(classify_zone(1.0, Zone::AreaA, cfg), Zone::AreaA);
  EXPECT_EQ(classify_zone(0.3, Zone::AreaA, cfg), Zone::OutOfRange);
  EXPECT_EQ(classify_zone(4.6, Zone::AreaB, cfg), Zone::OutOfRange);
  // Band is (2.35, 2.65).
  EXPECT_EQ(classify_zone(2.55, Zone::AreaA, cfg), Zone::AreaA);
  EXPECT_EQ(classify_zone(2.70, Zone::AreaA, cfg), Zone::AreaB);
  EXPECT_EQ(classify_zone(2.40, Zone::AreaB, cfg), Zone::AreaB);
  EXPECT_EQ(classify_zone(2.30, Zone::AreaB, cfg), Zone::AreaA);
}

TEST(ClassifyZone, RangeEdgesAreInclusive) {
  EXPECT_EQ(classify_zone(0.5, Zone::AreaA), Zone::AreaA);
  EXPECT_EQ(classify_zone(4.5, Zone::AreaB), Zone::AreaB);
  EXPECT_EQ(classify_zone(0.4999, Zone::AreaA), Zone::OutOfRange);
}

TEST(ClassifyZone, FromOutOfRangeUsesThreshold) {
  EXPECT_EQ(classify_zone(2.0, Zone::OutOfRange), Zone::AreaA);
  EXPECT_EQ(classify_zone(2.55, Zone::OutOfRange), Zone::AreaB);
}

TEST(ClassifyZone, NoFlappingInsideBand) {
  Rng rng(11);
  for (Zone start : {Zone::AreaA, Zone::AreaB}) {
    Zone z = start;
    for (int i = 0; i < 5000; ++i) {
      const double depth = 2.3501 + rng.unit() * 0.2998;
      z = classify_zone(depth, z);
      ASSERT_EQ(z, start);
    }
  }
}

TEST(ZoneConfig, Validity) {
  EXPECT_TRUE(ZoneConfig{}.valid());
  EXPECT_FALSE((ZoneConfig{0.5, 4.5, 0.6, 0.15}).valid());
  EXPECT_THROW(GestureRecognizer(RecognizerConfig{ZoneConfig{0.5, 4.5, 4.4, 0.15}}), std::invalid_argument);
}

TEST(ForearmDirection, Examples) {
  EXPECT_EQ(forearm_direction({0, 0, 2}, {0.3, 0, 2}), Direction::Right);
  EXPECT_EQ(forearm_direction({0, 0, 2}, {0, 0.3, 2}), Direction::Up);
  EXPECT_EQ(forearm_direction({0, 0, 2}, {-0.3, 0.1, 2}), Direction::Left);
  EXPECT_EQ(forearm_direction({0, 0, 2}, {0.05, -0.3, 2}), Direction::Down);
  // |x| == |y| resolves horizontal.
  EXPECT_EQ(forearm_direction({0, 0, 0}, {0.2, 0.2, 0}), Direction::Right);
  EXPECT_EQ(forearm_direction({0, 0, 0}, {-0.2, -0.2, 0}), Direction::Left);
}

TEST(ForearmDirection, DeadZone) {
  EXPECT_FALSE(forearm_direction({0, 0, 2}, {0.05, 0.05, 2}).has_value());
  EXPECT_FALSE(forearm_direction({0, 0, 2}, {0.0, 0.1199, 2}).has_value());
  EXPECT_TRUE(forearm_direction({0, 0, 2}, {0.0, 0.12, 2}).has_value());
  // Depth does not count toward the forearm length.
  EXPECT_FALSE(forearm_direction({0, 0, 2}, {0.05, 0.0, 3}).has_value());
}

TEST(ForearmDirection, ScaleInvariantAboveDeadZone) {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double dx = rng.unit() * 2 - 1;
    const double dy = rng.unit() * 2 - 1;
    const auto base = forearm_direction({0, 0, 0}, {dx, dy, 0});
    if (!base) continue;
    const double len = std::hypot(dx, dy);
    const double factor = 0.12 / len + rng.unit() * 5.0 + 1e-9;
    if (len * factor < 0.12) continue;
    EXPECT_EQ(forearm_direction({0, 0, 0}, {dx * factor, dy * factor, 0}), base);
  }
}

TEST(UserColumn, Examples) {
  EXPECT_EQ(user_column(-1.5), 0);
  EXPECT_EQ(user_column(2.0), 14);
  EXPECT_EQ(user_column(0.0), 7);
  EXPECT_EQ(user_column(-9.0), 0);
  EXPECT_EQ(user_column(1.5), 14);
}

TEST(UserColumn, MonotoneAndBounded) {
  int prev = user_column(-3.0);
  for (double x = -3.0; x <= 3.0; x += 0.001) {
    const int c = user_column(x);
    ASSERT_GE(c, prev);
    ASSERT_GE(c, 0);
    ASSERT_LE(c, 14);
    prev = c;
  }
}

TEST(NearestBody, PicksSmallestDepth) {
  std::vector<SkeletonFrame> bodies = {make_skeleton(0, {.x = 0, .z = 3.0}), make_skeleton(0, {.x = 1, .z = 1.2}),
                                       make_skeleton(0, {.x = -1, .z = 2.0})};
  ASSERT_NE(nearest_body(bodies), nullptr);
  EXPECT_DOUBLE_EQ(nearest_body(bodies)->joint(Joint::Spine).x, 1.0);
  EXPECT_EQ(nearest_body({}), nullptr);
}

class RecognizerTest : public ::testing::Test {
 protected:
  std::vector<GestureEvent> feed(const Pose& p) {
    t_ += 33;
    return rec_.feed(make_skeleton(t_, p), t_);
  }

  GestureRecognizer rec_;
  std::int64_t t_ = 0;
};

TEST_F(RecognizerTest, FirstSkeletonReportsPresenceAndZone) {
  const auto evs = feed({.z = 3.0});
  ASSERT_EQ(evs.size(), 2u);
  EXPECT_EQ(evs[0], GestureEvent{gesture::Present{}});
  EXPECT_EQ(evs[1], GestureEvent{gesture::ZoneChanged{Zone::AreaB}});
  EXPECT_TRUE(feed({.z = 3.0}).empty());
  EXPECT_EQ(rec_.column(), 7);
}

TEST_F(RecognizerTest, WalkingInChangesZoneOnce) {
  int changes = 0;
  for (double z = 4.0; z >= 1.0; z -= 0.05) {
    for (const auto& e : feed({.z = z})) changes += std::holds_alternative<gesture::ZoneChanged>(e) ? 1 : 0;
  }
  EXPECT_EQ(changes, 2);  // initial B, then A
  EXPECT_EQ(rec_.zone(), Zone::AreaA);
}

TEST_F(RecognizerTest, RaiseNeedsThreeFrames) {
  EXPECT_EQ(count_of<gesture::Raised>(feed({.raise_right = true})), 0u);
  EXPECT_EQ(count_of<gesture::Raised>(feed({.raise_right = true})), 0u);
  const auto evs = feed({.raise_right = true});
  ASSERT_EQ(count_of<gesture::Raised>(evs), 1u);
  EXPECT_NE(std::find(evs.begin(), evs.end(), GestureEvent{gesture::Raised{Side::Right}}), evs.end());
  EXPECT_EQ(rec_.raised(), Side::Right);
  EXPECT_EQ(count_of<gesture::Raised>(feed({.raise_right = true})), 0u);
  EXPECT_LE(rec_.above_count(Side::Right), 3);
}

TEST_F(RecognizerTest, TwoFramesIsNotARaise) {
  feed({.raise_left = true});
  feed({.raise_left = true});
  EXPECT_EQ(count_of<gesture::Raised>(feed({})), 0u);
  EXPECT_EQ(count_of<gesture::Raised>(feed({.raise_left = true})), 0u);
  EXPECT_FALSE(rec_.raised().has_value());
}

TEST_F(RecognizerTest, BothRaisedPicksRight) {
  feed({.raise_left = true, .raise_right = true});
  feed({.raise_left = true, .raise_right = true});
  const auto evs = feed({.raise_left = true, .raise_right = true});
  EXPECT_NE(std::find(evs.begin(), evs.end(), GestureEvent{gesture::Raised{Side::Right}}), evs.end());
}

TEST_F(RecognizerTest, LowerNeedsThreeFrames) {
  for (int i = 0; i < 3; ++i) feed({.raise_left = true});
  ASSERT_EQ(rec_.raised(), Side::Left);
  EXPECT_EQ(count_of<gesture::Lowered>(feed({})), 0u);
  EXPECT_EQ(count_of<gesture::Lowered>(feed({})), 0u);
  EXPECT_EQ(count_of<gesture::Lowered>(feed({})), 1u);
  EXPECT_FALSE(rec_.raised().has_value());
}

TEST_F(RecognizerTest, DirectionFollowsRaisedForearm) {
  std::vector<GestureEvent> all;
  for (int i = 0; i < 3; ++i) {
    auto evs = feed({.raise_right = true, .point = Direction::Right});
    all.insert(all.end(), evs.begin(), evs.end());
  }
  EXPECT_NE(std::find(all.begin(), all.end(), GestureEvent{gesture::DirectionUpdate{Direction::Right}}), all.end());
  EXPECT_EQ(count_of<gesture::DirectionUpdate>(feed({.raise_right = true, .point = Direction::Right})), 0u);
  const auto up = feed({.raise_right = true, .point = Direction::Up});
  EXPECT_NE(std::find(up.begin(), up.end(), GestureEvent{gesture::DirectionUpdate{Direction::Up}}), up.end());
}

TEST_F(RecognizerTest, NoDirectionBeforeAnyRaise) {
  for (int i = 0; i < 10; ++i) EXPECT_EQ(count_of<gesture::DirectionUpdate>(feed({})), 0u);
}

std::int64_t grab_events(GestureRecognizer& rec, std::vector<std::pair<std::int64_t, Pose>> frames,
                         std::vector<std::int64_t>* when = nullptr) {
  std::int64_t n = 0;
  for (const auto& [t, p] : frames) {
    for (const auto& e : rec.feed(make_skeleton(t, p), t)) {
      if (std::holds_alternative<gesture::Grab>(e)) {
        ++n;
        if (when) when->push_back(t);
      }
    }
  }
  return n;
}

Pose raised_hand(HandState h) { return {.raise_right = true, .hand_r = h}; }

TEST(GrabDetection, OpenThenClosedWhileRaised) {
  GestureRecognizer rec;
  const auto O = raised_hand(HandState::Open);
  const auto C = raised_hand(HandState::Closed);
  EXPECT_EQ(grab_events(rec, {{0, O}, {33, O}, {66, O}, {99, C}, {132, C}, {165, C}}), 1);
  ASSERT_TRUE(rec.grab_cooldown_until().has_value());
  EXPECT_EQ(*rec.grab_cooldown_until(), 165 + 1000);
}

TEST(GrabDetection, NothingWithoutRaisedHand) {
  GestureRecognizer rec;
  const Pose O{.hand_r = HandState::Open};
  const Pose C{.hand_r = HandState::Closed};
  EXPECT_EQ(grab_events(rec, {{0, O}, {33, O}, {66, O}, {99, C}, {132, C}, {165, C}}), 0);
}

TEST(GrabDetection, OnlyTheRaisedHandCounts) {
  GestureRecognizer rec;
  auto O = raised_hand(HandState::Open);
  auto C = O;
  C.hand_l = HandState::Closed;  // left hand grabs, right is the raised one
  EXPECT_EQ(grab_events(rec, {{0, O}, {33, O}, {66, O}, {99, C}, {132, C}, {165, C}}), 0);
}

TEST(GrabDetection, CooldownSuppressesSecondGrab) {
  GestureRecognizer rec;
  const auto O = raised_hand(HandState::Open);
  const auto C = raised_hand(HandState::Closed);
  std::vector<std::int64_t> when;
  // Second sequence completes 300 ms after the first; third one 1100 ms after.
  const auto n = grab_events(rec,
                             {{0, O}, {33, O}, {66, O}, {99, C}, {132, C}, {165, C},
                              {200, O}, {233, O}, {266, O}, {399, C}, {432, C}, {465, C},
                              {1100, O}, {1133, O}, {1166, O}, {1199, C}, {1232, C}, {1265, C}},
                             &when);
  EXPECT_EQ(n, 2);
  ASSERT_EQ(when.size(), 2u);
  EXPECT_EQ(when[0], 165);
  EXPECT_EQ(when[1], 1265);
}

TEST(GrabDetection, SlowCloseIsNotAGrab) {
  GestureRecognizer rec;
  const auto O = raised_hand(HandState::Open);
  const auto C = raised_hand(HandState::Closed);
  EXPECT_EQ(grab_events(rec, {{0, O}, {33, O}, {66, O}, {400, C}, {600, C}, {700, C}}), 0);
  GestureRecognizer edge;
  EXPECT_EQ(grab_events(edge, {{0, O}, {33, O}, {66, O}, {400, C}, {600, C}, {666, C}}), 1);
}

TEST(GrabDetection, UnknownBreaksTheSequence) {
  GestureRecognizer rec;
  const auto O = raised_hand(HandState::Open);
  const auto C = raised_hand(HandState::Closed);
  const auto U = raised_hand(HandState::Unknown);
  EXPECT_EQ(grab_events(rec, {{0, O}, {33, O}, {66, O}, {99, C}, {132, U}, {165, C}, {198, C}, {231, C}}), 0);
  EXPECT_EQ(grab_events(rec, {{300, O}, {333, O}, {366, U}, {399, O}, {432, C}, {465, C}, {498, C}}), 0);
}

TEST(GrabDetection, ShortOpenRunIsNotAGrab) {
  GestureRecognizer rec;
  const auto O = raised_hand(HandState::Open);
  const auto C = raised_hand(HandState::Closed);
  EXPECT_EQ(grab_events(rec, {{0, C}, {33, C}, {66, C}, {99, O}, {132, O}, {165, C}, {198, C}, {231, C}}), 0);
}

TEST(GrabDetection, HoldingClosedDoesNotRefire) {
  GestureRecognizer rec;
  const auto O = raised_hand(HandState::Open);
  const auto C = raised_hand(HandState::Closed);
  std::vector<std::pair<std::int64_t, Pose>> frames = {{0, O}, {33, O}, {66, O}};
  for (int i = 0; i < 100; ++i) frames.push_back({99 + 33 * i, C});
  EXPECT_EQ(grab_events(rec, frames), 1);
}

TEST(GrabDetection, RateLimitOnRandomStreams) {
  Rng rng(99);
  for (int run = 0; run < 50; ++run) {
    GestureRecognizer rec;
    std::vector<std::int64_t> when;
    std::vector<std::pair<std::int64_t, Pose>> frames;
    std::int64_t t = 0;
    for (int i = 0; i < 600; ++i) {
      t += 10 + static_cast<std::int64_t>(rng.below(40));
      const auto h = static_cast<HandState>(rng.below(10) == 0 ? 0 : 1 + rng.below(2));
      frames.push_back({t, {.raise_right = rng.below(20) != 0, .hand_r = h}});
    }
    grab_events(rec, frames, &when);
    for (std::size_t i = 1; i < when.size(); ++i) ASSERT_GE(when[i] - when[i - 1], 1000);
  }
}

TEST(Absence, TimesOutAfterHalfASecond) {
  GestureRecognizer rec;
  rec.feed(make_skeleton(0, {}), 1000);
  EXPECT_TRUE(rec.poll(1500).empty());
  const auto evs = rec.poll(1501);
  ASSERT_EQ(evs.size(), 1u);
  EXPECT_EQ(evs[0], GestureEvent{gesture::Absent{}});
  EXPECT_FALSE(rec.present());
  EXPECT_TRUE(rec.poll(5000).empty());
  EXPECT_FALSE(rec.column().has_value());

  const auto back = rec.feed(make_skeleton(600, {.z = 1.0}), 6000);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], GestureEvent{gesture::Present{}});
  EXPECT_EQ(back[1], GestureEvent{gesture::ZoneChanged{Zone::AreaA}});
}

TEST(Absence, ExplicitAbsentMessage) {
  GestureRecognizer rec;
  EXPECT_TRUE(rec.mark_absent().empty());
  rec.feed(make_skeleton(0, {}), 0);
  EXPECT_EQ(rec.mark_absent().size(), 1u);
  EXPECT_TRUE(rec.mark_absent().empty());
}

TEST(Recognizer, IgnoresTimeTravelAndNonFinite) {
  GestureRecognizer rec;
  rec.feed(make_skeleton(100, {.z = 3.0}), 0);
  EXPECT_TRUE(rec.feed(make_skeleton(50, {.z = 1.0}), 33).empty());
  EXPECT_EQ(rec.zone(), Zone::AreaB);
  auto bad = make_skeleton(200, {.z = 1.0});
  bad.joint(Joint::Head).y = std::numeric_limits<double>::quiet_NaN();
  EXPECT_TRUE(rec.feed(bad, 66).empty());
  EXPECT_EQ(rec.zone(), Zone::AreaB);
}

}  // namespace
}  // namespace pixel
