#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pixel/core.hpp"
#include "pixel/protocol.hpp"
#include "pixel/rng.hpp"

namespace pixel::testing {

/// A standing person described by a few knobs, expanded into joints.
struct Pose {
  double x = 0.0;
  double z = 3.0;
  bool raise_left = false;
  bool raise_right = false;
  Direction point = Direction::Up;  // forearm direction of a raised arm
  HandState hand_l = HandState::Open;
  HandState hand_r = HandState::Open;
};

inline void place_arm(SkeletonFrame& s, Side side, const Pose& p) {
  const double sx = p.x + (side == Side::Left ? -0.2 : 0.2);
  const double z = p.z;
  const bool raised = side == Side::Left ? p.raise_left : p.raise_right;
  Vec3 elbow{sx, 1.10, z};
  Vec3 wrist{sx, 0.85, z};
  if (raised) {
    switch (p.point) {
      case Direction::Up: elbow = {sx, 1.55, z}; wrist = {sx, 1.85, z}; break;
      case Direction::Right: elbow = {sx, 1.60, z}; wrist = {sx + 0.30, 1.62, z}; break;
      case Direction::Left: elbow = {sx, 1.60, z}; wrist = {sx - 0.30, 1.62, z}; break;
      case Direction::Down: elbow = {sx, 1.95, z}; wrist = {sx, 1.65, z}; break;
    }
  }
  s.joint(side == Side::Left ? Joint::ElbowL : Joint::ElbowR) = elbow;
  s.joint(side == Side::Left ? Joint::WristL : Joint::WristR) = wrist;
}

inline SkeletonFrame make_skeleton(std::int64_t t_ms, const Pose& p) {
  SkeletonFrame s;
  s.t_ms = t_ms;
  s.joint(Joint::Head) = {p.x, 1.65, p.z};
  s.joint(Joint::Spine) = {p.x, 1.10, p.z};
  s.joint(Joint::ShoulderL) = {p.x - 0.2, 1.40, p.z};
  s.joint(Joint::ShoulderR) = {p.x + 0.2, 1.40, p.z};
  place_arm(s, Side::Left, p);
  place_arm(s, Side::Right, p);
  s.hand_l = p.hand_l;
  s.hand_r = p.hand_r;
  return s;
}

inline InputMessage skeleton_input(std::int64_t t_ms, const Pose& p) {
  return msg::Skeleton{make_skeleton(t_ms, p)};
}

inline Frame random_frame(Rng& rng) {
  Frame f;
  for (int row = 0; row < Frame::kHeight; ++row) {
    for (int col = 0; col < Frame::kWidth; ++col) f.set(col, row, static_cast<PixelColor>(rng.below(4)));
  }
  return f;
}

}  // namespace pixel::testing
