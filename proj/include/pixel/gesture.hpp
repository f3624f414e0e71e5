#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

#include "pixel/core.hpp"

namespace pixel {

/// AreaA is the near game zone, AreaB the far attract zone.
enum class Zone : std::uint8_t { AreaA, AreaB, OutOfRange };

constexpr std::string_view to_string(Zone z) {
  switch (z) {
    case Zone::AreaA: return "A";
    case Zone::AreaB: return "B";
    case Zone::OutOfRange: return "out";
  }
  return "?";
}

struct ZoneConfig {
  double z_min = 0.5;
  double z_max = 4.5;
  double threshold = 2.5;
  double hysteresis = 0.15;

  bool valid() const {
    return z_min < threshold - hysteresis && threshold + hysteresis < z_max && hysteresis >= 0.0;
  }
};

/// Depth to zone with a dead band around the A/B threshold. Entering from
/// OutOfRange there is no previous side to hold, so the bare threshold decides.
inline Zone classify_zone(double z, Zone prev, const ZoneConfig& cfg = {}) {
  if (!(z >= cfg.z_min && z <= cfg.z_max)) return Zone::OutOfRange;
  switch (prev) {
    case Zone::AreaA: return z > cfg.threshold + cfg.hysteresis ? Zone::AreaB : Zone::AreaA;
    case Zone::AreaB: return z < cfg.threshold - cfg.hysteresis ? Zone::AreaA : Zone::AreaB;
    case Zone::OutOfRange: break;
  }
  return z < cfg.threshold ? Zone::AreaA : Zone::AreaB;
}

/// Quantized wrist-minus-elbow direction in the sensor's x/y plane. Vectors
/// shorter than `dead_zone` are jitter. On the diagonal horizontal wins.
inline std::optional<Direction> forearm_direction(const Vec3& elbow, const Vec3& wrist,
                                                  double dead_zone = 0.12) {
  const double dx = wrist.x - elbow.x;
  const double dy = wrist.y - elbow.y;
  if (std::hypot(dx, dy) < dead_zone) return std::nullopt;
  if (std::abs(dx) >= std::abs(dy)) return dx > 0 ? Direction::Right : Direction::Left;
  return dy > 0 ? Direction::Up : Direction::Down;
}

/// Maps the user's lateral position in [-1.5, 1.5] m onto board columns 0..14.
inline int user_column(double x) {
  const double clamped = std::clamp(x, -1.5, 1.5);
  return static_cast<int>(std::lround((clamped + 1.5) / 3.0 * 14.0));
}

/// The recognizer follows one person: the body closest to the sensor.
inline const SkeletonFrame* nearest_body(std::span<const SkeletonFrame> bodies) {
  const SkeletonFrame* best = nullptr;
  for (const auto& b : bodies) {
    if (best == nullptr || b.joint(Joint::Spine).z < best->joint(Joint::Spine).z) best = &b;
  }
  return best;
}

namespace gesture {
struct Present {
  friend bool operator==(Present, Present) = default;
};
struct Absent {
  friend bool operator==(Absent, Absent) = default;
};
struct ZoneChanged {
  Zone zone;
  friend bool operator==(ZoneChanged, ZoneChanged) = default;
};
struct Raised {
  Side side;
  friend bool operator==(Raised, Raised) = default;
};
struct Lowered {
  friend bool operator==(Lowered, Lowered) = default;
};
struct Grab {
  friend bool operator==(Grab, Grab) = default;
};
struct DirectionUpdate {
  Direction direction;
  friend bool operator==(DirectionUpdate, DirectionUpdate) = default;
};
}  // namespace gesture

using GestureEvent = std::variant<gesture::Present, gesture::Absent, gesture::ZoneChanged,
                                  gesture::Raised, gesture::Lowered, gesture::Grab,
                                  gesture::DirectionUpdate>;

struct RecognizerConfig {
  ZoneConfig zone;
  double raise_margin_m = 0.10;
  int raise_debounce_frames = 3;
  int grab_run_frames = 3;
  std::int64_t grab_window_ms = 600;
  std::int64_t grab_cooldown_ms = 1000;
  double forearm_dead_zone_m = 0.12;
  std::int64_t absent_after_ms = 500;
};

/// Turns a skeleton stream into gesture events plus the continuous controls
/// (zone, user column) the engine reads every tick.
///
/// Time has two sources: skeleton `t_ms` drives the hand-state timing (grab
/// window, cooldown), while `arrival_ms` is the engine clock at which the
/// frame was delivered and drives absence detection.
class GestureRecognizer {
 public:
  explicit GestureRecognizer(RecognizerConfig cfg = {}) : cfg_(cfg) {
    if (!cfg_.zone.valid()) throw std::invalid_argument("invalid zone configuration");
    if (cfg_.raise_debounce_frames < 1 || cfg_.grab_run_frames < 1) {
      throw std::invalid_argument("debounce lengths must be positive");
    }
  }

  std::vector<GestureEvent> feed(const SkeletonFrame& skel, std::int64_t arrival_ms) {
    std::vector<GestureEvent> out;
    if (!finite(skel)) return out;
    if (last_t_ms_ && skel.t_ms < *last_t_ms_) return out;
    last_t_ms_ = skel.t_ms;
    last_arrival_ms_ = arrival_ms;

    if (!present_) {
      present_ = true;
      out.emplace_back(gesture::Present{});
    }

    const auto& spine = skel.joint(Joint::Spine);
    column_ = user_column(spine.x);
    const Zone z = classify_zone(spine.z, zone_, cfg_.zone);
    if (z != zone_) {
      zone_ = z;
      out.emplace_back(gesture::ZoneChanged{z});
    }

    update_raised(skel, out);
    update_hand(Side::Left, skel, out);
    update_hand(Side::Right, skel, out);

    if (control_side_) {
      const auto dir = forearm_direction(skel.elbow(*control_side_), skel.wrist(*control_side_),
                                         cfg_.forearm_dead_zone_m);
      if (dir && dir != last_direction_) {
        last_direction_ = dir;
        out.emplace_back(gesture::DirectionUpdate{*dir});
      }
    }
    return out;
  }

  /// Emits Absent once no skeleton has arrived for longer than the timeout.
  std::vector<GestureEvent> poll(std::int64_t now_ms) {
    std::vector<GestureEvent> out;
    if (present_ && now_ms - last_arrival_ms_ > cfg_.absent_after_ms) {
      lose_user();
      out.emplace_back(gesture::Absent{});
    }
    return out;
  }

  /// The input source reported that nobody is tracked.
  std::vector<GestureEvent> mark_absent() {
    std::vector<GestureEvent> out;
    if (present_) {
      lose_user();
      out.emplace_back(gesture::Absent{});
    }
    return out;
  }

  bool present() const { return present_; }
  Zone zone() const { return zone_; }
  std::optional<int> column() const { return present_ ? column_ : std::nullopt; }
  std::optional<Side> raised() const { return raised_; }
  std::optional<Side> control_side() const { return control_side_; }
  std::optional<std::int64_t> grab_cooldown_until() const { return cooldown_until_; }
  int above_count(Side s) const { return above_[index(s)]; }
  int below_count() const { return below_; }
  const RecognizerConfig& config() const { return cfg_; }

 private:
  struct HandTrack {
    int open_run = 0;
    int closed_run = 0;
    bool armed = false;  // a full open run preceded the current closed run
    std::int64_t last_open_ms = 0;
  };

  static std::size_t index(Side s) { return s == Side::Left ? 0 : 1; }

  static bool finite(const SkeletonFrame& s) {
    return std::all_of(s.joints.begin(), s.joints.end(), [](const Vec3& v) {
      return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
    });
  }

  void update_raised(const SkeletonFrame& skel, std::vector<GestureEvent>& out) {
    const int n = cfg_.raise_debounce_frames;
    for (Side s : {Side::Left, Side::Right}) {
      const bool above = skel.wrist(s).y > skel.shoulder(s).y + cfg_.raise_margin_m;
      auto& count = above_[index(s)];
      count = above ? std::min(count + 1, n) : 0;
    }

    if (!raised_) {
      const bool right = above_[index(Side::Right)] == n;
      const bool left = above_[index(Side::Left)] == n;
      if (right || left) {
        const Side side = right ? Side::Right : Side::Left;
        raised_ = side;
        control_side_ = side;
        below_ = 0;
        last_direction_.reset();
        out.emplace_back(gesture::Raised{side});
      }
      return;
    }

    if (above_[index(*raised_)] == 0) {
      below_ = std::min(below_ + 1, n);
      if (below_ == n) {
        raised_.reset();
        below_ = 0;
        out.emplace_back(gesture::Lowered{});
      }
    } else {
      below_ = 0;
    }
  }

  void update_hand(Side side, const SkeletonFrame& skel, std::vector<GestureEvent>& out) {
    const int n = cfg_.grab_run_frames;
    auto& h = hands_[index(side)];
    switch (skel.hand(side)) {
      case HandState::Unknown:
        h = HandTrack{};
        return;
      case HandState::Open:
        h.armed = false;
        h.closed_run = 0;
        h.open_run = std::min(h.open_run + 1, n);
        h.last_open_ms = skel.t_ms;
        return;
      case HandState::Closed:
        break;
    }
    if (h.open_run >= n) h.armed = true;
    h.open_run = 0;
    if (!h.armed) return;
    h.closed_run = std::min(h.closed_run + 1, n);
    if (h.closed_run < n) return;

    h.armed = false;
    const bool in_window = skel.t_ms - h.last_open_ms <= cfg_.grab_window_ms;
    const bool cooling = cooldown_until_ && skel.t_ms < *cooldown_until_;
    if (raised_ == side && in_window && !cooling) {
      cooldown_until_ = skel.t_ms + cfg_.grab_cooldown_ms;
      out.emplace_back(gesture::Grab{});
    }
  }

  void lose_user() {
    present_ = false;
    zone_ = Zone::OutOfRange;
    raised_.reset();
    control_side_.reset();
    last_direction_.reset();
    above_ = {0, 0};
    below_ = 0;
    hands_ = {};
    column_.reset();
  }

  RecognizerConfig cfg_;
  bool present_ = false;
  Zone zone_ = Zone::OutOfRange;
  std::optional<std::int64_t> last_t_ms_;
  std::int64_t last_arrival_ms_ = 0;
  std::optional<int> column_;
  std::array<int, 2> above_{0, 0};
  int below_ = 0;
  std::optional<Side> raised_;
  // Arm that steers: the most recently raised one, kept after it drops so
  // that pointing down does not hand control away.
  std::optional<Side> control_side_;
  std::optional<Direction> last_direction_;
  std::array<HandTrack, 2> hands_{};
  std::optional<std::int64_t> cooldown_until_;
};

}  // namespace pixel
