#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace pixel {

// Each pixel is a red LED and a blue LED behind one diffuser; lighting both
// reads as purple.
enum class PixelColor : std::uint8_t { Off = 0, Red = 1, Blue = 2, Purple = 3 };

struct Channels {
  bool red = false;
  bool blue = false;
  friend constexpr bool operator==(Channels, Channels) = default;
};

constexpr PixelColor mix_channels(bool red_on, bool blue_on) {
  return static_cast<PixelColor>((red_on ? 1 : 0) | (blue_on ? 2 : 0));
}

constexpr Channels channels(PixelColor c) {
  const auto bits = static_cast<std::uint8_t>(c);
  return {(bits & 1) != 0, (bits & 2) != 0};
}

// O/R/B/P alphabet shared by the ASCII renderer, goldens and the session
// protocol.
constexpr char to_char(PixelColor c) {
  switch (c) {
    case PixelColor::Off: return 'O';
    case PixelColor::Red: return 'R';
    case PixelColor::Blue: return 'B';
    case PixelColor::Purple: return 'P';
  }
  return '?';
}

inline PixelColor color_from_char(char ch) {
  switch (ch) {
    case 'O': return PixelColor::Off;
    case 'R': return PixelColor::Red;
    case 'B': return PixelColor::Blue;
    case 'P': return PixelColor::Purple;
    default: break;
  }
  throw std::invalid_argument(std::string("invalid pixel character '") + ch + "'");
}

/// A board cell in column/row coordinates, origin top-left.
struct Cell {
  int col = 0;
  int row = 0;
  friend constexpr bool operator==(Cell, Cell) = default;
};

/// The 15x10 display. Cells are stored row-major from the top-left corner;
/// the LED codec and the ASCII form use the same order.
class Frame {
 public:
  static constexpr int kWidth = 15;
  static constexpr int kHeight = 10;
  static constexpr std::size_t kCells = kWidth * kHeight;

  Frame() { cells_.fill(PixelColor::Off); }

  static Frame filled(PixelColor c) {
    Frame f;
    f.cells_.fill(c);
    return f;
  }

  static constexpr bool in_bounds(int col, int row) {
    return col >= 0 && col < kWidth && row >= 0 && row < kHeight;
  }
  static constexpr bool in_bounds(Cell c) { return in_bounds(c.col, c.row); }

  static constexpr std::size_t index_of(int col, int row) {
    return static_cast<std::size_t>(row) * kWidth + static_cast<std::size_t>(col);
  }

  PixelColor at(int col, int row) const { return cells_[checked_index(col, row)]; }
  PixelColor at(Cell c) const { return at(c.col, c.row); }

  void set(int col, int row, PixelColor c) { cells_[checked_index(col, row)] = c; }
  void set(Cell cell, PixelColor c) { set(cell.col, cell.row, c); }

  /// Copy of this frame with one cell replaced.
  [[nodiscard]] Frame with(int col, int row, PixelColor c) const {
    Frame out = *this;
    out.set(col, row, c);
    return out;
  }

  const std::array<PixelColor, kCells>& cells() const { return cells_; }
  PixelColor operator[](std::size_t i) const { return cells_.at(i); }

  std::size_t count(PixelColor c) const {
    std::size_t n = 0;
    for (auto v : cells_) n += (v == c) ? 1 : 0;
    return n;
  }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  static std::size_t checked_index(int col, int row) {
    if (!in_bounds(col, row)) {
      throw std::out_of_range("frame cell (" + std::to_string(col) + "," +
                              std::to_string(row) + ") outside 15x10 board");
    }
    return index_of(col, row);
  }

  std::array<PixelColor, kCells> cells_{};
};

inline Frame frame_set(const Frame& f, int col, int row, PixelColor c) {
  return f.with(col, row, c);
}

/// 150 characters, row-major, no separators.
inline std::string to_pixel_string(const Frame& f) {
  std::string s;
  s.reserve(Frame::kCells);
  for (auto c : f.cells()) s.push_back(to_char(c));
  return s;
}

inline Frame frame_from_pixel_string(std::string_view s) {
  if (s.size() != Frame::kCells) {
    throw std::invalid_argument("pixel string must have 150 characters, got " +
                                std::to_string(s.size()));
  }
  Frame f;
  for (int row = 0; row < Frame::kHeight; ++row) {
    for (int col = 0; col < Frame::kWidth; ++col) {
      f.set(col, row, color_from_char(s[Frame::index_of(col, row)]));
    }
  }
  return f;
}

/// ASCII form: 10 newline-terminated lines of 15 characters.
inline std::string to_ascii(const Frame& f) {
  std::string s;
  s.reserve(Frame::kCells + Frame::kHeight);
  for (int row = 0; row < Frame::kHeight; ++row) {
    for (int col = 0; col < Frame::kWidth; ++col) s.push_back(to_char(f.at(col, row)));
    s.push_back('\n');
  }
  return s;
}

inline Frame frame_from_ascii(std::string_view text) {
  Frame f;
  int row = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = (nl == std::string_view::npos) ? text.size() : nl + 1;
    if (row >= Frame::kHeight) {
      if (line.empty()) continue;
      throw std::invalid_argument("ASCII frame has more than 10 rows");
    }
    if (line.size() != static_cast<std::size_t>(Frame::kWidth)) {
      throw std::invalid_argument("ASCII frame row " + std::to_string(row) + " has " +
                                  std::to_string(line.size()) + " characters, expected 15");
    }
    for (int col = 0; col < Frame::kWidth; ++col) {
      f.set(col, row, color_from_char(line[static_cast<std::size_t>(col)]));
    }
    ++row;
  }
  if (row != Frame::kHeight) {
    throw std::invalid_argument("ASCII frame has " + std::to_string(row) + " rows, expected 10");
  }
  return f;
}

enum class Direction : std::uint8_t { Up, Down, Left, Right };

constexpr Direction opposite(Direction d) {
  switch (d) {
    case Direction::Up: return Direction::Down;
    case Direction::Down: return Direction::Up;
    case Direction::Left: return Direction::Right;
    case Direction::Right: return Direction::Left;
  }
  return d;
}

constexpr Cell step(Cell c, Direction d) {
  switch (d) {
    case Direction::Up: return {c.col, c.row - 1};
    case Direction::Down: return {c.col, c.row + 1};
    case Direction::Left: return {c.col - 1, c.row};
    case Direction::Right: return {c.col + 1, c.row};
  }
  return c;
}

constexpr std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Up: return "up";
    case Direction::Down: return "down";
    case Direction::Left: return "left";
    case Direction::Right: return "right";
  }
  return "?";
}

enum class Side : std::uint8_t { Left, Right };

constexpr std::string_view to_string(Side s) { return s == Side::Left ? "left" : "right"; }

// Sensor space in meters: x to the user's right, y up, z away from the sensor.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

enum class HandState : std::uint8_t { Unknown, Open, Closed };

enum class Joint : std::uint8_t {
  Head, Spine, ShoulderL, ShoulderR, ElbowL, ElbowR, WristL, WristR
};
inline constexpr std::size_t kJointCount = 8;

inline constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "head", "spine", "shoulder_l", "shoulder_r", "elbow_l", "elbow_r", "wrist_l", "wrist_r"};

struct SkeletonFrame {
  std::int64_t t_ms = 0;
  std::array<Vec3, kJointCount> joints{};
  HandState hand_l = HandState::Unknown;
  HandState hand_r = HandState::Unknown;

  Vec3& joint(Joint j) { return joints[static_cast<std::size_t>(j)]; }
  const Vec3& joint(Joint j) const { return joints[static_cast<std::size_t>(j)]; }

  HandState hand(Side s) const { return s == Side::Left ? hand_l : hand_r; }
  const Vec3& shoulder(Side s) const { return joint(s == Side::Left ? Joint::ShoulderL : Joint::ShoulderR); }
  const Vec3& elbow(Side s) const { return joint(s == Side::Left ? Joint::ElbowL : Joint::ElbowR); }
  const Vec3& wrist(Side s) const { return joint(s == Side::Left ? Joint::WristL : Joint::WristR); }

  friend bool operator==(const SkeletonFrame&, const SkeletonFrame&) = default;
};

}  // namespace pixel
