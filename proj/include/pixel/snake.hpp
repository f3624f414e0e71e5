#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <iterator>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pixel/core.hpp"
#include "pixel/rng.hpp"

namespace pixel {

struct SpeedSchedule {
  std::int64_t base_ms = 600;
  std::int64_t step_ms = 25;
  std::int64_t floor_ms = 150;

  std::int64_t interval_ms(int score) const {
    return std::max(floor_ms, base_ms - step_ms * static_cast<std::int64_t>(score));
  }
  bool valid() const { return floor_ms > 0 && step_ms >= 0 && base_ms >= floor_ms; }
};

struct SnakeState {
  std::deque<Cell> body;  // head first
  Direction heading = Direction::Right;
  std::optional<Direction> pending;
  std::optional<Cell> food;  // empty only once the board is full
  int score = 0;
  std::int64_t accumulator_ms = 0;
  bool alive = true;
  bool won = false;

  Cell head() const { return body.front(); }
  bool occupies(Cell c) const { return std::find(body.begin(), body.end(), c) != body.end(); }

  friend bool operator==(const SnakeState&, const SnakeState&) = default;
};

enum class SnakeEvent : std::uint8_t { Moved, Ate, Died, Won };

/// Places food on a uniformly chosen free cell (one rng draw over the
/// row-major free list). Returns false when no free cell exists.
inline bool spawn_food(SnakeState& s, Rng& rng) {
  std::vector<Cell> free;
  free.reserve(Frame::kCells);
  for (int row = 0; row < Frame::kHeight; ++row) {
    for (int col = 0; col < Frame::kWidth; ++col) {
      if (!s.occupies({col, row})) free.push_back({col, row});
    }
  }
  if (free.empty()) {
    s.food.reset();
    return false;
  }
  s.food = free[rng.below(free.size())];
  return true;
}

inline SnakeState new_game(Rng& rng) {
  SnakeState s;
  s.body = {{7, 5}, {6, 5}, {5, 5}};
  spawn_food(s, rng);
  return s;
}

/// Queues a turn for the next move. Reversing onto the neck is ignored.
inline SnakeState apply_direction(SnakeState s, Direction d) {
  if (s.alive && d != opposite(s.heading)) s.pending = d;
  return s;
}

struct SnakeTick {
  SnakeState state;
  std::vector<SnakeEvent> events;
};

/// Advances by dt_ms, moving once per schedule interval. Walls kill, and so
/// does the body except for the tail cell that is vacated on the same move.
/// A dead or won game is frozen.
inline SnakeTick snake_tick(SnakeState s, std::int64_t dt_ms, const SpeedSchedule& schedule, Rng& rng) {
  SnakeTick out{std::move(s), {}};
  auto& st = out.state;
  if (!st.alive) return out;
  st.accumulator_ms += dt_ms;
  while (st.alive && st.accumulator_ms >= schedule.interval_ms(st.score)) {
    st.accumulator_ms -= schedule.interval_ms(st.score);
    if (st.pending) {
      st.heading = *st.pending;
      st.pending.reset();
    }
    const Cell next = step(st.head(), st.heading);
    const bool eats = st.food && next == *st.food;
    const auto blocking_end = eats ? st.body.end() : std::prev(st.body.end());
    const bool hits_body = std::find(st.body.begin(), blocking_end, next) != blocking_end;
    if (!Frame::in_bounds(next) || hits_body) {
      st.alive = false;
      out.events.push_back(SnakeEvent::Died);
      break;
    }
    st.body.push_front(next);
    if (eats) {
      ++st.score;
      out.events.push_back(SnakeEvent::Ate);
      if (!spawn_food(st, rng)) {
        st.alive = false;
        st.won = true;
        out.events.push_back(SnakeEvent::Won);
      }
    } else {
      st.body.pop_back();
      out.events.push_back(SnakeEvent::Moved);
    }
  }
  return out;
}

/// Head purple, body blue, food red.
inline Frame render_snake(const SnakeState& s, bool show_food = true) {
  Frame f;
  if (show_food && s.food) f.set(*s.food, PixelColor::Red);
  for (std::size_t i = 1; i < s.body.size(); ++i) f.set(s.body[i], PixelColor::Blue);
  if (!s.body.empty()) f.set(s.body.front(), PixelColor::Purple);
  return f;
}

// ---------------------------------------------------------------------------
// Score scroll

struct GlyphFont {
  static constexpr int kGlyphWidth = 3;
  static constexpr int kGlyphHeight = 5;
  static constexpr int kSpacing = 1;

  // Row bitmasks, bit 2 = leftmost column.
  std::array<std::array<std::uint8_t, kGlyphHeight>, 10> digits{{
      {0b111, 0b101, 0b101, 0b101, 0b111},  // 0
      {0b010, 0b110, 0b010, 0b010, 0b111},  // 1
      {0b111, 0b001, 0b111, 0b100, 0b111},  // 2
      {0b111, 0b001, 0b111, 0b001, 0b111},  // 3
      {0b101, 0b101, 0b111, 0b001, 0b001},  // 4
      {0b111, 0b100, 0b111, 0b001, 0b111},  // 5
      {0b111, 0b100, 0b111, 0b101, 0b111},  // 6
      {0b111, 0b001, 0b010, 0b010, 0b010},  // 7
      {0b111, 0b101, 0b111, 0b101, 0b111},  // 8
      {0b111, 0b101, 0b111, 0b001, 0b111},  // 9
  }};

  bool lit(int digit, int col, int row) const {
    return (digits.at(static_cast<std::size_t>(digit))[static_cast<std::size_t>(row)] >>
            (kGlyphWidth - 1 - col)) & 1U;
  }

  static int text_width(int digit_count) {
    return kGlyphWidth * digit_count + kSpacing * (digit_count - 1);
  }
};

/// Columns of the rendered score, left to right; each entry is a 5-row mask.
inline std::vector<std::array<bool, GlyphFont::kGlyphHeight>> rasterize_score(int score,
                                                                             const GlyphFont& font) {
  if (score < 0) throw std::invalid_argument("score must be non-negative");
  const std::string text = std::to_string(score);
  std::vector<std::array<bool, GlyphFont::kGlyphHeight>> cols;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i > 0) cols.push_back({});
    const int digit = text[i] - '0';
    for (int c = 0; c < GlyphFont::kGlyphWidth; ++c) {
      std::array<bool, GlyphFont::kGlyphHeight> col{};
      for (int r = 0; r < GlyphFont::kGlyphHeight; ++r) col[static_cast<std::size_t>(r)] = font.lit(digit, c, r);
      cols.push_back(col);
    }
  }
  return cols;
}

/// The score in red, entering from the right edge and leaving on the left,
/// one column per frame. Frame i has the text's left edge at column 15 - i,
/// so the first frame is blank and there are 15 + text_width frames.
inline std::vector<Frame> score_scroll_frames(int score, const GlyphFont& font = {}) {
  const auto cols = rasterize_score(score, font);
  const int width = static_cast<int>(cols.size());
  const int row0 = (Frame::kHeight - GlyphFont::kGlyphHeight) / 2;
  std::vector<Frame> frames;
  frames.reserve(static_cast<std::size_t>(Frame::kWidth + width));
  for (int i = 0; i < Frame::kWidth + width; ++i) {
    Frame f;
    const int left = Frame::kWidth - i;
    for (int c = 0; c < width; ++c) {
      const int x = left + c;
      if (x < 0 || x >= Frame::kWidth) continue;
      for (int r = 0; r < GlyphFont::kGlyphHeight; ++r) {
        if (cols[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)]) f.set(x, row0 + r, PixelColor::Red);
      }
    }
    frames.push_back(f);
  }
  return frames;
}

}  // namespace pixel
