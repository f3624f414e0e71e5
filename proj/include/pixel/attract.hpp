#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "pixel/core.hpp"
#include "pixel/rng.hpp"

namespace pixel {

// ---------------------------------------------------------------------------
// Sprites

struct Sprite {
  static constexpr int kMaxWidth = 10;
  static constexpr int kMaxHeight = 10;

  std::string name;
  int width = 0;
  int height = 0;
  std::vector<PixelColor> pixels;  // row-major
  int anchor = 0;                  // bitmap column that tracks the user

  PixelColor at(int col, int row) const {
    return pixels.at(static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                     static_cast<std::size_t>(col));
  }
};

/// Sprite asset text: one row per line, O/R/B/P, all rows equal length.
/// The anchor defaults to the middle column.
inline Sprite parse_sprite(std::string name, std::string_view text) {
  Sprite s;
  s.name = std::move(name);
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (pos >= text.size()) break;
      throw std::invalid_argument("sprite '" + s.name + "': blank row");
    }
    if (s.height == 0) {
      s.width = static_cast<int>(line.size());
    } else if (static_cast<int>(line.size()) != s.width) {
      throw std::invalid_argument("sprite '" + s.name + "': rows differ in length");
    }
    for (char ch : line) s.pixels.push_back(color_from_char(ch));
    ++s.height;
  }
  if (s.height == 0) throw std::invalid_argument("sprite '" + s.name + "': empty bitmap");
  if (s.width > Sprite::kMaxWidth || s.height > Sprite::kMaxHeight) {
    throw std::invalid_argument("sprite '" + s.name + "': larger than 10x10");
  }
  s.anchor = s.width / 2;
  return s;
}

inline std::vector<Sprite> default_sprites() {
  static constexpr std::string_view kSquid =
      "OOOPPOOO\n"
      "OOPPPPOO\n"
      "OPPPPPPO\n"
      "PPOPPOPP\n"
      "PPPPPPPP\n"
      "OOPOOPOO\n"
      "OPOPPOPO\n"
      "POPOOPOP\n";
  static constexpr std::string_view kCrab =
      "OROOOOORO\n"
      "OOROOOROO\n"
      "ORRRRRRRO\n"
      "RRBRRRBRR\n"
      "RRRRRRRRR\n"
      "RORRRRROR\n"
      "ROROOOROR\n";
  return {parse_sprite("squid", kSquid), parse_sprite("crab", kCrab)};
}

// ---------------------------------------------------------------------------
// Modified Game of Life

struct GolConfig {
  int n = 3;  // at most n border cells erased per generation
  int m = 5;  // at most m cells reseeded into an empty interior
  PixelColor cell_color = PixelColor::Blue;
  int step_period = 5;  // engine ticks per generation

  bool valid() const { return n >= 0 && m >= 1 && step_period >= 1; }
};

class GolGrid {
 public:
  static constexpr int kWidth = Frame::kWidth;
  static constexpr int kHeight = Frame::kHeight;
  static constexpr std::size_t kBorderCells = 46;
  static constexpr std::size_t kInteriorCells = 104;

  static constexpr bool is_border(int col, int row) {
    return row == 0 || row == kHeight - 1 || col == 0 || col == kWidth - 1;
  }

  bool get(int col, int row) const { return cells_[checked(col, row)]; }
  bool get(Cell c) const { return get(c.col, c.row); }
  void set(int col, int row, bool colored) { cells_[checked(col, row)] = colored; }
  void set(Cell c, bool colored) { set(c.col, c.row, colored); }

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), true));
  }
  std::size_t count_border() const {
    std::size_t n = 0;
    for (const auto& c : border_cells()) n += get(c) ? 1 : 0;
    return n;
  }
  std::size_t count_interior() const { return count() - count_border(); }

  /// Border and interior cells, each in row-major order. The GoL random draws
  /// index into these lists.
  static const std::array<Cell, kBorderCells>& border_cells() {
    static const auto cells = collect<kBorderCells>(true);
    return cells;
  }
  static const std::array<Cell, kInteriorCells>& interior_cells() {
    static const auto cells = collect<kInteriorCells>(false);
    return cells;
  }

  friend bool operator==(const GolGrid&, const GolGrid&) = default;

 private:
  static std::size_t checked(int col, int row) {
    if (!Frame::in_bounds(col, row)) throw std::out_of_range("GoL cell outside board");
    return Frame::index_of(col, row);
  }

  template <std::size_t N>
  static std::array<Cell, N> collect(bool border) {
    std::array<Cell, N> out{};
    std::size_t i = 0;
    for (int row = 0; row < kHeight; ++row) {
      for (int col = 0; col < kWidth; ++col) {
        if (is_border(col, row) == border) out[i++] = Cell{col, row};
      }
    }
    return out;
  }

  std::array<bool, Frame::kCells> cells_{};
};

inline int colored_neighbors(const GolGrid& g, int col, int row) {
  int n = 0;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      const int c = col + dc;
      const int r = row + dr;
      if (Frame::in_bounds(c, r) && g.get(c, r)) ++n;
    }
  }
  return n;
}

/// One generation of the installation's Game of Life variant.
///
///  1. An interior cell is colored iff exactly 3 of its 8 neighbors were
///     colored in `old`; its own previous state does not matter.
///  2. Border cells carry over from `old`, then k = uniform{0..n} distinct
///     border cells are erased.
///  3. If phase 1 colored nothing, j = uniform{1..m} interior cells are drawn
///     with replacement and colored.
///
/// RNG call order: k, then one draw per erased cell (partial Fisher-Yates
/// over the row-major border list), then j and one draw per reseed (index
/// into the row-major interior list). Phase 3 draws only when it fires.
/// Phase 1 alone: the neighbor rule on the interior, border left blank.
inline GolGrid gol_neighbor_phase(const GolGrid& old) {
  GolGrid next;
  for (const auto& c : GolGrid::interior_cells()) next.set(c, colored_neighbors(old, c.col, c.row) == 3);
  return next;
}

inline GolGrid gol_step(const GolGrid& old, const GolConfig& cfg, Rng& rng) {
  GolGrid next = gol_neighbor_phase(old);
  const bool none_colored = next.count() == 0;

  for (const auto& c : GolGrid::border_cells()) next.set(c, old.get(c));
  auto border = GolGrid::border_cells();
  const int erase = rng.uniform_int(0, std::max(cfg.n, 0));
  for (int i = 0; i < erase && i < static_cast<int>(border.size()); ++i) {
    const auto pick = static_cast<std::size_t>(i) + rng.below(border.size() - static_cast<std::size_t>(i));
    std::swap(border[static_cast<std::size_t>(i)], border[pick]);
    next.set(border[static_cast<std::size_t>(i)], false);
  }

  if (none_colored) {
    const auto& interior = GolGrid::interior_cells();
    const int seeds = rng.uniform_int(1, std::max(cfg.m, 1));
    for (int i = 0; i < seeds; ++i) next.set(interior[rng.below(interior.size())], true);
  }
  return next;
}

/// Fresh automaton: each interior cell colored with probability 0.3, border blank.
inline GolGrid random_gol_grid(Rng& rng, double density = 0.3) {
  GolGrid g;
  for (const auto& c : GolGrid::interior_cells()) g.set(c, rng.chance(density));
  return g;
}

// ---------------------------------------------------------------------------
// Attract state

struct CreatureContent {
  std::size_t sprite = 0;
  int col = 0;      // leftmost bitmap column on the board
  int cadence = 0;  // ticks since the last move, saturating at the follow period
  friend bool operator==(const CreatureContent&, const CreatureContent&) = default;
};

struct GolContent {
  GolGrid grid;
  int ticks = 0;  // ticks since the last generation
  friend bool operator==(const GolContent&, const GolContent&) = default;
};

struct AttractState {
  static constexpr int kFollowPeriod = 3;

  std::vector<Sprite> catalog;
  GolConfig gol;
  std::variant<CreatureContent, GolContent> content;

  bool showing_gol() const { return std::holds_alternative<GolContent>(content); }
  bool showing_creature() const { return std::holds_alternative<CreatureContent>(content); }

  /// Content slot in the cycle: sprite index, or catalog.size() for GoL.
  std::size_t slot() const {
    if (const auto* c = std::get_if<CreatureContent>(&content)) return c->sprite;
    return catalog.size();
  }
};

inline int max_creature_col(const Sprite& s) { return Frame::kWidth - s.width; }

inline CreatureContent centered_creature(const std::vector<Sprite>& catalog, std::size_t sprite) {
  const auto& s = catalog.at(sprite);
  return CreatureContent{sprite, max_creature_col(s) / 2, 0};
}

inline AttractState make_attract(std::vector<Sprite> catalog, GolConfig gol = {}) {
  if (catalog.empty()) throw std::invalid_argument("attract catalog needs at least one sprite");
  if (!gol.valid()) throw std::invalid_argument("invalid GoL configuration");
  AttractState st;
  st.catalog = std::move(catalog);
  st.gol = gol;
  st.content = centered_creature(st.catalog, 0);
  return st;
}

/// Switches to a different catalog entry (sprite or GoL) chosen uniformly;
/// the current one is never picked. One rng draw selects, then GoL seeding
/// draws once per interior cell.
inline AttractState cycle_content(AttractState state, Rng& rng) {
  const std::size_t slots = state.catalog.size() + 1;
  const std::size_t current = state.slot();
  std::size_t pick = static_cast<std::size_t>(rng.below(slots - 1));
  if (pick >= current) ++pick;
  if (pick == state.catalog.size()) {
    state.content = GolContent{random_gol_grid(rng), 0};
  } else {
    state.content = centered_creature(state.catalog, pick);
  }
  return state;
}

/// Moves the creature one column toward the user at most every
/// kFollowPeriod calls, keeping the bitmap on the board.
inline AttractState creature_follow(AttractState state, int target_col) {
  auto* c = std::get_if<CreatureContent>(&state.content);
  if (c == nullptr) return state;
  const auto& sprite = state.catalog.at(c->sprite);
  const int hi = max_creature_col(sprite);
  const int desired = std::clamp(target_col - sprite.anchor, 0, hi);
  c->col = std::clamp(c->col, 0, hi);
  c->cadence = std::min(c->cadence + 1, AttractState::kFollowPeriod);
  if (c->cadence == AttractState::kFollowPeriod && c->col != desired) {
    c->col += (desired > c->col) ? 1 : -1;
    c->cadence = 0;
  }
  return state;
}

/// Advances the GoL clock; a new generation every gol.step_period ticks.
inline AttractState gol_tick(AttractState state, Rng& rng) {
  auto* g = std::get_if<GolContent>(&state.content);
  if (g == nullptr) return state;
  if (++g->ticks >= state.gol.step_period) {
    g->ticks = 0;
    g->grid = gol_step(g->grid, state.gol, rng);
  }
  return state;
}

inline Frame render_gol(const GolGrid& grid, PixelColor color) {
  Frame f;
  for (int row = 0; row < Frame::kHeight; ++row) {
    for (int col = 0; col < Frame::kWidth; ++col) {
      if (grid.get(col, row)) f.set(col, row, color);
    }
  }
  return f;
}

/// Blits a sprite with its left edge at `col`, vertically centered. Off
/// pixels are transparent and anything past the board edge is clipped.
inline Frame render_sprite(const Sprite& s, int col, Frame f = {}) {
  const int row0 = (Frame::kHeight - s.height) / 2;
  for (int r = 0; r < s.height; ++r) {
    for (int c = 0; c < s.width; ++c) {
      const auto px = s.at(c, r);
      if (px != PixelColor::Off && Frame::in_bounds(col + c, row0 + r)) f.set(col + c, row0 + r, px);
    }
  }
  return f;
}

inline Frame render_attract(const AttractState& state) {
  if (const auto* g = std::get_if<GolContent>(&state.content)) {
    return render_gol(g->grid, state.gol.cell_color);
  }
  const auto& c = std::get<CreatureContent>(state.content);
  return render_sprite(state.catalog.at(c.sprite), c.col);
}

}  // namespace pixel
