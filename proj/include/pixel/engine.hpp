#pragma once

#include <cstdint>
#include <deque>
#include <iterator>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "pixel/attract.hpp"
#include "pixel/core.hpp"
#include "pixel/gesture.hpp"
#include "pixel/protocol.hpp"
#include "pixel/rng.hpp"
#include "pixel/snake.hpp"

namespace pixel {

enum class ModeKind : std::uint8_t { AttractCreature, AttractGol, SnakeIdle, SnakePlay, ScoreScroll };

constexpr std::string_view to_string(ModeKind m) {
  switch (m) {
    case ModeKind::AttractCreature: return "attract_creature";
    case ModeKind::AttractGol: return "attract_gol";
    case ModeKind::SnakeIdle: return "snake_idle";
    case ModeKind::SnakePlay: return "snake_play";
    case ModeKind::ScoreScroll: return "score_scroll";
  }
  return "?";
}

struct EngineMode {
  ModeKind kind = ModeKind::AttractCreature;
  int remaining = 0;  // score-scroll frames still to show
  friend bool operator==(EngineMode, EngineMode) = default;
};

struct EngineConfig {
  std::int64_t tick_ms = 33;
  std::uint64_t seed = 0;
  RecognizerConfig recognizer;
  GolConfig gol;
  SpeedSchedule speed;
  std::int64_t absence_timeout_ms = 3000;
  int idle_blink_ticks = 15;
  std::vector<Sprite> sprites = default_sprites();
};

/// Continuous controls sampled once per tick alongside the discrete events.
struct Controls {
  std::optional<int> user_column;
};

/// The interaction state machine. Single-threaded; every random draw goes
/// through the one Rng it owns, in tick order, so a seed plus the per-tick
/// inputs fully determine the frame stream.
class Engine {
 public:
  explicit Engine(EngineConfig cfg)
      : cfg_(std::move(cfg)),
        rng_(cfg_.seed),
        recognizer_(cfg_.recognizer),
        attract_(make_attract(cfg_.sprites, cfg_.gol)) {
    if (cfg_.tick_ms <= 0) throw std::invalid_argument("tick_ms must be positive");
    if (!cfg_.speed.valid()) throw std::invalid_argument("invalid speed schedule");
    if (cfg_.idle_blink_ticks < 1) throw std::invalid_argument("idle_blink_ticks must be positive");
  }

  /// One tick from raw inputs: feeds the recognizer, then steps the machine.
  Frame tick(std::span<const InputMessage> inputs) {
    const std::int64_t now = now_ms();
    std::vector<GestureEvent> events;
    auto append = [&](std::vector<GestureEvent> evs) {
      events.insert(events.end(), evs.begin(), evs.end());
    };
    for (const auto& in : inputs) {
      std::visit(
          [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, msg::Skeleton>) {
              append(recognizer_.feed(m.frame, now));
            } else if constexpr (std::is_same_v<M, msg::Gesture>) {
              events.push_back(m.event);
            } else {
              append(recognizer_.mark_absent());
            }
          },
          in);
    }
    append(recognizer_.poll(now));
    return step(events, Controls{recognizer_.column()});
  }

  /// Applies the events in arrival order, advances the active mode by one
  /// tick and renders exactly one frame.
  Frame step(std::span<const GestureEvent> events, Controls controls = {}) {
    const std::int64_t now = now_ms();
    for (const auto& ev : events) handle(ev, now);

    std::optional<int> final_score;
    switch (phase_) {
      case Phase::Attract:
        if (attract_.showing_gol()) {
          attract_ = gol_tick(std::move(attract_), rng_);
        } else if (controls.user_column) {
          attract_ = creature_follow(std::move(attract_), *controls.user_column);
        }
        break;
      case Phase::SnakeIdle:
        break;
      case Phase::SnakePlay:
        if (!paused_) {
          auto r = snake_tick(std::move(*snake_), cfg_.tick_ms, cfg_.speed, rng_);
          snake_ = std::move(r.state);
          if (!snake_->alive) final_score = snake_->score;
        }
        break;
      case Phase::ScoreScroll:
        break;
    }

    if (is_snake_phase() && absent_since_ && now - *absent_since_ > cfg_.absence_timeout_ms) {
      enter_attract();
    }

    Frame frame = render();
    if (final_score) enter_score_scroll(*final_score);
    last_frame_ = frame;
    ++tick_;
    return frame;
  }

  // Mode entry points. The machine uses them internally; tests use them to
  // start from an arbitrary mode.

  void enter_attract() {
    phase_ = Phase::Attract;
    attract_ = make_attract(cfg_.sprites, cfg_.gol);
    snake_.reset();
    paused_ = false;
    scroll_.clear();
    remaining_ = 0;
  }

  void enter_attract_gol() {
    enter_attract();
    attract_.content = GolContent{random_gol_grid(rng_), 0};
  }

  void enter_snake_idle() {
    phase_ = Phase::SnakeIdle;
    snake_ = new_game(rng_);
    paused_ = false;
    idle_ticks_ = 0;
  }

  void enter_snake_play() {
    if (!snake_) snake_ = new_game(rng_);
    phase_ = Phase::SnakePlay;
    paused_ = false;
  }

  void enter_snake_play(SnakeState game) {
    snake_ = std::move(game);
    enter_snake_play();
  }

  void enter_score_scroll(int score) {
    phase_ = Phase::ScoreScroll;
    scroll_ = score_scroll_frames(score);
    remaining_ = static_cast<int>(scroll_.size());
    snake_.reset();
    paused_ = false;
  }

  EngineMode mode() const {
    switch (phase_) {
      case Phase::Attract:
        return {attract_.showing_gol() ? ModeKind::AttractGol : ModeKind::AttractCreature, 0};
      case Phase::SnakeIdle: return {ModeKind::SnakeIdle, 0};
      case Phase::SnakePlay: return {ModeKind::SnakePlay, 0};
      case Phase::ScoreScroll: return {ModeKind::ScoreScroll, remaining_};
    }
    return {};
  }

  /// Consistency of the internal state; empty when everything holds.
  std::optional<std::string> check_invariants() const {
    switch (phase_) {
      case Phase::Attract:
        if (snake_) return "attract mode holds a snake game";
        if (const auto* c = std::get_if<CreatureContent>(&attract_.content)) {
          if (c->sprite >= attract_.catalog.size()) return "creature index out of catalog";
          if (c->col < 0 || c->col > max_creature_col(attract_.catalog[c->sprite])) {
            return "creature off board";
          }
        }
        break;
      case Phase::SnakeIdle:
      case Phase::SnakePlay: {
        if (!snake_) return "snake mode without a game";
        const auto& s = *snake_;
        if (s.body.size() != static_cast<std::size_t>(3 + s.score)) return "length != 3 + score";
        for (std::size_t i = 0; i < s.body.size(); ++i) {
          if (!Frame::in_bounds(s.body[i])) return "snake cell off board";
          for (std::size_t k = i + 1; k < s.body.size(); ++k) {
            if (s.body[i] == s.body[k]) return "snake overlaps itself";
          }
        }
        if (s.food && s.occupies(*s.food)) return "food on snake body";
        if (phase_ == Phase::SnakeIdle && !s.alive) return "idle snake is dead";
        break;
      }
      case Phase::ScoreScroll:
        if (remaining_ < 1 || remaining_ > static_cast<int>(scroll_.size())) return "scroll count out of range";
        break;
    }
    return std::nullopt;
  }

  std::uint64_t ticks() const { return tick_; }
  std::int64_t now_ms() const { return static_cast<std::int64_t>(tick_) * cfg_.tick_ms; }
  bool paused() const { return paused_; }
  const std::optional<SnakeState>& snake() const { return snake_; }
  const AttractState& attract() const { return attract_; }
  const GestureRecognizer& recognizer() const { return recognizer_; }
  const Frame& last_frame() const { return last_frame_; }
  const EngineConfig& config() const { return cfg_; }
  const Rng& rng() const { return rng_; }

 private:
  enum class Phase : std::uint8_t { Attract, SnakeIdle, SnakePlay, ScoreScroll };

  bool is_snake_phase() const { return phase_ == Phase::SnakeIdle || phase_ == Phase::SnakePlay; }

  void handle(const GestureEvent& ev, std::int64_t now) {
    if (std::holds_alternative<gesture::Present>(ev)) {
      absent_since_.reset();
      return;
    }
    if (std::holds_alternative<gesture::Absent>(ev)) {
      if (!absent_since_) absent_since_ = now;
      if (is_snake_phase()) paused_ = true;
      return;
    }
    switch (phase_) {
      case Phase::Attract:
        if (const auto* z = std::get_if<gesture::ZoneChanged>(&ev); z && z->zone == Zone::AreaA) {
          enter_snake_idle();
        } else if (std::holds_alternative<gesture::Grab>(ev)) {
          attract_ = cycle_content(std::move(attract_), rng_);
        }
        break;
      case Phase::SnakeIdle:
      case Phase::SnakePlay:
        if (const auto* z = std::get_if<gesture::ZoneChanged>(&ev)) {
          paused_ = z->zone != Zone::AreaA;
        } else if (paused_) {
          break;
        } else if (std::holds_alternative<gesture::Raised>(ev) && phase_ == Phase::SnakeIdle) {
          enter_snake_play();
        } else if (const auto* d = std::get_if<gesture::DirectionUpdate>(&ev);
                   d && phase_ == Phase::SnakePlay) {
          snake_ = apply_direction(std::move(*snake_), d->direction);
        }
        break;
      case Phase::ScoreScroll:
        break;
    }
  }

  Frame render() {
    switch (phase_) {
      case Phase::Attract: return render_attract(attract_);
      case Phase::SnakeIdle: {
        const bool food_on = (idle_ticks_++ / cfg_.idle_blink_ticks) % 2 == 0;
        return render_snake(*snake_, food_on);
      }
      case Phase::SnakePlay: return render_snake(*snake_);
      case Phase::ScoreScroll: {
        const Frame f = scroll_[scroll_.size() - static_cast<std::size_t>(remaining_)];
        if (--remaining_ == 0) enter_attract();
        return f;
      }
    }
    return {};
  }

  EngineConfig cfg_;
  Rng rng_;
  GestureRecognizer recognizer_;
  Phase phase_ = Phase::Attract;
  AttractState attract_;
  std::optional<SnakeState> snake_;
  bool paused_ = false;
  int idle_ticks_ = 0;
  std::vector<Frame> scroll_;
  int remaining_ = 0;
  std::optional<std::int64_t> absent_since_;
  std::uint64_t tick_ = 0;
  Frame last_frame_;
};

// ---------------------------------------------------------------------------
// Sessions

class InputSourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Supplies the inputs for one tick. Throws InputSourceError when it fails.
class InputSource {
 public:
  virtual ~InputSource() = default;
  virtual std::vector<InputMessage> drain(std::uint64_t tick) = 0;
};

/// Replays the records of a session log (or script) at their tick stamps.
class ScriptSource : public InputSource {
 public:
  explicit ScriptSource(std::vector<LogRecord> records) : records_(std::move(records)) {}

  std::vector<InputMessage> drain(std::uint64_t tick) override {
    std::vector<InputMessage> out;
    while (next_ < records_.size() && records_[next_].tick <= tick) {
      if (records_[next_].tick == tick) out.push_back(records_[next_].input);
      ++next_;
    }
    return out;
  }

 private:
  std::vector<LogRecord> records_;
  std::size_t next_ = 0;
};

/// Multi-producer, single-consumer FIFO between transports and the engine.
class InputQueue : public InputSource {
 public:
  void push(InputMessage m) {
    std::lock_guard lock(mu_);
    queue_.push_back(std::move(m));
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
  }

  std::vector<InputMessage> drain(std::uint64_t /*tick*/) override {
    std::lock_guard lock(mu_);
    if (closed_ && queue_.empty()) throw InputSourceError("input queue closed");
    std::vector<InputMessage> out(std::make_move_iterator(queue_.begin()),
                                  std::make_move_iterator(queue_.end()));
    queue_.clear();
    return out;
  }

 private:
  std::mutex mu_;
  std::deque<InputMessage> queue_;
  bool closed_ = false;
};

struct SessionResult {
  std::vector<Frame> frames;
  std::vector<EngineMode> modes;  // mode after each tick
  SessionLog log;
  std::optional<std::string> error;  // why the input source ended the run early
};

/// Fixed-timestep headless loop: each tick drains the source, steps the
/// engine, collects the frame and logs the inputs under that tick.
inline SessionResult run_session(const EngineConfig& cfg, InputSource& source, std::uint64_t ticks) {
  SessionResult out;
  out.log.seed = cfg.seed;
  Engine engine(cfg);
  out.frames.reserve(static_cast<std::size_t>(ticks));
  for (std::uint64_t t = 0; t < ticks; ++t) {
    std::vector<InputMessage> inputs;
    try {
      inputs = source.drain(t);
    } catch (const InputSourceError& e) {
      out.error = e.what();
      break;
    }
    for (const auto& in : inputs) out.log.records.push_back({t, in});
    out.frames.push_back(engine.tick(inputs));
    out.modes.push_back(engine.mode());
  }
  out.log.ticks = out.frames.size();
  return out;
}

class ReplayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::uint64_t session_length(const SessionLog& log) {
  if (log.ticks) return *log.ticks;
  return log.records.empty() ? 0 : log.records.back().tick + 1;
}

/// Re-runs a recorded session. The seed always comes from the log header;
/// the seed in `cfg` is ignored.
inline std::vector<Frame> replay(const SessionLog& log, EngineConfig cfg) {
  if (log.version != kSessionLogVersion) {
    throw ReplayError("session log version " + std::to_string(log.version) + " does not match " +
                      std::to_string(kSessionLogVersion));
  }
  for (std::size_t i = 1; i < log.records.size(); ++i) {
    if (log.records[i].tick < log.records[i - 1].tick) {
      throw ReplayError("record " + std::to_string(i) + " has tick " + std::to_string(log.records[i].tick) +
                        " after tick " + std::to_string(log.records[i - 1].tick));
    }
  }
  cfg.seed = log.seed;
  ScriptSource source(log.records);
  return run_session(cfg, source, session_length(log)).frames;
}

/// Concatenated 10-line ASCII frames, the golden-file format.
inline std::string ascii_dump(std::span<const Frame> frames) {
  std::string out;
  out.reserve(frames.size() * (Frame::kCells + Frame::kHeight));
  for (const auto& f : frames) out += to_ascii(f);
  return out;
}

/// Inverse of ascii_dump.
inline std::vector<Frame> parse_ascii_dump(std::string_view text) {
  std::vector<Frame> frames;
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() % Frame::kHeight != 0) {
    throw std::invalid_argument("ASCII dump has " + std::to_string(lines.size()) +
                                " lines, not a multiple of 10");
  }
  for (std::size_t i = 0; i < lines.size(); i += Frame::kHeight) {
    std::string block;
    for (std::size_t k = 0; k < Frame::kHeight; ++k) {
      block.append(lines[i + k]);
      block.push_back('\n');
    }
    frames.push_back(frame_from_ascii(block));
  }
  return frames;
}

}  // namespace pixel
