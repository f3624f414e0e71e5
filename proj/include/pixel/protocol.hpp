#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pixel/core.hpp"
#include "pixel/gesture.hpp"

namespace pixel {

// ---------------------------------------------------------------------------
// LED controller packet
//
//   byte 0      magic   0xA5
//   byte 1      version 0x01
//   bytes 2..39 payload: 150 pixels x 2 bits, row-major from the top-left,
//               MSB-first; Off=00 Red=01 Blue=10 Purple=11; last 4 bits zero
//   byte 40     XOR of the 38 payload bytes

inline constexpr std::uint8_t kLedMagic = 0xA5;
inline constexpr std::uint8_t kLedVersion = 0x01;
inline constexpr std::size_t kLedPayloadBytes = 38;
inline constexpr std::size_t kLedPacketBytes = 41;

using LedPacket = std::array<std::uint8_t, kLedPacketBytes>;

class PacketError : public std::runtime_error {
 public:
  enum class Kind { Length, Magic, Version, Checksum, Padding };

  PacketError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline std::uint8_t payload_checksum(std::span<const std::uint8_t> payload) {
  std::uint8_t x = 0;
  for (auto b : payload) x ^= b;
  return x;
}

inline LedPacket encode_frame(const Frame& f) {
  LedPacket p{};
  p[0] = kLedMagic;
  p[1] = kLedVersion;
  for (std::size_t i = 0; i < Frame::kCells; ++i) {
    const auto code = static_cast<std::uint8_t>(f[i]);
    const auto shift = static_cast<unsigned>(6 - 2 * (i % 4));
    p[2 + i / 4] = static_cast<std::uint8_t>(p[2 + i / 4] | (code << shift));
  }
  p[40] = payload_checksum(std::span<const std::uint8_t>(p).subspan(2, kLedPayloadBytes));
  return p;
}

inline Frame decode_frame(std::span<const std::uint8_t> bytes) {
  using Kind = PacketError::Kind;
  if (bytes.size() != kLedPacketBytes) {
    throw PacketError(Kind::Length, "LED packet must be 41 bytes, got " + std::to_string(bytes.size()));
  }
  if (bytes[0] != kLedMagic) throw PacketError(Kind::Magic, "bad LED packet magic");
  if (bytes[1] != kLedVersion) {
    throw PacketError(Kind::Version, "unsupported LED packet version " + std::to_string(bytes[1]));
  }
  const auto payload = bytes.subspan(2, kLedPayloadBytes);
  if (payload_checksum(payload) != bytes[40]) throw PacketError(Kind::Checksum, "LED packet checksum mismatch");
  if ((payload.back() & 0x0F) != 0) throw PacketError(Kind::Padding, "LED packet padding bits set");

  Frame f;
  for (std::size_t i = 0; i < Frame::kCells; ++i) {
    const auto shift = static_cast<unsigned>(6 - 2 * (i % 4));
    const auto code = static_cast<std::uint8_t>((payload[i / 4] >> shift) & 0x3);
    f.set(static_cast<int>(i % Frame::kWidth), static_cast<int>(i / Frame::kWidth),
          static_cast<PixelColor>(code));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Session protocol: one JSON object per line, discriminated by "type".
//
//   client -> server   skeleton | gesture | absent
//   server -> client   frame | mode
//
// Session logs and scripts use the same records with a "tick" field added,
// preceded by a header record.

namespace msg {

struct Skeleton {
  SkeletonFrame frame;
  friend bool operator==(const Skeleton&, const Skeleton&) = default;
};

/// Pre-digested gesture, bypassing the recognizer (debug clients, scripts).
struct Gesture {
  std::int64_t t_ms = 0;
  GestureEvent event;
  friend bool operator==(const Gesture&, const Gesture&) = default;
};

struct Absent {
  std::int64_t t_ms = 0;
  friend bool operator==(const Absent&, const Absent&) = default;
};

struct FrameUpdate {
  std::uint64_t tick = 0;
  Frame frame;
  friend bool operator==(const FrameUpdate&, const FrameUpdate&) = default;
};

struct ModeUpdate {
  std::uint64_t tick = 0;
  std::string mode;
  std::optional<int> remaining;  // score_scroll only
  friend bool operator==(const ModeUpdate&, const ModeUpdate&) = default;
};

}  // namespace msg

using InputMessage = std::variant<msg::Skeleton, msg::Gesture, msg::Absent>;
using OutputMessage = std::variant<msg::FrameUpdate, msg::ModeUpdate>;
using SessionMessage =
    std::variant<msg::Skeleton, msg::Gesture, msg::Absent, msg::FrameUpdate, msg::ModeUpdate>;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::string line)
      : std::runtime_error(what), line_(std::move(line)) {}
  const std::string& line() const { return line_; }

 private:
  std::string line_;
};

namespace detail {

using nlohmann::json;

inline std::string_view hand_name(HandState h) {
  switch (h) {
    case HandState::Open: return "open";
    case HandState::Closed: return "closed";
    case HandState::Unknown: return "unknown";
  }
  return "unknown";
}

struct Reader {
  const json& obj;
  std::string_view line;

  [[noreturn]] void fail(const std::string& why) const { throw ParseError(why, std::string(line)); }

  const json& field(const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail(std::string("missing field '") + key + "'");
    return *it;
  }

  std::string string(const char* key) const {
    const auto& v = field(key);
    if (!v.is_string()) fail(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
  }

  std::int64_t integer(const char* key) const {
    const auto& v = field(key);
    if (v.is_number_unsigned()) {
      if (v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) fail(std::string("field '") + key + "' out of range");
      return static_cast<std::int64_t>(v.get<std::uint64_t>());
    }
    if (!v.is_number_integer()) fail(std::string("field '") + key + "' must be an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const char* key) const {
    const auto& v = field(key);
    if (!v.is_number_unsigned()) fail(std::string("field '") + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  Vec3 vec3(const json& v, std::string_view name) const {
    if (!v.is_array() || v.size() != 3) fail("joint '" + std::string(name) + "' must be [x,y,z]");
    Vec3 out;
    double* dst[3] = {&out.x, &out.y, &out.z};
    for (std::size_t i = 0; i < 3; ++i) {
      if (!v[i].is_number()) fail("joint '" + std::string(name) + "' coordinates must be numbers");
      *dst[i] = v[i].get<double>();
      if (!std::isfinite(*dst[i])) fail("joint '" + std::string(name) + "' coordinate not finite");
    }
    return out;
  }

  HandState hand(const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end()) return HandState::Unknown;
    if (!it->is_string()) fail(std::string("field '") + key + "' must be a string");
    const auto s = it->get<std::string>();
    if (s == "open") return HandState::Open;
    if (s == "closed") return HandState::Closed;
    if (s == "unknown") return HandState::Unknown;
    fail(std::string("field '") + key + "' must be open|closed|unknown");
  }
};

inline Zone parse_zone(const Reader& r, const std::string& s) {
  if (s == "A") return Zone::AreaA;
  if (s == "B") return Zone::AreaB;
  if (s == "out") return Zone::OutOfRange;
  r.fail("zone must be A|B|out");
}

inline Side parse_side(const Reader& r, const std::string& s) {
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  r.fail("side must be left|right");
}

inline Direction parse_direction(const Reader& r, const std::string& s) {
  if (s == "up") return Direction::Up;
  if (s == "down") return Direction::Down;
  if (s == "left") return Direction::Left;
  if (s == "right") return Direction::Right;
  r.fail("direction must be up|down|left|right");
}

inline GestureEvent parse_gesture_event(const Reader& r) {
  const auto name = r.string("gesture");
  if (name == "present") return gesture::Present{};
  if (name == "absent") return gesture::Absent{};
  if (name == "zone") return gesture::ZoneChanged{parse_zone(r, r.string("zone"))};
  if (name == "raised") return gesture::Raised{parse_side(r, r.string("side"))};
  if (name == "lowered") return gesture::Lowered{};
  if (name == "grab") return gesture::Grab{};
  if (name == "direction") return gesture::DirectionUpdate{parse_direction(r, r.string("direction"))};
  r.fail("unknown gesture '" + name + "'");
}

inline void put_gesture_event(json& j, const GestureEvent& ev) {
  std::visit(
      [&](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, gesture::Present>) {
          j["gesture"] = "present";
        } else if constexpr (std::is_same_v<E, gesture::Absent>) {
          j["gesture"] = "absent";
        } else if constexpr (std::is_same_v<E, gesture::ZoneChanged>) {
          j["gesture"] = "zone";
          j["zone"] = std::string(to_string(e.zone));
        } else if constexpr (std::is_same_v<E, gesture::Raised>) {
          j["gesture"] = "raised";
          j["side"] = std::string(to_string(e.side));
        } else if constexpr (std::is_same_v<E, gesture::Lowered>) {
          j["gesture"] = "lowered";
        } else if constexpr (std::is_same_v<E, gesture::Grab>) {
          j["gesture"] = "grab";
        } else {
          j["gesture"] = "direction";
          j["direction"] = std::string(to_string(e.direction));
        }
      },
      ev);
}

inline json parse_object(std::string_view line) {
  json j = json::parse(line.begin(), line.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ParseError("malformed JSON record", std::string(line));
  if (!j.is_object()) throw ParseError("record must be a JSON object", std::string(line));
  return j;
}

inline SessionMessage parse_record(const json& j, std::string_view line) {
  const Reader r{j, line};
  const auto type = r.string("type");
  if (type == "skeleton") {
    msg::Skeleton m;
    m.frame.t_ms = r.integer("t_ms");
    const auto& joints = r.field("joints");
    if (!joints.is_object()) r.fail("field 'joints' must be an object");
    for (std::size_t i = 0; i < kJointCount; ++i) {
      const auto key = std::string(kJointNames[i]);
      auto it = joints.find(key);
      if (it == joints.end()) r.fail("missing joint '" + key + "'");
      m.frame.joints[i] = r.vec3(*it, key);
    }
    m.frame.hand_l = r.hand("hand_l");
    m.frame.hand_r = r.hand("hand_r");
    return m;
  }
  if (type == "gesture") return msg::Gesture{r.integer("t_ms"), parse_gesture_event(r)};
  if (type == "absent") return msg::Absent{r.integer("t_ms")};
  if (type == "frame") {
    msg::FrameUpdate m;
    m.tick = r.unsigned_integer("tick");
    try {
      m.frame = frame_from_pixel_string(r.string("pixels"));
    } catch (const std::invalid_argument& e) {
      r.fail(e.what());
    }
    return m;
  }
  if (type == "mode") {
    msg::ModeUpdate m;
    m.tick = r.unsigned_integer("tick");
    m.mode = r.string("mode");
    if (j.contains("remaining")) m.remaining = static_cast<int>(r.integer("remaining"));
    return m;
  }
  r.fail("unknown record type '" + type + "'");
}

inline json to_json(const SessionMessage& m) {
  json j = json::object();
  std::visit(
      [&](const auto& v) {
        using M = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<M, msg::Skeleton>) {
          j["type"] = "skeleton";
          j["t_ms"] = v.frame.t_ms;
          json joints = json::object();
          for (std::size_t i = 0; i < kJointCount; ++i) {
            const auto& p = v.frame.joints[i];
            joints[std::string(kJointNames[i])] = json::array({p.x, p.y, p.z});
          }
          j["joints"] = std::move(joints);
          j["hand_l"] = std::string(hand_name(v.frame.hand_l));
          j["hand_r"] = std::string(hand_name(v.frame.hand_r));
        } else if constexpr (std::is_same_v<M, msg::Gesture>) {
          j["type"] = "gesture";
          j["t_ms"] = v.t_ms;
          put_gesture_event(j, v.event);
        } else if constexpr (std::is_same_v<M, msg::Absent>) {
          j["type"] = "absent";
          j["t_ms"] = v.t_ms;
        } else if constexpr (std::is_same_v<M, msg::FrameUpdate>) {
          j["type"] = "frame";
          j["tick"] = v.tick;
          j["pixels"] = to_pixel_string(v.frame);
        } else {
          j["type"] = "mode";
          j["tick"] = v.tick;
          j["mode"] = v.mode;
          if (v.remaining) j["remaining"] = *v.remaining;
        }
      },
      m);
  return j;
}

}  // namespace detail

/// Parses one protocol line. Throws ParseError (carrying the line) on any
/// malformed input; unknown fields are ignored, unknown types rejected.
inline SessionMessage parse_message(std::string_view line) {
  const auto j = detail::parse_object(line);
  return detail::parse_record(j, line);
}

/// Canonical single-line form (keys sorted, no trailing newline).
inline std::string emit_message(const SessionMessage& m) { return detail::to_json(m).dump(); }

inline SessionMessage to_session_message(const InputMessage& in) {
  return std::visit([](const auto& v) -> SessionMessage { return v; }, in);
}

inline SessionMessage to_session_message(const OutputMessage& out) {
  return std::visit([](const auto& v) -> SessionMessage { return v; }, out);
}

inline std::optional<InputMessage> as_input(const SessionMessage& m) {
  if (const auto* s = std::get_if<msg::Skeleton>(&m)) return *s;
  if (const auto* g = std::get_if<msg::Gesture>(&m)) return *g;
  if (const auto* a = std::get_if<msg::Absent>(&m)) return *a;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Session log: header line, then one tick-stamped input record per line.
//
//   {"seed":42,"ticks":1000,"type":"header","version":1}
//   {"t_ms":100,"tick":3,"type":"absent"}

inline constexpr int kSessionLogVersion = 1;

struct LogRecord {
  std::uint64_t tick = 0;
  InputMessage input;
  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

struct SessionLog {
  int version = kSessionLogVersion;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> ticks;  // session length, when known
  std::vector<LogRecord> records;

  friend bool operator==(const SessionLog&, const SessionLog&) = default;
};

class LogError : public std::runtime_error {
 public:
  LogError(const std::string& what, std::size_t line_no)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line_no_(line_no) {}
  std::size_t line_no() const { return line_no_; }

 private:
  std::size_t line_no_;
};

inline std::string emit_header(const SessionLog& log) {
  nlohmann::json j = {{"type", "header"}, {"version", log.version}, {"seed", log.seed}};
  if (log.ticks) j["ticks"] = *log.ticks;
  return j.dump();
}

inline std::string emit_record(const LogRecord& r) {
  auto j = detail::to_json(to_session_message(r.input));
  j["tick"] = r.tick;
  return j.dump();
}

inline void write_session_log(std::ostream& os, const SessionLog& log) {
  os << emit_header(log) << '\n';
  for (const auto& r : log.records) os << emit_record(r) << '\n';
}

struct LogReadOptions {
  bool require_header = true;  // scripts may omit it
  bool check_version = true;
};

/// Reads and validates a session log: version must match and ticks must be
/// non-decreasing. Blank lines are skipped.
inline SessionLog read_session_log(std::istream& is, LogReadOptions opts = {}) {
  SessionLog log;
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  bool seen_record = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    nlohmann::json j;
    try {
      j = detail::parse_object(line);
    } catch (const ParseError& e) {
      throw LogError(e.what(), line_no);
    }
    const bool is_header = j.contains("type") && j["type"] == "header";
    if (is_header) {
      if (seen_header || seen_record) throw LogError("header must be the first record", line_no);
      const detail::Reader r{j, line};
      try {
        log.version = static_cast<int>(r.integer("version"));
        log.seed = r.unsigned_integer("seed");
        if (j.contains("ticks")) log.ticks = r.unsigned_integer("ticks");
      } catch (const ParseError& e) {
        throw LogError(e.what(), line_no);
      }
      if (opts.check_version && log.version != kSessionLogVersion) {
        throw LogError("unsupported session log version " + std::to_string(log.version), line_no);
      }
      seen_header = true;
      continue;
    }
    if (opts.require_header && !seen_header) throw LogError("missing header record", line_no);

    LogRecord rec;
    try {
      rec.tick = detail::Reader{j, line}.unsigned_integer("tick");
      auto input = as_input(detail::parse_record(j, line));
      if (!input) throw ParseError("only input records may appear in a session log", line);
      rec.input = std::move(*input);
    } catch (const ParseError& e) {
      throw LogError(e.what(), line_no);
    }
    if (!log.records.empty() && rec.tick < log.records.back().tick) {
      throw LogError("tick " + std::to_string(rec.tick) + " precedes tick " +
                         std::to_string(log.records.back().tick),
                     line_no);
    }
    seen_record = true;
    log.records.push_back(std::move(rec));
  }
  if (opts.require_header && !seen_header) throw LogError("missing header record", line_no);
  return log;
}

}  // namespace pixel
