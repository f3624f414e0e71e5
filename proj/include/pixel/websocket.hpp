#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>
#include <openssl/sha.h>

// Minimal RFC 6455 server side: opening handshake, unmasked text frames out,
// masked frames in. Enough for a browser to carry the line protocol, one
// session message per text frame.
namespace pixel::ws {

inline constexpr std::string_view kAcceptGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

inline std::string accept_key(std::string_view client_key) {
  std::string material(client_key);
  material += kAcceptGuid;
  std::array<unsigned char, SHA_DIGEST_LENGTH> digest{};
  unsigned int digest_len = 0;
  EVP_Digest(material.data(), material.size(), digest.data(), &digest_len, EVP_sha1(), nullptr);
  std::array<unsigned char, 4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1> b64{};
  const int n = EVP_EncodeBlock(b64.data(), digest.data(), SHA_DIGEST_LENGTH);
  return std::string(reinterpret_cast<const char*>(b64.data()), static_cast<std::size_t>(n));
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Builds the 101 response for a complete HTTP upgrade request, or nullopt
/// if the request is not a WebSocket upgrade.
inline std::optional<std::string> handshake_response(std::string_view request) {
  std::optional<std::string> key;
  bool upgrade = false;
  std::size_t pos = request.find('\n');
  if (request.substr(0, 4) != "GET " || pos == std::string_view::npos) return std::nullopt;
  while (pos < request.size()) {
    auto nl = request.find('\n', pos + 1);
    auto line = request.substr(pos + 1, nl == std::string_view::npos ? std::string_view::npos : nl - pos - 1);
    pos = nl == std::string_view::npos ? request.size() : nl;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    const auto name = lower(trim(line.substr(0, colon)));
    const auto value = trim(line.substr(colon + 1));
    if (name == "sec-websocket-key") key = std::string(value);
    if (name == "upgrade" && lower(value) == "websocket") upgrade = true;
  }
  if (!key || !upgrade) return std::nullopt;
  return "HTTP/1.1 101 Switching Protocols\r\n"
         "Upgrade: websocket\r\n"
         "Connection: Upgrade\r\n"
         "Sec-WebSocket-Accept: " + accept_key(*key) + "\r\n\r\n";
}

enum class Opcode : std::uint8_t { Continuation = 0x0, Text = 0x1, Binary = 0x2, Close = 0x8, Ping = 0x9, Pong = 0xA };

/// Server-to-client frame (FIN set, never masked).
inline std::string encode_frame(Opcode op, std::string_view payload) {
  std::string out;
  out.push_back(static_cast<char>(0x80 | static_cast<std::uint8_t>(op)));
  const std::size_t n = payload.size();
  if (n < 126) {
    out.push_back(static_cast<char>(n));
  } else if (n <= 0xFFFF) {
    out.push_back(static_cast<char>(126));
    out.push_back(static_cast<char>((n >> 8) & 0xFF));
    out.push_back(static_cast<char>(n & 0xFF));
  } else {
    out.push_back(static_cast<char>(127));
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((static_cast<std::uint64_t>(n) >> shift) & 0xFF));
  }
  out.append(payload);
  return out;
}

struct Message {
  Opcode opcode;
  std::string payload;
};

class ProtocolViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incremental decoder for client frames. Reassembles fragmented messages;
/// control frames are returned as they arrive.
class FrameDecoder {
 public:
  static constexpr std::size_t kMaxMessage = 1 << 20;

  void feed(std::string_view bytes) { buffer_.append(bytes); }

  /// Next complete message, or nullopt when more bytes are needed.
  std::optional<Message> next() {
    for (;;) {
      if (buffer_.size() < 2) return std::nullopt;
      const auto b0 = static_cast<std::uint8_t>(buffer_[0]);
      const auto b1 = static_cast<std::uint8_t>(buffer_[1]);
      const bool fin = (b0 & 0x80) != 0;
      const auto op = static_cast<Opcode>(b0 & 0x0F);
      if ((b1 & 0x80) == 0) throw ProtocolViolation("client frame not masked");
      std::size_t header = 2;
      std::uint64_t len = b1 & 0x7F;
      if (len == 126) {
        if (buffer_.size() < 4) return std::nullopt;
        len = (static_cast<std::uint64_t>(static_cast<std::uint8_t>(buffer_[2])) << 8) |
              static_cast<std::uint8_t>(buffer_[3]);
        header = 4;
      } else if (len == 127) {
        if (buffer_.size() < 10) return std::nullopt;
        len = 0;
        for (std::size_t i = 2; i < 10; ++i) len = (len << 8) | static_cast<std::uint8_t>(buffer_[i]);
        header = 10;
      }
      if (len > kMaxMessage) throw ProtocolViolation("frame too large");
      if (buffer_.size() < header + 4 + len) return std::nullopt;

      const auto* mask = reinterpret_cast<const std::uint8_t*>(buffer_.data() + header);
      std::string payload(buffer_.substr(header + 4, static_cast<std::size_t>(len)));
      for (std::size_t i = 0; i < payload.size(); ++i) {
        payload[i] = static_cast<char>(static_cast<std::uint8_t>(payload[i]) ^ mask[i % 4]);
      }
      buffer_.erase(0, header + 4 + static_cast<std::size_t>(len));

      const bool control = (static_cast<std::uint8_t>(op) & 0x8) != 0;
      if (control) return Message{op, std::move(payload)};
      if (op == Opcode::Continuation) {
        if (!fragment_op_) throw ProtocolViolation("continuation without a started message");
      } else {
        if (fragment_op_) throw ProtocolViolation("new message inside a fragmented one");
        fragment_op_ = op;
        fragment_.clear();
      }
      fragment_ += payload;
      if (fragment_.size() > kMaxMessage) throw ProtocolViolation("message too large");
      if (fin) {
        Message m{*fragment_op_, std::move(fragment_)};
        fragment_op_.reset();
        fragment_.clear();
        return m;
      }
    }
  }

 private:
  std::string buffer_;
  std::optional<Opcode> fragment_op_;
  std::string fragment_;
};

/// Client-side framing (masked), used by tests and tools that act as a browser.
inline std::string encode_client_frame(Opcode op, std::string_view payload, std::array<std::uint8_t, 4> mask,
                                       bool fin = true) {
  std::string out = encode_frame(op, payload);
  if (!fin) out[0] = static_cast<char>(static_cast<std::uint8_t>(out[0]) & 0x7F);
  const std::size_t header = out.size() - payload.size();
  out[1] = static_cast<char>(static_cast<std::uint8_t>(out[1]) | 0x80);
  std::string masked(payload);
  for (std::size_t i = 0; i < masked.size(); ++i) {
    masked[i] = static_cast<char>(static_cast<std::uint8_t>(masked[i]) ^ mask[i % 4]);
  }
  out.resize(header);
  out.append(reinterpret_cast<const char*>(mask.data()), 4);
  out += masked;
  return out;
}

}  // namespace pixel::ws
