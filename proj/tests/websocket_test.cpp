#include <gtest/gtest.h>

#include <string>

#include "pixel/websocket.hpp"

namespace pixel::ws {
namespace {

constexpr std::array<std::uint8_t, 4> kMask{0x37, 0xfa, 0x21, 0x3d};

std::string upgrade_request(std::string_view key) {
  return "GET /session HTTP/1.1\r\n"
         "Host: localhost:7777\r\n"
         "Upgrade: websocket\r\n"
         "Connection: Upgrade\r\n"
         "Sec-WebSocket-Key: " + std::string(key) + "\r\n"
         "Sec-WebSocket-Version: 13\r\n\r\n";
}

TEST(WebSocket, AcceptKeyKnownAnswer) {
  EXPECT_EQ(accept_key("dGhlIHNhbXBsZSBub25jZQ=="), "s3pPLMBiTxaQ9kYGzzhZRbK+xOo=");
}

TEST(WebSocket, HandshakeResponse) {
  const auto r = handshake_response(upgrade_request("dGhlIHNhbXBsZSBub25jZQ=="));
  ASSERT_TRUE(r.has_value());
  EXPECT_TRUE(r->starts_with("HTTP/1.1 101 "));
  EXPECT_NE(r->find("Sec-WebSocket-Accept: s3pPLMBiTxaQ9kYGzzhZRbK+xOo=\r\n"), std::string::npos);
  EXPECT_TRUE(r->ends_with("\r\n\r\n"));
}

TEST(WebSocket, HeaderNamesAreCaseInsensitive) {
  const std::string req =
      "GET / HTTP/1.1\r\nupgrade: WebSocket\r\nsec-websocket-key:   abc==  \r\n\r\n";
  const auto r = handshake_response(req);
  ASSERT_TRUE(r.has_value());
  EXPECT_NE(r->find(accept_key("abc==")), std::string::npos);
}

TEST(WebSocket, NonUpgradeRequestsRefused) {
  EXPECT_FALSE(handshake_response("GET / HTTP/1.1\r\nHost: x\r\n\r\n"));
  EXPECT_FALSE(handshake_response("GET / HTTP/1.1\r\nUpgrade: websocket\r\n\r\n"));
  EXPECT_FALSE(handshake_response("POST / HTTP/1.1\r\nUpgrade: websocket\r\nSec-WebSocket-Key: a\r\n\r\n"));
}

TEST(WebSocket, ServerFrameLengths) {
  EXPECT_EQ(encode_frame(Opcode::Text, "hi"), std::string("\x81\x02hi", 4));
  const auto mid = encode_frame(Opcode::Text, std::string(300, 'x'));
  EXPECT_EQ(static_cast<std::uint8_t>(mid[1]), 126);
  EXPECT_EQ(mid.size(), 4u + 300u);
  EXPECT_EQ((static_cast<std::uint8_t>(mid[2]) << 8) | static_cast<std::uint8_t>(mid[3]), 300);
  const auto big = encode_frame(Opcode::Binary, std::string(70000, 'y'));
  EXPECT_EQ(static_cast<std::uint8_t>(big[1]), 127);
  EXPECT_EQ(big.size(), 10u + 70000u);
}

TEST(WebSocket, DecodesMaskedFramesOfEveryLengthClass) {
  for (std::size_t n : {0u, 1u, 125u, 126u, 127u, 65535u, 65536u, 100000u}) {
    std::string payload(n, '\0');
    for (std::size_t i = 0; i < n; ++i) payload[i] = static_cast<char>(i * 31 + 7);
    FrameDecoder d;
    d.feed(encode_client_frame(Opcode::Text, payload, kMask));
    const auto m = d.next();
    ASSERT_TRUE(m.has_value()) << n;
    EXPECT_EQ(m->opcode, Opcode::Text);
    EXPECT_EQ(m->payload, payload);
    EXPECT_FALSE(d.next().has_value());
  }
}

TEST(WebSocket, ByteAtATime) {
  const auto wire = encode_client_frame(Opcode::Text, "{\"type\":\"absent\",\"t_ms\":1}", kMask) +
                    encode_client_frame(Opcode::Ping, "p", kMask);
  FrameDecoder d;
  std::vector<Message> got;
  for (char c : wire) {
    d.feed(std::string_view(&c, 1));
    while (auto m = d.next()) got.push_back(*m);
  }
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].payload, "{\"type\":\"absent\",\"t_ms\":1}");
  EXPECT_EQ(got[1].opcode, Opcode::Ping);
}

TEST(WebSocket, ReassemblesFragmentsAroundControlFrames) {
  FrameDecoder d;
  d.feed(encode_client_frame(Opcode::Text, "hel", kMask, false));
  d.feed(encode_client_frame(Opcode::Ping, "", kMask));
  d.feed(encode_client_frame(Opcode::Continuation, "lo", kMask, true));
  const auto ping = d.next();
  ASSERT_TRUE(ping);
  EXPECT_EQ(ping->opcode, Opcode::Ping);
  const auto text = d.next();
  ASSERT_TRUE(text);
  EXPECT_EQ(text->opcode, Opcode::Text);
  EXPECT_EQ(text->payload, "hello");
}

TEST(WebSocket, ProtocolViolations) {
  {
    FrameDecoder d;
    d.feed(encode_frame(Opcode::Text, "unmasked"));
    EXPECT_THROW(d.next(), ProtocolViolation);
  }
  {
    FrameDecoder d;
    d.feed(encode_client_frame(Opcode::Continuation, "x", kMask));
    EXPECT_THROW(d.next(), ProtocolViolation);
  }
  {
    FrameDecoder d;
    d.feed(encode_client_frame(Opcode::Text, "a", kMask, false));
    d.feed(encode_client_frame(Opcode::Text, "b", kMask));
    EXPECT_THROW(d.next(), ProtocolViolation);
  }
  {
    FrameDecoder d;
    std::string header = "\x81\xff";
    for (int i = 0; i < 8; ++i) header.push_back(i == 4 ? '\x01' : '\0');  // 16 MiB
    d.feed(header);
    EXPECT_THROW(d.next(), ProtocolViolation);
  }
}

}  // namespace
}  // namespace pixel::ws
