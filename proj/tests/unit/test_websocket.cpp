#include <gtest/gtest.h>

#include <random>

#include "eversim/error.hpp"
#include "eversim/websocket.hpp"

using namespace eversim;
using namespace eversim::ws;

TEST(WebSocket, AcceptKeyKnownAnswer) {
  EXPECT_EQ(accept_key("dGhlIHNhbXBsZSBub25jZQ=="), "s3pPLMBiTxaQ9kYGzzhZRbK+xOo=");
}

TEST(WebSocket, UpgradeRequest) {
  std::string buf =
      "GET /ws HTTP/1.1\r\nHost: localhost\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
      "Sec-WebSocket-Key: dGhlIHNhbXBsZSBub25jZQ==\r\nSec-WebSocket-Version: 13\r\n";
  EXPECT_FALSE(take_upgrade_request(buf));  // head incomplete
  buf += "\r\n";
  buf += "tail";
  const auto key = take_upgrade_request(buf);
  ASSERT_TRUE(key);
  EXPECT_EQ(*key, "dGhlIHNhbXBsZSBub25jZQ==");
  EXPECT_EQ(buf, "tail");
  const auto resp = upgrade_response(*key);
  EXPECT_EQ(resp.rfind("HTTP/1.1 101", 0), 0u);
  EXPECT_NE(resp.find("Sec-WebSocket-Accept: s3pPLMBiTxaQ9kYGzzhZRbK+xOo=\r\n"), std::string::npos);
}

TEST(WebSocket, PlainHttpIsRejected) {
  std::string buf = "GET / HTTP/1.1\r\nHost: x\r\n\r\n";
  EXPECT_THROW(take_upgrade_request(buf), InputError);
}

TEST(WebSocket, ServerFrameLayout) {
  const auto f = encode_frame(Opcode::text, "hi");
  ASSERT_EQ(f.size(), 4u);
  EXPECT_EQ(static_cast<unsigned char>(f[0]), 0x81);
  EXPECT_EQ(static_cast<unsigned char>(f[1]), 0x02);
  EXPECT_EQ(f.substr(2), "hi");
}

TEST(WebSocket, MaskedClientFrame) {
  // RFC 6455 section 5.7 example: masked "Hello".
  std::string buf("\x81\x85\x37\xfa\x21\x3d\x7f\x9f\x4d\x51\x58", 11);
  EXPECT_EQ(encode_frame(Opcode::text, "Hello", 0x37fa213d), buf);
  const auto frame = take_frame(buf);
  ASSERT_TRUE(frame);
  EXPECT_EQ(frame->payload, "Hello");
  EXPECT_TRUE(frame->fin);
  EXPECT_TRUE(buf.empty());
}

TEST(WebSocket, PartialFramesWait) {
  const auto full = encode_frame(Opcode::text, std::string(300, 'x'), 0x01020304);
  for (std::size_t n = 0; n < full.size(); ++n) {
    std::string part = full.substr(0, n);
    EXPECT_FALSE(take_frame(part));
    EXPECT_EQ(part.size(), n);
  }
}

TEST(WebSocket, OversizePayloadRejected) {
  std::string buf = encode_frame(Opcode::text, std::string(2000, 'a'), 7u);
  EXPECT_THROW(take_frame(buf, 1000), InputError);
}

// Properties.

TEST(WebSocketProperties, FramesRoundTrip) {
  std::mt19937_64 rng(6);
  for (std::size_t len : {0u, 1u, 125u, 126u, 127u, 65535u, 65536u, 70000u}) {
    std::string payload(len, '\0');
    for (char& c : payload) c = static_cast<char>(rng());
    for (const std::optional<std::uint32_t> mask : {std::optional<std::uint32_t>{}, std::optional<std::uint32_t>{0xdeadbeef}}) {
      std::string buf = encode_frame(Opcode::binary, payload, mask);
      buf += encode_frame(Opcode::ping, "p", mask);
      const auto a = take_frame(buf);
      ASSERT_TRUE(a);
      EXPECT_EQ(a->opcode, Opcode::binary);
      EXPECT_EQ(a->payload, payload) << len;
      const auto b = take_frame(buf);
      ASSERT_TRUE(b);
      EXPECT_EQ(b->opcode, Opcode::ping);
      EXPECT_TRUE(buf.empty());
    }
  }
}
