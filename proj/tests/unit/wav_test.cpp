#include <cstdint>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "seld/error.hpp"
#include "seld/random.hpp"
#include "seld/wav.hpp"

using namespace seld;

namespace {

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}
void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

// RIFF header + fmt chunk + optional junk chunk + data chunk.
std::string make_wav(std::uint16_t tag, std::uint16_t channels, std::uint16_t bits,
                     const std::string& data, bool odd_junk = false, bool extensible = false) {
  std::string fmt;
  put_u16(fmt, extensible ? 0xFFFE : tag);
  put_u16(fmt, channels);
  put_u32(fmt, 48000);
  put_u32(fmt, 48000u * channels * bits / 8);
  put_u16(fmt, static_cast<std::uint16_t>(channels * bits / 8));
  put_u16(fmt, bits);
  if (extensible) {
    put_u16(fmt, 22);
    put_u16(fmt, bits);
    put_u32(fmt, 0);
    put_u16(fmt, tag);
    fmt += std::string("\x00\x00\x00\x00\x10\x00\x80\x00\x00\xAA\x00\x38\x9B\x71", 14);
  }
  std::string body = "WAVE";
  body += "fmt ";
  put_u32(body, static_cast<std::uint32_t>(fmt.size()));
  body += fmt;
  if (odd_junk) {
    body += "junk";
    put_u32(body, 3);
    body += "abc";
    body.push_back('\0');
  }
  body += "data";
  put_u32(body, static_cast<std::uint32_t>(data.size()));
  body += data;
  std::string out = "RIFF";
  put_u32(out, static_cast<std::uint32_t>(body.size()));
  return out + body;
}

AudioClip random_float_clip(std::size_t channels, std::size_t n) {
  Rng rng(9);
  std::vector<std::vector<double>> ch(channels, std::vector<double>(n));
  for (auto& c : ch)
    for (auto& v : c) v = static_cast<float>(rng.uniform() * 2.0 - 1.0);
  return AudioClip(std::move(ch), 48000.0);
}

}  // namespace

TEST(Wav, FloatRoundTripIsBitExact) {
  const auto clip = random_float_clip(4, 1000);
  std::stringstream ss;
  write_wav(clip, ss);
  const auto back = read_wav(ss, 4);
  ASSERT_EQ(back.channel_count(), 4u);
  ASSERT_EQ(back.sample_count(), 1000u);
  EXPECT_EQ(back.sample_rate(), 48000.0);
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t i = 0; i < 1000; ++i) ASSERT_EQ(back.channel(c)[i], clip.channel(c)[i]);
}

TEST(Wav, Pcm16WithinQuantizationStep) {
  const auto clip = random_float_clip(4, 500);
  std::stringstream ss;
  write_wav(clip, ss, WavSampleFormat::kPcm16);
  const auto pcm = read_wav(ss);
  std::stringstream again;
  write_wav(pcm, again);
  const auto back = read_wav(again);
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t i = 0; i < 500; ++i) ASSERT_LE(std::abs(back.channel(c)[i] - clip.channel(c)[i]), 1.0 / 32768.0);
}

TEST(Wav, RejectsEmptyAndMalformed) {
  std::stringstream empty;
  EXPECT_THROW(read_wav(empty), Error);
  std::stringstream junk("RIFX0000WAVE");
  EXPECT_THROW(read_wav(junk), Error);
  std::string good = make_wav(1, 1, 16, std::string("\x01\x00\x02\x00", 4));
  std::stringstream truncated(good.substr(0, 30));
  EXPECT_THROW(read_wav(truncated), Error);
  std::stringstream no_samples(make_wav(1, 1, 16, ""));
  EXPECT_THROW(read_wav(no_samples), Error);
}

TEST(Wav, ChannelCountMismatchThrows) {
  std::stringstream ss;
  write_wav(random_float_clip(2, 10), ss);
  EXPECT_THROW(read_wav(ss, 4), Error);
}

TEST(Wav, ReadsPcm24AndSkipsOddChunks) {
  // two stereo frames: (0.5, -0.5), (-1.0, 0)
  std::string data;
  auto put24 = [&](std::int32_t v) {
    for (int i = 0; i < 3; ++i) data.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  put24(1 << 22);
  put24(-(1 << 22));
  put24(-(1 << 23));
  put24(0);
  std::stringstream ss(make_wav(1, 2, 24, data, true));
  const auto clip = read_wav(ss);
  ASSERT_EQ(clip.sample_count(), 2u);
  EXPECT_EQ(clip.channel(0)[0], 0.5);
  EXPECT_EQ(clip.channel(1)[0], -0.5);
  EXPECT_EQ(clip.channel(0)[1], -1.0);
  EXPECT_EQ(clip.channel(1)[1], 0.0);
}

TEST(Wav, ReadsExtensibleFloat64) {
  std::string data(16, '\0');
  const double a = 0.25, b = -0.75;
  std::memcpy(data.data(), &a, 8);
  std::memcpy(data.data() + 8, &b, 8);
  std::stringstream ss(make_wav(3, 1, 64, data, false, true));
  const auto clip = read_wav(ss);
  ASSERT_EQ(clip.sample_count(), 2u);
  EXPECT_EQ(clip.channel(0)[0], 0.25);
  EXPECT_EQ(clip.channel(0)[1], -0.75);
}
