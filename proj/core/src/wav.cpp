#include "seld/wav.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "seld/error.hpp"

namespace seld {
namespace {

static_assert(std::endian::native == std::endian::little,
              "wav i/o assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T load(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

std::uint32_t read_u32(std::istream& in) {
  std::array<std::uint8_t, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  if (!in) throw Error("wav: truncated header");
  return load<std::uint32_t>(b.data());
}

std::string read_tag(std::istream& in) {
  std::string tag(4, '\0');
  in.read(tag.data(), 4);
  if (!in) throw Error("wav: truncated header");
  return tag;
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

struct Format {
  std::uint16_t tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

double decode_sample(const std::uint8_t* p, const Format& f) {
  if (f.tag == kFormatFloat) {
    if (f.bits == 32) return static_cast<double>(load<float>(p));
    return load<double>(p);
  }
  switch (f.bits) {
    case 16:
      return static_cast<double>(load<std::int16_t>(p)) / 32768.0;
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(p[0]) |
                       (static_cast<std::int32_t>(p[1]) << 8) |
                       (static_cast<std::int32_t>(p[2]) << 16);
      if (v & 0x800000) v -= 0x1000000;
      return static_cast<double>(v) / 8388608.0;
    }
    case 32:
      return static_cast<double>(load<std::int32_t>(p)) / 2147483648.0;
    default:
      throw Error("wav: unsupported PCM bit depth " + std::to_string(f.bits));
  }
}

}  // namespace

AudioClip read_wav(std::istream& in, std::optional<std::size_t> expected_channels) {
  if (read_tag(in) != "RIFF") throw Error("wav: missing RIFF header");
  read_u32(in);
  if (read_tag(in) != "WAVE") throw Error("wav: missing WAVE tag");

  std::optional<Format> fmt;
  std::vector<std::uint8_t> data;
  bool have_data = false;

  while (!have_data) {
    std::string tag(4, '\0');
    in.read(tag.data(), 4);
    if (in.gcount() == 0) break;
    if (!in) throw Error("wav: truncated chunk header");
    const std::uint32_t size = read_u32(in);
    if (tag == "fmt ") {
      if (size < 16) throw Error("wav: fmt chunk too small");
      std::vector<std::uint8_t> body(size);
      in.read(reinterpret_cast<char*>(body.data()), size);
      if (!in) throw Error("wav: truncated fmt chunk");
      if (size & 1u) in.ignore(1);
      Format f;
      f.tag = load<std::uint16_t>(body.data());
      f.channels = load<std::uint16_t>(body.data() + 2);
      f.sample_rate = load<std::uint32_t>(body.data() + 4);
      f.bits = load<std::uint16_t>(body.data() + 14);
      if (f.tag == kFormatExtensible) {
        if (size < 26) throw Error("wav: extensible fmt chunk too small");
        // First two bytes of the subformat GUID carry the real format tag.
        f.tag = load<std::uint16_t>(body.data() + 24);
      }
      if (f.tag != kFormatPcm && f.tag != kFormatFloat) {
        throw Error("wav: unsupported format tag " + std::to_string(f.tag));
      }
      if (f.tag == kFormatFloat && f.bits != 32 && f.bits != 64) {
        throw Error("wav: unsupported float bit depth " + std::to_string(f.bits));
      }
      fmt = f;
    } else if (tag == "data") {
      data.resize(size);
      in.read(reinterpret_cast<char*>(data.data()), size);
      // Tolerate a data chunk whose declared size overruns the file.
      data.resize(static_cast<std::size_t>(in.gcount()));
      have_data = true;
    } else {
      in.ignore(size + (size & 1u));
      if (!in) throw Error("wav: truncated chunk '" + tag + "'");
    }
  }

  if (!fmt) throw Error("wav: missing fmt chunk");
  if (!have_data) throw Error("wav: missing data chunk");
  if (fmt->channels == 0) throw Error("wav: zero channels");
  if (fmt->sample_rate == 0) throw Error("wav: zero sample rate");
  if (expected_channels && *expected_channels != fmt->channels) {
    throw Error("wav: expected " + std::to_string(*expected_channels) +
                " channels, found " + std::to_string(fmt->channels));
  }

  const std::size_t bytes = fmt->bits / 8;
  const std::size_t frame_bytes = bytes * fmt->channels;
  const std::size_t n = data.size() / frame_bytes;
  if (n == 0) throw Error("wav: no audio samples");

  std::vector<std::vector<double>> channels(fmt->channels, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < fmt->channels; ++c) {
      channels[c][i] = decode_sample(data.data() + i * frame_bytes + c * bytes, *fmt);
    }
  }
  return AudioClip(std::move(channels), static_cast<double>(fmt->sample_rate));
}

AudioClip read_wav(const std::filesystem::path& path,
                   std::optional<std::size_t> expected_channels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_wav(in, expected_channels);
}

void write_wav(const AudioClip& clip, std::ostream& out, WavSampleFormat format) {
  if (clip.empty()) throw Error("wav: refusing to write an empty clip");
  const bool is_float = format == WavSampleFormat::kFloat32;
  const std::uint16_t bits = is_float ? 32 : 16;
  const auto channels = static_cast<std::uint16_t>(clip.channel_count());
  const auto rate = static_cast<std::uint32_t>(std::lround(clip.sample_rate()));
  const std::uint32_t block = channels * (bits / 8);
  const auto data_bytes = static_cast<std::uint32_t>(clip.sample_count() * block);

  out.write("RIFF", 4);
  put<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put<std::uint32_t>(out, 16);
  put<std::uint16_t>(out, is_float ? kFormatFloat : kFormatPcm);
  put<std::uint16_t>(out, channels);
  put<std::uint32_t>(out, rate);
  put<std::uint32_t>(out, rate * block);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(block));
  put<std::uint16_t>(out, bits);
  out.write("data", 4);
  put<std::uint32_t>(out, data_bytes);

  std::vector<char> buf(data_bytes);
  char* p = buf.data();
  for (std::size_t i = 0; i < clip.sample_count(); ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double v = clip.channel(c)[i];
      if (is_float) {
        const auto f = static_cast<float>(v);
        std::memcpy(p, &f, 4);
        p += 4;
      } else {
        const double scaled = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
        const auto s = static_cast<std::int16_t>(scaled);
        std::memcpy(p, &s, 2);
        p += 2;
      }
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("wav: write failed");
}

void write_wav(const AudioClip& clip, const std::filesystem::path& path,
               WavSampleFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot create " + path.string());
  write_wav(clip, out, format);
}

}  // namespace seld
