#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "seld/dsp.hpp"

namespace seld {

enum class WavSampleFormat { kPcm16, kFloat32 };

// Reads interleaved RIFF/WAVE data. Accepts PCM 16/24/32-bit and IEEE float
// 32/64-bit, plain or WAVE_FORMAT_EXTENSIBLE. PCM is scaled by 1/2^(bits-1).
// Throws seld::Error on malformed or empty data, or when expected_channels is
// given and does not match.
AudioClip read_wav(std::istream& in, std::optional<std::size_t> expected_channels = {});
AudioClip read_wav(const std::filesystem::path& path,
                   std::optional<std::size_t> expected_channels = {});

// 32-bit float is the default and round-trips float material bit-exactly.
void write_wav(const AudioClip& clip, std::ostream& out,
               WavSampleFormat format = WavSampleFormat::kFloat32);
void write_wav(const AudioClip& clip, const std::filesystem::path& path,
               WavSampleFormat format = WavSampleFormat::kFloat32);

}  // namespace seld
