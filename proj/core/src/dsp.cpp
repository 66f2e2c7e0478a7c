#include "seld/dsp.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <unsupported/Eigen/FFT>

#include "seld/error.hpp"

namespace seld {

AudioClip::AudioClip(std::vector<std::vector<double>> channels, double sample_rate)
    : channels_(std::move(channels)), sample_rate_(sample_rate) {
  if (channels_.empty()) throw Error("audio clip needs at least one channel");
  if (!(sample_rate_ > 0.0)) throw Error("audio clip sample rate must be positive");
  const auto n = channels_.front().size();
  for (const auto& ch : channels_) {
    if (ch.size() != n) throw Error("audio clip channels differ in length");
  }
}

AudioClip AudioClip::silent(std::size_t channel_count, std::size_t sample_count,
                            double sample_rate) {
  return AudioClip(std::vector<std::vector<double>>(
                       channel_count, std::vector<double>(sample_count, 0.0)),
                   sample_rate);
}

void StftConfig::validate() const {
  if (hop_length == 0 || window_length == 0 || fft_size == 0) {
    throw Error("stft lengths must be positive");
  }
  if (hop_length > window_length) throw Error("stft hop exceeds window length");
  if (window_length > fft_size) throw Error("stft window exceeds fft size");
}

std::vector<double> make_window(const StftConfig& cfg) {
  std::vector<double> w(cfg.window_length, 1.0);
  if (cfg.window == WindowKind::kHann) {
    const double n = static_cast<double>(cfg.window_length);
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n);
    }
  }
  return w;
}

TimeFreqTensor::TimeFreqTensor(std::size_t channels, std::size_t frames,
                               const StftConfig& cfg, double sample_rate)
    : channels_(channels),
      frames_(frames),
      bins_(cfg.bin_count()),
      config_(cfg),
      sample_rate_(sample_rate),
      values_(channels * frames * cfg.bin_count()) {}

std::size_t stft_frame_count(std::size_t sample_count, const StftConfig& cfg) {
  return (sample_count + cfg.hop_length - 1) / cfg.hop_length;
}

TimeFreqTensor stft(const AudioClip& clip, const StftConfig& cfg) {
  cfg.validate();
  if (clip.empty()) throw Error("stft of an empty clip");

  const std::size_t n = clip.sample_count();
  const std::size_t frames = stft_frame_count(n, cfg);
  const std::size_t bins = cfg.bin_count();
  const auto window = make_window(cfg);
  const auto half = static_cast<std::ptrdiff_t>(cfg.window_length / 2);

  TimeFreqTensor out(clip.channel_count(), frames, cfg, clip.sample_rate());

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> buffer(cfg.fft_size);
  std::vector<std::complex<double>> spectrum;

  for (std::size_t c = 0; c < clip.channel_count(); ++c) {
    const auto x = clip.channel(c);
    for (std::size_t t = 0; t < frames; ++t) {
      std::fill(buffer.begin(), buffer.end(), 0.0);
      const auto start = static_cast<std::ptrdiff_t>(t * cfg.hop_length) - half;
      for (std::size_t i = 0; i < cfg.window_length; ++i) {
        const auto s = start + static_cast<std::ptrdiff_t>(i);
        if (s >= 0 && s < static_cast<std::ptrdiff_t>(n)) {
          buffer[i] = window[i] * x[static_cast<std::size_t>(s)];
        }
      }
      fft.fwd(spectrum, buffer);
      for (std::size_t k = 0; k < bins; ++k) out.at(c, t, k) = spectrum[k];
    }
  }
  return out;
}

double bin_to_freq(std::size_t bin, const StftConfig& cfg, double sample_rate) {
  if (bin > cfg.fft_size / 2) {
    throw Error("bin " + std::to_string(bin) + " outside [0, " +
                std::to_string(cfg.fft_size / 2) + "]");
  }
  return static_cast<double>(bin) * sample_rate / static_cast<double>(cfg.fft_size);
}

std::size_t freq_to_bin(double freq_hz, const StftConfig& cfg, double sample_rate) {
  const double k = freq_hz * static_cast<double>(cfg.fft_size) / sample_rate;
  const double rounded = std::round(k);
  if (!std::isfinite(k) || freq_hz < 0.0 || freq_hz > sample_rate / 2.0) {
    throw Error("frequency " + std::to_string(freq_hz) + " Hz has no STFT bin");
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace seld
