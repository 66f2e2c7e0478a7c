#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace seld {

// Multichannel real-valued audio. All channels share one length.
class AudioClip {
 public:
  AudioClip() = default;
  AudioClip(std::vector<std::vector<double>> channels, double sample_rate);

  // Zero-filled clip.
  static AudioClip silent(std::size_t channel_count, std::size_t sample_count,
                          double sample_rate);

  std::size_t channel_count() const { return channels_.size(); }
  std::size_t sample_count() const {
    return channels_.empty() ? 0 : channels_.front().size();
  }
  double sample_rate() const { return sample_rate_; }
  double duration_seconds() const {
    return static_cast<double>(sample_count()) / sample_rate_;
  }
  bool empty() const { return sample_count() == 0; }

  std::span<const double> channel(std::size_t c) const { return channels_.at(c); }
  std::span<double> channel(std::size_t c) { return channels_.at(c); }

 private:
  std::vector<std::vector<double>> channels_;
  double sample_rate_ = 0.0;
};

enum class WindowKind { kHann, kRectangular };

// Analysis parameters. Defaults are the 48 kHz task settings: 2048-sample
// window, 960-sample hop (20 ms), 2048-point FFT.
struct StftConfig {
  std::size_t window_length = 2048;
  std::size_t hop_length = 960;
  std::size_t fft_size = 2048;
  WindowKind window = WindowKind::kHann;

  std::size_t bin_count() const { return fft_size / 2 + 1; }
  // Throws seld::Error unless 0 < hop <= window <= fft.
  void validate() const;
};

// Periodic taper of length cfg.window_length.
std::vector<double> make_window(const StftConfig& cfg);

// Complex STFT values addressed as (channel, frame, bin). Internally the
// channel index varies fastest so a (frame, bin) snapshot is contiguous.
class TimeFreqTensor {
 public:
  TimeFreqTensor() = default;
  TimeFreqTensor(std::size_t channels, std::size_t frames, const StftConfig& cfg,
                 double sample_rate);

  std::size_t channel_count() const { return channels_; }
  std::size_t frame_count() const { return frames_; }
  std::size_t bin_count() const { return bins_; }
  const StftConfig& config() const { return config_; }
  double sample_rate() const { return sample_rate_; }
  double hop_seconds() const {
    return static_cast<double>(config_.hop_length) / sample_rate_;
  }
  bool empty() const { return values_.empty(); }

  std::complex<double>& at(std::size_t channel, std::size_t frame, std::size_t bin) {
    return values_[offset(frame, bin) + channel];
  }
  const std::complex<double>& at(std::size_t channel, std::size_t frame,
                                 std::size_t bin) const {
    return values_[offset(frame, bin) + channel];
  }

  // All channels at one TF bin.
  std::span<const std::complex<double>> snapshot(std::size_t frame,
                                                 std::size_t bin) const {
    return {values_.data() + offset(frame, bin), channels_};
  }

  std::span<const std::complex<double>> values() const { return values_; }

 private:
  std::size_t offset(std::size_t frame, std::size_t bin) const {
    return (frame * bins_ + bin) * channels_;
  }

  std::size_t channels_ = 0;
  std::size_t frames_ = 0;
  std::size_t bins_ = 0;
  StftConfig config_;
  double sample_rate_ = 0.0;
  std::vector<std::complex<double>> values_;
};

// Number of frames stft() emits for a clip of the given length:
// ceil(sample_count / hop_length). A 60 s clip at 48 kHz gives 3000.
std::size_t stft_frame_count(std::size_t sample_count, const StftConfig& cfg);

// Centered analysis: frame t covers samples [t*hop - W/2, t*hop + W/2) of the
// clip, with zeros outside the clip. Bins 0..fft_size/2 are kept.
//
// Energy relation per frame, with x_w the windowed frame and c_k = 1 for the
// DC and Nyquist bins, 2 otherwise:
//   sum_k c_k |X_k|^2 = fft_size * sum_n x_w[n]^2
TimeFreqTensor stft(const AudioClip& clip, const StftConfig& cfg = {});

double bin_to_freq(std::size_t bin, const StftConfig& cfg, double sample_rate);
// Nearest bin; throws if the frequency falls outside [0, sample_rate/2].
std::size_t freq_to_bin(double freq_hz, const StftConfig& cfg, double sample_rate);

}  // namespace seld
