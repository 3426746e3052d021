#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace eecr {

/// Rayleigh fading for the secondary link (h) and the interference link (g).
struct FadingConfig {
  double mean_gain_h = 1.0;  // E|h|^2
  double mean_gain_g = 1.0;  // E|g|^2
  std::size_t n_samples = 10000;
  std::uint64_t seed = 42;

  void validate() const;
};

/// Joint fading realizations, each carrying weight 1/size().
class ChannelSampleSet {
 public:
  ChannelSampleSet() = default;
  ChannelSampleSet(std::vector<double> gains_h, std::vector<double> gains_g);

  const std::vector<double>& gains_h() const noexcept { return gains_h_; }
  const std::vector<double>& gains_g() const noexcept { return gains_g_; }
  std::size_t size() const noexcept { return gains_h_.size(); }

  /// CSV with header `h2,g2`, values printed round-trip exact.
  void write_csv(std::ostream& os) const;
  static ChannelSampleSet read_csv(std::istream& is);

 private:
  std::vector<double> gains_h_;
  std::vector<double> gains_g_;
};

ChannelSampleSet draw_samples(const FadingConfig& cfg);

/// Sample average of f(|h|^2, |g|^2), summed in index order.
/// Throws EvaluationError on the first non-finite value.
double expectation(const ChannelSampleSet& set, const std::function<double(double, double)>& f);

/// Unit-mean exponential variate built from a 53-bit uniform, so draws are
/// identical across standard libraries.
template <class Engine>
double exponential_unit(Engine& eng) {
  const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;  // [0, 1)
  return -std::log1p(-u);
}

template <class Engine>
double uniform_unit(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace eecr
