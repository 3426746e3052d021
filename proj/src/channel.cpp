#include "eecr/channel.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "eecr/error.hpp"

namespace eecr {

void FadingConfig::validate() const {
  if (!(mean_gain_h > 0.0)) throw InvalidConfig("mean_gain_h must be > 0");
  if (!(mean_gain_g > 0.0)) throw InvalidConfig("mean_gain_g must be > 0");
  if (n_samples < 1) throw InvalidConfig("n_samples must be >= 1");
}

ChannelSampleSet::ChannelSampleSet(std::vector<double> gains_h, std::vector<double> gains_g)
    : gains_h_(std::move(gains_h)), gains_g_(std::move(gains_g)) {
  if (gains_h_.size() != gains_g_.size()) {
    throw InvalidConfig("gains_h and gains_g must have equal length");
  }
  for (std::size_t i = 0; i < gains_h_.size(); ++i) {
    if (!(gains_h_[i] >= 0.0) || !(gains_g_[i] >= 0.0) || !std::isfinite(gains_h_[i]) ||
        !std::isfinite(gains_g_[i])) {
      throw InvalidConfig("channel gains must be finite and nonnegative (sample " +
                          std::to_string(i) + ")");
    }
  }
}

ChannelSampleSet draw_samples(const FadingConfig& cfg) {
  cfg.validate();
  // Separate streams keep |h|^2 and |g|^2 independent and let either mean be
  // changed without perturbing the other link's draws.
  std::mt19937_64 eng_h(cfg.seed);
  std::mt19937_64 eng_g(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<double> h(cfg.n_samples), g(cfg.n_samples);
  for (std::size_t i = 0; i < cfg.n_samples; ++i) {
    h[i] = cfg.mean_gain_h * exponential_unit(eng_h);
    g[i] = cfg.mean_gain_g * exponential_unit(eng_g);
  }
  return ChannelSampleSet(std::move(h), std::move(g));
}

double expectation(const ChannelSampleSet& set, const std::function<double(double, double)>& f) {
  const auto& h = set.gains_h();
  const auto& g = set.gains_g();
  if (h.empty()) throw InvalidConfig("expectation over an empty sample set");
  // Neumaier-compensated, strictly in index order.
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double v = f(h[i], g[i]);
    if (!std::isfinite(v)) throw EvaluationError("non-finite integrand", i);
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return (sum + comp) / static_cast<double>(h.size());
}

namespace {

std::string format_exact(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw InvalidConfig("bad number '" + s + "' on line " + std::to_string(line));
  }
  return v;
}

}  // namespace

void ChannelSampleSet::write_csv(std::ostream& os) const {
  os << "h2,g2\n";
  for (std::size_t i = 0; i < size(); ++i) {
    os << format_exact(gains_h_[i]) << ',' << format_exact(gains_g_[i]) << '\n';
  }
}

ChannelSampleSet ChannelSampleSet::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidConfig("empty channel CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "h2,g2") throw InvalidConfig("channel CSV header must be 'h2,g2'");
  std::vector<double> h, g;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw InvalidConfig("missing comma on line " + std::to_string(lineno));
    }
    h.push_back(parse_double(line.substr(0, comma), lineno));
    g.push_back(parse_double(line.substr(comma + 1), lineno));
  }
  return ChannelSampleSet(std::move(h), std::move(g));
}

}  // namespace eecr
