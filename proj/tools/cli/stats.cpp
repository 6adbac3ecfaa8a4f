#include "stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "qcal/errors.hpp"

namespace qcal::cli {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw EmptySetError("quantile of an empty set");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::span<const double> values) {
  if (values.empty()) throw EmptySetError("statistics of an empty set");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  BoxStats s;
  s.count = sorted.size();
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return s;
}

WindowMode parse_window_mode(std::string_view text) {
  if (text == "disjoint") return WindowMode::Disjoint;
  if (text == "sliding") return WindowMode::Sliding;
  throw ConfigError("window mode must be 'disjoint' or 'sliding'");
}

std::vector<CurvePoint> windowed_curve(std::span<const EpisodeRecord> log, std::size_t window,
                                       WindowMode mode) {
  if (window == 0) throw ConfigError("window must be >= 1");
  std::vector<CurvePoint> out;
  if (log.size() < window) return out;
  const std::size_t stride = mode == WindowMode::Disjoint ? window : 1;
  for (std::size_t start = 0; start + window <= log.size(); start += stride) {
    const auto slice = log.subspan(start, window);
    // deviations from the first value keep a constant window exactly flat
    const double origin = 1.0 - slice.front().fidelity;
    double sum = 0.0;
    for (const auto& r : slice) sum += (1.0 - r.fidelity) - origin;
    const double shift = sum / static_cast<double>(window);
    double ss = 0.0;
    for (const auto& r : slice) {
      const double d = (1.0 - r.fidelity) - origin - shift;
      ss += d * d;
    }
    const double mean = origin + shift;
    out.push_back({slice.front().episode, slice.back().episode, mean,
                   std::sqrt(ss / static_cast<double>(window))});
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_log_header(std::ostream& out) { out << kLogHeader << '\n'; }

void write_log_row(std::ostream& out, const EpisodeRecord& rec) {
  out << rec.episode << ',' << format_double(rec.fidelity) << ',' << format_double(rec.reward) << ','
      << format_double(rec.epsilon) << ',' << format_double(rec.epsilon_max) << ','
      << format_double(rec.best_fidelity) << '\n';
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_field(std::string_view s, std::size_t lineno) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("log line " + std::to_string(lineno) + ": bad field '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<EpisodeRecord> parse_log(std::string_view text) {
  std::vector<EpisodeRecord> out;
  std::size_t lineno = 0;
  bool header = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header) {
      if (line != kLogHeader) throw ParseError("log header must be '" + std::string(kLogHeader) + "'");
      header = true;
      continue;
    }
    const auto f = split(line);
    if (f.size() != 6) {
      throw ParseError("log line " + std::to_string(lineno) + ": expected 6 fields, got " +
                       std::to_string(f.size()));
    }
    EpisodeRecord r;
    r.episode = parse_field<std::uint64_t>(f[0], lineno);
    r.fidelity = parse_field<double>(f[1], lineno);
    r.reward = parse_field<double>(f[2], lineno);
    r.epsilon = parse_field<double>(f[3], lineno);
    r.epsilon_max = parse_field<double>(f[4], lineno);
    r.best_fidelity = parse_field<double>(f[5], lineno);
    out.push_back(r);
  }
  if (!header) throw ParseError("log is empty");
  return out;
}

std::vector<EpisodeRecord> read_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read log " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_log(buf.str());
}

std::string curve_to_csv(std::span<const CurvePoint> curve) {
  std::ostringstream out;
  out << "first_episode,last_episode,mean_infidelity,std_infidelity\n";
  for (const auto& p : curve) {
    out << p.first_episode << ',' << p.last_episode << ',' << format_double(p.mean) << ','
        << format_double(p.stddev) << '\n';
  }
  return out.str();
}

}  // namespace qcal::cli
