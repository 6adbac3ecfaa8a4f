#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qcal/agent.hpp"

namespace qcal::cli {

/// Box-plot summary. Quartiles use linear interpolation between order
/// statistics at position p * (n - 1).
struct BoxStats {
  std::size_t count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

/// Throws EmptySetError on empty input.
BoxStats box_stats(std::span<const double> values);
double quantile_sorted(std::span<const double> sorted, double p);

enum class WindowMode { Disjoint, Sliding };
WindowMode parse_window_mode(std::string_view text);

struct CurvePoint {
  std::uint64_t first_episode = 0;
  std::uint64_t last_episode = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
};

/// Windowed mean and standard deviation of per-episode infidelity.
/// Disjoint windows drop a trailing partial window; sliding windows advance
/// one episode at a time.
std::vector<CurvePoint> windowed_curve(std::span<const EpisodeRecord> log, std::size_t window,
                                       WindowMode mode);

inline constexpr std::string_view kLogHeader =
    "episode,fidelity,reward,epsilon,epsilon_max,best_fidelity";

/// Shortest round-trip decimal form.
std::string format_double(double v);

void write_log_header(std::ostream& out);
void write_log_row(std::ostream& out, const EpisodeRecord& rec);
/// Throws ParseError on a wrong header, a malformed row or a wrong field count.
std::vector<EpisodeRecord> parse_log(std::string_view text);
std::vector<EpisodeRecord> read_log(const std::filesystem::path& path);

std::string curve_to_csv(std::span<const CurvePoint> curve);

}  // namespace qcal::cli
