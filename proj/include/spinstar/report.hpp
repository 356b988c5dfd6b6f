#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "spinstar/model.hpp"

namespace spinstar {

/// Matrix element selector, zero-based.
struct Observable {
  std::size_t row = 0;
  std::size_t col = 0;

  bool diagonal() const { return row == col; }
  /// "11" style label, one-based; indices are joined by '_' once either
  /// exceeds 9.
  std::string label() const;
  bool operator==(const Observable&) const = default;
};

/// Every element in row-major order.
std::vector<Observable> all_elements(std::size_t dim);

/// CSV layout:
///   # key=value          (metadata, one per line)
///   t,re_11,im_11,...    (header)
///   rows, 17 significant digits, LF endings
void write_csv(std::ostream& os, const TimeSeries& ts, const std::vector<Observable>& observables);
void write_csv_file(const std::string& path, const TimeSeries& ts, const std::vector<Observable>& observables);

struct CsvTable {
  std::map<std::string, std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Throws ConfigError with a line number on malformed input.
CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::string& path);

/// Rebuilds a TimeSeries from a full-matrix CSV (all elements present).
/// The model fields are restored from the metadata when present.
TimeSeries to_time_series(const CsvTable& table);

std::string format_double(double x);

struct ComparisonReport {
  std::string reference;
  std::string method;
  double threshold = 0.05;
  double max_error = 0.0;
  double mean_error = 0.0;
  /// First time the population error exceeds threshold; t_end if never.
  /// A series that stopped early (divergence) counts as exceeding at the
  /// first missing time.
  double horizon = 0.0;
  std::vector<double> times;
  /// Per-sample error over the selected observables and its running max.
  std::vector<double> error;
  std::vector<double> running_max;
};

/// Elementwise comparison on the selected observables; the horizon uses
/// the diagonal ones (populations), or all when none is diagonal.
/// Throws ConfigError when the grids differ (other may be a prefix).
ComparisonReport compare_series(const TimeSeries& reference, const TimeSeries& other,
                                const std::vector<Observable>& observables, double threshold = 0.05);

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
};

/// Least-squares fit of log y = log c + p log x; needs >= 2 distinct
/// positive x and positive y.
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace spinstar
