#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "loopsim/engine.hpp"
#include "loopsim/stats.hpp"

namespace loopsim {

// File formats. All text is UTF-8 with LF line endings; reals are written with
// 17 significant digits so that a re-read value is bit-identical.
//   events-csv      step,user_id,group,theta,x,y_hat,d,p,y,dataset_size
//   checkpoints-csv step,group,statistic_family,count,mean,q1,median,q3,
//                   whisker_lo,whisker_hi,n_outliers
//   jsonl           one event object per line, same field names as events-csv
//   series-csv      step,group,count,mean_theta,mean_x_minus_theta,
//                   mean_yhat_minus_theta,mean_yhat
// The group column holds the group label.
enum class TraceFormat { kEventsCsv, kCheckpointsCsv, kJsonl, kSeriesCsv };

std::string_view format_name(TraceFormat format);
TraceFormat format_from_name(std::string_view name);  // throws UsageError

std::string format_real(double value);

void write_trace(const Trace& trace, TraceFormat format, std::ostream& out);
void export_trace(const Trace& trace, TraceFormat format, const std::filesystem::path& path);

struct CheckpointRow {
  std::uint64_t step = 0;
  std::string group;
  StatFamily family = StatFamily::kTheta;
  std::size_t count = 0;
  double mean = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_lo = 0.0;
  double whisker_hi = 0.0;
  std::size_t n_outliers = 0;
};

struct SeriesRow {
  std::uint64_t step = 0;
  std::string group;
  double count = 0.0;  // fractional once averaged over seeds
  double mean_theta = 0.0;
  double mean_x_minus_theta = 0.0;
  double mean_yhat_minus_theta = 0.0;
  double mean_yhat = 0.0;
};

// Rows in file order: checkpoint, then family, then group.
std::vector<CheckpointRow> checkpoint_rows(const Trace& trace);
std::vector<SeriesRow> series_rows(const Trace& trace);

// Readers throw IoError with the offending line number on malformed input.
std::vector<CheckpointRow> read_checkpoints_csv(std::istream& in);
std::vector<SeriesRow> read_series_csv(std::istream& in);
// `labels` maps the group column back to group indices.
std::vector<EventRecord> read_events_csv(std::istream& in,
                                         const std::vector<std::string>& labels);

std::vector<CheckpointRow> import_checkpoints(const std::filesystem::path& path);
std::vector<SeriesRow> import_series(const std::filesystem::path& path);

bool operator==(const CheckpointRow& a, const CheckpointRow& b);

}  // namespace loopsim
