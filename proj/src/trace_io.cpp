#include "loopsim/trace_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "loopsim/error.hpp"

namespace loopsim {
namespace {

constexpr std::string_view kEventsHeader =
    "step,user_id,group,theta,x,y_hat,d,p,y,dataset_size";
constexpr std::string_view kCheckpointsHeader =
    "step,group,statistic_family,count,mean,q1,median,q3,whisker_lo,whisker_hi,n_outliers";
constexpr std::string_view kSeriesHeader =
    "step,group,count,mean_theta,mean_x_minus_theta,mean_yhat_minus_theta,mean_yhat";

const std::string& label_of(const Trace& trace, GroupId g) {
  if (g.index >= trace.group_labels.size()) {
    throw InvariantError("trace has no label for group " + std::to_string(g.index));
  }
  return trace.group_labels[g.index];
}

void write_events_csv(const Trace& trace, std::ostream& out) {
  out << kEventsHeader << '\n';
  for (const auto& e : trace.events) {
    out << e.step << ',' << e.user_id << ',' << label_of(trace, e.group) << ','
        << format_real(e.theta) << ',' << format_real(e.x) << ','
        << format_real(e.y_hat) << ',' << e.d << ',' << format_real(e.p) << ','
        << e.y << ',' << e.dataset_size << '\n';
  }
}

void write_jsonl(const Trace& trace, std::ostream& out) {
  for (const auto& e : trace.events) {
    // Labels are plain identifiers; no JSON escaping is needed beyond quoting.
    out << "{\"step\":" << e.step << ",\"user_id\":" << e.user_id << ",\"group\":\""
        << label_of(trace, e.group) << "\",\"theta\":" << format_real(e.theta)
        << ",\"x\":" << format_real(e.x) << ",\"y_hat\":" << format_real(e.y_hat)
        << ",\"d\":" << e.d << ",\"p\":" << format_real(e.p) << ",\"y\":" << e.y
        << ",\"dataset_size\":" << e.dataset_size << "}\n";
  }
}

void write_checkpoints_csv(const Trace& trace, std::ostream& out) {
  out << kCheckpointsHeader << '\n';
  for (const auto& r : checkpoint_rows(trace)) {
    out << r.step << ',' << r.group << ',' << family_name(r.family) << ',' << r.count
        << ',' << format_real(r.mean) << ',' << format_real(r.q1) << ','
        << format_real(r.median) << ',' << format_real(r.q3) << ','
        << format_real(r.whisker_lo) << ',' << format_real(r.whisker_hi) << ','
        << r.n_outliers << '\n';
  }
}

void write_series_csv(const Trace& trace, std::ostream& out) {
  out << kSeriesHeader << '\n';
  for (const auto& r : series_rows(trace)) {
    out << r.step << ',' << r.group << ',' << format_real(r.count) << ','
        << format_real(r.mean_theta)
        << ',' << format_real(r.mean_x_minus_theta) << ','
        << format_real(r.mean_yhat_minus_theta) << ',' << format_real(r.mean_yhat)
        << '\n';
  }
}

// Splits CSV lines; fields never contain commas or quotes.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string_view header, std::size_t columns)
      : in_(in), columns_(columns) {
    std::string line;
    if (!std::getline(in_, line)) fail("missing header");
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) fail("unexpected header '" + line + "'");
  }

  bool next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields_.clear();
      std::size_t start = 0;
      while (true) {
        const auto comma = line.find(',', start);
        fields_.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      if (fields_.size() != columns_) {
        fail("expected " + std::to_string(columns_) + " fields, got " +
             std::to_string(fields_.size()));
      }
      return true;
    }
    return false;
  }

  const std::string& text(std::size_t i) const { return fields_[i]; }

  double real(std::size_t i) const {
    const std::string& f = fields_[i];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc{} || ptr != f.data() + f.size()) {
      fail("field " + std::to_string(i + 1) + ": '" + f + "' is not a number");
    }
    return v;
  }

  std::uint64_t integer(std::size_t i) const {
    const std::string& f = fields_[i];
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc{} || ptr != f.data() + f.size()) {
      fail("field " + std::to_string(i + 1) + ": '" + f + "' is not an integer");
    }
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw IoError("line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& in_;
  std::size_t columns_;
  std::size_t line_no_ = 0;
  std::vector<std::string> fields_;
};

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b) ||
         (a != a && b != b);
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

std::string_view format_name(TraceFormat f) {
  switch (f) {
    case TraceFormat::kEventsCsv: return "events-csv";
    case TraceFormat::kCheckpointsCsv: return "checkpoints-csv";
    case TraceFormat::kJsonl: return "jsonl";
    case TraceFormat::kSeriesCsv: return "series-csv";
  }
  return "unknown";
}

TraceFormat format_from_name(std::string_view name) {
  for (auto f : {TraceFormat::kEventsCsv, TraceFormat::kCheckpointsCsv,
                 TraceFormat::kJsonl, TraceFormat::kSeriesCsv}) {
    if (format_name(f) == name) return f;
  }
  throw UsageError("unknown trace format '" + std::string(name) + "'");
}

std::string format_real(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
  if (ec != std::errc{}) throw InvariantError("format_real: conversion failed");
  return std::string(buf.data(), ptr);
}

void write_trace(const Trace& trace, TraceFormat format, std::ostream& out) {
  switch (format) {
    case TraceFormat::kEventsCsv: write_events_csv(trace, out); break;
    case TraceFormat::kCheckpointsCsv: write_checkpoints_csv(trace, out); break;
    case TraceFormat::kJsonl: write_jsonl(trace, out); break;
    case TraceFormat::kSeriesCsv: write_series_csv(trace, out); break;
  }
}

void export_trace(const Trace& trace, TraceFormat format,
                  const std::filesystem::path& path) {
  // Binary mode keeps LF line endings on every platform.
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_trace(trace, format, out);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<CheckpointRow> checkpoint_rows(const Trace& trace) {
  std::vector<CheckpointRow> rows;
  for (const auto& cp : trace.checkpoints) {
    for (const auto& [family, per_group] : cp.stats) {
      for (const auto& st : per_group) {
        rows.push_back({cp.step, label_of(trace, st.group), family, st.count, st.mean,
                        st.q1, st.median, st.q3, st.whisker_lo, st.whisker_hi,
                        st.outliers.size()});
      }
    }
  }
  return rows;
}

std::vector<SeriesRow> series_rows(const Trace& trace) {
  std::vector<SeriesRow> rows;
  for (const auto& sp : trace.series) {
    for (std::size_t g = 0; g < sp.counts.size(); ++g) {
      rows.push_back({sp.step, label_of(trace, GroupId{static_cast<std::uint32_t>(g)}),
                      static_cast<double>(sp.counts[g]), sp.mean_theta[g], sp.mean_measurement_error[g],
                      sp.mean_prediction_error[g], sp.mean_y_hat[g]});
    }
  }
  return rows;
}

std::vector<CheckpointRow> read_checkpoints_csv(std::istream& in) {
  CsvReader csv(in, kCheckpointsHeader, 11);
  std::vector<CheckpointRow> rows;
  while (csv.next()) {
    CheckpointRow r;
    r.step = csv.integer(0);
    r.group = csv.text(1);
    try {
      r.family = family_from_name(csv.text(2));
    } catch (const UsageError& e) {
      csv.fail(e.what());
    }
    r.count = csv.integer(3);
    r.mean = csv.real(4);
    r.q1 = csv.real(5);
    r.median = csv.real(6);
    r.q3 = csv.real(7);
    r.whisker_lo = csv.real(8);
    r.whisker_hi = csv.real(9);
    r.n_outliers = csv.integer(10);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SeriesRow> read_series_csv(std::istream& in) {
  CsvReader csv(in, kSeriesHeader, 7);
  std::vector<SeriesRow> rows;
  while (csv.next()) {
    rows.push_back({csv.integer(0), csv.text(1), csv.real(2), csv.real(3),
                    csv.real(4), csv.real(5), csv.real(6)});
  }
  return rows;
}

std::vector<EventRecord> read_events_csv(std::istream& in,
                                         const std::vector<std::string>& labels) {
  CsvReader csv(in, kEventsHeader, 10);
  std::vector<EventRecord> events;
  while (csv.next()) {
    EventRecord e;
    e.step = csv.integer(0);
    e.user_id = csv.integer(1);
    bool found = false;
    for (std::size_t g = 0; g < labels.size() && !found; ++g) {
      if (labels[g] == csv.text(2)) {
        e.group = GroupId{static_cast<std::uint32_t>(g)};
        found = true;
      }
    }
    if (!found) csv.fail("unknown group '" + csv.text(2) + "'");
    e.theta = csv.real(3);
    e.x = csv.real(4);
    e.y_hat = csv.real(5);
    e.d = static_cast<int>(csv.integer(6));
    e.p = csv.real(7);
    e.y = static_cast<int>(csv.integer(8));
    e.dataset_size = csv.integer(9);
    events.push_back(e);
  }
  return events;
}

std::vector<CheckpointRow> import_checkpoints(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  try {
    return read_checkpoints_csv(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::vector<SeriesRow> import_series(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  try {
    return read_series_csv(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

bool operator==(const CheckpointRow& a, const CheckpointRow& b) {
  return a.step == b.step && a.group == b.group && a.family == b.family &&
         a.count == b.count && same_bits(a.mean, b.mean) && same_bits(a.q1, b.q1) &&
         same_bits(a.median, b.median) && same_bits(a.q3, b.q3) &&
         same_bits(a.whisker_lo, b.whisker_lo) && same_bits(a.whisker_hi, b.whisker_hi) &&
         a.n_outliers == b.n_outliers;
}

}  // namespace loopsim
