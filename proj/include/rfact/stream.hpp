#pragma once

#include "rfact/types.hpp"

#include <deque>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

namespace rfact {

struct ParsedReading {
  TagReading reading;
  std::optional<std::string> label;  // trailing field of training logs
};

// Parses `timestamp_ms,antenna_id,tag_id,rss_dbm[,label]`. Throws
// std::runtime_error naming the line number and field on malformed or
// out-of-range input. `#`-prefixed lines must be filtered by the caller.
ParsedReading parse_reading(std::string_view line, const BodyLayout& layout, std::size_t line_no = 0);

// Incremental tumbling-window segmentation. Windows are aligned to multiples
// of L starting from the first timestamp's window; empty windows are emitted
// so the history clock keeps advancing.
class WindowCutter {
 public:
  explicit WindowCutter(double window_len_s);

  // Returns the windows closed by this reading (possibly several, when the
  // stream jumps forward). Throws on timestamp regression.
  std::vector<DataSegment> feed(const TagReading& reading);

  // Flushes the final partial window, if any reading was ever fed.
  std::optional<DataSegment> finish();

 private:
  DataSegment take_current();

  std::int64_t window_ms_;
  bool started_ = false;
  std::int64_t current_start_ms_ = 0;
  std::int64_t last_ts_ms_ = 0;
  std::vector<TagReading> current_;
};

// Batch segmentation of a whole trace; every reading lands in exactly one
// segment and empty interior windows are included.
std::vector<DataSegment> segment_stream(const std::vector<TagReading>& readings, double window_len_s);

CountMatrix count_matrix(const DataSegment& seg, const BodyLayout& layout);

// sum min(count_cur, count_hist) / sum count_cur; 0 when the current segment
// is empty.
double overlap(const CountMatrix& current, const CountMatrix& hist);
double overlap(const DataSegment& current, const DataSegment& hist, const BodyLayout& layout);

// FIFO of the most recent raw (pre-completion) segments, capacity
// floor(history_span / L).
class HistoryBuffer {
 public:
  HistoryBuffer(double window_len_s, double history_span_s);

  void push(DataSegment raw_segment);
  [[nodiscard]] std::size_t size() const { return segments_.size(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  // n = 1 is the most recent window D(t - L), n = 2 is D(t - 2L), ...
  [[nodiscard]] const DataSegment& from_newest(std::size_t n) const;
  void clear() { segments_.clear(); }

 private:
  std::size_t capacity_;
  std::deque<DataSegment> segments_;
};

// False-negative repair: walks history from the most recent window backwards,
// prepending each window's readings while the tag-count overlap with the
// (growing) current segment stays below the threshold. Windows already
// recorded in completed_from are never appended twice, which makes the
// operation idempotent for a fixed buffer state.
DataSegment complete(DataSegment current, const HistoryBuffer& buffer, double threshold,
                     const BodyLayout& layout);

// Line-oriented ingestion sources sharing the reading-log wire format.
class LineSource {
 public:
  virtual ~LineSource() = default;
  // Next line, without the trailing newline; nullopt at end of stream.
  virtual std::optional<std::string> next_line() = 0;
};

class IstreamLineSource : public LineSource {
 public:
  explicit IstreamLineSource(std::istream& in) : in_(in) {}
  std::optional<std::string> next_line() override;

 private:
  std::istream& in_;
};

class FileLineSource : public LineSource {
 public:
  explicit FileLineSource(const std::string& path);
  ~FileLineSource() override;
  std::optional<std::string> next_line() override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Plain TCP listener; accepts a single connection and streams its lines.
// Connection close ends the stream (the caller then flushes the final
// partial window).
class TcpLineSource : public LineSource {
 public:
  explicit TcpLineSource(int port);
  ~TcpLineSource() override;
  std::optional<std::string> next_line() override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Reads a whole reading log (comments skipped), validating against the
// layout. Labels, when present, are returned alongside each reading.
std::vector<ParsedReading> read_reading_log(LineSource& source, const BodyLayout& layout);
std::vector<ParsedReading> read_reading_log_file(const std::string& path, const BodyLayout& layout);

}  // namespace rfact
