#include "rfact/stream.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <string_view>

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

namespace rfact {
namespace {

[[noreturn]] void parse_fail(std::size_t line_no, int field, const std::string& what) {
  throw std::runtime_error("reading log line " + std::to_string(line_no) + ", field " +
                           std::to_string(field) + ": " + what);
}

std::string_view next_field(std::string_view& rest, bool& more) {
  auto pos = rest.find(',');
  std::string_view field;
  if (pos == std::string_view::npos) {
    field = rest;
    rest = {};
    more = false;
  } else {
    field = rest.substr(0, pos);
    rest = rest.substr(pos + 1);
    more = true;
  }
  return field;
}

template <typename T>
T parse_number(std::string_view s, std::size_t line_no, int field) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    parse_fail(line_no, field, "not a number: '" + std::string(s) + "'");
  return value;
}

}  // namespace

ParsedReading parse_reading(std::string_view line, const BodyLayout& layout, std::size_t line_no) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

  std::string_view rest = line;
  bool more = true;
  std::string_view fields[4];
  for (int i = 0; i < 4; ++i) {
    if (!more) parse_fail(line_no, i + 1, "expected 4 or 5 comma-separated fields");
    fields[i] = next_field(rest, more);
  }
  std::optional<std::string> label;
  if (more) {
    bool trailing = true;
    std::string_view label_field = next_field(rest, trailing);
    if (trailing) parse_fail(line_no, 6, "expected 4 or 5 comma-separated fields");
    label = std::string(label_field);
  }

  ParsedReading out;
  out.reading.timestamp_ms = parse_number<std::int64_t>(fields[0], line_no, 1);
  out.reading.antenna_id = parse_number<int>(fields[1], line_no, 2);
  out.reading.tag_id = parse_number<int>(fields[2], line_no, 3);
  out.reading.rss_dbm = parse_number<double>(fields[3], line_no, 4);
  out.label = std::move(label);

  if (out.reading.antenna_id < 0 || out.reading.antenna_id >= layout.num_antennas())
    parse_fail(line_no, 2,
               "antenna " + std::to_string(out.reading.antenna_id) + " of " +
                   std::to_string(layout.num_antennas()));
  if (out.reading.tag_id < 0 || out.reading.tag_id >= layout.num_tags())
    parse_fail(line_no, 3,
               "tag " + std::to_string(out.reading.tag_id) + " of " + std::to_string(layout.num_tags()));
  if (out.reading.rss_dbm < kRssFloorDbm || out.reading.rss_dbm > 0.0)
    parse_fail(line_no, 4,
               "RSS " + std::to_string(out.reading.rss_dbm) + " outside [" +
                   std::to_string(kRssFloorDbm) + ", 0]");
  return out;
}

WindowCutter::WindowCutter(double window_len_s)
    : window_ms_(static_cast<std::int64_t>(std::llround(window_len_s * 1000.0))) {
  if (window_ms_ <= 0) throw std::runtime_error("window length must be positive");
}

DataSegment WindowCutter::take_current() {
  DataSegment seg;
  seg.window_start_ms = current_start_ms_;
  seg.window_len_ms = window_ms_;
  seg.readings = std::move(current_);
  current_.clear();
  std::sort(seg.readings.begin(), seg.readings.end(), reading_less);
  return seg;
}

std::vector<DataSegment> WindowCutter::feed(const TagReading& reading) {
  std::vector<DataSegment> closed;
  if (!started_) {
    started_ = true;
    // Align the first window to the enclosing multiple of L.
    current_start_ms_ = (reading.timestamp_ms / window_ms_) * window_ms_;
    if (reading.timestamp_ms < 0 && reading.timestamp_ms % window_ms_ != 0)
      current_start_ms_ -= window_ms_;
    last_ts_ms_ = reading.timestamp_ms;
  }
  if (reading.timestamp_ms < last_ts_ms_)
    throw std::runtime_error("stream order violated: timestamp " + std::to_string(reading.timestamp_ms) +
                             " after " + std::to_string(last_ts_ms_));
  last_ts_ms_ = reading.timestamp_ms;

  while (reading.timestamp_ms >= current_start_ms_ + window_ms_) {
    closed.push_back(take_current());
    current_start_ms_ += window_ms_;
  }
  current_.push_back(reading);
  return closed;
}

std::optional<DataSegment> WindowCutter::finish() {
  if (!started_) return std::nullopt;
  started_ = false;
  return take_current();
}

std::vector<DataSegment> segment_stream(const std::vector<TagReading>& readings, double window_len_s) {
  std::vector<DataSegment> segments;
  WindowCutter cutter(window_len_s);
  for (const TagReading& r : readings) {
    auto closed = cutter.feed(r);
    segments.insert(segments.end(), std::make_move_iterator(closed.begin()),
                    std::make_move_iterator(closed.end()));
  }
  if (auto last = cutter.finish()) segments.push_back(std::move(*last));
  return segments;
}

CountMatrix count_matrix(const DataSegment& seg, const BodyLayout& layout) {
  CountMatrix counts = CountMatrix::Zero(layout.num_antennas(), layout.num_tags());
  for (const TagReading& r : seg.readings) ++counts(r.antenna_id, r.tag_id);
  return counts;
}

double overlap(const CountMatrix& current, const CountMatrix& hist) {
  const long total = current.sum();
  if (total == 0) return 0.0;
  const long shared = current.cwiseMin(hist).sum();
  return static_cast<double>(shared) / static_cast<double>(total);
}

double overlap(const DataSegment& current, const DataSegment& hist, const BodyLayout& layout) {
  return overlap(count_matrix(current, layout), count_matrix(hist, layout));
}

HistoryBuffer::HistoryBuffer(double window_len_s, double history_span_s) {
  if (window_len_s <= 0) throw std::runtime_error("history buffer: window length must be positive");
  capacity_ = static_cast<std::size_t>(history_span_s / window_len_s);
}

void HistoryBuffer::push(DataSegment raw_segment) {
  if (capacity_ == 0) return;
  segments_.push_back(std::move(raw_segment));
  while (segments_.size() > capacity_) segments_.pop_front();
}

const DataSegment& HistoryBuffer::from_newest(std::size_t n) const {
  return segments_.at(segments_.size() - n);
}

DataSegment complete(DataSegment current, const HistoryBuffer& buffer, double threshold,
                     const BodyLayout& layout) {
  CountMatrix counts = count_matrix(current, layout);
  for (std::size_t n = 1; n <= buffer.size(); ++n) {
    const DataSegment& hist = buffer.from_newest(n);
    if (overlap(counts, count_matrix(hist, layout)) >= threshold) break;
    const bool already_appended =
        std::any_of(current.completed_from.begin(), current.completed_from.end(),
                    [&](const CompletionRecord& r) { return r.source_start_ms == hist.window_start_ms; });
    if (already_appended) continue;
    current.readings.insert(current.readings.end(), hist.readings.begin(), hist.readings.end());
    current.completed_from.push_back({hist.window_start_ms, hist.readings.size()});
    counts += count_matrix(hist, layout);
  }
  std::sort(current.readings.begin(), current.readings.end(), reading_less);
  return current;
}

std::optional<std::string> IstreamLineSource::next_line() {
  std::string line;
  if (!std::getline(in_, line)) return std::nullopt;
  return line;
}

struct FileLineSource::Impl {
  std::ifstream in;
};

FileLineSource::FileLineSource(const std::string& path) : impl_(std::make_unique<Impl>()) {
  impl_->in.open(path);
  if (!impl_->in) throw std::runtime_error("cannot open reading log: " + path);
}

FileLineSource::~FileLineSource() = default;

std::optional<std::string> FileLineSource::next_line() {
  std::string line;
  if (!std::getline(impl_->in, line)) return std::nullopt;
  return line;
}

struct TcpLineSource::Impl {
  int listen_fd = -1;
  int conn_fd = -1;
  std::string pending;
  bool eof = false;

  ~Impl() {
    if (conn_fd >= 0) ::close(conn_fd);
    if (listen_fd >= 0) ::close(listen_fd);
  }
};

TcpLineSource::TcpLineSource(int port) : impl_(std::make_unique<Impl>()) {
  impl_->listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (impl_->listen_fd < 0) throw std::runtime_error("tcp: socket() failed: " + std::string(strerror(errno)));
  int yes = 1;
  ::setsockopt(impl_->listen_fd, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(impl_->listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0)
    throw std::runtime_error("tcp: cannot bind port " + std::to_string(port) + ": " + strerror(errno));
  if (::listen(impl_->listen_fd, 1) < 0)
    throw std::runtime_error("tcp: listen() failed: " + std::string(strerror(errno)));
}

TcpLineSource::~TcpLineSource() = default;

std::optional<std::string> TcpLineSource::next_line() {
  if (impl_->conn_fd < 0 && !impl_->eof) {
    impl_->conn_fd = ::accept(impl_->listen_fd, nullptr, nullptr);
    if (impl_->conn_fd < 0) throw std::runtime_error("tcp: accept() failed: " + std::string(strerror(errno)));
  }
  for (;;) {
    auto pos = impl_->pending.find('\n');
    if (pos != std::string::npos) {
      std::string line = impl_->pending.substr(0, pos);
      impl_->pending.erase(0, pos + 1);
      return line;
    }
    if (impl_->eof) {
      if (impl_->pending.empty()) return std::nullopt;
      std::string line = std::move(impl_->pending);
      impl_->pending.clear();
      return line;
    }
    char buf[4096];
    ssize_t n = ::read(impl_->conn_fd, buf, sizeof(buf));
    if (n < 0) throw std::runtime_error("tcp: read() failed: " + std::string(strerror(errno)));
    if (n == 0) {
      impl_->eof = true;
      ::close(impl_->conn_fd);
      impl_->conn_fd = -1;
    } else {
      impl_->pending.append(buf, static_cast<std::size_t>(n));
    }
  }
}

std::vector<ParsedReading> read_reading_log(LineSource& source, const BodyLayout& layout) {
  std::vector<ParsedReading> readings;
  std::size_t line_no = 0;
  while (auto line = source.next_line()) {
    ++line_no;
    if (line->empty() || (*line)[0] == '#') continue;
    readings.push_back(parse_reading(*line, layout, line_no));
  }
  return readings;
}

std::vector<ParsedReading> read_reading_log_file(const std::string& path, const BodyLayout& layout) {
  FileLineSource source(path);
  return read_reading_log(source, layout);
}

}  // namespace rfact
