#pragma once

#include "rfact/types.hpp"

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

namespace rfact::testutil {

inline TagReading tr(std::int64_t ts_ms, int antenna, int tag, double rss) {
  TagReading r;
  r.timestamp_ms = ts_ms;
  r.antenna_id = antenna;
  r.tag_id = tag;
  r.rss_dbm = rss;
  return r;
}

inline DataSegment make_segment(std::int64_t start_ms, std::int64_t len_ms,
                                std::vector<TagReading> readings) {
  DataSegment seg;
  seg.window_start_ms = start_ms;
  seg.window_len_ms = len_ms;
  seg.readings = std::move(readings);
  return seg;
}

// Fresh scratch directory under the system temp root, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path() / ("rfact_test_" + tag + "_XXXXXX");
    std::string templ = base.string();
    if (!mkdtemp(templ.data())) throw std::runtime_error("mkdtemp failed");
    path_ = templ;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace rfact::testutil
