// Copyright 2026 The ldpsgd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "ldpsgd/data.hpp"

#include <algorithm>
#include <charconv>
#include <string_view>

#include "ldpsgd/common.hpp"

namespace ldpsgd {

VectorSampleSource::VectorSampleSource(std::size_t width,
                                       std::vector<double> values)
    : width_(width), values_(std::move(values)) {
  if (width_ == 0 || values_.size() % width_ != 0) {
    throw ValidationError("sample values do not form whole rows");
  }
}

bool VectorSampleSource::next(std::span<double> row) {
  if (cursor_ + width_ > values_.size()) return false;
  std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(cursor_), width_,
              row.begin());
  cursor_ += width_;
  return true;
}

bool parse_csv_row(const std::string& line, std::span<double> row) {
  std::string_view rest(line);
  while (!rest.empty() && (rest.back() == '\r' || rest.back() == ' ')) {
    rest.remove_suffix(1);
  }
  std::size_t k = 0;
  while (true) {
    const std::size_t comma = rest.find(',');
    std::string_view field = rest.substr(0, comma);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    if (k >= row.size() || field.empty()) return false;
    double value = 0.0;
    const auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) return false;
    row[k++] = value;
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return k == row.size();
}

CsvSampleSource::CsvSampleSource(const std::string& path, std::size_t width)
    : in_(path), path_(path), width_(width) {
  if (!in_) throw ValidationError("cannot open sample file " + path);
  if (width_ == 0) throw ValidationError("sample width must be positive");
  std::string first;
  if (std::getline(in_, first)) {
    ++line_no_;
    std::vector<double> probe(width_);
    if (parse_csv_row(first, probe)) {
      pending_ = std::move(first);
      has_pending_ = true;
    }
  }
}

bool CsvSampleSource::next(std::span<double> row) {
  std::string line;
  if (has_pending_) {
    line = std::move(pending_);
    has_pending_ = false;
  } else {
    do {
      if (!std::getline(in_, line)) return false;
      ++line_no_;
    } while (line.empty() || line == "\r");
  }
  if (!parse_csv_row(line, row)) {
    throw ValidationError(path_ + ":" + std::to_string(line_no_) +
                          ": expected " + std::to_string(width_) +
                          " numeric fields");
  }
  return true;
}

BinarySampleSource::BinarySampleSource(const std::string& path,
                                       std::size_t width)
    : in_(path, std::ios::binary), width_(width) {
  if (!in_) throw ValidationError("cannot open sample file " + path);
  if (width_ == 0) throw ValidationError("sample width must be positive");
}

bool BinarySampleSource::next(std::span<double> row) {
  in_.read(reinterpret_cast<char*>(row.data()),
           static_cast<std::streamsize>(width_ * sizeof(double)));
  if (in_.gcount() == 0) return false;
  if (static_cast<std::size_t>(in_.gcount()) != width_ * sizeof(double)) {
    throw ValidationError("truncated row in binary sample file");
  }
  return true;
}

}  // namespace ldpsgd
