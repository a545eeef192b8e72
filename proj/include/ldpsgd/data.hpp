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
#ifndef LDPSGD_DATA_HPP_
#define LDPSGD_DATA_HPP_

#include <cstddef>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace ldpsgd {

// A stream of fixed-width sample rows. Row i feeds iteration i; each row is
// read exactly once.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual std::size_t width() const = 0;
  // Fills `row` (of size width()) and returns true, or returns false when
  // the stream is exhausted.
  virtual bool next(std::span<double> row) = 0;
};

// Rows held in memory. Mostly for tests and replay of small data sets.
class VectorSampleSource : public SampleSource {
 public:
  VectorSampleSource(std::size_t width, std::vector<double> values);

  std::size_t width() const override { return width_; }
  bool next(std::span<double> row) override;

 private:
  std::size_t width_;
  std::vector<double> values_;
  std::size_t cursor_ = 0;
};

// Comma-separated rows; a first line that does not parse as numbers is
// treated as a header and skipped.
class CsvSampleSource : public SampleSource {
 public:
  CsvSampleSource(const std::string& path, std::size_t width);

  std::size_t width() const override { return width_; }
  bool next(std::span<double> row) override;

 private:
  std::ifstream in_;
  std::string path_;
  std::size_t width_;
  std::size_t line_no_ = 0;
  std::string pending_;
  bool has_pending_ = false;
};

// Packed little-endian float64 rows.
class BinarySampleSource : public SampleSource {
 public:
  BinarySampleSource(const std::string& path, std::size_t width);

  std::size_t width() const override { return width_; }
  bool next(std::span<double> row) override;

 private:
  std::ifstream in_;
  std::size_t width_;
};

// Parses one CSV line into `row`; returns false if any field is not a
// number or the field count differs from row.size().
bool parse_csv_row(const std::string& line, std::span<double> row);

}  // namespace ldpsgd

#endif  // LDPSGD_DATA_HPP_
