#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "adlist/bench/stats.hpp"

namespace adlist::bench {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ResultRow {
  std::string workload;
  std::string impl;
  std::size_t threads = 0;
  std::size_t dummy_count = 0;
  BenchResult result;
};

// Columns: workload,impl,threads,dummy_count,repeat_index,seconds,mean,ci99_halfwidth
// One data row per repeat (mean/ci empty), then a summary row per
// configuration with repeat_index "summary" and seconds empty.
inline constexpr const char* kCsvHeader =
    "workload,impl,threads,dummy_count,repeat_index,seconds,mean,ci99_halfwidth";

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
// Throws IoError when the file cannot be written.
void emit_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);

// Inverse of write_csv. Throws std::runtime_error on malformed input.
std::vector<ResultRow> parse_csv(std::istream& in);

// RFC 4180 field quoting.
std::string csv_field(const std::string& s);
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace adlist::bench
