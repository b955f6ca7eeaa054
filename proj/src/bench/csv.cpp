#include "adlist/bench/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace adlist::bench {

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) {
    return "";
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::size_t used = 0;
  double v = std::stod(s, &used);
  if (used != s.size()) {
    throw std::runtime_error("csv: bad number '" + s + "'");
  }
  return v;
}

std::size_t parse_count(const std::string& s) {
  std::size_t used = 0;
  unsigned long long v = std::stoull(s, &used);
  if (used != s.size()) {
    throw std::runtime_error("csv: bad count '" + s + "'");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) {
    throw std::runtime_error("csv: unterminated quoted field");
  }
  fields.push_back(std::move(cur));
  return fields;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << '\n';
  for (const ResultRow& r : rows) {
    const std::string prefix = csv_field(r.workload) + ',' + csv_field(r.impl) + ',' +
                               std::to_string(r.threads) + ',' + std::to_string(r.dummy_count) + ',';
    for (std::size_t i = 0; i < r.result.seconds.size(); ++i) {
      out << prefix << i << ',' << format_double(r.result.seconds[i]) << ",,\n";
    }
    out << prefix << "summary,," << format_double(r.result.mean) << ','
        << format_double(r.result.ci99_halfwidth) << '\n';
  }
}

void emit_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::out | std::ios::trunc);
  if (!f) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  write_csv(f, rows);
  f.flush();
  if (!f) {
    throw IoError("write to '" + path.string() + "' failed");
  }
}

std::vector<ResultRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::runtime_error("csv: missing or unexpected header");
  }
  std::vector<ResultRow> rows;
  ResultRow cur;
  bool open = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 8) {
      throw std::runtime_error("csv: expected 8 fields, got " + std::to_string(f.size()));
    }
    if (!open) {
      cur = ResultRow{f[0], f[1], parse_count(f[2]), parse_count(f[3]), {}};
      open = true;
    } else if (f[0] != cur.workload || f[1] != cur.impl || parse_count(f[2]) != cur.threads ||
               parse_count(f[3]) != cur.dummy_count) {
      throw std::runtime_error("csv: repeat rows of a configuration must be contiguous");
    }
    if (f[4] == "summary") {
      cur.result.mean = parse_double(f[6]);
      cur.result.ci99_halfwidth = parse_double(f[7]);
      rows.push_back(std::move(cur));
      cur = ResultRow{};
      open = false;
    } else {
      if (parse_count(f[4]) != cur.result.seconds.size()) {
        throw std::runtime_error("csv: repeat_index out of sequence");
      }
      cur.result.seconds.push_back(parse_double(f[5]));
    }
  }
  if (open) {
    throw std::runtime_error("csv: configuration without a summary row");
  }
  return rows;
}

}  // namespace adlist::bench
