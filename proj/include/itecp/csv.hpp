#pragma once

#include <string>
#include <vector>

namespace itecp {

// Shortest representation that round-trips the exact double (via to_chars).
std::string format_double(double v);

// Strict double parse of a full field; throws SchemaError on garbage.
double parse_double(const std::string& field, const std::string& context);
long parse_long(const std::string& field, const std::string& context);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

// Comma-separated, no quoting, LF or CRLF line endings accepted.
CsvTable read_csv_file(const std::string& path);

// Rows written with LF endings; file written atomically (temp + rename).
void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);

}  // namespace itecp
