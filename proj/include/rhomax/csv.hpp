#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

namespace rhomax::csv {

// Shortest decimal string that round-trips to the same double.
std::string value(double v);
std::string value(std::size_t v);

// Minimal RFC-4180 table: fields with commas, quotes, or newlines are quoted.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  void write(std::ostream& os) const;
  void save(const std::string& path) const;
};

} // namespace rhomax::csv
