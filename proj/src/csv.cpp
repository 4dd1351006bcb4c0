#include "rhomax/csv.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

#include "rhomax/errors.hpp"

namespace rhomax::csv {

std::string value(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string value(std::size_t v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

void write_field(std::ostream& os, const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) {
    os << field;
    return;
  }
  os << '"';
  for (char c : field) {
    if (c == '"') os << '"';
    os << c;
  }
  os << '"';
}

void write_row(std::ostream& os, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) os << ',';
    write_field(os, row[i]);
  }
  os << '\n';
}

} // namespace

void Table::write(std::ostream& os) const {
  if (!header.empty()) write_row(os, header);
  for (const auto& row : rows) write_row(os, row);
}

void Table::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw config_error("cannot write to '" + path + "'");
  write(os);
  os.flush();
  if (!os) throw config_error("failed writing '" + path + "'");
}

} // namespace rhomax::csv
