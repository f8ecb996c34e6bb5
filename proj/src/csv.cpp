#include "rough_transport/csv.hpp"

#include <fstream>

#include "rough_transport/errors.hpp"
#include "rough_transport/numerics.hpp"

namespace rough_transport {

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable::Row& CsvTable::Row::operator<<(double v) {
  cells_.push_back(format_double(v));
  return *this;
}

CsvTable::Row& CsvTable::Row::operator<<(int v) {
  cells_.push_back(std::to_string(v));
  return *this;
}

CsvTable::Row& CsvTable::Row::operator<<(std::size_t v) {
  cells_.push_back(std::to_string(v));
  return *this;
}

CsvTable::Row& CsvTable::Row::operator<<(const std::string& v) {
  cells_.push_back(quote(v));
  return *this;
}

CsvTable::Row CsvTable::row() {
  rows_.emplace_back();
  return Row(rows_.back());
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j) out += ',';
      out += cells[j];
    }
    out += '\n';
  };
  std::vector<std::string> head;
  for (const auto& h : header_) head.push_back(quote(h));
  line(head);
  for (const auto& r : rows_) {
    if (r.size() != header_.size())
      throw Error("CsvTable: row has " + std::to_string(r.size()) + " cells, header has " +
                  std::to_string(header_.size()));
    line(r);
  }
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
  const std::string text = str();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace rough_transport
