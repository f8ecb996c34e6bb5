#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rough_transport {

/// In-memory CSV table: header line, '.' decimals, doubles at 17 significant digits.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  class Row {
   public:
    Row& operator<<(double v);
    Row& operator<<(int v);
    Row& operator<<(std::size_t v);
    Row& operator<<(const std::string& v);
    Row& operator<<(const char* v) { return *this << std::string(v); }

   private:
    friend class CsvTable;
    explicit Row(std::vector<std::string>& cells) : cells_(cells) {}
    std::vector<std::string>& cells_;
  };

  /// Starts a new row; the row must be filled to the header width before write().
  Row row();
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;
  /// Throws Error when a row has the wrong width or the file cannot be written.
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace rough_transport
