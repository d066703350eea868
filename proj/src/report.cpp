#include "rwdpp/report.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>

#include "rwdpp/lattice.hpp"

namespace rwdpp::report {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_int(std::int64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%" PRId64, v);
  return buf;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for digest: " + path.string());
  std::uint64_t h = 0xCBF29CE484222325ull;
  char chunk[4096];
  while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(chunk[i]);
      h *= 0x100000001B3ull;
    }
    if (got < static_cast<std::streamsize>(sizeof(chunk))) break;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) buffer_ += ",";
    buffer_ += header[i];
  }
  buffer_ += "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw Error("csv row width mismatch for " + path_.string());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buffer_ += ",";
    buffer_ += cells[i];
  }
  buffer_ += "\n";
}

void CsvWriter::close() {
  if (closed_) return;
  std::ofstream out(path_, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path_.string());
  out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  closed_ = true;
}

void Summary::set(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}

void Summary::set_double(const std::string& key, double value) {
  set(key, format_double(value));
}

void Summary::set_int(const std::string& key, std::int64_t value) {
  set(key, format_int(value));
}

void Summary::add_check(const Check& check) { checks_.push_back(check); }

bool Summary::all_passed() const {
  for (const auto& c : checks_)
    if (!c.pass) return false;
  return true;
}

void Summary::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& [key, value] : entries_) out << key << " = " << value << "\n";
  for (const auto& c : checks_) {
    out << "check." << c.name << ".criterion = " << c.threshold << "\n";
    out << "check." << c.name << ".measured = " << format_double(c.measured) << "\n";
    out << "check." << c.name << ".pass = " << (c.pass ? "true" : "false") << "\n";
  }
  out << "all_passed = " << (all_passed() ? "true" : "false") << "\n";
}

}  // namespace rwdpp::report
