#ifndef RWDPP_REPORT_HPP
#define RWDPP_REPORT_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rwdpp::report {

// All numeric report output goes through these formatters so that replayed
// runs are byte-identical.
std::string format_double(double v);
std::string format_int(std::int64_t v);

// FNV-1a 64 over a file's bytes, hex encoded.
std::string file_digest(const std::filesystem::path& path);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  void close();
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::string buffer_;
  std::size_t columns_;
  bool closed_ = false;
};

struct Check {
  std::string name;
  std::string threshold;  // human-readable criterion, e.g. "|D-0.5| <= 0.02"
  double measured = 0;
  bool pass = false;
};

// Line-oriented key-value summary; keys are emitted in insertion order so
// the file is deterministic.
class Summary {
 public:
  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);
  void set_int(const std::string& key, std::int64_t value);
  void add_check(const Check& check);
  bool all_passed() const;
  const std::vector<Check>& checks() const { return checks_; }

  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<Check> checks_;
};

}  // namespace rwdpp::report

#endif  // RWDPP_REPORT_HPP
