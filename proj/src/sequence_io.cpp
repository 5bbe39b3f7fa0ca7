#include "futurefill/sequence_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "futurefill/errors.hpp"

namespace futurefill {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw IoError("cannot format value");
  return std::string(buf, ptr);
}

bool parse_double(std::string_view text, double& value) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(value);
}

Signal read_sequence(std::istream& in, const std::string& source) {
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    double v = 0.0;
    if (!parse_double(view, v)) {
      throw ParseError(source, lineno, "expected one finite decimal number, got '" +
                                           std::string(view) + "'");
    }
    values.push_back(v);
  }
  return Signal(std::move(values));
}

Signal load_sequence(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_sequence(in, path.string());
}

void write_sequence(std::ostream& out, const Signal& values) {
  for (double v : values.values()) out << format_double(v) << '\n';
}

void save_sequence(const std::filesystem::path& path, const Signal& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_sequence(out, values);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace futurefill
