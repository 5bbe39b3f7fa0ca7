#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "futurefill/signal.hpp"

namespace futurefill {

// Sequence files: UTF-8, one decimal float per line. '#' starts a comment;
// blank lines are ignored. Values are written with 17 significant digits so
// they round-trip exactly.

Signal read_sequence(std::istream& in, const std::string& source = "<stream>");
Signal load_sequence(const std::filesystem::path& path);

void write_sequence(std::ostream& out, const Signal& values);
void save_sequence(const std::filesystem::path& path, const Signal& values);

/// Shortest round-trip formatting with '.' as decimal point.
std::string format_double(double value);

/// Strict decimal parse of a whole token; returns false on any trailing junk.
bool parse_double(std::string_view text, double& value);

}  // namespace futurefill
