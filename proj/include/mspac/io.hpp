#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "mspac/core.hpp"
#include "mspac/hypothesis.hpp"

namespace mspac {

/// One example per line, "x<TAB>y" with y in {-1, +1}. Blank lines and lines
/// starting with '#' are skipped.
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const Dataset& s);

/// Whitespace-separated table of +-1 entries: one row per hypothesis, one
/// column per domain token. '#' starts a comment.
HypothesisClass read_hypothesis_table(std::istream& in);
HypothesisClass read_hypothesis_table(const std::filesystem::path& path);

/// "threshold", "pair" (the two-hypothesis non-trivial class) or
/// "table:<path>".
HypothesisClass parse_class_spec(const std::string& spec);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& text);

}  // namespace mspac
