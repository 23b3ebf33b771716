#include "mspac/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mspac {

namespace {

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r") == std::string::npos; }

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  const auto first = text.find_first_not_of(" \t");
  const auto last = text.find_last_not_of(" \t\r");
  if (first == std::string::npos) throw ValueError("empty number");
  const char* begin = text.data() + first;
  const char* end = text.data() + last + 1;
  if (*begin == '+') ++begin;
  double v = 0.0;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    // from_chars does not accept "inf"/"nan" spelled with a sign prefix
    // everywhere, so fall back to strtod for those.
    std::string s(begin, end);
    if (s == "inf" || s == "-inf" || s == "nan") return std::stod(s);
    throw ValueError("not a number: '" + text + "'");
  }
  return v;
}

Dataset read_dataset(std::istream& in) {
  std::vector<LabeledExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.front() == '#') continue;
    if (blank(line)) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw IoError("line " + std::to_string(line_no) + ": expected x<TAB>y");
    }
    try {
      const double x = parse_double(line.substr(0, tab));
      const double y = parse_double(line.substr(tab + 1));
      if (y != 1.0 && y != -1.0) throw ValueError("label must be -1 or +1");
      out.push_back({x, static_cast<Label>(y)});
    } catch (const ValueError& e) {
      throw IoError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (out.empty()) throw IoError("dataset file has no examples");
  return Dataset(std::move(out));
}

Dataset read_dataset(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& s) {
  for (const auto& e : s) out << format_double(e.x) << '\t' << (e.y > 0 ? "+1" : "-1") << '\n';
}

HypothesisClass read_hypothesis_table(std::istream& in) {
  std::vector<std::vector<std::int8_t>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_comment(line);
    if (blank(line)) continue;
    std::istringstream fields(line);
    std::vector<std::int8_t> row;
    std::string tok;
    while (fields >> tok) {
      if (tok == "1" || tok == "+1") {
        row.push_back(1);
      } else if (tok == "-1") {
        row.push_back(-1);
      } else {
        throw IoError("hypothesis table entries must be +1 or -1, got '" + tok + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("hypothesis table rows have different lengths");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("hypothesis table is empty");
  SignTable t(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return HypothesisClass::finite(std::move(t));
}

HypothesisClass read_hypothesis_table(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_hypothesis_table(in);
}

HypothesisClass parse_class_spec(const std::string& spec) {
  if (spec == "threshold") return HypothesisClass::threshold();
  if (spec == "pair") return HypothesisClass::agreeing_pair();
  if (spec.rfind("table:", 0) == 0) return read_hypothesis_table(std::filesystem::path(spec.substr(6)));
  throw DomainError("unknown hypothesis class '" + spec + "' (threshold | pair | table:<path>)");
}

}  // namespace mspac
