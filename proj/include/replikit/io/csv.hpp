#pragma once

// RFC 4180 style CSV: comma separated, double-quoted fields with "" escapes, CRLF or LF
// line endings, header row required.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "replikit/error.hpp"
#include "replikit/matrix.hpp"

namespace replikit::io {

struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

/// Splits text into records. Blank lines are skipped.
inline std::vector<CsvRecord> parse_csv(const std::string& text) {
  std::vector<CsvRecord> out;
  CsvRecord rec;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;  // the current field has content or quotes
  bool after_quote = false;    // a quoted field just closed
  std::size_t line = 1;
  rec.line = 1;

  auto end_field = [&] {
    rec.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
    after_quote = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = rec.fields.size() == 1 && rec.fields[0].empty();
    if (!blank) out.push_back(std::move(rec));
    rec = CsvRecord{};
  };

  for (std::size_t k = 0; k < text.size(); ++k) {
    const char ch = text[k];
    if (in_quotes) {
      if (ch == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field.push_back('"');
          ++k;
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == ',') {
      end_field();
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && k + 1 < text.size() && text[k + 1] == '\n') ++k;
      end_record();
      ++line;
      rec.line = line;
    } else if (ch == '"') {
      if (field_started) {
        throw InputError("line " + std::to_string(line) + ": quote inside an unquoted field");
      }
      in_quotes = true;
      field_started = true;
    } else {
      if (after_quote) {
        throw InputError("line " + std::to_string(line) + ": characters after a closing quote");
      }
      field.push_back(ch);
      field_started = true;
    }
  }
  if (in_quotes) throw InputError("line " + std::to_string(rec.line) + ": unterminated quoted field");
  if (field_started || !rec.fields.empty()) end_record();
  return out;
}

enum class CellMode { kPValue, kReal };

// Header, feature identifiers from the first column, and numeric study columns.
struct InputTable {
  std::vector<std::string> header;  // includes the identifier column name
  std::vector<std::string> ids;
  Matrix<double> values;

  std::vector<std::string> study_names() const { return {header.begin() + 1, header.end()}; }
};

inline double parse_number(const std::string& s, std::size_t line, const std::string& column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::logic_error&) {
    throw InputError("line " + std::to_string(line) + ", column '" + column + "': not a number: '" + s + "'");
  }
  while (used < s.size() && (s[used] == ' ' || s[used] == '\t')) ++used;
  if (used != s.size()) {
    throw InputError("line " + std::to_string(line) + ", column '" + column + "': not a number: '" + s + "'");
  }
  return v;
}

inline InputTable parse_table(const std::string& text, CellMode mode) {
  const auto records = parse_csv(text);
  if (records.empty()) throw InputError("input is empty; a header row is required");
  InputTable t;
  t.header = records[0].fields;
  if (t.header.size() < 2) throw InputError("line 1: need an identifier column and at least one study column");
  const std::size_t n = t.header.size() - 1;
  std::vector<std::vector<double>> rows;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != t.header.size()) {
      throw InputError("line " + std::to_string(rec.line) + ": expected " + std::to_string(t.header.size()) +
                       " fields, found " + std::to_string(rec.fields.size()));
    }
    const std::string& id = rec.fields[0];
    if (!seen.insert(id).second) {
      throw InputError("line " + std::to_string(rec.line) + ": duplicate feature id '" + id + "'");
    }
    std::vector<double> row(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto& col = t.header[j + 1];
      const auto& cell = rec.fields[j + 1];
      if (cell.empty()) {
        throw InputError("line " + std::to_string(rec.line) + ": missing value for feature '" + id +
                         "', column '" + col + "'");
      }
      const double v = parse_number(cell, rec.line, col);
      if (mode == CellMode::kPValue && !(v >= 0.0 && v <= 1.0)) {
        throw InputError("feature '" + id + "', column '" + col + "': p-value out of [0,1]: " + cell);
      }
      if (!std::isfinite(v)) {
        throw InputError("feature '" + id + "', column '" + col + "': value is not finite");
      }
      row[j] = v;
    }
    t.ids.push_back(id);
    rows.push_back(std::move(row));
  }
  t.values = rows.empty() ? Matrix<double>(0, n) : Matrix<double>::from_rows(rows);
  return t;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline InputTable read_table(const std::string& path, CellMode mode) {
  return parse_table(read_file(path), mode);
}

}  // namespace replikit::io
