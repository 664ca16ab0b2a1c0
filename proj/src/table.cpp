#include "charteval/table.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace charteval {

namespace {

const std::string kRowToken = "<0x0A>";

std::string trim_collapse(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = true;  // drops leading spaces
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\r') {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(c);
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<std::string> split_on(const std::string& text, const std::string& sep) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = text.find(sep, pos);
    if (next == std::string::npos) {
      parts.push_back(text.substr(pos));
      return parts;
    }
    parts.push_back(text.substr(pos, next - pos));
    pos = next + sep.size();
  }
}

std::vector<std::string> split_rows(const std::string& text, bool accept_linefeed) {
  std::vector<std::string> rows;
  for (const std::string& chunk : split_on(text, kRowToken)) {
    if (accept_linefeed) {
      for (const std::string& line : split_on(chunk, "\n")) rows.push_back(line);
    } else {
      rows.push_back(chunk);
    }
  }
  return rows;
}

}  // namespace

CellValue CellValue::from_text(std::string text) {
  CellValue v;
  v.number = parse_number(text);
  v.raw = std::move(text);
  return v;
}

CellValue CellValue::from_number(double value) {
  CellValue v;
  v.raw = format_value(value);
  v.number = value;
  return v;
}

bool LinearizedTable::is_simple_form() const {
  if (header.size() != 2) return false;
  return std::all_of(rows.begin(), rows.end(),
                     [](const DataRow& r) { return r.cells.size() == 1; });
}

bool LinearizedTable::is_rectangular() const {
  if (header.size() < 2) return false;
  const std::size_t width = header.size() - 1;
  return std::all_of(rows.begin(), rows.end(),
                     [&](const DataRow& r) { return r.cells.size() == width; });
}

std::size_t LinearizedTable::data_cell_count() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.cells.size();
  return n;
}

LinearizedTable parse_linearized(const std::string& text, ParseMode mode) {
  ParseOptions opts;
  opts.mode = mode;
  return parse_linearized(text, opts);
}

LinearizedTable parse_linearized(const std::string& text, const ParseOptions& opts) {
  if (trim_collapse(text).empty()) throw TableError("empty input");

  const bool lenient = opts.mode == ParseMode::Lenient;
  const bool accept_lf = lenient || opts.accept_linefeed;

  std::vector<std::vector<std::string>> raw_rows;
  for (const std::string& row_text : split_rows(text, accept_lf)) {
    std::vector<std::string> cells;
    for (const std::string& cell : split_on(row_text, "|")) {
      cells.push_back(trim_collapse(cell));
    }
    const bool all_empty = std::all_of(cells.begin(), cells.end(),
                                       [](const std::string& c) { return c.empty(); });
    if (!all_empty) raw_rows.push_back(std::move(cells));
  }

  LinearizedTable table;
  std::size_t next = 0;
  if (!raw_rows.empty() && raw_rows[0].size() >= 2 && raw_rows[0][0] == "TITLE") {
    table.title = raw_rows[0][1];
    next = 1;
  }
  if (next >= raw_rows.size()) throw TableError("missing header row");
  table.header = raw_rows[next++];

  const std::size_t width = table.header.size() >= 2 ? table.header.size() - 1 : 0;
  for (std::size_t i = next; i < raw_rows.size(); ++i) {
    const auto& cells = raw_rows[i];
    if (cells.size() != width + 1) {
      if (!lenient) {
        throw TableError("ragged row " + std::to_string(i - next) + ": expected " +
                         std::to_string(width) + " value cells, got " +
                         std::to_string(cells.size() - 1));
      }
      // Pair-stream refolding: "cat | v | cat | v | ..." becomes one
      // single-value row per pair.
      if (table.header.size() == 2 && cells.size() % 2 == 0 && cells.size() >= 4) {
        for (std::size_t k = 0; k + 1 < cells.size(); k += 2) {
          DataRow row;
          row.row_header = cells[k];
          row.cells.push_back(CellValue::from_text(cells[k + 1]));
          table.rows.push_back(std::move(row));
        }
        continue;
      }
    }
    DataRow row;
    row.row_header = cells[0];
    for (std::size_t j = 1; j < cells.size(); ++j) {
      row.cells.push_back(CellValue::from_text(cells[j]));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string serialize(const LinearizedTable& table) {
  std::ostringstream out;
  bool first_row = true;
  auto emit_row = [&](const std::vector<std::string>& cells) {
    if (!first_row) out << " " << kRowToken << " ";
    first_row = false;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << " | ";
      out << cells[i];
    }
  };

  if (table.title) emit_row({"TITLE", *table.title});
  emit_row(table.header);
  for (const auto& row : table.rows) {
    std::vector<std::string> cells;
    cells.push_back(row.row_header);
    for (const auto& c : row.cells) cells.push_back(c.raw);
    emit_row(cells);
  }
  return out.str();
}

std::optional<double> parse_number(const std::string& cell) {
  static const std::array<std::string, 4> kCurrency = {"$", "€", "£", "¥"};
  std::string s;
  s.reserve(cell.size());
  for (std::size_t i = 0; i < cell.size();) {
    bool skipped = false;
    for (const auto& sym : kCurrency) {
      if (cell.compare(i, sym.size(), sym) == 0) {
        i += sym.size();
        skipped = true;
        break;
      }
    }
    if (skipped) continue;
    char c = cell[i++];
    if (c == ',' || c == '%' || std::isspace(static_cast<unsigned char>(c))) continue;
    s.push_back(c);
  }
  if (s.empty()) return std::nullopt;

  std::size_t pos = 0;
  if (s[pos] == '+' || s[pos] == '-') ++pos;
  bool digits = false, dot = false;
  for (std::size_t i = pos; i < s.size(); ++i) {
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      digits = true;
    } else if (s[i] == '.' && !dot) {
      dot = true;
    } else {
      return std::nullopt;
    }
  }
  if (!digits) return std::nullopt;
  return std::stod(s);
}

EntrySet to_entries(const LinearizedTable& table) {
  EntrySet set;
  const bool simple = table.is_simple_form();
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.cells.size(); ++j) {
      Entry e;
      e.row_key = row.row_header;
      if (simple) {
        e.col_key = table.header[1];
      } else if (j + 1 < table.header.size()) {
        e.col_key = table.header[j + 1];
      }  // ragged lenient rows beyond the header keep an empty col key
      e.value = row.cells[j];
      set.entries.push_back(std::move(e));
    }
  }
  return set;
}

NumberSet to_numbers(const LinearizedTable& table) {
  NumberSet set;
  for (const auto& row : table.rows) {
    for (const auto& cell : row.cells) {
      if (cell.number) set.values.push_back(*cell.number);
    }
  }
  return set;
}

LinearizedTable transpose(const LinearizedTable& table) {
  if (!table.is_rectangular()) throw TableError("transpose requires a rectangular table");
  LinearizedTable out;
  out.title = table.title;
  out.header.push_back(table.header[0]);
  for (const auto& row : table.rows) out.header.push_back(row.row_header);
  for (std::size_t j = 1; j < table.header.size(); ++j) {
    DataRow row;
    row.row_header = table.header[j];
    for (const auto& src : table.rows) row.cells.push_back(src.cells[j - 1]);
    out.rows.push_back(std::move(row));
  }
  return out;
}

EntrySet transpose(const EntrySet& entries) {
  EntrySet out;
  out.entries.reserve(entries.entries.size());
  for (const auto& e : entries.entries) {
    out.entries.push_back(Entry{e.col_key, e.row_key, e.value});
  }
  return out;
}

std::string format_value(double value) {
  long long as_int = static_cast<long long>(value);
  if (static_cast<double>(as_int) == value) return std::to_string(as_int);
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, end);
}

}  // namespace charteval
