#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace charteval {

/// Raised by the table parser and by structure-checking operations.
class TableError : public std::runtime_error {
public:
  explicit TableError(const std::string& what) : std::runtime_error(what) {}
};

/// One table cell. Numeric cells keep the raw source text so that
/// serialization reproduces the input byte-for-byte.
struct CellValue {
  std::string raw;
  std::optional<double> number;  // set iff the cell parses as a number

  bool is_numeric() const { return number.has_value(); }

  static CellValue from_text(std::string text);
  static CellValue from_number(double value);

  bool operator==(const CellValue&) const = default;
};

struct DataRow {
  std::string row_header;
  std::vector<CellValue> cells;

  bool operator==(const DataRow&) const = default;
};

/// A chart's data flattened to the `|` / `<0x0A>` text grammar.
/// header[0] is the axis/category label; header[1..] are series names.
struct LinearizedTable {
  std::optional<std::string> title;
  std::vector<std::string> header;
  std::vector<DataRow> rows;

  /// Header `x | y` with single-cell rows: one value per category.
  bool is_simple_form() const;
  bool is_rectangular() const;
  std::size_t data_cell_count() const;

  bool operator==(const LinearizedTable&) const = default;
};

struct Entry {
  std::string row_key;
  std::string col_key;
  CellValue value;

  bool operator==(const Entry&) const = default;
};

struct EntrySet {
  std::vector<Entry> entries;
};

struct NumberSet {
  std::vector<double> values;  // multiset, duplicates preserved
};

enum class ParseMode {
  Strict,   // rectangular rows, literal <0x0A> separators only
  Lenient,  // also accepts raw '\n' separators and refolds pair streams
};

struct ParseOptions {
  ParseMode mode = ParseMode::Strict;
  /// Treat a raw linefeed byte as a row separator in addition to the
  /// literal `<0x0A>` token. Lenient mode enables this regardless.
  bool accept_linefeed = false;
};

LinearizedTable parse_linearized(const std::string& text, const ParseOptions& opts);
LinearizedTable parse_linearized(const std::string& text, ParseMode mode);

std::string serialize(const LinearizedTable& table);

/// Numeric reading of a cell: strips whitespace, currency symbols
/// ($, EUR, GBP, JPY signs), percent signs and thousands commas.
/// Returns nullopt for textual cells.
std::optional<double> parse_number(const std::string& cell);

EntrySet to_entries(const LinearizedTable& table);
NumberSet to_numbers(const LinearizedTable& table);

/// Swaps row and column headers. Requires a rectangular table with
/// header length >= 2; throws TableError otherwise.
LinearizedTable transpose(const LinearizedTable& table);

/// Entry-level transpose: swaps row_key and col_key of every entry.
EntrySet transpose(const EntrySet& entries);

/// Integral values print without a decimal point, otherwise the
/// shortest round-tripping decimal form.
std::string format_value(double value);

}  // namespace charteval
