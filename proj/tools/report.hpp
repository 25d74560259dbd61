#pragma once
// Machine-readable command output: ordered scalar fields plus named tables, written as JSON or CSV.
// Reals are printed with 17 significant digits; infinities become the strings "+inf" / "-inf".

#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace bowen::cli {

struct Null {};
using Value = std::variant<Null, bool, long long, double, std::string>;

inline Value real_or_null(bool present, double v) { return present ? Value(v) : Value(Null{}); }

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;

  /// Row length must match the column count.
  void add(std::vector<Value> row);
};

class Report {
 public:
  explicit Report(std::string command);

  void set(const std::string& key, Value v);
  Table& table(const std::string& name, std::vector<std::string> columns);

  void write_json(std::ostream& out) const;
  /// Scalar fields as a key,value block, then each table with its header; blocks separated by blank lines.
  void write_csv(std::ostream& out) const;

 private:
  std::vector<std::pair<std::string, Value>> fields_;
  std::vector<Table> tables_;
};

std::string format_real(double v);

}  // namespace bowen::cli
