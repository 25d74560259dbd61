#include "report.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace bowen::cli {

namespace {

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20)
          out += fmt::format("\\u{:04x}", static_cast<unsigned>(static_cast<unsigned char>(ch)));
        else
          out += ch;
    }
  }
  return out + "\"";
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string render(const Value& v, bool json) {
  struct Visitor {
    bool json;
    std::string operator()(Null) const { return json ? "null" : ""; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(long long i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      const std::string s = format_real(d);
      return json && !std::isfinite(d) ? json_string(s) : s;
    }
    std::string operator()(const std::string& s) const { return json ? json_string(s) : csv_cell(s); }
  };
  return std::visit(Visitor{json}, v);
}

}  // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  return fmt::format("{:.16e}", v);
}

void Table::add(std::vector<Value> row) {
  if (row.size() != columns.size()) throw std::logic_error("table row length mismatch in " + name);
  rows.push_back(std::move(row));
}

Report::Report(std::string command) {
  fields_.emplace_back("schema", std::string("bowen-press/1"));
  fields_.emplace_back("command", std::move(command));
}

void Report::set(const std::string& key, Value v) {
  for (auto& [k, old] : fields_)
    if (k == key) {
      old = std::move(v);
      return;
    }
  fields_.emplace_back(key, std::move(v));
}

Table& Report::table(const std::string& name, std::vector<std::string> columns) {
  tables_.push_back(Table{name, std::move(columns), {}});
  return tables_.back();
}

void Report::write_json(std::ostream& out) const {
  out << "{\n";
  bool first = true;
  for (const auto& [k, v] : fields_) {
    out << (first ? "" : ",\n") << "  " << json_string(k) << ": " << render(v, true);
    first = false;
  }
  for (const Table& t : tables_) {
    out << (first ? "" : ",\n") << "  " << json_string(t.name) << ": [";
    first = false;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      out << (r ? ",\n    {" : "\n    {");
      for (std::size_t c = 0; c < t.columns.size(); ++c)
        out << (c ? ", " : "") << json_string(t.columns[c]) << ": " << render(t.rows[r][c], true);
      out << "}";
    }
    out << (t.rows.empty() ? "]" : "\n  ]");
  }
  out << "\n}\n";
}

void Report::write_csv(std::ostream& out) const {
  out << "field,value\n";
  for (const auto& [k, v] : fields_) out << csv_cell(k) << ',' << render(v, false) << '\n';
  for (const Table& t : tables_) {
    out << "\n# " << t.name << '\n';
    for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << csv_cell(t.columns[c]);
    out << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << render(row[c], false);
      out << '\n';
    }
  }
}

}  // namespace bowen::cli
