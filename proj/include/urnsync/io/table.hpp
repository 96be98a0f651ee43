#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "urnsync/version.hpp"

// Typed record tables and their two wire formats.
//
// CSV:   "# urnsync <version> schema=<name> config=<json>" metadata line,
//        a header row, then one row per record. Reals use 17 significant
//        digits; fields are quoted RFC-4180 style when needed. Interval
//        columns expand to <name>_lo,<name>_hi.
// JSONL: {"meta": {...}} line, then one JSON object per record; non-finite
//        reals are written as the strings "nan", "inf", "-inf".

namespace urnsync::io {

enum class FieldKind { integer, real, text, boolean, interval };

struct Interval {
  double lo = 0;
  double hi = 0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

using Field = std::variant<std::int64_t, double, std::string, bool, Interval>;

struct Column {
  std::string name;
  FieldKind kind;
  friend bool operator==(const Column&, const Column&) = default;
};

struct Table {
  std::string schema;
  std::vector<Column> columns;
  std::vector<std::vector<Field>> rows;
};

/// NaN-aware field equality (NaN == NaN) for round-trip comparisons.
[[nodiscard]] inline bool same_field(const Field& a, const Field& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<double>(&a)) {
    const double y = std::get<double>(b);
    return *x == y || (std::isnan(*x) && std::isnan(y));
  }
  return a == b;
}

[[nodiscard]] inline bool same_rows(const Table& a, const Table& b) {
  if (a.schema != b.schema || a.columns != b.columns || a.rows.size() != b.rows.size()) return false;
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    if (a.rows[r].size() != b.rows[r].size()) return false;
    for (std::size_t c = 0; c < a.rows[r].size(); ++c)
      if (!same_field(a.rows[r][c], b.rows[r][c])) return false;
  }
  return true;
}

/// Columns of every known record schema.
[[nodiscard]] inline const std::vector<Column>& schema_columns(const std::string& schema) {
  using K = FieldKind;
  static const std::map<std::string, std::vector<Column>> schemas{
      {"trajectory",
       {{"t", K::integer}, {"z_bar", K::real}, {"z_min", K::real}, {"z_max", K::real}, {"spread", K::real}}},
      {"trajectory_full", {{"t", K::integer}, {"urn", K::integer}, {"z", K::real}}},
      {"moments", {{"t", K::integer}, {"v_exact", K::real}, {"x_exact", K::real}, {"x_inf", K::real}}},
      {"ensemble",
       {{"t", K::integer}, {"estimator", K::text}, {"value", K::real}, {"stderr", K::real},
        {"n_samples", K::integer}}},
      {"asymptotics",
       {{"alpha", K::real}, {"regime", K::text}, {"slope", K::real}, {"r_squared", K::real},
        {"window", K::interval}, {"ratio_flag", K::text}}},
      {"clt",
       {{"t", K::integer}, {"mean", K::real}, {"variance", K::real}, {"variance_se", K::real},
        {"skewness", K::real}, {"excess_kurtosis", K::real}, {"ref_finite", K::real}, {"ref_limit", K::real},
        {"variance_z", K::real}, {"variance_ok", K::boolean}, {"skewness_ok", K::boolean},
        {"kurtosis_ok", K::boolean}}},
      {"clt_summary",
       {{"replicas", K::integer}, {"correlation_pairs", K::integer}, {"correlation_exceedances", K::integer},
        {"max_abs_correlation_z", K::real}, {"variance_ok", K::boolean}, {"gaussian", K::boolean},
        {"increments_ok", K::boolean}, {"passed", K::boolean}}},
  };
  const auto it = schemas.find(schema);
  if (it == schemas.end()) throw std::invalid_argument("unknown record schema '" + schema + "'");
  return it->second;
}

[[nodiscard]] inline Table make_table(const std::string& schema) {
  return Table{schema, schema_columns(schema), {}};
}

struct Metadata {
  std::string tool = "urnsync";
  std::string version = version_string;
  std::string schema;
  nlohmann::json config = nlohmann::json::object();
};

// ---------------------------------------------------------------------------
// CSV

[[nodiscard]] inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[nodiscard]] inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

namespace detail {

inline void append_csv_fields(std::vector<std::string>& out, const Field& f) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::int64_t>)
          out.push_back(std::to_string(v));
        else if constexpr (std::is_same_v<T, double>)
          out.push_back(format_real(v));
        else if constexpr (std::is_same_v<T, std::string>)
          out.push_back(csv_quote(v));
        else if constexpr (std::is_same_v<T, bool>)
          out.push_back(v ? "true" : "false");
        else {
          out.push_back(format_real(v.lo));
          out.push_back(format_real(v.hi));
        }
      },
      f);
}

inline void write_joined(std::ostream& os, const std::vector<std::string>& parts) {
  for (std::size_t k = 0; k < parts.size(); ++k) os << (k ? "," : "") << parts[k];
  os << '\n';
}

} // namespace detail

[[nodiscard]] inline std::string csv_metadata_line(const Metadata& meta) {
  return "# " + meta.tool + " " + meta.version + " schema=" + meta.schema + " config=" + meta.config.dump();
}

inline void write_csv(std::ostream& os, const Table& table, const Metadata& meta) {
  Metadata m = meta;
  m.schema = table.schema;
  os << csv_metadata_line(m) << '\n';
  std::vector<std::string> header;
  for (const auto& c : table.columns) {
    if (c.kind == FieldKind::interval) {
      header.push_back(c.name + "_lo");
      header.push_back(c.name + "_hi");
    } else {
      header.push_back(csv_quote(c.name));
    }
  }
  detail::write_joined(os, header);
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw std::logic_error("row width does not match schema");
    std::vector<std::string> parts;
    for (const auto& f : row) detail::append_csv_fields(parts, f);
    detail::write_joined(os, parts);
  }
}

/// Split CSV text into records of fields (RFC 4180 quoting, LF or CRLF).
[[nodiscard]] inline std::vector<std::vector<std::string>> parse_csv_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        rec.push_back(std::move(field));
        records.push_back(std::move(rec));
      }
      rec.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw std::runtime_error("unterminated quoted CSV field");
  if (any || !field.empty()) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  return records;
}

[[nodiscard]] inline double parse_real(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::out_of_range&) {
    // subnormals: stod reports ERANGE but strtod still returns the value
    v = std::strtod(s.c_str(), nullptr);
    used = s.size();
  } catch (const std::exception&) {
    throw std::runtime_error("not a number: '" + s + "'");
  }
  if (used != s.size()) throw std::runtime_error("not a number: '" + s + "'");
  return v;
}

/// Parse a metadata line written by csv_metadata_line.
[[nodiscard]] inline Metadata parse_csv_metadata(const std::string& line) {
  if (line.rfind("# ", 0) != 0) throw std::runtime_error("missing '# ' metadata line");
  std::istringstream is(line.substr(2));
  Metadata m;
  std::string schema_tok;
  is >> m.tool >> m.version >> schema_tok;
  if (schema_tok.rfind("schema=", 0) != 0) throw std::runtime_error("metadata line lacks schema=");
  m.schema = schema_tok.substr(7);
  const auto pos = line.find(" config=");
  if (pos == std::string::npos) throw std::runtime_error("metadata line lacks config=");
  m.config = nlohmann::json::parse(line.substr(pos + 8));
  return m;
}

[[nodiscard]] inline std::pair<Metadata, Table> read_csv(std::istream& is) {
  std::string first;
  if (!std::getline(is, first)) throw std::runtime_error("empty CSV input");
  if (!first.empty() && first.back() == '\r') first.pop_back();
  Metadata meta = parse_csv_metadata(first);
  std::ostringstream rest;
  rest << is.rdbuf();
  auto records = parse_csv_records(rest.str());
  Table table = make_table(meta.schema);
  if (records.empty()) throw std::runtime_error("CSV lacks a header row");
  std::size_t width = 0;
  for (const auto& c : table.columns) width += c.kind == FieldKind::interval ? 2 : 1;
  if (records.front().size() != width) throw std::runtime_error("CSV header does not match schema " + meta.schema);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != width) throw std::runtime_error("CSV row " + std::to_string(r) + " has wrong width");
    std::vector<Field> row;
    std::size_t k = 0;
    for (const auto& c : table.columns) {
      switch (c.kind) {
      case FieldKind::integer: row.emplace_back(static_cast<std::int64_t>(std::stoll(rec[k++]))); break;
      case FieldKind::real: row.emplace_back(parse_real(rec[k++])); break;
      case FieldKind::text: row.emplace_back(rec[k++]); break;
      case FieldKind::boolean: row.emplace_back(rec[k++] == "true"); break;
      case FieldKind::interval: {
        const double lo = parse_real(rec[k++]);
        const double hi = parse_real(rec[k++]);
        row.emplace_back(Interval{lo, hi});
        break;
      }
      }
    }
    table.rows.push_back(std::move(row));
  }
  return {std::move(meta), std::move(table)};
}

// ---------------------------------------------------------------------------
// JSON lines

[[nodiscard]] inline nlohmann::json metadata_json(const Metadata& meta) {
  return nlohmann::json{{"meta",
                         {{"tool", meta.tool}, {"version", meta.version}, {"schema", meta.schema},
                          {"config", meta.config}}}};
}

inline void write_jsonl(std::ostream& os, const Table& table, const Metadata& meta) {
  Metadata m = meta;
  m.schema = table.schema;
  os << metadata_json(m).dump() << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw std::logic_error("row width does not match schema");
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            auto real = [](double x) -> nlohmann::json {
              return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(format_real(x));
            };
            if constexpr (std::is_same_v<T, Interval>)
              obj[table.columns[c].name] = {real(v.lo), real(v.hi)};
            else if constexpr (std::is_same_v<T, double>)
              obj[table.columns[c].name] = real(v);
            else
              obj[table.columns[c].name] = v;
          },
          row[c]);
    }
    os << obj.dump() << '\n';
  }
}

[[nodiscard]] inline Metadata parse_jsonl_metadata(const nlohmann::json& j) {
  if (!j.contains("meta")) throw std::runtime_error("JSONL input lacks a meta record");
  const auto& m = j.at("meta");
  Metadata meta;
  meta.tool = m.at("tool").get<std::string>();
  meta.version = m.at("version").get<std::string>();
  meta.schema = m.at("schema").get<std::string>();
  meta.config = m.at("config");
  return meta;
}

[[nodiscard]] inline std::pair<Metadata, Table> read_jsonl(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty JSONL input");
  Metadata meta = parse_jsonl_metadata(nlohmann::json::parse(line));
  Table table = make_table(meta.schema);
  auto real = [](const nlohmann::json& v) {
    if (v.is_string()) return parse_real(v.get<std::string>());
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto obj = nlohmann::json::parse(line);
    std::vector<Field> row;
    for (const auto& c : table.columns) {
      const auto& v = obj.at(c.name);
      switch (c.kind) {
      case FieldKind::integer: row.emplace_back(v.get<std::int64_t>()); break;
      case FieldKind::real: row.emplace_back(real(v)); break;
      case FieldKind::text: row.emplace_back(v.get<std::string>()); break;
      case FieldKind::boolean: row.emplace_back(v.get<bool>()); break;
      case FieldKind::interval: row.emplace_back(Interval{real(v.at(0)), real(v.at(1))}); break;
      }
    }
    table.rows.push_back(std::move(row));
  }
  return {std::move(meta), std::move(table)};
}

enum class Format { csv, jsonl };

[[nodiscard]] inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "jsonl") return Format::jsonl;
  throw std::invalid_argument("format must be csv or jsonl, got '" + s + "'");
}

inline void serialize_records(std::ostream& os, const Table& table, const Metadata& meta, Format format) {
  if (format == Format::csv)
    write_csv(os, table, meta);
  else
    write_jsonl(os, table, meta);
}

[[nodiscard]] inline std::pair<Metadata, Table> parse_records(std::istream& is, Format format) {
  return format == Format::csv ? read_csv(is) : read_jsonl(is);
}

} // namespace urnsync::io
