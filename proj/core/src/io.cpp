#include "aclasso/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace aclasso {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& field, double& out) {
  const std::string t = trim(field);
  if (t.empty()) return false;
  const char* begin = t.data();
  const char* end = begin + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

// Rows of parsed numeric fields with their 1-based line numbers; a single
// non-numeric leading line is treated as a header.
struct NumericCsv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;
};

NumericCsv parse_numeric_csv(const std::string& path) {
  NumericCsv out;
  const std::vector<std::string> lines = read_lines(path);
  bool first_content = true;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    std::vector<std::string> fields = split(lines[i], ',');
    std::vector<double> values(fields.size());
    bool numeric = true;
    for (std::size_t j = 0; j < fields.size(); ++j)
      if (!parse_double(fields[j], values[j])) {
        numeric = false;
        break;
      }
    if (!numeric) {
      if (first_content) {
        out.header = std::move(fields);
        first_content = false;
        continue;
      }
      throw DataError(path + ": line " + std::to_string(i + 1) +
                      ": non-numeric field");
    }
    first_content = false;
    if (!out.rows.empty() && values.size() != out.rows.front().size())
      throw DataError(path + ": line " + std::to_string(i + 1) + ": expected " +
                      std::to_string(out.rows.front().size()) +
                      " fields, got " + std::to_string(values.size()));
    out.rows.push_back(std::move(values));
    out.line_numbers.push_back(i + 1);
  }
  if (out.rows.empty()) throw DataError(path + ": no data rows");
  return out;
}

Dataset dataset_from_csv(const std::string& path) {
  NumericCsv csv = parse_numeric_csv(path);
  const std::size_t width = csv.rows.front().size();
  if (width < 2)
    throw DataError(path + ": line " + std::to_string(csv.line_numbers.front()) +
                    ": need a response column plus at least one feature");
  Dataset ds;
  const Index m = static_cast<Index>(csv.rows.size());
  const Index n = static_cast<Index>(width - 1);
  ds.features = Matrix(m, n);
  ds.response = Vector(m);
  for (Index i = 0; i < m; ++i) {
    const auto& row = csv.rows[static_cast<std::size_t>(i)];
    ds.response[i] = row[0];
    for (Index j = 0; j < n; ++j)
      ds.features(i, j) = row[static_cast<std::size_t>(j) + 1];
  }
  if (csv.header.size() == width)
    ds.feature_names.assign(csv.header.begin() + 1, csv.header.end());
  return ds;
}

Dataset dataset_from_libsvm(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<double> labels;
  std::vector<std::vector<std::pair<Index, double>>> rows;
  Index max_index = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::istringstream ls(lines[i]);
    std::string token;
    if (!(ls >> token)) continue;  // blank line
    double label;
    if (!parse_double(token, label))
      throw DataError(path + ": line " + std::to_string(i + 1) +
                      ": bad label '" + token + "'");
    std::vector<std::pair<Index, double>> entries;
    while (ls >> token) {
      const std::size_t colon = token.find(':');
      if (colon == std::string::npos)
        throw DataError(path + ": line " + std::to_string(i + 1) +
                        ": bad entry '" + token + "'");
      double idx_raw, value;
      if (!parse_double(token.substr(0, colon), idx_raw) ||
          idx_raw != static_cast<double>(static_cast<Index>(idx_raw)) ||
          idx_raw < 1.0 || !parse_double(token.substr(colon + 1), value))
        throw DataError(path + ": line " + std::to_string(i + 1) +
                        ": bad entry '" + token + "'");
      const Index idx = static_cast<Index>(idx_raw);
      max_index = std::max(max_index, idx);
      entries.emplace_back(idx - 1, value);
    }
    labels.push_back(label);
    rows.push_back(std::move(entries));
  }
  if (rows.empty()) throw DataError(path + ": no data rows");
  Dataset ds;
  const Index m = static_cast<Index>(rows.size());
  ds.features = Matrix::Zero(m, max_index);
  ds.response = Vector(m);
  for (Index i = 0; i < m; ++i) {
    ds.response[i] = labels[static_cast<std::size_t>(i)];
    for (const auto& [j, v] : rows[static_cast<std::size_t>(i)])
      ds.features(i, j) = v;
  }
  return ds;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out;
}

void write_config(std::ostream& out, const ConfigEcho& config) {
  out << "  \"config\": {";
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (i) out << ", ";
    out << "\"" << json_escape(config[i].first) << "\": \""
        << json_escape(config[i].second) << "\"";
  }
  out << "}";
}

void write_vector_json(std::ostream& out, const Vector& v) {
  out << "[";
  for (Index i = 0; i < v.size(); ++i) {
    if (i) out << ", ";
    out << format_double(v[i]);
  }
  out << "]";
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Dataset load_dataset(const std::string& path, InputFormat format) {
  return format == InputFormat::csv ? dataset_from_csv(path)
                                    : dataset_from_libsvm(path);
}

Matrix load_matrix_csv(const std::string& path) {
  NumericCsv csv = parse_numeric_csv(path);
  const Index m = static_cast<Index>(csv.rows.size());
  const Index n = static_cast<Index>(csv.rows.front().size());
  Matrix out(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j)
      out(i, j) = csv.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return out;
}

Vector load_vector(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<double> values;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string t = trim(lines[i]);
    if (t.empty()) continue;
    double v;
    if (!parse_double(t, v))
      throw DataError(path + ": line " + std::to_string(i + 1) +
                      ": bad value '" + t + "'");
    values.push_back(v);
  }
  if (values.empty()) throw DataError(path + ": no values");
  return Eigen::Map<const Vector>(values.data(),
                                  static_cast<Index>(values.size()));
}

void write_path_json(std::ostream& out, const ConfigEcho& config,
                     const PathResult& path, bool include_solutions) {
  out << "{\n";
  write_config(out, config);
  out << ",\n  \"results\": [\n";
  for (std::size_t i = 0; i < path.entries.size(); ++i) {
    const PathEntry& e = path.entries[i];
    out << "    {\"lambda\": " << format_double(e.lambda)
        << ", \"nnz\": " << e.nnz
        << ", \"objective\": " << format_double(e.objective)
        << ", \"kkt_residual\": " << format_double(e.kkt_residual)
        << ", \"feasibility\": " << format_double(e.feasibility)
        << ", \"seconds\": " << format_double(e.seconds)
        << ", \"converged\": " << (e.converged ? "true" : "false") << "}"
        << (i + 1 < path.entries.size() ? "," : "") << "\n";
  }
  out << "  ]";
  if (include_solutions) {
    out << ",\n  \"solutions\": [\n";
    for (std::size_t i = 0; i < path.entries.size(); ++i) {
      out << "    ";
      write_vector_json(out, path.entries[i].x);
      out << (i + 1 < path.entries.size() ? "," : "") << "\n";
    }
    out << "  ]";
  }
  out << "\n}\n";
}

void write_path_csv(std::ostream& out, const PathResult& path) {
  out << "lambda,nnz,objective,kkt_residual,feasibility,seconds\n";
  for (const PathEntry& e : path.entries)
    out << format_double(e.lambda) << "," << e.nnz << ","
        << format_double(e.objective) << "," << format_double(e.kkt_residual)
        << "," << format_double(e.feasibility) << ","
        << format_double(e.seconds) << "\n";
}

void write_ssc_json(std::ostream& out, const ConfigEcho& config,
                    const SSCResult& ssc, double lambda,
                    bool include_solutions) {
  out << "{\n";
  write_config(out, config);
  out << ",\n  \"lambda\": " << format_double(lambda)
      << ",\n  \"objective\": " << format_double(ssc.objective)
      << ",\n  \"feasibility\": " << format_double(ssc.feasibility)
      << ",\n  \"seconds\": " << format_double(ssc.seconds)
      << ",\n  \"all_converged\": " << (ssc.all_converged ? "true" : "false")
      << ",\n  \"results\": [\n";
  const Index n = ssc.X.cols();
  for (Index j = 0; j < n; ++j) {
    out << "    {\"column\": " << j
        << ", \"nnz\": " << ssc.column_nnz[static_cast<std::size_t>(j)]
        << ", \"objective\": "
        << format_double(ssc.column_objectives[static_cast<std::size_t>(j)])
        << "}" << (j + 1 < n ? "," : "") << "\n";
  }
  out << "  ]";
  if (include_solutions) {
    out << ",\n  \"solutions\": [\n";
    for (Index j = 0; j < n; ++j) {
      out << "    ";
      write_vector_json(out, ssc.X.col(j));
      out << (j + 1 < n ? "," : "") << "\n";
    }
    out << "  ]";
  }
  out << "\n}\n";
}

void write_ssc_csv(std::ostream& out, const SSCResult& ssc, double lambda) {
  Index nnz = 0;
  for (Index v : ssc.column_nnz) nnz += v;
  out << "lambda,nnz,objective,feasibility,seconds\n";
  out << format_double(lambda) << "," << nnz << ","
      << format_double(ssc.objective) << "," << format_double(ssc.feasibility)
      << "," << format_double(ssc.seconds) << "\n";
}

void write_prox_json(std::ostream& out, const ConfigEcho& config,
                     const ProxResult& prox, double feasibility,
                     double seconds, bool include_solutions) {
  Index nnz = 0;
  for (Index i = 0; i < prox.z.size(); ++i)
    if (prox.z[i] != 0.0) ++nnz;
  out << "{\n";
  write_config(out, config);
  out << ",\n  \"results\": [\n    {\"w\": " << format_double(prox.w)
      << ", \"nnz\": " << nnz
      << ", \"feasibility\": " << format_double(feasibility)
      << ", \"degenerate_zero\": " << (prox.degenerate_zero ? "true" : "false")
      << ", \"seconds\": " << format_double(seconds) << "}\n  ]";
  if (include_solutions) {
    out << ",\n  \"solutions\": [\n    ";
    write_vector_json(out, prox.z);
    out << "\n  ]";
  }
  out << "\n}\n";
}

void write_prox_csv(std::ostream& out, const ProxResult& prox,
                    double feasibility, double seconds) {
  Index nnz = 0;
  for (Index i = 0; i < prox.z.size(); ++i)
    if (prox.z[i] != 0.0) ++nnz;
  out << "w,nnz,feasibility,seconds\n";
  out << format_double(prox.w) << "," << nnz << ","
      << format_double(feasibility) << "," << format_double(seconds) << "\n";
}

}  // namespace aclasso
