#include "phdinf/cli_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "phdinf/error.hpp"
#include "phdinf/format.hpp"

namespace phdinf {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool is_missing(const std::string& cell) {
  const std::string t = lower(trim(cell));
  return t.empty() || t == "na" || t == "n/a" || t == "nan" || t == "null";
}

std::optional<double> parse_number(const std::string& cell) {
  const std::string t = trim(cell);
  if (t.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

[[noreturn]] void non_numeric(std::size_t row, const std::string& column, const std::string& cell) {
  std::ostringstream msg;
  msg << "non-numeric cell at row " << row << ", column '" << column << "': '" << cell << "'";
  fail(ErrorKind::NonNumericCell, msg.str());
}

}  // namespace

std::vector<std::string> split_record(const std::string& line, char delimiter) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r' && c != '\n') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

IngestTable ingest_table(const std::filesystem::path& path, const IngestConfig& cfg) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::TooFewRows, "file has no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header = split_record(line, cfg.delimiter);
  for (auto& h : header) h = trim(h);

  std::size_t response_col = 0;
  if (cfg.response_index) {
    if (*cfg.response_index >= header.size()) fail(ErrorKind::MissingColumn, "response column index out of range");
    response_col = *cfg.response_index;
  } else {
    const auto it = std::find(header.begin(), header.end(), cfg.response_column);
    if (it == header.end()) fail(ErrorKind::MissingColumn, "response column '" + cfg.response_column + "' not found");
    response_col = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::vector<std::string>> rows;
  std::size_t rows_read = 0;
  std::size_t dropped = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++rows_read;
    std::vector<std::string> cells = split_record(line, cfg.delimiter);
    if (cells.size() != header.size()) {
      std::ostringstream msg;
      msg << "line " << line_no << " has " << cells.size() << " fields, header has " << header.size();
      fail(ErrorKind::NonNumericCell, msg.str());
    }
    if (is_missing(cells[response_col])) {
      if (cfg.drop_rows_with_missing_response) {
        ++dropped;
        continue;
      }
      non_numeric(rows_read, header[response_col], cells[response_col]);
    }
    rows.push_back(std::move(cells));
  }

  std::vector<std::size_t> predictor_cols;
  if (!cfg.predictor_columns.empty()) {
    for (const std::string& name : cfg.predictor_columns) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) fail(ErrorKind::MissingColumn, "predictor column '" + name + "' not found");
      predictor_cols.push_back(static_cast<std::size_t>(it - header.begin()));
    }
  } else {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == response_col) continue;
      const auto first = std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return !is_missing(r[c]); });
      if (first == rows.end() || !parse_number((*first)[c])) continue;
      predictor_cols.push_back(c);
    }
  }
  if (predictor_cols.size() < 2) fail(ErrorKind::MissingColumn, "fewer than two predictor columns resolved");

  const auto n = static_cast<Index>(rows.size());
  const auto p = static_cast<Index>(predictor_cols.size());

  Vector y(n);
  Matrix x(n, p);
  for (Index i = 0; i < n; ++i) {
    const auto& cells = rows[static_cast<std::size_t>(i)];
    const auto response = parse_number(cells[response_col]);
    if (!response) non_numeric(static_cast<std::size_t>(i + 1), header[response_col], cells[response_col]);
    if (cfg.log_response) {
      if (!(*response > 0.0)) non_numeric(static_cast<std::size_t>(i + 1), header[response_col], cells[response_col]);
      y[i] = std::log(*response);
    } else {
      y[i] = *response;
    }
    for (Index c = 0; c < p; ++c) {
      const std::size_t col = predictor_cols[static_cast<std::size_t>(c)];
      const auto v = parse_number(cells[col]);
      if (!v) non_numeric(static_cast<std::size_t>(i + 1), header[col], cells[col]);
      x(i, c) = *v;
    }
  }

  std::vector<std::string> names;
  for (std::size_t c : predictor_cols) names.push_back(header[c]);
  return IngestTable{std::move(y), std::move(x), header[response_col], names, rows_read, dropped};
}

IngestResult ingest_csv(const std::filesystem::path& path, const IngestConfig& cfg) {
  IngestTable t = ingest_table(path, cfg);
  if (t.n() < t.x.cols() + 2) {
    std::ostringstream msg;
    msg << "only " << t.n() << " usable rows for " << t.x.cols() << " predictors";
    fail(ErrorKind::TooFewRows, msg.str());
  }
  return IngestResult{Dataset(std::move(t.y), std::move(t.x), t.predictors), t.response, t.predictors, t.rows_read,
                      t.rows_dropped};
}

std::string dataset_csv(const Dataset& d, char delimiter) {
  std::string out = "y";
  for (const auto& name : d.names()) out += delimiter + name;
  out += '\n';
  for (Index i = 0; i < d.n(); ++i) {
    out += format_double(d.y()[i]);
    for (Index c = 0; c < d.p(); ++c) out += delimiter + format_double(d.x()(i, c));
    out += '\n';
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr);
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

RunManifest::RunManifest(std::string command) {
  doc_["command"] = std::move(command);
  doc_["library_version"] = kLibraryVersion;
  doc_["started_at"] = utc_timestamp();
  doc_["seeds"] = nlohmann::json::array();
  doc_["outputs"] = nlohmann::json::array();
}

void RunManifest::set_config(const nlohmann::json& config) {
  doc_["config"] = config;
  doc_["config_hash"] = sha256_hex(config.dump());
}

void RunManifest::add_seed(std::uint64_t seed) { doc_["seeds"].push_back(seed); }

void RunManifest::set_input(const std::filesystem::path& path) {
  doc_["input_file"] = path.string();
  doc_["input_digest"] = file_sha256(path);
}

void RunManifest::add_output(const std::filesystem::path& path) { doc_["outputs"].push_back(path.string()); }

void RunManifest::set(const std::string& key, const nlohmann::json& value) { doc_[key] = value; }

nlohmann::json RunManifest::finish() const {
  nlohmann::json out = doc_;
  out["finished_at"] = utc_timestamp();
  return out;
}

void RunManifest::write(const std::filesystem::path& path) const { write_text(path, finish().dump(2) + '\n'); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) fail(ErrorKind::IoError, "write failed for '" + path.string() + "'");
}

}  // namespace phdinf
