#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phdinf/moments.hpp"

namespace phdinf {

inline constexpr const char* kLibraryVersion = "0.1.0";

struct IngestConfig {
  /// Column name, or a 0-based column index when `response_index` is set.
  std::string response_column;
  std::optional<std::size_t> response_index;
  bool log_response = false;
  bool drop_rows_with_missing_response = true;
  /// Empty means every numeric column except the response.
  std::vector<std::string> predictor_columns;
  char delimiter = ',';
};

/// Parsed numeric columns before the Dataset size requirement is applied.
struct IngestTable {
  Vector y;
  Matrix x;
  std::string response;
  std::vector<std::string> predictors;
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;

  Index n() const { return y.size(); }
};

struct IngestResult {
  Dataset data;
  std::string response;
  std::vector<std::string> predictors;
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
};

/// Reads a header-first delimited file. Missing response cells (empty, NA,
/// NaN, null) drop the row when configured; any unparseable predictor cell is
/// a NonNumericCell error. In the default predictor mode a column whose first
/// present cell is not numeric is treated as categorical and skipped.
IngestTable ingest_table(const std::filesystem::path& path, const IngestConfig& cfg);

/// ingest_table followed by Dataset construction; TooFewRows when n < p + 2.
IngestResult ingest_csv(const std::filesystem::path& path, const IngestConfig& cfg);

/// Splits one delimited record, honouring double-quoted fields.
std::vector<std::string> split_record(const std::string& line, char delimiter);

/// Header `y,<names...>`, 17 significant digits, so ingest_csv round-trips.
std::string dataset_csv(const Dataset& d, char delimiter = ',');

/// Hex SHA-256 digests.
std::string sha256_hex(const std::string& bytes);
std::string file_sha256(const std::filesystem::path& path);

/// Provenance record written next to every output artifact.
class RunManifest {
 public:
  explicit RunManifest(std::string command);

  void set_config(const nlohmann::json& config);
  void add_seed(std::uint64_t seed);
  void set_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  void set(const std::string& key, const nlohmann::json& value);

  /// Stamps the finish time and serializes.
  nlohmann::json finish() const;
  void write(const std::filesystem::path& path) const;

 private:
  nlohmann::json doc_;
};

std::string utc_timestamp();

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace phdinf
