#pragma once

#include "vinecast/matrix_core.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace vinecast {

/// Shortest decimal text that round-trips (17 significant digits).
[[nodiscard]] std::string format_number(double value);

[[nodiscard]] std::uint64_t fnv1a(const std::string& bytes);
[[nodiscard]] std::string hex_digest(std::uint64_t hash);
/// FNV-1a digest of a file's bytes; throws IoError when unreadable.
[[nodiscard]] std::string file_digest(const std::string& path);

[[nodiscard]] std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

/// Data lines of a CSV file: comment lines (#) and blank lines dropped,
/// header checked against `expected_header` (ConfigError on mismatch).
[[nodiscard]] std::vector<std::vector<std::string>> read_csv_rows(const std::string& path,
                                                                  const std::string& expected_header);
[[nodiscard]] double parse_number(const std::string& text, const std::string& context);

struct CovSeries {
    std::vector<std::string> assets;  ///< sorted labels
    std::vector<std::string> days;
    std::vector<CovMatrix> matrices;
};

/// Long format `day,row_asset,col_asset,value`; the upper triangle suffices.
[[nodiscard]] CovSeries read_cov_csv(const std::string& path);
[[nodiscard]] std::string cov_csv(const CovSeries& series, const std::string& manifest);

struct IntradayData {
    std::vector<std::string> assets;
    std::vector<std::string> days;
    std::vector<Eigen::MatrixXd> returns;  ///< per day: periods x assets
    std::vector<std::string> warnings;
};

/// Long format `day,period,asset,log_return`. Days without any observation
/// are dropped with a warning; missing cells inside a day are an error.
[[nodiscard]] IntradayData read_intraday_csv(const std::string& path);

struct ReturnSeries {
    std::vector<std::string> assets;
    std::vector<std::string> days;
    Eigen::MatrixXd values;  ///< days x assets
};

/// Long format `day,asset,return`.
[[nodiscard]] ReturnSeries read_returns_csv(const std::string& path);

/// Orders day labels: integers numerically, anything else (ISO dates) lexically.
[[nodiscard]] bool day_less(const std::string& a, const std::string& b);

}  // namespace vinecast
