#include "vinecast/io.hpp"

#include "vinecast/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace vinecast {

std::string format_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string hex_digest(std::uint64_t hash) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

std::string file_digest(const std::string& path) { return hex_digest(fnv1a(read_text(path))); }

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

bool is_integer(const std::string& s) {
    if (s.empty()) return false;
    const std::size_t start = s[0] == '-' ? 1 : 0;
    return start < s.size() && std::all_of(s.begin() + static_cast<long>(start), s.end(),
                                           [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path, const std::string& expected_header) {
    std::istringstream in(read_text(path));
    std::string line;
    bool header_seen = false;
    std::vector<std::vector<std::string>> rows;
    const auto expected_fields = split(expected_header);
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (!header_seen) {
            if (split(t) != expected_fields) {
                throw Error(ErrorCode::ConfigError, path + ": expected header '" + expected_header + "'");
            }
            header_seen = true;
            continue;
        }
        auto fields = split(t);
        if (fields.size() != expected_fields.size()) {
            throw Error(ErrorCode::ConfigError, path + ": wrong field count in line '" + t + "'");
        }
        rows.push_back(std::move(fields));
    }
    if (!header_seen) throw Error(ErrorCode::ConfigError, path + ": missing header '" + expected_header + "'");
    return rows;
}

double parse_number(const std::string& text, const std::string& context) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw Error(ErrorCode::ConfigError, context + ": not a finite number: '" + text + "'");
    }
    return value;
}

bool day_less(const std::string& a, const std::string& b) {
    if (is_integer(a) && is_integer(b)) return std::stoll(a) < std::stoll(b);
    return a < b;
}

CovSeries read_cov_csv(const std::string& path) {
    const auto rows = read_csv_rows(path, "day,row_asset,col_asset,value");
    std::set<std::string> asset_set;
    for (const auto& r : rows) {
        asset_set.insert(r[1]);
        asset_set.insert(r[2]);
    }
    CovSeries out;
    out.assets.assign(asset_set.begin(), asset_set.end());
    std::map<std::string, int> index;
    for (std::size_t k = 0; k < out.assets.size(); ++k) index[out.assets[k]] = static_cast<int>(k);
    const int d = static_cast<int>(out.assets.size());

    std::map<std::string, Eigen::MatrixXd, decltype(&day_less)> by_day(&day_less);
    std::map<std::string, Eigen::MatrixXi, decltype(&day_less)> seen(&day_less);
    for (const auto& r : rows) {
        auto [it, fresh] = by_day.try_emplace(r[0], Eigen::MatrixXd::Zero(d, d));
        if (fresh) seen[r[0]] = Eigen::MatrixXi::Zero(d, d);
        const double v = parse_number(r[3], path);
        const int i = index[r[1]];
        const int j = index[r[2]];
        it->second(i, j) = v;
        it->second(j, i) = v;
        seen[r[0]](i, j) = 1;
        seen[r[0]](j, i) = 1;
    }
    for (auto& [day, m] : by_day) {
        if (seen[day].minCoeff() == 0) throw Error(ErrorCode::ConfigError, path + ": day " + day + " is incomplete");
        out.days.push_back(day);
        out.matrices.emplace_back(m, static_cast<long>(out.days.size()));
    }
    if (out.matrices.empty()) throw Error(ErrorCode::ConfigError, path + ": no data rows");
    return out;
}

std::string cov_csv(const CovSeries& series, const std::string& manifest) {
    std::ostringstream out;
    out << "# manifest=" << manifest << "\n";
    out << "day,row_asset,col_asset,value\n";
    for (std::size_t t = 0; t < series.matrices.size(); ++t) {
        const auto& y = series.matrices[t];
        for (int i = 0; i < y.dim(); ++i) {
            for (int j = i; j < y.dim(); ++j) {
                out << series.days[t] << ',' << series.assets[i] << ',' << series.assets[j] << ','
                    << format_number(y(i, j)) << '\n';
            }
        }
    }
    return out.str();
}

IntradayData read_intraday_csv(const std::string& path) {
    const auto rows = read_csv_rows(path, "day,period,asset,log_return");
    std::set<std::string> asset_set;
    for (const auto& r : rows) asset_set.insert(r[2]);
    IntradayData out;
    out.assets.assign(asset_set.begin(), asset_set.end());
    std::map<std::string, int> index;
    for (std::size_t k = 0; k < out.assets.size(); ++k) index[out.assets[k]] = static_cast<int>(k);
    const int d = static_cast<int>(out.assets.size());

    // day -> period -> asset values (empty field = missing)
    std::map<std::string, std::map<long, std::map<int, double>>, decltype(&day_less)> cells(&day_less);
    for (const auto& r : rows) {
        auto& day = cells[r[0]];
        if (r[3].empty()) continue;
        if (!is_integer(r[1])) throw Error(ErrorCode::ConfigError, path + ": period must be an integer");
        day[std::stol(r[1])][index[r[2]]] = parse_number(r[3], path);
    }
    for (const auto& [day, periods] : cells) {
        if (periods.empty()) {
            out.warnings.push_back("day " + day + " has no observations; skipped");
            continue;
        }
        Eigen::MatrixXd m(static_cast<Eigen::Index>(periods.size()), d);
        Eigen::Index row = 0;
        for (const auto& [period, values] : periods) {
            if (static_cast<int>(values.size()) != d) {
                throw Error(ErrorCode::ConfigError,
                            path + ": day " + day + " period " + std::to_string(period) + " misses an asset");
            }
            for (const auto& [asset, v] : values) m(row, asset) = v;
            ++row;
        }
        out.days.push_back(day);
        out.returns.push_back(std::move(m));
    }
    return out;
}

ReturnSeries read_returns_csv(const std::string& path) {
    const auto rows = read_csv_rows(path, "day,asset,return");
    std::set<std::string> asset_set;
    std::set<std::string, decltype(&day_less)> day_set(&day_less);
    for (const auto& r : rows) {
        day_set.insert(r[0]);
        asset_set.insert(r[1]);
    }
    ReturnSeries out;
    out.assets.assign(asset_set.begin(), asset_set.end());
    out.days.assign(day_set.begin(), day_set.end());
    std::map<std::string, int> asset_index;
    std::map<std::string, int> day_index;
    for (std::size_t k = 0; k < out.assets.size(); ++k) asset_index[out.assets[k]] = static_cast<int>(k);
    for (std::size_t k = 0; k < out.days.size(); ++k) day_index[out.days[k]] = static_cast<int>(k);
    out.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(out.days.size()),
                                           static_cast<Eigen::Index>(out.assets.size()), std::nan(""));
    for (const auto& r : rows) out.values(day_index[r[0]], asset_index[r[1]]) = parse_number(r[2], path);
    if (!out.values.allFinite()) throw Error(ErrorCode::ConfigError, path + ": return panel has gaps");
    return out;
}

}  // namespace vinecast
