#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "wickshe/app/config.hpp"

namespace wickshe::app {

// In-memory CSV table: header row, 17-significant-digit floats, LF endings.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    CsvTable& row();
    CsvTable& add(double v);
    CsvTable& add(long long v);
    CsvTable& add(int v) { return add(static_cast<long long>(v)); }
    CsvTable& add(std::size_t v) { return add(static_cast<long long>(v)); }
    CsvTable& add(bool v) { return add(static_cast<long long>(v ? 1 : 0)); }
    CsvTable& add(std::string_view v);
    CsvTable& add(const char* v) { return add(std::string_view(v)); }

    [[nodiscard]] std::string str() const;
    [[nodiscard]] std::size_t rows() const { return cells_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> cells_;
};

[[nodiscard]] std::string format_real(double v);
[[nodiscard]] std::string sha256_hex(std::string_view data);

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double bound = 0.0;
    std::string detail;
};

struct ArtifactFile {
    std::string name;
    std::string sha256;
    std::size_t bytes = 0;
};

struct RunReport {
    std::string subcommand;
    double wall_time = 0.0;
    std::vector<ArtifactFile> files;
    std::vector<CheckResult> checks;
    std::vector<std::pair<std::string, std::string>> config;
    std::uint64_t seed = 0;
    int threads = 1;

    [[nodiscard]] bool all_pass() const;
    void check(std::string name, bool pass, double value, double bound, std::string detail = {});
};

// Writes `content` under `dir/name` and records it (with its hash) in the report.
void emit_csv(RunReport& report, const std::filesystem::path& dir, const std::string& name, const CsvTable& table);

void write_report_json(const RunReport& report, const std::filesystem::path& dir);

}  // namespace wickshe::app
