#include "wickshe/app/report.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace wickshe::app {

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row() {
    if (!cells_.empty() && cells_.back().size() != header_.size())
        throw std::logic_error("CsvTable: previous row has " + std::to_string(cells_.back().size()) + " cells, expected " +
                               std::to_string(header_.size()));
    cells_.emplace_back();
    return *this;
}

CsvTable& CsvTable::add(double v) {
    cells_.back().push_back(format_real(v));
    return *this;
}

CsvTable& CsvTable::add(long long v) {
    cells_.back().push_back(std::to_string(v));
    return *this;
}

CsvTable& CsvTable::add(std::string_view v) {
    if (v.find_first_of(",\"\n") != std::string_view::npos) {
        std::string q = "\"";
        for (char c : v) {
            if (c == '"') q += '"';
            q += c;
        }
        cells_.back().push_back(q + "\"");
    } else {
        cells_.back().emplace_back(v);
    }
    return *this;
}

std::string CsvTable::str() const {
    std::string out;
    auto emit = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) out += ',';
            out += r[i];
        }
        out += '\n';
    };
    emit(header_);
    for (const auto& r : cells_) {
        if (r.size() != header_.size()) throw std::logic_error("CsvTable: ragged row");
        emit(r);
    }
    return out;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

bool RunReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

void RunReport::check(std::string name, bool pass, double value, double bound, std::string detail) {
    checks.push_back({std::move(name), pass, value, bound, std::move(detail)});
}

void emit_csv(RunReport& report, const std::filesystem::path& dir, const std::string& name, const CsvTable& table) {
    const std::string content = table.str();
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + path.string());
    report.files.push_back({name, sha256_hex(content), content.size()});
}

void write_report_json(const RunReport& report, const std::filesystem::path& dir) {
    nlohmann::ordered_json j;
    j["subcommand"] = report.subcommand;
    j["seed"] = report.seed;
    j["threads"] = report.threads;
    j["wall_time_seconds"] = report.wall_time;
    j["all_pass"] = report.all_pass();
    auto& files = j["files"] = nlohmann::ordered_json::array();
    for (const auto& f : report.files) files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    auto& checks = j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : report.checks) {
        nlohmann::ordered_json row{{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"bound", c.bound}};
        if (!c.detail.empty()) row["detail"] = c.detail;
        checks.push_back(row);
    }
    auto& cfg = j["config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.config) cfg[k] = v;
    std::ofstream out(dir / "report.json", std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir / "report.json").string());
    out << j.dump(2) << '\n';
}

}  // namespace wickshe::app
