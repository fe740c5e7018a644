#include "crossclone/report.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "crossclone/errors.hpp"

namespace crossclone {

namespace {

constexpr const char* kCsvHeader = "experiment_id,protocol,model_variant,accuracy,precision,recall,f1";

std::string full_precision(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& field, const std::string& where) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw DataError(where + ": bad numeric field '" + field + "'");
    }
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

const char* alternative_name(Alternative alt) {
    switch (alt) {
        case Alternative::less: return "less";
        case Alternative::greater: return "greater";
        case Alternative::two_sided: return "two_sided";
    }
    return "two_sided";
}

} // namespace

void write_report_csv(const std::vector<ReportRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << kCsvHeader << '\n';
    for (const auto& row : rows) {
        out << row.experiment_id << ',' << row.protocol << ',' << row.model_variant << ','
            << full_precision(row.metrics.accuracy) << ','
            << full_precision(row.metrics.precision) << ','
            << full_precision(row.metrics.recall) << ','
            << full_precision(row.metrics.f1) << '\n';
    }
    if (!out) throw DataError("failed writing " + path.string());
}

std::vector<ReportRow> read_report_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty report");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw DataError(path.string() + ": unexpected CSV header");
    std::vector<ReportRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        const auto fields = split_csv_line(line);
        if (fields.size() != 7) throw DataError(where + ": expected 7 fields");
        ReportRow row;
        row.experiment_id = fields[0];
        row.protocol = fields[1];
        row.model_variant = fields[2];
        row.metrics.accuracy = parse_double(fields[3], where);
        row.metrics.precision = parse_double(fields[4], where);
        row.metrics.recall = parse_double(fields[5], where);
        row.metrics.f1 = parse_double(fields[6], where);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_report_md(const std::vector<ReportRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "# Evaluation report\n\n";
    out << "| experiment | protocol | variant | accuracy | precision | recall | F1 |\n";
    out << "|---|---|---|---|---|---|---|\n";
    char buf[32];
    for (const auto& row : rows) {
        out << "| " << row.experiment_id << " | " << row.protocol << " | " << row.model_variant;
        for (const double v : {row.metrics.accuracy, row.metrics.precision, row.metrics.recall,
                               row.metrics.f1}) {
            std::snprintf(buf, sizeof(buf), "%.4f", v);
            out << " | " << buf;
        }
        out << " |\n";
    }
    if (!out) throw DataError("failed writing " + path.string());
}

void write_stats_json(const std::vector<NamedTest>& tests, const std::filesystem::path& path) {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [name, result] : tests) {
        doc[name] = nlohmann::json{
            {"statistic", result.statistic},
            {"p_value", result.p_value},
            {"method", result.method == PValueMethod::exact ? "exact" : "normal_approx"},
            {"alternative", alternative_name(result.alternative)},
            {"n", result.n},
            {"rank_biserial", result.rank_biserial}};
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw DataError("failed writing " + path.string());
}

} // namespace crossclone
