#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "crossclone/metrics.hpp"
#include "crossclone/stats.hpp"

namespace crossclone {

// One evaluation result: which experiment, under which protocol, for which
// model variant, with its metrics.
struct ReportRow {
    std::string experiment_id;
    std::string protocol;
    std::string model_variant;
    MetricsTuple metrics;
};

// CSV with header experiment_id,protocol,model_variant,accuracy,precision,
// recall,f1. Metric values round-trip at full precision.
void write_report_csv(const std::vector<ReportRow>& rows, const std::filesystem::path& path);
std::vector<ReportRow> read_report_csv(const std::filesystem::path& path);

// Markdown table of the same rows, metrics shown to four decimals.
void write_report_md(const std::vector<ReportRow>& rows, const std::filesystem::path& path);

struct NamedTest {
    std::string name;
    TestResult result;
};

// JSON document mapping test names to statistic/p-value/method details.
void write_stats_json(const std::vector<NamedTest>& tests, const std::filesystem::path& path);

} // namespace crossclone
