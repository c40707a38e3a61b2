#include "bdc/report.hpp"

#include <cstdio>
#include <span>

#include "binary_io.hpp"

namespace bdc {

using nlohmann::json;

std::string format_report(const AccuracyReport& report, const std::vector<std::string>& class_names,
                          const json& config) {
    std::string out;
    for (const QueryRecord& r : report.records) {
        const json line = {
            {"record", "query"},
            {"id", r.id},
            {"truth", r.truth},
            {"pred", r.prediction.label},
            {"p_b", r.prediction.p_b},
            {"p_m", r.prediction.p_m},
            {"fused", r.prediction.fused},
        };
        out += line.dump() + "\n";
    }
    json per_class = json::array();
    for (std::size_t n = 0; n < report.per_class.size(); ++n) {
        per_class.push_back({
            {"class", n < class_names.size() ? class_names[n] : std::to_string(n)},
            {"count", report.class_counts[n]},
            {"accuracy", report.per_class[n]},
        });
    }
    json summary = {
        {"record", "summary"},
        {"correct", report.correct},
        {"total", report.total},
        {"accuracy", report.accuracy},
        {"per_class", per_class},
        {"confusion", report.confusion},
        {"config", config},
    };
    summary["zero_shot_accuracy"] =
        report.zero_shot_accuracy ? json(*report.zero_shot_accuracy) : json(nullptr);
    out += summary.dump() + "\n";
    return out;
}

std::string format_grid(const GridResult& grid, const json& config) {
    std::string out;
    for (const GridRow& row : grid.table) {
        out += json{{"record", "grid"}, {"alpha", row.alpha}, {"delta", row.delta},
                    {"accuracy", row.accuracy}}
                   .dump() +
               "\n";
    }
    out += json{{"record", "best"},
                {"alpha", grid.best.alpha},
                {"delta", grid.best.delta},
                {"tau", grid.best.tau},
                {"accuracy", grid.best_accuracy},
                {"config", config}}
               .dump() +
           "\n";
    return out;
}

std::string format_ablation(const std::vector<AblationRow>& rows, const json& config) {
    std::string out;
    for (const AblationRow& row : rows)
        out += json{{"record", "ablation"}, {"row", row.name}, {"accuracy", row.accuracy}}.dump() + "\n";
    out += json{{"record", "config"}, {"config", config}}.dump() + "\n";
    return out;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
    std::string out = "setup                accuracy\n";
    for (const AblationRow& row : rows) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%-20s %8.4f\n", row.name.c_str(), row.accuracy);
        out += buf;
    }
    return out;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    detail::write_file_atomic(
        path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

} // namespace bdc
