#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bdc/fewshot.hpp"
#include "json.hpp"

namespace bdc {

struct AblationRow {
    std::string name;
    double accuracy = 0.0;
};

/// Line-delimited JSON. One {"record":"query",...} line per query in evaluation
/// order, then one {"record":"summary",...} line carrying accuracy, per-class
/// accuracy, the confusion matrix and the resolved config.
std::string format_report(const AccuracyReport& report, const std::vector<std::string>& class_names,
                          const nlohmann::json& config);

/// {"record":"grid",alpha,delta,accuracy} per cell, then {"record":"best",...}.
std::string format_grid(const GridResult& grid, const nlohmann::json& config);

/// {"record":"ablation","row":name,"accuracy":x} per row.
std::string format_ablation(const std::vector<AblationRow>& rows, const nlohmann::json& config);

/// Fixed-width table for terminals.
std::string ablation_table(const std::vector<AblationRow>& rows);

void write_text_atomic(const std::filesystem::path& path, const std::string& text);

} // namespace bdc
