#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rmprod/cli/record.hpp"

namespace rmprod::cli {

/// Environment variable naming the directory relative output paths land in.
inline constexpr const char* kOutputDirEnv = "RMPROD_OUTPUT_DIR";

/// Fixed CSV column order.
inline constexpr std::string_view kCsvHeader =
    "n,trials,all_real,complex_pair,indeterminate,p_hat,ci_lo,ci_hi,bound,exact_num,exact_den";

class OutputError : public Error {
public:
    using Error::Error;
};

Json record_to_json(const ResultRecord& rec);
std::string record_to_csv(const ResultRecord& rec);
std::string record_to_svg(const ResultRecord& rec);

/// "json", "csv" or "svg": the override when nonempty, else the extension.
std::string output_format(const std::filesystem::path& path, std::string_view override_format);

/// Relative paths resolve against $RMPROD_OUTPUT_DIR when it is set.
std::filesystem::path resolve_output_path(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Writes every configured output; returns the resolved paths.
std::vector<std::filesystem::path> emit_outputs(const ResultRecord& rec);

} // namespace rmprod::cli
