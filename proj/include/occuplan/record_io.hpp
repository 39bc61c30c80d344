#pragma once

#include <filesystem>
#include <string>

#include "occuplan/traffic_sim.hpp"

namespace occuplan {

// RunRecord round-trips through a compact JSON document; metrics and batch
// summaries serialize pretty-printed for reading. All writers are
// deterministic: sorted keys, shortest round-trip floats, no timestamps.

std::string record_to_json(const RunRecord& record);
RunRecord record_from_json(const std::string& text);
void write_record_file(const std::filesystem::path& path,
                       const RunRecord& record);
RunRecord read_record_file(const std::filesystem::path& path);

std::string metrics_to_json(const Metrics& metrics, const RunRecord& record);
std::string summary_to_json(const BatchSummary& summary, std::uint64_t seed,
                            const std::string& scenario_name,
                            const std::string& mode);

}  // namespace occuplan
