#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wats/dataset.hpp"

namespace wats {

// Rows rejected during ingestion, with the offending line and reason.
struct IngestReport {
  std::vector<std::string> rejected;
};

// Reads `subject_id,group,time,value` CSV. Missing observations are absent
// rows. The grid is the union of observed times; subjects without a baseline
// observation are dropped and reported. Duplicate (subject, time) pairs and
// non-numeric fields are errors naming the line.
LongitudinalDataset ingest_csv(const std::filesystem::path& path, IngestReport* report = nullptr);

void write_dataset_csv(const LongitudinalDataset& data, const std::filesystem::path& path);

}  // namespace wats
