#pragma once

#include <filesystem>

#include "revtime/dataset/dataset.h"
#include "revtime/gerrit/client.h"

namespace revtime::gerrit {

// Streams every change matching the configured query (up to max_changes)
// through normalize_change into the dataset at `output_dir`.
//
// Resumable: records already present in the output are skipped by change
// number, and a torn trailing line from an interrupted run is discarded.
// On failure the manifest is checkpointed with complete = false before the
// error propagates.
DatasetManifest crawl_project(GerritClient& client, const std::filesystem::path& output_dir);

DatasetManifest crawl_project(const CrawlConfig& config, const std::filesystem::path& output_dir);

}  // namespace revtime::gerrit
