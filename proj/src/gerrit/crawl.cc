#include "revtime/gerrit/crawl.h"

#include <future>
#include <set>

#include "revtime/core/error.h"
#include "revtime/gerrit/normalize.h"

namespace revtime::gerrit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Loads change numbers already on disk, truncating a torn last line.
std::set<std::int64_t> existing_numbers(const fs::path& data_file) {
  std::set<std::int64_t> numbers;
  if (!fs::exists(data_file)) return numbers;
  std::ifstream in(data_file, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  const auto last_newline = content.rfind('\n');
  const std::size_t valid = last_newline == std::string::npos ? 0 : last_newline + 1;
  if (valid != content.size()) fs::resize_file(data_file, valid);

  std::size_t begin = 0;
  std::size_t line_no = 0;
  while (begin < valid) {
    const auto end = content.find('\n', begin);
    ++line_no;
    const std::string_view line(content.data() + begin, end - begin);
    begin = end + 1;
    if (line.empty()) continue;
    try {
      numbers.insert(json::parse(line).at("number").get<std::int64_t>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchemaError,
                  "line " + std::to_string(line_no) + " of " + data_file.string() + ": " + e.what());
    }
  }
  return numbers;
}

}  // namespace

DatasetManifest crawl_project(GerritClient& client, const fs::path& output_dir) {
  const CrawlConfig& config = client.config();
  const std::set<std::int64_t> stored = existing_numbers(output_dir / kDataFileName);

  DatasetManifest manifest;
  manifest.project = config.project;
  manifest.crawl_query = config.query;
  manifest.created_at = std::chrono::time_point_cast<std::chrono::microseconds>(
      std::chrono::system_clock::now());
  manifest.segments_from_diff = config.fetch_diffs;
  manifest.count = stored.size();
  manifest.complete = false;

  DatasetAppender appender(output_dir, manifest);
  std::set<std::int64_t> seen = stored;
  const auto limit = config.max_changes ? static_cast<std::size_t>(*config.max_changes)
                                        : std::numeric_limits<std::size_t>::max();
  try {
    std::int64_t offset = 0;
    while (appender.manifest().count < limit) {
      ChangePage page = client.fetch_change_page(offset);
      offset += static_cast<std::int64_t>(page.changes.size());

      std::vector<std::int64_t> pending;
      for (const auto& c : page.changes) {
        const auto number = c.doc.at("_number").get<std::int64_t>();
        if (seen.insert(number).second) pending.push_back(number);
      }
      if (pending.size() > limit - appender.manifest().count) {
        pending.resize(limit - appender.manifest().count);
      }

      for (std::size_t i = 0; i < pending.size();
           i += static_cast<std::size_t>(config.max_in_flight)) {
        const std::size_t end =
            std::min(pending.size(), i + static_cast<std::size_t>(config.max_in_flight));
        std::vector<std::future<ChangeRecord>> batch;
        for (std::size_t k = i; k < end; ++k) {
          batch.push_back(std::async(std::launch::async, [&client, &config, n = pending[k]] {
            return normalize_change(client.fetch_change_detail(n), config);
          }));
        }
        // Appends stay in page order through this single consumer.
        for (auto& f : batch) appender.append(f.get());
        appender.checkpoint(false);
      }
      if (!page.more_available || page.changes.empty()) break;
    }
  } catch (...) {
    appender.checkpoint(false);
    throw;
  }
  appender.checkpoint(true);
  return appender.manifest();
}

DatasetManifest crawl_project(const CrawlConfig& config, const fs::path& output_dir) {
  GerritClient client(config);
  return crawl_project(client, output_dir);
}

}  // namespace revtime::gerrit
