#pragma once

#include "json.hpp"
#include "revtime/dataset/change_record.h"
#include "revtime/gerrit/client.h"

namespace revtime::gerrit {

// Gerrit's system message prefix when an abandoned change is brought back.
inline constexpr std::string_view kRestoreMarker = "Restored";

// Maps a change detail document onto a ChangeRecord.
//
// Timestamps become UTC microseconds. The owner timezone comes from the
// first revision's commit author ("tz", minutes east of UTC); when absent it
// is 0 and tz_missing is set. Pseudo files (/COMMIT_MSG, /MERGE_LIST, ...)
// are dropped. Messages from accounts matching config.bot_accounts, and
// author-less system messages, are flagged from_bot.
//
// Throws Error(kSchemaError) naming the first missing mandatory key.
ChangeRecord normalize_change(const RawChange& raw, const CrawlConfig& config);

// Classifies the hunks of a Gerrit DiffInfo "content" array. A segment is a
// maximal run of edited entries between unchanged ("ab"/"skip") regions.
SegmentCounts count_segments(const nlohmann::json& diff_info);

}  // namespace revtime::gerrit
