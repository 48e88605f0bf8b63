#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "citywell/csv.hpp"
#include "citywell/date.hpp"
#include "citywell/error.hpp"
#include "citywell/log.hpp"

namespace citywell {

enum class RecordKind : uint8_t { submission, comment };

struct Record {
    std::string id;
    std::string author;
    int64_t created_at = 0;  // epoch seconds, UTC
    std::string body;
    std::string community;
    RecordKind kind = RecordKind::submission;
    std::string parent_id;  // empty for submissions
    std::string link_id;    // root submission id

    bool is_comment() const { return kind == RecordKind::comment; }
};

struct CommunityInfo {
    std::string community;
    std::string city;
    std::string state;
    std::string county_fips;
};

struct LoadStats {
    uint64_t lines_read = 0;
    uint64_t retained = 0;
    uint64_t malformed = 0;
    uint64_t out_of_range = 0;
    uint64_t duplicates_replaced = 0;

    uint64_t skipped() const { return malformed + out_of_range + duplicates_replaced; }
};

struct RecordStream {
    std::vector<Record> records;
    LoadStats stats;
};

struct LoadOptions {
    std::optional<DateRange> study_range;  // day filter on created_at
    TzOffset tz;
    size_t max_warn_lines = 5;
};

namespace detail {

inline bool parse_record_json(const std::string& line, Record& r) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return false;

    auto str = [&](const char* key, std::string& out, bool required) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) {
            if (required) return false;
            out.clear();
            return true;
        }
        out = it->get<std::string>();
        return true;
    };
    if (!str("id", r.id, true) || r.id.empty()) return false;
    if (!str("author", r.author, true)) return false;
    if (!str("body", r.body, true)) return false;
    if (!str("community", r.community, true) || r.community.empty()) return false;
    if (!str("link_id", r.link_id, true) || r.link_id.empty()) return false;

    auto ts = j.find("created_at");
    if (ts == j.end() || !ts->is_number_integer()) return false;
    r.created_at = ts->get<int64_t>();

    std::string kind;
    if (!str("kind", kind, true)) return false;
    if (kind == "submission") {
        r.kind = RecordKind::submission;
    } else if (kind == "comment") {
        r.kind = RecordKind::comment;
    } else {
        return false;
    }

    auto pid = j.find("parent_id");
    r.parent_id.clear();
    if (pid != j.end() && !pid->is_null()) {
        if (!pid->is_string()) return false;
        r.parent_id = pid->get<std::string>();
    }
    // comments carry a parent, submissions do not
    if (r.kind == RecordKind::comment && r.parent_id.empty()) return false;
    if (r.kind == RecordKind::submission && !r.parent_id.empty()) return false;
    return true;
}

}  // namespace detail

// Newline-delimited JSON records. Malformed lines are counted and skipped,
// duplicate ids keep the last occurrence.
inline RecordStream load_records(const std::string& path, const LoadOptions& opts = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open records file: " + path);

    RecordStream out;
    std::unordered_map<std::string, size_t> seen;  // id -> index in out.records
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++out.stats.lines_read;
        Record r;
        if (!detail::parse_record_json(line, r)) {
            ++out.stats.malformed;
            if (out.stats.malformed <= opts.max_warn_lines)
                log::warn("malformed record at " + path + " line " + std::to_string(out.stats.lines_read));
            continue;
        }
        if (opts.study_range && !opts.study_range->contains(opts.tz.day_of(r.created_at))) {
            ++out.stats.out_of_range;
            continue;
        }
        auto [it, inserted] = seen.try_emplace(r.id, out.records.size());
        if (!inserted) {
            ++out.stats.duplicates_replaced;
            if (out.stats.duplicates_replaced <= opts.max_warn_lines)
                log::warn("duplicate record id '" + r.id + "', keeping last occurrence");
            out.records[it->second] = std::move(r);
            continue;
        }
        out.records.push_back(std::move(r));
    }
    out.stats.retained = out.records.size();
    if (out.stats.malformed > 0)
        log::warn(path + ": skipped " + std::to_string(out.stats.malformed) + " malformed line(s)");
    return out;
}

// community metadata CSV: community, city, state, county_fips
inline std::vector<CommunityInfo> load_communities(const std::string& path) {
    auto table = csv::read_table(path);
    int c_comm = table.require_column("community", path);
    int c_city = table.require_column("city", path);
    int c_state = table.require_column("state", path);
    int c_fips = table.require_column("county_fips", path);
    std::vector<CommunityInfo> out;
    for (const auto& row : table.rows) {
        CommunityInfo info{row[c_comm], row[c_city], row[c_state], row[c_fips]};
        if (info.county_fips.size() != 5 ||
            info.county_fips.find_first_not_of("0123456789") != std::string::npos) {
            throw InputError("bad county_fips '" + info.county_fips + "' for community '" +
                             info.community + "' in " + path);
        }
        out.push_back(std::move(info));
    }
    return out;
}

}  // namespace citywell
