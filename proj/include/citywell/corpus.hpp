#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "citywell/date.hpp"
#include "citywell/records.hpp"

namespace citywell {

// Per-community, per-day record index. Built once, read-only afterwards.
class CorpusIndex {
public:
    using DayBuckets = std::map<Day, std::vector<uint32_t>>;

    CorpusIndex() = default;

    CorpusIndex(std::vector<Record> records, TzOffset tz) : records_(std::move(records)), tz_(tz) {
        day_of_.resize(records_.size());
        for (uint32_t i = 0; i < records_.size(); ++i) {
            const Record& r = records_[i];
            Day d = tz_.day_of(r.created_at);
            day_of_[i] = d;
            by_id_.emplace(r.id, i);
            auto& comm = communities_[r.community];
            comm.days[d].push_back(i);
            if (r.kind == RecordKind::submission) comm.submission_days.insert(d);
        }
    }

    const std::vector<Record>& records() const { return records_; }
    const Record& record(uint32_t idx) const { return records_[idx]; }
    Day day_of(uint32_t idx) const { return day_of_[idx]; }
    TzOffset tz() const { return tz_; }

    // parent lookup: id -> record index, or -1
    int64_t find_id(const std::string& id) const {
        auto it = by_id_.find(id);
        return it == by_id_.end() ? -1 : static_cast<int64_t>(it->second);
    }

    std::vector<std::string> community_names() const {
        std::vector<std::string> names;
        names.reserve(communities_.size());
        for (const auto& [name, _] : communities_) names.push_back(name);
        return names;
    }

    bool has_community(const std::string& name) const { return communities_.count(name) > 0; }

    const DayBuckets& days(const std::string& community) const {
        auto it = communities_.find(community);
        if (it == communities_.end()) throw InputError("unknown community '" + community + "'");
        return it->second.days;
    }

    const std::set<Day>& submission_days(const std::string& community) const {
        auto it = communities_.find(community);
        if (it == communities_.end()) throw InputError("unknown community '" + community + "'");
        return it->second.submission_days;
    }

    size_t total_indexed() const {
        size_t n = 0;
        for (const auto& [_, comm] : communities_)
            for (const auto& [day, bucket] : comm.days) n += bucket.size();
        return n;
    }

private:
    struct CommunityData {
        DayBuckets days;
        std::set<Day> submission_days;
    };

    std::vector<Record> records_;
    std::vector<Day> day_of_;
    TzOffset tz_;
    std::unordered_map<std::string, uint32_t> by_id_;
    std::map<std::string, CommunityData> communities_;  // ordered for determinism
};

inline CorpusIndex partition_by_day(RecordStream stream, TzOffset tz = {}) {
    return CorpusIndex(std::move(stream.records), tz);
}

// Communities with activity on at least min_days unique days in every listed
// year. Activity counts submissions; include_comments widens it to any record.
inline std::set<std::string> filter_active_communities(const CorpusIndex& index, int min_days,
                                                       const std::vector<int>& years,
                                                       bool include_comments = false) {
    if (min_days < 1 || min_days > 366) throw InputError("min_days must be in [1, 366]");
    std::set<std::string> active;
    for (const auto& name : index.community_names()) {
        std::map<int, std::set<Day>> days_per_year;
        if (include_comments) {
            for (const auto& [day, _] : index.days(name)) days_per_year[year_of(day)].insert(day);
        } else {
            for (Day day : index.submission_days(name)) days_per_year[year_of(day)].insert(day);
        }
        bool ok = true;
        for (int y : years) {
            auto it = days_per_year.find(y);
            if (it == days_per_year.end() || static_cast<int>(it->second.size()) < min_days) {
                ok = false;
                break;
            }
        }
        if (ok) active.insert(name);
    }
    return active;
}

}  // namespace citywell
