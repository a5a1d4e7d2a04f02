#pragma once

#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace cabq {

/// Content-addressed file cache: one JSON file per (kind, key) under
/// <dir>/<kind>/<hash>.json.  Writes are atomic (temp file + rename), so
/// concurrent readers and a single writer per key are safe.  Corrupt entries
/// are evicted with a warning and treated as misses.
class FileCache {
public:
    FileCache() = default; // disabled
    FileCache(std::string dir, bool enabled);

    bool enabled() const { return enabled_; }

    std::optional<nlohmann::json> get(const std::string& kind, const std::string& key) const;
    void put(const std::string& kind, const std::string& key, const nlohmann::json& value) const;

private:
    std::string entry_path(const std::string& kind, const std::string& key) const;
    std::string dir_;
    bool enabled_ = false;
};

} // namespace cabq
