#include "cabq/cache.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cabq/errors.hpp"
#include "cabq/graph.hpp"

namespace fs = std::filesystem;

namespace cabq {

FileCache::FileCache(std::string dir, bool enabled) : dir_(std::move(dir)), enabled_(enabled) {
    if (enabled_ && dir_.empty()) throw ConfigError("cache enabled without a cache directory");
    if (enabled_) fs::create_directories(dir_);
}

std::string FileCache::entry_path(const std::string& kind, const std::string& key) const {
    return dir_ + "/" + kind + "/" + std::to_string(fnv1a(key)) + ".json";
}

std::optional<nlohmann::json> FileCache::get(const std::string& kind, const std::string& key) const {
    if (!enabled_) return std::nullopt;
    const std::string path = entry_path(kind, key);
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        nlohmann::json j;
        in >> j;
        if (j.at("key").get<std::string>() != key) return std::nullopt; // hash collision
        return j.at("value");
    } catch (const std::exception& e) {
        std::cerr << "warning: evicting corrupt cache entry " << path << " (" << e.what() << ")\n";
        std::error_code ec;
        fs::remove(path, ec);
        return std::nullopt;
    }
}

void FileCache::put(const std::string& kind, const std::string& key, const nlohmann::json& value) const {
    if (!enabled_) return;
    const std::string path = entry_path(kind, key);
    fs::create_directories(fs::path(path).parent_path());
    const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    const std::string tmp = path + ".tmp" + std::to_string(tid);
    {
        std::ofstream out(tmp);
        if (!out) throw ConfigError("cannot write cache entry '" + tmp + "'");
        nlohmann::json j;
        j["key"] = key;
        j["value"] = value;
        out << j.dump();
    }
    fs::rename(tmp, path);
}

} // namespace cabq
