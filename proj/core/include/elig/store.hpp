#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace elig {

// Values are opaque strings; logs are append-only sequences of lines.
class KeyValueStore {
public:
    virtual ~KeyValueStore() = default;

    virtual std::optional<std::string> get(const std::string& key) const = 0;
    virtual void put(const std::string& key, const std::string& value) = 0;
    // Keys with the given prefix, sorted.
    virtual std::vector<std::string> keys(const std::string& prefix) const = 0;

    virtual void append(const std::string& log, const std::string& line) = 0;
    virtual std::vector<std::string> read_log(const std::string& log) const = 0;
};

class MemoryStore final : public KeyValueStore {
public:
    std::optional<std::string> get(const std::string& key) const override;
    void put(const std::string& key, const std::string& value) override;
    std::vector<std::string> keys(const std::string& prefix) const override;
    void append(const std::string& log, const std::string& line) override;
    std::vector<std::string> read_log(const std::string& log) const override;

private:
    mutable std::mutex mu_;
    std::map<std::string, std::string> values_;
    std::map<std::string, std::vector<std::string>> logs_;
};

// One file per key under <root>/kv and one line-delimited file per log under
// <root>/log. Values are replaced atomically via rename.
class FileStore final : public KeyValueStore {
public:
    explicit FileStore(std::filesystem::path root);

    std::optional<std::string> get(const std::string& key) const override;
    void put(const std::string& key, const std::string& value) override;
    std::vector<std::string> keys(const std::string& prefix) const override;
    void append(const std::string& log, const std::string& line) override;
    std::vector<std::string> read_log(const std::string& log) const override;

    const std::filesystem::path& root() const noexcept { return root_; }

private:
    std::filesystem::path root_;
    mutable std::mutex mu_;
};

// Environment variable naming the store directory.
inline constexpr const char* kStoreEnvVar = "ELIG_STORE";

// FileStore at `path`, else at $ELIG_STORE, else a MemoryStore.
std::unique_ptr<KeyValueStore> open_store(const std::optional<std::string>& path = std::nullopt);

// Reversible file-name encoding of arbitrary keys.
std::string encode_key(const std::string& key);
std::string decode_key(const std::string& name);

}  // namespace elig
