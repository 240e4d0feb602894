#include "elig/store.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "elig/errors.hpp"

namespace elig {

namespace fs = std::filesystem;

std::optional<std::string> MemoryStore::get(const std::string& key) const {
    std::lock_guard lock(mu_);
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

void MemoryStore::put(const std::string& key, const std::string& value) {
    std::lock_guard lock(mu_);
    values_[key] = value;
}

std::vector<std::string> MemoryStore::keys(const std::string& prefix) const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (auto it = values_.lower_bound(prefix); it != values_.end() && it->first.rfind(prefix, 0) == 0; ++it)
        out.push_back(it->first);
    return out;
}

void MemoryStore::append(const std::string& log, const std::string& line) {
    if (line.find('\n') != std::string::npos) throw InputError("log lines must not contain newlines");
    std::lock_guard lock(mu_);
    logs_[log].push_back(line);
}

std::vector<std::string> MemoryStore::read_log(const std::string& log) const {
    std::lock_guard lock(mu_);
    auto it = logs_.find(log);
    return it == logs_.end() ? std::vector<std::string>{} : it->second;
}

std::string encode_key(const std::string& key) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : key) {
        if (std::isalnum(c) || c == '-' || c == '_') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 15]);
        }
    }
    return out;
}

std::string decode_key(const std::string& name) {
    std::string out;
    for (std::size_t i = 0; i < name.size(); ++i) {
        if (name[i] == '%' && i + 2 < name.size()) {
            out.push_back(static_cast<char>(std::stoi(name.substr(i + 1, 2), nullptr, 16)));
            i += 2;
        } else {
            out.push_back(name[i]);
        }
    }
    return out;
}

FileStore::FileStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_ / "kv", ec);
    fs::create_directories(root_ / "log", ec);
    if (!fs::is_directory(root_ / "kv") || !fs::is_directory(root_ / "log"))
        throw InputError("cannot create store directory '" + root_.string() + "'");
}

std::optional<std::string> FileStore::get(const std::string& key) const {
    std::lock_guard lock(mu_);
    std::ifstream in(root_ / "kv" / encode_key(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void FileStore::put(const std::string& key, const std::string& value) {
    std::lock_guard lock(mu_);
    const auto target = root_ / "kv" / encode_key(key);
    auto tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << value;
        if (!out.flush()) throw InputError("cannot write '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

std::vector<std::string> FileStore::keys(const std::string& prefix) const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(root_ / "kv")) {
        const auto name = entry.path().filename().string();
        if (name.size() > 4 && name.compare(name.size() - 4, 4, ".tmp") == 0) continue;
        auto key = decode_key(name);
        if (key.rfind(prefix, 0) == 0) out.push_back(std::move(key));
    }
    std::sort(out.begin(), out.end());
    return out;
}

void FileStore::append(const std::string& log, const std::string& line) {
    if (line.find('\n') != std::string::npos) throw InputError("log lines must not contain newlines");
    std::lock_guard lock(mu_);
    std::ofstream out(root_ / "log" / encode_key(log), std::ios::binary | std::ios::app);
    out << line << '\n';
    if (!out.flush()) throw InputError("cannot append to log '" + log + "'");
}

std::vector<std::string> FileStore::read_log(const std::string& log) const {
    std::lock_guard lock(mu_);
    std::ifstream in(root_ / "log" / encode_key(log), std::ios::binary);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(line);
    return out;
}

std::unique_ptr<KeyValueStore> open_store(const std::optional<std::string>& path) {
    if (path && !path->empty()) return std::make_unique<FileStore>(*path);
    if (const char* env = std::getenv(kStoreEnvVar); env && *env) return std::make_unique<FileStore>(env);
    return std::make_unique<MemoryStore>();
}

}  // namespace elig
