#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include <unistd.h>

#include "elig/errors.hpp"
#include "elig/store.hpp"

using namespace elig;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("elig-test-" + name + "-" + std::to_string(::getpid()));
    fs::remove_all(p);
    return p;
}

void exercise(KeyValueStore& s) {
    EXPECT_FALSE(s.get("document/a").has_value());
    s.put("document/a", "one");
    s.put("document/b", "two");
    s.put("state/a", "x");
    s.put("document/a", "uno");
    EXPECT_EQ(s.get("document/a"), "uno");
    EXPECT_EQ(s.keys("document/"), (std::vector<std::string>{"document/a", "document/b"}));
    EXPECT_EQ(s.keys("").size(), 3u);
    s.append("feedback/a", "first");
    s.append("feedback/a", "second");
    EXPECT_EQ(s.read_log("feedback/a"), (std::vector<std::string>{"first", "second"}));
    EXPECT_TRUE(s.read_log("feedback/none").empty());
    EXPECT_THROW(s.append("feedback/a", "two\nlines"), InputError);
}

}  // namespace

TEST(Store, Memory) {
    MemoryStore s;
    exercise(s);
}

TEST(Store, FilePersists) {
    const auto dir = temp_dir("file");
    {
        FileStore s(dir.string());
        exercise(s);
        s.put("document/odd id/ü.x", "weird");
    }
    FileStore again(dir.string());
    EXPECT_EQ(again.get("document/a"), "uno");
    EXPECT_EQ(again.get("document/odd id/ü.x"), "weird");
    EXPECT_EQ(again.read_log("feedback/a").size(), 2u);
    EXPECT_EQ(again.keys("document/").size(), 3u);
    fs::remove_all(dir);
}

TEST(Store, KeyEncoding) {
    for (const std::string k : {"a", "document/x y", "..", "%41", "ü/€", "a-b_c"}) {
        const auto enc = encode_key(k);
        EXPECT_EQ(decode_key(enc), k);
        EXPECT_EQ(enc.find('/'), std::string::npos);
        EXPECT_NE(enc, "..");
        EXPECT_NE(enc, ".");
    }
}

TEST(Store, OpenStoreChoosesBackend) {
    ::unsetenv(kStoreEnvVar);
    auto mem = open_store(std::nullopt);
    EXPECT_NE(dynamic_cast<MemoryStore*>(mem.get()), nullptr);
    const auto dir = temp_dir("env");
    ::setenv(kStoreEnvVar, dir.string().c_str(), 1);
    auto file = open_store(std::nullopt);
    EXPECT_NE(dynamic_cast<FileStore*>(file.get()), nullptr);
    ::unsetenv(kStoreEnvVar);
    fs::remove_all(dir);
}
