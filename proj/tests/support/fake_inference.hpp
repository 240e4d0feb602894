#pragma once

// Loopback stand-in for the inference server consumed by the remote backend.

#include <atomic>
#include <chrono>
#include <memory>
#include <set>
#include <string>
#include <thread>

namespace testsupport {

enum class FakeMode { normal, unavailable, malformed_rows, not_normalized, slow };

class FakeInferenceServer {
public:
    // In normal mode, for the currency type, tokens in `currency_tokens` are
    // tagged B with probability 0.9; everything else is O with 0.9. Other
    // types get all-O grids.
    explicit FakeInferenceServer(FakeMode mode, std::set<std::string> currency_tokens = {"EUR", "USD"},
                                 std::chrono::milliseconds delay = std::chrono::milliseconds(500));
    ~FakeInferenceServer();

    FakeInferenceServer(const FakeInferenceServer&) = delete;
    FakeInferenceServer& operator=(const FakeInferenceServer&) = delete;

    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
    int requests() const { return requests_.load(); }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> requests_{0};
};

}  // namespace testsupport
