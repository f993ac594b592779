#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flids {

// Process exit codes used by the CLI. Library code throws the matching
// exception type; tools/main.cpp translates.
enum class ExitCode : int {
    ok = 0,
    config_error = 1,
    data_error = 2,
    numeric_error = 3,
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// 64-bit FNV-1a. Used for content hashing in run manifests and as the mixing
// step of seed derivation; not cryptographic.
constexpr uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr uint64_t kFnvPrime = 1099511628211ULL;

inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = kFnvOffset) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

inline uint64_t fnv1a64(std::string_view s, uint64_t h = kFnvOffset) {
    return fnv1a64(s.data(), s.size(), h);
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Every randomized stage derives its RNG seed from (global seed, stage name)
// and optionally a per-item index; there is no implicit entropy anywhere.
inline uint64_t derive_seed(uint64_t global_seed, std::string_view stage) {
    return splitmix64(global_seed ^ fnv1a64(stage));
}

inline uint64_t derive_seed(uint64_t global_seed, std::string_view stage, uint64_t index) {
    return splitmix64(derive_seed(global_seed, stage) ^ splitmix64(index + 0x51ed2701ULL));
}

std::string base64_encode(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> base64_decode(std::string_view text);

// Content hash of a file, for manifests and determinism checks.
uint64_t hash_file(const std::string& path);

}  // namespace flids
