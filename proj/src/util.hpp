#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace randlmi {

// FNV-1a 64-bit. Used for input-file digests in run manifests and for
// hash-comparing canonical logs; not a cryptographic hash.
inline uint64_t fnv1a64(std::string_view data, uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view data);

// Shortest decimal form that round-trips the exact double value.
std::string dtos(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace randlmi
