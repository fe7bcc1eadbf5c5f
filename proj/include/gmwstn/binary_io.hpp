#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gmwstn::io {

// Self-describing little-endian containers: 4 magic bytes, a u16 version,
// then a format-specific payload.

class Writer {
public:
    explicit Writer(const std::filesystem::path& path);

    void magic(std::string_view tag, std::uint16_t version);
    void u8(std::uint8_t v);
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void f32(float v);
    void str(std::string_view s);
    void f64s(std::span<const double> values);
    void f32s(std::span<const float> values);
    void close();

private:
    void raw(const void* data, std::size_t n);

    std::filesystem::path path_;
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path);

    /// Checks the magic tag and returns the version.
    std::uint16_t magic(std::string_view tag);
    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    float f32();
    std::string str();
    std::vector<double> f64s(std::size_t count);
    std::vector<float> f32s(std::size_t count);

private:
    void raw(void* data, std::size_t n);

    std::filesystem::path path_;
    std::ifstream in_;
};

/// 64-bit FNV-1a, used for cache keys.
class Hasher {
public:
    Hasher& bytes(const void* data, std::size_t n);
    Hasher& str(std::string_view s) { return bytes(s.data(), s.size()); }
    template <typename T>
    Hasher& value(const T& v) { return bytes(&v, sizeof v); }
    std::uint64_t digest() const noexcept { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 14695981039346656037ull;
};

}  // namespace gmwstn::io
