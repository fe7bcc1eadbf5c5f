#include "gmwstn/binary_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>

#include "gmwstn/error.hpp"

namespace gmwstn::io {

static_assert(std::endian::native == std::endian::little, "containers are written in host (little-endian) order");

Writer::Writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary)
{
    if (!out_) throw DataError("cannot open '" + path.string() + "' for writing");
}

void Writer::raw(const void* data, std::size_t n)
{
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out_) throw DataError("write failed for '" + path_.string() + "'");
}

void Writer::magic(std::string_view tag, std::uint16_t version)
{
    if (tag.size() != 4) throw ConfigError("container magic must be 4 bytes");
    raw(tag.data(), 4);
    u16(version);
}

void Writer::u8(std::uint8_t v) { raw(&v, sizeof v); }
void Writer::u16(std::uint16_t v) { raw(&v, sizeof v); }
void Writer::u32(std::uint32_t v) { raw(&v, sizeof v); }
void Writer::u64(std::uint64_t v) { raw(&v, sizeof v); }
void Writer::f64(double v) { raw(&v, sizeof v); }
void Writer::f32(float v) { raw(&v, sizeof v); }

void Writer::str(std::string_view s)
{
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
}

void Writer::f64s(std::span<const double> values) { raw(values.data(), values.size_bytes()); }
void Writer::f32s(std::span<const float> values) { raw(values.data(), values.size_bytes()); }

void Writer::close()
{
    out_.close();
    if (!out_) throw DataError("failed to finish writing '" + path_.string() + "'");
}

Reader::Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary)
{
    if (!in_) throw DataError("cannot open '" + path.string() + "'");
}

void Reader::raw(void* data, std::size_t n)
{
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw DataError("'" + path_.string() + "' is truncated");
}

std::uint16_t Reader::magic(std::string_view tag)
{
    char buf[4];
    raw(buf, 4);
    if (std::memcmp(buf, tag.data(), 4) != 0)
        throw DataError("'" + path_.string() + "' is not a " + std::string(tag) + " container");
    return u16();
}

std::uint8_t Reader::u8() { std::uint8_t v; raw(&v, sizeof v); return v; }
std::uint16_t Reader::u16() { std::uint16_t v; raw(&v, sizeof v); return v; }
std::uint32_t Reader::u32() { std::uint32_t v; raw(&v, sizeof v); return v; }
std::uint64_t Reader::u64() { std::uint64_t v; raw(&v, sizeof v); return v; }
double Reader::f64() { double v; raw(&v, sizeof v); return v; }
float Reader::f32() { float v; raw(&v, sizeof v); return v; }

std::string Reader::str()
{
    const std::uint32_t n = u32();
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
}

std::vector<double> Reader::f64s(std::size_t count)
{
    std::vector<double> v(count);
    raw(v.data(), count * sizeof(double));
    return v;
}

std::vector<float> Reader::f32s(std::size_t count)
{
    std::vector<float> v(count);
    raw(v.data(), count * sizeof(float));
    return v;
}

Hasher& Hasher::bytes(const void* data, std::size_t n)
{
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        state_ ^= p[i];
        state_ *= 1099511628211ull;
    }
    return *this;
}

std::string Hasher::hex() const
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
    return buf;
}

}  // namespace gmwstn::io
