#include "gmwstn/audio_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <ostream>
#include <set>

#include "gmwstn/error.hpp"

namespace gmwstn {
namespace fs = std::filesystem;

namespace {

enum class SampleFormat { MuLaw, Int8Unsigned, Int8Signed, Int16, Int24, Int32, Float32 };

struct RawAudio {
    AudioInfo info;
    SampleFormat format = SampleFormat::Int16;
    bool big_endian = false;
    std::size_t data_offset = 0;
    std::size_t data_bytes = 0;
};

std::vector<unsigned char> read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open audio file '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t le32(const unsigned char* p) { return p[0] | (p[1] << 8) | (p[2] << 16) | (std::uint32_t(p[3]) << 24); }
std::uint16_t le16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t be32(const unsigned char* p) { return (std::uint32_t(p[0]) << 24) | (p[1] << 16) | (p[2] << 8) | p[3]; }

std::size_t bytes_per_sample(SampleFormat f)
{
    switch (f) {
    case SampleFormat::MuLaw:
    case SampleFormat::Int8Unsigned:
    case SampleFormat::Int8Signed: return 1;
    case SampleFormat::Int16: return 2;
    case SampleFormat::Int24: return 3;
    case SampleFormat::Int32:
    case SampleFormat::Float32: return 4;
    }
    return 1;
}

RawAudio parse_wav(const std::vector<unsigned char>& bytes, const fs::path& path)
{
    const std::string name = path.string();
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw DataError("'" + name + "' is not a RIFF/WAVE file");

    RawAudio raw;
    bool have_fmt = false;
    bool have_data = false;
    int bits = 0;
    std::uint16_t tag = 0;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* chunk = bytes.data() + pos;
        const std::size_t size = le32(chunk + 4);
        const std::size_t body = pos + 8;
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (size < 16 || body + 16 > bytes.size()) throw DataError("'" + name + "': truncated fmt chunk");
            tag = le16(bytes.data() + body);
            raw.info.channels = le16(bytes.data() + body + 2);
            raw.info.rate = static_cast<int>(le32(bytes.data() + body + 4));
            bits = le16(bytes.data() + body + 14);
            if (tag == 0xFFFE && size >= 26 && body + 26 <= bytes.size()) tag = le16(bytes.data() + body + 24);
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            raw.data_offset = body;
            raw.data_bytes = size;
            have_data = true;
            break;
        }
        pos = body + size + (size & 1);
    }
    if (!have_fmt) throw DataError("'" + name + "': missing fmt chunk");
    if (!have_data) throw DataError("'" + name + "': missing data chunk");

    if (tag == 1) {
        switch (bits) {
        case 8: raw.format = SampleFormat::Int8Unsigned; break;
        case 16: raw.format = SampleFormat::Int16; break;
        case 24: raw.format = SampleFormat::Int24; break;
        case 32: raw.format = SampleFormat::Int32; break;
        default: throw DataError("'" + name + "': unsupported PCM bit depth " + std::to_string(bits));
        }
    } else if (tag == 3 && bits == 32) {
        raw.format = SampleFormat::Float32;
    } else if (tag == 7 && bits == 8) {
        raw.format = SampleFormat::MuLaw;
    } else {
        throw DataError("'" + name + "': unsupported WAV format tag " + std::to_string(tag));
    }
    return raw;
}

RawAudio parse_au(const std::vector<unsigned char>& bytes, const fs::path& path)
{
    const std::string name = path.string();
    if (bytes.size() < 24 || std::memcmp(bytes.data(), ".snd", 4) != 0)
        throw DataError("'" + name + "' is not a Sun AU file");
    RawAudio raw;
    raw.big_endian = true;
    raw.data_offset = be32(bytes.data() + 4);
    const std::uint32_t size = be32(bytes.data() + 8);
    const std::uint32_t encoding = be32(bytes.data() + 12);
    raw.info.rate = static_cast<int>(be32(bytes.data() + 16));
    raw.info.channels = static_cast<int>(be32(bytes.data() + 20));
    if (raw.data_offset < 24 || raw.data_offset > bytes.size()) throw DataError("'" + name + "': bad AU data offset");
    raw.data_bytes = size == 0xFFFFFFFFu ? bytes.size() - raw.data_offset : size;
    switch (encoding) {
    case 1: raw.format = SampleFormat::MuLaw; break;
    case 2: raw.format = SampleFormat::Int8Signed; break;
    case 3: raw.format = SampleFormat::Int16; break;
    case 4: raw.format = SampleFormat::Int24; break;
    case 5: raw.format = SampleFormat::Int32; break;
    case 6: raw.format = SampleFormat::Float32; break;
    default: throw DataError("'" + name + "': unsupported AU encoding " + std::to_string(encoding));
    }
    return raw;
}

RawAudio parse_header(const std::vector<unsigned char>& bytes, const fs::path& path)
{
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), ".snd", 4) == 0) return parse_au(bytes, path);
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "RIFF", 4) == 0) return parse_wav(bytes, path);
    throw DataError("'" + path.string() + "': unrecognised audio container (expected WAV or AU)");
}

void finish_info(RawAudio& raw, std::size_t file_size, const fs::path& path)
{
    if (raw.info.channels < 1) throw DataError("'" + path.string() + "': invalid channel count");
    if (raw.info.rate <= 0) throw DataError("'" + path.string() + "': invalid sample rate");
    if (raw.data_offset + raw.data_bytes > file_size)
        throw DataError("'" + path.string() + "': truncated audio data (header declares " +
                        std::to_string(raw.data_bytes) + " bytes, " +
                        std::to_string(file_size - raw.data_offset) + " present)");
    const std::size_t frame_bytes = bytes_per_sample(raw.format) * static_cast<std::size_t>(raw.info.channels);
    raw.info.frames = raw.data_bytes / frame_bytes;
}

double mulaw_to_linear(unsigned char code)
{
    const unsigned u = static_cast<unsigned char>(~code);
    const int exponent = (u >> 4) & 0x07;
    const int mantissa = u & 0x0F;
    int sample = (((mantissa << 3) + 0x84) << exponent) - 0x84;
    if (u & 0x80) sample = -sample;
    return sample / 32768.0;
}

double read_sample(const unsigned char* p, SampleFormat f, bool big_endian)
{
    auto get = [&](int i, int width) { return big_endian ? p[i] : p[width - 1 - i]; };  // most significant first
    switch (f) {
    case SampleFormat::MuLaw: return mulaw_to_linear(p[0]);
    case SampleFormat::Int8Unsigned: return (static_cast<int>(p[0]) - 128) / 128.0;
    case SampleFormat::Int8Signed: return static_cast<std::int8_t>(p[0]) / 128.0;
    case SampleFormat::Int16: {
        const auto v = static_cast<std::int16_t>((get(0, 2) << 8) | get(1, 2));
        return v / 32768.0;
    }
    case SampleFormat::Int24: {
        std::int32_t v = (get(0, 3) << 16) | (get(1, 3) << 8) | get(2, 3);
        if (v & 0x800000) v -= 0x1000000;
        return v / 8388608.0;
    }
    case SampleFormat::Int32: {
        const auto v = static_cast<std::int32_t>((std::uint32_t(get(0, 4)) << 24) | (get(1, 4) << 16) |
                                                 (get(2, 4) << 8) | get(3, 4));
        return v / 2147483648.0;
    }
    case SampleFormat::Float32: {
        const std::uint32_t bitsv = (std::uint32_t(get(0, 4)) << 24) | (get(1, 4) << 16) | (get(2, 4) << 8) | get(3, 4);
        float v;
        std::memcpy(&v, &bitsv, sizeof v);
        return static_cast<double>(v);
    }
    }
    return 0.0;
}

// Windowed-sinc lowpass at the new Nyquist, then keep every factor-th sample.
std::vector<double> decimate(const std::vector<double>& x, int factor)
{
    const int half = 32 * factor;
    std::vector<double> taps(2 * half + 1);
    const double cutoff = 0.5 / factor;
    double sum = 0.0;
    for (int i = -half; i <= half; ++i) {
        const double sinc = i == 0 ? 2.0 * cutoff : std::sin(2.0 * std::numbers::pi * cutoff * i) / (std::numbers::pi * i);
        const double window = 0.5 + 0.5 * std::cos(std::numbers::pi * i / (half + 1));
        taps[static_cast<std::size_t>(i + half)] = sinc * window;
        sum += sinc * window;
    }
    for (auto& t : taps) t /= sum;

    std::vector<double> out;
    out.reserve(x.size() / factor + 1);
    const auto n = static_cast<long>(x.size());
    for (long c = 0; c < n; c += factor) {
        double acc = 0.0;
        for (long i = -half; i <= half; ++i) {
            const long idx = c - i;
            if (idx >= 0 && idx < n) acc += taps[static_cast<std::size_t>(i + half)] * x[static_cast<std::size_t>(idx)];
        }
        out.push_back(acc);
    }
    return out;
}

bool is_audio_extension(const fs::path& p)
{
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".wav" || ext == ".au";
}

}  // namespace

AudioInfo probe_audio(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open audio file '" + path.string() + "'");
    // Headers live in the first few KB; the data size check needs the file length.
    std::vector<unsigned char> head(65536);
    in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
    head.resize(static_cast<std::size_t>(in.gcount()));
    RawAudio raw = parse_header(head, path);
    finish_info(raw, static_cast<std::size_t>(fs::file_size(path)), path);
    return raw.info;
}

Track decode_audio(const fs::path& path, const DecodeOptions& options)
{
    const auto bytes = read_file(path);
    RawAudio raw = parse_header(bytes, path);
    finish_info(raw, bytes.size(), path);

    const auto channels = static_cast<std::size_t>(raw.info.channels);
    if (channels > 1 && !options.downmix)
        throw DataError("'" + path.string() + "' has " + std::to_string(channels) +
                        " channels; mono required (enable downmix to average channels)");

    const std::size_t width = bytes_per_sample(raw.format);
    Track track;
    track.id = path.filename().string();
    track.samples.resize(raw.info.frames);
    const unsigned char* data = bytes.data() + raw.data_offset;
    for (std::size_t i = 0; i < raw.info.frames; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c)
            acc += read_sample(data + (i * channels + c) * width, raw.format, raw.big_endian);
        track.samples[i] = acc / static_cast<double>(channels);
    }

    track.rate = raw.info.rate;
    if (track.rate != options.target_rate) {
        const bool integer_factor = track.rate > options.target_rate && track.rate % options.target_rate == 0;
        if (!options.resample || !integer_factor)
            throw DataError("'" + path.string() + "' is sampled at " + std::to_string(track.rate) +
                            " Hz, expected " + std::to_string(options.target_rate) +
                            (options.resample ? " (only integer-factor downsampling is supported)" : ""));
        track.samples = decimate(track.samples, track.rate / options.target_rate);
        track.rate = options.target_rate;
    }
    return track;
}

void write_wav(const fs::path& path, std::span<const double> samples, int rate)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    auto put32 = [&](std::uint32_t v) {
        const std::array<char, 4> b{char(v & 0xFF), char((v >> 8) & 0xFF), char((v >> 16) & 0xFF), char((v >> 24) & 0xFF)};
        out.write(b.data(), 4);
    };
    auto put16 = [&](std::uint16_t v) {
        const std::array<char, 2> b{char(v & 0xFF), char((v >> 8) & 0xFF)};
        out.write(b.data(), 2);
    };
    const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
    out.write("RIFF", 4);
    put32(36 + data_bytes);
    out.write("WAVEfmt ", 8);
    put32(16);
    put16(1);
    put16(1);
    put32(static_cast<std::uint32_t>(rate));
    put32(static_cast<std::uint32_t>(rate) * 2);
    put16(2);
    put16(16);
    out.write("data", 4);
    put32(data_bytes);
    for (double s : samples) {
        const double clipped = std::clamp(s, -1.0, 1.0);
        const auto v = static_cast<std::int16_t>(std::lround(clipped * 32767.0));
        put16(static_cast<std::uint16_t>(v));
    }
}

std::vector<Segment> segment_track(const Track& track, const SegmentSpec& spec)
{
    if (spec.length == 0 || spec.count == 0) throw ConfigError("segment length and count must be positive");
    const std::size_t hop = spec.effective_hop();
    const std::size_t required = spec.required_samples();
    if (track.samples.size() < required)
        throw DataError("track '" + track.id + "' is too short for segmentation: requires " +
                        std::to_string(required) + " samples, has " + std::to_string(track.samples.size()));
    std::vector<Segment> segments;
    segments.reserve(spec.count);
    for (std::size_t k = 0; k < spec.count; ++k) {
        const auto begin = track.samples.begin() + static_cast<std::ptrdiff_t>(k * hop);
        segments.push_back({track.id, k, std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(spec.length))});
    }
    return segments;
}

Dataset::Dataset(fs::path root, std::vector<TrackInfo> tracks, std::vector<std::string> warnings)
    : root_(std::move(root)), tracks_(std::move(tracks)), warnings_(std::move(warnings))
{
    std::set<std::string> names;
    for (const auto& t : tracks_) names.insert(t.label);
    genres_.assign(names.begin(), names.end());
}

std::vector<int> Dataset::label_indices() const
{
    std::vector<int> labels;
    labels.reserve(tracks_.size());
    for (const auto& t : tracks_) {
        const auto it = std::lower_bound(genres_.begin(), genres_.end(), t.label);
        labels.push_back(static_cast<int>(it - genres_.begin()));
    }
    return labels;
}

Track Dataset::load(std::size_t i, const DecodeOptions& options) const
{
    const TrackInfo& info = tracks_.at(i);
    Track track = decode_audio(info.path, options);
    track.id = info.id;
    track.label = info.label;
    return track;
}

Dataset load_corpus(const fs::path& root)
{
    if (!fs::is_directory(root)) throw DataError("corpus root '" + root.string() + "' is not a directory");

    std::vector<fs::path> genre_dirs;
    std::vector<std::string> warnings;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) genre_dirs.push_back(entry.path());
        else warnings.push_back("skipping non-directory '" + entry.path().filename().string() + "' at corpus root");
    }
    std::sort(genre_dirs.begin(), genre_dirs.end());

    std::vector<TrackInfo> tracks;
    for (const auto& dir : genre_dirs) {
        const std::string genre = dir.filename().string();
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (!entry.is_regular_file()) continue;
            if (is_audio_extension(entry.path())) files.push_back(entry.path());
            else warnings.push_back("skipping non-audio file '" + genre + "/" + entry.path().filename().string() + "'");
        }
        if (files.empty()) {
            warnings.push_back("genre directory '" + genre + "' contains no audio files");
            continue;
        }
        std::sort(files.begin(), files.end());
        for (auto& f : files)
            tracks.push_back({f, genre + "/" + f.filename().string(), genre});
    }
    std::sort(tracks.begin(), tracks.end(), [](const TrackInfo& a, const TrackInfo& b) { return a.id < b.id; });
    return Dataset(root, std::move(tracks), std::move(warnings));
}

void write_manifest_csv(const Dataset& dataset, std::ostream& out)
{
    out << "id,genre,samples,rate\n";
    for (const auto& t : dataset.tracks()) {
        const AudioInfo info = probe_audio(t.path);
        out << t.id << ',' << t.label << ',' << info.frames << ',' << info.rate << '\n';
    }
}

}  // namespace gmwstn
