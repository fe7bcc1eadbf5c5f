#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace gmwstn {

inline constexpr int kCorpusRate = 22050;
inline constexpr std::size_t kSegmentLength = 110250;  // 5 s at 22050 Hz
inline constexpr std::size_t kSegmentsPerTrack = 15;

struct Track {
    std::vector<double> samples;  // mono, in [-1, 1]
    int rate = 0;
    std::string label;
    std::string id;
};

struct AudioInfo {
    int rate = 0;
    int channels = 0;
    std::size_t frames = 0;
};

struct DecodeOptions {
    int target_rate = kCorpusRate;
    /// Accept rates that are an integer multiple of target_rate and decimate.
    bool resample = false;
    /// Average multi-channel input to mono instead of rejecting it.
    bool downmix = false;
};

/// Reads the header only.
AudioInfo probe_audio(const std::filesystem::path& path);

/// Decodes PCM WAV (8/16/24/32-bit integer, 32-bit float) or Sun AU (µ-law,
/// 8/16/24/32-bit linear PCM). Throws DataError naming the file on failure.
Track decode_audio(const std::filesystem::path& path, const DecodeOptions& options = {});

/// Writes mono 16-bit PCM WAV. Samples are clipped to [-1, 1].
void write_wav(const std::filesystem::path& path, std::span<const double> samples, int rate);

struct SegmentSpec {
    std::size_t length = kSegmentLength;
    std::size_t count = kSegmentsPerTrack;
    /// Defaults to length / 3 when zero.
    std::size_t hop = 0;

    std::size_t effective_hop() const noexcept { return hop == 0 ? length / 3 : hop; }
    std::size_t required_samples() const noexcept { return (count - 1) * effective_hop() + length; }
};

struct Segment {
    std::string track_id;
    std::size_t index = 0;
    std::vector<double> samples;
};

/// Segment k covers samples [k·hop, k·hop + length − 1] (0-based).
std::vector<Segment> segment_track(const Track& track, const SegmentSpec& spec = {});

struct TrackInfo {
    std::filesystem::path path;
    std::string id;  // path relative to the corpus root, '/'-separated
    std::string label;
};

/// A corpus laid out as root/<genre>/<track files>. Track ordering is
/// lexicographic by relative path; decoding is deferred to load().
class Dataset {
public:
    Dataset() = default;
    Dataset(std::filesystem::path root, std::vector<TrackInfo> tracks, std::vector<std::string> warnings);

    const std::filesystem::path& root() const noexcept { return root_; }
    const std::vector<TrackInfo>& tracks() const noexcept { return tracks_; }
    std::size_t size() const noexcept { return tracks_.size(); }
    bool empty() const noexcept { return tracks_.empty(); }
    /// Sorted genre names; label index i refers to genres()[i].
    const std::vector<std::string>& genres() const noexcept { return genres_; }
    std::vector<int> label_indices() const;
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    Track load(std::size_t i, const DecodeOptions& options = {}) const;

private:
    std::filesystem::path root_;
    std::vector<TrackInfo> tracks_;
    std::vector<std::string> genres_;
    std::vector<std::string> warnings_;
};

Dataset load_corpus(const std::filesystem::path& root);

/// CSV with columns id,genre,samples,rate (header values, no full decode).
void write_manifest_csv(const Dataset& dataset, std::ostream& out);

}  // namespace gmwstn
