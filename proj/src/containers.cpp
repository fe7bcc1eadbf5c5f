#include "gmwstn/containers.hpp"

#include <ostream>
#include <string>

#include "gmwstn/binary_io.hpp"
#include "gmwstn/error.hpp"

namespace gmwstn {

void save_filter_bank(const FilterBank& bank, const std::filesystem::path& path)
{
    io::Writer w(path);
    w.magic("GMWB", kFilterBankVersion);
    w.u8(static_cast<std::uint8_t>(bank.family()));
    w.f64(static_cast<double>(bank.signal_len()));
    w.f64(bank.quality());
    w.f64(static_cast<double>(bank.j_max()));
    w.f64(bank.spec().gmw.beta());
    w.f64(bank.spec().gmw.gamma());
    for (std::size_t j = 0; j < bank.num_scales(); ++j) w.f64s(bank.filter(j));
    w.f64s(bank.lowpass());
    w.close();
}

StoredFilterBank load_filter_bank(const std::filesystem::path& path)
{
    io::Reader r(path);
    const auto version = r.magic("GMWB");
    if (version != kFilterBankVersion)
        throw DataError("'" + path.string() + "': unsupported GMWB version " + std::to_string(version));
    StoredFilterBank bank;
    const auto family = r.u8();
    if (family > 1) throw DataError("'" + path.string() + "': unknown wavelet family code");
    bank.family = static_cast<WaveletFamily>(family);
    bank.signal_len = static_cast<std::size_t>(r.f64());
    bank.quality = r.f64();
    bank.j_max = static_cast<int>(r.f64());
    bank.beta = r.f64();
    bank.gamma = r.f64();
    if (bank.signal_len < 2 || bank.j_max < 0) throw DataError("'" + path.string() + "': corrupt header");
    for (int j = 0; j <= bank.j_max; ++j) bank.filters.push_back(r.f64s(bank.signal_len));
    bank.lowpass = r.f64s(bank.signal_len);
    return bank;
}

void write_filter_bank_csv(const FilterBank& bank, std::ostream& out)
{
    out.precision(17);
    out << "kind,j,lambda,peak_rad_per_sample";
    for (std::size_t k = 0; k < bank.signal_len(); ++k) out << ",bin_" << k;
    out << '\n';
    auto row = [&](std::span<const double> values) {
        for (double v : values) out << ',' << v;
        out << '\n';
    };
    for (std::size_t j = 0; j < bank.num_scales(); ++j) {
        out << to_string(bank.family()) << ',' << j << ',' << bank.lambdas()[j] << ',' << bank.peak_frequency(j);
        row(bank.filter(j));
    }
    out << "lowpass,,,";
    row(bank.lowpass());
}

void save_scattering(const ScatteringOutput& out, const std::filesystem::path& path)
{
    io::Writer w(path);
    w.magic("STNC", kScatteringVersion);
    const auto& cfg = out.config;
    w.u8(static_cast<std::uint8_t>(cfg.family));
    w.f64(cfg.gmw.beta());
    w.f64(cfg.gmw.gamma());
    w.f64(cfg.peak_fraction);
    w.u64(out.input_len);
    w.u32(static_cast<std::uint32_t>(cfg.average_subsample0));
    w.u8(static_cast<std::uint8_t>(cfg.prune_increasing ? 1 : 0));
    w.u8(static_cast<std::uint8_t>(cfg.layers.size()));
    for (const auto& l : cfg.layers) {
        w.f64(l.quality);
        w.u32(static_cast<std::uint32_t>(l.j_max));
        w.u32(static_cast<std::uint32_t>(l.subsample));
        w.u32(static_cast<std::uint32_t>(l.average_subsample));
    }
    w.u64(out.layer0.size());
    w.f64s(out.layer0);
    for (const auto& t : out.layers) {
        w.u8(static_cast<std::uint8_t>(t.shape.size()));
        for (auto d : t.shape) w.u64(d);
        w.f64s(t.data);
    }
    w.close();
}

ScatteringOutput load_scattering(const std::filesystem::path& path)
{
    io::Reader r(path);
    const auto version = r.magic("STNC");
    if (version != kScatteringVersion)
        throw DataError("'" + path.string() + "': unsupported STNC version " + std::to_string(version));
    ScatteringOutput out;
    auto& cfg = out.config;
    const auto family = r.u8();
    if (family > 1) throw DataError("'" + path.string() + "': unknown wavelet family code");
    cfg.family = static_cast<WaveletFamily>(family);
    const double beta = r.f64();
    const double gamma = r.f64();
    cfg.gmw = GmwParams(beta, gamma);
    cfg.peak_fraction = r.f64();
    out.input_len = r.u64();
    cfg.average_subsample0 = r.u32();
    cfg.prune_increasing = r.u8() != 0;
    const auto layers = r.u8();
    for (unsigned m = 0; m < layers; ++m) {
        LayerConfig l;
        l.quality = r.f64();
        l.j_max = static_cast<int>(r.u32());
        l.subsample = r.u32();
        l.average_subsample = r.u32();
        cfg.layers.push_back(l);
    }
    out.layer0 = r.f64s(r.u64());
    for (unsigned m = 0; m < layers; ++m) {
        Tensor t;
        const auto rank = r.u8();
        std::size_t count = 1;
        for (unsigned i = 0; i < rank; ++i) {
            t.shape.push_back(r.u64());
            count *= t.shape.back();
        }
        t.data = r.f64s(count);
        out.layers.push_back(std::move(t));
    }
    return out;
}

void write_scattering_csv(const ScatteringOutput& out, std::ostream& os)
{
    os.precision(17);
    os << "layer,path,t,value\n";
    for (std::size_t t = 0; t < out.layer0.size(); ++t) os << "0,," << t << ',' << out.layer0[t] << '\n';
    for (std::size_t m = 0; m < out.layers.size(); ++m) {
        const Tensor& tensor = out.layers[m];
        const std::size_t t_len = tensor.shape.front();
        const std::size_t paths = t_len == 0 ? 0 : tensor.size() / t_len;
        for (std::size_t p = 0; p < paths; ++p) {
            // decompose the flat path index into (j_m, ..., j_1)
            std::string name;
            std::size_t rem = p;
            std::size_t stride = paths;
            for (std::size_t axis = 1; axis < tensor.shape.size(); ++axis) {
                stride /= tensor.shape[axis];
                if (!name.empty()) name += '-';
                name += std::to_string(rem / stride);
                rem %= stride;
            }
            for (std::size_t t = 0; t < t_len; ++t)
                os << m + 1 << ',' << name << ',' << t << ',' << tensor.data[t * paths + p] << '\n';
        }
    }
}

}  // namespace gmwstn
