#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gmwstn/audio_io.hpp"
#include "gmwstn/classify.hpp"
#include "gmwstn/error.hpp"
#include "gmwstn/filters.hpp"
#include "gmwstn/glmnet.hpp"
#include "gmwstn/scattering.hpp"

namespace py = pybind11;
using namespace gmwstn;

namespace {

py::array_t<double> to_array(std::span<const double> v, std::vector<std::size_t> shape)
{
    py::array_t<double> out(shape);
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

ScatteringConfig make_config(const std::string& family, double beta, double gamma, bool prune)
{
    auto cfg = ScatteringConfig::defaults(parse_family(family));
    cfg.gmw = GmwParams(beta, gamma);
    cfg.prune_increasing = prune;
    cfg.validate();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Scattering transform with generalized Morse wavelets";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());

    m.def(
        "gmw_spectrum",
        [](double omega, double beta, double gamma) { return gmw_spectrum(GmwParams(beta, gamma), omega); },
        py::arg("omega"), py::arg("beta") = 4.0, py::arg("gamma") = 2.0);
    m.def(
        "peak_frequency", [](double beta, double gamma) { return peak_frequency(GmwParams(beta, gamma)); },
        py::arg("beta") = 4.0, py::arg("gamma") = 2.0);
    m.def("morlet_center_for_quality", &morlet_center_for_quality, py::arg("quality"));

    m.def(
        "filter_bank",
        [](const std::string& family, std::size_t length, double quality, int j_max, double beta, double gamma) {
            const auto bank = build_filter_bank(parse_family(family), length, quality, j_max, GmwParams(beta, gamma));
            py::array_t<double> out({bank.num_scales(), length});
            for (std::size_t j = 0; j < bank.num_scales(); ++j) {
                const auto row = bank.filter(j);
                std::copy(row.begin(), row.end(), out.mutable_data(static_cast<py::ssize_t>(j)));
            }
            return out;
        },
        py::arg("family") = "gmw", py::arg("length"), py::arg("quality"), py::arg("j_max"), py::arg("beta") = 4.0,
        py::arg("gamma") = 2.0, "Frequency-domain filters, one row per scale.");

    py::class_<ScatteringNetwork>(m, "ScatteringNetwork")
        .def(py::init([](std::size_t length, const std::string& family, double beta, double gamma, bool prune) {
                 return ScatteringNetwork(make_config(family, beta, gamma, prune), length);
             }),
             py::arg("length") = kSegmentLength, py::arg("family") = "gmw", py::arg("beta") = 4.0,
             py::arg("gamma") = 2.0, py::arg("prune_increasing") = false)
        .def_property_readonly("input_len", &ScatteringNetwork::input_len)
        .def_property_readonly("shapes", &ScatteringNetwork::output_shapes)
        .def(
            "scatter",
            [](const ScatteringNetwork& net, py::array_t<double, py::array::c_style | py::array::forcecast> x) {
                if (x.ndim() != 1) throw ConfigError("signal must be one-dimensional");
                ScatteringOutput out;
                {
                    py::gil_scoped_release release;
                    out = net.scatter(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
                }
                py::list layers;
                layers.append(to_array(out.layer0, {out.layer0.size()}));
                for (const auto& t : out.layers) layers.append(to_array(t.data, t.shape));
                return layers;
            },
            py::arg("signal"), "S_0..S_M as arrays; layer m has axes (time, j_m, ..., j_1).");

    m.def(
        "decode_audio",
        [](const std::filesystem::path& path, bool resample, bool downmix) {
            DecodeOptions opt;
            opt.resample = resample;
            opt.downmix = downmix;
            const auto track = decode_audio(path, opt);
            return py::make_tuple(to_array(track.samples, {track.samples.size()}), track.rate);
        },
        py::arg("path"), py::arg("resample") = false, py::arg("downmix") = false);
    m.def(
        "write_wav",
        [](const std::filesystem::path& path, py::array_t<double, py::array::c_style | py::array::forcecast> x, int rate) {
            write_wav(path, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), rate);
        },
        py::arg("path"), py::arg("samples"), py::arg("rate") = kCorpusRate);

    m.def(
        "stratified_folds",
        [](const std::vector<int>& labels, int num_classes, std::size_t folds, std::uint64_t seed) {
            return stratified_folds(labels, num_classes, folds, seed);
        },
        py::arg("labels"), py::arg("num_classes"), py::arg("folds") = 3, py::arg("seed") = 0);
    m.def("soft_threshold", &soft_threshold, py::arg("z"), py::arg("gamma"));

    m.attr("SEGMENT_LENGTH") = kSegmentLength;
    m.attr("CORPUS_RATE") = kCorpusRate;
}
