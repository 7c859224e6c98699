/*
 * Copyright 2026 The rfcnn Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <string>

#include "rfcnn/archspec.hpp"
#include "rfcnn/checkpoint.hpp"
#include "rfcnn/dsp.hpp"
#include "rfcnn/experiment.hpp"
#include "rfcnn/model.hpp"
#include "rfcnn/rfcalc.hpp"
#include "rfcnn/synthdata.hpp"
#include "rfcnn/tensor_io.hpp"
#include "rfcnn/train.hpp"

namespace py = pybind11;
using namespace rfcnn;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

nn::Tensor<float> to_tensor(const FloatArray& a) {
  if (a.ndim() != 4) throw py::value_error("expected a 4-d array [batch, channel, freq, time]");
  const nn::Shape s{static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                    static_cast<std::size_t>(a.shape(2)), static_cast<std::size_t>(a.shape(3))};
  return nn::Tensor<float>(s, std::vector<float>(a.data(), a.data() + a.size()));
}

template <class T>
py::array_t<T> to_array(const nn::Tensor<T>& t) {
  py::array_t<T> out({t.batch(), t.channels(), t.freq(), t.time()});
  std::memcpy(out.mutable_data(), t.data(), t.size() * sizeof(T));
  return out;
}

arch::NetworkSpec spec_of(int rho, const std::string& variant, int classes, int width,
                          int in_channels) {
  return arch::make_network(arch::Rho(rho), arch::parse_variant(variant), classes, width,
                            in_channels);
}

class PyNetwork {
 public:
  PyNetwork(model::Network<float> net) : net_(std::move(net)) {}

  py::array_t<float> forward(const FloatArray& x) { return to_array(net_.forward(to_tensor(x))); }
  py::array_t<float> predict_proba(const FloatArray& x) {
    return to_array(net_.predict_proba(to_tensor(x)));
  }
  void set_training(bool on) { net_.set_mode(on ? nn::Mode::Train : nn::Mode::Eval); }
  bool training() const { return net_.mode() == nn::Mode::Train; }
  std::size_t parameter_count() const { return net_.parameter_count(); }
  std::vector<std::string> parameter_names() {
    std::vector<std::string> out;
    for (const auto& p : net_.parameters()) out.push_back(p.name);
    return out;
  }
  std::string spec_text() const { return arch::serialize_spec(net_.spec()); }
  void save(const std::string& path) { model::save_checkpoint(path, net_); }

 private:
  model::Network<float> net_;
};

}  // namespace

PYBIND11_MODULE(rfcnn, m) {
  m.doc() = "Receptive-field regularized CNNs for acoustic scene classification";
  m.attr("__version__") = std::string(exp::kVersion.substr(exp::kVersion.find(' ') + 1));

  py::register_exception<arch::SpecError>(m, "SpecError", PyExc_ValueError);
  py::register_exception<dsp::DspError>(m, "DspError", PyExc_ValueError);
  py::register_exception<io::IoError>(m, "IoError", PyExc_IOError);

  // architecture and receptive field
  m.def("rho_to_kernels", [](int rho) {
    const auto k = arch::rho_to_kernels(arch::Rho(rho));
    return std::vector<int>(k.begin(), k.end());
  }, py::arg("rho"));
  m.def("arch_table", [](int rho, const std::string& variant, int classes, int width, int in_ch) {
    return arch::format_table(spec_of(rho, variant, classes, width, in_ch));
  }, py::arg("rho"), py::arg("variant") = "plain", py::arg("classes") = 10,
     py::arg("width") = 128, py::arg("in_channels") = 2);
  m.def("max_rf", [](int rho, const std::string& variant) {
    const auto r = rf::max_rf(spec_of(rho, variant, 10, 128, 2));
    return py::make_tuple(r.f, r.t);
  }, py::arg("rho"), py::arg("variant") = "plain");
  m.def("published_max_rf", [] {
    return std::vector<long>(rf::kPublishedMaxRf.begin(), rf::kPublishedMaxRf.end());
  });
  m.def("check_table2", [] {
    const auto r = exp::check_table2();
    return py::make_tuple(r.ok(), r.mismatched);
  }, "Returns (ok, mismatched rho values).");

  // signal processing
  m.def("a_weighting_db", &dsp::a_weighting_db, py::arg("hz"));
  m.def("hz_to_mel", &dsp::hz_to_mel, py::arg("hz"));
  m.def("mel_to_hz", &dsp::mel_to_hz, py::arg("mel"));
  m.def("mel_filterbank", [](std::size_t n_mels, std::size_t n_bins, double sr) {
    const auto fb = dsp::mel_filterbank(n_mels, n_bins, sr);
    py::array_t<double> out({fb.n_mels, fb.n_bins});
    std::memcpy(out.mutable_data(), fb.weights.data(), fb.weights.size() * sizeof(double));
    return out;
  }, py::arg("n_mels"), py::arg("n_bins"), py::arg("sample_rate"));
  m.def("spectrogram", [](const DoubleArray& audio, int sample_rate, std::size_t mels,
                          std::size_t hop, bool stereo) {
    if (audio.ndim() != 2) throw py::value_error("expected audio shaped [channels, samples]");
    dsp::AudioClip clip;
    clip.sample_rate = sample_rate;
    const auto n = static_cast<std::size_t>(audio.shape(1));
    for (py::ssize_t c = 0; c < audio.shape(0); ++c) {
      clip.samples.emplace_back(audio.data(c, 0), audio.data(c, 0) + n);
    }
    dsp::PipelineConfig cfg;
    cfg.n_mels = mels;
    cfg.hop = hop;
    cfg.stereo = stereo;
    return to_array(dsp::audio_to_spectrogram(clip, cfg).values);
  }, py::arg("audio"), py::arg("sample_rate"), py::arg("mels") = 256, py::arg("hop") = 1536,
     py::arg("stereo") = true);
  m.def("load_wav", [](const std::string& path) {
    const auto clip = dsp::load_wav(path);
    py::array_t<double> out({clip.channels(), clip.length()});
    for (std::size_t c = 0; c < clip.channels(); ++c) {
      std::memcpy(out.mutable_data(static_cast<py::ssize_t>(c), 0), clip.samples[c].data(),
                  clip.length() * sizeof(double));
    }
    return py::make_tuple(out, clip.sample_rate);
  }, py::arg("path"));

  // training recipe
  m.def("lr_at", [](int epoch, int total) { return train::Schedule::scaled(total).lr_at(epoch); },
        py::arg("epoch"), py::arg("total_epochs") = 350);

  // synthetic data
  m.def("synth", [](const std::string& task, int classes, std::size_t n, int mels, int frames,
                    int pattern, int margin, int spacing, std::uint64_t seed) {
    synth::SynthTask t;
    t.kind = synth::parse_task_kind(task);
    t.num_classes = classes;
    t.mel_bins = mels;
    t.frames = frames;
    t.pattern_size = pattern;
    t.margin = margin;
    t.band_spacing = spacing;
    t.seed = seed;
    const auto clips = synth::generate(t, n);
    const auto ds = data::stack(clips, classes);
    return py::make_tuple(to_array(ds.x), ds.labels);
  }, py::arg("task") = "freq-position", py::arg("classes") = 2, py::arg("n") = 16,
     py::arg("mels") = 64, py::arg("frames") = 64, py::arg("pattern") = 8,
     py::arg("margin") = 16, py::arg("spacing") = 24, py::arg("seed") = 0);

  // networks
  py::class_<PyNetwork>(m, "Network")
      .def(py::init([](int rho, const std::string& variant, int classes, int width,
                       int in_channels, std::uint64_t seed) {
             return PyNetwork(model::Network<float>::init(
                 spec_of(rho, variant, classes, width, in_channels), seed));
           }),
           py::arg("rho"), py::arg("variant") = "plain", py::arg("classes") = 10,
           py::arg("width") = 128, py::arg("in_channels") = 2, py::arg("seed") = 0)
      .def_static("load", [](const std::string& path) {
        return PyNetwork(model::load_checkpoint<float>(path).net);
      }, py::arg("path"))
      .def("forward", &PyNetwork::forward, py::arg("x"))
      .def("predict_proba", &PyNetwork::predict_proba, py::arg("x"))
      .def_property("training", &PyNetwork::training, &PyNetwork::set_training)
      .def_property_readonly("parameter_count", &PyNetwork::parameter_count)
      .def("parameter_names", &PyNetwork::parameter_names)
      .def("spec", &PyNetwork::spec_text)
      .def("save", &PyNetwork::save, py::arg("path"));
}
