// rdu/python/bindings.cc

// Copyright 2026  The rdu Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Python bindings: numpy in and out, rdu errors mapped to rdu.*Error.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <iostream>
#include <ostream>

#include "rdu/audio/manifest.h"
#include "rdu/audio/wav.h"
#include "rdu/augment/augment.h"
#include "rdu/denoiser/ctc.h"
#include "rdu/metrics/metrics.h"
#include "rdu/pipeline/config.h"
#include "rdu/pipeline/pipeline.h"
#include "rdu/quantizer/kmeans.h"
#include "rdu/ssl/pseudo_ssl.h"
#include "rdu/ssl/sslf.h"
#include "rdu/util/error.h"

namespace py = pybind11;
using namespace rdu;
using tensor::Tensor;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

Tensor matrix_from(const Array& a, const char* what) {
  if (a.ndim() != 2) throw ShapeError(std::string(what) + ": expected a 2-D array");
  const auto r = static_cast<std::size_t>(a.shape(0)), c = static_cast<std::size_t>(a.shape(1));
  return Tensor({r, c}, std::vector<double>(a.data(), a.data() + r * c));
}

audio::Waveform wave_from(const Array& a, int rate) {
  if (a.ndim() != 1) throw ShapeError("waveform: expected a 1-D array");
  return {std::vector<double>(a.data(), a.data() + a.shape(0)), rate};
}

Array samples_of(const audio::Waveform& w) {
  Array out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(w.size())});
  std::copy(w.samples.begin(), w.samples.end(), out.mutable_data());
  return out;
}

py::list layers_of(const ssl::LayerStackFeatures& f) {
  py::list out;
  for (const auto& l : f.layers) out.append(to_numpy(l));
  return out;
}

ssl::LayerStackFeatures features_from(const std::vector<Array>& layers, double hop_ms) {
  ssl::LayerStackFeatures f;
  f.frame_hop_ms = hop_ms;
  for (const auto& l : layers) f.layers.push_back(matrix_from(l, "layers"));
  f.validate();
  return f;
}

std::string condition_label(const audio::Condition& c) {
  switch (c.type) {
    case audio::AugType::kClean: return "clean";
    case audio::AugType::kReverb: return "reverb";
    case audio::AugType::kNoise: return "noise:" + c.source_tag;
  }
  return "clean";
}

}  // namespace

PYBIND11_MODULE(_rdu, m) {
  m.doc() = "Discrete speech unit denoising toolkit";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", error.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<StaleInputError>(m, "StaleInputError", error.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", error.ptr());

  m.attr("SAMPLE_RATE") = audio::kSampleRate;

  // audio
  m.def("read_wav", [](const std::string& path) { return samples_of(audio::read_wav(path)); }, py::arg("path"),
        "16 kHz mono PCM16 file as float64 samples in [-1, 1).");
  m.def("write_wav",
        [](const Array& samples, const std::string& path) {
          audio::write_wav(wave_from(samples, audio::kSampleRate), path);
        },
        py::arg("samples"), py::arg("path"));
  m.def("read_manifest", [](const std::string& path) {
    py::list out;
    for (const auto& e : audio::read_manifest(path)) {
      py::dict d;
      d["id"] = e.id;
      d["wav"] = audio::resolve_path(path, e.wav_path);
      d["condition"] = condition_label(e.condition);
      if (e.condition.type == audio::AugType::kNoise) d["snr_db"] = e.condition.snr_db;
      if (e.aug) d["source"] = e.aug->source_utt_id;
      out.append(d);
    }
    return out;
  }, py::arg("path"));

  // augment
  m.def("mix_at_snr",
        [](const Array& clean, const Array& noise, double snr_db, std::uint64_t seed) {
          Rng rng(seed);
          auto r = augment::mix_at_snr(wave_from(clean, audio::kSampleRate), wave_from(noise, audio::kSampleRate),
                                       snr_db, rng);
          return py::make_tuple(samples_of(r.mixture), r.gain, r.rescaled);
        },
        py::arg("clean"), py::arg("noise"), py::arg("snr_db"), py::arg("seed") = 0,
        "Returns (mixture, gain, rescaled).");
  m.def("measure_snr",
        [](const Array& mixture, const Array& clean) {
          return augment::measure_snr(wave_from(mixture, audio::kSampleRate), wave_from(clean, audio::kSampleRate));
        },
        py::arg("mixture"), py::arg("clean"));
  m.def("convolve_rir",
        [](const Array& clean, const Array& ir) {
          augment::ImpulseResponse h{std::vector<double>(ir.data(), ir.data() + ir.size()), audio::kSampleRate, "py"};
          return samples_of(augment::convolve_rir(wave_from(clean, audio::kSampleRate), h));
        },
        py::arg("clean"), py::arg("ir"));

  // pseudo_ssl
  py::class_<ssl::PseudoEncoder>(m, "PseudoEncoder")
      .def(py::init([](int num_layers, int dim, int n_mels, std::uint64_t seed) {
             ssl::PseudoEncoderConfig c;
             c.num_layers = num_layers;
             c.dim = dim;
             c.n_mels = n_mels;
             c.seed = seed;
             c.validate();
             return ssl::PseudoEncoder(c);
           }),
           py::arg("num_layers") = 6, py::arg("dim") = 64, py::arg("n_mels") = 40, py::arg("seed") = 1)
      .def("extract", [](const ssl::PseudoEncoder& e, const Array& w) { return layers_of(e.extract(wave_from(w, audio::kSampleRate))); },
           py::arg("samples"), "Layer states 0..L, each frames x dim.");
  m.def("load_features", [](const std::string& path) { return layers_of(ssl::load_features(path)); },
        py::arg("path"));
  m.def("dump_features",
        [](const std::vector<Array>& layers, const std::string& path, double hop_ms) {
          ssl::dump_features(features_from(layers, hop_ms), path);
        },
        py::arg("layers"), py::arg("path"), py::arg("frame_hop_ms") = 20.0);

  // quantizer
  m.def("train_kmeans",
        [](const Array& x, int k, std::uint64_t seed, int restarts, int max_iters) {
          quant::KmeansOptions o;
          o.k = k;
          o.seed = seed;
          o.restarts = restarts;
          o.max_iters = max_iters;
          auto cb = quant::train_kmeans(matrix_from(x, "train_kmeans"), o);
          return py::make_tuple(to_numpy(cb.centroids), cb.meta.inertia_trace);
        },
        py::arg("features"), py::arg("k"), py::arg("seed") = 0, py::arg("restarts") = 1, py::arg("max_iters") = 100,
        "Returns (centroids, inertia_trace).");
  m.def("assign",
        [](const Array& x, const Array& centroids) {
          quant::Codebook cb;
          cb.centroids = matrix_from(centroids, "assign");
          return quant::assign(matrix_from(x, "assign"), cb).units;
        },
        py::arg("features"), py::arg("centroids"));
  m.def("deduplicate", py::overload_cast<const std::vector<int>&>(&quant::deduplicate), py::arg("units"));
  m.def("read_units", [](const std::string& path) {
    py::dict out;
    for (const auto& s : quant::read_units(path)) out[py::str(s.utt_id)] = s.units;
    return out;
  }, py::arg("path"));

  // denoiser
  m.def("ctc_nll",
        [](const Array& log_probs, const std::vector<int>& target, int blank) {
          return denoiser::ctc_nll(matrix_from(log_probs, "ctc_nll"), target, blank);
        },
        py::arg("log_probs"), py::arg("target"), py::arg("blank"));

  // metrics
  m.def("edit_distance",
        [](const std::vector<int>& hyp, const std::vector<int>& ref) {
          auto c = metrics::edit_distance(hyp, ref);
          return py::dict(py::arg("substitutions") = c.substitutions, py::arg("deletions") = c.deletions,
                          py::arg("insertions") = c.insertions, py::arg("ref_length") = c.ref_length);
        },
        py::arg("hyp"), py::arg("ref"));
  m.def("uer", &metrics::uer, py::arg("hyp"), py::arg("ref"),
        "Unit error rate in percent after deduplicating both sides.");
  m.def("binomial_std", &metrics::binomial_std, py::arg("p"), py::arg("n"), py::arg("conservative") = true);

  // pipeline
  m.def("parse_config", [](const std::string& text) { return pipeline::format_config(pipeline::parse_config(text)); },
        py::arg("text"), "Validates config text and returns it with every key expanded.");
  m.def("stage_names", &pipeline::stage_names);
  py::class_<pipeline::Pipeline>(m, "Pipeline")
      .def(py::init([](const std::string& config_path, const std::string& workdir, bool verbose) {
             static std::ostream discard(nullptr);
             return new pipeline::Pipeline(pipeline::load_config(config_path), workdir,
                                           verbose ? std::cerr : discard);
           }),
           py::arg("config"), py::arg("workdir"), py::arg("verbose") = false)
      .def("run_stage", &pipeline::Pipeline::run_stage, py::arg("name"),
           py::call_guard<py::gil_scoped_release>())
      .def("run_all", &pipeline::Pipeline::run_all, py::call_guard<py::gil_scoped_release>())
      .def("ablate", &pipeline::Pipeline::ablate, py::arg("variants"), py::call_guard<py::gil_scoped_release>())
      .def("set_force", &pipeline::Pipeline::set_force, py::arg("force"))
      .def("path", &pipeline::Pipeline::path, py::arg("relative"))
      .def("eval_summary", [](const pipeline::Pipeline& p) {
        auto s = pipeline::read_eval_summary(p.path("eval/summary.json"));
        return py::make_tuple(s.raw, s.denoised);
      }, "Returns (raw, denoised) bucket UER dicts.");
}
