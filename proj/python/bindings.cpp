#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "acqbench/annotations_io.hpp"
#include "acqbench/bench.hpp"
#include "acqbench/codec.hpp"
#include "acqbench/error.hpp"
#include "acqbench/eval.hpp"
#include "acqbench/pipeline_config.hpp"
#include "acqbench/transforms.hpp"

namespace py = pybind11;
using namespace acqbench;

namespace {

// Planar (channels, height, width) uint8 copy of the samples.
py::array_t<std::uint8_t> to_array(const ImageBuffer& img) {
  py::array_t<std::uint8_t> out({img.channels(), img.height(), img.width()});
  std::copy(img.samples().begin(), img.samples().end(), out.mutable_data());
  return out;
}

ImageBuffer from_array(py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> a,
                       const std::string& model, int bit_depth) {
  if (a.ndim() != 3) throw InvalidArgument("expected a (channels, height, width) array");
  std::vector<std::uint8_t> s(a.data(), a.data() + a.size());
  return ImageBuffer::checked(static_cast<int>(a.shape(2)), static_cast<int>(a.shape(1)),
                              static_cast<int>(a.shape(0)), bit_depth, parse_color_model(model),
                              std::move(s));
}

BoundingBox to_box(const std::array<double, 4>& xywh) { return {xywh[0], xywh[1], xywh[2], xywh[3], 0, {}}; }

}  // namespace

PYBIND11_MODULE(_acqbench, m) {
  m.doc() = "Bindings for the acqbench C++ library";

  static py::exception<DataError> data_error(m, "DataError", PyExc_RuntimeError);
  static py::exception<DecodeError> decode_error(m, "DecodeError", data_error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const DecodeError& e) {
      decode_error(e.what());
    } catch (const DataError& e) {
      data_error(e.what());
    }
  });

  py::class_<ImageBuffer>(m, "Image")
      .def(py::init(&from_array), py::arg("samples"), py::arg("color_model") = "rgb",
           py::arg("bit_depth") = 8)
      .def_property_readonly("width", &ImageBuffer::width)
      .def_property_readonly("height", &ImageBuffer::height)
      .def_property_readonly("channels", &ImageBuffer::channels)
      .def_property_readonly("bit_depth", &ImageBuffer::bit_depth)
      .def_property_readonly("color_model",
                             [](const ImageBuffer& b) { return std::string(to_string(b.color_model())); })
      .def("to_numpy", &to_array)
      .def("__eq__", [](const ImageBuffer& a, const ImageBuffer& b) { return a == b; })
      .def("__repr__", [](const ImageBuffer& b) {
        return "<Image " + std::to_string(b.width()) + "x" + std::to_string(b.height()) + " " +
               std::string(to_string(b.color_model())) + " " + std::to_string(b.bit_depth()) + "-bit>";
      });

  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_static("parse", [](const std::string& text) { return parse_pipeline_config(text); })
      .def_readwrite("quant_bits", &PipelineConfig::quant_bits)
      .def_readwrite("jpeg_quality", &PipelineConfig::jpeg_quality)
      .def_readwrite("max_side", &PipelineConfig::max_side)
      .def_readwrite("scale_factor", &PipelineConfig::scale_factor)
      .def_readwrite("distortion_k1", &PipelineConfig::distortion_k1)
      .def_property(
          "color_model", [](const PipelineConfig& c) { return std::string(to_string(c.color_model)); },
          [](PipelineConfig& c, const std::string& v) { c.color_model = parse_color_model(v); })
      .def("validate", &PipelineConfig::validate)
      .def("to_text", [](const PipelineConfig& c) { return to_config_text(c); })
      .def("__eq__", [](const PipelineConfig& a, const PipelineConfig& b) { return a == b; });

  m.def("config_id", &config_id);
  m.def("load_image", [](const std::filesystem::path& p) { return load_image(p); });
  m.def("apply_config", &apply_config, py::arg("image"), py::arg("config"));
  m.def(
      "encode",
      [](const ImageBuffer& img, const PipelineConfig& cfg) {
        const auto blob = encode_for_config(img, cfg);
        return py::bytes(reinterpret_cast<const char*>(blob.bytes.data()), blob.bytes.size());
      },
      py::arg("image"), py::arg("config"));
  m.def(
      "decode",
      [](py::bytes data, std::optional<std::string> tag) {
        const std::string s = data;
        std::optional<ColorModel> model;
        if (tag) model = parse_color_model(*tag);
        return decode_image(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()), model);
      },
      py::arg("data"), py::arg("color_model") = py::none());
  m.def("qraw_payload_size", &qraw_payload_size, py::arg("width"), py::arg("height"), py::arg("channels"),
        py::arg("bits"));
  m.def(
      "iou", [](const std::array<double, 4>& a, const std::array<double, 4>& b) { return iou(to_box(a), to_box(b)); },
      py::arg("a"), py::arg("b"), "IoU of two [x, y, w, h] boxes");
  m.def(
      "evaluate_files",
      [](const std::filesystem::path& gt_path, const std::filesystem::path& det_path, double threshold) {
        const auto gt = load_annotations(gt_path);
        const auto det = load_detections(det_path, gt);
        const auto r = evaluate(gt, det, {threshold, false});
        py::dict out;
        out["map50"] = r.map50;
        out["per_class_ap"] = r.per_class_ap;
        return out;
      },
      py::arg("gt"), py::arg("det"), py::arg("iou_threshold") = kIouThreshold);
  m.def("format_delta", &format_delta);
}
