#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "palette_forge/conditioning.hpp"
#include "palette_forge/error.hpp"
#include "palette_forge/histogram.hpp"
#include "palette_forge/image.hpp"
#include "palette_forge/palette.hpp"
#include "palette_forge/transport.hpp"
#include "palette_forge/version.hpp"

namespace py = pybind11;
using namespace palette_forge;

namespace {

// Copies an 8-bit RGB buffer of width*height*3 bytes into an Image.
Image image_from_buffer(const py::buffer& buffer, int width, int height) {
  const py::buffer_info info = buffer.request();
  if (info.itemsize != 1) throw py::value_error("pixel buffer must hold 8-bit channels");
  if (width <= 0 || height <= 0) throw py::value_error("width and height must be positive");
  const auto expected = static_cast<py::ssize_t>(width) * height * 3;
  if (info.size != expected) {
    throw py::value_error("pixel buffer has " + std::to_string(info.size) + " bytes, expected " + std::to_string(expected));
  }
  // Non-contiguous views (e.g. sliced arrays) are rejected rather than silently gathered.
  if (info.ndim > 1) {
    py::ssize_t stride = 1;
    for (py::ssize_t d = info.ndim - 1; d >= 0; --d) {
      if (info.strides[d] != stride) throw py::value_error("pixel buffer must be C-contiguous");
      stride *= info.shape[d];
    }
  }
  Image img(width, height);
  const auto* src = static_cast<const std::uint8_t*>(info.ptr);
  std::copy(src, src + expected, img.rgb.begin());
  return img;
}

Palette palette_from_hex(const std::vector<std::string>& colors) {
  Palette p;
  for (const auto& c : colors) p.colors.push_back(parse_hex(c));
  p.validate();
  return p;
}

py::bytes to_bytes(const std::vector<std::uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

std::vector<std::uint8_t> from_bytes(const py::bytes& b) {
  const std::string s = b;
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

py::array_t<double> masses_view(const py::object& self) {
  const auto& h = self.cast<const HsvHistogram&>();
  py::array_t<double> view({static_cast<py::ssize_t>(h.size())}, {static_cast<py::ssize_t>(sizeof(double))},
                           h.mass().data(), self);
  py::detail::array_proxy(view.ptr())->flags &= ~py::detail::npy_api::NPY_ARRAY_WRITEABLE_;
  return view;
}

}  // namespace

PYBIND11_MODULE(_palette_forge, m) {
  m.doc() = "Color histograms, palettes, transport distances and condition records.";
  m.attr("__version__") = kVersion;
  m.attr("HISTOGRAM_FORMAT_VERSION") = kHistogramFormatVersion;
  m.attr("CONDITION_FORMAT_VERSION") = kConditionFormatVersion;

  // Translators run newest first, so the base class is registered before its subclasses.
  const auto base = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<HsvHistogram>(m, "Histogram")
      .def_property_readonly("masses", &masses_view, "Read-only view of the dense bin masses")
      .def_property_readonly("dims",
                             [](const HsvHistogram& h) {
                               return py::make_tuple(h.dims().h, h.dims().s, h.dims().v);
                             })
      .def("__len__", &HsvHistogram::size)
      .def("to_phst", [](const HsvHistogram& h) { return to_bytes(encode_phst(h)); })
      .def_static("from_phst", [](const py::bytes& b) { return normalize(decode_phst(from_bytes(b))); },
                  "Decodes PHST bytes and renormalizes the float32 masses")
      .def("__eq__", [](const HsvHistogram& a, const HsvHistogram& b) { return a == b; });

  m.def(
      "histogram_of_image",
      [](const py::buffer& pixels, int width, int height) {
        const Image img = image_from_buffer(pixels, width, height);
        py::gil_scoped_release release;
        return histogram_of_image(img, kDefaultDims, 1);
      },
      py::arg("pixels"), py::arg("width"), py::arg("height"));

  m.def(
      "emd",
      [](const HsvHistogram& p, const HsvHistogram& q, double threshold, double gamma) {
        py::gil_scoped_release release;
        return emd(p, q, GroundDistance(DistanceParams{threshold, gamma})).cost;
      },
      py::arg("p"), py::arg("q"), py::arg("threshold") = 20.0, py::arg("gamma") = 1.0);

  m.def(
      "quadratic_chi",
      [](const HsvHistogram& p, const HsvHistogram& q, double threshold, double gamma, double exponent) {
        py::gil_scoped_release release;
        return quadratic_chi(p, q, SimilarityMatrix(GroundDistance(DistanceParams{threshold, gamma})), exponent);
      },
      py::arg("p"), py::arg("q"), py::arg("threshold") = 20.0, py::arg("gamma") = 1.0, py::arg("m") = 0.5);

  m.def("entropy", [](const HsvHistogram& h) { return entropy(h); }, py::arg("h"));

  m.def(
      "extract_palette",
      [](const py::buffer& pixels, int width, int height, int k) {
        const Image img = image_from_buffer(pixels, width, height);
        std::vector<std::string> out;
        for (const auto& c : extract_median_cut(img.pixels(), k).colors) out.push_back(to_hex(c));
        return out;
      },
      py::arg("pixels"), py::arg("width"), py::arg("height"), py::arg("k") = kMaxExtractedColors);

  m.def(
      "encode_condition",
      [](const HsvHistogram& image_hist, const std::string& aug, const std::optional<std::vector<std::string>>& palette,
         bool text_present, bool drop_entropy, double threshold, double gamma, double exponent) {
        std::optional<Palette> p;
        if (palette) p = palette_from_hex(*palette);
        const ConditionParams params{DistanceParams{threshold, gamma}, exponent};
        const GroundDistance ground(params.distance);
        return to_bytes(serialize_condition(
            build_condition(image_hist, p, parse_augmentation(aug), ground, params, text_present, drop_entropy)));
      },
      py::arg("image_hist"), py::arg("aug"), py::arg("palette") = py::none(), py::arg("text_present") = true,
      py::arg("drop_entropy") = false, py::arg("threshold") = 20.0, py::arg("gamma") = 1.0, py::arg("m") = 0.5,
      "PCND bytes for one training example");

  m.def(
      "decode_condition",
      [](const py::bytes& data) {
        const auto rec = deserialize_condition(from_bytes(data));
        py::dict d;
        d["aug"] = std::string(to_string(rec.aug_type));
        d["text_present"] = rec.text_present;
        d["distance"] = rec.distance;
        d["entropy"] = rec.entropy;
        d["histogram"] = rec.histogram;
        return d;
      },
      py::arg("data"));
}
