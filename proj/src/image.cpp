#include "palette_forge/image.hpp"

#include <png.h>

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>

// jpeglib.h needs FILE and size_t declared first.
#include <jpeglib.h>

#include "palette_forge/error.hpp"
#include "palette_forge/parallel.hpp"

namespace palette_forge {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open '" + path + "'");
  return f;
}

Image read_png(const std::string& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw FormatError("cannot decode PNG '" + path + "': " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  Image out(static_cast<int>(img.width), static_cast<int>(img.height));
  if (!png_image_finish_read(&img, nullptr, out.rgb.data(), 0, nullptr)) {
    const std::string message = img.message;
    png_image_free(&img);
    throw FormatError("cannot decode PNG '" + path + "': " + message);
  }
  return out;
}

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// No C++ objects with destructors may live in this frame across setjmp.
bool decode_jpeg(std::FILE* file, Image* out, char* message) {
  jpeg_decompress_struct cinfo;
  JpegError err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    std::strncpy(message, err.message, JMSG_LENGTH_MAX);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out->width = static_cast<int>(cinfo.output_width);
  out->height = static_cast<int>(cinfo.output_height);
  out->rgb.resize(static_cast<std::size_t>(out->width) * out->height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out->rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * out->width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

Image read_jpeg(const std::string& path) {
  auto file = open_file(path, "rb");
  Image out;
  char message[JMSG_LENGTH_MAX] = {};
  if (!decode_jpeg(file.get(), &out, message)) {
    throw FormatError("cannot decode JPEG '" + path + "': " + message);
  }
  return out;
}

}  // namespace

Image::Image(int w, int h) : width(w), height(h) {
  if (w < 0 || h < 0) throw Error("image dimensions must be non-negative");
  rgb.assign(pixel_count() * 3, 0);
}

Image::Image(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) : Image(w, h) {
  for (std::size_t i = 0; i < pixel_count(); ++i) {
    rgb[3 * i] = r;
    rgb[3 * i + 1] = g;
    rgb[3 * i + 2] = b;
  }
}

ColorRgb Image::pixel(int x, int y) const {
  const std::size_t at = (static_cast<std::size_t>(y) * width + x) * 3;
  return rgb_from_u8(rgb[at], rgb[at + 1], rgb[at + 2]);
}

void Image::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const std::size_t at = (static_cast<std::size_t>(y) * width + x) * 3;
  rgb[at] = r;
  rgb[at + 1] = g;
  rgb[at + 2] = b;
}

std::vector<ColorRgb> Image::pixels() const {
  std::vector<ColorRgb> out;
  out.reserve(pixel_count());
  for (std::size_t i = 0; i < pixel_count(); ++i) out.push_back(rgb_from_u8(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]));
  return out;
}

HsvHistogram histogram_of_image(const Image& image, const HistogramDims& dims, unsigned threads) {
  const std::size_t n = image.pixel_count();
  const std::size_t workers = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n / 65536, 1));
  std::vector<BinCounter> partial(workers, BinCounter(dims));
  parallel_chunks(n, static_cast<unsigned>(workers), [&](std::size_t begin, std::size_t end, std::size_t w) {
    for (std::size_t i = begin; i < end; ++i) {
      partial[w].add_u8(image.rgb[3 * i], image.rgb[3 * i + 1], image.rgb[3 * i + 2]);
    }
  });
  for (std::size_t w = 1; w < partial.size(); ++w) partial[0].merge(partial[w]);
  return partial[0].to_histogram();
}

Image read_image(const std::string& path) {
  unsigned char signature[8] = {};
  {
    auto file = open_file(path, "rb");
    if (std::fread(signature, 1, sizeof signature, file.get()) < 3) {
      throw FormatError("'" + path + "' is too short to be an image");
    }
  }
  if (png_sig_cmp(signature, 0, 8) == 0) return read_png(path);
  if (signature[0] == 0xFF && signature[1] == 0xD8 && signature[2] == 0xFF) return read_jpeg(path);
  throw FormatError("'" + path + "' is neither PNG nor JPEG");
}

void write_png(const std::string& path, const Image& image) {
  if (image.empty()) throw Error("cannot write an empty image");
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, image.rgb.data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path + "': " + img.message);
  }
}

}  // namespace palette_forge
