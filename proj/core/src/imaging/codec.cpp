#include "upscaler/imaging/codec.hpp"

#include <png.h>
#include <jpeglib.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "upscaler/error.hpp"

namespace upscaler::imaging {

namespace {

std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

ImageBuffer from_rgb8(int width, int height, const std::uint8_t* rgb) {
  std::vector<float> pixels(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = rgb[i] / 255.0f;
  return ImageBuffer(width, height, std::move(pixels));
}

std::vector<std::uint8_t> to_rgb8(const ImageBuffer& img) {
  std::vector<std::uint8_t> rgb(img.sample_count());
  std::transform(img.pixels().begin(), img.pixels().end(), rgb.begin(), to_byte);
  return rgb;
}

bool is_png(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kSig, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    std::string msg = image.message;
    png_image_free(&image);
    throw_error(ErrorCode::decode_error, "png: " + msg);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  png_color background{0, 0, 0};
  if (!png_image_finish_read(&image, &background, buffer.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw_error(ErrorCode::decode_error, "png: " + msg);
  }
  return from_rgb8(static_cast<int>(image.width), static_cast<int>(image.height), buffer.data());
}

struct PngWriteState {
  Bytes* out;
};

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* state = static_cast<PngWriteState*>(png_get_io_ptr(png));
  state->out->insert(state->out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

// libpng error callback: unwind through longjmp, which the writer converts to Error.
void png_error_longjmp(png_structp png, png_const_charp) { png_longjmp(png, 1); }
void png_warning_ignore(png_structp, png_const_charp) {}

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_longjmp(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_silence(j_common_ptr, int) {}

// Decoded into caller-owned storage so nothing with a destructor lives
// between setjmp and a possible longjmp.
bool decode_jpeg_raw(std::span<const std::uint8_t> bytes, std::vector<std::uint8_t>& rgb, int& width,
                     int& height, std::string& error) {
  jpeg_decompress_struct cinfo;
  JpegError jerr;
  cinfo.err = jpeg_std_error(&jerr.mgr);
  jerr.mgr.error_exit = jpeg_error_longjmp;
  jerr.mgr.emit_message = jpeg_silence;
  if (setjmp(jerr.jump)) {
    error = jerr.message;
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  rgb.resize(static_cast<std::size_t>(width) * height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  // libjpeg tolerates a missing EOI by inserting a fake one; treat that as truncation.
  const bool truncated = jerr.mgr.num_warnings > 0;
  jpeg_destroy_decompress(&cinfo);
  if (truncated) {
    error = "premature end of data";
    return false;
  }
  return true;
}

ImageBuffer decode_jpeg(std::span<const std::uint8_t> bytes) {
  std::vector<std::uint8_t> rgb;
  int width = 0;
  int height = 0;
  std::string error;
  if (!decode_jpeg_raw(bytes, rgb, width, height, error)) throw_error(ErrorCode::decode_error, "jpeg: " + error);
  return from_rgb8(width, height, rgb.data());
}

bool encode_png_raw(const std::vector<std::uint8_t>& rgb, int width, int height, Bytes& out) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_longjmp, png_warning_ignore);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  PngWriteState state{&out};
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &state, png_write_to_vector, png_flush_noop);
  png_set_compression_level(png, 3);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(rgb.data() + static_cast<std::size_t>(y) * width * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

bool encode_jpeg_raw(const std::vector<std::uint8_t>& rgb, int width, int height, int quality,
                     unsigned char*& buffer, unsigned long& size, std::string& error) {
  jpeg_compress_struct cinfo;
  JpegError jerr;
  cinfo.err = jpeg_std_error(&jerr.mgr);
  jerr.mgr.error_exit = jpeg_error_longjmp;
  if (setjmp(jerr.jump)) {
    error = jerr.message;
    jpeg_destroy_compress(&cinfo);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = static_cast<JDIMENSION>(width);
  cinfo.image_height = static_cast<JDIMENSION>(height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  // 4:4:4, no chroma subsampling.
  for (int i = 0; i < cinfo.num_components; ++i) {
    cinfo.comp_info[i].h_samp_factor = 1;
    cinfo.comp_info[i].v_samp_factor = 1;
  }
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(rgb.data() + static_cast<std::size_t>(cinfo.next_scanline) * width * 3);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

}  // namespace

ImageBuffer load_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) return decode_png(bytes);
  if (is_jpeg(bytes)) return decode_jpeg(bytes);
  throw_error(ErrorCode::decode_error, "unrecognized image format (expected PNG or JPEG)");
}

Bytes save_png(const ImageBuffer& img) {
  if (img.empty()) throw_error(ErrorCode::invalid_argument, "save_png: empty image");
  const auto rgb = to_rgb8(img);
  Bytes out;
  out.reserve(rgb.size() / 2);
  if (!encode_png_raw(rgb, img.width(), img.height(), out)) throw_error(ErrorCode::io_error, "png encoding failed");
  return out;
}

Bytes save_jpeg(const ImageBuffer& img, int quality) {
  if (img.empty()) throw_error(ErrorCode::invalid_argument, "save_jpeg: empty image");
  if (quality < 1 || quality > 100) throw_error(ErrorCode::invalid_argument, "save_jpeg: quality must be in [1,100]");
  const auto rgb = to_rgb8(img);
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  std::string error;
  const bool ok = encode_jpeg_raw(rgb, img.width(), img.height(), quality, buffer, size, error);
  Bytes out;
  if (ok) out.assign(buffer, buffer + size);
  std::free(buffer);
  if (!ok) throw_error(ErrorCode::io_error, "jpeg encoding failed: " + error);
  return out;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(ErrorCode::io_error, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_error(ErrorCode::io_error, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw_error(ErrorCode::io_error, "short write to " + path.string());
}

ImageBuffer load_image_file(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return load_image(bytes);
}

ImageBuffer quantize_8bit(const ImageBuffer& img) {
  if (img.empty()) return img;
  std::vector<float> pixels(img.sample_count());
  std::transform(img.pixels().begin(), img.pixels().end(), pixels.begin(),
                 [](float v) { return to_byte(v) / 255.0f; });
  return ImageBuffer(img.width(), img.height(), std::move(pixels));
}

}  // namespace upscaler::imaging
