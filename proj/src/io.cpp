#include "ovmap/io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <openssl/evp.h>
#include <png.h>

#include "ovmap/errors.hpp"

namespace ovmap {

static_assert(std::endian::native == std::endian::little,
              "binary readers assume a little-endian host");

// ----------------------------------------------------------------------------- PLY

namespace {

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

PlyType parse_ply_type(const std::string& name, const fs::path& path) {
  if (name == "char" || name == "int8") return PlyType::Int8;
  if (name == "uchar" || name == "uint8") return PlyType::UInt8;
  if (name == "short" || name == "int16") return PlyType::Int16;
  if (name == "ushort" || name == "uint16") return PlyType::UInt16;
  if (name == "int" || name == "int32") return PlyType::Int32;
  if (name == "uint" || name == "uint32") return PlyType::UInt32;
  if (name == "float" || name == "float32") return PlyType::Float32;
  if (name == "double" || name == "float64") return PlyType::Float64;
  throw DataError(path.string() + ": unknown PLY type '" + name + "'");
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::Int8:
    case PlyType::UInt8: return 1;
    case PlyType::Int16:
    case PlyType::UInt16: return 2;
    case PlyType::Int32:
    case PlyType::UInt32:
    case PlyType::Float32: return 4;
    case PlyType::Float64: return 8;
  }
  return 0;
}

bool is_integral(PlyType t) { return t != PlyType::Float32 && t != PlyType::Float64; }

double decode(PlyType t, const unsigned char* p) {
  switch (t) {
    case PlyType::Int8: { std::int8_t v; std::memcpy(&v, p, 1); return v; }
    case PlyType::UInt8: return p[0];
    case PlyType::Int16: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
    case PlyType::UInt16: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
    case PlyType::Int32: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
    case PlyType::UInt32: { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
    case PlyType::Float32: { float v; std::memcpy(&v, p, 4); return v; }
    case PlyType::Float64: { double v; std::memcpy(&v, p, 8); return v; }
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::Float32;
  bool is_list = false;
  PlyType count_type = PlyType::UInt8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

struct VertexSink {
  PlyVertexData& out;
  const PlyElement& element;
  std::vector<int> role;  // 0..2 xyz, 3..5 rgb, 6 int property, -1 ignored

  VertexSink(PlyVertexData& o, const PlyElement& e, const fs::path& path) : out(o), element(e) {
    bool has_xyz[3] = {false, false, false};
    int rgb = 0;
    for (const auto& p : e.properties) {
      int r = -1;
      if (p.is_list) {
        r = -1;
      } else if (p.name == "x" || p.name == "y" || p.name == "z") {
        r = p.name[0] - 'x';
        has_xyz[r] = true;
      } else if (p.name == "red" || p.name == "green" || p.name == "blue") {
        r = 3 + (p.name == "green" ? 1 : p.name == "blue" ? 2 : 0);
        ++rgb;
      } else if (is_integral(p.type)) {
        r = 6;
        out.int_properties[p.name].reserve(e.count);
      }
      role.push_back(r);
    }
    if (!(has_xyz[0] && has_xyz[1] && has_xyz[2])) {
      throw DataError(path.string() + ": vertex element lacks x/y/z");
    }
    out.points.resize(e.count);
    if (rgb == 3) out.colors.resize(e.count);
  }

  void set(std::size_t row, std::size_t prop, double value) {
    switch (role[prop]) {
      case 0: case 1: case 2: out.points[row][role[prop]] = value; break;
      case 3: if (!out.colors.empty()) out.colors[row].r = static_cast<std::uint8_t>(value); break;
      case 4: if (!out.colors.empty()) out.colors[row].g = static_cast<std::uint8_t>(value); break;
      case 5: if (!out.colors.empty()) out.colors[row].b = static_cast<std::uint8_t>(value); break;
      case 6: out.int_properties[element.properties[prop].name].push_back(
                  static_cast<std::int64_t>(value));
              break;
      default: break;
    }
  }
};

}  // namespace

PlyVertexData read_ply(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open");

  std::string line;
  std::getline(in, line);
  if (line.rfind("ply", 0) != 0) throw DataError(path.string() + ": not a PLY file");

  std::string format;
  std::vector<PlyElement> elements;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      ls >> format;
    } else if (word == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(std::move(e));
    } else if (word == "property") {
      if (elements.empty()) throw DataError(path.string() + ": property before element");
      PlyProperty p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string ct, it;
        ls >> ct >> it >> p.name;
        p.is_list = true;
        p.count_type = parse_ply_type(ct, path);
        p.type = parse_ply_type(it, path);
      } else {
        p.type = parse_ply_type(type, path);
        ls >> p.name;
      }
      elements.back().properties.push_back(std::move(p));
    } else if (word == "end_header") {
      break;
    }
  }
  if (format != "binary_little_endian" && format != "ascii") {
    throw DataError(path.string() + ": unsupported PLY format '" + format + "'");
  }
  const bool ascii = format == "ascii";

  PlyVertexData out;
  bool found_vertex = false;
  for (const auto& e : elements) {
    const bool is_vertex = e.name == "vertex";
    std::unique_ptr<VertexSink> sink;
    if (is_vertex) {
      sink = std::make_unique<VertexSink>(out, e, path);
      found_vertex = true;
    }
    bool fixed = true;
    std::size_t stride = 0;
    for (const auto& p : e.properties) {
      if (p.is_list) fixed = false;
      stride += ply_size(p.type);
    }
    if (ascii) {
      for (std::size_t row = 0; row < e.count; ++row) {
        for (std::size_t pi = 0; pi < e.properties.size(); ++pi) {
          const auto& p = e.properties[pi];
          double v = 0.0;
          if (!(in >> v)) throw DataError(path.string() + ": truncated ASCII body");
          if (p.is_list) {
            for (std::size_t j = 0; j < static_cast<std::size_t>(v); ++j) {
              double skip;
              in >> skip;
            }
          } else if (sink) {
            sink->set(row, pi, v);
          }
        }
      }
    } else if (fixed) {
      std::vector<unsigned char> buf(stride * e.count);
      if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
        throw DataError(path.string() + ": truncated binary body");
      }
      if (sink) {
        for (std::size_t row = 0; row < e.count; ++row) {
          const unsigned char* p = buf.data() + row * stride;
          for (std::size_t pi = 0; pi < e.properties.size(); ++pi) {
            sink->set(row, pi, decode(e.properties[pi].type, p));
            p += ply_size(e.properties[pi].type);
          }
        }
      }
    } else {
      unsigned char tmp[8];
      for (std::size_t row = 0; row < e.count; ++row) {
        for (std::size_t pi = 0; pi < e.properties.size(); ++pi) {
          const auto& p = e.properties[pi];
          if (p.is_list) {
            if (!in.read(reinterpret_cast<char*>(tmp), static_cast<std::streamsize>(ply_size(p.count_type)))) {
              throw DataError(path.string() + ": truncated binary body");
            }
            const auto n = static_cast<std::size_t>(decode(p.count_type, tmp));
            in.seekg(static_cast<std::streamoff>(n * ply_size(p.type)), std::ios::cur);
          } else {
            if (!in.read(reinterpret_cast<char*>(tmp), static_cast<std::streamsize>(ply_size(p.type)))) {
              throw DataError(path.string() + ": truncated binary body");
            }
            if (sink) sink->set(row, pi, decode(p.type, tmp));
          }
        }
      }
    }
    if (is_vertex) break;
  }
  if (!found_vertex) throw DataError(path.string() + ": no vertex element");
  for (const auto& [name, values] : out.int_properties) {
    if (values.size() != out.points.size()) {
      throw DataError(path.string() + ": property '" + name + "' has wrong length");
    }
  }
  return out;
}

void write_ply(const fs::path& path, const PlyVertexData& data) {
  const std::size_t n = data.points.size();
  if (!data.colors.empty() && data.colors.size() != n) {
    throw InvariantError("write_ply: color count mismatch");
  }
  for (const auto& [name, values] : data.int_properties) {
    if (values.size() != n) throw InvariantError("write_ply: property '" + name + "' length");
  }
  std::ostringstream header;
  header << "ply\nformat binary_little_endian 1.0\nelement vertex " << n << "\n"
         << "property float x\nproperty float y\nproperty float z\n";
  if (!data.colors.empty()) {
    header << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  }
  for (const auto& [name, values] : data.int_properties) header << "property int " << name << "\n";
  header << "end_header\n";

  const std::size_t stride =
      12 + (data.colors.empty() ? 0 : 3) + 4 * data.int_properties.size();
  std::string body(stride * n, '\0');
  char* p = body.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (int d = 0; d < 3; ++d) {
      const auto f = static_cast<float>(data.points[i][d]);
      std::memcpy(p, &f, 4);
      p += 4;
    }
    if (!data.colors.empty()) {
      *p++ = static_cast<char>(data.colors[i].r);
      *p++ = static_cast<char>(data.colors[i].g);
      *p++ = static_cast<char>(data.colors[i].b);
    }
    for (const auto& [name, values] : data.int_properties) {
      const auto v = static_cast<std::int32_t>(values[i]);
      std::memcpy(p, &v, 4);
      p += 4;
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << header.str();
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw DataError(path.string() + ": write failed");
}

// ----------------------------------------------------------------------------- PNG

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

void write_png_rows(const fs::path& path, int width, int height, int bit_depth, int color_type,
                    const std::vector<png_bytep>& rows) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw DataError(path.string() + ": cannot open for writing");
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw DataError(path.string() + ": libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError(path.string() + ": PNG write failed: " + error);
  }
  png_init_io(png, fp.get());
  png_set_compression_level(png, 3);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // PNG is big-endian on disk
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

Grid<std::uint16_t> read_png16(const fs::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw DataError(path.string() + ": cannot open");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw DataError(path.string() + ": not a PNG file");
  }
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError(path.string() + ": libpng initialisation failed");
  }
  Grid<std::uint16_t> image;
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> narrow;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError(path.string() + ": corrupt PNG: " + error);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const auto width = static_cast<int>(png_get_image_width(png, info));
  const auto height = static_cast<int>(png_get_image_height(png, info));
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (color_type != PNG_COLOR_TYPE_GRAY || (bit_depth != 16 && bit_depth != 8)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError(path.string() + ": expected an 8- or 16-bit grayscale PNG");
  }
  image = Grid<std::uint16_t>(width, height);
  rows.resize(static_cast<std::size_t>(height));
  if (bit_depth == 16) {
    png_set_swap(png);
    for (int v = 0; v < height; ++v) rows[static_cast<std::size_t>(v)] = reinterpret_cast<png_bytep>(&image(0, v));
  } else {
    narrow.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    for (int v = 0; v < height; ++v) {
      rows[static_cast<std::size_t>(v)] = narrow.data() + static_cast<std::size_t>(v) * static_cast<std::size_t>(width);
    }
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  if (bit_depth == 8) {
    auto px = image.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = narrow[i];
  }
  return image;
}

void write_png16(const fs::path& path, const Grid<std::uint16_t>& image) {
  Grid<std::uint16_t> copy = image;  // libpng wants mutable rows
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  for (int v = 0; v < image.height(); ++v) {
    rows[static_cast<std::size_t>(v)] = reinterpret_cast<png_bytep>(&copy(0, v));
  }
  write_png_rows(path, image.width(), image.height(), 16, PNG_COLOR_TYPE_GRAY, rows);
}

void write_png_rgb(const fs::path& path, const RgbImage& image) {
  static_assert(sizeof(Rgb) == 3);
  RgbImage copy = image;
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  for (int v = 0; v < image.height(); ++v) {
    rows[static_cast<std::size_t>(v)] = reinterpret_cast<png_bytep>(&copy(0, v));
  }
  write_png_rows(path, image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB, rows);
}

// ----------------------------------------------------------------------------- text formats

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw DataError(path.string() + ": write failed");
}

CameraIntrinsics read_intrinsics(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  CameraIntrinsics K;
  if (!(in >> K.fx >> K.fy >> K.cx >> K.cy >> K.width >> K.height)) {
    throw DataError(path.string() + ": expected 'fx fy cx cy width height'");
  }
  try {
    K.validate();
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return K;
}

void write_intrinsics(const fs::path& path, const CameraIntrinsics& K) {
  std::ostringstream os;
  os << std::setprecision(17) << K.fx << ' ' << K.fy << ' ' << K.cx << ' ' << K.cy << ' '
     << K.width << ' ' << K.height << '\n';
  write_text_file(path, os.str());
}

Pose read_pose(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::array<double, 16> v{};
  for (auto& x : v) {
    if (!(in >> x)) throw DataError(path.string() + ": expected 16 numbers");
  }
  try {
    return Pose::from_row_major(v);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_pose(const fs::path& path, const Pose& pose) {
  std::ostringstream os;
  os << std::setprecision(17);
  const auto v = pose.row_major();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) os << v[static_cast<std::size_t>(r * 4 + c)] << (c == 3 ? '\n' : ' ');
  }
  write_text_file(path, os.str());
}

// ----------------------------------------------------------------------------- hashing

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw InvariantError("sha256: digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_text_file(path)); }

}  // namespace ovmap
