#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ovmap/camera.hpp"
#include "ovmap/image.hpp"

namespace ovmap {

namespace fs = std::filesystem;

/// Vertex data of a PLY file. Coordinates come from x/y/z; colors from red/green/blue;
/// every other integer-typed vertex property lands in `int_properties`.
struct PlyVertexData {
  std::vector<Point3> points;
  std::vector<Rgb> colors;
  std::map<std::string, std::vector<std::int64_t>> int_properties;
};

/// Reads the vertex element of a binary little-endian or ASCII PLY file.
PlyVertexData read_ply(const fs::path& path);

/// Writes binary little-endian PLY: float32 x/y/z, optional uint8 red/green/blue, then each
/// integer property as int32 in map order.
void write_ply(const fs::path& path, const PlyVertexData& data);

/// 16-bit (or 8-bit, widened) single-channel PNG.
Grid<std::uint16_t> read_png16(const fs::path& path);
void write_png16(const fs::path& path, const Grid<std::uint16_t>& image);
void write_png_rgb(const fs::path& path, const RgbImage& image);

/// One line "fx fy cx cy width height".
CameraIntrinsics read_intrinsics(const fs::path& path);
void write_intrinsics(const fs::path& path, const CameraIntrinsics& K);

/// 16 whitespace-separated numbers, row-major camera-to-world.
Pose read_pose(const fs::path& path);
void write_pose(const fs::path& path, const Pose& pose);

std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& text);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);
std::string sha256_hex(std::string_view bytes);

}  // namespace ovmap
