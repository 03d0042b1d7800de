#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pointnp/dataset.hpp"
#include "pointnp/memory.hpp"
#include "pointnp/segmentation.hpp"
#include "pointnp/types.hpp"

namespace pointnp {

/// Parse failure with the 1-based input line recorded in the message.
struct ParseError : std::runtime_error {
  explicit ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_number(line) {}
  std::size_t line_number;
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
};

/// OFF reader. Accepts the malformed variant where the counts are fused onto
/// the header line ("OFF490 770 0"); skips comments and blank lines;
/// fan-triangulates polygon faces. Throws ParseError with a line number.
TriangleMesh parse_off(std::string_view text);
TriangleMesh load_off(const std::filesystem::path& path);

/// n surface points by area-weighted triangle choice and uniform barycentric
/// coordinates; deterministic by seed; zero-area faces draw no samples.
/// Throws when the mesh has no positive-area face.
PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

/// Whitespace-separated coordinate triples, one point per line, '#' comments.
PointCloud read_xyz(std::string_view text);
/// One "x y z" line per point at 9 significant digits.
std::string write_xyz(const PointCloud& cloud);
PointCloud load_xyz(const std::filesystem::path& path);
void save_xyz(const PointCloud& cloud, const std::filesystem::path& path);

/// One float per line.
std::vector<double> read_logits(std::string_view text);
std::string write_logits(std::span<const double> values);
std::vector<double> load_logits(const std::filesystem::path& path);

// Binary bank container ("PNNB"): magic, version, kind (0 classification,
// 1 part), then C, N, K, gamma, the float32 feature rows, the u32 labels and
// K length-prefixed UTF-8 class names. Everything little-endian; the
// round trip is bit-exact.
inline constexpr std::uint32_t kBankVersion = 1;

void save_bank(const MemoryBank& bank, const std::filesystem::path& path);
void save_bank(const PartBank& bank, const std::filesystem::path& path);
std::variant<MemoryBank, PartBank> load_bank(const std::filesystem::path& path);

// Dataset directories: one .xyz per sample, labels.txt with one
// "filename classindex" line per sample and an optional classes.txt carrying
// one class name per line. Segmentation directories additionally hold a .seg
// file per sample (one part index per line, aligned with the .xyz) and
// parts.txt naming every part as "category/part".
void save_dataset_dir(const LabeledDataset& dataset, const std::filesystem::path& dir);
LabeledDataset load_dataset_dir(const std::filesystem::path& dir);

void save_seg_dataset_dir(const SegDataset& dataset, const std::filesystem::path& dir);
SegDataset load_seg_dataset_dir(const std::filesystem::path& dir);

}  // namespace pointnp
