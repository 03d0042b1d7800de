#include "pointnp/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "pointnp/rng.hpp"

namespace pointnp {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

// Hands out lines with comments stripped and 1-based line numbers.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  // next non-blank line after '#' stripping; false at end of input
  bool next(std::string& line, std::size_t& number) {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view raw = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_;
      const std::size_t hash = raw.find('#');
      if (hash != std::string_view::npos) raw = raw.substr(0, hash);
      std::size_t a = 0, b = raw.size();
      while (a < b && std::isspace(static_cast<unsigned char>(raw[a]))) ++a;
      while (b > a && std::isspace(static_cast<unsigned char>(raw[b - 1]))) --b;
      if (a == b) continue;
      line.assign(raw.substr(a, b - a));
      number = line_;
      return true;
    }
    return false;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) tokens.push_back(t);
  return tokens;
}

double parse_double(const std::string& token, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "expected a number, got '" + token + "'");
  }
}

std::uint64_t parse_uint(const std::string& token, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw ParseError(line, "expected a nonnegative integer, got '" + token + "'");
  return v;
}

}  // namespace

TriangleMesh parse_off(std::string_view text) {
  LineReader reader(text);
  std::string line;
  std::size_t ln = 0;

  if (!reader.next(line, ln)) throw ParseError(1, "empty OFF file");
  if (line.rfind("OFF", 0) != 0) throw ParseError(ln, "missing OFF header");

  // counts either fused onto the header line or on the following one
  std::string counts = line.substr(3);
  std::size_t counts_ln = ln;
  if (counts.find_first_not_of(" \t\r") == std::string::npos) {
    if (!reader.next(counts, counts_ln)) throw ParseError(ln, "missing counts line");
  }
  const std::vector<std::string> ct = split_tokens(counts);
  if (ct.size() < 2) throw ParseError(counts_ln, "counts line needs vertex and face counts");
  const std::uint64_t nv = parse_uint(ct[0], counts_ln);
  const std::uint64_t nf = parse_uint(ct[1], counts_ln);
  if (nv == 0) throw ParseError(counts_ln, "OFF file with zero vertices");

  TriangleMesh mesh;
  mesh.vertices.reserve(nv);
  for (std::uint64_t i = 0; i < nv; ++i) {
    if (!reader.next(line, ln)) throw ParseError(ln + 1, "unexpected end of vertex list");
    const std::vector<std::string> t = split_tokens(line);
    if (t.size() < 3) throw ParseError(ln, "vertex line needs 3 coordinates");
    mesh.vertices.push_back({parse_double(t[0], ln), parse_double(t[1], ln),
                             parse_double(t[2], ln)});
  }

  for (std::uint64_t f = 0; f < nf; ++f) {
    if (!reader.next(line, ln)) throw ParseError(ln + 1, "unexpected end of face list");
    const std::vector<std::string> t = split_tokens(line);
    if (t.empty()) throw ParseError(ln, "empty face line");
    const std::uint64_t n = parse_uint(t[0], ln);
    if (n < 3) throw ParseError(ln, "face with fewer than 3 vertices");
    if (t.size() < 1 + n) throw ParseError(ln, "face line lists too few indices");
    std::vector<std::uint32_t> idx(n);
    for (std::uint64_t j = 0; j < n; ++j) {
      const std::uint64_t v = parse_uint(t[1 + j], ln);
      if (v >= nv) throw ParseError(ln, "face index " + std::to_string(v) + " out of range");
      idx[j] = static_cast<std::uint32_t>(v);
    }
    for (std::uint64_t j = 1; j + 1 < n; ++j)  // fan triangulation
      mesh.faces.push_back({idx[0], idx[j], idx[j + 1]});
  }
  return mesh;
}

TriangleMesh load_off(const std::filesystem::path& path) { return parse_off(read_file(path)); }

PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_mesh_surface: n must be >= 1");
  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& [a, b, c] = mesh.faces[f];
    const Vec3 u = mesh.vertices[b] - mesh.vertices[a];
    const Vec3 v = mesh.vertices[c] - mesh.vertices[a];
    const Vec3 cross{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
                     u[0] * v[1] - u[1] * v[0]};
    total += 0.5 * norm(cross);
    cumulative[f] = total;
  }
  if (!(total > 0.0))
    throw std::runtime_error("sample_mesh_surface: mesh has no positive-area face");

  Rng rng(derive_seed(seed, 0x5A3FULL));
  PointCloud cloud;
  cloud.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = rng.uniform() * total;
    const std::size_t f = static_cast<std::size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
    const auto& face = mesh.faces[std::min(f, mesh.faces.size() - 1)];
    double u = rng.uniform();
    double v = rng.uniform();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const Vec3& a = mesh.vertices[face[0]];
    const Vec3& b = mesh.vertices[face[1]];
    const Vec3& c = mesh.vertices[face[2]];
    cloud.points[i] = a + (b - a) * u + (c - a) * v;
  }
  return cloud;
}

PointCloud read_xyz(std::string_view text) {
  LineReader reader(text);
  PointCloud cloud;
  std::string line;
  std::size_t ln = 0;
  while (reader.next(line, ln)) {
    const std::vector<std::string> t = split_tokens(line);
    if (t.size() != 3)
      throw ParseError(ln, "expected 3 coordinates, got " + std::to_string(t.size()));
    cloud.points.push_back({parse_double(t[0], ln), parse_double(t[1], ln),
                            parse_double(t[2], ln)});
  }
  if (cloud.points.empty()) throw ParseError(1, "no points in xyz input");
  return cloud;
}

std::string write_xyz(const PointCloud& cloud) {
  std::string out;
  char buf[96];
  for (const Vec3& p : cloud.points) {
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", p[0], p[1], p[2]);
    out += buf;
  }
  return out;
}

PointCloud load_xyz(const std::filesystem::path& path) {
  try {
    return read_xyz(read_file(path));
  } catch (const ParseError& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void save_xyz(const PointCloud& cloud, const std::filesystem::path& path) {
  write_file(path, write_xyz(cloud));
}

std::vector<double> read_logits(std::string_view text) {
  LineReader reader(text);
  std::vector<double> values;
  std::string line;
  std::size_t ln = 0;
  while (reader.next(line, ln)) {
    const std::vector<std::string> t = split_tokens(line);
    if (t.size() != 1) throw ParseError(ln, "expected one value per line");
    values.push_back(parse_double(t[0], ln));
  }
  if (values.empty()) throw ParseError(1, "no values in logits input");
  return values;
}

std::string write_logits(std::span<const double> values) {
  std::string out;
  char buf[48];
  for (double v : values) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    out += buf;
  }
  return out;
}

std::vector<double> load_logits(const std::filesystem::path& path) {
  try {
    return read_logits(read_file(path));
  } catch (const ParseError& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

class BankCursor {
 public:
  BankCursor(std::string_view data, std::string path)
      : data_(data), path_(std::move(path)) {}

  std::uint32_t u32() {
    need(4, "u32 field");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(data_[pos_ + i]);
    pos_ += 4;
    return v;
  }

  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  void need(std::size_t n, const char* what) {
    if (pos_ + n > data_.size())
      throw std::runtime_error(path_ + ": truncated bank file reading " + what + " (expected " +
                               std::to_string(pos_ + n) + " bytes, have " +
                               std::to_string(data_.size()) + ")");
  }

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string_view data_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::string encode_bank(std::uint32_t kind, std::size_t dim, std::size_t n, std::size_t k,
                        float gamma, const std::vector<float>& feats,
                        const std::vector<std::uint32_t>& labels,
                        const std::vector<std::string>& names) {
  std::string out;
  out.reserve(24 + feats.size() * 4 + labels.size() * 4);
  out += "PNNB";
  put_u32(out, kBankVersion);
  put_u32(out, kind);
  put_u32(out, static_cast<std::uint32_t>(dim));
  put_u32(out, static_cast<std::uint32_t>(n));
  put_u32(out, static_cast<std::uint32_t>(k));
  put_f32(out, gamma);
  for (float v : feats) put_f32(out, v);
  for (std::uint32_t l : labels) put_u32(out, l);
  for (const std::string& name : names) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
  }
  return out;
}

}  // namespace

void save_bank(const MemoryBank& bank, const std::filesystem::path& path) {
  write_file(path, encode_bank(0, bank.dim, bank.size(), bank.num_classes, bank.gamma,
                               bank.feat_mem, bank.labels, bank.class_names));
}

void save_bank(const PartBank& bank, const std::filesystem::path& path) {
  write_file(path, encode_bank(1, bank.dim, bank.rows(), bank.num_parts, bank.gamma,
                               bank.part_feats, bank.part_labels, bank.part_names));
}

std::variant<MemoryBank, PartBank> load_bank(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  BankCursor cur(data, path.string());

  if (cur.bytes(4, "magic") != "PNNB")
    throw std::runtime_error(path.string() + ": bad magic (not a PNNB bank file)");
  const std::uint32_t version = cur.u32();
  if (version > kBankVersion)
    throw std::runtime_error(path.string() + ": unsupported bank version " +
                             std::to_string(version));
  const std::uint32_t kind = cur.u32();
  if (kind > 1)
    throw std::runtime_error(path.string() + ": unknown bank kind " + std::to_string(kind));
  const std::uint32_t dim = cur.u32();
  const std::uint32_t n = cur.u32();
  const std::uint32_t k = cur.u32();
  const float gamma = cur.f32();
  if (dim == 0 || n == 0 || k == 0)
    throw std::runtime_error(path.string() + ": empty bank dimensions");

  cur.need(static_cast<std::size_t>(dim) * n * 4, "feature matrix");
  std::vector<float> feats(static_cast<std::size_t>(dim) * n);
  for (float& v : feats) v = cur.f32();
  std::vector<std::uint32_t> labels(n);
  for (std::uint32_t& l : labels) {
    l = cur.u32();
    if (l >= k) throw std::runtime_error(path.string() + ": label out of range in bank");
  }
  std::vector<std::string> names(k);
  for (std::string& name : names) {
    const std::uint32_t len = cur.u32();
    name = cur.bytes(len, "class name");
  }

  if (kind == 0) {
    MemoryBank bank;
    bank.dim = dim;
    bank.num_classes = k;
    bank.gamma = gamma;
    bank.feat_mem = std::move(feats);
    bank.labels = std::move(labels);
    bank.class_names = std::move(names);
    return bank;
  }
  PartBank bank;
  bank.dim = dim;
  bank.num_parts = k;
  bank.gamma = gamma;
  bank.part_feats = std::move(feats);
  bank.part_labels = std::move(labels);
  bank.part_names = std::move(names);
  return bank;
}

namespace {

std::string sample_file_name(const std::string& cls, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%05zu.xyz", index);
  return cls + buf;
}

std::vector<std::string> read_name_list(const std::filesystem::path& file) {
  std::vector<std::string> names;
  if (!std::filesystem::exists(file)) return names;
  const std::string text = read_file(file);
  LineReader reader(text);
  std::string line;
  std::size_t ln = 0;
  while (reader.next(line, ln)) names.push_back(line);
  return names;
}

}  // namespace

void save_dataset_dir(const LabeledDataset& dataset, const std::filesystem::path& dir) {
  dataset.validate();
  std::filesystem::create_directories(dir);
  std::string labels_txt;
  std::vector<std::size_t> per_class_counter(dataset.num_classes(), 0);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const std::uint32_t cls = dataset.labels[i];
    const std::string name =
        sample_file_name(dataset.class_names[cls], per_class_counter[cls]++);
    save_xyz(dataset.clouds[i], dir / name);
    labels_txt += name + " " + std::to_string(cls) + "\n";
  }
  write_file(dir / "labels.txt", labels_txt);
  std::string classes_txt;
  for (const std::string& name : dataset.class_names) classes_txt += name + "\n";
  write_file(dir / "classes.txt", classes_txt);
}

LabeledDataset load_dataset_dir(const std::filesystem::path& dir) {
  const std::filesystem::path labels_file = dir / "labels.txt";
  if (!std::filesystem::exists(labels_file))
    throw std::runtime_error("no labels.txt in " + dir.string());

  LabeledDataset ds;
  const std::string labels_text = read_file(labels_file);
  LineReader reader(labels_text);
  std::string line;
  std::size_t ln = 0;
  std::uint32_t max_label = 0;
  std::vector<std::string> files;
  while (reader.next(line, ln)) {
    const std::vector<std::string> t = split_tokens(line);
    if (t.size() != 2) throw ParseError(ln, "labels.txt expects 'filename classindex'");
    files.push_back(t[0]);
    const std::uint32_t label = static_cast<std::uint32_t>(parse_uint(t[1], ln));
    ds.labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  if (files.empty()) throw std::runtime_error("empty labels.txt in " + dir.string());

  ds.class_names = read_name_list(dir / "classes.txt");
  if (ds.class_names.size() < static_cast<std::size_t>(max_label) + 1) {
    ds.class_names.clear();
    for (std::uint32_t c = 0; c <= max_label; ++c)
      ds.class_names.push_back("class_" + std::to_string(c));
  }

  ds.clouds.resize(files.size());
  const std::int64_t n = static_cast<std::int64_t>(files.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      ds.clouds[static_cast<std::size_t>(i)] = load_xyz(dir / files[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return ds;
}

void save_seg_dataset_dir(const SegDataset& dataset, const std::filesystem::path& dir) {
  if (dataset.clouds.size() != dataset.point_labels.size() ||
      dataset.clouds.size() != dataset.categories.size())
    throw std::invalid_argument("save_seg_dataset_dir: inconsistent sizes");
  std::filesystem::create_directories(dir);

  std::string labels_txt;
  std::vector<std::size_t> counter(dataset.category_names.size(), 0);
  for (std::size_t i = 0; i < dataset.clouds.size(); ++i) {
    const std::uint32_t cat = dataset.categories[i];
    const std::string stem = dataset.category_names.at(cat) + "_" + std::to_string(counter[cat]++);
    save_xyz(dataset.clouds[i], dir / (stem + ".xyz"));
    std::string seg;
    for (std::uint32_t l : dataset.point_labels[i]) seg += std::to_string(l) + "\n";
    write_file(dir / (stem + ".seg"), seg);
    labels_txt += stem + ".xyz " + std::to_string(cat) + "\n";
  }
  write_file(dir / "labels.txt", labels_txt);

  std::string classes_txt;
  for (const std::string& name : dataset.category_names) classes_txt += name + "\n";
  write_file(dir / "classes.txt", classes_txt);
  std::string parts_txt;
  for (const std::string& name : dataset.part_names) parts_txt += name + "\n";
  write_file(dir / "parts.txt", parts_txt);
}

SegDataset load_seg_dataset_dir(const std::filesystem::path& dir) {
  SegDataset ds;
  ds.part_names = read_name_list(dir / "parts.txt");
  if (ds.part_names.empty()) throw std::runtime_error("no parts.txt in " + dir.string());
  ds.category_names = read_name_list(dir / "classes.txt");

  const std::string labels_text = read_file(dir / "labels.txt");
  LineReader reader(labels_text);
  std::string line;
  std::size_t ln = 0;
  while (reader.next(line, ln)) {
    const std::vector<std::string> t = split_tokens(line);
    if (t.size() != 2) throw ParseError(ln, "labels.txt expects 'filename categoryindex'");
    ds.clouds.push_back(load_xyz(dir / t[0]));
    ds.categories.push_back(static_cast<std::uint32_t>(parse_uint(t[1], ln)));

    std::filesystem::path seg_path = dir / t[0];
    seg_path.replace_extension(".seg");
    std::vector<std::uint32_t> labels;
    const std::string seg_text = read_file(seg_path);
    LineReader seg_reader(seg_text);
    std::string seg_line;
    std::size_t seg_ln = 0;
    while (seg_reader.next(seg_line, seg_ln)) {
      const std::vector<std::string> st = split_tokens(seg_line);
      if (st.size() != 1) throw ParseError(seg_ln, "seg file expects one part index per line");
      const std::uint64_t l = parse_uint(st[0], seg_ln);
      if (l >= ds.part_names.size()) throw ParseError(seg_ln, "part index out of range");
      labels.push_back(static_cast<std::uint32_t>(l));
    }
    if (labels.size() != ds.clouds.back().size())
      throw std::runtime_error(seg_path.string() + ": label count does not match point count");
    ds.point_labels.push_back(std::move(labels));
  }
  if (ds.clouds.empty()) throw std::runtime_error("empty labels.txt in " + dir.string());
  return ds;
}

}  // namespace pointnp
