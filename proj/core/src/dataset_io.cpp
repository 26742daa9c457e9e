#include "slrbm/dataset_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

#include "slrbm/rng.hpp"

namespace slrbm {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;
constexpr char kCheckpointMagic[8] = {'S', 'L', 'R', 'B', 'M', 'C', 'K', '1'};

// Reads a whole file; gzip streams are inflated, anything else passes
// through unchanged (gzread falls back to raw bytes).
std::vector<std::uint8_t> read_file(const std::string& path) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::uint8_t> data;
  std::uint8_t chunk[1 << 16];
  int got = 0;
  while ((got = gzread(file, chunk, sizeof(chunk))) > 0)
    data.insert(data.end(), chunk, chunk + got);
  const bool bad = got < 0;
  gzclose(file);
  if (bad) throw std::runtime_error("cannot read file: " + path);
  return data;
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& data) : data_(data) {}

  std::uint32_t read_be32() {
    if (pos_ + 4 > data_.size()) throw std::runtime_error("unexpected end of file");
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) value = (value << 8) | data_[pos_++];
    return value;
  }

  const std::uint8_t* take(std::size_t count) {
    if (pos_ + count > data_.size()) throw std::runtime_error("unexpected end of file");
    const std::uint8_t* out = data_.data() + pos_;
    pos_ += count;
    return out;
  }

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& data_;
  std::size_t pos_ = 0;
};

void write_le32(std::ofstream& out, std::uint32_t value) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

void write_le64(std::ofstream& out, std::uint64_t value) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

void write_double(std::ofstream& out, double value) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &value, sizeof(bits));
  write_le64(out, bits);
}

class BinaryReader {
 public:
  explicit BinaryReader(std::ifstream& in, const std::string& path)
      : in_(in), path_(path) {}

  void read(char* out, std::size_t count) {
    in_.read(out, static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in_.gcount()) != count)
      throw std::runtime_error("corrupt checkpoint: " + path_);
  }

  std::uint32_t read_le32() {
    unsigned char bytes[4];
    read(reinterpret_cast<char*>(bytes), 4);
    std::uint32_t value = 0;
    for (int i = 3; i >= 0; --i) value = (value << 8) | bytes[i];
    return value;
  }

  double read_double() {
    unsigned char bytes[8];
    read(reinterpret_cast<char*>(bytes), 8);
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | bytes[i];
    double value = 0.0;
    std::memcpy(&value, &bits, sizeof(value));
    return value;
  }

  bool at_end() { return in_.peek() == std::ifstream::traits_type::eof(); }

 private:
  std::ifstream& in_;
  const std::string& path_;
};

}  // namespace

RawImages load_idx_images(const std::string& path) {
  const std::vector<std::uint8_t> data = read_file(path);
  Reader reader(data);
  if (reader.read_be32() != kImageMagic)
    throw std::runtime_error("not an IDX image file: " + path);
  RawImages raw;
  raw.count = static_cast<Index>(reader.read_be32());
  raw.rows = static_cast<Index>(reader.read_be32());
  raw.cols = static_cast<Index>(reader.read_be32());
  const std::size_t expected = static_cast<std::size_t>(raw.count) *
                               static_cast<std::size_t>(raw.rows) *
                               static_cast<std::size_t>(raw.cols);
  const std::uint8_t* pixels = reader.take(expected);
  if (reader.remaining() != 0)
    throw std::runtime_error("trailing bytes after IDX payload: " + path);
  raw.pixels.assign(pixels, pixels + expected);
  return raw;
}

std::vector<int> load_idx_labels(const std::string& path) {
  const std::vector<std::uint8_t> data = read_file(path);
  Reader reader(data);
  if (reader.read_be32() != kLabelMagic)
    throw std::runtime_error("not an IDX label file: " + path);
  const std::size_t count = reader.read_be32();
  const std::uint8_t* bytes = reader.take(count);
  if (reader.remaining() != 0)
    throw std::runtime_error("trailing bytes after IDX payload: " + path);
  std::vector<int> labels(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (bytes[i] > 9) throw std::runtime_error("invalid label");
    labels[i] = bytes[i];
  }
  return labels;
}

Matrix binarize(const RawImages& raw, int threshold) {
  if (threshold < 0 || threshold > 255)
    throw std::invalid_argument("threshold out of range");
  const Index dim = raw.rows * raw.cols;
  Matrix images(raw.count, dim);
  for (Index i = 0; i < raw.count; ++i)
    for (Index j = 0; j < dim; ++j)
      images(i, j) = raw.pixels[static_cast<std::size_t>(i * dim + j)] > threshold
                         ? 1.0
                         : 0.0;
  return images;
}

Dataset load_dataset(const std::string& images_path, const std::string& labels_path,
                     int threshold) {
  const RawImages raw = load_idx_images(images_path);
  std::vector<int> labels = load_idx_labels(labels_path);
  if (raw.count == 0) throw std::runtime_error("empty dataset");
  if (static_cast<std::size_t>(raw.count) != labels.size())
    throw std::runtime_error("image/label count mismatch");
  Dataset data;
  data.images = binarize(raw, threshold);
  data.labels = std::move(labels);
  data.image_source = images_path;
  data.label_source = labels_path;
  data.threshold = threshold;
  return data;
}

Dataset subset_per_class(const Dataset& dataset, Index per_class, std::uint64_t seed) {
  if (dataset.size() == 0) throw std::runtime_error("empty dataset");
  if (per_class < 1) throw std::invalid_argument("per-class count must be positive");

  std::map<int, std::vector<Index>> by_class;
  for (Index i = 0; i < dataset.size(); ++i)
    by_class[dataset.labels[static_cast<std::size_t>(i)]].push_back(i);

  std::vector<Index> chosen;
  for (auto& [label, indices] : by_class) {
    if (static_cast<Index>(indices.size()) < per_class)
      throw std::runtime_error("insufficient examples in class " +
                               std::to_string(label));
    Rng rng(derive_seed(seed, 0x5c, static_cast<std::uint64_t>(label)));
    shuffle(indices, rng);
    chosen.insert(chosen.end(), indices.begin(),
                  indices.begin() + static_cast<std::ptrdiff_t>(per_class));
  }
  Rng rng(derive_seed(seed, 0x5f));
  shuffle(chosen, rng);

  Dataset subset;
  subset.images.resize(static_cast<Index>(chosen.size()), dataset.dim());
  subset.labels.resize(chosen.size());
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    subset.images.row(static_cast<Index>(i)) = dataset.images.row(chosen[i]);
    subset.labels[i] = dataset.labels[static_cast<std::size_t>(chosen[i])];
  }
  subset.image_source = dataset.image_source;
  subset.label_source = dataset.label_source;
  subset.threshold = dataset.threshold;
  subset.subset_seed = seed;
  return subset;
}

void save_checkpoint(const RbmParams& params, const TrainConfig& config,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open file: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_le32(out, static_cast<std::uint32_t>(params.n_visible()));
  write_le32(out, static_cast<std::uint32_t>(params.n_hidden()));
  for (Index l = 0; l < params.n_hidden(); ++l)
    for (Index r = 0; r < params.n_visible(); ++r)
      write_double(out, params.weights(l, r));
  for (Index r = 0; r < params.n_visible(); ++r)
    write_double(out, params.visible_bias(r));
  for (Index l = 0; l < params.n_hidden(); ++l)
    write_double(out, params.hidden_bias(l));
  const std::string echo = encode_config(config);
  write_le32(out, static_cast<std::uint32_t>(echo.size()));
  out.write(echo.data(), static_cast<std::streamsize>(echo.size()));
  if (!out) throw std::runtime_error("cannot write file: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  BinaryReader reader(in, path);
  char magic[8];
  reader.read(magic, sizeof(magic));
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw std::runtime_error("not a checkpoint: " + path);
  const Index m = static_cast<Index>(reader.read_le32());
  const Index n = static_cast<Index>(reader.read_le32());
  if (m < 1 || n < 1 || m > (1 << 24) || n > (1 << 24))
    throw std::runtime_error("corrupt checkpoint: " + path);
  Checkpoint checkpoint;
  checkpoint.params.weights.resize(n, m);
  for (Index l = 0; l < n; ++l)
    for (Index r = 0; r < m; ++r)
      checkpoint.params.weights(l, r) = reader.read_double();
  checkpoint.params.visible_bias.resize(m);
  for (Index r = 0; r < m; ++r) checkpoint.params.visible_bias(r) = reader.read_double();
  checkpoint.params.hidden_bias.resize(n);
  for (Index l = 0; l < n; ++l) checkpoint.params.hidden_bias(l) = reader.read_double();
  const std::size_t echo_size = reader.read_le32();
  std::string echo(echo_size, '\0');
  reader.read(echo.data(), echo_size);
  if (!reader.at_end()) throw std::runtime_error("corrupt checkpoint: " + path);
  try {
    checkpoint.config = decode_config(echo);
  } catch (const std::exception&) {
    throw std::runtime_error("corrupt checkpoint: " + path);
  }
  return checkpoint;
}

}  // namespace slrbm
