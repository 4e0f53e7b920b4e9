#include "fedbid/idx.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "fedbid/errors.hpp"

namespace fedbid {
namespace {

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw FormatError("idx: truncated header in " + path.string());
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

std::ifstream open_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("idx: cannot open " + path.string());
  return in;
}

void expect_magic(std::uint32_t observed, std::uint32_t expected,
                  const std::filesystem::path& path) {
  if (observed != expected) {
    std::ostringstream msg;
    msg << "idx: bad magic 0x" << std::hex << observed << " in " << path.string()
        << " (expected 0x" << expected << ")";
    throw FormatError(msg.str());
  }
}

std::vector<unsigned char> read_payload(std::istream& in, std::size_t bytes,
                                        const std::filesystem::path& path) {
  std::vector<unsigned char> buf(bytes);
  if (bytes > 0 && !in.read(reinterpret_cast<char*>(buf.data()),
                            static_cast<std::streamsize>(bytes))) {
    throw FormatError("idx: truncated payload in " + path.string());
  }
  return buf;
}

}  // namespace

IdxDataset load_idx(const std::filesystem::path& images_path,
                    const std::filesystem::path& labels_path) {
  std::ifstream images = open_binary(images_path);
  std::ifstream labels = open_binary(labels_path);

  expect_magic(read_be32(images, images_path), kIdxImageMagic, images_path);
  const std::uint32_t num_images = read_be32(images, images_path);
  const std::uint32_t rows = read_be32(images, images_path);
  const std::uint32_t cols = read_be32(images, images_path);

  expect_magic(read_be32(labels, labels_path), kIdxLabelMagic, labels_path);
  const std::uint32_t num_labels = read_be32(labels, labels_path);

  if (num_images != num_labels) {
    throw FormatError("idx: " + std::to_string(num_images) + " images but " +
                      std::to_string(num_labels) + " labels");
  }

  const std::size_t pixels = std::size_t{rows} * cols;
  const auto image_bytes = read_payload(images, pixels * num_images, images_path);
  const auto label_bytes = read_payload(labels, num_labels, labels_path);

  IdxDataset out;
  out.rows = static_cast<int>(rows);
  out.cols = static_cast<int>(cols);
  out.images.resize(num_images, static_cast<Eigen::Index>(pixels));
  for (std::size_t i = 0; i < num_images; ++i) {
    for (std::size_t j = 0; j < pixels; ++j) {
      out.images(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          image_bytes[i * pixels + j] / 255.0;
    }
  }
  out.labels.assign(label_bytes.begin(), label_bytes.end());
  return out;
}

LocalDataset sample_owner_dataset(const IdxDataset& pool, const DataOwner& owner,
                                  const Partition& partition, int num_classes,
                                  double noise_rate_blurred, Rng& rng) {
  const std::vector<int> classes = owner_classes(owner, partition, num_classes);
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const int y = pool.labels[i];
    if (y >= 0 && y < num_classes) by_class[y].push_back(i);
  }
  std::vector<int> usable;
  for (int k : classes) {
    if (!by_class[k].empty()) usable.push_back(k);
  }
  if (usable.empty()) throw InsufficientDataError("idx: no samples for owner's classes");

  std::uniform_int_distribution<std::size_t> pick_class(0, usable.size() - 1);
  LocalDataset data;
  data.owner_id = owner.id;
  data.features.resize(owner.num_samples, pool.images.cols());
  data.labels.resize(owner.num_samples);
  for (int i = 0; i < owner.num_samples; ++i) {
    const auto& rows = by_class[usable[pick_class(rng)]];
    const std::size_t row =
        std::uniform_int_distribution<std::size_t>(0, rows.size() - 1)(rng);
    data.features.row(i) = pool.images.row(static_cast<Eigen::Index>(rows[row]));
    data.labels[i] = pool.labels[rows[row]];
  }
  if (owner.quality_tier == QualityTier::Blurred && noise_rate_blurred > 0.0) {
    std::bernoulli_distribution flip(noise_rate_blurred);
    for (int i = 0; i < owner.num_samples; ++i) {
      if (flip(rng)) {
        data.labels[i] = usable[pick_class(rng)];
        ++data.num_relabeled;
      }
    }
  }
  return data;
}

}  // namespace fedbid
