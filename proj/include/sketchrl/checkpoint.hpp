#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "sketchrl/network.hpp"

namespace sketchrl {

inline constexpr char kCheckpointMagic[8] = {'S', 'K', 'R', 'L', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<double> data;  // column-major
};

/// Layout on disk:
///   8 bytes magic "SKRLCKPT"
///   u32 LE format version
///   u64 LE header length, then that many bytes of JSON:
///     {"meta": {...}, "tensors": [{"name", "rows", "cols"}, ...]}
///   payload: every tensor's values as f64 LE, in table order.
struct Checkpoint {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedTensor> tensors;

  const NamedTensor& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;

  void add_network(const std::string& prefix, const DenseNetwork& net);
  DenseNetwork network(const std::string& prefix) const;

  void add_scalar(const std::string& name, double value);
  double scalar(const std::string& name) const;

  std::string serialize() const;
  static Checkpoint deserialize(const std::string& bytes);

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

}  // namespace sketchrl
