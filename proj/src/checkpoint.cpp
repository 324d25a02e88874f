#include "sketchrl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sketchrl {

using nlohmann::json;

namespace {

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw std::runtime_error("checkpoint truncated");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  pos += sizeof(T);
  return v;
}

}  // namespace

const NamedTensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw std::runtime_error("checkpoint has no tensor '" + name + "'");
}

bool Checkpoint::has_tensor(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return true;
  }
  return false;
}

void Checkpoint::add_network(const std::string& prefix, const DenseNetwork& net) {
  json acts = json::array();
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const auto& l = net.layers()[i];
    const std::string base = prefix + "." + std::to_string(i);
    tensors.push_back({base + ".weight", l.weight.rows(), l.weight.cols(),
                       std::vector<double>(l.weight.data(), l.weight.data() + l.weight.size())});
    tensors.push_back({base + ".bias", l.bias.size(), 1,
                       std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())});
    acts.push_back(activation_name(l.activation));
  }
  meta["networks"][prefix] = {{"activations", acts}};
}

DenseNetwork Checkpoint::network(const std::string& prefix) const {
  if (!meta.contains("networks") || !meta["networks"].contains(prefix)) {
    throw std::runtime_error("checkpoint has no network '" + prefix + "'");
  }
  const auto& acts = meta["networks"][prefix].at("activations");
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i < acts.size(); ++i) {
    const std::string base = prefix + "." + std::to_string(i);
    const auto& w = tensor(base + ".weight");
    const auto& b = tensor(base + ".bias");
    if (b.rows != w.rows || b.cols != 1) throw std::runtime_error("checkpoint: bias shape mismatch in " + base);
    DenseLayer l;
    l.weight = Eigen::Map<const Eigen::MatrixXd>(w.data.data(), w.rows, w.cols);
    l.bias = Eigen::Map<const Eigen::VectorXd>(b.data.data(), b.rows);
    l.activation = activation_from_name(acts[i].get<std::string>());
    layers.push_back(std::move(l));
  }
  return DenseNetwork(std::move(layers));
}

void Checkpoint::add_scalar(const std::string& name, double value) {
  tensors.push_back({name, 1, 1, {value}});
}

double Checkpoint::scalar(const std::string& name) const {
  const auto& t = tensor(name);
  if (t.data.size() != 1) throw std::runtime_error("checkpoint tensor '" + name + "' is not a scalar");
  return t.data[0];
}

std::string Checkpoint::serialize() const {
  json header;
  header["meta"] = meta;
  header["tensors"] = json::array();
  for (const auto& t : tensors) {
    if (static_cast<std::int64_t>(t.data.size()) != t.rows * t.cols) {
      throw std::logic_error("tensor '" + t.name + "' data does not match its shape");
    }
    header["tensors"].push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  }
  const std::string text = header.dump();
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, text.size());
  out += text;
  for (const auto& t : tensors) {
    for (double v : t.data) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Checkpoint Checkpoint::deserialize(const std::string& bytes) {
  if (bytes.size() < sizeof(kCheckpointMagic) || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) {
    throw std::runtime_error("not a sketchrl checkpoint (bad magic)");
  }
  std::size_t pos = sizeof(kCheckpointMagic);
  const auto version = get_le<std::uint32_t>(bytes, pos);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint format version " + std::to_string(version) +
                             " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const auto len = get_le<std::uint64_t>(bytes, pos);
  if (pos + len > bytes.size()) throw std::runtime_error("checkpoint header truncated");
  const json header = json::parse(bytes.substr(pos, len));
  pos += len;
  Checkpoint c;
  c.meta = header.at("meta");
  for (const auto& e : header.at("tensors")) {
    NamedTensor t{e.at("name").get<std::string>(), e.at("rows").get<std::int64_t>(),
                  e.at("cols").get<std::int64_t>(), {}};
    if (t.rows < 0 || t.cols < 0) throw std::runtime_error("checkpoint: negative tensor shape");
    t.data.resize(static_cast<std::size_t>(t.rows * t.cols));
    for (auto& v : t.data) v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos));
    c.tensors.push_back(std::move(t));
  }
  if (pos != bytes.size()) throw std::runtime_error("checkpoint has trailing bytes");
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  const auto bytes = serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return deserialize(ss.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace sketchrl
