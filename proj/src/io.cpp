#include "pseudohash/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "pseudohash/labelspace.hpp"

namespace pseudohash {

namespace {

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  auto bits = static_cast<U>(value);
  char buf[sizeof(T)];
  for (std::size_t b = 0; b < sizeof(T); ++b) buf[b] = static_cast<char>((bits >> (8 * b)) & 0xFFU);
  out.write(buf, sizeof(T));
}

void put_f64(std::ostream& out, double value) { put(out, std::bit_cast<std::uint64_t>(value)); }

template <typename T>
T get(std::istream& in, const char* what) {
  static_assert(std::is_integral_v<T>);
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw InputError(std::string("truncated file reading ") + what);
  std::make_unsigned_t<T> bits = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) bits |= static_cast<std::make_unsigned_t<T>>(buf[b]) << (8 * b);
  return static_cast<T>(bits);
}

double get_f64(std::istream& in, const char* what) { return std::bit_cast<double>(get<std::uint64_t>(in, what)); }

void expect_magic(std::istream& in, const char (&magic)[8], const char* kind) {
  char buf[8];
  if (!in.read(buf, 8) || std::memcmp(buf, magic, 8) != 0) throw InputError(std::string("not a ") + kind + " file");
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kFormatVersion) {
    throw InputError(std::string(kind) + " format version " + std::to_string(version) + " is not supported");
  }
}

// Bounds reads of untrusted sizes before allocating.
std::uint64_t get_size(std::istream& in, const char* what, std::uint64_t limit = (1ULL << 40)) {
  const auto v = get<std::uint64_t>(in, what);
  if (v > limit) throw InputError(std::string("implausible ") + what + " " + std::to_string(v));
  return v;
}

template <typename Block>
void write_block(std::ostream& out, const Block& block) {
  for (Eigen::Index i = 0; i < block.rows(); ++i) {
    for (Eigen::Index j = 0; j < block.cols(); ++j) put_f64(out, block(i, j));
  }
}

template <typename Block>
void read_block(std::istream& in, Block& block) {
  for (Eigen::Index i = 0; i < block.rows(); ++i) {
    for (Eigen::Index j = 0; j < block.cols(); ++j) block(i, j) = get_f64(in, "parameters");
  }
}

template <typename Fn>
auto with_path(const std::filesystem::path& path, Fn fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open");
  try {
    auto value = fn(in);
    if (in.peek() != std::char_traits<char>::eof()) throw InputError("trailing data after the last record");
    return value;
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace

void write_features(std::ostream& out, const FeatureMatrix& features) {
  out << "n=" << features.size() << " d=" << features.dim() << '\n';
  for (const auto& id : features.ids()) out << id << '\n';
  write_block(out, features.values());
}

FeatureMatrix read_features(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw InputError("feature file: missing header");
  std::size_t n = 0;
  std::size_t d = 0;
  if (std::sscanf(header.c_str(), "n=%zu d=%zu", &n, &d) != 2) {
    throw InputError("feature file: bad header '" + header + "'");
  }
  if (n == 0) throw InputError("feature file: no items");
  if (d == 0) throw InputError("feature file: zero feature dimension");
  std::vector<std::string> ids(n);
  for (auto& id : ids) {
    if (!std::getline(in, id) || id.empty()) throw InputError("feature file: truncated id table");
  }
  Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  read_block(in, values);
  return FeatureMatrix(std::move(ids), std::move(values));
}

void write_checkpoint(std::ostream& out, const HashModel<double>& model) {
  model.validate();
  out.write(kCheckpointMagic, 8);
  put(out, kFormatVersion);
  put(out, static_cast<std::uint64_t>(model.input_dim()));
  put(out, static_cast<std::uint32_t>(model.feature_layers.size()));
  for (const auto& layer : model.feature_layers) {
    put(out, static_cast<std::uint64_t>(layer.weight.rows()));
    put(out, static_cast<std::uint8_t>(layer.activation));
  }
  put(out, static_cast<std::uint64_t>(model.code_length()));
  put(out, model.seed);
  visit_parameters(model, [&](const auto& block) { write_block(out, block); });
}

HashModel<double> read_checkpoint(std::istream& in) {
  expect_magic(in, kCheckpointMagic, "checkpoint");
  const auto d = static_cast<Eigen::Index>(get_size(in, "input dimension", 1ULL << 24));
  const auto layers = get<std::uint32_t>(in, "layer count");
  if (layers > 1024) throw InputError("implausible layer count");
  HashModel<double> model;
  Eigen::Index width = d;
  for (std::uint32_t t = 0; t < layers; ++t) {
    const auto h = static_cast<Eigen::Index>(get_size(in, "layer width", 1ULL << 24));
    const auto act = get<std::uint8_t>(in, "activation");
    if (act > 1) throw InputError("unknown activation code " + std::to_string(act));
    DenseLayer<double> layer;
    layer.weight.resize(h, width);
    layer.bias.resize(h);
    layer.activation = static_cast<Activation>(act);
    model.feature_layers.push_back(std::move(layer));
    width = h;
  }
  const auto k = static_cast<Eigen::Index>(get_size(in, "code length", 1ULL << 20));
  model.seed = get<std::int64_t>(in, "seed");
  model.hash_weight.resize(width, k);
  model.hash_bias.resize(k);
  visit_parameters(model, [&](auto& block) { read_block(in, block); });
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("checkpoint: ") + e.what());
  }
  return model;
}

void write_codes(std::ostream& out, const CodeStore& store) {
  out.write(kCodesMagic, 8);
  put(out, kFormatVersion);
  put(out, static_cast<std::uint64_t>(store.code_length()));
  put(out, static_cast<std::uint64_t>(store.size()));
  for (const auto& id : store.ids()) {
    put(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  for (auto w : store.words()) put(out, w);
}

CodeStore read_codes(std::istream& in) {
  expect_magic(in, kCodesMagic, "codes");
  const auto k = get_size(in, "code length", 1ULL << 20);
  const auto n = get_size(in, "item count");
  if (k == 0) throw InputError("codes: zero code length");
  std::vector<std::string> ids(n);
  for (auto& id : ids) {
    const auto len = get<std::uint32_t>(in, "id length");
    if (len == 0 || len > 4096) throw InputError("codes: implausible id length");
    id.resize(len);
    if (!in.read(id.data(), len)) throw InputError("truncated file reading id table");
  }
  CodeStore store(k);
  std::vector<std::uint64_t> row(words_for(k));
  for (auto& id : ids) {
    for (auto& w : row) w = get<std::uint64_t>(in, "packed codes");
    try {
      store.add(std::move(id), row);
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("codes: ") + e.what());
    }
  }
  return store;
}

void write_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(tmp.string() + ": cannot open for writing");
    writer(out);
    out.flush();
    if (!out) throw InputError(tmp.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

void save_features(const std::filesystem::path& path, const FeatureMatrix& features) {
  write_atomically(path, [&](std::ostream& out) { write_features(out, features); });
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  return with_path(path, [](std::istream& in) { return read_features(in); });
}

void save_checkpoint(const std::filesystem::path& path, const HashModel<double>& model) {
  write_atomically(path, [&](std::ostream& out) { write_checkpoint(out, model); });
}

HashModel<double> load_checkpoint(const std::filesystem::path& path) {
  return with_path(path, [](std::istream& in) { return read_checkpoint(in); });
}

void save_codes(const std::filesystem::path& path, const CodeStore& store) {
  write_atomically(path, [&](std::ostream& out) { write_codes(out, store); });
}

CodeStore load_codes(const std::filesystem::path& path) {
  return with_path(path, [](std::istream& in) { return read_codes(in); });
}

}  // namespace pseudohash
