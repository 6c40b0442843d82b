#include "pseudohash/labelspace.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace pseudohash {

namespace {

struct Counts {
  long dot = 0;
  long na = 0;
  long nb = 0;
};

Counts count_bits(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("label vectors differ in length: " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
  }
  Counts c;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const bool x = a[t] != 0;
    const bool y = b[t] != 0;
    c.dot += x && y;
    c.na += x;
    c.nb += y;
  }
  return c;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open");
  return in;
}

}  // namespace

LabelMatrix::LabelMatrix(std::vector<std::string> ids, LabelBits bits)
    : ids_(std::move(ids)), bits_(std::move(bits)) {
  if (static_cast<Eigen::Index>(ids_.size()) != bits_.rows()) {
    throw std::invalid_argument("label matrix: id count does not match row count");
  }
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw InputError("duplicate item_id '" + ids_[i] + "'");
    }
  }
  if ((bits_.array() > 1).any()) throw std::invalid_argument("label matrix: entries must be 0 or 1");
}

std::size_t LabelMatrix::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw InputError("no label vector for item '" + id + "'");
  return it->second;
}

std::vector<std::size_t> LabelMatrix::unlabeled_items() const {
  std::vector<std::size_t> out;
  for (Eigen::Index i = 0; i < bits_.rows(); ++i) {
    if ((bits_.row(i).array() == 0).all()) out.push_back(static_cast<std::size_t>(i));
  }
  return out;
}

LabelMatrix LabelMatrix::select(const std::vector<std::string>& ids) const {
  LabelBits out(static_cast<Eigen::Index>(ids.size()), bits_.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = bits_.row(static_cast<Eigen::Index>(index_of(ids[i])));
  }
  return LabelMatrix(ids, std::move(out));
}

double similarity(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  const Counts c = count_bits(a, b);
  if (c.na == 0 || c.nb == 0) return 0.0;
  if (c.dot == c.na && c.dot == c.nb) return 1.0;
  // sqrt of the integer product keeps s exact for perfect squares.
  return static_cast<double>(c.dot) / std::sqrt(static_cast<double>(c.na * c.nb));
}

int indicator(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  const Counts c = count_bits(a, b);
  if (c.dot == 0) return 1;
  return (c.dot == c.na && c.dot == c.nb) ? 1 : 0;
}

SimilarityMatrix build_similarity(const LabelMatrix& labels) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (n < 1) throw std::invalid_argument("build_similarity: empty label matrix");
  SimilarityMatrix out;
  out.s.resize(n, n);
  out.indicator.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto li = labels.row(static_cast<std::size_t>(i));
    for (Eigen::Index j = i; j < n; ++j) {
      const auto lj = labels.row(static_cast<std::size_t>(j));
      const double s = similarity(li, lj);
      const auto ind = static_cast<std::uint8_t>(indicator(li, lj));
      out.s(i, j) = out.s(j, i) = s;
      out.indicator(i, j) = out.indicator(j, i) = ind;
    }
  }
  return out;
}

std::vector<std::string> read_class_map(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> classes;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    classes.push_back(line);
  }
  if (classes.empty()) throw InputError(path.string() + ": class map is empty");
  return classes;
}

LabelMatrix ingest_detections(std::istream& in, double confidence_threshold,
                              const std::vector<std::string>& class_map) {
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
    throw std::invalid_argument("confidence_threshold must lie in [0,1]");
  }
  std::unordered_map<std::string, std::size_t> class_index;
  for (std::size_t j = 0; j < class_map.size(); ++j) {
    if (!class_index.emplace(class_map[j], j).second) {
      throw InputError("class map lists '" + class_map[j] + "' twice");
    }
  }

  std::vector<std::string> ids;
  std::vector<std::vector<std::uint8_t>> rows;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";

    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(where + "malformed record (" + e.what() + ")");
    }
    if (!rec.is_object() || !rec.contains("item_id") || !rec["item_id"].is_string()) {
      throw InputError(where + "malformed record: missing string item_id");
    }
    if (!rec.contains("detections") || !rec["detections"].is_array()) {
      throw InputError(where + "malformed record: missing detections array");
    }
    std::string id = rec["item_id"].get<std::string>();
    if (id.empty() || id.find_first_of(" \t\r\n") != std::string::npos) {
      throw InputError(where + "item_id must be non-empty and free of whitespace");
    }
    if (!seen.emplace(id, ids.size()).second) {
      throw InputError(where + "duplicate item_id '" + id + "'");
    }

    std::vector<std::uint8_t> row(class_map.size(), 0);
    for (const auto& det : rec["detections"]) {
      if (!det.is_object() || !det.contains("class_name") || !det["class_name"].is_string() ||
          !det.contains("score") || !det["score"].is_number()) {
        throw InputError(where + "malformed detection in item '" + id + "'");
      }
      const auto name = det["class_name"].get<std::string>();
      const double score = det["score"].get<double>();
      if (!(score >= 0.0 && score <= 1.0)) {
        throw InputError(where + "score outside [0,1] in item '" + id + "'");
      }
      auto it = class_index.find(name);
      if (it == class_index.end()) throw InputError(where + "unknown class '" + name + "'");
      if (score >= confidence_threshold) row[it->second] = 1;
    }
    ids.push_back(std::move(id));
    rows.push_back(std::move(row));
  }

  LabelBits bits(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(class_map.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < class_map.size(); ++j) {
      bits(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return LabelMatrix(std::move(ids), std::move(bits));
}

LabelMatrix ingest_detections(const std::filesystem::path& path, double confidence_threshold,
                              const std::vector<std::string>& class_map) {
  auto in = open_input(path);
  return ingest_detections(in, confidence_threshold, class_map);
}

void write_labels(std::ostream& out, const LabelMatrix& labels) {
  out << "c=" << labels.num_classes() << " n=" << labels.size() << '\n';
  std::string bits(labels.num_classes(), '0');
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = labels.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) bits[j] = row[j] ? '1' : '0';
    out << labels.ids()[i] << ' ' << bits << '\n';
  }
}

void write_labels(const std::filesystem::path& path, const LabelMatrix& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path.string() + ": cannot open for writing");
  write_labels(out, labels);
}

LabelMatrix read_labels(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw InputError("label file: missing header");
  std::size_t c = 0;
  std::size_t n = 0;
  {
    char tail = 0;
    if (std::sscanf(header.c_str(), "c=%zu n=%zu%c", &c, &n, &tail) < 2 || c == 0) {
      throw InputError("label file: bad header '" + header + "'");
    }
  }
  std::vector<std::string> ids;
  ids.reserve(n);
  LabelBits bits(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c));
  std::string line;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw InputError("label file: expected " + std::to_string(n) + " rows");
    std::istringstream ss(line);
    std::string id;
    std::string row;
    if (!(ss >> id >> row) || row.size() != c) {
      throw InputError("label file: line " + std::to_string(i + 2) + ": malformed row");
    }
    for (std::size_t j = 0; j < c; ++j) {
      if (row[j] != '0' && row[j] != '1') {
        throw InputError("label file: line " + std::to_string(i + 2) + ": bits must be 0/1");
      }
      bits(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j] == '1';
    }
    ids.push_back(std::move(id));
  }
  return LabelMatrix(std::move(ids), std::move(bits));
}

LabelMatrix read_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return read_labels(in);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace pseudohash
