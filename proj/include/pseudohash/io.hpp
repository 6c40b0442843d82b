#ifndef PSEUDOHASH_IO_HPP
#define PSEUDOHASH_IO_HPP

#include <filesystem>
#include <functional>
#include <iosfwd>

#include "pseudohash/dataset.hpp"
#include "pseudohash/hashnet.hpp"
#include "pseudohash/retrieval.hpp"

namespace pseudohash {

// All binary numbers are little-endian.

inline constexpr char kCheckpointMagic[8] = {'P', 'S', 'H', 'M', 'O', 'D', 'E', 'L'};
inline constexpr char kCodesMagic[8] = {'P', 'S', 'H', 'C', 'O', 'D', 'E', 'S'};
inline constexpr std::uint32_t kFormatVersion = 1;

/// Feature file: text line "n=<int> d=<int>", n newline-terminated ids, then
/// n*d row-major float64 values.
void write_features(std::ostream& out, const FeatureMatrix& features);
FeatureMatrix read_features(std::istream& in);

/// Checkpoint: magic, u32 version, u64 d, u32 layer count, per layer u64 width
/// and u8 activation, u64 k, i64 seed, then every parameter block in
/// declaration order as row-major float64.
void write_checkpoint(std::ostream& out, const HashModel<double>& model);
HashModel<double> read_checkpoint(std::istream& in);

/// Codes file: magic, u32 version, u64 k, u64 n, ids as u32 length + bytes,
/// then n packed rows of ceil(k/64) u64 words.
void write_codes(std::ostream& out, const CodeStore& store);
CodeStore read_codes(std::istream& in);

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);

void save_features(const std::filesystem::path& path, const FeatureMatrix& features);
FeatureMatrix load_features(const std::filesystem::path& path);
void save_checkpoint(const std::filesystem::path& path, const HashModel<double>& model);
HashModel<double> load_checkpoint(const std::filesystem::path& path);
void save_codes(const std::filesystem::path& path, const CodeStore& store);
CodeStore load_codes(const std::filesystem::path& path);

}  // namespace pseudohash

#endif  // PSEUDOHASH_IO_HPP
