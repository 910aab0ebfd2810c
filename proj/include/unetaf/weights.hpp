#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace unetaf {

/// A named parameter: arbitrary-rank dims and row-major f64 values.
struct ParamArray {
    std::vector<std::uint64_t> dims;
    std::vector<double> values;

    std::uint64_t numel() const;
    friend bool operator==(const ParamArray&, const ParamArray&) = default;
};

/// Parameters keyed by layer path ("enc/0/conv1/weight"), iterated in sorted order.
class WeightStore {
public:
    using Map = std::map<std::string, ParamArray>;

    void set(std::string path, ParamArray value);
    bool contains(const std::string& path) const { return entries_.count(path) != 0; }
    /// Throws ShapeMismatch when the path is absent.
    const ParamArray& at(const std::string& path) const;
    ParamArray& at(const std::string& path);

    std::size_t size() const { return entries_.size(); }
    Map::const_iterator begin() const { return entries_.begin(); }
    Map::const_iterator end() const { return entries_.end(); }

    friend bool operator==(const WeightStore&, const WeightStore&) = default;

private:
    Map entries_;
};

/// Binary layout, all little-endian:
///   "AFUW" | u32 version (1) | u32 entry count
///   per entry, sorted by path: u16 path length | UTF-8 path | u8 rank |
///   u64 dims[rank] | f64 values[prod(dims)]
inline constexpr std::uint32_t kWeightFormatVersion = 1;

void save_weights(const WeightStore& store, const std::filesystem::path& path);
/// Throws IoError when the file cannot be read, FormatError when it is malformed.
WeightStore load_weights(const std::filesystem::path& path);

} // namespace unetaf
