#include "unetaf/weights.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "unetaf/error.hpp"

namespace unetaf {

namespace {

constexpr char kMagic[4] = {'A', 'F', 'U', 'W'};

template <typename U>
void put(std::string& out, U value)
{
    static_assert(std::is_trivially_copyable_v<U>);
    unsigned char bytes[sizeof(U)];
    std::memcpy(bytes, &value, sizeof(U));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes, bytes + sizeof(U));
    out.append(reinterpret_cast<const char*>(bytes), sizeof(U));
}

class Reader {
public:
    Reader(const std::string& buffer, std::string source) : buf_(buffer), source_(std::move(source)) {}

    template <typename U>
    U get()
    {
        need(sizeof(U));
        unsigned char bytes[sizeof(U)];
        std::memcpy(bytes, buf_.data() + pos_, sizeof(U));
        if constexpr (std::endian::native == std::endian::big)
            std::reverse(bytes, bytes + sizeof(U));
        pos_ += sizeof(U);
        U value;
        std::memcpy(&value, bytes, sizeof(U));
        return value;
    }

    std::string bytes(std::size_t n)
    {
        need(n);
        std::string s = buf_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ == buf_.size(); }

private:
    void need(std::size_t n) const
    {
        if (buf_.size() - pos_ < n)
            throw FormatError(source_ + ": truncated weight file");
    }

    const std::string& buf_;
    std::string source_;
    std::size_t pos_ = 0;
};

} // namespace

std::uint64_t ParamArray::numel() const
{
    std::uint64_t n = 1;
    for (auto d : dims)
        n *= d;
    return n;
}

void WeightStore::set(std::string path, ParamArray value)
{
    if (value.numel() != value.values.size())
        throw ShapeMismatch("parameter '" + path + "': value count does not match dims");
    entries_[std::move(path)] = std::move(value);
}

const ParamArray& WeightStore::at(const std::string& path) const
{
    auto it = entries_.find(path);
    if (it == entries_.end())
        throw ShapeMismatch("missing parameter '" + path + "'");
    return it->second;
}

ParamArray& WeightStore::at(const std::string& path)
{
    auto it = entries_.find(path);
    if (it == entries_.end())
        throw ShapeMismatch("missing parameter '" + path + "'");
    return it->second;
}

void save_weights(const WeightStore& store, const std::filesystem::path& path)
{
    std::string out(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kWeightFormatVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(store.size()));
    for (const auto& [name, param] : store) {
        if (name.size() > std::numeric_limits<std::uint16_t>::max())
            throw FormatError("parameter path too long: " + name.substr(0, 64));
        if (param.dims.size() > std::numeric_limits<std::uint8_t>::max())
            throw FormatError("parameter rank too large: " + name);
        put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
        out += name;
        put<std::uint8_t>(out, static_cast<std::uint8_t>(param.dims.size()));
        for (auto d : param.dims)
            put<std::uint64_t>(out, d);
        for (double v : param.values)
            put<double>(out, v);
    }

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file)
        throw IoError("cannot open '" + path.string() + "' for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file)
        throw IoError("failed writing '" + path.string() + "'");
}

WeightStore load_weights(const std::filesystem::path& path)
{
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw IoError("cannot open '" + path.string() + "' for reading");
    const std::string buffer((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

    const std::string source = path.string();
    Reader in(buffer, source);
    if (in.bytes(4) != std::string(kMagic, 4))
        throw FormatError(source + ": bad magic, not a weight file");
    const auto version = in.get<std::uint32_t>();
    if (version != kWeightFormatVersion)
        throw FormatError(source + ": unsupported version " + std::to_string(version));
    const auto count = in.get<std::uint32_t>();

    WeightStore store;
    std::string previous;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto len = in.get<std::uint16_t>();
        std::string name = in.bytes(len);
        if (i > 0 && !(previous < name))
            throw FormatError(source + ": entries not in sorted path order at '" + name + "'");
        ParamArray param;
        const auto rank = in.get<std::uint8_t>();
        param.dims.resize(rank);
        std::uint64_t numel = 1;
        for (auto& d : param.dims) {
            d = in.get<std::uint64_t>();
            if (d != 0 && numel > std::numeric_limits<std::uint64_t>::max() / d)
                throw FormatError(source + ": shape table overflow for '" + name + "'");
            numel *= d;
        }
        if (numel > (buffer.size() / sizeof(double)))
            throw FormatError(source + ": truncated weight file");
        param.values.resize(numel);
        for (auto& v : param.values)
            v = in.get<double>();
        previous = name;
        store.set(std::move(name), std::move(param));
    }
    if (!in.done())
        throw FormatError(source + ": trailing bytes after last entry");
    return store;
}

} // namespace unetaf
