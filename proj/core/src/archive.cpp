#include "retarget/archive.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

#include "retarget/error.hpp"
#include "retarget/text_io.hpp"

namespace retarget {

namespace {

constexpr char kMagic[8] = {'R', 'T', 'A', 'R', 'C', 'H', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kArrayTag = 0;
constexpr std::uint8_t kBlobTag = 1;

static_assert(std::endian::native == std::endian::little, "archive I/O assumes a little-endian host");

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw ValidationError("archive truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::string take_bytes(const std::string& in, std::size_t& pos, std::uint64_t n) {
  if (n > in.size() - pos) throw ValidationError("archive truncated");
  std::string s = in.substr(pos, n);
  pos += n;
  return s;
}

void put_name(std::string& out, const std::string& name) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out += name;
}

}  // namespace

const std::vector<double>& Archive::array(const std::string& name) const {
  auto it = arrays.find(name);
  if (it == arrays.end()) throw ValidationError("archive has no array '" + name + "'");
  return it->second;
}

const std::string& Archive::blob(const std::string& name) const {
  auto it = blobs.find(name);
  if (it == blobs.end()) throw ValidationError("archive has no blob '" + name + "'");
  return it->second;
}

std::string serialize_archive(const Archive& a) {
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(a.arrays.size() + a.blobs.size()));
  for (const auto& [name, values] : a.arrays) {
    put<std::uint8_t>(out, kArrayTag);
    put_name(out, name);
    put<std::uint64_t>(out, values.size());
    for (double v : values) put<double>(out, v);
  }
  for (const auto& [name, bytes] : a.blobs) {
    put<std::uint8_t>(out, kBlobTag);
    put_name(out, name);
    put<std::uint64_t>(out, bytes.size());
    out += bytes;
  }
  return out;
}

Archive deserialize_archive(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw ValidationError("not an archive (bad magic)");
  std::size_t pos = sizeof kMagic;
  const auto version = take<std::uint32_t>(bytes, pos);
  if (version != kVersion) throw ValidationError("unsupported archive version " + std::to_string(version));
  const auto entries = take<std::uint32_t>(bytes, pos);
  Archive a;
  for (std::uint32_t e = 0; e < entries; ++e) {
    const auto tag = take<std::uint8_t>(bytes, pos);
    const std::string name = take_bytes(bytes, pos, take<std::uint32_t>(bytes, pos));
    const auto n = take<std::uint64_t>(bytes, pos);
    if (tag == kArrayTag) {
      if (n > (bytes.size() - pos) / sizeof(double)) throw ValidationError("archive truncated");
      std::vector<double> v(n);
      for (auto& x : v) x = take<double>(bytes, pos);
      a.arrays[name] = std::move(v);
    } else if (tag == kBlobTag) {
      a.blobs[name] = take_bytes(bytes, pos, n);
    } else {
      throw ValidationError("archive entry '" + name + "' has unknown tag");
    }
  }
  if (pos != bytes.size()) throw ValidationError("archive has trailing bytes");
  return a;
}

void save_archive(const Archive& a, const std::filesystem::path& path) { write_text_file(path, serialize_archive(a)); }

Archive load_archive(const std::filesystem::path& path) { return deserialize_archive(read_text_file(path)); }

}  // namespace retarget
