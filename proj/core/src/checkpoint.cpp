//*****************************************************************************
// Copyright 2026 The ARM Forecasting Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//*****************************************************************************

#include "arm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "arm/errors.hpp"

namespace arm {
namespace {

constexpr char kMagic[8] = {'A', 'R', 'M', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}
  template <typename T>
  void put(T v) {
    v = to_little(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const std::string& s) { out_.write(s.data(), static_cast<std::streamsize>(s.size())); }

 private:
  std::ofstream& out_;
};

class Reader {
 public:
  Reader(std::ifstream& in, std::string path) : in_(in), path_(std::move(path)) {}
  template <typename T>
  T get() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in_) fail("truncated file");
    return to_little(v);
  }
  std::string bytes(std::uint64_t n) {
    if (n > (1ULL << 32)) fail("implausible string length");
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (!in_) fail("truncated file");
    return s;
  }
  [[noreturn]] void fail(const std::string& why) const {
    throw DataError("checkpoint " + path_ + ": " + why);
  }

 private:
  std::ifstream& in_;
  std::string path_;
};

}  // namespace

const Tensor& Checkpoint::array(const std::string& name) const {
  for (const auto& [n, t] : arrays)
    if (n == name) return t;
  throw DataError("checkpoint has no array '" + name + "'");
}

void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  Writer w(out);
  out.write(kMagic, sizeof kMagic);
  w.put<std::uint32_t>(Checkpoint::kVersion);
  w.put<std::uint64_t>(checkpoint.config_text.size());
  w.bytes(checkpoint.config_text);
  w.put<std::uint64_t>(checkpoint.arrays.size());
  for (const auto& [name, t] : checkpoint.arrays) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    w.bytes(name);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) w.put<std::uint64_t>(d);
    for (double v : t.values()) w.put<double>(v);
  }
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  Reader r(in, path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) r.fail("not an ARM checkpoint");
  const auto version = r.get<std::uint32_t>();
  if (version != Checkpoint::kVersion)
    r.fail("unsupported format version " + std::to_string(version));
  Checkpoint ck;
  ck.config_text = r.bytes(r.get<std::uint64_t>());
  const auto count = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = r.bytes(r.get<std::uint32_t>());
    const auto rank = r.get<std::uint32_t>();
    if (rank > 8) r.fail("array '" + name + "' has implausible rank");
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(r.get<std::uint64_t>());
    const std::size_t n = element_count(shape);
    if (n > (1ULL << 31)) r.fail("array '" + name + "' is implausibly large");
    std::vector<double> values(n);
    for (double& v : values) v = r.get<double>();
    ck.arrays.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  return ck;
}

}  // namespace arm
