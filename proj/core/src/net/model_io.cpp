// Copyright 2026 The hrtfmatch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS-IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hrtf/net/model_io.h"

#include <bit>
#include <cstring>

#include <zlib.h>

#include "hrtf/atomic_file.h"
#include "hrtf/errors.h"

namespace hrtf::net {

static_assert(std::endian::native == std::endian::little,
              "model container is written in host order and assumes little-endian");

namespace {

constexpr char kMagic[8] = {'H', 'R', 'T', 'F', 'N', 'E', 'T', '\0'};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&v);
    out_.append(p, sizeof(T));
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_ += s;
  }
  void put_doubles(const std::vector<double>& v) {
    put<std::uint64_t>(v.size());
    out_.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const char* data, std::size_t size) : data_(data), size_(size) {}

  template <typename T>
  T get() {
    T v;
    need(sizeof(T));
    std::memcpy(&v, data_ + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(data_ + pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<double> get_doubles() {
    const auto n = get<std::uint64_t>();
    if (n > (size_ - pos_) / sizeof(double)) throw TruncatedFile("model tensor runs past payload");
    std::vector<double> v(n);
    std::memcpy(v.data(), data_ + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }
  bool done() const { return pos_ == size_; }

 private:
  void need(std::size_t n) const {
    if (n > size_ - pos_) throw TruncatedFile("model payload ends early");
  }
  const char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(const char* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  while (size > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::string serialize_model(const Model& model) {
  Writer p;
  const Shape in = model.input_shape();
  p.put<std::int32_t>(in.h);
  p.put<std::int32_t>(in.w);
  p.put<std::int32_t>(in.c);
  p.put<std::uint64_t>(model.seed());
  p.put<std::uint32_t>(static_cast<std::uint32_t>(model.specs().size()));
  for (const auto& s : model.specs()) {
    p.put<std::uint32_t>(static_cast<std::uint32_t>(s.kind));
    p.put<std::int32_t>(s.filters);
    p.put<std::int32_t>(s.kernel);
    p.put<std::int32_t>(s.pool);
    p.put<std::int32_t>(s.units);
    p.put<std::uint32_t>(static_cast<std::uint32_t>(s.activation));
    p.put<double>(s.rate);
    p.put<double>(s.momentum);
    p.put<double>(s.epsilon);
    p.put_string(s.name);
  }
  const auto params = model.parameters();
  p.put<std::uint32_t>(static_cast<std::uint32_t>(params.size()));
  for (const auto* t : params) {
    p.put_string(t->name);
    p.put<std::uint8_t>(t->trainable ? 1 : 0);
    p.put_doubles(t->value);
  }

  Writer h;
  h.str().append(kMagic, sizeof(kMagic));
  h.put<std::uint32_t>(kModelFormatVersion);
  h.put<std::uint32_t>(0);
  h.put<std::uint64_t>(p.str().size());
  h.put<std::uint32_t>(crc_of(p.str().data(), p.str().size()));
  h.put<std::uint32_t>(0);
  return h.str() + p.str();
}

ModelFileHeader read_model_header(const std::string& bytes) {
  if (bytes.size() < kModelHeaderSize) throw TruncatedFile("model file shorter than its header");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw ModelFormatError("not a model container (bad magic)");
  }
  Reader r(bytes.data() + sizeof(kMagic), kModelHeaderSize - sizeof(kMagic));
  ModelFileHeader hdr;
  hdr.version = r.get<std::uint32_t>();
  r.get<std::uint32_t>();
  hdr.payload_size = r.get<std::uint64_t>();
  hdr.payload_crc32 = r.get<std::uint32_t>();
  return hdr;
}

Model deserialize_model(const std::string& bytes) {
  const ModelFileHeader hdr = read_model_header(bytes);
  if (hdr.version != kModelFormatVersion) {
    throw VersionMismatch("model format version " + std::to_string(hdr.version) +
                          ", expected " + std::to_string(kModelFormatVersion));
  }
  if (bytes.size() - kModelHeaderSize < hdr.payload_size) {
    throw TruncatedFile("model payload truncated: " +
                        std::to_string(bytes.size() - kModelHeaderSize) + " of " +
                        std::to_string(hdr.payload_size) + " bytes");
  }
  const char* payload = bytes.data() + kModelHeaderSize;
  if (crc_of(payload, hdr.payload_size) != hdr.payload_crc32) {
    throw ChecksumMismatch("model payload checksum mismatch");
  }

  Reader r(payload, hdr.payload_size);
  Shape in;
  in.n = 1;
  in.h = r.get<std::int32_t>();
  in.w = r.get<std::int32_t>();
  in.c = r.get<std::int32_t>();
  const auto seed = r.get<std::uint64_t>();
  const auto n_layers = r.get<std::uint32_t>();
  std::vector<LayerSpec> specs;
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    LayerSpec s;
    const auto kind = r.get<std::uint32_t>();
    if (kind > static_cast<std::uint32_t>(LayerKind::dense)) {
      throw ModelFormatError("unknown layer kind " + std::to_string(kind));
    }
    s.kind = static_cast<LayerKind>(kind);
    s.filters = r.get<std::int32_t>();
    s.kernel = r.get<std::int32_t>();
    s.pool = r.get<std::int32_t>();
    s.units = r.get<std::int32_t>();
    const auto act = r.get<std::uint32_t>();
    if (act > static_cast<std::uint32_t>(Activation::relu)) {
      throw ModelFormatError("unknown activation " + std::to_string(act));
    }
    s.activation = static_cast<Activation>(act);
    s.rate = r.get<double>();
    s.momentum = r.get<double>();
    s.epsilon = r.get<double>();
    s.name = r.get_string();
    specs.push_back(std::move(s));
  }
  Model model(std::move(specs), in, seed);
  auto params = model.parameters();
  const auto n_tensors = r.get<std::uint32_t>();
  if (n_tensors != params.size()) {
    throw ModelFormatError("model file has " + std::to_string(n_tensors) +
                           " tensors, manifest implies " + std::to_string(params.size()));
  }
  for (auto* t : params) {
    const std::string name = r.get_string();
    const bool trainable = r.get<std::uint8_t>() != 0;
    std::vector<double> values = r.get_doubles();
    if (name != t->name || trainable != t->trainable || values.size() != t->value.size()) {
      throw ModelFormatError("tensor '" + name + "' does not match the layer manifest");
    }
    t->value = std::move(values);
  }
  if (!r.done()) throw ModelFormatError("trailing bytes after model payload");
  return model;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

Model load_model(const std::filesystem::path& path) {
  try {
    return deserialize_model(read_file(path));
  } catch (const ModelFormatError& e) {
    // Keep the concrete type for callers that distinguish truncation.
    if (dynamic_cast<const TruncatedFile*>(&e)) throw TruncatedFile(path.string() + ": " + e.what());
    if (dynamic_cast<const VersionMismatch*>(&e)) throw VersionMismatch(path.string() + ": " + e.what());
    if (dynamic_cast<const ChecksumMismatch*>(&e)) throw ChecksumMismatch(path.string() + ": " + e.what());
    throw ModelFormatError(path.string() + ": " + e.what());
  }
}

}  // namespace hrtf::net
