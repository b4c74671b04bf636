/* Copyright 2026 The binorm Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "binorm/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <set>
#include <string>

#include "binorm/errors.hpp"

namespace binorm {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

constexpr char kMagic[8] = {'B', 'I', 'N', 'O', 'R', 'M', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  template <typename T>
  void pod(T v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.append(p, sizeof(T));
  }
  void bytes(std::string_view s) {
    pod(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void tensors(const std::vector<ConstTensorRef>& list) {
    pod(static_cast<std::uint32_t>(list.size()));
    for (const auto& t : list) {
      bytes(t.name);
      pod(static_cast<std::int64_t>(t.value.rows()));
      pod(static_cast<std::int64_t>(t.value.cols()));
      buf_.append(reinterpret_cast<const char*>(t.value.data()),
                  static_cast<std::size_t>(t.value.size()) * sizeof(double));
    }
  }
  std::string& buffer() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes() {
    const auto n = pod<std::uint32_t>();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  // Reads a tensor group into `dest`, which must match by name and shape.
  void tensors(std::vector<TensorRef> dest) {
    const auto count = pod<std::uint32_t>();
    if (count != dest.size()) {
      throw ShapeError("checkpoint holds " + std::to_string(count) + " tensors, model has " +
                       std::to_string(dest.size()));
    }
    for (auto& t : dest) {
      const std::string name = bytes();
      const auto rows = pod<std::int64_t>();
      const auto cols = pod<std::int64_t>();
      if (name != t.name || rows != t.value.rows() || cols != t.value.cols()) {
        throw ShapeError("checkpoint tensor " + name + " (" + std::to_string(rows) + "x" +
                         std::to_string(cols) + ") does not match model tensor " + t.name);
      }
      const std::size_t n = static_cast<std::size_t>(rows * cols) * sizeof(double);
      need(n);
      std::memcpy(t.value.data(), data_.data() + pos_, n);
      pos_ += n;
    }
  }
  [[nodiscard]] bool done() const noexcept { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw ChecksumError("checkpoint payload is truncated");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::string_view bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

Eigen::Index dim(const nlohmann::json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 1) {
    throw ValidationError(std::string(what) + " must be a positive integer");
  }
  return j.get<Eigen::Index>();
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) throw ValidationError("unknown key '" + key + "' in " + where);
  }
}

}  // namespace

std::string crc32_hex(std::string_view bytes) {
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08x", crc_of(bytes));
  return buf;
}

std::string spec_to_json(const ModelSpec& spec) {
  nlohmann::ordered_json j;
  j["input"] = {spec.in_features, spec.in_steps};
  j["normalizer"] = to_string(spec.normalizer);
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (const auto& l : spec.layers) {
    nlohmann::ordered_json lj;
    lj["type"] = to_string(l.type);
    lj["out"] = {l.out_rows, l.out_cols};
    lj["activation"] = to_string(l.activation);
    layers.push_back(lj);
  }
  j["layers"] = layers;
  j["head"] = to_string(spec.head);
  j["bn_momentum"] = spec.bn_momentum;
  return j.dump();
}

ModelSpec spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("model spec must be an object");
  reject_unknown(j, {"input", "normalizer", "layers", "head", "bn_momentum", "preset"}, "model");

  Eigen::Index features = 40;
  Eigen::Index steps = 10;
  if (j.contains("input")) {
    const auto& in = j["input"];
    if (!in.is_array() || in.size() != 2) throw ValidationError("model.input must be [D, H]");
    features = dim(in[0], "model.input[0]");
    steps = dim(in[1], "model.input[1]");
  }
  const NormalizerKind norm =
      parse_normalizer(j.value("normalizer", std::string(to_string(NormalizerKind::kBin))));
  const HeadKind head = parse_head(j.value("head", std::string("softmax3")));

  ModelSpec spec;
  if (j.contains("preset")) {
    if (j.contains("layers")) throw ValidationError("model: give either preset or layers");
    const std::string preset = j["preset"].get<std::string>();
    if (preset == "C") {
      spec = ModelSpec::c_shape(norm, head, features, steps);
    } else if (preset == "B") {
      spec = ModelSpec::b_shape(norm, head, features, steps);
    } else {
      throw ValidationError("model.preset must be \"C\" or \"B\"");
    }
  } else {
    spec.in_features = features;
    spec.in_steps = steps;
    spec.normalizer = norm;
    spec.head = head;
    if (!j.contains("layers") || !j["layers"].is_array()) {
      throw ValidationError("model needs a preset or a layers array");
    }
    for (const auto& lj : j["layers"]) {
      if (!lj.is_object()) throw ValidationError("model.layers entries must be objects");
      reject_unknown(lj, {"type", "out", "activation"}, "model.layers[]");
      LayerSpec l;
      l.type = parse_layer_type(lj.at("type").get<std::string>());
      const auto& out = lj.at("out");
      if (!out.is_array() || out.size() != 2) throw ValidationError("layer out must be [rows, cols]");
      l.out_rows = dim(out[0], "layer out rows");
      l.out_cols = dim(out[1], "layer out cols");
      l.activation = parse_activation(lj.value("activation", std::string("relu")));
      spec.layers.push_back(l);
    }
  }
  if (j.contains("bn_momentum")) {
    if (!j["bn_momentum"].is_number()) throw ValidationError("bn_momentum must be a number");
    spec.bn_momentum = j["bn_momentum"].get<double>();
  }
  spec.validate();
  return spec;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  Writer w;
  w.buffer().append(kMagic, sizeof(kMagic));
  w.pod(kVersion);
  w.bytes(spec_to_json(ckpt.spec));
  w.bytes(ckpt.config_hash);
  w.pod(static_cast<std::int32_t>(ckpt.epoch));
  w.pod(static_cast<std::uint8_t>(ckpt.partial ? 1 : 0));
  const auto* fitted = std::get_if<StaticNormalizer>(&ckpt.params.normalizer);
  w.pod(static_cast<std::uint8_t>(fitted && fitted->fitted ? 1 : 0));
  w.pod(ckpt.horizon_scale);
  w.pod(static_cast<std::int64_t>(ckpt.optimizer.step));
  w.tensors(tensors(ckpt.params));
  w.tensors(tensors(ckpt.optimizer.first));
  w.tensors(tensors(ckpt.optimizer.second));
  const std::uint32_t crc = crc_of(w.buffer());
  w.pod(crc);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  if (!f) throw IoError("write to " + path.string() + " failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint " + path.string());
  const std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (data.size() < sizeof(kMagic) + 8 || std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) {
    throw ChecksumError(path.string() + " is not a binorm checkpoint");
  }
  const std::string_view body(data.data(), data.size() - 4);
  std::uint32_t stored = 0;
  std::memcpy(&stored, data.data() + data.size() - 4, 4);
  if (crc_of(body) != stored) {
    throw ChecksumError("checkpoint " + path.string() + " failed its CRC-32 check");
  }

  Reader r(body.substr(sizeof(kMagic)));
  if (r.pod<std::uint32_t>() != kVersion) throw ChecksumError("unsupported checkpoint version");
  Checkpoint ckpt;
  ckpt.spec = spec_from_json(r.bytes());
  ckpt.config_hash = r.bytes();
  ckpt.epoch = r.pod<std::int32_t>();
  ckpt.partial = r.pod<std::uint8_t>() != 0;
  const bool fitted = r.pod<std::uint8_t>() != 0;
  ckpt.horizon_scale = r.pod<double>();
  ckpt.params = ModelParams::initial(ckpt.spec, 0);
  ckpt.optimizer = adam_init(ckpt.params);
  ckpt.optimizer.step = r.pod<std::int64_t>();
  r.tensors(tensors(ckpt.params));
  r.tensors(tensors(ckpt.optimizer.first));
  r.tensors(tensors(ckpt.optimizer.second));
  if (!r.done()) throw ChecksumError("checkpoint has trailing bytes");
  if (auto* s = std::get_if<StaticNormalizer>(&ckpt.params.normalizer)) s->fitted = fitted;
  return ckpt;
}

}  // namespace binorm
