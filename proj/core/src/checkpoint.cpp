// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include "licq/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace licq {

namespace {

const char kMagic[4] = {'L', 'I', 'C', 'Q'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

std::string shape_to_str(const std::vector<int64_t>& shape) {
  std::ostringstream os;
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  return shape.empty() ? "0" : os.str();
}

std::vector<int64_t> str_to_shape(const std::string& s) {
  std::vector<int64_t> shape;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t next = s.find('x', pos);
    if (next == std::string::npos) next = s.size();
    shape.push_back(std::stoll(s.substr(pos, next - pos)));
    pos = next + 1;
  }
  return shape;
}

}  // namespace

const std::string* CheckpointData::find_meta(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return &v;
  return nullptr;
}

const Tensor* CheckpointData::find_tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return &t;
  return nullptr;
}

void save_checkpoint_raw(const std::string& path, const CheckpointData& data) {
  std::ostringstream header;
  header << "schema_version = " << kCheckpointVersion << "\n";
  for (const auto& [k, v] : data.meta) {
    if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos)
      throw std::invalid_argument("checkpoint: metadata keys/values must be single-line");
    header << k << " = " << v << "\n";
  }
  uint64_t offset = 0;
  for (const auto& [name, t] : data.tensors) {
    if (name.find_first_of(" \n") != std::string::npos)
      throw std::invalid_argument("checkpoint: tensor names must not contain spaces");
    const uint64_t nbytes = static_cast<uint64_t>(t.size()) * sizeof(double);
    header << "tensor " << name << " f64 " << shape_to_str(t.shape()) << " " << offset << " "
           << nbytes << "\n";
    offset += nbytes;
  }
  const std::string h = header.str();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot write " + path);
  os.write(kMagic, 4);
  write_pod<uint32_t>(os, kCheckpointVersion);
  write_pod<uint64_t>(os, static_cast<uint64_t>(h.size()));
  os.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (const auto& [name, t] : data.tensors)
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!os) throw std::runtime_error("checkpoint: short write to " + path);
}

CheckpointData load_checkpoint_raw(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  const uint32_t version = read_pod<uint32_t>(is);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: schema version mismatch (file " +
                             std::to_string(version) + ", expected " +
                             std::to_string(kCheckpointVersion) + ")");
  const uint64_t hlen = read_pod<uint64_t>(is);
  std::string header(hlen, '\0');
  is.read(header.data(), static_cast<std::streamsize>(hlen));
  if (!is) throw std::runtime_error("checkpoint: truncated header in " + path);

  CheckpointData data;
  struct Entry {
    std::string name, dtype;
    std::vector<int64_t> shape;
    uint64_t offset, nbytes;
  };
  std::vector<Entry> entries;
  std::istringstream hs(header);
  std::string line;
  while (std::getline(hs, line)) {
    if (line.empty()) continue;
    if (line.rfind("tensor ", 0) == 0) {
      std::istringstream ls(line);
      Entry e;
      std::string tag, shape;
      ls >> tag >> e.name >> e.dtype >> shape >> e.offset >> e.nbytes;
      if (!ls) throw std::runtime_error("checkpoint: malformed tensor entry: " + line);
      e.shape = str_to_shape(shape);
      if (e.dtype != "f64" && e.dtype != "f32")
        throw std::runtime_error("checkpoint: unsupported dtype " + e.dtype);
      const uint64_t width = e.dtype == "f64" ? 8 : 4;
      if (static_cast<uint64_t>(shape_numel(e.shape)) * width != e.nbytes)
        throw std::runtime_error("checkpoint: payload size mismatch for " + e.name);
      entries.push_back(std::move(e));
    } else {
      const size_t eq = line.find(" = ");
      if (eq == std::string::npos)
        throw std::runtime_error("checkpoint: malformed header line: " + line);
      const std::string key = line.substr(0, eq);
      const std::string value = line.substr(eq + 3);
      if (key != "schema_version") data.meta.emplace_back(key, value);
    }
  }

  const std::streampos payload_start = is.tellg();
  for (const auto& e : entries) {
    is.seekg(payload_start + static_cast<std::streamoff>(e.offset));
    Tensor t(e.shape);
    if (e.dtype == "f64") {
      is.read(reinterpret_cast<char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
    } else {
      std::vector<float> buf(static_cast<size_t>(t.size()));
      is.read(reinterpret_cast<char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
      for (int64_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(buf[static_cast<size_t>(i)]);
    }
    if (!is) throw std::runtime_error("checkpoint: truncated payload for " + e.name);
    data.tensors.emplace_back(e.name, std::move(t));
  }
  return data;
}

QuantizerState QuantizerState::from_model(const QuantizedModel& qm) {
  QuantizerState s;
  s.assignment = qm.assignment;
  s.activation_bits = qm.activation_bits;
  s.leak = qm.leak;
  for (const auto& q : qm.weight_quantizers) {
    s.log_scales.push_back(q.log_scale->value);
    s.zero_points.push_back(q.zero_point->value);
  }
  return s;
}

namespace {

std::string bits_to_str(const std::vector<int>& bits) {
  std::ostringstream os;
  for (size_t i = 0; i < bits.size(); ++i) os << (i ? "," : "") << bits[i];
  return os.str();
}

std::vector<int> str_to_bits(const std::string& s) {
  std::vector<int> out;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t next = s.find(',', pos);
    if (next == std::string::npos) next = s.size();
    out.push_back(std::stoi(s.substr(pos, next - pos)));
    pos = next + 1;
  }
  return out;
}

}  // namespace

void save_checkpoint(const std::string& path, const LicModel& model,
                     const std::optional<QuantizerState>& quant,
                     const std::vector<std::pair<std::string, std::string>>& extra_meta,
                     const std::vector<std::pair<std::string, Tensor>>& extra_tensors) {
  CheckpointData data;
  data.meta.emplace_back("variant", variant_name(model.variant));
  data.meta.emplace_back("main_channels", std::to_string(model.widths.main_channels));
  data.meta.emplace_back("latent_channels", std::to_string(model.widths.latent_channels));
  data.meta.emplace_back("hyper_channels", std::to_string(model.widths.hyper_channels));
  data.meta.emplace_back("quality_index", std::to_string(model.quality_index));
  {
    std::ostringstream os;
    os.precision(17);
    os << model.lambda;
    data.meta.emplace_back("lambda", os.str());
  }
  data.meta.emplace_back("init_seed", std::to_string(model.init_seed));
  if (quant) {
    data.meta.emplace_back("quant.bits", bits_to_str(quant->assignment.bits));
    data.meta.emplace_back("quant.b_max", std::to_string(quant->assignment.b_max));
    {
      std::ostringstream os;
      os.precision(17);
      os << quant->assignment.beta_used;
      data.meta.emplace_back("quant.beta_used", os.str());
    }
    data.meta.emplace_back("quant.activation_bits", std::to_string(quant->activation_bits));
    data.meta.emplace_back("quant.weight_granularity", "per-channel");
    data.meta.emplace_back("quant.activation_mode", "dynamic-per-tensor");
    {
      std::ostringstream os;
      os.precision(17);
      os << quant->leak;
      data.meta.emplace_back("quant.leak", os.str());
    }
  }
  for (const auto& kv : extra_meta) data.meta.push_back(kv);

  const auto names = model.parameter_names();
  const auto params = model.parameters();
  for (size_t i = 0; i < params.size(); ++i) data.tensors.emplace_back(names[i], params[i]->value);
  if (quant) {
    for (size_t i = 0; i < quant->log_scales.size(); ++i) {
      data.tensors.emplace_back("quant.log_s." + std::to_string(i), quant->log_scales[i]);
      data.tensors.emplace_back("quant.z." + std::to_string(i), quant->zero_points[i]);
    }
  }
  for (const auto& kv : extra_tensors) data.tensors.push_back(kv);
  save_checkpoint_raw(path, data);
}

void save_checkpoint(const std::string& path, const QuantizedModel& qmodel,
                     const std::vector<std::pair<std::string, std::string>>& extra_meta) {
  save_checkpoint(path, qmodel.model, QuantizerState::from_model(qmodel), extra_meta);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  LoadedCheckpoint out;
  out.raw = load_checkpoint_raw(path);
  const CheckpointData& d = out.raw;

  auto need = [&](const char* key) -> const std::string& {
    const std::string* v = d.find_meta(key);
    if (!v) throw std::runtime_error(std::string("checkpoint: missing metadata ") + key);
    return *v;
  };

  WidthConfig widths;
  widths.main_channels = std::stoi(need("main_channels"));
  widths.latent_channels = std::stoi(need("latent_channels"));
  widths.hyper_channels = std::stoi(need("hyper_channels"));
  out.model = build_model(parse_variant(need("variant")), widths, std::stoi(need("quality_index")),
                          std::stoull(need("init_seed")));

  // Overwrite the freshly built parameters from the stored tensors.
  const auto names = out.model.parameter_names();
  const auto params = out.model.parameters();
  std::vector<std::string> known = names;
  for (size_t i = 0; i < params.size(); ++i) {
    const Tensor* t = d.find_tensor(names[i]);
    if (!t) throw std::runtime_error("checkpoint: missing tensor " + names[i]);
    if (!t->same_shape(params[i]->value))
      throw std::runtime_error("checkpoint: shape mismatch for " + names[i]);
    params[i]->value = *t;
  }

  const std::string* bits = d.find_meta("quant.bits");
  size_t quant_tensors = 0;
  if (bits) {
    QuantizerState q;
    q.assignment.bits = str_to_bits(*bits);
    q.assignment.b_max = std::stoi(need("quant.b_max"));
    q.assignment.beta_used = std::stod(need("quant.beta_used"));
    q.activation_bits = std::stoi(need("quant.activation_bits"));
    q.leak = std::stod(need("quant.leak"));
    for (size_t i = 0; i < q.assignment.bits.size(); ++i) {
      const Tensor* ls = d.find_tensor("quant.log_s." + std::to_string(i));
      const Tensor* zp = d.find_tensor("quant.z." + std::to_string(i));
      if (!ls || !zp) throw std::runtime_error("checkpoint: incomplete quantizer state");
      q.log_scales.push_back(*ls);
      q.zero_points.push_back(*zp);
    }
    quant_tensors = 2 * q.assignment.bits.size();
    out.quant = std::move(q);
  }

  // Anything that is neither a model parameter, quantizer state, nor
  // optimizer state is unknown and rejected.
  for (const auto& [name, t] : d.tensors) {
    (void)t;
    bool ok = std::find(known.begin(), known.end(), name) != known.end();
    ok = ok || name.rfind("quant.log_s.", 0) == 0 || name.rfind("quant.z.", 0) == 0;
    ok = ok || name.rfind("opt.", 0) == 0;
    if (!ok) throw std::runtime_error("checkpoint: unknown tensor name " + name);
  }
  (void)quant_tensors;
  return out;
}

QuantizedModel LoadedCheckpoint::to_quantized() const {
  if (!quant) throw std::runtime_error("checkpoint carries no quantizer state");
  QuantizedModel qm;
  qm.model = model.clone();
  qm.assignment = quant->assignment;
  qm.activation_bits = quant->activation_bits;
  qm.leak = quant->leak;
  for (size_t i = 0; i < quant->log_scales.size(); ++i)
    qm.weight_quantizers.push_back({make_param(quant->log_scales[i]),
                                    make_param(quant->zero_points[i]),
                                    quant->assignment.bits[i]});
  qm.validate();
  return qm;
}

}  // namespace licq
