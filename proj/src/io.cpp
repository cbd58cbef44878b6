// Copyright 2026 The nestpool Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nestpool/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "nestpool/error.hpp"
#include "nestpool/random.hpp"

namespace nestpool {

namespace {

using HeaderFields = std::map<std::string, std::string>;

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

std::uint64_t get_u64(std::string_view bytes, std::size_t pos) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) {
    v |= std::uint64_t{static_cast<unsigned char>(bytes[pos + static_cast<std::size_t>(b)])}
         << (8 * b);
  }
  return v;
}

std::uint32_t get_u32(std::string_view bytes, std::size_t pos) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) {
    v |= std::uint32_t{static_cast<unsigned char>(bytes[pos + static_cast<std::size_t>(b)])}
         << (8 * b);
  }
  return v;
}

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw FormatError("bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::size_t> parse_size_list(std::string_view text, std::string_view what) {
  std::vector<std::size_t> out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(static_cast<std::size_t>(parse_u64(text.substr(0, comma), what)));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return out;
}

std::string encode(const HeaderFields& fields, const std::vector<const std::vector<double>*>& arrays) {
  std::string header;
  for (const auto& [k, v] : fields) header += k + "=" + v + "\n";
  std::string out(kCheckpointMagic);
  const std::size_t payload_start = out.size();
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  for (const auto* array : arrays) {
    for (double v : *array) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  const std::uint64_t checksum = fnv1a64(out.data() + payload_start, out.size() - payload_start);
  put_u64(out, checksum);
  return out;
}

struct Decoded {
  HeaderFields fields;
  std::string_view arrays;
};

Decoded decode(std::string_view bytes, std::string_view expected_type) {
  const std::size_t magic = kCheckpointMagic.size();
  if (bytes.size() < magic + 4 + 8 || bytes.substr(0, magic) != kCheckpointMagic) {
    throw FormatError("not a checkpoint file (bad magic)");
  }
  const std::uint64_t stored = get_u64(bytes, bytes.size() - 8);
  const std::uint64_t actual = fnv1a64(bytes.data() + magic, bytes.size() - magic - 8);
  if (stored != actual) throw FormatError("checkpoint checksum mismatch");
  const std::size_t header_len = get_u32(bytes, magic);
  const std::size_t header_start = magic + 4;
  if (header_start + header_len > bytes.size() - 8) throw FormatError("truncated checkpoint header");

  Decoded d;
  std::string_view header = bytes.substr(header_start, header_len);
  while (!header.empty()) {
    const auto nl = header.find('\n');
    if (nl == std::string_view::npos) throw FormatError("unterminated checkpoint header line");
    const std::string_view line = header.substr(0, nl);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw FormatError("bad checkpoint header line");
    d.fields.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
    header = header.substr(nl + 1);
  }
  if (d.fields["format"] != std::to_string(kCheckpointVersion)) {
    throw FormatError("unsupported checkpoint format version '" + d.fields["format"] + "'");
  }
  if (d.fields["type"] != expected_type) {
    throw FormatError("expected a " + std::string(expected_type) + " checkpoint, got '" +
                      d.fields["type"] + "'");
  }
  d.arrays = bytes.substr(header_start + header_len,
                          bytes.size() - 8 - header_start - header_len);
  return d;
}

std::vector<double> read_array(std::string_view& arrays, std::size_t count) {
  if (arrays.size() < count * 8) throw FormatError("checkpoint arrays are truncated");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = std::bit_cast<double>(get_u64(arrays, 8 * i));
  arrays = arrays.substr(count * 8);
  return out;
}

const std::string& field(const HeaderFields& fields, const std::string& key) {
  const auto it = fields.find(key);
  if (it == fields.end()) throw FormatError("checkpoint header lacks '" + key + "'");
  return it->second;
}

ParamArrays read_groups(std::string_view arrays, const KindCounts& counts) {
  ParamArrays groups;
  for (ParamKind kind : kParamKinds) groups[kind] = read_array(arrays, counts[kind]);
  if (!arrays.empty()) throw FormatError("trailing bytes after checkpoint arrays");
  return groups;
}

ModelSpec stored_architecture(const std::string& arch_id) {
  try {
    return parse_architecture(arch_id);
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("stored architecture: ") + e.what());
  }
}

}  // namespace

std::string format_counts(const KindCounts& counts) {
  return std::to_string(counts[ParamKind::weight]) + "," +
         std::to_string(counts[ParamKind::bias]) + "," +
         std::to_string(counts[ParamKind::scale]);
}

KindCounts parse_counts(std::string_view text) {
  const auto values = parse_size_list(text, "group sizes");
  if (values.size() != 3) throw FormatError("expected three group sizes, got '" + std::string(text) + "'");
  KindCounts counts;
  counts[ParamKind::weight] = values[0];
  counts[ParamKind::bias] = values[1];
  counts[ParamKind::scale] = values[2];
  return counts;
}

std::string encode_model(const Model& model) {
  check_shapes(model);
  const HeaderFields fields{{"format", std::to_string(kCheckpointVersion)},
                            {"type", "model"},
                            {"arch", model.spec.arch_id},
                            {"counts", format_counts(model.spec.param_counts())}};
  return encode(fields, {&model.params[ParamKind::weight], &model.params[ParamKind::bias],
                         &model.params[ParamKind::scale]});
}

Model decode_model(std::string_view bytes) {
  const Decoded d = decode(bytes, "model");
  Model model{stored_architecture(field(d.fields, "arch")), {}};
  const KindCounts counts = parse_counts(field(d.fields, "counts"));
  if (!(counts == model.spec.param_counts())) {
    throw FormatError("checkpoint counts do not match architecture " + model.spec.arch_id);
  }
  model.params = read_groups(d.arrays, counts);
  return model;
}

std::string encode_pool(const ParamPool& pool) {
  const HeaderFields fields{{"format", std::to_string(kCheckpointVersion)},
                            {"type", "pool"},
                            {"sizes", format_counts(pool.sizes())}};
  return encode(fields, {&pool.group(ParamKind::weight), &pool.group(ParamKind::bias),
                         &pool.group(ParamKind::scale)});
}

ParamPool decode_pool(std::string_view bytes) {
  const Decoded d = decode(bytes, "pool");
  return ParamPool(read_groups(d.arrays, parse_counts(field(d.fields, "sizes"))));
}

std::string encode_tensor(const Tensor& tensor) {
  std::size_t total = 1;
  std::string shape;
  for (std::size_t i = 0; i < tensor.shape.size(); ++i) {
    total *= tensor.shape[i];
    shape += (i ? "," : "") + std::to_string(tensor.shape[i]);
  }
  if (tensor.shape.empty() || total != static_cast<std::size_t>(tensor.data.size())) {
    throw InvalidArgument("tensor shape does not match its data");
  }
  const std::vector<double> flat(tensor.data.data(), tensor.data.data() + tensor.data.size());
  const HeaderFields fields{{"format", std::to_string(kCheckpointVersion)},
                            {"type", "tensor"},
                            {"shape", shape}};
  return encode(fields, {&flat});
}

Tensor decode_tensor(std::string_view bytes) {
  const Decoded d = decode(bytes, "tensor");
  Tensor t;
  t.shape = parse_size_list(field(d.fields, "shape"), "tensor shape");
  std::size_t cols = 1;
  for (std::size_t i = 1; i < t.shape.size(); ++i) cols *= t.shape[i];
  std::string_view arrays = d.arrays;
  const std::vector<double> flat = read_array(arrays, t.shape[0] * cols);
  if (!arrays.empty()) throw FormatError("trailing bytes after tensor data");
  t.data = Eigen::Map<const Matrix>(flat.data(), static_cast<Eigen::Index>(t.shape[0]),
                                    static_cast<Eigen::Index>(cols));
  return t;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

void save_model(const Model& model, const std::filesystem::path& path) {
  write_file(path, encode_model(model));
}
Model load_model(const std::filesystem::path& path) { return decode_model(read_file(path)); }
void save_pool(const ParamPool& pool, const std::filesystem::path& path) {
  write_file(path, encode_pool(pool));
}
ParamPool load_pool(const std::filesystem::path& path) { return decode_pool(read_file(path)); }
void save_tensor(const Tensor& tensor, const std::filesystem::path& path) {
  write_file(path, encode_tensor(tensor));
}
Tensor load_tensor(const std::filesystem::path& path) { return decode_tensor(read_file(path)); }

std::string format_key(const SecretKey& key) {
  std::string out;
  out += "v=" + std::to_string(key.v) + "\n";
  if (key.noise_seed) out += "noise_seed=" + std::to_string(*key.noise_seed) + "\n";
  out += "arch=" + key.arch_id + "\n";
  out += "pool_sizes=" + format_counts(key.pool_sizes) + "\n";
  out += std::string("permute=") + (key.permute ? "1" : "0") + "\n";
  return out;
}

SecretKey parse_key(std::string_view text) {
  SecretKey key;
  bool have_v = false, have_arch = false, have_sizes = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw FormatError("bad key line '" + std::string(line) + "'");
    const std::string_view name = line.substr(0, eq);
    const std::string_view value = line.substr(eq + 1);
    if (name == "v") {
      key.v = parse_u64(value, "v");
      have_v = true;
    } else if (name == "noise_seed") {
      key.noise_seed = parse_u64(value, "noise seed");
    } else if (name == "arch") {
      key.arch_id = std::string(value);
      stored_architecture(key.arch_id);
      have_arch = true;
    } else if (name == "pool_sizes") {
      key.pool_sizes = parse_counts(value);
      have_sizes = true;
    } else if (name == "permute") {
      if (value != "0" && value != "1") throw FormatError("permute must be 0 or 1");
      key.permute = value == "1";
    } else {
      throw FormatError("unknown key field '" + std::string(name) + "'");
    }
  }
  if (!have_v || !have_arch || !have_sizes) {
    throw FormatError("key file needs v, arch and pool_sizes");
  }
  return key;
}

void save_key(const SecretKey& key, const std::filesystem::path& path) {
  write_file(path, format_key(key));
}

SecretKey load_key(const std::filesystem::path& path) { return parse_key(read_file(path)); }

std::string format_run_log(const RunLog& log) {
  std::string out;
  for (const EpochRecord& r : log.records) {
    const nlohmann::ordered_json j = {
        {"epoch", r.epoch}, {"task", r.task}, {"loss", r.loss}, {"metric", r.metric}};
    out += j.dump() + "\n";
  }
  for (std::size_t e = 0; e < log.pool_snapshots.size(); ++e) {
    const nlohmann::ordered_json j = {{"epoch", e + 1}, {"pool_checksum", log.pool_snapshots[e]}};
    out += j.dump() + "\n";
  }
  out += nlohmann::ordered_json{{"termination", log.termination}}.dump() + "\n";
  return out;
}

RunLog parse_run_log(std::string_view text) {
  RunLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      if (j.contains("termination")) {
        log.termination = j.at("termination").get<std::string>();
      } else if (j.contains("pool_checksum")) {
        log.pool_snapshots.push_back(j.at("pool_checksum").get<std::uint64_t>());
      } else {
        log.records.push_back({j.at("epoch").get<std::size_t>(), j.at("task").get<std::string>(),
                               j.at("loss").get<double>(), j.at("metric").get<double>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("bad run log line: ") + e.what());
    }
  }
  return log;
}

void save_run_log(const RunLog& log, const std::filesystem::path& path) {
  write_file(path, format_run_log(log));
}

RunLog load_run_log(const std::filesystem::path& path) { return parse_run_log(read_file(path)); }

void write_pgm(std::span<const double> pixels, std::size_t height, std::size_t width,
               const std::filesystem::path& path) {
  if (pixels.size() != height * width) throw InvalidArgument("PGM shape does not match data");
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  for (double v : pixels) {
    const double c = std::min(std::max(v, 0.0), 1.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
  }
  write_file(path, out);
}

}  // namespace nestpool
