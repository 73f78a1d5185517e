#include "wordforge/cli/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <unordered_set>

namespace wf::cli {
namespace {

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

void put_u32_le(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

}  // namespace

const CheckpointArray* Checkpoint::find(std::string_view name) const {
  for (const auto& a : arrays)
    if (a.name == name) return &a;
  return nullptr;
}

double narrow_to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

void narrow_tensor(num::Tensor& t) {
  for (int64_t i = 0; i < t.size(); ++i) t.at(i) = narrow_to_f32(t.at(i));
}

void narrow_parameters(std::span<num::Parameter* const> params) {
  for (num::Parameter* p : params) narrow_tensor(p->value);
}

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  nlohmann::json manifest = nlohmann::json::array();
  int64_t offset = 0;
  for (const auto& a : c.arrays) {
    if (a.name.empty()) throw std::runtime_error(path + ": cannot save an unnamed array");
    manifest.push_back({{"name", a.name},
                        {"shape", a.values.shape()},
                        {"dtype", "f32"},
                        {"offset", offset}});
    offset += a.values.size() * 4;
  }
  nlohmann::json header = {{"format_version", kCheckpointVersion},
                           {"config", c.config},
                           {"alphabets", c.alphabets},
                           {"arrays", manifest}};
  const std::string head = header.dump();

  std::string blob;
  blob.reserve(8 + head.size() + static_cast<size_t>(offset));
  blob.append(kCheckpointMagic, 4);
  put_u32_le(blob, static_cast<uint32_t>(head.size()));
  blob += head;
  for (const auto& a : c.arrays) {
    for (int64_t i = 0; i < a.values.size(); ++i) {
      const float f = static_cast<float>(a.values.at(i));
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_u32_le(blob, bits);
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error(path + ": cannot open for writing");
  f.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  f.flush();
  if (!f) throw std::runtime_error(path + ": write failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot open checkpoint");
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  if (bytes.size() < 8) throw std::runtime_error(path + ": truncated checkpoint (missing header)");
  if (std::memcmp(bytes.data(), kCheckpointMagic, 3) != 0)
    throw std::runtime_error(path + ": not a wordforge checkpoint");
  if (bytes[3] != kCheckpointMagic[3])
    throw std::runtime_error(path + ": unsupported checkpoint version '" + bytes.substr(3, 1) +
                             "'");

  const uint32_t head_len = get_u32_le(reinterpret_cast<const unsigned char*>(bytes.data()) + 4);
  if (bytes.size() < 8 + static_cast<size_t>(head_len))
    throw std::runtime_error(path + ": truncated checkpoint header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(8, head_len));
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": malformed checkpoint header: " + one_line(e.what()));
  }

  const int version = header.value("format_version", -1);
  if (version != kCheckpointVersion)
    throw std::runtime_error(path + ": unsupported checkpoint version " + std::to_string(version));

  Checkpoint c;
  struct Entry {
    std::string name;
    num::Shape shape;
    int64_t count = 0;
  };
  std::vector<Entry> entries;
  try {
    c.config = header.at("config");
    c.alphabets = header.at("alphabets").get<std::vector<text::Alphabet>>();
    int64_t expect_offset = 0;
    std::unordered_set<std::string> seen;
    for (const auto& j : header.at("arrays")) {
      Entry e;
      e.name = j.at("name").get<std::string>();
      e.shape = j.at("shape").get<num::Shape>();
      if (!seen.insert(e.name).second)
        throw std::runtime_error("duplicate array name " + e.name);
      const std::string dtype = j.at("dtype").get<std::string>();
      if (dtype != "f32")
        throw std::runtime_error("array " + e.name + ": unsupported dtype " + dtype);
      e.count = 1;
      for (int64_t d : e.shape) {
        if (d <= 0) throw std::runtime_error("array " + e.name + ": invalid dimension");
        e.count *= d;
      }
      if (j.at("offset").get<int64_t>() != expect_offset)
        throw std::runtime_error("array " + e.name + ": manifest offset mismatch");
      expect_offset += e.count * 4;
      entries.push_back(std::move(e));
    }
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": malformed checkpoint header: " + one_line(e.what()));
  }

  // Manifest is sane; now hold it against the actual byte count.
  const size_t data_start = 8 + head_len;
  const size_t avail = bytes.size() - data_start;
  size_t used = 0;
  for (const auto& e : entries) {
    used += static_cast<size_t>(e.count) * 4;
    if (used > avail)
      throw std::runtime_error(path + ": truncated checkpoint: array " + e.name + " incomplete");
  }
  if (used != avail)
    throw std::runtime_error(path + ": checkpoint has " + std::to_string(avail - used) +
                             " trailing bytes after the last array");

  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data()) + data_start;
  for (const auto& e : entries) {
    num::Tensor t(e.shape);
    for (int64_t i = 0; i < e.count; ++i) {
      const uint32_t bits = get_u32_le(p + 4 * i);
      float fv;
      std::memcpy(&fv, &bits, 4);
      t.at(i) = static_cast<double>(fv);
    }
    p += 4 * e.count;
    c.arrays.push_back({e.name, std::move(t)});
  }
  return c;
}

}  // namespace wf::cli
