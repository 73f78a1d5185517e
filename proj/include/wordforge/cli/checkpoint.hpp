#pragma once

#include "json.hpp"
#include "wordforge/num/tape.hpp"
#include "wordforge/num/tensor.hpp"
#include "wordforge/text/alphabet.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wf::cli {

inline constexpr char kCheckpointMagic[4] = {'C', 'W', 'F', '1'};
inline constexpr int kCheckpointVersion = 1;

struct CheckpointArray {
  std::string name;
  num::Tensor values;  // runtime doubles; stored as little-endian f32
};

// Self-describing model container. Binary layout: magic "CWF1", a 4-byte
// little-endian byte length, that many bytes of UTF-8 JSON header
// (format_version, config, alphabets, array manifest: name/shape/dtype/
// offset), then the arrays' raw little-endian IEEE-754 single-precision
// data, contiguous in manifest order. Offsets count from the end of the
// header.
struct Checkpoint {
  nlohmann::json config;
  std::vector<text::Alphabet> alphabets;
  std::vector<CheckpointArray> arrays;  // manifest order == file order

  const CheckpointArray* find(std::string_view name) const;
};

// Stored precision is single, runtime is double. Narrowing a model's
// parameters before saving makes the file reproduce in-memory behavior
// exactly; narrowing is idempotent.
double narrow_to_f32(double v);
void narrow_tensor(num::Tensor& t);
void narrow_parameters(std::span<num::Parameter* const> params);

void save_checkpoint(const Checkpoint& c, const std::string& path);

// Validates magic, version, and the manifest against the actual byte count
// before reading any array data. Throws std::runtime_error with a
// single-line message naming the offending array where applicable.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace wf::cli
