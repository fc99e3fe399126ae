#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "crasp/errors.hpp"

namespace crasp::rt {

inline const std::string kSos = "$";

struct FixedPrecision {
  int bits = 24;  // fractional bits
  bool operator==(const FixedPrecision&) const = default;
};

// Nearest multiple of 2^-bits, ties to even. Idempotent; |round(x)-x| <= 2^-bits-1.
double round_fixed(double x, FixedPrecision fp);

using Mat = std::vector<std::vector<double>>;  // row-major

// Translation-invariant positional logit table: value at key/query distance
// d = i - j >= 0. Zero beyond the stored radius (LOCAL).
struct PositionalLogitFn {
  std::vector<double> by_distance;  // index = distance; empty means identically 0

  double at(std::int64_t d) const {
    return (d >= 0 && d < static_cast<std::int64_t>(by_distance.size()))
               ? by_distance[static_cast<std::size_t>(d)]
               : 0.0;
  }
  std::int64_t radius() const {
    for (std::int64_t d = static_cast<std::int64_t>(by_distance.size()) - 1; d >= 0; --d)
      if (by_distance[static_cast<std::size_t>(d)] != 0.0) return d;
    return 0;
  }
  bool operator==(const PositionalLogitFn&) const = default;
};

// p_r = table[(r-1) mod period] for rows r >= 1 (PERIODIC).
struct PeriodicEncoding {
  std::int64_t period = 1;
  Mat table;  // period x width
  bool operator==(const PeriodicEncoding&) const = default;
};

struct Mlp {
  Mat A;               // dff x width
  std::vector<double> b;  // dff
  Mat B;               // width x dff
  std::string acts;    // per hidden unit: 'R' (ReLU) or 'H' (Heaviside)
  int dff() const { return static_cast<int>(acts.size()); }
  bool operator==(const Mlp&) const = default;
};

struct Head {
  Mat K, Q, V;  // width x width
  PositionalLogitFn phi;
  bool operator==(const Head&) const = default;
};

struct Layer {
  std::vector<Head> heads;
  Mlp mlp;
  bool operator==(const Layer&) const = default;
};

struct LimitTransformer {
  std::string name;
  std::vector<std::string> symbols;  // alphabet; SOS "$" excluded, embedding row = symbols.size()
  int width = 0;
  int out_dim = 0;
  Mat embed;  // (|symbols|+1) x width
  PeriodicEncoding enc;
  std::vector<Layer> layers;
  Mat unembed;  // out_dim x width
  FixedPrecision fp{24};
  int param_bits = 24;
  bool empty_accepts = false;
  std::vector<std::string> metadata;  // opaque lines (channel plan etc.), preserved verbatim

  int depth() const { return static_cast<int>(layers.size()); }
  int heads() const { return layers.empty() ? 0 : static_cast<int>(layers[0].heads.size()); }
  int symbol_index(std::string_view s) const {
    for (std::size_t k = 0; k < symbols.size(); ++k)
      if (symbols[k] == s) return static_cast<int>(k);
    return -1;
  }
  bool operator==(const LimitTransformer&) const = default;
};

void validate(const LimitTransformer& t);  // throws DimensionMismatch

struct ActivationTensor {
  std::int64_t rows = 0;
  int width = 0;
  bool saturated = false;     // some exp argument hit the clamp limit
  std::vector<Mat> y;         // [layer 0..L][row][chan]; Full modes only
  std::vector<Mat> attn;      // attention deltas per layer; attention mode only
  Mat final_y;                // rows x width (always)
  Mat outputs;                // rows x out_dim (always)
};

enum class Record { OutputsOnly, Full, FullWithAttention };

// exp argument clamp; saturation is reported instead of producing infinities
inline constexpr double kExpClampLimit = 700.0;

// Precomputes an execution plan (sparse views, zero-K/Q detection) so that a
// net can be run over many strings cheaply. Immutable and thread-safe.
class Forward {
 public:
  explicit Forward(const LimitTransformer& t);
  ~Forward();
  Forward(Forward&&) noexcept;

  // tokens must start with SOS and contain it nowhere else
  ActivationTensor run(const std::vector<std::string>& tokens, std::int64_t offset,
                       Record mode = Record::OutputsOnly) const;
  bool accepts(const std::vector<std::string>& word) const;  // at offset 0
  const LimitTransformer& net() const { return *t_; }

 private:
  struct Plan;
  const LimitTransformer* t_;
  std::unique_ptr<Plan> plan_;
};

ActivationTensor forward(const LimitTransformer& t, const std::vector<std::string>& tokens,
                         std::int64_t offset, Record mode = Record::OutputsOnly);
bool accepts_net(const LimitTransformer& t, const std::vector<std::string>& word);

std::string serialize(const LimitTransformer& t);
LimitTransformer deserialize(const std::string& text);

struct RegBreakdown {
  double size_term = 0;       // L + H + d
  double precision_term = 0;  // parameter bits + logit bits
  double max_linf = 0;        // over all parameter matrices/vectors incl. encodings
  std::int64_t min_period = 1;
  double phi_energy = 0;      // max over (l,h) of sum_d phi(d)^2
  double total = 0;
  std::string to_text() const;
};

RegBreakdown reg_infinity(const LimitTransformer& t);

}  // namespace crasp::rt
