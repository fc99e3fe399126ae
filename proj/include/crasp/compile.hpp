#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crasp/dsl.hpp"
#include "crasp/runtime.hpp"

namespace crasp::comp {

// Channel assignment for one lowered operation. Boolean home channels carry
// exactly {0,1}; Count home channels carry c/(t+1) at row t+1.
struct OpChannel {
  std::string name;
  dsl::Sort sort = dsl::Sort::Boolean;
  int channel = -1;
  std::string gadget;
  std::vector<int> scratch;
  double bound = 1.0;  // static bound on |value| for Count channels
};

struct ChannelPlan {
  int width = 0;
  int tok_base = 0;  // one channel per alphabet symbol, starting here
  int is_sos = -1;
  int const_true = -1;
  int one_count = -1;
  std::vector<std::pair<std::pair<std::int64_t, std::int64_t>, int>> positional;  // (m,r)->chan
  std::vector<std::pair<std::int64_t, int>> offset_guards;  // local offset magnitude -> chan
  std::vector<OpChannel> ops;  // aligned with the lowered (desugared) program
  int accept_channel = -1;
  std::vector<std::pair<std::string, int>> predict_channels;

  const OpChannel* find(std::string_view name) const {
    for (const auto& o : ops)
      if (o.name == name) return &o;
    return nullptr;
  }
  std::vector<std::string> to_metadata() const;
  static ChannelPlan from_metadata(const std::vector<std::string>& lines);
};

struct CompileReport {
  int layers = 0;
  int channels = 0;
  std::int64_t tau = 0;     // max local offset magnitude (phi radius)
  std::int64_t period = 1;  // lcm of positional moduli
  std::vector<std::pair<std::string, std::string>> gadgets;  // op -> gadget kind
  std::vector<std::string> notes;
  std::string to_text() const;
};

struct Compiled {
  rt::LimitTransformer net;
  ChannelPlan plan;
  CompileReport report;
  dsl::Program lowered;  // desugared core program; plan.ops aligns with lowered.ops
};

// Lowers a validated program to a Limit Transformer. The compiler desugars
// internally; the simulation relation holds for the lowered operations:
// Boolean op true at position t  <=>  channel value 1 at row t+1 (else 0);
// Count op value c               <=>  channel value c/(t+1) at row t+1.
Compiled compile(const dsl::Program& p, rt::FixedPrecision fp = {});

struct ChannelCheck {
  double max_bool_err = 0.0;
  double max_count_err = 0.0;
  std::vector<double> per_op_max;  // aligned with plan.ops
};

ChannelCheck check_channels(const Compiled& c, const std::vector<std::string>& w);
ChannelCheck check_channels(const dsl::Program& p, const rt::LimitTransformer& net,
                            const ChannelPlan& plan, const std::vector<std::string>& w);

}  // namespace crasp::comp
