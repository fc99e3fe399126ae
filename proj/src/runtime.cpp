#include "crasp/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace crasp::rt {

double round_fixed(double x, FixedPrecision fp) {
  if (!std::isfinite(x)) throw NonFinite();
  double s = std::ldexp(x, fp.bits);
  // once the scaled value has no fractional part it is already a multiple
  if (!std::isfinite(s) || std::abs(s) >= 0x1p53) return x;
  double f = std::floor(s);
  double frac = s - f;  // exact: f and s share a binade below 2^53
  double r;
  if (frac > 0.5)
    r = f + 1;
  else if (frac < 0.5)
    r = f;
  else
    r = std::fmod(f, 2.0) == 0.0 ? f : f + 1;
  return std::ldexp(r, -fp.bits);
}

void validate(const LimitTransformer& t) {
  const std::size_t d = static_cast<std::size_t>(t.width);
  auto check_mat = [&](const Mat& m, std::size_t rows, std::size_t cols, const char* what) {
    if (m.size() != rows) throw DimensionMismatch(std::string(what) + ": wrong row count");
    for (const auto& r : m)
      if (r.size() != cols) throw DimensionMismatch(std::string(what) + ": wrong column count");
  };
  if (t.width <= 0) throw DimensionMismatch("width must be positive");
  check_mat(t.embed, t.symbols.size() + 1, d, "embed");
  if (t.enc.period < 1 ||
      t.enc.period != static_cast<std::int64_t>(t.enc.table.size()))
    throw DimensionMismatch("encoding period inconsistent with table");
  check_mat(t.enc.table, t.enc.table.size(), d, "encodings");
  const int H = t.heads();
  for (std::size_t l = 0; l < t.layers.size(); ++l) {
    const Layer& layer = t.layers[l];
    if (static_cast<int>(layer.heads.size()) != H)
      throw DimensionMismatch("layer " + std::to_string(l) + ": head count varies");
    for (const Head& h : layer.heads) {
      check_mat(h.K, d, d, "K");
      check_mat(h.Q, d, d, "Q");
      check_mat(h.V, d, d, "V");
    }
    const Mlp& m = layer.mlp;
    const std::size_t dff = static_cast<std::size_t>(m.dff());
    check_mat(m.A, dff, d, "A");
    if (m.b.size() != dff) throw DimensionMismatch("b: wrong length");
    check_mat(m.B, d, dff, "B");
    for (char c : m.acts)
      if (c != 'R' && c != 'H')
        throw DimensionMismatch("activation tag must be 'R' or 'H'");
  }
  check_mat(t.unembed, static_cast<std::size_t>(t.out_dim), d, "unembed");
  if (t.fp.bits < 1 || t.param_bits < 1) throw DimensionMismatch("precision must be >= 1");
}

// ---------------------------------------------------------------------------
// Execution plan

namespace {

struct SparseRow {  // one output channel of a sparse matrix
  int out = 0;
  std::vector<std::pair<int, double>> in;  // (channel, coef), descending channel
};

std::vector<SparseRow> sparse_rows(const Mat& m) {
  std::vector<SparseRow> rows;
  for (std::size_t r = 0; r < m.size(); ++r) {
    SparseRow row;
    row.out = static_cast<int>(r);
    for (std::size_t c = m[r].size(); c-- > 0;)
      if (m[r][c] != 0.0) row.in.emplace_back(static_cast<int>(c), m[r][c]);
    if (!row.in.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

bool all_zero(const Mat& m) {
  for (const auto& r : m)
    for (double v : r)
      if (v != 0.0) return false;
  return true;
}

struct HeadPlan {
  bool zero_kq = false;
  std::vector<SparseRow> v_rows;   // sparse V
  const Head* head = nullptr;
};

struct UnitPlan {
  std::vector<std::pair<int, double>> a_terms;  // descending channel index
  double bias = 0;
  bool heaviside = false;
  std::vector<std::pair<int, double>> b_out;  // (output channel, coef)
};

struct LayerPlan {
  std::vector<HeadPlan> heads;
  std::vector<UnitPlan> units;
};

}  // namespace

struct Forward::Plan {
  std::vector<LayerPlan> layers;
  std::vector<SparseRow> unembed;
};

Forward::Forward(const LimitTransformer& t) : t_(&t), plan_(new Plan) {
  validate(t);
  for (const Layer& layer : t.layers) {
    LayerPlan lp;
    for (const Head& h : layer.heads) {
      HeadPlan hp;
      hp.head = &h;
      hp.zero_kq = all_zero(h.K) || all_zero(h.Q);
      hp.v_rows = sparse_rows(h.V);
      lp.heads.push_back(std::move(hp));
    }
    const Mlp& m = layer.mlp;
    for (int u = 0; u < m.dff(); ++u) {
      UnitPlan up;
      up.bias = m.b[static_cast<std::size_t>(u)];
      up.heaviside = m.acts[static_cast<std::size_t>(u)] == 'H';
      for (std::size_t c = m.A[static_cast<std::size_t>(u)].size(); c-- > 0;) {
        double v = m.A[static_cast<std::size_t>(u)][c];
        if (v != 0.0) up.a_terms.emplace_back(static_cast<int>(c), v);
      }
      for (std::size_t o = 0; o < m.B.size(); ++o) {
        double v = m.B[o][static_cast<std::size_t>(u)];
        if (v != 0.0) up.b_out.emplace_back(static_cast<int>(o), v);
      }
      lp.units.push_back(std::move(up));
    }
    plan_->layers.push_back(std::move(lp));
  }
  plan_->unembed = sparse_rows(t.unembed);
}

Forward::~Forward() = default;
Forward::Forward(Forward&&) noexcept = default;

namespace {

double heaviside(double x) { return x >= 0.0 ? 1.0 : -1.0; }

// round_fixed(exp(log n * logit)) with clamping; reports saturation
double attention_weight(double logit, double log_n, FixedPrecision fp, bool* saturated) {
  double arg = log_n * logit;
  if (arg > kExpClampLimit) {
    arg = kExpClampLimit;
    *saturated = true;
  } else if (arg < -kExpClampLimit) {
    arg = -kExpClampLimit;
    *saturated = true;
  }
  return round_fixed(std::exp(arg), fp);
}

}  // namespace

ActivationTensor Forward::run(const std::vector<std::string>& tokens, std::int64_t offset,
                              Record mode) const {
  const LimitTransformer& t = *t_;
  if (tokens.empty() || tokens[0] != kSos)
    throw MalformedInput("input must start with SOS \"$\"");
  const std::int64_t n = static_cast<std::int64_t>(tokens.size());
  const int d = t.width;
  if (offset < 0) throw MalformedInput("offset must be non-negative");

  std::vector<int> tok(static_cast<std::size_t>(n));
  tok[0] = static_cast<int>(t.symbols.size());  // SOS embedding row
  for (std::int64_t r = 1; r < n; ++r) {
    const std::string& s = tokens[static_cast<std::size_t>(r)];
    if (s == kSos) throw MalformedInput("SOS occurs after position 1");
    int idx = t.symbol_index(s);
    if (idx < 0) throw MalformedInput("symbol '" + s + "' not in net alphabet");
    tok[static_cast<std::size_t>(r)] = idx;
  }

  ActivationTensor out;
  out.rows = n;
  out.width = d;

  // layer-0 activations; row index 0 of `cur` is row 1 (SOS)
  Mat cur(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(d), 0.0));
  for (std::int64_t r = 0; r < n; ++r) {
    const auto& emb = t.embed[static_cast<std::size_t>(tok[static_cast<std::size_t>(r)])];
    const auto& pos =
        t.enc.table[static_cast<std::size_t>((r + offset) % t.enc.period)];
    for (int c = 0; c < d; ++c)
      cur[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
          emb[static_cast<std::size_t>(c)] + pos[static_cast<std::size_t>(c)];
  }
  if (mode != Record::OutputsOnly) out.y.push_back(cur);

  const double log_n = std::log(static_cast<double>(n));
  Mat delta(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(d), 0.0));
  std::vector<double> vbuf(static_cast<std::size_t>(n));

  for (std::size_t l = 0; l < plan_->layers.size(); ++l) {
    const LayerPlan& lp = plan_->layers[l];
    for (auto& row : delta) std::fill(row.begin(), row.end(), 0.0);

    for (const HeadPlan& hp : lp.heads) {
      if (hp.v_rows.empty()) continue;  // zero value matrix contributes nothing
      const PositionalLogitFn& phi = hp.head->phi;
      if (hp.zero_kq) {
        // logits depend only on distance: per-distance weights, prefix sums
        const std::int64_t tau = static_cast<std::int64_t>(phi.by_distance.size());
        const double w_far = attention_weight(round_fixed(0.0, t.fp), log_n, t.fp, &out.saturated);
        std::vector<std::pair<std::int64_t, double>> corr;  // (distance, w - w_far), ascending d
        for (std::int64_t dd = 0; dd < tau; ++dd) {
          double w = attention_weight(round_fixed(phi.at(dd), t.fp), log_n, t.fp, &out.saturated);
          if (w != w_far) corr.emplace_back(dd, w - w_far);
        }
        // denominators (shared across output channels)
        std::vector<double> denom(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) {
          double s = 0.0;
          for (const auto& [dd, wc] : corr)
            if (dd <= i) s += wc;
          denom[static_cast<std::size_t>(i)] = s + w_far * static_cast<double>(i + 1);
          if (denom[static_cast<std::size_t>(i)] == 0.0)
            throw Error("attention weights all rounded to zero at a query row");
        }
        for (const SparseRow& vr : hp.v_rows) {
          for (std::int64_t j = 0; j < n; ++j) {
            double v = 0.0;
            for (const auto& [c, coef] : vr.in)
              v += coef * cur[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
            vbuf[static_cast<std::size_t>(j)] = v;
          }
          double prefix = 0.0;
          for (std::int64_t i = 0; i < n; ++i) {
            prefix += vbuf[static_cast<std::size_t>(i)];
            double num = 0.0;
            for (const auto& [dd, wc] : corr)
              if (dd <= i) num += wc * vbuf[static_cast<std::size_t>(i - dd)];
            num += w_far * prefix;
            delta[static_cast<std::size_t>(i)][static_cast<std::size_t>(vr.out)] +=
                num / denom[static_cast<std::size_t>(i)];
          }
        }
      } else {
        // general path: key/query projections then per-pair logits
        const Head& h = *hp.head;
        Mat kp(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(d)));
        Mat qp = kp, vp = kp;
        for (std::int64_t r = 0; r < n; ++r) {
          for (int a = 0; a < d; ++a) {
            double kv = 0, qv = 0, vv = 0;
            for (int c = 0; c < d; ++c) {
              double y = cur[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
              kv += h.K[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)] * y;
              qv += h.Q[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)] * y;
              vv += h.V[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)] * y;
            }
            kp[static_cast<std::size_t>(r)][static_cast<std::size_t>(a)] = kv;
            qp[static_cast<std::size_t>(r)][static_cast<std::size_t>(a)] = qv;
            vp[static_cast<std::size_t>(r)][static_cast<std::size_t>(a)] = vv;
          }
        }
        for (std::int64_t i = 0; i < n; ++i) {
          double denom = 0.0;
          std::vector<double> w(static_cast<std::size_t>(i + 1));
          for (std::int64_t j = 0; j <= i; ++j) {
            double dot = 0.0;
            for (int a = 0; a < d; ++a)
              dot += kp[static_cast<std::size_t>(j)][static_cast<std::size_t>(a)] *
                     qp[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)];
            double logit = round_fixed(dot + phi.at(i - j), t.fp);
            w[static_cast<std::size_t>(j)] =
                attention_weight(logit, log_n, t.fp, &out.saturated);
            denom += w[static_cast<std::size_t>(j)];
          }
          if (denom == 0.0)
            throw Error("attention weights all rounded to zero at a query row");
          for (int a = 0; a < d; ++a) {
            double num = 0.0;
            for (std::int64_t j = 0; j <= i; ++j)
              num += w[static_cast<std::size_t>(j)] *
                     vp[static_cast<std::size_t>(j)][static_cast<std::size_t>(a)];
            delta[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] += num / denom;
          }
        }
      }
    }

    // residual + attention
    for (std::int64_t r = 0; r < n; ++r)
      for (int c = 0; c < d; ++c)
        cur[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] +=
            delta[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    if (mode == Record::FullWithAttention) out.attn.push_back(delta);

    // MLP on the post-attention activations; all hidden units read the
    // pre-MLP row, then the B-writes apply. Dot order: bias first, then
    // terms by descending channel index (fixed for determinism).
    std::vector<double> hidden(lp.units.size());
    for (std::int64_t r = 0; r < n; ++r) {
      auto& row = cur[static_cast<std::size_t>(r)];
      for (std::size_t u = 0; u < lp.units.size(); ++u) {
        const UnitPlan& up = lp.units[u];
        double s = up.bias;
        for (const auto& [c, coef] : up.a_terms) s += coef * row[static_cast<std::size_t>(c)];
        hidden[u] = up.heaviside ? heaviside(s) : std::max(0.0, s);
      }
      for (std::size_t u = 0; u < lp.units.size(); ++u) {
        if (hidden[u] == 0.0) continue;
        for (const auto& [o, coef] : lp.units[u].b_out)
          row[static_cast<std::size_t>(o)] += coef * hidden[u];
      }
    }
    if (mode != Record::OutputsOnly) out.y.push_back(cur);
  }

  out.final_y = cur;
  out.outputs.assign(static_cast<std::size_t>(n),
                     std::vector<double>(static_cast<std::size_t>(t.out_dim), 0.0));
  for (const SparseRow& ur : plan_->unembed)
    for (std::int64_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (const auto& [c, coef] : ur.in)
        s += coef * cur[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      out.outputs[static_cast<std::size_t>(r)][static_cast<std::size_t>(ur.out)] = s;
    }
  return out;
}

bool Forward::accepts(const std::vector<std::string>& word) const {
  if (word.empty()) return t_->empty_accepts;
  std::vector<std::string> tokens;
  tokens.reserve(word.size() + 1);
  tokens.push_back(kSos);
  tokens.insert(tokens.end(), word.begin(), word.end());
  ActivationTensor act = run(tokens, 0, Record::OutputsOnly);
  return act.outputs.back().back() > 0.0;
}

ActivationTensor forward(const LimitTransformer& t, const std::vector<std::string>& tokens,
                         std::int64_t offset, Record mode) {
  return Forward(t).run(tokens, offset, mode);
}

bool accepts_net(const LimitTransformer& t, const std::vector<std::string>& word) {
  return Forward(t).accepts(word);
}

// ---------------------------------------------------------------------------
// Regularizer breakdown

namespace {

void linf(const Mat& m, double* acc) {
  for (const auto& r : m)
    for (double v : r) *acc = std::max(*acc, std::abs(v));
}

std::int64_t minimal_period(const PeriodicEncoding& enc) {
  const std::int64_t P = enc.period;
  for (std::int64_t cand = 1; cand <= P; ++cand) {
    bool ok = true;
    // the infinite sequence table[k mod P] must satisfy s[k] == s[k+cand]
    for (std::int64_t k = 0; ok && k < P * cand; ++k)
      if (enc.table[static_cast<std::size_t>(k % P)] !=
          enc.table[static_cast<std::size_t>((k + cand) % P)])
        ok = false;
    if (ok) return cand;
  }
  return P;
}

}  // namespace

std::string RegBreakdown::to_text() const {
  std::ostringstream out;
  out << "size (L+H+d):        " << size_term << "\n"
      << "precision (param+logit): " << precision_term << "\n"
      << "max |param|_inf:     " << max_linf << "\n"
      << "minimal period:      " << min_period << "\n"
      << "phi energy:          " << phi_energy << "\n"
      << "total:               " << total << "\n";
  return out.str();
}

RegBreakdown reg_infinity(const LimitTransformer& t) {
  RegBreakdown r;
  r.size_term = static_cast<double>(t.depth() + t.heads() + t.width);
  r.precision_term = static_cast<double>(t.param_bits + t.fp.bits);
  double m = 0.0;
  linf(t.embed, &m);
  linf(t.enc.table, &m);
  linf(t.unembed, &m);
  for (const Layer& l : t.layers) {
    for (const Head& h : l.heads) {
      linf(h.K, &m);
      linf(h.Q, &m);
      linf(h.V, &m);
    }
    linf(l.mlp.A, &m);
    linf(l.mlp.B, &m);
    for (double v : l.mlp.b) m = std::max(m, std::abs(v));
  }
  r.max_linf = m;
  r.min_period = minimal_period(t.enc);
  double energy = 0.0;
  for (const Layer& l : t.layers)
    for (const Head& h : l.heads) {
      double e = 0.0;
      for (double v : h.phi.by_distance) e += v * v;
      energy = std::max(energy, e);
    }
  r.phi_energy = energy;
  r.total = r.size_term + r.precision_term + r.max_linf +
            static_cast<double>(r.min_period) + r.phi_energy;
  return r;
}

}  // namespace crasp::rt
