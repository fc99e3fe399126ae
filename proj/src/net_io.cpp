#include <sstream>

#include "crasp/dyadic.hpp"
#include "crasp/runtime.hpp"

namespace crasp::rt {

namespace {

void emit_sparse(std::ostringstream& out, const char* tag, const Mat& m) {
  std::size_t nnz = 0;
  for (const auto& r : m)
    for (double v : r)
      if (v != 0.0) ++nnz;
  out << tag << " " << m.size() << " " << (m.empty() ? 0 : m[0].size()) << " " << nnz << "\n";
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t c = 0; c < m[r].size(); ++c)
      if (m[r][c] != 0.0) out << r << " " << c << " " << dyadic_to_string(m[r][c]) << "\n";
}

void emit_dense_row(std::ostringstream& out, const std::vector<double>& row) {
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (c) out << " ";
    out << dyadic_to_string(row[c]);
  }
  out << "\n";
}

class Reader {
 public:
  explicit Reader(const std::string& text) : in_(text) {}

  std::string line(const std::string& path) {
    std::string l;
    while (std::getline(in_, l)) {
      ++lineno_;
      if (!l.empty() && l.back() == '\r') l.pop_back();
      if (!l.empty()) return l;
    }
    throw SchemaError(path, "unexpected end of file");
  }

  // reads "key v1 v2 ..." and checks the key
  std::vector<std::string> fields(const std::string& key, const std::string& path) {
    std::istringstream ls(line(path));
    std::string k;
    ls >> k;
    if (k != key) throw SchemaError(path, "expected '" + key + "', got '" + k + "'");
    std::vector<std::string> out;
    std::string f;
    while (ls >> f) out.push_back(f);
    return out;
  }

  std::int64_t int_field(const std::string& key, const std::string& path) {
    auto f = fields(key, path);
    if (f.size() != 1) throw SchemaError(path, "expected one value after '" + key + "'");
    try {
      return std::stoll(f[0]);
    } catch (const std::exception&) {
      throw SchemaError(path, "malformed integer '" + f[0] + "'");
    }
  }

  Mat sparse(const std::string& key, const std::string& path) {
    auto f = fields(key, path);
    if (f.size() != 3) throw SchemaError(path, "expected rows cols nnz");
    std::size_t rows, cols, nnz;
    try {
      rows = static_cast<std::size_t>(std::stoull(f[0]));
      cols = static_cast<std::size_t>(std::stoull(f[1]));
      nnz = static_cast<std::size_t>(std::stoull(f[2]));
    } catch (const std::exception&) {
      throw SchemaError(path, "malformed sparse header");
    }
    Mat m(rows, std::vector<double>(cols, 0.0));
    for (std::size_t k = 0; k < nnz; ++k) {
      std::istringstream ls(line(path));
      std::size_t r, c;
      std::string v;
      if (!(ls >> r >> c >> v)) throw SchemaError(path, "malformed sparse entry");
      if (r >= rows || c >= cols) throw SchemaError(path, "sparse index out of range");
      m[r][c] = dyadic_from_string(v, path);
    }
    return m;
  }

  std::vector<double> dense_row(std::size_t cols, const std::string& path) {
    std::istringstream ls(line(path));
    std::vector<double> row;
    std::string v;
    while (ls >> v) row.push_back(dyadic_from_string(v, path));
    if (row.size() != cols) throw SchemaError(path, "wrong dense row length");
    return row;
  }

 private:
  std::istringstream in_;
  int lineno_ = 0;
};

}  // namespace

std::string serialize(const LimitTransformer& t) {
  validate(t);
  std::ostringstream out;
  out << "craspnet 1\n";
  out << "name " << (t.name.empty() ? "-" : t.name) << "\n";
  out << "alphabet " << t.symbols.size() << "\n";
  for (const auto& s : t.symbols) out << s << "\n";
  out << "width " << t.width << "\n";
  out << "outdim " << t.out_dim << "\n";
  out << "layers " << t.layers.size() << "\n";
  out << "heads " << t.heads() << "\n";
  out << "logitbits " << t.fp.bits << "\n";
  out << "parambits " << t.param_bits << "\n";
  out << "empty_accepts " << (t.empty_accepts ? 1 : 0) << "\n";
  out << "encoding " << t.enc.period << "\n";
  for (const auto& row : t.enc.table) emit_dense_row(out, row);
  out << "embed " << t.embed.size() << "\n";
  for (const auto& row : t.embed) emit_dense_row(out, row);
  for (std::size_t l = 0; l < t.layers.size(); ++l) {
    const Layer& layer = t.layers[l];
    out << "layer " << l << "\n";
    for (std::size_t h = 0; h < layer.heads.size(); ++h) {
      const Head& head = layer.heads[h];
      out << "head " << h << "\n";
      emit_sparse(out, "K", head.K);
      emit_sparse(out, "Q", head.Q);
      emit_sparse(out, "V", head.V);
      out << "phi " << head.phi.by_distance.size() << "\n";
      if (!head.phi.by_distance.empty()) emit_dense_row(out, head.phi.by_distance);
    }
    const Mlp& m = layer.mlp;
    out << "mlp " << m.dff() << " " << (m.acts.empty() ? "-" : m.acts) << "\n";
    emit_sparse(out, "A", m.A);
    out << "b " << m.b.size() << "\n";
    if (!m.b.empty()) emit_dense_row(out, m.b);
    emit_sparse(out, "B", m.B);
  }
  emit_sparse(out, "unembed", t.unembed);
  out << "meta " << t.metadata.size() << "\n";
  for (const auto& line : t.metadata) out << line << "\n";
  out << "end\n";
  return out.str();
}

LimitTransformer deserialize(const std::string& text) {
  Reader rd(text);
  LimitTransformer t;
  {
    auto f = rd.fields("craspnet", "header");
    if (f.size() != 1 || f[0] != "1") throw SchemaError("header", "unsupported version");
  }
  {
    auto f = rd.fields("name", "name");
    if (f.size() != 1) throw SchemaError("name", "expected one value");
    t.name = f[0] == "-" ? "" : f[0];
  }
  std::int64_t nsym = rd.int_field("alphabet", "alphabet");
  if (nsym < 0) throw SchemaError("alphabet", "negative symbol count");
  for (std::int64_t k = 0; k < nsym; ++k) t.symbols.push_back(rd.line("alphabet"));
  t.width = static_cast<int>(rd.int_field("width", "width"));
  t.out_dim = static_cast<int>(rd.int_field("outdim", "outdim"));
  std::int64_t L = rd.int_field("layers", "layers");
  std::int64_t H = rd.int_field("heads", "heads");
  t.fp.bits = static_cast<int>(rd.int_field("logitbits", "logitbits"));
  t.param_bits = static_cast<int>(rd.int_field("parambits", "parambits"));
  t.empty_accepts = rd.int_field("empty_accepts", "empty_accepts") != 0;
  t.enc.period = rd.int_field("encoding", "encoding");
  if (t.enc.period < 1) throw SchemaError("encoding", "period must be >= 1");
  const std::size_t d = static_cast<std::size_t>(t.width);
  for (std::int64_t k = 0; k < t.enc.period; ++k)
    t.enc.table.push_back(rd.dense_row(d, "encoding row " + std::to_string(k)));
  std::int64_t embed_rows = rd.int_field("embed", "embed");
  if (embed_rows != nsym + 1) throw SchemaError("embed", "row count must be |alphabet|+1");
  for (std::int64_t k = 0; k < embed_rows; ++k)
    t.embed.push_back(rd.dense_row(d, "embed row " + std::to_string(k)));
  for (std::int64_t l = 0; l < L; ++l) {
    const std::string lpath = "layer " + std::to_string(l);
    if (rd.int_field("layer", lpath) != l) throw SchemaError(lpath, "layer index mismatch");
    Layer layer;
    for (std::int64_t h = 0; h < H; ++h) {
      const std::string hpath = lpath + " / head " + std::to_string(h);
      if (rd.int_field("head", hpath) != h) throw SchemaError(hpath, "head index mismatch");
      Head head;
      head.K = rd.sparse("K", hpath + " / K");
      head.Q = rd.sparse("Q", hpath + " / Q");
      head.V = rd.sparse("V", hpath + " / V");
      std::int64_t plen = rd.int_field("phi", hpath + " / phi");
      if (plen > 0)
        head.phi.by_distance = rd.dense_row(static_cast<std::size_t>(plen), hpath + " / phi");
      layer.heads.push_back(std::move(head));
    }
    const std::string mpath = lpath + " / mlp";
    auto mf = rd.fields("mlp", mpath);
    if (mf.size() != 2) throw SchemaError(mpath, "expected dff and activation tags");
    std::size_t dff;
    try {
      dff = static_cast<std::size_t>(std::stoull(mf[0]));
    } catch (const std::exception&) {
      throw SchemaError(mpath, "malformed dff");
    }
    layer.mlp.acts = mf[1] == "-" ? "" : mf[1];
    if (layer.mlp.acts.size() != dff) throw SchemaError(mpath, "activation tag length != dff");
    layer.mlp.A = rd.sparse("A", mpath + " / A");
    std::int64_t blen = rd.int_field("b", mpath + " / b");
    if (static_cast<std::size_t>(blen) != dff) throw SchemaError(mpath + " / b", "length != dff");
    if (blen > 0) layer.mlp.b = rd.dense_row(dff, mpath + " / b");
    layer.mlp.B = rd.sparse("B", mpath + " / B");
    t.layers.push_back(std::move(layer));
  }
  t.unembed = rd.sparse("unembed", "unembed");
  std::int64_t nmeta = rd.int_field("meta", "meta");
  for (std::int64_t k = 0; k < nmeta; ++k) t.metadata.push_back(rd.line("meta"));
  {
    auto f = rd.fields("end", "end");
    if (!f.empty()) throw SchemaError("end", "trailing fields");
  }
  validate(t);
  return t;
}

}  // namespace crasp::rt
