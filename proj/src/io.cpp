#include "graphfilt/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace graphfilt {

ParseError::ParseError(Index line, const std::string& what)
    : InvalidArgument(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

GraphFormat graph_format_from_string(const std::string& s) {
  if (s == "edgelist") return GraphFormat::edgelist;
  if (s == "matrixmarket" || s == "mtx") return GraphFormat::matrixmarket;
  if (s == "json") return GraphFormat::json;
  throw InvalidArgument("unknown graph format '" + s + "'");
}

GraphFormat guess_graph_format(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".mtx") return GraphFormat::matrixmarket;
  if (ext == ".json") return GraphFormat::json;
  return GraphFormat::edgelist;
}

namespace {

std::string strip_comment(const std::string& line) {
  const auto pos = line.find_first_of("#%");
  return pos == std::string::npos ? line : line.substr(0, pos);
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r") == std::string::npos; }

struct EdgeCollector {
  bool directed;
  std::vector<Edge> edges;
  std::set<std::pair<Index, Index>> seen;

  void add(Index line, Index src, Index dst, double w) {
    if (src < 0 || dst < 0) throw ParseError(line, "negative node index");
    if (src == dst) throw ParseError(line, "self-loop at node " + std::to_string(src));
    if (!std::isfinite(w) || !(w > 0.0)) throw ParseError(line, "edge weight must be positive and finite");
    const auto key = directed ? std::make_pair(src, dst) : std::make_pair(std::min(src, dst), std::max(src, dst));
    if (!seen.insert(key).second)
      throw ParseError(line, "duplicate edge (" + std::to_string(src) + "," + std::to_string(dst) + ")");
    edges.push_back({src, dst, w});
  }
};

Matrix read_rows(const Json& rows, Index r, Index c) {
  Matrix m(r, c);
  require(rows.is_array() && static_cast<Index>(rows.size()) == r * c, "matrix data has the wrong length");
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = rows[i * c + j].get<double>();
  return m;
}

std::string kind_name(SpectralKernel::Kind k) {
  switch (k) {
    case SpectralKernel::Kind::polynomial: return "polynomial";
    case SpectralKernel::Kind::tabulated: return "tabulated";
    case SpectralKernel::Kind::parametric: return "parametric";
    case SpectralKernel::Kind::custom: return "custom";
  }
  return "custom";
}

}  // namespace

Graph parse_edge_list(std::istream& in, bool directed) {
  EdgeCollector col{directed, {}, {}};
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = strip_comment(line);
    if (blank(body)) continue;
    std::istringstream ss(body);
    long long s = 0, d = 0;
    if (!(ss >> s >> d)) throw ParseError(lineno, "expected 'src dst [weight]'");
    double w = 1.0;
    std::string tok;
    if (ss >> tok) {
      try {
        size_t used = 0;
        w = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError(lineno, "malformed weight '" + tok + "'");
      }
    }
    if (ss >> tok) throw ParseError(lineno, "too many fields");
    col.add(lineno, s, d, w);
  }
  if (col.edges.empty()) throw ParseError(0, "edge list contains no edges");
  return Graph::from_edge_list(col.edges, directed);
}

Graph parse_matrix_market(std::istream& in) {
  std::string line;
  Index lineno = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty MatrixMarket file");
  ++lineno;
  std::istringstream hs(line);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
  };
  if (banner != "%%MatrixMarket" || lower(object) != "matrix") throw ParseError(lineno, "missing MatrixMarket banner");
  if (lower(format) != "coordinate") throw ParseError(lineno, "only coordinate format is supported");
  field = lower(field);
  symmetry = lower(symmetry);
  if (field != "real" && field != "integer" && field != "pattern")
    throw ParseError(lineno, "unsupported field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric")
    throw ParseError(lineno, "unsupported symmetry '" + symmetry + "'");
  const bool directed = symmetry == "general";

  long long rows = -1, cols = -1, nnz = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] == '%') continue;
    if (blank(line)) continue;
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> nnz)) throw ParseError(lineno, "malformed size line");
    break;
  }
  if (rows < 0) throw ParseError(lineno, "missing size line");
  if (rows != cols) throw ParseError(lineno, "inconsistent header: adjacency must be square");
  if (rows == 0) throw ParseError(lineno, "inconsistent header: zero nodes");

  EdgeCollector col{directed, {}, {}};
  long long count = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] == '%') continue;
    if (blank(line)) continue;
    std::istringstream ss(line);
    long long i = 0, j = 0;
    double w = 1.0;
    if (!(ss >> i >> j)) throw ParseError(lineno, "expected 'row col [value]'");
    if (field != "pattern" && !(ss >> w)) throw ParseError(lineno, "missing value");
    if (i < 1 || i > rows || j < 1 || j > cols) throw ParseError(lineno, "index out of range");
    ++count;
    if (count > nnz) throw ParseError(lineno, "more entries than declared in the header");
    if (w == 0.0) continue;
    col.add(lineno, j - 1, i - 1, w);
  }
  if (count != nnz)
    throw ParseError(lineno, "inconsistent header: declared " + std::to_string(nnz) + " entries, found " +
                                 std::to_string(count));
  return Graph::from_edge_list(col.edges, directed, static_cast<Index>(rows));
}

Graph load_graph(const std::filesystem::path& path, GraphFormat format, bool directed) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  switch (format) {
    case GraphFormat::edgelist: return parse_edge_list(in, directed);
    case GraphFormat::matrixmarket: return parse_matrix_market(in);
    case GraphFormat::json: {
      Json j;
      try {
        in >> j;
      } catch (const Json::parse_error& e) {
        throw InvalidArgument(std::string("invalid JSON: ") + e.what());
      }
      return graph_from_json(j);
    }
  }
  throw InvalidArgument("unknown graph format");
}

void save_edge_list(const Graph& g, std::ostream& out) {
  for (const Edge& e : g.edges()) out << e.src << ' ' << e.dst << ' ' << format_double(e.weight) << '\n';
}

// ---- JSON ----

Json to_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Json to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(m.size());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Json to_json(const SparseMatrix& m) {
  Json entries = Json::array();
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) entries.push_back(Json::array({it.row(), it.col(), it.value()}));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

Vector vector_from_json(const Json& j) {
  require(j.is_array(), "expected a numeric array");
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

Matrix matrix_from_json(const Json& j) {
  return read_rows(j.at("data"), j.at("rows").get<Index>(), j.at("cols").get<Index>());
}

SparseMatrix sparse_from_json(const Json& j) {
  const Index r = j.at("rows").get<Index>(), c = j.at("cols").get<Index>();
  require(r >= 0 && c >= 0, "negative matrix dimensions");
  std::vector<Triplet> t;
  for (const Json& e : j.at("entries")) {
    const Index i = e.at(0).get<Index>(), k = e.at(1).get<Index>();
    require(i >= 0 && i < r && k >= 0 && k < c, "sparse entry out of range");
    t.emplace_back(i, k, e.at(2).get<double>());
  }
  SparseMatrix m(r, c);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

Json to_json(const Graph& g) {
  Json edges = Json::array();
  for (const Edge& e : g.edges()) edges.push_back(Json::array({e.src, e.dst, e.weight}));
  return Json{{"type", "graph"}, {"nodes", g.node_count()}, {"directed", g.directed()}, {"edges", edges}};
}

Graph graph_from_json(const Json& j) {
  try {
    std::vector<Edge> edges;
    for (const Json& e : j.at("edges")) edges.push_back({e.at(0).get<Index>(), e.at(1).get<Index>(), e.at(2).get<double>()});
    return Graph::from_edge_list(edges, j.at("directed").get<bool>(), j.at("nodes").get<Index>());
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed graph JSON: ") + e.what());
  }
}

Json to_json(const ShiftOperator& s) {
  Json j = to_json(s.matrix());
  j["kind"] = std::string(to_string(s.kind()));
  return j;
}

ShiftOperator shift_from_json(const Json& j) {
  const GsoKind kind = j.contains("kind") ? gso_kind_from_string(j.at("kind").get<std::string>()) : GsoKind::custom;
  return ShiftOperator(sparse_from_json(j), kind);
}

std::string filter_kind(const FilterSpec& f) {
  struct V {
    std::string operator()(const ConvFilter& c) const {
      return c.basis() == PolyBasis::chebyshev ? "chebyshev" : "conv";
    }
    std::string operator()(const RationalFilter&) const { return "rational"; }
    std::string operator()(const NodeVaryingFilter&) const { return "node_varying"; }
    std::string operator()(const EdgeVaryingSpec&) const { return "edge_varying"; }
    std::string operator()(const VolterraFilter&) const { return "volterra"; }
    std::string operator()(const MedianFilter&) const { return "median"; }
    std::string operator()(const MultiGsoFilter&) const { return "multi_gso"; }
  };
  return std::visit(V{}, f);
}

Json to_json(const FilterSpec& f) {
  Json j{{"type", "filter"}, {"kind", filter_kind(f)}};
  if (auto* c = std::get_if<ConvFilter>(&f)) {
    j["taps"] = to_json(c->taps());
    if (c->basis() == PolyBasis::chebyshev) j["lambda_max"] = c->lambda_max();
  } else if (auto* r = std::get_if<RationalFilter>(&f)) {
    j["numerator"] = to_json(r->numerator());
    j["denominator"] = to_json(r->denominator());
  } else if (auto* nv = std::get_if<NodeVaryingFilter>(&f)) {
    j["coeffs"] = to_json(nv->coeffs());
  } else if (auto* ev = std::get_if<EdgeVaryingSpec>(&f)) {
    Json mats = Json::array();
    for (const SparseMatrix& m : ev->filter.mats()) mats.push_back(to_json(m));
    j["mats"] = mats;
    j["support"] = to_json(ev->support);
  } else if (auto* v = std::get_if<VolterraFilter>(&f)) {
    j["caps"] = v->caps();
    Json table = Json::array();
    for (const auto& [idx, h] : v->table()) table.push_back(Json{{"index", idx}, {"value", h}});
    j["table"] = table;
  } else if (auto* m = std::get_if<MedianFilter>(&f)) {
    j["replications"] = m->replications();
  } else if (auto* mg = std::get_if<MultiGsoFilter>(&f)) {
    Json gsos = Json::array();
    for (const ShiftOperator& s : mg->gsos()) gsos.push_back(to_json(s));
    j["gsos"] = gsos;
    j["coeffs"] = to_json(mg->coeffs());
  }
  return j;
}

FilterSpec filter_from_json(const Json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "conv") return ConvFilter(vector_from_json(j.at("taps")));
    if (kind == "chebyshev") return ConvFilter::chebyshev(vector_from_json(j.at("taps")), j.at("lambda_max").get<double>());
    if (kind == "rational") return RationalFilter(vector_from_json(j.at("numerator")), vector_from_json(j.at("denominator")));
    if (kind == "node_varying") return NodeVaryingFilter(matrix_from_json(j.at("coeffs")));
    if (kind == "edge_varying") {
      ShiftOperator support = shift_from_json(j.at("support"));
      std::vector<SparseMatrix> mats;
      for (const Json& m : j.at("mats")) mats.push_back(sparse_from_json(m));
      EdgeVaryingFilter f(std::move(mats), support);
      return EdgeVaryingSpec{std::move(f), std::move(support)};
    }
    if (kind == "volterra") {
      VolterraFilter v(j.at("caps").get<std::vector<int>>());
      for (const Json& e : j.at("table")) v.set(e.at("index").get<std::vector<int>>(), e.at("value").get<double>());
      return v;
    }
    if (kind == "median") return MedianFilter(j.at("replications").get<std::vector<int>>());
    if (kind == "multi_gso") {
      std::vector<ShiftOperator> gsos;
      for (const Json& s : j.at("gsos")) gsos.push_back(shift_from_json(s));
      return MultiGsoFilter(std::move(gsos), matrix_from_json(j.at("coeffs")));
    }
    throw InvalidArgument("unknown filter kind '" + kind + "'");
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed filter JSON: ") + e.what());
  }
}

Json to_json(const SpectralKernel& k) {
  Json j{{"kind", kind_name(k.kind())}, {"label", k.label()}};
  switch (k.kind()) {
    case SpectralKernel::Kind::polynomial: j["filter"] = to_json(FilterSpec(k.polynomial())); break;
    case SpectralKernel::Kind::tabulated:
      j["lambdas"] = to_json(k.table_lambdas());
      j["values"] = to_json(k.table_values());
      break;
    case SpectralKernel::Kind::parametric:
      j["family"] = k.family();
      j["params"] = k.params();
      break;
    case SpectralKernel::Kind::custom: throw InvalidArgument("custom kernels cannot be serialized");
  }
  return j;
}

SpectralKernel kernel_from_json(const Json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const std::string label = j.value("label", "");
    if (kind == "polynomial") {
      FilterSpec f = filter_from_json(j.at("filter"));
      auto* c = std::get_if<ConvFilter>(&f);
      require(c != nullptr, "polynomial kernel must hold a convolutional filter");
      return SpectralKernel(*c, label);
    }
    if (kind == "tabulated")
      return SpectralKernel::tabulated(vector_from_json(j.at("lambdas")), vector_from_json(j.at("values")), label);
    if (kind == "parametric")
      return SpectralKernel::parametric(j.at("family").get<std::string>(), j.at("params").get<std::vector<double>>(),
                                        label);
    throw InvalidArgument("unknown kernel kind '" + kind + "'");
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed kernel JSON: ") + e.what());
  }
}

Json to_json(const FilterBank& b) {
  Json j{{"type", "filterbank"}};
  j["analysis"] = Json::array();
  for (const auto& k : b.analysis) j["analysis"].push_back(to_json(k));
  if (b.synthesis) {
    j["synthesis"] = Json::array();
    for (const auto& k : *b.synthesis) j["synthesis"].push_back(to_json(k));
  }
  if (b.sampling_sets) j["sampling_sets"] = *b.sampling_sets;
  return j;
}

FilterBank bank_from_json(const Json& j) {
  try {
    FilterBank b;
    for (const Json& k : j.at("analysis")) b.analysis.push_back(kernel_from_json(k));
    if (j.contains("synthesis")) {
      b.synthesis.emplace();
      for (const Json& k : j.at("synthesis")) b.synthesis->push_back(kernel_from_json(k));
    }
    if (j.contains("sampling_sets")) b.sampling_sets = j.at("sampling_sets").get<std::vector<std::vector<Index>>>();
    return b;
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed filter bank JSON: ") + e.what());
  }
}

Json to_json(const GnnModel& m) {
  Json layers = Json::array();
  for (const GnnLayer& l : m.layers) {
    Json h = Json::array();
    for (const Matrix& hk : l.h) h.push_back(to_json(hk));
    layers.push_back(Json{{"activation", to_string(l.activation)}, {"taps", h}});
  }
  return Json{{"type", "gnn"},       {"layers", layers},   {"readout", to_string(m.readout)},
              {"theta", to_json(m.theta)}, {"preset", m.preset}, {"gin_eps", m.gin_eps}};
}

GnnModel gnn_from_json(const Json& j) {
  try {
    GnnModel m;
    for (const Json& l : j.at("layers")) {
      GnnLayer layer;
      layer.activation = activation_from_string(l.at("activation").get<std::string>());
      for (const Json& h : l.at("taps")) layer.h.push_back(matrix_from_json(h));
      require(!layer.h.empty(), "layer needs at least one tap");
      m.layers.push_back(std::move(layer));
    }
    m.readout = readout_from_string(j.at("readout").get<std::string>());
    m.theta = matrix_from_json(j.at("theta"));
    m.preset = j.value("preset", "");
    m.gin_eps = j.value("gin_eps", 0.0);
    return m;
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed model JSON: ") + e.what());
  }
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    Json j;
    in >> j;
    return j;
  } catch (const Json::parse_error& e) {
    throw InvalidArgument(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// ---- CSV / SVG ----

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const std::vector<CsvColumn>& cols) {
  size_t rows = 0;
  for (size_t c = 0; c < cols.size(); ++c) {
    out << (c ? "," : "") << cols[c].name;
    rows = std::max(rows, cols[c].values.size());
  }
  out << '\n';
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols.size(); ++c) {
      if (c) out << ',';
      if (r < cols[c].values.size()) out << format_double(cols[c].values[r]);
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const std::vector<CsvColumn>& cols) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  write_csv(out, cols);
}

void write_svg(const std::filesystem::path& path, const std::string& title, const std::vector<SvgSeries>& series) {
  constexpr double W = 640, H = 400, M = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    require(s.x.size() == s.y.size(), "series x and y differ in length");
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x1 > x0)) { x0 -= 0.5; x1 += 0.5; }
  if (!(y1 > y0)) { y0 -= 0.5; y1 += 0.5; }
  auto px = [&](double x) { return M + (x - x0) / (x1 - x0) * (W - 2 * M); };
  auto py = [&](double y) { return H - M - (y - y0) / (y1 - y0) * (H - 2 * M); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  out << "<rect x=\"" << M << "\" y=\"" << M << "\" width=\"" << W - 2 * M << "\" height=\"" << H - 2 * M
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << M << "\" y=\"" << H - M + 15 << "\" font-size=\"10\">" << x0 << "</text>\n";
  out << "<text x=\"" << W - M << "\" y=\"" << H - M + 15 << "\" font-size=\"10\" text-anchor=\"end\">" << x1
      << "</text>\n";
  out << "<text x=\"" << M - 4 << "\" y=\"" << H - M << "\" font-size=\"10\" text-anchor=\"end\">" << y0 << "</text>\n";
  out << "<text x=\"" << M - 4 << "\" y=\"" << M + 10 << "\" font-size=\"10\" text-anchor=\"end\">" << y1 << "</text>\n";
  for (size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = colors[k % 6];
    if (s.scatter) {
      for (size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"2\" fill=\"" << col << "\"/>\n";
    } else {
      out << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"";
      for (size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      out << "\"/>\n";
    }
    out << "<text x=\"" << W - M - 5 << "\" y=\"" << M + 15 + 14 * static_cast<double>(k)
        << "\" font-size=\"11\" text-anchor=\"end\" fill=\"" << col << "\">" << s.name << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace graphfilt
