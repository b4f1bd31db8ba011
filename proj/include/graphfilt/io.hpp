#pragma once

#include "graphfilt/common.hpp"
#include "graphfilt/conv_filter.hpp"
#include "graphfilt/filterbank.hpp"
#include "graphfilt/graph.hpp"
#include "graphfilt/learn.hpp"
#include "graphfilt/rational_filter.hpp"
#include "graphfilt/structured_filters.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace graphfilt {

using Json = nlohmann::json;

/// Parse failure; the message starts with "line N:" when a line is known.
class ParseError : public InvalidArgument {
 public:
  ParseError(Index line, const std::string& what);
  Index line() const { return line_; }

 private:
  Index line_;
};

enum class GraphFormat { edgelist, matrixmarket, json };

GraphFormat graph_format_from_string(const std::string& s);
/// Guess from the extension: .mtx, .json, anything else is an edge list.
GraphFormat guess_graph_format(const std::filesystem::path& path);

// Edge list: "src dst [weight]" per line, 0-based ids, '#' or '%' starts a comment.
Graph parse_edge_list(std::istream& in, bool directed = false);
// MatrixMarket coordinate real/integer/pattern, general (directed) or symmetric (undirected).
// Entry (i, j, w) is the edge j -> i.
Graph parse_matrix_market(std::istream& in);

Graph load_graph(const std::filesystem::path& path, GraphFormat format, bool directed = false);
void save_edge_list(const Graph& g, std::ostream& out);

// ---- JSON ----

Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Json to_json(const SparseMatrix& m);
Vector vector_from_json(const Json& j);
Matrix matrix_from_json(const Json& j);
SparseMatrix sparse_from_json(const Json& j);

Json to_json(const Graph& g);
Graph graph_from_json(const Json& j);

Json to_json(const ShiftOperator& s);
ShiftOperator shift_from_json(const Json& j);

/// Edge-varying filters keep the support operator they were built for.
struct EdgeVaryingSpec {
  EdgeVaryingFilter filter;
  ShiftOperator support;
};

using FilterSpec = std::variant<ConvFilter, RationalFilter, NodeVaryingFilter, EdgeVaryingSpec, VolterraFilter,
                                MedianFilter, MultiGsoFilter>;

std::string filter_kind(const FilterSpec& f);
Json to_json(const FilterSpec& f);
FilterSpec filter_from_json(const Json& j);

/// Custom kernels have no serial form and are rejected.
Json to_json(const SpectralKernel& k);
SpectralKernel kernel_from_json(const Json& j);
Json to_json(const FilterBank& b);
FilterBank bank_from_json(const Json& j);

Json to_json(const GnnModel& m);
GnnModel gnn_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

// ---- tabular and plot output ----

struct CsvColumn {
  std::string name;
  std::vector<double> values;
};

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

void write_csv(std::ostream& out, const std::vector<CsvColumn>& cols);
void write_csv(const std::filesystem::path& path, const std::vector<CsvColumn>& cols);

struct SvgSeries {
  std::string name;
  std::vector<double> x, y;
  bool scatter = false;
};

void write_svg(const std::filesystem::path& path, const std::string& title, const std::vector<SvgSeries>& series);

}  // namespace graphfilt
