#pragma once

// JSON encoding of the toolkit's inputs and results.
//
// Conventions:
//  - A matrix is an array of rows, each row an array of numbers. Complex
//    entries may be written as [re, im] pairs wherever a complex matrix is
//    expected.
//  - A frame (a subspace) is an array of columns, each column an array of
//    numbers; the keywords "fixed" (no columns) and "free" (identity) are
//    accepted where the ambient dimension is known. An empty array means
//    "fixed".
//  - A piecewise matrix is either a plain matrix (constant on [0, 1]) or
//    {"breakpoints": [...], "pieces": [...]} where every piece is a constant
//    matrix or an array of polynomial coefficient matrices in local time.
//  - LQ data per edge is {"A":..., "B":..., "W":..., "S":..., "R":...} on the
//    unit interval; graph edges scale it by their length.

#include "symidx/graph.hpp"
#include "symidx/jacobi.hpp"

#include "json.hpp"

namespace symidx {

using Json = nlohmann::json;

// --- parsing (throws schema_error on malformed input) ------------------------

Mat parse_matrix(const Json& j, const std::string& what);
CMat parse_complex_matrix(const Json& j, const std::string& what);
std::vector<double> parse_number_list(const Json& j, const std::string& what);

/// Frame from a column list / keyword, with `rows` ambient entries per column.
Mat parse_frame_columns(const Json& j, Index rows, const std::string& what);
CMat parse_complex_frame_columns(const Json& j, Index rows, const std::string& what);

PiecewiseMat parse_piecewise(const Json& j, const std::string& what);
LQEdgeData parse_lq(const Json& j, bool strict, const std::string& what);

/// Metric graph with per-edge LQ data, reparametrized to unit time.
struct GraphProblem {
  MetricGraph graph;
  Index n = 0;
  std::vector<LQEdgeData> edge_data;  // edge_data[e] is scaled by length(e)
};

GraphProblem parse_graph_problem(const Json& j, bool strict);
BoundaryCondition parse_boundary(const Json& j, Index n, const MetricGraph& g,
                                 bool strict);

/// Rejects keys outside `allowed` when strict is set.
void check_keys(const Json& obj, std::initializer_list<const char*> allowed,
                bool strict, const std::string& what);

// --- serialization ------------------------------------------------------------

Json matrix_json(const Mat& M);

}  // namespace symidx
