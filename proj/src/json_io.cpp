#include "symidx/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace symidx {

namespace {

[[noreturn]] void bad(const std::string& what, const std::string& msg) {
  throw schema_error("io", what + ": " + msg);
}

double number_at(const Json& j, const std::string& what) {
  if (!j.is_number()) bad(what, "expected a number");
  return j.get<double>();
}

cplx complex_at(const Json& j, const std::string& what) {
  if (j.is_number()) return cplx(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return cplx(j[0].get<double>(), j[1].get<double>());
  bad(what, "expected a number or an [re, im] pair");
}

template <typename Scalar>
MatT<Scalar> parse_matrix_impl(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) bad(what, "expected a non-empty array of rows");
  const Index rows = static_cast<Index>(j.size());
  Index cols = -1;
  MatT<Scalar> M;
  for (Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<size_t>(r)];
    if (!row.is_array() || row.empty()) bad(what, "expected non-empty rows");
    if (cols < 0) {
      cols = static_cast<Index>(row.size());
      M.resize(rows, cols);
    } else if (static_cast<Index>(row.size()) != cols) {
      bad(what, "rows have inconsistent lengths");
    }
    for (Index c = 0; c < cols; ++c) {
      if constexpr (std::is_same_v<Scalar, double>)
        M(r, c) = number_at(row[static_cast<size_t>(c)], what);
      else
        M(r, c) = complex_at(row[static_cast<size_t>(c)], what);
    }
  }
  if (!M.allFinite()) bad(what, "contains non-finite entries");
  return M;
}

template <typename Scalar>
MatT<Scalar> parse_frame_impl(const Json& j, Index rows, const std::string& what) {
  if (j.is_string()) {
    const std::string kw = j.get<std::string>();
    if (kw == "fixed") return MatT<Scalar>(rows, 0);
    if (kw == "free") return MatT<Scalar>::Identity(rows, rows);
    bad(what, "unknown keyword '" + kw + "' (expected \"fixed\" or \"free\")");
  }
  if (!j.is_array()) bad(what, "expected a column list or a keyword");
  const Index cols = static_cast<Index>(j.size());
  MatT<Scalar> F(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    const Json& col = j[static_cast<size_t>(c)];
    if (!col.is_array() || static_cast<Index>(col.size()) != rows)
      bad(what, "every column must list " + std::to_string(rows) + " entries");
    for (Index r = 0; r < rows; ++r) {
      if constexpr (std::is_same_v<Scalar, double>)
        F(r, c) = number_at(col[static_cast<size_t>(r)], what);
      else
        F(r, c) = complex_at(col[static_cast<size_t>(r)], what);
    }
  }
  if (cols > 0 && !F.allFinite()) bad(what, "contains non-finite entries");
  return F;
}

bool looks_like_matrix(const Json& j) {
  return j.is_array() && !j.empty() && j[0].is_array() && !j[0].empty() &&
         j[0][0].is_number();
}

PolyMat parse_poly(const Json& j, const std::string& what) {
  PolyMat p;
  if (looks_like_matrix(j)) {
    p.coeffs.push_back(parse_matrix_impl<double>(j, what));
    return p;
  }
  if (!j.is_array() || j.empty())
    bad(what, "expected a matrix or an array of coefficient matrices");
  for (const Json& c : j) p.coeffs.push_back(parse_matrix_impl<double>(c, what));
  return p;
}

}  // namespace

Mat parse_matrix(const Json& j, const std::string& what) {
  return parse_matrix_impl<double>(j, what);
}

CMat parse_complex_matrix(const Json& j, const std::string& what) {
  return parse_matrix_impl<cplx>(j, what);
}

std::vector<double> parse_number_list(const Json& j, const std::string& what) {
  if (!j.is_array()) bad(what, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const Json& v : j) out.push_back(number_at(v, what));
  return out;
}

Mat parse_frame_columns(const Json& j, Index rows, const std::string& what) {
  return parse_frame_impl<double>(j, rows, what);
}

CMat parse_complex_frame_columns(const Json& j, Index rows, const std::string& what) {
  return parse_frame_impl<cplx>(j, rows, what);
}

void check_keys(const Json& obj, std::initializer_list<const char*> allowed,
                bool strict, const std::string& what) {
  if (!strict || !obj.is_object()) return;
  for (const auto& item : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return item.key() == k;
        }) == allowed.end())
      bad(what, "unknown key '" + item.key() + "'");
  }
}

PiecewiseMat parse_piecewise(const Json& j, const std::string& what) {
  if (looks_like_matrix(j))
    return PiecewiseMat::constant(parse_matrix_impl<double>(j, what));
  if (!j.is_object() || !j.contains("breakpoints") || !j.contains("pieces"))
    bad(what, "expected a matrix or {\"breakpoints\", \"pieces\"}");
  PiecewiseMat pm;
  pm.breakpoints = parse_number_list(j["breakpoints"], what + ".breakpoints");
  const Json& pieces = j["pieces"];
  if (!pieces.is_array() || pieces.empty()) bad(what, "pieces must be a non-empty array");
  for (const Json& p : pieces) pm.pieces.push_back(parse_poly(p, what + ".pieces"));
  pm.validate("io");
  return pm;
}

LQEdgeData parse_lq(const Json& j, bool strict, const std::string& what) {
  if (!j.is_object()) bad(what, "expected an object with keys A, B, W, S, R");
  check_keys(j, {"A", "B", "W", "S", "R"}, strict, what);
  for (const char* k : {"A", "B", "W", "S", "R"})
    if (!j.contains(k)) bad(what, std::string("missing key '") + k + "'");
  LQEdgeData d;
  d.A = parse_piecewise(j["A"], what + ".A");
  d.B = parse_piecewise(j["B"], what + ".B");
  d.W = parse_piecewise(j["W"], what + ".W");
  d.S = parse_piecewise(j["S"], what + ".S");
  d.R = parse_piecewise(j["R"], what + ".R");
  d.n = d.A.rows();
  d.m = d.B.cols();
  d.validate();
  return d;
}

GraphProblem parse_graph_problem(const Json& j, bool strict) {
  if (!j.is_object()) throw schema_error("io", "graph: expected an object");
  check_keys(j, {"vertices", "edges"}, strict, "graph");
  if (!j.contains("vertices") || !j["vertices"].is_number_integer())
    throw schema_error("io", "graph: missing integer 'vertices'");
  if (!j.contains("edges") || !j["edges"].is_array() || j["edges"].empty())
    throw schema_error("io", "graph: missing non-empty 'edges' array");

  GraphProblem gp;
  gp.graph.num_vertices = j["vertices"].get<Index>();
  for (size_t e = 0; e < j["edges"].size(); ++e) {
    const Json& je = j["edges"][e];
    const std::string what = "graph.edges[" + std::to_string(e) + "]";
    if (!je.is_object()) throw schema_error("io", what + ": expected an object");
    check_keys(je, {"src", "tgt", "length", "lq"}, strict, what);
    for (const char* k : {"src", "tgt", "length", "lq"})
      if (!je.contains(k)) throw schema_error("io", what + ": missing key '" + k + "'");
    if (!je["src"].is_number_integer() || !je["tgt"].is_number_integer())
      throw schema_error("io", what + ": src/tgt must be integers");
    const double length = number_at(je["length"], what + ".length");
    if (!(length > 0.0) || !std::isfinite(length))
      throw schema_error("io", what + ": length must be positive");
    gp.graph.edges.push_back({je["src"].get<Index>(), je["tgt"].get<Index>(), length});
    LQEdgeData lq = parse_lq(je["lq"], strict, what + ".lq");
    if (gp.n == 0) gp.n = lq.n;
    if (lq.n != gp.n)
      throw schema_error("io", what + ": state dimension differs between edges");
    gp.edge_data.push_back(lq.scaled(length));
  }
  gp.graph.validate();
  return gp;
}

BoundaryCondition parse_boundary(const Json& j, Index n, const MetricGraph& g,
                                 bool strict) {
  if (!j.is_object() || !j.contains("mode"))
    throw schema_error("io", "boundary: expected an object with a 'mode'");
  const std::string mode = j["mode"].is_string() ? j["mode"].get<std::string>() : "";
  if (mode == "per-vertex") {
    check_keys(j, {"mode", "frames"}, strict, "boundary");
    if (!j.contains("frames") || !j["frames"].is_array() ||
        static_cast<Index>(j["frames"].size()) != g.num_vertices)
      throw schema_error("io", "boundary: 'frames' must list one frame per vertex");
    std::vector<Mat> frames;
    for (size_t v = 0; v < j["frames"].size(); ++v)
      frames.push_back(parse_frame_columns(
          j["frames"][v], n, "boundary.frames[" + std::to_string(v) + "]"));
    return BoundaryCondition::per_vertex(std::move(frames));
  }
  if (mode == "general") {
    check_keys(j, {"mode", "frame"}, strict, "boundary");
    if (!j.contains("frame"))
      throw schema_error("io", "boundary: general mode needs a 'frame'");
    return BoundaryCondition::general(
        parse_frame_columns(j["frame"], n * 2 * g.num_edges(), "boundary.frame"));
  }
  throw schema_error("io", "boundary: mode must be \"per-vertex\" or \"general\"");
}

Json matrix_json(const Mat& M) {
  Json rows = Json::array();
  for (Index r = 0; r < M.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace symidx
