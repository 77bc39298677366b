#include "symidx/cli.hpp"

#include <complex>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "symidx/json_io.hpp"
#include "symidx/maslov.hpp"
#include "symidx/oracle.hpp"
#include "symidx/theorems.hpp"

namespace symidx {

namespace {

struct CliConfig {
  std::string in_path;
  std::string out_path;
  bool strict = false;
  long long seed = 0;
  bool has_seed = false;
  Index mesh = 16;
  Tolerances tol;
};

Json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw schema_error("cli", "cannot open input file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw schema_error("cli", "invalid JSON in '" + path + "': " + e.what());
  }
}

void emit(const Json& out, const CliConfig& cfg) {
  const std::string payload = out.dump(2) + "\n";
  if (cfg.out_path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream os(cfg.out_path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write output file '" + cfg.out_path + "'");
  os << payload;
}

void require_keys(const Json& in, std::initializer_list<const char*> keys,
                  const std::string& what) {
  if (!in.is_object()) throw schema_error("cli", what + ": expected a JSON object");
  for (const char* k : keys)
    if (!in.contains(k))
      throw schema_error("cli", what + ": missing key '" + std::string(k) + "'");
}

std::vector<Mat> edge_flows(const GraphProblem& gp, const Tolerances& tol) {
  std::vector<Mat> thetas;
  thetas.reserve(gp.edge_data.size());
  for (const auto& lq : gp.edge_data)
    thetas.push_back(integrate_flow(jacobi_from_lq(lq), {}, 1e-12, tol).Theta);
  return thetas;
}

Json run_maslov(const Json& in, const CliConfig& cfg) {
  check_keys(in, {"dim", "complex", "l0", "l1", "l2"}, cfg.strict, "maslov input");
  require_keys(in, {"dim", "l0", "l1", "l2"}, "maslov input");
  if (!in["dim"].is_number_integer() || in["dim"].get<Index>() <= 0 ||
      in["dim"].get<Index>() % 2 != 0)
    throw schema_error("cli", "maslov input: 'dim' must be a positive even integer");
  const Index dim = in["dim"].get<Index>();
  const bool complex_field = in.value("complex", false);

  MaslovResult res;
  if (complex_field) {
    const SymplecticSpace sp = SymplecticSpace::standard(dim, true);
    auto lagrangian = [&](const char* key) {
      const CMat cols =
          parse_complex_frame_columns(in[key], dim, std::string("maslov input.") + key);
      CFrame f = make_frame<cplx>(sp, cols, cfg.tol);
      if (!is_lagrangian(f, cfg.tol.symplectic_defect))
        throw precondition_error("cli", std::string(key) + " is not Lagrangian");
      return f;
    };
    res = hermitian_triple_index(lagrangian("l0"), lagrangian("l1"), lagrangian("l2"),
                                 cfg.tol);
  } else {
    const SymplecticSpace sp = SymplecticSpace::standard(dim);
    auto lagrangian = [&](const char* key) {
      const Mat cols =
          parse_frame_columns(in[key], dim, std::string("maslov input.") + key);
      Frame f = make_frame(sp, cols, cfg.tol);
      if (!is_lagrangian(f, cfg.tol.symplectic_defect))
        throw precondition_error("cli", std::string(key) + " is not Lagrangian");
      return f;
    };
    res = triple_index(lagrangian("l0"), lagrangian("l1"), lagrangian("l2"), cfg.tol);
  }

  Json out;
  out["task"] = "maslov";
  out["domain_dim"] = res.domain_dim;
  out["index_neg"] = res.index_neg;
  out["index_pos"] = res.index_pos();
  out["kernel_dim"] = res.kernel_dim;
  out["signature"] = res.signature;
  return out;
}

Json run_compare(const Json& in, const CliConfig& cfg) {
  check_keys(in, {"graph", "boundary_from", "boundary_to"}, cfg.strict, "compare input");
  require_keys(in, {"graph", "boundary_from", "boundary_to"}, "compare input");
  const GraphProblem gp = parse_graph_problem(in["graph"], cfg.strict);
  const BoundaryCondition from =
      parse_boundary(in["boundary_from"], gp.n, gp.graph, cfg.strict);
  const BoundaryCondition to =
      parse_boundary(in["boundary_to"], gp.n, gp.graph, cfg.strict);
  const ComparisonResult res =
      graph_comparison(gp.graph, gp.n, edge_flows(gp, cfg.tol), from, to, cfg.tol);

  Json out;
  out["task"] = "compare";
  out["difference"] = res.difference;
  out["maslov_index"] = res.maslov_index;
  out["k0"] = res.k0;
  out["dim_from"] = res.dim_TN;
  out["dim_common"] = res.dim_common;
  return out;
}

Json run_discretize(const Json& in, const CliConfig& cfg) {
  check_keys(in, {"lq", "length", "partition", "count_kernel"}, cfg.strict,
             "discretize input");
  require_keys(in, {"lq", "length", "partition"}, "discretize input");
  const LQEdgeData lq = parse_lq(in["lq"], cfg.strict, "discretize input.lq");
  if (!in["length"].is_number() || !(in["length"].get<double>() > 0.0))
    throw schema_error("cli", "discretize input: 'length' must be a positive number");
  const double length = in["length"].get<double>();
  const std::vector<double> partition =
      parse_number_list(in["partition"], "discretize input.partition");
  const bool count_kernel = in.value("count_kernel", false);

  const DiscretizationResult res = discretization_index(
      jacobi_from_lq(lq.scaled(length)), partition, count_kernel, cfg.tol);

  Json out;
  out["task"] = "discretize";
  out["lower_bound"] = res.lower_bound;
  out["exact"] = res.exact;
  out["terms"] = res.terms;
  out["kernel_corrections"] = res.kernel_corrections;
  return out;
}

Json run_iterate(const Json& in, const CliConfig& cfg) {
  check_keys(in, {"theta", "k"}, cfg.strict, "iterate input");
  require_keys(in, {"theta", "k"}, "iterate input");
  const Mat theta = parse_matrix(in["theta"], "iterate input.theta");
  if (!in["k"].is_number_integer() || in["k"].get<int>() < 1)
    throw schema_error("cli", "iterate input: 'k' must be a positive integer");
  const int k = in["k"].get<int>();

  const IterationResult one = iteration_index_I(theta, k, cfg.tol);
  const IterationResult two = iteration_index_II(theta, k, cplx(0, 0), cfg.tol);

  Json out;
  out["task"] = "iterate";
  out["k"] = k;
  out["total_I"] = one.total;
  out["total_II"] = two.total;
  out["terms_I"] = one.terms;
  out["terms_II"] = two.terms;
  out["agree"] = (one.total == two.total);
  return out;
}

Json run_circle(const Json& in, const CliConfig& cfg) {
  check_keys(in, {"theta", "mode", "angle", "samples"}, cfg.strict, "circle input");
  require_keys(in, {"theta"}, "circle input");
  const Mat theta = parse_matrix(in["theta"], "circle input.theta");
  const std::string mode = in.value("mode", std::string("jumps"));
  const int samples = in.value("samples", 1024);
  if (samples < 2) throw schema_error("cli", "circle input: 'samples' must be >= 2");

  Json out;
  out["task"] = "circle";
  out["mode"] = mode;
  if (mode == "point") {
    if (!in.contains("angle") || !in["angle"].is_number())
      throw schema_error("cli", "circle input: point mode needs a numeric 'angle'");
    const double angle = in["angle"].get<double>();
    out["angle"] = angle;
    out["index"] = circle_index(theta, std::polar(1.0, angle), cfg.tol);
  } else if (mode == "sweep") {
    Json list = Json::array();
    for (const CircleSample& s : circle_sweep(theta, samples, cfg.tol))
      list.push_back(Json{{"angle", s.angle}, {"index", s.index}});
    out["samples"] = std::move(list);
  } else if (mode == "jumps") {
    Json list = Json::array();
    for (const CircleJump& jmp : circle_jumps(theta, samples, cfg.tol))
      list.push_back(
          Json{{"angle", jmp.angle}, {"before", jmp.before}, {"after", jmp.after}});
    out["jumps"] = std::move(list);
  } else {
    throw schema_error("cli",
                       "circle input: mode must be \"point\", \"sweep\" or \"jumps\"");
  }
  return out;
}

Json run_filtrate(const Json& in, const CliConfig& cfg) {
  check_keys(in, {"graph", "boundary", "order"}, cfg.strict, "filtrate input");
  require_keys(in, {"graph", "boundary"}, "filtrate input");
  const GraphProblem gp = parse_graph_problem(in["graph"], cfg.strict);
  const BoundaryCondition bc =
      parse_boundary(in["boundary"], gp.n, gp.graph, cfg.strict);
  if (bc.mode != BoundaryCondition::Mode::per_vertex)
    throw precondition_error("cli", "filtration needs per-vertex boundary data");

  std::vector<Index> order;
  if (in.contains("order")) {
    if (!in["order"].is_array())
      throw schema_error("cli", "filtrate input: 'order' must be an array of vertices");
    for (const Json& v : in["order"]) {
      if (!v.is_number_integer())
        throw schema_error("cli", "filtrate input: 'order' must list integers");
      order.push_back(v.get<Index>());
    }
  } else {
    order.resize(static_cast<size_t>(gp.graph.num_vertices));
    for (Index v = 0; v < gp.graph.num_vertices; ++v) order[static_cast<size_t>(v)] = v;
  }

  const FiltrationResult res =
      filtration_contributions(gp.graph, gp.n, edge_flows(gp, cfg.tol),
                               bc.vertex_frames, order, cfg.tol);

  Json out;
  out["task"] = "filtrate";
  out["total"] = res.total;
  Json steps = Json::array();
  for (const FiltrationStep& s : res.steps)
    steps.push_back(Json{{"vertex", s.vertex},
                         {"contribution", s.contribution},
                         {"reduced_dim", s.reduced_dim}});
  out["steps"] = std::move(steps);
  return out;
}

Json run_oracle(const Json& in, const CliConfig& cfg) {
  check_keys(in, {"graph", "boundary"}, cfg.strict, "oracle input");
  require_keys(in, {"graph", "boundary"}, "oracle input");
  const GraphProblem gp = parse_graph_problem(in["graph"], cfg.strict);
  const BoundaryCondition bc =
      parse_boundary(in["boundary"], gp.n, gp.graph, cfg.strict);

  OracleOptions opts;
  opts.initial_mesh = cfg.mesh;
  const OracleResult res =
      graph_oracle_index(gp.graph, gp.n, gp.edge_data, bc, opts, cfg.tol);

  Json out;
  out["task"] = "oracle";
  out["index"] = res.index;
  out["kernel_dim"] = res.kernel_dim;
  out["mesh"] = res.mesh;
  out["history"] = res.history;
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Symplectic index toolkit for LQ optimal control on metric graphs"};
  app.require_subcommand(1);

  CliConfig cfg;
  const std::vector<std::pair<const char*, const char*>> tasks = {
      {"maslov", "Triple index / signature of a Lagrangian triple"},
      {"compare", "Index difference between two boundary conditions"},
      {"discretize", "Partition lower bound for a fixed-endpoint index"},
      {"iterate", "Periodic index differences of flow iterates (both forms)"},
      {"circle", "Spectral-flow function on the unit circle"},
      {"filtrate", "Per-vertex index contributions of a boundary filtration"},
      {"oracle", "Reference index from the discretized quadratic form"},
  };
  for (const auto& [name, desc] : tasks) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--in", cfg.in_path, "input JSON file")->required();
    sub->add_option("--out", cfg.out_path, "output JSON file (stdout when omitted)");
    sub->add_flag("--strict", cfg.strict, "reject unknown JSON keys");
    sub->add_option("--seed", cfg.seed, "seed recorded in the output");
    sub->add_option("--mesh", cfg.mesh, "initial oracle mesh")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol-rank", cfg.tol.rank_floor, "rank decision floor");
    sub->add_option("--tol-eig", cfg.tol.eig_floor, "eigenvalue classification floor");
    sub->add_option("--tol-symp", cfg.tol.symplectic_defect,
                    "symplectic defect tolerance");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  CLI::App* sub = app.get_subcommands().front();
  cfg.has_seed = sub->count("--seed") > 0;
  const std::string task = sub->get_name();

  try {
    const Json in = load_json(cfg.in_path);
    Json out;
    if (task == "maslov") out = run_maslov(in, cfg);
    else if (task == "compare") out = run_compare(in, cfg);
    else if (task == "discretize") out = run_discretize(in, cfg);
    else if (task == "iterate") out = run_iterate(in, cfg);
    else if (task == "circle") out = run_circle(in, cfg);
    else if (task == "filtrate") out = run_filtrate(in, cfg);
    else out = run_oracle(in, cfg);
    if (cfg.has_seed) out["seed"] = cfg.seed;
    emit(out, cfg);
    return 0;
  } catch (const schema_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const stabilization_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const precondition_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("symidx");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace symidx
