#include "graphfilt/apps.hpp"
#include "graphfilt/distsim.hpp"
#include "graphfilt/filterbank.hpp"
#include "graphfilt/io.hpp"
#include "graphfilt/learn.hpp"
#include "graphfilt/rational_filter.hpp"
#include "graphfilt/regularized.hpp"
#include "graphfilt/spectral.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace fs = std::filesystem;
using namespace graphfilt;

namespace {

struct Common {
  bool json = false;
  std::string out = ".";
};

struct GraphArgs {
  std::string path;
  std::string format;
  bool directed = false;
  std::string gso = "laplacian";

  void add(CLI::App* app, bool with_gso = true) {
    app->add_option("-i,--input", path, "graph file (edge list, .mtx or .json)")->required()->check(CLI::ExistingFile);
    app->add_option("--format", format, "edgelist | matrixmarket | json")
        ->check(CLI::IsMember({"edgelist", "matrixmarket", "json"}));
    app->add_flag("--directed", directed, "edge list describes a directed graph");
    if (with_gso)
      app->add_option("--gso", gso, "shift operator kind")
          ->check(CLI::IsMember({"adjacency", "laplacian", "normalized_adjacency", "normalized_laplacian",
                                 "random_walk_laplacian"}));
  }
  Graph load() const {
    const GraphFormat f = format.empty() ? guess_graph_format(path) : graph_format_from_string(format);
    return load_graph(path, f, directed);
  }
  ShiftOperator shift(const Graph& g) const { return graphfilt::gso(g, gso_kind_from_string(gso)); }
};

fs::path out_dir(const Common& c) {
  fs::create_directories(c.out);
  return fs::path(c.out);
}

void report(const Common& c, const Json& summary) {
  if (c.json) {
    std::cout << summary.dump() << '\n';
    return;
  }
  for (const auto& [key, val] : summary.items())
    std::cout << key << ": " << (val.is_string() ? val.get<std::string>() : val.dump()) << '\n';
}

// One value per line; a non-numeric first line is a header; "node,value" keeps the last field.
Vector read_signal(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::vector<double> vals;
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto comma = line.find_last_of(',');
    const std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
    try {
      size_t used = 0;
      vals.push_back(std::stod(field, &used));
    } catch (const std::exception&) {
      if (lineno == 1) continue;
      throw ParseError(lineno, "malformed signal value '" + field + "'");
    }
  }
  return Eigen::Map<Vector>(vals.data(), static_cast<Index>(vals.size()));
}

std::vector<std::pair<Index, int>> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::vector<std::pair<Index, int>> out;
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream ss(line);
    long long node = 0;
    int cls = 0;
    if (!(ss >> node >> cls)) {
      if (lineno == 1) continue;
      throw ParseError(lineno, "expected 'node,class'");
    }
    out.emplace_back(node, cls);
  }
  return out;
}

void write_signal(const fs::path& path, const Vector& y, const std::string& name = "value") {
  std::vector<double> idx(y.size());
  for (Index i = 0; i < y.size(); ++i) idx[i] = static_cast<double>(i);
  write_csv(path, {{"node", idx}, {name, std::vector<double>(y.data(), y.data() + y.size())}});
}

std::vector<double> to_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw InvalidArgument("malformed number '" + tok + "' in list");
    }
  }
  return out;
}

struct TargetArgs {
  std::string target = "heat";
  double tau = 1.0, cutoff = 1.0, cutoff2 = 1.5;

  void add(CLI::App* app) {
    app->add_option("--target", target, "heat | lowpass | highpass | bandpass")
        ->check(CLI::IsMember({"heat", "lowpass", "highpass", "bandpass"}));
    app->add_option("--tau", tau, "heat kernel time");
    app->add_option("--cutoff", cutoff, "band edge");
    app->add_option("--cutoff2", cutoff2, "upper band edge for bandpass");
  }
  std::function<double(double)> fn() const {
    const double t = tau, c = cutoff, c2 = cutoff2;
    if (target == "heat") return [t](double l) { return std::exp(-t * l); };
    if (target == "lowpass") return [c](double l) { return l <= c ? 1.0 : 0.0; };
    if (target == "highpass") return [c](double l) { return l > c ? 1.0 : 0.0; };
    return [c, c2](double l) { return l >= c && l <= c2 ? 1.0 : 0.0; };
  }
};

// ---------------------------------------------------------------------------

void setup_graph(CLI::App& root, Common& common) {
  auto* cmd = root.add_subcommand("graph", "inspect or generate graphs")->require_subcommand(1);

  auto* info = cmd->add_subcommand("info", "summary of a graph file");
  auto ga = std::make_shared<GraphArgs>();
  ga->add(info, false);
  info->callback([ga, &common] {
    const Graph g = ga->load();
    Index comps = 0;
    connected_components(g, &comps);
    Index maxdeg = 0;
    for (const auto& nb : g.undirected_neighbors()) maxdeg = std::max<Index>(maxdeg, static_cast<Index>(nb.size()));
    report(common, Json{{"nodes", g.node_count()},
                        {"edges", g.edges().size()},
                        {"directed", g.directed()},
                        {"components", comps},
                        {"bipartite", two_coloring(g).has_value()},
                        {"max_degree", maxdeg}});
    write_json(out_dir(common) / "graph.json", to_json(g));
  });

  auto* gen = cmd->add_subcommand("generate", "synthetic graph");
  struct GenArgs {
    std::string model = "path";
    Index n = 10;
    Index blocks = 2;
    double p_in = 0.5, p_out = 0.05;
    std::uint64_t seed = 0;
  };
  auto gen_args = std::make_shared<GenArgs>();
  gen->add_option("--model", gen_args->model, "path | cycle | complete | sbm")
      ->check(CLI::IsMember({"path", "cycle", "complete", "sbm"}));
  gen->add_option("--n", gen_args->n, "number of nodes")->check(CLI::PositiveNumber);
  gen->add_option("--blocks", gen_args->blocks, "sbm blocks")->check(CLI::PositiveNumber);
  gen->add_option("--p-in", gen_args->p_in, "sbm within-block probability")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--p-out", gen_args->p_out, "sbm cross-block probability")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", gen_args->seed, "random seed");
  gen->callback([gen_args, &common] {
    const GenArgs& a = *gen_args;
    Graph g;
    if (a.model == "path") g = path_graph(a.n);
    else if (a.model == "cycle") g = cycle_graph(a.n);
    else if (a.model == "complete") g = complete_graph(a.n);
    else {
      std::vector<Index> sizes(a.blocks, a.n / a.blocks);
      for (Index b = 0; b < a.n % a.blocks; ++b) ++sizes[b];
      Rng rng(a.seed);
      g = stochastic_block_model(sizes, a.p_in, a.p_out, rng);
    }
    const fs::path dir = out_dir(common);
    std::ofstream el(dir / "graph.edges");
    save_edge_list(g, el);
    write_json(dir / "graph.json", to_json(g));
    report(common, Json{{"nodes", g.node_count()}, {"edges", g.edges().size()}});
  });
}

void setup_spectrum(CLI::App& root, Common& common) {
  auto* cmd = root.add_subcommand("spectrum", "eigendecomposition of a shift operator");
  auto ga = std::make_shared<GraphArgs>();
  ga->add(cmd);
  auto svg = std::make_shared<bool>(false);
  cmd->add_flag("--svg", *svg, "also write spectrum.svg");
  cmd->callback([ga, svg, &common] {
    const Graph g = ga->load();
    const SpectralBasis b = eigendecompose(ga->shift(g));
    const CVector& lam = b.eigenvalues();
    std::vector<double> idx, re, im;
    for (Index i = 0; i < lam.size(); ++i) {
      idx.push_back(static_cast<double>(i));
      re.push_back(lam[i].real());
      im.push_back(lam[i].imag());
    }
    const fs::path dir = out_dir(common);
    write_csv(dir / "spectrum.csv", {{"index", idx}, {"real", re}, {"imag", im}});
    if (*svg) write_svg(dir / "spectrum.svg", "spectrum", {{"eigenvalues", idx, re, true}});
    report(common, Json{{"nodes", g.node_count()},
                        {"real", b.is_real()},
                        {"lambda_min", *std::min_element(re.begin(), re.end())},
                        {"lambda_max", *std::max_element(re.begin(), re.end())}});
  });
}

void setup_filter(CLI::App& root, Common& common) {
  auto* cmd = root.add_subcommand("filter", "design or apply graph filters")->require_subcommand(1);

  auto* design = cmd->add_subcommand("design", "fit a filter to a target response");
  struct DesignArgs {
    std::string kind = "chebyshev";
    TargetArgs target;
    Index k = 10, p = 2, q = 2, grid = 200;
    double lambda_max = 2.0;
    bool svg = false;
  };
  auto da = std::make_shared<DesignArgs>();
  design->add_option("--kind", da->kind, "chebyshev | ls | prony | constrained")
      ->check(CLI::IsMember({"chebyshev", "ls", "prony", "constrained"}));
  da->target.add(design);
  design->add_option("--K", da->k, "polynomial order")->check(CLI::NonNegativeNumber);
  design->add_option("--P", da->p, "denominator order")->check(CLI::NonNegativeNumber);
  design->add_option("--Q", da->q, "numerator order")->check(CLI::NonNegativeNumber);
  design->add_option("--lambda-max", da->lambda_max, "upper end of the spectrum")->check(CLI::PositiveNumber);
  design->add_option("--grid", da->grid, "design grid size")->check(CLI::PositiveNumber);
  design->add_flag("--svg", da->svg, "also write response.svg");
  design->callback([da, &common] {
    const auto target = da->target.fn();
    const Vector grid = Vector::LinSpaced(da->grid, 0.0, da->lambda_max);
    Vector beta(grid.size());
    for (Index i = 0; i < grid.size(); ++i) beta[i] = target(grid[i]);
    FilterSpec spec;
    std::function<double(double)> resp;
    Json extra = Json::object();
    if (da->kind == "chebyshev" || da->kind == "ls") {
      ConvFilter f = da->kind == "chebyshev" ? design_chebyshev(target, da->lambda_max, da->k)
                                             : design_ls_universal(target, 0.0, da->lambda_max, da->k, da->grid);
      resp = [f](double l) { return f.response(l); };
      spec = f;
    } else {
      const RationalDesign d = da->kind == "prony" ? design_prony(grid, beta, da->p, da->q)
                                                   : design_constrained(grid, beta, da->p, da->q);
      const RationalFilter f = d.filter;
      resp = [f](double l) { return f.response(l); };
      spec = f;
      extra = Json{{"stable", d.stable}, {"min_abs_denominator", d.min_abs_denominator}};
    }
    std::vector<double> r;
    double sup = 0.0;
    for (Index i = 0; i < grid.size(); ++i) {
      r.push_back(resp(grid[i]));
      sup = std::max(sup, std::abs(r.back() - beta[i]));
    }
    const fs::path dir = out_dir(common);
    write_json(dir / "filter.json", to_json(spec));
    write_csv(dir / "response.csv", {{"lambda", to_std(grid)}, {"target", to_std(beta)}, {"response", r}});
    if (da->svg)
      write_svg(dir / "response.svg", "frequency response",
                {{"target", to_std(grid), to_std(beta)}, {"response", to_std(grid), r}});
    Json summary{{"kind", filter_kind(spec)}, {"max_grid_error", sup}};
    summary.update(extra);
    report(common, summary);
  });

  auto* app = cmd->add_subcommand("apply", "run a saved filter on a signal");
  auto ga = std::make_shared<GraphArgs>();
  ga->add(app);
  auto fpath = std::make_shared<std::string>();
  auto spath = std::make_shared<std::string>();
  app->add_option("--filter", *fpath, "filter JSON")->required()->check(CLI::ExistingFile);
  app->add_option("--signal", *spath, "signal CSV")->required()->check(CLI::ExistingFile);
  app->callback([ga, fpath, spath, &common] {
    const Graph g = ga->load();
    const ShiftOperator s = ga->shift(g);
    const FilterSpec spec = filter_from_json(read_json(*fpath));
    const Vector x = read_signal(*spath);
    Vector y;
    if (auto* c = std::get_if<ConvFilter>(&spec)) y = apply(*c, s, x);
    else if (auto* r = std::get_if<RationalFilter>(&spec)) {
      RationalSolveOptions opts;
      if (!s.symmetric()) opts.solver = RationalSolver::dense;
      y = apply(*r, s, x, opts).y;
    } else if (auto* nv = std::get_if<NodeVaryingFilter>(&spec)) y = apply(*nv, s, x);
    else if (auto* ev = std::get_if<EdgeVaryingSpec>(&spec)) y = apply(ev->filter, ev->support, x);
    else if (auto* v = std::get_if<VolterraFilter>(&spec)) y = apply(*v, s, x);
    else if (auto* m = std::get_if<MedianFilter>(&spec)) y = apply(*m, s, x);
    else y = apply(std::get<MultiGsoFilter>(spec), x);
    write_signal(out_dir(common) / "output.csv", y);
    report(common, Json{{"kind", filter_kind(spec)}, {"input_norm", x.norm()}, {"output_norm", y.norm()}});
  });
}

void setup_denoise(CLI::App& root, Common& common) {
  auto* cmd = root.add_subcommand("denoise", "regularized graph signal denoising");
  struct Args {
    GraphArgs graph;
    std::string signal, method = "tikhonov";
    double gamma = 1.0;
    Index k = 1;
  };
  auto a = std::make_shared<Args>();
  a->graph.add(cmd);
  cmd->add_option("--signal", a->signal, "noisy signal CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--method", a->method, "tikhonov | tv2dir | trend | tv1")
      ->check(CLI::IsMember({"tikhonov", "tv2dir", "trend", "tv1"}));
  cmd->add_option("--gamma", a->gamma, "regularization weight")->check(CLI::NonNegativeNumber);
  cmd->add_option("--K", a->k, "trend filtering order")->check(CLI::NonNegativeNumber);
  cmd->callback([a, &common] {
    const Graph g = a->graph.load();
    const Vector x = read_signal(a->signal);
    Vector y;
    Json summary{{"method", a->method}};
    if (a->method == "tikhonov") {
      y = smooth_denoise(graphfilt::gso(g, GsoKind::laplacian), x, a->gamma);
    } else if (a->method == "tv2dir") {
      y = tv2_directed_denoise(a->graph.shift(g), x, a->gamma);
    } else {
      const AdmmResult r = a->method == "trend" ? trend_filter(g, x, a->gamma, a->k)
                                                : tv1_denoise(a->graph.shift(g), x, a->gamma);
      y = r.y;
      summary["iterations"] = r.iterations;
      summary["converged"] = r.converged;
      summary["objective"] = r.objective_trace.empty() ? 0.0 : r.objective_trace.back();
    }
    write_signal(out_dir(common) / "denoised.csv", y);
    summary["residual_norm"] = (y - x).norm();
    report(common, summary);
  });
}

void setup_bank(CLI::App& root, Common& common) {
  auto* cmd = root.add_subcommand("bank", "spectral filter banks")->require_subcommand(1);

  auto* design = cmd->add_subcommand("design", "tight frame design");
  struct Args {
    std::string kind = "half_cosine";
    Index m = 5, grid = 400;
    double lo = 0.0, hi = 2.0;
    bool svg = false;
  };
  auto a = std::make_shared<Args>();
  design->add_option("--kind", a->kind, "half_cosine | sgwt")->check(CLI::IsMember({"half_cosine", "sgwt"}));
  design->add_option("--M", a->m, "channels")->check(CLI::PositiveNumber);
  design->add_option("--lo", a->lo, "lower spectral edge");
  design->add_option("--hi", a->hi, "upper spectral edge");
  design->add_option("--grid", a->grid, "response grid")->check(CLI::PositiveNumber);
  design->add_flag("--svg", a->svg, "also write responses.svg");
  design->callback([a, &common] {
    const FilterBank bank = design_tight_frame(
        a->m, a->lo, a->hi, a->kind == "sgwt" ? TightFrameKind::sgwt_warped : TightFrameKind::half_cosine_translates);
    const Vector grid = Vector::LinSpaced(a->grid, a->lo, a->hi);
    std::vector<CsvColumn> cols{{"lambda", to_std(grid)}};
    std::vector<SvgSeries> series;
    for (Index c = 0; c < bank.channels(); ++c) {
      cols.push_back({"h" + std::to_string(c), to_std(bank.analysis[c](grid))});
      series.push_back({"h" + std::to_string(c), to_std(grid), cols.back().values});
    }
    const fs::path dir = out_dir(common);
    write_json(dir / "bank.json", to_json(bank));
    write_csv(dir / "responses.csv", cols);
    if (a->svg) write_svg(dir / "responses.svg", "filter bank", series);
    report(common, Json{{"channels", bank.channels()}, {"parseval_deviation", check_parseval(bank, a->lo, a->hi, a->grid)}});
  });

  auto* analyze_cmd = cmd->add_subcommand("analyze", "analysis and synthesis of a signal");
  auto ga = std::make_shared<GraphArgs>();
  ga->add(analyze_cmd);
  auto bpath = std::make_shared<std::string>();
  auto spath = std::make_shared<std::string>();
  analyze_cmd->add_option("--bank", *bpath, "bank JSON")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--signal", *spath, "signal CSV")->required()->check(CLI::ExistingFile);
  analyze_cmd->callback([ga, bpath, spath, &common] {
    const Graph g = ga->load();
    const SpectralBasis basis = eigendecompose(ga->shift(g));
    const FilterBank bank = bank_from_json(read_json(*bpath));
    const Vector x = read_signal(*spath);
    const Vector alpha = analyze(bank, basis, x);
    const Vector xr = synthesize(bank, basis, alpha);
    std::vector<double> ch, node, val;
    Index pos = 0;
    const auto sizes = bank.channel_sizes(g.node_count());
    for (size_t c = 0; c < sizes.size(); ++c)
      for (Index i = 0; i < sizes[c]; ++i, ++pos) {
        ch.push_back(static_cast<double>(c));
        node.push_back(static_cast<double>(bank.sampling_sets ? (*bank.sampling_sets)[c][i] : i));
        val.push_back(alpha[pos]);
      }
    const fs::path dir = out_dir(common);
    write_csv(dir / "coefficients.csv", {{"channel", ch}, {"node", node}, {"value", val}});
    write_signal(dir / "reconstruction.csv", xr);
    report(common, Json{{"coefficients", alpha.size()}, {"reconstruction_error", (xr - x).norm()}});
  });
}

void setup_learn(CLI::App& root, Common& common) {
  auto* cmd = root.add_subcommand("learn", "filter identification and GNN training")->require_subcommand(1);

  struct Args {
    GraphArgs graph;
    std::string taps = "1,0.5,0.25";
    Index rounds = 2000, samples = 20, epochs = 200, features = 2;
    double mu = 0.05, gamma = 1e-3, observed = 0.8, step = 0.05;
    std::string preset = "gcn";
    std::uint64_t seed = 0;
  };

  auto* lms = cmd->add_subcommand("lms", "diffusion LMS on a planted filter");
  auto la = std::make_shared<Args>();
  la->graph.add(lms);
  lms->add_option("--taps", la->taps, "planted taps, comma separated");
  lms->add_option("--T", la->rounds, "rounds")->check(CLI::PositiveNumber);
  lms->add_option("--mu", la->mu, "step size")->check(CLI::PositiveNumber);
  lms->add_option("--seed", la->seed, "random seed");
  lms->callback([la, &common] {
    const Graph g = la->graph.load();
    const ShiftOperator s = la->graph.shift(g);
    const std::vector<double> tv = parse_list(la->taps);
    const ConvFilter truth(Eigen::Map<const Vector>(tv.data(), static_cast<Index>(tv.size())));
    Rng rng(la->seed);
    const Matrix x = rng.normal_matrix(g.node_count(), la->rounds);
    const Matrix y = apply(truth, s, x);
    const LmsResult r = lms_diffusion(s, x, y, truth.order(), default_lms_config(g, la->mu), std::nullopt, truth.taps());
    std::vector<double> round(r.msd.size());
    for (size_t t = 0; t < round.size(); ++t) round[t] = static_cast<double>(t);
    const fs::path dir = out_dir(common);
    write_csv(dir / "msd.csv", {{"round", round}, {"msd", r.msd}, {"mse", r.mse}});
    const Vector mean = r.taps.rowwise().mean();
    write_csv(dir / "taps.csv", {{"k", to_std(Vector::LinSpaced(mean.size(), 0, mean.size() - 1))}, {"tap", to_std(mean)}});
    report(common, Json{{"final_msd", r.msd.empty() ? 0.0 : r.msd.back()}, {"mean_taps", to_std(mean)}});
  });

  auto* sysid = cmd->add_subcommand("sysid", "sparse filter identification from masked observations");
  auto sa = std::make_shared<Args>();
  sa->graph.add(sysid);
  sysid->add_option("--taps", sa->taps, "planted taps, comma separated");
  sysid->add_option("--samples", sa->samples, "input/output pairs")->check(CLI::PositiveNumber);
  sysid->add_option("--gamma", sa->gamma, "sparsity weight")->check(CLI::NonNegativeNumber);
  sysid->add_option("--observed", sa->observed, "fraction of observed nodes")->check(CLI::Range(0.0, 1.0));
  sysid->add_option("--seed", sa->seed, "random seed");
  sysid->callback([sa, &common] {
    const Graph g = sa->graph.load();
    const ShiftOperator s = sa->graph.shift(g);
    const std::vector<double> tv = parse_list(sa->taps);
    const ConvFilter truth(Eigen::Map<const Vector>(tv.data(), static_cast<Index>(tv.size())));
    Rng rng(sa->seed);
    const Matrix x = rng.normal_matrix(g.node_count(), sa->samples);
    const Matrix y = apply(truth, s, x);
    std::vector<Index> obs;
    for (Index i = 0; i < g.node_count(); ++i)
      if (rng.bernoulli(sa->observed)) obs.push_back(i);
    const SysIdResult r = system_identify(s, x, y, obs, truth.order(), sa->gamma);
    write_csv(out_dir(common) / "taps.csv",
              {{"k", to_std(Vector::LinSpaced(r.taps.size(), 0, r.taps.size() - 1))}, {"tap", to_std(r.taps)}});
    report(common, Json{{"taps", to_std(r.taps)},
                        {"error", (r.taps - truth.taps()).norm()},
                        {"iterations", r.iterations},
                        {"observed_nodes", obs.size()}});
  });

  auto* gnn = cmd->add_subcommand("gnn", "train a preset GNN to mimic a planted filter");
  auto na = std::make_shared<Args>();
  na->graph.add(gnn, false);
  gnn->add_option("--preset", na->preset, "gcn | sgc | gin | graphsage")
      ->check(CLI::IsMember({"gcn", "sgc", "gin", "graphsage"}));
  gnn->add_option("--epochs", na->epochs, "training epochs")->check(CLI::PositiveNumber);
  gnn->add_option("--step", na->step, "gradient step")->check(CLI::PositiveNumber);
  gnn->add_option("--features", na->features, "input features")->check(CLI::PositiveNumber);
  gnn->add_option("--samples", na->samples, "training samples")->check(CLI::PositiveNumber);
  gnn->add_option("--seed", na->seed, "random seed");
  gnn->callback([na, &common] {
    const Graph g = na->graph.load();
    const ShiftOperator s = preset_shift(na->preset, g);
    Rng rng(na->seed);
    GnnInitSpec spec;
    spec.features = {na->features, 1};
    spec.orders = {2};
    spec.activations = {Activation::identity};
    spec.node_count = g.node_count();
    spec.seed = rng.split(1).next();
    const GnnModel model = gnn_preset(na->preset, spec);
    const ConvFilter truth(Vector::LinSpaced(3, 1.0, 0.25));
    std::vector<GnnSample> data;
    for (Index t = 0; t < na->samples; ++t) {
      GnnSample smp;
      smp.x = rng.normal_matrix(g.node_count(), na->features);
      smp.target = apply(truth, s, Matrix(smp.x.rowwise().sum()));
      data.push_back(std::move(smp));
    }
    const GnnTrainResult r = gnn_train(model, s, data, GnnLoss::mse, na->step, na->epochs);
    std::vector<double> epoch(r.loss_trace.size());
    for (size_t e = 0; e < epoch.size(); ++e) epoch[e] = static_cast<double>(e);
    const fs::path dir = out_dir(common);
    write_json(dir / "model.json", to_json(r.model));
    write_csv(dir / "loss.csv", {{"epoch", epoch}, {"loss", r.loss_trace}});
    report(common, Json{{"preset", na->preset}, {"initial_loss", r.loss_trace.front()}, {"final_loss", r.loss_trace.back()}});
  });
}

void setup_sim(CLI::App& root, Common& common) {
  auto* cmd = root.add_subcommand("sim", "distributed filtering over impaired links")->require_subcommand(1);
  auto* run = cmd->add_subcommand("run", "run a scenario file");
  auto path = std::make_shared<std::string>();
  run->add_option("--scenario", *path, "scenario JSON")->required()->check(CLI::ExistingFile);
  run->callback([path, &common] {
    const Json sc = read_json(*path);
    Graph g;
    if (sc.contains("graph")) g = graph_from_json(sc.at("graph"));
    else if (sc.contains("graph_file")) {
      fs::path gp = sc.at("graph_file").get<std::string>();
      if (gp.is_relative()) gp = fs::path(*path).parent_path() / gp;
      g = load_graph(gp, guess_graph_format(gp));
    } else
      throw InvalidArgument("scenario needs 'graph' or 'graph_file'");
    NetworkModel net;
    net.s = graphfilt::gso(g, gso_kind_from_string(sc.value("gso", "laplacian")));
    net.keep_prob = sc.value("keep_prob", 1.0);
    net.quant_step = sc.value("quant_step", 0.0);
    net.seed = sc.value("seed", std::uint64_t{0});
    const FilterSpec spec = filter_from_json(sc.at("filter"));
    const auto* f = std::get_if<ConvFilter>(&spec);
    if (!f) throw InvalidArgument("simulation needs a convolutional filter");
    Vector x;
    if (sc.contains("signal")) x = vector_from_json(sc.at("signal"));
    else x = Rng(sc.value("signal_seed", std::uint64_t{0})).normal_vector(g.node_count());
    const Index trials = sc.value("trials", Index{100});
    require(trials >= 1, "trials must be positive");

    const SimTrace trace = simulate_filter(*f, net, x);
    const fs::path dir = out_dir(common);
    std::ofstream tj(dir / "trace.jsonl");
    for (size_t k = 0; k < trace.rounds.size(); ++k) {
      const RoundRecord& r = trace.rounds[k];
      Json edges = Json::array();
      for (const auto& [i, j] : r.edges) edges.push_back(Json::array({i, j}));
      tj << Json{{"round", k + 1}, {"messages", r.messages}, {"edges", edges}, {"state", to_json(r.state)}}.dump() << '\n';
    }
    const std::vector<double> dev = monte_carlo_deviation(*f, net, x, trials);
    std::vector<double> idx(dev.size());
    for (size_t t = 0; t < idx.size(); ++t) idx[t] = static_cast<double>(t);
    write_csv(dir / "metrics.csv", {{"trial", idx}, {"squared_deviation", dev}});
    double mean = 0.0;
    for (double d : dev) mean += d;
    mean /= static_cast<double>(dev.size());
    Json summary{{"rounds", trace.rounds.size()}, {"trials", trials}, {"mean_squared_deviation", mean}};
    if (net.keep_prob < 1.0 && net.s.symmetric())
      summary["link_loss_bound"] = link_loss_bound(*f, net.s, net.keep_prob, x.norm());
    if (net.quant_step > 0.0) summary["quantization_mse"] = quantization_mse(*f, net.s, net.quant_step);
    report(common, summary);
  });
}

void setup_apps(CLI::App& root, Common& common) {
  auto* cmd = root.add_subcommand("apps", "detection, classification and clustering")->require_subcommand(1);

  auto* anomaly = cmd->add_subcommand("anomaly", "high-pass energy detector");
  struct AArgs {
    GraphArgs graph;
    std::string signal, statistic = "l2_norm";
    double cutoff = 1.0, threshold = 1.0;
  };
  auto aa = std::make_shared<AArgs>();
  aa->graph.add(anomaly);
  anomaly->add_option("--signal", aa->signal, "signal CSV")->required()->check(CLI::ExistingFile);
  anomaly->add_option("--cutoff", aa->cutoff, "pass band starts above this frequency");
  anomaly->add_option("--threshold", aa->threshold, "decision threshold")->check(CLI::PositiveNumber);
  anomaly->add_option("--statistic", aa->statistic, "l2_norm | max_gft_coeff")
      ->check(CLI::IsMember({"l2_norm", "max_gft_coeff"}));
  anomaly->callback([aa, &common] {
    const Graph g = aa->graph.load();
    const SpectralBasis basis = eigendecompose(aa->graph.shift(g));
    const Vector x = read_signal(aa->signal);
    DetectorSpec det{SpectralKernel::parametric("indicator", {aa->cutoff, std::numeric_limits<double>::max()}),
                     aa->statistic == "l2_norm" ? AnomalyStatistic::l2_norm : AnomalyStatistic::max_gft_coeff,
                     aa->threshold};
    const Detection d = anomaly_detect(det, basis, x);
    const Vector y = basis.filter(det.filter(basis.real_eigenvalues()), x);
    write_signal(out_dir(common) / "scores.csv", y.cwiseAbs(), "score");
    report(common, Json{{"statistic", d.statistic}, {"anomalous", d.anomalous}});
  });

  auto* ssl = cmd->add_subcommand("ssl", "semi-supervised label propagation");
  struct SArgs {
    GraphArgs graph;
    std::string labels, family = "conv";
    Index k = 3, p = 1, q = 1;
    double gamma = 1e-3;
  };
  auto sa = std::make_shared<SArgs>();
  sa->graph.gso = "normalized_adjacency";
  sa->graph.add(ssl);
  ssl->add_option("--labels", sa->labels, "CSV of node,class for labeled nodes")->required()->check(CLI::ExistingFile);
  ssl->add_option("--family", sa->family, "conv | rational")->check(CLI::IsMember({"conv", "rational"}));
  ssl->add_option("--K", sa->k, "conv order")->check(CLI::NonNegativeNumber);
  ssl->add_option("--P", sa->p, "denominator order")->check(CLI::NonNegativeNumber);
  ssl->add_option("--Q", sa->q, "numerator order")->check(CLI::NonNegativeNumber);
  ssl->add_option("--gamma", sa->gamma, "tap regularization")->check(CLI::NonNegativeNumber);
  ssl->callback([sa, &common] {
    const Graph g = sa->graph.load();
    const auto pairs = read_labels(sa->labels);
    int classes = 0;
    std::vector<int> cls(g.node_count(), 0);
    std::vector<Index> labeled;
    for (const auto& [node, c] : pairs) {
      require(node >= 0 && node < g.node_count(), "labeled node " + std::to_string(node) + " out of range");
      require(c >= 0, "class labels must be nonnegative");
      cls[node] = c;
      labeled.push_back(node);
      classes = std::max(classes, c + 1);
    }
    SslOptions opts;
    opts.family = sa->family == "conv" ? SslFamily::conv : SslFamily::rational;
    opts.k = sa->k;
    opts.p = sa->p;
    opts.q = sa->q;
    opts.gamma = sa->gamma;
    const SslResult r = ssl_label_propagate(make_label_problem(cls, labeled, classes), sa->graph.shift(g), opts);
    Vector pred(g.node_count());
    for (Index i = 0; i < pred.size(); ++i) pred[i] = r.predicted[i];
    write_signal(out_dir(common) / "labels.csv", pred, "label");
    report(common, Json{{"classes", classes}, {"labeled", labeled.size()}});
  });

  auto* cluster = cmd->add_subcommand("cluster", "spectral clustering");
  struct CArgs {
    GraphArgs graph;
    Index k = 2;
    std::string mode = "exact";
    std::uint64_t seed = 0;
  };
  auto ca = std::make_shared<CArgs>();
  ca->graph.add(cluster, false);
  cluster->add_option("--k", ca->k, "clusters")->check(CLI::PositiveNumber);
  cluster->add_option("--mode", ca->mode, "exact | filtered")->check(CLI::IsMember({"exact", "filtered"}));
  cluster->add_option("--seed", ca->seed, "random seed");
  cluster->callback([ca, &common] {
    const Graph g = ca->graph.load();
    const ClusterResult r =
        spectral_cluster(g, ca->k, ca->mode == "exact" ? ClusterMode::exact : ClusterMode::filtered, ca->seed);
    Vector lab(g.node_count());
    for (Index i = 0; i < lab.size(); ++i) lab[i] = r.labels[i];
    write_signal(out_dir(common) / "clusters.csv", lab, "cluster");
    report(common, Json{{"k", ca->k}, {"mode", ca->mode}, {"zero_rows", r.zero_rows.size()}});
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph signal filtering toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_flag("--json", common.json, "machine-readable summary on stdout");
  app.add_option("-o,--out", common.out, "output directory");
  setup_graph(app, common);
  setup_spectrum(app, common);
  setup_filter(app, common);
  setup_denoise(app, common);
  setup_bank(app, common);
  setup_learn(app, common);
  setup_sim(app, common);
  setup_apps(app, common);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const graphfilt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
