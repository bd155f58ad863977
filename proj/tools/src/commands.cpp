#include "roughkit_cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "roughkit/control_lab.hpp"
#include "roughkit/errors.hpp"
#include "roughkit/filtering.hpp"
#include "roughkit/path_io.hpp"
#include "roughkit/rough_path.hpp"
#include "roughkit/signatures.hpp"
#include "roughkit/stopping.hpp"

namespace roughkit::cli {

namespace {

template <class T>
T param(const Json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw UsageError(std::string("config field '") + key + "' has the wrong type");
  }
}

std::uint64_t require_seed(const RunConfig& run) {
  if (!run.seed) throw UsageError(run.subcommand + " is stochastic and needs --seed");
  return *run.seed;
}

Json vector_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> powers_of_two(std::size_t from, std::size_t to) {
  std::vector<double> out;
  for (std::size_t k = from; k <= to; ++k) out.push_back(static_cast<double>(std::size_t{1} << k));
  return out;
}

}  // namespace

std::vector<OutputFile> cmd_sig(const RunConfig& run) {
  std::string file = run.path_file.empty() ? param<std::string>(run.config, "path", "") : run.path_file;
  if (file.empty()) throw UsageError("sig needs --path");
  std::size_t level = param<std::size_t>(run.config, "level", run.level);
  if (level == 0) throw UsageError("sig needs --level >= 1");
  SampledPath path = read_path_csv_file(file);
  return {{"signature.json", dump17(Json::parse(signature_to_json(signature(path, level))))}};
}

std::vector<OutputFile> cmd_pvar(const RunConfig& run) {
  std::string file = run.path_file.empty() ? param<std::string>(run.config, "path", "") : run.path_file;
  if (file.empty()) throw UsageError("pvar needs --path");
  double p = run.p ? *run.p : param<double>(run.config, "p", 2.0);
  if (!(p >= 1.0)) throw UsageError("pvar needs p >= 1");
  SampledPath path = read_path_csv_file(file);
  Json doc;
  doc["version"] = "pvar-v1";
  doc["path"] = file;
  doc["p"] = p;
  doc["value"] = p_variation(path, p);
  return {{"pvar.json", dump17(doc)}};
}

std::vector<OutputFile> cmd_price(const RunConfig& run) {
  const Json& cfg = run.config;
  std::uint64_t seed = require_seed(run);
  std::string kind_name = param<std::string>(cfg, "kind", "put");
  PayoffKind kind;
  if (kind_name == "put") kind = PayoffKind::american_put;
  else if (kind_name == "call") kind = PayoffKind::american_call;
  else throw UsageError("price: payoff kind must be 'put' or 'call', got '" + kind_name + "'");
  double strike = param<double>(cfg, "strike", 20.0);
  double s0 = param<double>(cfg, "s0", strike);
  double rate = param<double>(cfg, "rate", 0.06);
  double sigma = param<double>(cfg, "sigma", 0.2);
  double horizon = param<double>(cfg, "horizon", 1.0);
  std::string model_name = param<std::string>(cfg, "model", "gbm");
  std::unique_ptr<PathModel> model;
  if (model_name == "gbm") model = std::make_unique<GeometricBrownianModel>(s0, rate, sigma, horizon);
  else if (model_name == "abm") model = std::make_unique<ArithmeticBrownianModel>(s0, rate * s0, sigma * s0, horizon);
  else throw UsageError("price: model must be 'gbm' or 'abm'");

  MCConfig mc;
  mc.seed = seed;
  mc.n_paths = param<std::size_t>(cfg, "n_paths", mc.n_paths);
  mc.n_steps = param<std::size_t>(cfg, "n_steps", mc.n_steps);
  mc.level = param<std::size_t>(cfg, "level", mc.level);
  mc.k_budget = param<double>(cfg, "k_budget", mc.k_budget);
  mc.basis_degree = param<std::size_t>(cfg, "basis_degree", mc.basis_degree);
  mc.starts = param<std::size_t>(cfg, "starts", mc.starts);
  mc.max_evaluations = param<std::size_t>(cfg, "max_evaluations", mc.max_evaluations);

  OptimizationResult res = price_american_option(kind, strike, rate, *model, mc);

  Json echo;
  echo["kind"] = kind_name;
  echo["strike"] = strike;
  echo["s0"] = s0;
  echo["rate"] = rate;
  echo["sigma"] = sigma;
  echo["horizon"] = horizon;
  echo["model"] = model_name;
  echo["n_paths"] = mc.n_paths;
  echo["n_steps"] = mc.n_steps;
  echo["level"] = mc.level;
  echo["k_budget"] = mc.k_budget;
  echo["basis_degree"] = mc.basis_degree;
  echo["starts"] = mc.starts;
  echo["max_evaluations"] = mc.max_evaluations;
  Json doc;
  doc["version"] = "price-v1";
  doc["seed"] = seed;
  doc["config"] = std::move(echo);
  doc["model"] = model->describe();
  doc["estimate"] = res.out_of_sample.estimate;
  doc["std_error"] = res.out_of_sample.std_error;
  doc["in_sample"] = res.in_sample;
  doc["in_sample_se"] = res.in_sample_se;
  doc["policy_kind"] = to_string(res.kind);
  doc["policy"] = res.policy.functional.to_string();
  doc["budget_exhausted"] = res.budget_exhausted;

  std::ostringstream trace;
  trace << "evaluation,kind,start,value,best\n";
  for (const auto& row : res.trace)
    trace << row.evaluation << ',' << row.kind << ',' << row.start << ',' << format_double(row.value) << ','
          << format_double(row.best) << '\n';
  return {{"price.json", dump17(doc)}, {"price_trace.csv", trace.str()}};
}

std::vector<OutputFile> cmd_filter(const RunConfig& run) {
  const Json& cfg = run.config;
  std::uint64_t seed = require_seed(run);
  if (!cfg.contains("model")) throw UsageError("filter: config needs a 'model' (lgm-v1)");
  LinearGaussianModel model = model_from_json(cfg.at("model").dump());
  model.validate();
  auto n_steps = param<std::size_t>(cfg, "n_steps", 1024);
  auto component = param<std::size_t>(cfg, "component", 0);
  if (component >= model.signal_dim()) throw UsageError("filter: component out of range");

  std::vector<LinearGaussianModel> candidates;
  if (cfg.contains("candidates")) {
    for (const auto& c : cfg.at("candidates")) candidates.push_back(model_from_json(c.dump()));
  } else {
    for (double s : param<std::vector<double>>(cfg, "c_scales", {1.0})) {
      LinearGaussianModel scaled = model;
      for (auto& piece : scaled.pieces) piece.c *= s;
      candidates.push_back(std::move(scaled));
    }
  }
  if (candidates.empty()) throw UsageError("filter: empty candidate set");

  PenaltyConfig pen;
  pen.k1 = param<double>(cfg, "k1", 1.0);
  pen.k2 = param<double>(cfg, "k2", 1.0);
  if (param<bool>(cfg, "reference_is_model", false)) pen.reference.push_back(model);
  double t = param<double>(cfg, "t", model.horizon);

  SimulatedPair pair = simulate_pair(model, seed, n_steps);
  std::vector<FilterState> states = kalman_bucy(model, pair.observation);
  RoughPath lifted = canonical_lift(pair.observation);
  TestFunction phi = [component](const Vector& s) { return s[static_cast<Eigen::Index>(component)]; };
  RobustReport rep = robust_report(phi, candidates, pair.observation, pen, t);

  bool clamped = false;
  for (const auto& s : states) clamped = clamped || s.clamped;
  Json doc;
  doc["version"] = "filter-v1";
  doc["seed"] = seed;
  doc["n_steps"] = n_steps;
  doc["t"] = t;
  doc["component"] = component;
  doc["n_candidates"] = candidates.size();
  doc["k1"] = pen.k1;
  doc["k2"] = pen.k2;
  doc["final_q"] = vector_json(states.back().q);
  doc["final_R"] = matrix_json(states.back().R);
  doc["covariance_clamped"] = clamped;
  doc["signal_final"] = vector_json(pair.signal.value(pair.signal.size() - 1));
  doc["nll_ito"] = neg_log_likelihood_ito(model, pair.observation, states);
  doc["nll_pathwise"] = neg_log_likelihood_pathwise(model, lifted, states);
  doc["estimate"] = rep.estimate;
  doc["ci"] = Json::array({rep.ci.lo, rep.ci.hi});
  doc["best_candidate"] = rep.best_candidate;
  doc["betas"] = rep.betas;
  doc["penalties"] = rep.penalties;

  std::ostringstream csv;
  write_filter_csv(csv, states);
  return {{"filter.json", dump17(doc)}, {"filter.csv", csv.str()}};
}

std::vector<OutputFile> cmd_control_lab(const RunConfig& run) {
  const Json& cfg = run.config;
  std::uint64_t seed = require_seed(run);
  auto n_steps = param<std::size_t>(cfg, "n_steps", 64);
  auto names = param<std::vector<std::string>>(cfg, "instances", {"lq", "bilinear", "trader"});
  const auto known = desk_instance_names();
  for (const auto& n : names)
    if (std::find(known.begin(), known.end(), n) == known.end()) throw UsageError("unknown desk instance '" + n + "'");

  Json doc;
  doc["version"] = "control-lab-v1";
  doc["seed"] = seed;

  // DPP at every knot
  std::ostringstream dpp_csv;
  dpp_csv << "instance,r,direct,split,gap\n";
  Json dpp = Json::array();
  double dpp_max = 0.0;
  for (const auto& name : names) {
    DeskInstance d = desk_instance(name, seed, n_steps);
    ValueResult v = value(d.problem, 0.0, d.x0, d.a0, d.grid);
    double worst = 0.0;
    for (std::size_t k = 0; k <= d.grid.n_knots; ++k) {
      double r = d.grid.knot_time(k, d.problem.horizon());
      DppReport rep = dpp_check(d.problem, 0.0, r, d.x0, d.a0, d.grid);
      worst = std::max(worst, rep.gap);
      dpp_csv << name << ',' << format_double(r) << ',' << format_double(rep.direct) << ','
              << format_double(rep.split) << ',' << format_double(rep.gap) << '\n';
    }
    dpp_max = std::max(dpp_max, worst);
    Json row;
    row["instance"] = name;
    row["value"] = v.value;
    row["control"] = Json::array();
    for (const auto& u : v.control.values) row["control"].push_back(u[0]);
    row["evaluations"] = v.evaluations;
    row["max_gap"] = worst;
    dpp.push_back(std::move(row));
  }
  doc["dpp"] = std::move(dpp);
  doc["dpp_max_gap"] = dpp_max;

  // degeneracy
  Json dcfg = param<Json>(cfg, "degeneracy", Json::object());
  TradingConfig trading;
  trading.x = param<double>(dcfg, "x", 0.0);
  trading.inventory_bound = param<double>(dcfg, "Q", 1.0);
  trading.q_exp = param<double>(dcfg, "q", 2.0);
  trading.inventory_levels = param<std::size_t>(dcfg, "inventory_levels", 0);
  auto mesh_values = param<std::vector<double>>(dcfg, "meshes", powers_of_two(4, 10));
  std::vector<std::size_t> meshes;
  for (double m : mesh_values) meshes.push_back(static_cast<std::size_t>(m));
  auto eps_list = param<std::vector<double>>(dcfg, "eps", {0.0, 0.1});
  auto finest = param<std::size_t>(dcfg, "sample_steps", meshes.empty() ? 1024 : meshes.back());
  SampledPath sample = brownian_path(seed, finest, 1.0, 1);
  DegeneracyTable deg = degeneracy_demo(mesh_family(sample, meshes), meshes, eps_list, trading);
  std::vector<Vector> line_values;
  for (std::size_t k = 0; k <= 64; ++k) line_values.push_back(Vector::Constant(1, static_cast<double>(k) / 64.0));
  SampledPath line = SampledPath::uniform(1.0, std::move(line_values));
  Json dj;
  dj["eps0_increasing"] = deg.eps0_increasing;
  dj["eps0_matches_closed_form"] = deg.eps0_matches;
  dj["regularized_bound"] = deg.regularized_bound;
  dj["regularized_bounded"] = deg.regularized_bounded;
  dj["line_value"] = trading_value(line, 0.0, trading);
  dj["line_closed_form"] = trading.x + trading.inventory_bound * line.horizon();
  doc["degeneracy"] = std::move(dj);
  std::ostringstream deg_csv;
  write_degeneracy_csv(deg_csv, deg);

  // HJB residual on the smooth-line instance under refinement
  Json hcfg = param<Json>(cfg, "hjb", Json::object());
  auto factors = param<std::vector<std::size_t>>(hcfg, "refinements", {1, 2, 4});
  std::ostringstream hjb_csv;
  hjb_csv << "refinement,n_steps,x_nodes,a_nodes,u_levels,max_residual,mean_residual\n";
  Json hj = Json::array();
  for (std::size_t r : factors) {
    if (r == 0) throw UsageError("hjb refinements must be positive");
    DeskInstance d = desk_instance("line", seed, 8 * r);
    auto axis = [](double lo, double hi, std::size_t n) {
      std::vector<double> g(n);
      for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
      return g;
    };
    ValueTable tab = value_table(d.problem, axis(-2.0, 2.0, 16 * r + 1), axis(-3.0, 3.0, 12 * r + 1),
                                 axis(-2.0, 2.0, 8 * r + 1));
    HjbResidual res = hjb_residual(d.problem, tab, 4 * r);
    hjb_csv << r << ',' << 8 * r << ',' << 16 * r + 1 << ',' << 12 * r + 1 << ',' << 8 * r + 1 << ','
            << format_double(res.max_abs) << ',' << format_double(res.mean_abs) << '\n';
    Json row;
    row["refinement"] = r;
    row["max_residual"] = res.max_abs;
    row["mean_residual"] = res.mean_abs;
    row["terminal_max"] = res.terminal_max;
    hj.push_back(std::move(row));
  }
  doc["hjb"] = std::move(hj);

  // continuity in the driver
  Json ccfg = param<Json>(cfg, "continuity", Json::object());
  std::string cname = param<std::string>(ccfg, "instance", "lq");
  if (std::find(known.begin(), known.end(), cname) == known.end())
    throw UsageError("unknown desk instance '" + cname + "'");
  auto pairs = param<std::size_t>(ccfg, "pairs", 10);
  double p = param<double>(ccfg, "p", 2.5);
  DeskInstance cd = desk_instance(cname, seed, n_steps);
  ControlGrid cgrid = cd.grid;
  cgrid.n_knots = param<std::size_t>(ccfg, "knots", 2);
  cgrid.levels = param<std::size_t>(ccfg, "levels", 5);
  std::vector<std::size_t> coarse;
  for (std::size_t k = 1; k <= pairs; ++k) coarse.push_back(std::size_t{1} << k);
  SampledPath csample = brownian_path(seed + 1, std::size_t{2} << pairs, 1.0, 1);
  ContinuityScan scan = driver_continuity_scan(cd.problem, csample, coarse, p, cd.x0, cd.a0, cgrid);
  Json cj;
  cj["instance"] = cname;
  cj["p"] = p;
  cj["max_ratio"] = scan.max_ratio;
  cj["median_ratio"] = scan.median_ratio;
  cj["head_max"] = scan.head_max;
  cj["tail_max"] = scan.tail_max;
  cj["stable"] = scan.stable;
  doc["continuity"] = std::move(cj);
  std::ostringstream cont_csv;
  write_continuity_csv(cont_csv, scan);

  return {{"control_lab.json", dump17(doc)},
          {"dpp.csv", dpp_csv.str()},
          {"degeneracy.csv", deg_csv.str()},
          {"hjb.csv", hjb_csv.str()},
          {"continuity.csv", cont_csv.str()}};
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"roughkit: rough paths, signatures, stopping, filtering and control"};
  app.require_subcommand(1);
  RunConfig rc;
  std::string config_file;
  std::uint64_t seed = 0;
  double p = 0.0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "JSON config file");
    sub->add_option("--seed", seed, "random seed (u64)");
    sub->add_option("--out", rc.out_dir, "output directory (default: main report to stdout)");
  };
  auto* sig = app.add_subcommand("sig", "signature of a CSV path (sig-v1 JSON)");
  sig->add_option("--path", rc.path_file, "CSV path t,x1,..,xd");
  sig->add_option("--level", rc.level, "truncation level");
  auto* pvar = app.add_subcommand("pvar", "p-variation of a CSV path");
  pvar->add_option("--path", rc.path_file, "CSV path t,x1,..,xd");
  CLI::Option* p_opt = pvar->add_option("-p,--p", p, "exponent p >= 1");
  auto* price = app.add_subcommand("price", "American option price by signature stopping");
  auto* filter = app.add_subcommand("filter", "Kalman-Bucy filter and robust estimate");
  auto* lab = app.add_subcommand("control-lab", "control lab tables on desk instances");
  for (auto* sub : {sig, pvar, price, filter, lab}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  rc.subcommand = chosen->get_name();
  if (chosen->count("--seed")) rc.seed = seed;
  if (chosen == pvar && p_opt->count()) rc.p = p;
  try {
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw UsageError("cannot open config '" + config_file + "'");
      try {
        rc.config = Json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw UsageError("config '" + config_file + "': " + e.what());
      }
      if (!rc.config.is_object()) throw UsageError("config must be a JSON object");
    }
    std::vector<OutputFile> files;
    if (rc.subcommand == "sig") files = cmd_sig(rc);
    else if (rc.subcommand == "pvar") files = cmd_pvar(rc);
    else if (rc.subcommand == "price") files = cmd_price(rc);
    else if (rc.subcommand == "filter") files = cmd_filter(rc);
    else files = cmd_control_lab(rc);

    if (rc.out_dir.empty()) {
      out << files.front().content << '\n';
    } else {
      std::filesystem::create_directories(rc.out_dir);
      for (const auto& f : files) {
        std::ofstream file(std::filesystem::path(rc.out_dir) / f.name, std::ios::binary);
        if (!file) throw UsageError("cannot write " + f.name + " under " + rc.out_dir);
        file << f.content;
        if (f.name.ends_with(".json")) file << '\n';
      }
    }
    return kExitOk;
  } catch (const DivergenceError& e) {
    err << "divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const SingularityError& e) {
    err << "singularity: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const UsageError& e) {
    err << "usage: " << e.what() << '\n';
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
  } catch (const ModelError& e) {
    err << "model error: " << e.what() << '\n';
  } catch (const ArgumentError& e) {
    err << "argument error: " << e.what() << '\n';
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
  } catch (const std::filesystem::filesystem_error& e) {
    err << "io error: " << e.what() << '\n';
  }
  return kExitUsage;
}

}  // namespace roughkit::cli
