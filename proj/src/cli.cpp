#include "majorant/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "majorant/chain.hpp"
#include "majorant/densities.hpp"
#include "majorant/errors.hpp"
#include "majorant/experiments.hpp"
#include "majorant/report.hpp"
#include "majorant/zprocess.hpp"

namespace majorant::cli {

namespace {

using Json = nlohmann::ordered_json;

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out = "-";
  std::string format;  // empty: csv for data, json for reports
  bool timing = false;
};

// What a command produced: data columns or test reports.
struct Result {
  std::string command;
  Json config = Json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;
  std::vector<TestReport> reports;
};

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream in(spec);
  std::string item;
  while (std::getline(in, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParameterError("grid '" + spec + "' must be start:stop:step");
    }
  }
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
    throw ParameterError("grid '" + spec + "' must be start:stop:step with step > 0 and stop >= start");
  return uniform_grid(parts[0], parts[1], parts[2]);
}

PsiRoute parse_route(const std::string& name) {
  if (name == "chain") return PsiRoute::chain;
  if (name == "hull") return PsiRoute::hull;
  throw ParameterError("unknown route '" + name + "' (chain, hull)");
}

// ---------------------------------------------------------------------------
// Commands

struct KbParams {
  double horizon = 4.0;
  double dt = 1e-3;
  double delta = 0.0;  // 0: dt
  double b = 1.0;
};

Result simulate_kb(const Common& c, const KbParams& p) {
  const double delta = p.delta > 0.0 ? p.delta : p.dt;
  if (!(p.horizon > delta)) throw ParameterError("horizon must exceed delta");
  Result r;
  r.command = "simulate-kb";
  r.config = {{"horizon", p.horizon}, {"dt", p.dt}, {"delta", delta}, {"b", p.b}};
  RngStream rng(c.seed, 0);
  const auto times = uniform_grid(delta, p.horizon, p.dt);
  const auto chain = sample_vertex_chain(rng, p.b, p.horizon, delta);
  auto paths = assemble_paths(rng, chain, times);
  r.columns = {"t", "B", "K", "X"};
  r.data = {times, std::move(paths.B.values), std::move(paths.K.values), std::move(paths.X.values)};
  return r;
}

struct ZParams {
  double z = 1.0;
  double horizon = 1.0;
  double dt = 1e-3;
  std::string variant = "path-decomposition";
  std::size_t paths = 1;
};

Result simulate_z(const Common& c, const ZParams& p) {
  ZSpec spec;
  spec.z = p.z;
  spec.variant = parse_z_variant(p.variant);
  if (p.paths == 0) throw ParameterError("paths must be positive");
  Result r;
  r.command = "simulate-z";
  r.config = {{"z", p.z}, {"horizon", p.horizon}, {"dt", p.dt}, {"variant", p.variant}, {"paths", p.paths}};
  r.columns = {"path", "t", "Z", "J", "B_tilde"};
  r.data.assign(5, {});
  const auto times = uniform_grid(0.0, p.horizon, p.dt);
  for (std::size_t k = 0; k < p.paths; ++k) {
    RngStream rng(c.seed, stream_id(0, k));
    const auto zp = sample_z(rng, spec, times);
    const auto j = future_infimum(zp, rng);
    const auto b = reflect_at_future_infimum(zp, j);
    for (std::size_t i = 0; i < times.size(); ++i) {
      r.data[0].push_back(static_cast<double>(k));
      r.data[1].push_back(times[i]);
      r.data[2].push_back(zp.path.values[i]);
      r.data[3].push_back(j.values[i]);
      r.data[4].push_back(b.values[i]);
    }
  }
  return r;
}

struct DensityParams {
  std::string kind;
  double z = 1.0;
  double t = 1.0;
  double h = 1.0;
  int n = 3;
  std::string x_grid = "0:4:0.01";
};

Result density(const DensityParams& p) {
  const auto xs = parse_grid(p.x_grid);
  std::function<double(double)> f;
  if (p.kind == "z-onepoint") {
    f = [&](double x) { return eval_z_onepoint(p.z, p.t, x); };
  } else if (p.kind == "heat" || p.kind == "bes3" || p.kind == "bes5") {
    f = [&](double x) {
      const auto k = eval_kernels(p.z, x, p.t);
      return p.kind == "heat" ? k.p : p.kind == "bes3" ? k.bes3 : k.bes5;
    };
  } else {
    const auto kind = parse_boundary_kind(p.kind);
    const BoundaryParams params{p.n, p.h, p.z};
    f = [kind, params](double x) { return eval_boundary_density(kind, x, params); };
  }
  Result r;
  r.command = "density " + p.kind;
  r.config = {{"kind", p.kind}, {"z", p.z}, {"t", p.t}, {"h", p.h}, {"n", p.n}, {"x_grid", p.x_grid}};
  r.columns = {"x", "density"};
  std::vector<double> d;
  for (double x : xs) d.push_back(f(x));
  r.data = {xs, std::move(d)};
  return r;
}

struct ExperimentParams {
  std::size_t n = 0;  // 0: experiment default
  std::vector<std::string> lambdas;
  double z = 1.0;
  // drift
  double epsilon = 0.1;
  double s = 1e-3;
  std::size_t n_accept = 10000;
  std::size_t max_draws = 0;
  std::string route = "chain";
  double grid_dt = 1e-3;
  // generator
  std::string gamma = "z";
  double phi_center = NAN;  // NaN: z
  double phi_scale = 1.0;
  bool phi_constant = false;
  std::vector<double> t_list{0.01, 0.005, 0.0025};
  std::size_t replicates = 1'000'000;
  // reflection, semimartingale
  double horizon = NAN;  // NaN: experiment default
  double dt = NAN;
  std::size_t seeds = 100;
  double start = 0.1;
  double eta = 1e-3;
  std::size_t paths = 100;
  std::string form = "B";
  std::vector<double> times{0.5, 1.0, 2.0};
};

std::array<double, 2> parse_lambda(const std::string& text) {
  const auto comma = text.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(text);
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw ParameterError("lambda '" + text + "' must be two numbers separated by a comma");
  }
}

Result experiment(const std::string& name, const Common& c, const ExperimentParams& p) {
  const RunOptions run{c.seed, c.threads};
  Result r;
  r.command = "experiment " + name;
  auto n_or = [&](std::size_t fallback) { return p.n > 0 ? p.n : fallback; };
  auto or_default = [](double v, double fallback) { return std::isnan(v) ? fallback : v; };
  if (name == "projection") {
    std::vector<std::array<double, 2>> lambdas;
    for (const auto& l : p.lambdas) lambdas.push_back(parse_lambda(l));
    if (lambdas.empty()) lambdas = default_lambdas();
    const std::size_t n = n_or(3000);
    r.config = {{"n", n}, {"lambdas", lambdas}};
    r.reports = projection_study(run, n, lambdas);
  } else if (name == "x1-chi5") {
    const std::size_t n = n_or(100000);
    r.config = {{"n", n}};
    r.reports = {x1_chi5(run, n)};
  } else if (name == "drift") {
    DriftExperimentSpec spec;
    spec.epsilon = p.epsilon;
    spec.s = p.s;
    spec.n_accept = p.n_accept;
    spec.max_draws = p.max_draws;
    spec.route = parse_route(p.route);
    spec.grid_dt = p.grid_dt;
    r.config = {{"epsilon", p.epsilon}, {"s", p.s},           {"n_accept", p.n_accept},
                {"max_draws", p.max_draws}, {"route", p.route}, {"grid_dt", p.grid_dt}};
    r.reports = {drift_experiment(run, spec)};
  } else if (name == "generator") {
    GeneratorSpec spec;
    spec.z = p.z;
    if (p.gamma == "uniform") {
      spec.gamma = MixingDensity::uniform(p.z);
    } else if (p.gamma != "z") {
      throw ParameterError("unknown gamma '" + p.gamma + "' (z, uniform)");
    }
    spec.phi = TestFunction{or_default(p.phi_center, p.z), p.phi_scale, p.phi_constant};
    spec.t_list = p.t_list;
    spec.replicates = p.replicates;
    r.config = {{"z", p.z},
                {"gamma", p.gamma},
                {"phi_center", spec.phi.center},
                {"phi_scale", p.phi_scale},
                {"phi_constant", p.phi_constant},
                {"t_list", p.t_list},
                {"replicates", p.replicates}};
    r.reports = {generator_experiment(run, spec)};
  } else if (name == "reflection") {
    const ReflectionSpec spec{p.z, or_default(p.horizon, 1.0), or_default(p.dt, 2e-5)};
    r.config = {{"z", spec.z}, {"horizon", spec.horizon}, {"dt", spec.dt}, {"seeds", p.seeds}};
    r.reports = {reflection_battery(run, spec, p.seeds)};
  } else if (name == "semimartingale") {
    SemimartingaleSpec spec;
    spec.start = p.start;
    spec.horizon = or_default(p.horizon, 1.0);
    spec.dt = or_default(p.dt, 1e-5);
    spec.eta = p.eta;
    spec.paths = p.paths;
    spec.form = parse_compensator_form(p.form);
    r.config = {{"start", spec.start}, {"horizon", spec.horizon}, {"dt", spec.dt},
                {"eta", spec.eta},     {"paths", spec.paths},     {"form", p.form}};
    r.reports = {semimartingale_residual_check(run, spec)};
  } else if (name == "infimum") {
    const std::size_t n = n_or(100000);
    r.config = {{"z", p.z}, {"n", n}};
    r.reports = infimum_experiment(run, p.z, n);
  } else if (name == "z-equivalence") {
    const std::size_t n = n_or(100000);
    r.config = {{"z", p.z}, {"n", n}, {"times", p.times}};
    r.reports = z_equivalence(run, p.z, n, p.times);
  } else {
    throw ParameterError("unknown experiment '" + name + "'");
  }
  return r;
}

// Fast invariant battery; the negative controls count as passing when they fail.
Result selftest(const Common& c, std::ostream& err) {
  const RunOptions run{c.seed, c.threads};
  Result r;
  r.command = "selftest";
  auto add = [&](TestReport t) {
    err << (t.passed ? "PASS " : "FAIL ") << t.name << "\n";
    r.reports.push_back(std::move(t));
  };
  auto add_all = [&](std::vector<TestReport> ts) {
    for (auto& t : ts) add(std::move(t));
  };
  auto expect_failure = [&](TestReport t) {
    t.passed = !t.passed;
    t.name += "_rejected";
    t.metadata["expect"] = "fail";
    add(std::move(t));
  };
  add(x1_chi5(run, 20000));
  const std::vector<double> times{0.5, 1.0, 2.0};
  add_all(z_equivalence(run, 1.0, 20000, times));
  add_all(infimum_experiment(run, 1.0, 20000));
  const auto lambdas = default_lambdas();
  add_all(projection_study(run, 3000, lambdas));
  DriftExperimentSpec drift;
  drift.n_accept = 2000;
  add(drift_experiment(run, drift));
  GeneratorSpec gen;
  gen.phi.center = 1.5;
  gen.replicates = 100000;
  add(generator_experiment(run, gen));
  add(reflection_battery(run, ReflectionSpec{}, 20));
  SemimartingaleSpec semi;
  semi.paths = 10;
  add(semimartingale_residual_check(run, semi));
  semi.form = CompensatorForm::none;
  expect_failure(semimartingale_residual_check(run, semi));
  add(multipoint_agreement(run, 30));
  add(coupling_check(run, 100));
  add(onepoint_gap(1.0, 1.0, 0.1));
  add(f5_normalization(0.2));
  return r;
}

// ---------------------------------------------------------------------------
// Output

void emit(const Result& r, const Common& c, std::ostream& out) {
  std::ofstream file;
  std::ostream* dest = &out;
  if (c.out != "-") {
    file.open(c.out, std::ios::binary);
    if (!file) throw InputError("cannot open '" + c.out + "' for writing");
    dest = &file;
  }
  const bool data = !r.columns.empty();
  const std::string format = c.format.empty() ? (data ? "csv" : "json") : c.format;
  const OutputHeader header{r.command, c.seed, r.config};
  if (data) {
    if (format == "csv") {
      write_csv(*dest, header, r.columns, r.data);
    } else {
      write_data_json(*dest, header, r.columns, r.data);
    }
  } else if (format == "csv") {
    write_reports_csv(*dest, header, r.reports);
  } else {
    write_reports_json(*dest, header, r.reports, c.timing);
  }
  dest->flush();
  if (!*dest) throw InputError("writing '" + c.out + "' failed");
}

bool seed_on_command_line(const std::vector<std::string>& args) {
  return std::any_of(args.begin(), args.end(),
                     [](const std::string& a) { return a == "--seed" || a.rfind("--seed=", 0) == 0; });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Brownian motion, its concave majorant and the process 2K - B: samplers, densities and "
               "statistical experiments.",
               "majorant"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", MAJORANT_VERSION);
  app.set_config("--config", "", "TOML file with option values; flags on the command line take precedence");

  Common common;
  app.add_option("--seed", common.seed, "Master seed (MAJORANT_SEED overrides the config file)")
      ->capture_default_str();
  app.add_option("--threads", common.threads, "Worker threads, 0 for all cores")->capture_default_str();
  app.add_option("--out", common.out, "Output file, - for stdout")->capture_default_str();
  app.add_option("--format", common.format, "csv or json (default: csv for data, json for reports)")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--timing", common.timing, "Include runtimes in JSON reports (breaks byte-identical reruns)");

  KbParams kb;
  auto* kb_cmd = app.add_subcommand("simulate-kb", "Sample B, K and X = 2K - B on a uniform grid");
  kb_cmd->add_option("--horizon", kb.horizon, "Last time")->capture_default_str()->check(CLI::PositiveNumber);
  kb_cmd->add_option("--dt", kb.dt, "Grid step")->capture_default_str()->check(CLI::PositiveNumber);
  kb_cmd->add_option("--delta", kb.delta, "First time (default: dt)")->check(CLI::PositiveNumber);
  kb_cmd->add_option("--b", kb.b, "Anchor of the slope chain")->capture_default_str()->check(CLI::PositiveNumber);

  ZParams zp;
  auto* z_cmd = app.add_subcommand("simulate-z", "Sample Z, its future infimum J and B~ = 2J - 2J(0) + z - Z");
  z_cmd->add_option("--z", zp.z, "Starting level")->capture_default_str()->check(CLI::PositiveNumber);
  z_cmd->add_option("--horizon", zp.horizon, "Last time")->capture_default_str()->check(CLI::PositiveNumber);
  z_cmd->add_option("--dt", zp.dt, "Grid step")->capture_default_str()->check(CLI::PositiveNumber);
  z_cmd->add_option("--variant", zp.variant, "limit, path-decomposition or mixture")
      ->capture_default_str()
      ->check(CLI::IsMember({"limit", "path-decomposition", "mixture"}));
  z_cmd->add_option("--paths", zp.paths, "Number of paths")->capture_default_str();

  DensityParams dp;
  auto* d_cmd = app.add_subcommand("density", "Evaluate a density on a grid");
  d_cmd->add_option("kind", dp.kind,
                    "z-onepoint, heat, bes3, bes5 (kernels from z over time t), or bes-infimum, "
                    "z-infimum, mixture-weight, chi5")
      ->required();
  d_cmd->add_option("--z", dp.z, "Starting level")->capture_default_str()->check(CLI::PositiveNumber);
  d_cmd->add_option("--t", dp.t, "Time")->capture_default_str()->check(CLI::PositiveNumber);
  d_cmd->add_option("--level", dp.h, "Starting level h of bes-infimum")->capture_default_str();
  d_cmd->add_option("--dim", dp.n, "Dimension n of bes-infimum")->capture_default_str();
  d_cmd->add_option("--x-grid", dp.x_grid, "start:stop:step")->capture_default_str();

  ExperimentParams ep;
  auto* e_cmd = app.add_subcommand("experiment", "Run a statistical experiment and print its report");
  e_cmd->require_subcommand(1);
  std::vector<std::pair<std::string, CLI::App*>> experiments;
  auto add_experiment = [&](const std::string& name, const std::string& help) {
    auto* sub = e_cmd->add_subcommand(name, help);
    experiments.emplace_back(name, sub);
    return sub;
  };
  auto* proj = add_experiment("projection", "Two-sample KS of projections of (X(1), X(2)) against BES(5)");
  proj->add_option("--n", ep.n, "Samples per arm (default 3000)");
  proj->add_option("--lambda", ep.lambdas, "Projection weights a,b (repeatable; default six pairs)");
  auto* x1 = add_experiment("x1-chi5", "One-sample KS of X(1) against Chi(5)");
  x1->add_option("--n", ep.n, "Samples (default 100000)");
  auto* drift = add_experiment("drift", "Conditional drift of X against BES(5) given X(1) < eps, X(2) near 1");
  drift->add_option("--epsilon", ep.epsilon, "Conditioning width")->capture_default_str();
  drift->add_option("--s", ep.s, "Finite-difference step")->capture_default_str();
  drift->add_option("--n-accept", ep.n_accept, "Accepted samples per arm")->capture_default_str();
  drift->add_option("--max-draws", ep.max_draws, "Draw cap per arm, 0 for 2000 n-accept")->capture_default_str();
  drift->add_option("--route", ep.route, "chain or hull")->capture_default_str();
  drift->add_option("--grid-dt", ep.grid_dt, "Grid step of the hull route")->capture_default_str();
  auto* gen = add_experiment("generator", "Small-time generator estimate against 1/2 phi'' + gamma phi'");
  gen->add_option("--z", ep.z, "Starting level")->capture_default_str();
  gen->add_option("--gamma", ep.gamma, "z (the law of the minimum of Z) or uniform")->capture_default_str();
  gen->add_option("--phi-center", ep.phi_center, "Center of the bump (default z)");
  gen->add_option("--phi-scale", ep.phi_scale, "Width of the bump")->capture_default_str();
  gen->add_flag("--phi-constant", ep.phi_constant, "Use phi = 1");
  gen->add_option("--t-list", ep.t_list, "Times, comma separated")->delimiter(',')->capture_default_str();
  gen->add_option("--replicates", ep.replicates, "Replicates per time")->capture_default_str();
  auto* refl = add_experiment("reflection", "Brownian checks of B~ over a battery of seeds");
  refl->add_option("--z", ep.z, "Starting level")->capture_default_str();
  refl->add_option("--horizon", ep.horizon, "Horizon (default 1)");
  refl->add_option("--dt", ep.dt, "Grid step (default 2e-5)");
  refl->add_option("--seeds", ep.seeds, "Number of streams")->capture_default_str();
  auto* semi = add_experiment("semimartingale", "Residual of B after its compensator in the majorant filtration");
  semi->add_option("--start", ep.start, "Window start")->capture_default_str();
  semi->add_option("--horizon", ep.horizon, "Window length (default 1)");
  semi->add_option("--dt", ep.dt, "Grid step (default 1e-5)");
  semi->add_option("--eta", ep.eta, "Half-width excluded around vertices")->capture_default_str();
  semi->add_option("--paths", ep.paths, "Paths")->capture_default_str();
  semi->add_option("--form", ep.form, "B, X, flipped or none")->capture_default_str();
  auto* inf = add_experiment("infimum", "Infimum of Z against its law and the BES(5) law");
  inf->add_option("--z", ep.z, "Starting level")->capture_default_str();
  inf->add_option("--n", ep.n, "Samples (default 100000)");
  auto* zeq = add_experiment("z-equivalence", "Pairwise KS of the three constructions of Z");
  zeq->add_option("--z", ep.z, "Starting level")->capture_default_str();
  zeq->add_option("--n", ep.n, "Samples per construction (default 100000)");
  zeq->add_option("--times", ep.times, "Times, comma separated")->delimiter(',')->capture_default_str();

  auto* self = app.add_subcommand("selftest", "Fast invariant battery");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (!seed_on_command_line(args)) {
      if (const char* env = std::getenv("MAJORANT_SEED"); env != nullptr && *env != '\0') {
        std::size_t used = 0;
        const std::string text(env);
        try {
          common.seed = std::stoull(text, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != text.size() || text.front() == '-')
          throw ParameterError("MAJORANT_SEED must be a nonnegative integer, got '" + text + "'");
      }
    }

    Result result;
    if (*kb_cmd) {
      result = simulate_kb(common, kb);
    } else if (*z_cmd) {
      result = simulate_z(common, zp);
    } else if (*d_cmd) {
      result = density(dp);
    } else if (*e_cmd) {
      for (const auto& [name, sub] : experiments)
        if (*sub) result = experiment(name, common, ep);
    } else if (*self) {
      result = selftest(common, err);
    }
    emit(result, common, out);
    const bool failed = std::any_of(result.reports.begin(), result.reports.end(),
                                    [](const TestReport& t) { return !t.passed; });
    if (failed) err << "statistical check failed\n";
    return failed ? 2 : 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return 1;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace majorant::cli
