#include "hyperrate/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "hyperrate/error.hpp"
#include "hyperrate/instance_io.hpp"
#include "hyperrate/markov.hpp"
#include "hyperrate/oracle.hpp"
#include "hyperrate/report.hpp"

namespace hyperrate {

namespace {

struct RunConfig {
  std::string instance;
  std::vector<std::string> eps;
  std::uint64_t seed = 0;
  std::size_t weights = 33;
  std::string format = "text";
  std::string output;
  int threads = 0;
  int k = 1;
  std::vector<double> birth_death;
  std::string matrix;
  bool independent = false;
};

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ValidationError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ValidationError("not a number: '" + s + "'");
  return v;
}

// "a" or "start:stop:step", stop included when the step lands on it.
std::vector<double> expand_eps(const std::vector<std::string>& args) {
  std::vector<double> out;
  for (const auto& a : args) {
    auto c1 = a.find(':');
    if (c1 == std::string::npos) {
      out.push_back(parse_double(a));
      continue;
    }
    auto c2 = a.find(':', c1 + 1);
    if (c2 == std::string::npos) throw ValidationError("eps range needs start:stop:step");
    double lo = parse_double(a.substr(0, c1)), hi = parse_double(a.substr(c1 + 1, c2 - c1 - 1));
    double step = parse_double(a.substr(c2 + 1));
    if (!(step > 0.0) || hi < lo) throw ValidationError("bad eps range '" + a + "'");
    auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) out.push_back(std::round((lo + double(i) * step) * 1e12) / 1e12);
  }
  for (double e : out)
    if (!(e >= 0.0) || !std::isfinite(e)) throw ValidationError("eps must be finite and non-negative");
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fixed6(v[i]);
  return s;
}

SolverOptions solver_options(const RunConfig& c) {
  SolverOptions o;
  o.seed = c.seed;
  o.weights = c.weights;
  return o;
}

ReportHeader header(const std::string& cmd, const RunConfig& c, const ProblemInstance& inst,
                    const std::vector<double>& eps) {
  ReportHeader h;
  h.command = cmd;
  h.instance_hash = hash_hex(instance_hash(inst));
  h.seed = c.seed;
  SolverOptions o = solver_options(c);
  h.settings = {{"setting", std::string(to_string(inst.setting))},
                {"eps", join(eps)},
                {"format", c.format},
                {"weights", std::to_string(o.weights)},
                {"tolerance", "1e-10"},
                {"scalar_restarts", std::to_string(o.scalar_restarts)},
                {"multiterminal_restarts", std::to_string(o.multiterminal_restarts)}};
  return h;
}

// Per-function tolerances: instance values, overridden by the flags in order.
std::vector<double> tolerances(const RunConfig& c, const ProblemInstance& inst) {
  auto over = expand_eps(c.eps);
  std::vector<double> t = inst.tolerances;
  for (std::size_t i = 0; i < over.size() && i < t.size(); ++i) t[i] = over[i];
  if (over.size() > t.size()) throw ValidationError("more eps values than functions");
  return t;
}

bool scalar_setting(Setting s) { return s == Setting::p2p || s == Setting::side_info || s == Setting::markov; }

Matrix parse_matrix(const std::string& s) {
  Matrix m;
  std::stringstream rows(s);
  std::string row;
  while (std::getline(rows, row, ';')) {
    std::vector<double> r;
    std::stringstream cells(row);
    std::string cell;
    while (std::getline(cells, cell, ',')) r.push_back(parse_double(cell));
    m.push_back(std::move(r));
  }
  return m;
}

void cmd_hypergraph(std::ostream& os, const RunConfig& c, const ProblemInstance& inst, Format fmt) {
  auto eps = tolerances(c, inst);
  auto hdr = header("hypergraph", c, inst, eps);
  if (inst.setting == Setting::distributed) {
    auto pair = maximal_pair(inst, eps[0]);
    emit_hypergraph(os, hdr, inst, {}, &pair, fmt);
    return;
  }
  std::vector<MaximalHypergraph> hs;
  if (scalar_setting(inst.setting)) {
    hs.push_back(maximal_edges(inst, eps[0]));
  } else {
    for (std::size_t i = 0; i < inst.functions.size(); ++i) hs.push_back(maximal_edges_for(inst, i, eps[i]));
  }
  emit_hypergraph(os, hdr, inst, hs, nullptr, fmt);
}

RateResult solve_rate(const ProblemInstance& inst, double eps, const SolverOptions& o) {
  if (scalar_setting(inst.setting)) return rate_scalar(inst, eps, o);
  if (inst.setting == Setting::distributed) return sum_rate_distributed(inst, eps, o);
  throw ValidationError("rate needs a single-rate setting; use region for " + std::string(to_string(inst.setting)));
}

RateRegion solve_region(const ProblemInstance& inst, const std::vector<double>& eps, const SolverOptions& o,
                        bool independent) {
  switch (inst.setting) {
    case Setting::distributed:
      return independent ? region_independent(inst, eps[0], o) : region_distributed(inst, eps[0], o);
    case Setting::mdc: return region_mdc(inst, eps[0], eps[1], eps[2], o);
    case Setting::successive_refinement: return region_successive_refinement(inst, eps[0], eps[1], o);
    case Setting::cascade: return region_cascade(inst, eps[0], eps[1], o);
    default: throw ValidationError("region needs a multiterminal setting");
  }
}

std::vector<Check> verify_suite(const ProblemInstance& inst, const std::vector<double>& eps, const SolverOptions& o) {
  std::vector<Check> out;
  auto add = [&](std::string name, bool pass, std::string detail) {
    out.push_back({std::move(name), pass, std::move(detail)});
  };
  if (scalar_setting(inst.setting)) {
    const double e = eps[0];
    auto h = maximal_edges(inst, e);
    if (h.symbols <= 16) {
      auto b = brute_maximal_edges(inst, e);
      add("hypergraph", b.edges == h.edges, "solver " + edges_string(h) + ", brute force " + edges_string(b));
    }
    auto r = rate_scalar(inst, e, o);
    auto a = verify_zero_distortion(inst, r, e);
    add("zero-distortion", bool(a), a ? "all probable tuples within tolerance" : a.failure);
    GridSpec g;
    for (; g.m >= 2; g.m /= 2) {
      try {
        auto gr = grid_min_rate(inst, e, g);
        bool ok = r.rate >= gr.value - gr.tolerance - 1e-6 && r.rate <= gr.value + 1e-6;
        add("grid rate", ok,
            "solver " + fixed6(r.rate) + ", grid " + fixed6(gr.value) + " +/- " + fixed6(gr.tolerance) +
                " at m=" + std::to_string(gr.m));
        break;
      } catch (const CapError&) {
      }
    }
    return out;
  }
  if (inst.setting == Setting::distributed) {
    auto r = sum_rate_distributed(inst, eps[0], o);
    auto a = verify_zero_distortion(inst, r, eps[0]);
    add("sum-rate zero-distortion", bool(a), a ? "all probable tuples within tolerance" : a.failure);
    auto region = region_distributed(inst, eps[0], o);
    auto ra = verify_zero_distortion(inst, region);
    add("region zero-distortion", bool(ra), ra ? "every frontier vertex passes" : ra.failure);
    GridSpec g;
    g.m = 12;
    while (g.m > 2 && aux_search_count(inst, g) > g.budget) --g.m;
    if (aux_search_count(inst, g) <= g.budget) {
      auto x = general_aux_search(inst, eps[0], g);
      bool ok = x.found && x.value >= r.rate - 1e-6 && x.value <= r.rate + std::max(x.certificate, 0.05);
      add("sum rate vs general auxiliaries", ok,
          "solver " + fixed6(r.rate) + ", grid " + fixed6(x.value) + " at m=" + std::to_string(g.m) +
              " (certificate " + fixed6(x.certificate) + ")");
    }
    return out;
  }
  auto region = solve_region(inst, eps, o, false);
  auto ra = verify_zero_distortion(inst, region);
  add("region zero-distortion", bool(ra), ra ? "every frontier vertex passes" : ra.failure);
  add("region nonempty", !region.frontier.empty(), std::to_string(region.frontier.size()) + " vertices");
  return out;
}

int dispatch(const std::string& cmd, const RunConfig& c, std::ostream& os) {
  const Format fmt = parse_format(c.format);
  const SolverOptions o = solver_options(c);
  if (cmd == "markov") {
    MarkovModel m;
    double eps = c.eps.empty() ? 0.0 : expand_eps(c.eps).at(0);
    if (!c.birth_death.empty()) {
      if (c.birth_death.size() != 3) throw ValidationError("--birth-death takes n lambda mu");
      if (!(c.birth_death[0] >= 2.0) || c.birth_death[0] != std::floor(c.birth_death[0]))
        throw ValidationError("birth-death size must be an integer >= 2");
      m = birth_death(std::size_t(c.birth_death[0]), c.birth_death[1], c.birth_death[2], eps, c.k);
    } else if (!c.matrix.empty()) {
      auto P = parse_matrix(c.matrix);
      std::vector<double> values;
      for (std::size_t i = 0; i < P.size(); ++i) values.push_back(double(i + 1));
      m = markov_model(P, values, eps, c.k);
    } else {
      if (c.instance.empty()) throw ValidationError("markov needs --instance, --birth-death or --matrix");
      auto inst = load_instance_file(c.instance);
      if (!c.eps.empty()) inst = with_tolerance(inst, eps);
      m = markov_model(inst);
    }
    auto b = ub_markov(m, c.k, o);
    auto s = sparsity(m, c.k);
    emit_markov(os, header("markov", c, m.instance, {m.eps()}), b, s, fmt);
    return 0;
  }

  if (c.instance.empty()) throw ValidationError("--instance is required");
  if (!std::filesystem::exists(c.instance)) throw ValidationError("instance file not found: " + c.instance);
  auto inst = load_instance_file(c.instance);

  if (cmd == "hypergraph") {
    cmd_hypergraph(os, c, inst, fmt);
  } else if (cmd == "rate") {
    auto eps = tolerances(c, inst);
    auto r = solve_rate(inst, eps[0], o);
    emit_rate(os, header("rate", c, inst, {eps[0]}), inst, r, fmt);
  } else if (cmd == "region") {
    auto eps = tolerances(c, inst);
    auto r = solve_region(inst, eps, o, c.independent);
    auto hdr = header("region", c, inst, eps);
    if (c.independent) hdr.settings.push_back({"inner", "independent"});
    emit_region(os, hdr, r, fmt);
  } else if (cmd == "curve") {
    if (!scalar_setting(inst.setting)) throw ValidationError("curve needs a p2p, side_info or markov instance");
    auto eps = c.eps.empty() ? std::vector<double>{inst.tolerance()} : expand_eps(c.eps);
    auto curve = sweep_curve(inst, eps, o);
    emit_curve(os, header("curve", c, inst, eps), curve, fmt);
  } else if (cmd == "verify") {
    auto eps = tolerances(c, inst);
    auto checks = verify_suite(inst, eps, o);
    emit_checks(os, header("verify", c, inst, eps), checks, fmt);
    for (const auto& ch : checks)
      if (!ch.pass) return 3;
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Function computation under maximal distortion: hypergraphs, rates, regions"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", version());
  RunConfig c;
  const std::vector<std::string> names = {"hypergraph", "rate", "region", "curve", "markov", "verify"};
  const std::vector<std::string> about = {
      "maximal hyperedges, centers, radii and pair admissibility",
      "minimum rate (sum rate for distributed instances)",
      "rate region frontier",
      "rate against a list or range of tolerances",
      "k-letter upper bound and sparsity report for a Markov source",
      "cross-check solver output against the brute-force oracles"};
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto* s = app.add_subcommand(names[i], about[i]);
    s->add_option("--instance,-i", c.instance, "instance JSON file");
    s->add_option("--eps,-e", c.eps, "tolerance override(s); start:stop:step expands to a range");
    s->add_option("--seed", c.seed, "random seed")->capture_default_str();
    s->add_option("--weights", c.weights, "weight grid size for regions")->capture_default_str();
    s->add_option("--format,-f", c.format, "text, csv or json")->capture_default_str();
    s->add_option("--output,-o", c.output, "write to this file instead of stdout");
    s->add_option("--threads", c.threads, "worker threads (also HYPERRATE_THREADS)");
    if (names[i] == "markov") {
      s->add_option("--k", c.k, "supersymbol length")->capture_default_str();
      s->add_option("--birth-death", c.birth_death, "n lambda mu")->expected(3);
      s->add_option("--matrix", c.matrix, "transition matrix, rows separated by ';'");
    }
    if (names[i] == "region") s->add_flag("--independent", c.independent, "independent-source inner bound");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }
  if (c.threads > 0) setenv("HYPERRATE_THREADS", std::to_string(c.threads).c_str(), 1);
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    std::ostringstream buf;
    int code = dispatch(cmd, c, buf);
    if (c.output.empty()) {
      out << buf.str();
    } else {
      std::ofstream f(c.output, std::ios::binary);
      if (!f) throw ValidationError("cannot write " + c.output);
      f << buf.str();
    }
    return code;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const CapError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace hyperrate
