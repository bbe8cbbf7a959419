// convexcheck: certify convexity of small DAG ReLU networks on a box.
//
//   convexcheck check <file> [--box R] [--cross-check] [--necessary-only]
//                            [--zero-tol T] [--margin-tol T] [--json out]
//   convexcheck demo [--json out]
//   convexcheck experiment [--widths 2..7] [--draws N] [--seed S] [--box R]
//                          [--out csv] [--no-timing]
//
// check exits 0 (convex), 1 (not convex) or 2 (inconclusive). Errors exit
// 64 (usage), 65 (bad network data), 66 (unreadable file), 67 (size limit)
// or 70 (solver failure).

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <regex>
#include <string>

#include "convexcheck/checker.hpp"
#include "convexcheck/errors.hpp"
#include "convexcheck/experiment.hpp"
#include "convexcheck/network_io.hpp"
#include "convexcheck/oracle.hpp"
#include "convexcheck/report.hpp"

using namespace convexcheck;

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitNoInput = 66;
constexpr int kExitGuard = 67;
constexpr int kExitSoftware = 70;

int exit_code(Status s) {
  switch (s) {
    case Status::Convex:
      return 0;
    case Status::NotConvex:
      return 1;
    case Status::Inconclusive:
      return 2;
  }
  return kExitSoftware;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string affine(const AffineForm& f) {
  std::string s;
  auto term = [&](double v, const std::string& var) {
    if (v == 0.0) return;
    if (s.empty()) s = v < 0 ? "-" : "";
    else s += v < 0 ? " - " : " + ";
    const double a = std::abs(v);
    s += var.empty() ? num(a) : (a == 1.0 ? var : num(a) + " " + var);
  };
  for (std::size_t i = 0; i < f.slope.size(); ++i) term(f.slope[i], "x" + std::to_string(i + 1));
  term(f.offset, "");
  return s.empty() ? "0" : s;
}

void emit_json(const nlohmann::json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

struct CheckArgs {
  std::string file;
  double box = 3.0;
  bool cross_check = false;
  bool necessary_only = false;
  double zero_tol = 1e-9;
  double margin_tol = kDefaultMarginTol;
  std::size_t pairs = 100000;
  std::uint64_t seed = 0;
  std::string json;
};

int cmd_check(const CheckArgs& a) {
  const Network net = load_file(a.file);
  const DomainBox box = DomainBox::cube(net.input_dim(), a.box);
  CheckOptions opts;
  opts.regions.zero_tol = a.zero_tol;
  opts.regions.margin_tol = a.margin_tol;
  opts.regions.seed = a.seed;

  if (a.necessary_only) {
    opts.fallback_oracle = false;
    const auto records = check_necessary(net, box, opts);
    bool violated = false;
    nlohmann::json conds = nlohmann::json::array();
    for (const auto& c : records) {
      violated = violated || !c.satisfied;
      nlohmann::json r = nlohmann::json::object();
      for (std::size_t i = 0; i < c.restriction.neurons.size(); ++i)
        r[net.id(c.restriction.neurons[i])] = static_cast<int>(c.restriction.bits[i]);
      conds.push_back({{"neuron", net.id(c.neuron)}, {"restriction", r}, {"value", c.value},
                       {"satisfied", c.satisfied}, {"marginal", c.marginal}});
    }
    const Status st = violated ? Status::NotConvex : Status::Inconclusive;
    emit_json({{"mode", "necessary_only"}, {"status", to_string(st)}, {"conditions", conds}}, a.json);
    std::cerr << "necessary conditions " << (violated ? "violated" : "satisfied (no sufficiency claim)") << "\n";
    return exit_code(st);
  }

  const ConvexityReport rep = check_convexity(net, box, opts);
  nlohmann::json j = report_to_json(net, rep);
  if (a.cross_check) {
    const OracleVerdict exact = cpwl_convex_oracle(rep.partition, rep.frontiers);
    const OracleVerdict sampled = sample_convex_oracle(net, box, a.pairs, a.seed);
    bool agree = !(exact.convex && !sampled.convex);
    if (rep.status != Status::Inconclusive) agree = agree && (rep.status == Status::Convex) == exact.convex;
    j["cross_check"] = {{"exact", verdict_to_json(exact)},
                        {"sampler", verdict_to_json(sampled)},
                        {"sampler_pairs", a.pairs},
                        {"agree", agree}};
  }
  emit_json(j, a.json);
  std::cerr << "status: " << to_string(rep.status) << " (" << rep.region_count << " regions, " << rep.frontier_count
            << " frontiers)\n";
  return exit_code(rep.status);
}

int cmd_demo(const std::string& json_path) {
  const Network net = build_counterexample();
  const DomainBox box = DomainBox::cube(2, 3.0);
  const ConvexityReport rep = check_convexity(net, box);
  auto& out = std::cout;

  out << "f(x) = relu(-relu(x1) + relu(x2) - 1) + relu(2 relu(x1) + relu(x2) - 0.5) on [-3, 3]^2\n\n";
  std::string order;
  for (NeuronIndex h : net.hidden()) order += (order.empty() ? "" : " ") + net.id(h);
  out << "activation regions (" << order << "): " << rep.activation_region_count << "\n";
  for (std::size_t r = 0; r < rep.partition.regions.size(); ++r) {
    const Region& R = rep.partition.regions[r];
    out << "  " << to_string(R.pattern) << "  f = " << affine(R.f_affine) << "  piece " << rep.pieces.piece_of_region[r]
        << "\n";
  }
  out << "regions (affine pieces): " << rep.region_count << "\n";
  out << "frontiers between pieces: " << rep.frontier_count << " (" << rep.activation_frontier_count
      << " activation frontiers, " << rep.degeneracies.size() << " multi-switch)\n\n";

  for (NeuronIndex h : net.hidden()) {
    out << "neuron " << net.id(h) << "\n";
    const PathVector pv = enumerate_paths(net, h);
    for (const auto& p : pv.paths) {
      out << "  path";
      for (NeuronIndex n : p.nodes) out << " " << net.id(n);
      out << "  weight " << num(p.weight) << "\n";
    }
    const Subgraph sub = subgraph_after(net, h);
    std::string gated;
    for (NeuronIndex g : sub.gated) gated += (gated.empty() ? "" : ",") + net.id(g);
    out << "  restrictions on (" << gated << ") and values:";
    bool any = false;
    for (const auto& c : rep.conditions) {
      if (c.neuron != h) continue;
      any = true;
      std::string bits;
      for (auto b : c.restriction.bits) bits += (bits.empty() ? "" : ",") + std::to_string(b);
      out << "  (" << bits << ") -> " << num(c.value);
    }
    out << (any ? "" : " none") << "\n";
  }
  out << "\nverdict: " << to_string(rep.status) << "\n\n";
  if (json_path.empty()) out << report_to_json(net, rep).dump(2) << "\n";
  else emit_json(report_to_json(net, rep), json_path);
  return exit_code(rep.status);
}

struct ExperimentArgs {
  std::string widths = "2..7";
  ExperimentConfig cfg;
  std::string out;
  bool no_timing = false;
};

int cmd_experiment(ExperimentArgs a) {
  static const std::regex range(R"(\s*(\d+)\s*\.\.\s*(\d+)\s*)");
  std::smatch m;
  if (std::regex_match(a.widths, m, range)) {
    a.cfg.width_min = std::stoul(m[1]);
    a.cfg.width_max = std::stoul(m[2]);
  } else if (std::regex_match(a.widths, m, std::regex(R"(\s*(\d+)\s*)"))) {
    a.cfg.width_min = a.cfg.width_max = std::stoul(m[1]);
  } else {
    throw CLI::ValidationError("--widths", "expected MIN..MAX");
  }
  const auto cells = run_experiment(a.cfg, &std::cerr);
  if (a.out.empty()) {
    write_csv(std::cout, cells, !a.no_timing);
  } else {
    std::ofstream f(a.out);
    if (!f) throw IoError("cannot write '" + a.out + "'");
    write_csv(f, cells, !a.no_timing);
  }
  for (const auto& c : cells)
    if (c.icnn_not_convex > 0)
      std::cerr << "warning: cell (" << c.n1 << "," << c.n2 << ") classified an ICNN draw as not convex\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact convexity certification for small DAG ReLU networks"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "Certify a network given as JSON");
  check->add_option("file", ca.file, "Network JSON file")->required();
  check->add_option("--box", ca.box, "Half-width R of the box [-R, R]^d")->check(CLI::PositiveNumber);
  check->add_flag("--cross-check", ca.cross_check, "Also run the exact and the sampling oracle");
  check->add_flag("--necessary-only", ca.necessary_only, "Evaluate the necessary conditions only");
  check->add_option("--zero-tol", ca.zero_tol, "On-hyperplane tolerance")->check(CLI::PositiveNumber);
  check->add_option("--margin-tol", ca.margin_tol, "Strict interior margin")->check(CLI::PositiveNumber);
  check->add_option("--pairs", ca.pairs, "Sampler pairs for --cross-check")->check(CLI::PositiveNumber);
  check->add_option("--seed", ca.seed, "Seed for random seeding and sampling");
  check->add_option("--json", ca.json, "Write the report here instead of stdout");

  std::string demo_json;
  auto* demo = app.add_subcommand("demo", "Walk through the two-hidden-layer counterexample");
  demo->add_option("--json", demo_json, "Write the report here instead of stdout");

  ExperimentArgs ea;
  auto* exp = app.add_subcommand("experiment", "Random two-hidden-layer MLP convexity counts");
  exp->add_option("--widths", ea.widths, "Range of both hidden widths, MIN..MAX");
  exp->add_option("--draws", ea.cfg.draws, "Networks per cell")->check(CLI::PositiveNumber);
  exp->add_option("--seed", ea.cfg.seed, "Master seed");
  exp->add_option("--box", ea.cfg.box_halfwidth, "Half-width R of the box [-R, R]^d")->check(CLI::PositiveNumber);
  exp->add_option("--dim", ea.cfg.d, "Input dimension")->check(CLI::PositiveNumber);
  exp->add_flag("--skip", ea.cfg.skip, "Add weighted input skip connections");
  exp->add_option("--out", ea.out, "CSV output file (default stdout)");
  exp->add_flag("--no-timing", ea.no_timing, "Write 0 in the seconds column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (check->parsed()) return cmd_check(ca);
    if (demo->parsed()) return cmd_demo(demo_json);
    if (exp->parsed()) return cmd_experiment(ea);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoInput;
  } catch (const GuardRailError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitGuard;
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSoftware;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitSoftware;
  }
  return kExitUsage;
}
