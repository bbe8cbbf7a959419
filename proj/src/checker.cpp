#include "convexcheck/checker.hpp"

#include <algorithm>
#include <cmath>

#include "convexcheck/errors.hpp"
#include "convexcheck/oracle.hpp"
#include "convexcheck/parallel.hpp"
#include "convexcheck/rng.hpp"

namespace convexcheck {

const char* to_string(Status s) {
  switch (s) {
    case Status::Convex:
      return "convex";
    case Status::NotConvex:
      return "not_convex";
    case Status::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

std::vector<ConditionRecord> evaluate_conditions(const Network& net, const IsolatedData& iso, double decision_tol) {
  std::vector<Subgraph> subs;
  subs.reserve(iso.per_hidden.size());
  std::vector<ConditionRecord> records;
  for (std::size_t h = 0; h < iso.per_hidden.size(); ++h) {
    const NeuronIsolation& ni = iso.per_hidden[h];
    subs.push_back(subgraph_after(net, ni.neuron));
    for (std::size_t r = 0; r < ni.restrictions.size(); ++r) {
      ConditionRecord rec;
      rec.neuron = ni.neuron;
      rec.restriction = ni.restrictions[r];
      rec.frontiers = ni.frontiers_of[r];
      records.push_back(std::move(rec));
    }
  }
  const long n = static_cast<long>(records.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long i = 0; i < n; ++i) {
    ConditionRecord& rec = records[static_cast<std::size_t>(i)];
    rec.value = inner_product_fast(net, subs[net.hidden_rank(rec.neuron)], rec.restriction);
  }
  for (auto& rec : records) {
    rec.satisfied = rec.value >= -decision_tol;
    rec.marginal = rec.satisfied && rec.value < 0.0;
  }
  return records;
}

ConvexityReport check_convexity(const Network& net, const DomainBox& box, const CheckOptions& opts) {
  ConvexityReport rep;
  rep.options = opts;
  rep.partition = enumerate_regions(net, box, opts.regions);
  rep.frontiers = extract_frontiers(net, rep.partition, opts.regions);
  const IsolatedData iso = isolated_data(net, rep.partition, rep.frontiers);
  rep.conditions = evaluate_conditions(net, iso, opts.decision_tol);
  rep.pieces = merge_affine_pieces(rep.partition, rep.frontiers, opts.slope_tol);

  for (const auto& ni : iso.per_hidden) {
    if (ni.never_switches) rep.vacuous_neurons.push_back(ni.neuron);
    if (ni.degenerate_only) rep.degenerate_only_neurons.push_back(ni.neuron);
  }
  for (std::size_t f = 0; f < rep.frontiers.frontiers.size(); ++f) {
    const Frontier& fr = rep.frontiers.frontiers[f];
    if (!fr.multi_switch()) continue;
    Degeneracy dg;
    dg.frontier = f;
    dg.region_a = fr.region_a;
    dg.region_b = fr.region_b;
    dg.switching = fr.switching;
    dg.slope_changes = slopes_differ(rep.partition.regions[fr.region_a].f_affine,
                                     rep.partition.regions[fr.region_b].f_affine, opts.slope_tol);
    dg.witness = fr.witness;
    if (dg.slope_changes) rep.assumption_holds = false;
    rep.degeneracies.push_back(std::move(dg));
  }

  rep.activation_region_count = rep.partition.regions.size();
  rep.activation_frontier_count = rep.frontiers.frontiers.size();
  rep.region_count = rep.pieces.pieces.size();
  rep.frontier_count = rep.pieces.frontiers.size();
  rep.probe_misses = rep.partition.probe_misses;
  rep.dangling_facets = rep.frontiers.dangling;
  rep.thin_facets = rep.frontiers.thin;
  rep.enumeration_complete = rep.partition.complete && rep.frontiers.dangling == 0 && rep.frontiers.thin == 0;

  const bool violated = std::any_of(rep.conditions.begin(), rep.conditions.end(),
                                    [](const ConditionRecord& c) { return !c.satisfied; });
  if (violated) {
    rep.status = Status::NotConvex;
  } else if (rep.assumption_holds && rep.enumeration_complete) {
    rep.status = Status::Convex;
  } else if (opts.fallback_oracle && rep.enumeration_complete) {
    const bool convex = cpwl_convex_oracle(rep.partition, rep.frontiers).convex;
    rep.oracle_cross_check = convex;
    rep.resolved_by_oracle = true;
    rep.status = convex ? Status::Convex : Status::NotConvex;
  } else {
    rep.status = Status::Inconclusive;
  }
  return rep;
}

std::vector<ConditionRecord> check_necessary(const Network& net, const DomainBox& box, const CheckOptions& opts) {
  const Partition part = enumerate_regions(net, box, opts.regions);
  const FrontierSet fs = extract_frontiers(net, part, opts.regions);
  return evaluate_conditions(net, isolated_data(net, part, fs), opts.decision_tol);
}

bool colinear_rows(std::span<const double> u, std::span<const double> v, double tol) {
  if (u.size() != v.size()) throw DimensionError("row length mismatch");
  double nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  nu = std::sqrt(nu);
  nv = std::sqrt(nv);
  if (nu == 0.0 || nv == 0.0) return true;
  double plus = 0.0, minus = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    plus = std::max(plus, std::abs(u[i] / nu - v[i] / nv));
    minus = std::max(minus, std::abs(u[i] / nu + v[i] / nv));
  }
  return std::min(plus, minus) <= tol;
}

std::uint64_t one_layer_trial_seed(std::uint64_t seed, std::size_t attempt) {
  return derive_seed(seed, {0x0e1a7e5, attempt});
}

OneLayerSummary verify_one_hidden_layer_theorem(std::size_t trials, std::uint64_t seed, std::size_t d,
                                                std::size_t width, double box_halfwidth) {
  OneLayerSummary s;
  const DomainBox box = DomainBox::cube(d, box_halfwidth);
  const Architecture arch{d, {width}, false};
  CheckOptions opts;
  opts.fallback_oracle = false;
  const std::size_t max_attempts = 100 * std::max<std::size_t>(trials, 1);
  for (std::size_t attempt = 0; s.trials < trials; ++attempt) {
    if (attempt >= max_attempts) throw GuardRailError("too many one-hidden-layer draws rejected by the screens");
    const std::uint64_t net_seed = one_layer_trial_seed(seed, attempt);
    const Network net = sample_gaussian(arch, net_seed);
    ActivationPattern all_on{std::vector<std::uint8_t>(net.hidden_count(), 1)};
    const auto forms = linearize(net, all_on);
    std::vector<std::vector<double>> rows;
    for (NeuronIndex h : net.hidden()) {
      std::vector<double> r = forms[h].slope;
      r.push_back(forms[h].offset);
      rows.push_back(std::move(r));
    }
    bool colinear = false;
    for (std::size_t i = 0; i < rows.size() && !colinear; ++i)
      for (std::size_t j = i + 1; j < rows.size() && !colinear; ++j) colinear = colinear_rows(rows[i], rows[j]);
    if (colinear) {
      ++s.screened_colinear;
      continue;
    }
    bool all_switch = true;
    for (NeuronIndex h : net.hidden()) {
      HalfspaceSystem sys;
      sys.dim = d;
      sys.add_box(box.lo, box.hi);
      const Hyperplane eq{forms[h].slope, -forms[h].offset};
      if (!strict_feasible(sys, std::span<const Hyperplane>(&eq, 1))) all_switch = false;
    }
    if (!all_switch) {
      ++s.screened_box;
      continue;
    }
    bool nonneg = true;
    for (std::size_t e : net.incoming(net.output()))
      if (net.edges()[e].weight < 0.0) nonneg = false;
    ++s.trials;
    if (nonneg) ++s.convex_expected;
    const Status st = check_convexity(net, box, opts).status;
    const bool ok = nonneg ? st == Status::Convex : st == Status::NotConvex;
    if (ok) {
      ++s.passed;
    } else {
      ++s.failed;
      s.failing_seeds.push_back(net_seed);
    }
  }
  return s;
}

}  // namespace convexcheck
