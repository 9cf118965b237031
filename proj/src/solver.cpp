#include <algorithm>
#include <numeric>

#include "edgeplan/solver.hpp"
#include "limits.hpp"

namespace edgeplan {

namespace {

constexpr int kUndecided = -2;
constexpr int kSkipped = -1;

struct Option {
  int flavour = 0;
  int node = 0;
  int importance = 0;
  std::vector<double> demand;  // indexed by resource
  double cost = 0.0;
  double energy_kwh = 0.0;
  double carbon_g = 0.0;
};

struct CompiledComponent {
  const Component* spec = nullptr;
  std::vector<Option> options;
  int keep_option = -1;
  /// requires[o] = components that option o depends on.
  std::vector<std::vector<int>> requires_;
};

/// Index-based view of a PlacementProblem with unary constraints already
/// applied to the option domains.
class CompiledProblem {
 public:
  explicit CompiledProblem(const PlacementProblem& p) : problem_(p) {
    const auto& app = p.app;
    const auto& infra = p.infra;
    std::map<std::string, int> comp_index;
    for (std::size_t i = 0; i < app.components.size(); ++i) comp_index[app.components[i].name] = int(i);
    std::map<std::string, int> res_index;
    for (const auto& n : infra.nodes) {
      for (const auto& [r, _] : n.consumable_capacities) res_index.emplace(r, 0);
    }
    for (const auto& c : app.components) {
      for (const auto& f : c.flavours) {
        for (const auto& [r, _] : f.consumable_demands) res_index.emplace(r, 0);
      }
    }
    int next = 0;
    for (auto& [r, idx] : res_index) idx = next++;
    num_resources_ = next;

    for (const auto& n : infra.nodes) {
      std::vector<double> cap(num_resources_, 0.0);
      for (const auto& [r, q] : n.consumable_capacities) cap[res_index[r]] = q;
      capacity_.push_back(std::move(cap));
    }
    const int nn = int(infra.nodes.size());
    link_.assign(nn * nn, std::nullopt);
    for (int a = 0; a < nn; ++a) {
      for (int b = 0; b < nn; ++b) link_[a * nn + b] = infra.LinkBetween(infra.nodes[a].name, infra.nodes[b].name);
    }

    for (const auto& c : app.components) {
      CompiledComponent cc;
      cc.spec = &c;
      for (std::size_t fi = 0; fi < c.flavours.size(); ++fi) {
        const Flavour& f = c.flavours[fi];
        for (int ni = 0; ni < nn; ++ni) {
          const Node& node = infra.nodes[ni];
          if (!node.available || !AttributesSatisfied(f, node)) continue;
          if (IsAvoided(c.name, f.name, node.name)) continue;
          Option o;
          o.flavour = int(fi);
          o.node = ni;
          o.importance = f.importance;
          o.demand.assign(num_resources_, 0.0);
          bool fits = true;
          for (const auto& [r, q] : f.consumable_demands) {
            const int ri = res_index[r];
            o.demand[ri] = q;
            if (!detail::WithinLimit(q, capacity_[ni][ri])) fits = false;
            auto it = node.unit_costs.find(r);
            if (it != node.unit_costs.end()) o.cost += q * it->second;
          }
          o.energy_kwh = f.energy_w * p.round_hours / 1000.0;
          o.carbon_g = o.energy_kwh * node.carbon_intensity;
          if (!fits || !detail::WithinLimit(o.cost, app.monetary_budget) ||
              !detail::WithinLimit(o.energy_kwh, app.energy_budget) ||
              !detail::WithinLimit(o.carbon_g, app.carbon_budget)) {
            continue;
          }
          std::vector<int> req;
          for (const auto& dep : f.dependencies) req.push_back(comp_index.at(dep.component));
          if (p.previous) {
            const Placement* prev = p.previous->Find(c.name);
            if (prev != nullptr && prev->flavour == f.name && prev->node == node.name) {
              cc.keep_option = int(cc.options.size());
            }
          }
          cc.options.push_back(std::move(o));
          cc.requires_.push_back(std::move(req));
        }
      }
      components_.push_back(std::move(cc));
    }
    if (p.objective_mode != ObjectiveMode::kMinimizeChanges) {
      for (auto& cc : components_) cc.keep_option = -1;
    }

    // Pairwise compatibility tables.
    const int nc = int(components_.size());
    compat_.assign(nc * nc, {});
    for (int i = 0; i < nc; ++i) {
      for (int j = 0; j < nc; ++j) {
        if (i == j) continue;
        auto& table = compat_[i * nc + j];
        const auto& oi = components_[i].options;
        const auto& oj = components_[j].options;
        table.assign(oi.size() * oj.size(), 1);
        for (std::size_t a = 0; a < oi.size(); ++a) {
          for (std::size_t b = 0; b < oj.size(); ++b) table[a * oj.size() + b] = PairOk(i, oi[a], j, oj[b]);
        }
      }
    }
  }

  int size() const { return int(components_.size()); }
  const CompiledComponent& component(int i) const { return components_[i]; }
  int num_resources() const { return num_resources_; }
  int num_nodes() const { return int(capacity_.size()); }
  double capacity(int node, int res) const { return capacity_[node][res]; }
  bool Compatible(int i, int oi, int j, int oj) const {
    return compat_[i * size() + j][oi * components_[j].options.size() + oj] != 0;
  }
  const PlacementProblem& problem() const { return problem_; }

  Placement PlacementOf(int i, int o) const {
    const auto& cc = components_[i];
    const auto& opt = cc.options[o];
    return Placement{cc.spec->flavours[opt.flavour].name, problem_.infra.nodes[opt.node].name};
  }

 private:
  bool IsAvoided(const std::string& c, const std::string& f, const std::string& n) const {
    for (const auto& sc : problem_.enforced) {
      if (sc.kind == ConstraintKind::kAvoid && sc.component == c && sc.flavour == f && sc.node == n) return true;
    }
    return false;
  }

  bool LinkOk(int na, int nb, const Dependency& dep) const {
    const auto& link = link_[na * num_nodes() + nb];
    if (!link) return false;
    if (dep.max_latency_ms && !detail::WithinLimit(link->latency_ms, *dep.max_latency_ms)) return false;
    if (dep.min_availability && !detail::WithinLimit(*dep.min_availability, link->availability)) return false;
    return true;
  }

  bool PairOk(int i, const Option& a, int j, const Option& b) const {
    const Component& ci = *components_[i].spec;
    const Component& cj = *components_[j].spec;
    const Flavour& fa = ci.flavours[a.flavour];
    const Flavour& fb = cj.flavours[b.flavour];
    if (const Dependency* d = fa.DependencyOn(cj.name)) {
      if (fb.importance < d->min_importance || !LinkOk(a.node, b.node, *d)) return false;
    }
    if (const Dependency* d = fb.DependencyOn(ci.name)) {
      if (fa.importance < d->min_importance || !LinkOk(b.node, a.node, *d)) return false;
    }
    for (const auto& sc : problem_.enforced) {
      if (!sc.IsPairwise()) continue;
      const bool forward = sc.component == ci.name && sc.flavour == fa.name &&
                           sc.other_component == cj.name && sc.other_flavour == fb.name;
      const bool backward = sc.component == cj.name && sc.flavour == fb.name &&
                            sc.other_component == ci.name && sc.other_flavour == fa.name;
      if (!forward && !backward) continue;
      if (sc.kind == ConstraintKind::kAffinity && a.node != b.node) return false;
      if (sc.kind == ConstraintKind::kAntiAffinity && a.node == b.node) return false;
    }
    return true;
  }

  const PlacementProblem& problem_;
  int num_resources_ = 0;
  std::vector<std::vector<double>> capacity_;
  std::vector<std::optional<Link>> link_;
  std::vector<CompiledComponent> components_;
  std::vector<std::vector<char>> compat_;
};

class TimeoutReached {};

/// Depth-first branch and bound over a fixed component order.
class Search {
 public:
  enum class Phase { kOptimize, kTieBreak };

  Search(const CompiledProblem& cp, Phase phase, std::chrono::steady_clock::time_point deadline)
      : cp_(cp), phase_(phase), deadline_(deadline) {
    const int n = cp.size();
    decision_.assign(n, kUndecided);
    usage_.assign(cp.num_nodes(), std::vector<double>(cp.num_resources(), 0.0));
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    if (phase == Phase::kOptimize) {
      std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
        const auto& ca = *cp.component(a).spec;
        const auto& cb = *cp.component(b).spec;
        if (ca.MaxImportance() != cb.MaxImportance()) return ca.MaxImportance() > cb.MaxImportance();
        return ca.name < cb.name;
      });
    } else {
      std::stable_sort(order_.begin(), order_.end(),
                       [&](int a, int b) { return cp.component(a).spec->name < cp.component(b).spec->name; });
      lex_options_.resize(n);
      for (int i = 0; i < n; ++i) {
        auto& lo = lex_options_[i];
        lo.resize(cp.component(i).options.size());
        std::iota(lo.begin(), lo.end(), 0);
        std::stable_sort(lo.begin(), lo.end(), [&](int a, int b) { return cp.PlacementOf(i, a) < cp.PlacementOf(i, b); });
      }
    }
  }

  /// Phase 1: returns true when any feasible leaf was found.
  bool Optimize() {
    Recurse(0);
    return best_.has_value();
  }

  /// Phase 2: first feasible leaf reaching `target` in lexicographic order.
  bool FindLexFirst(ObjectiveValue target) {
    target_ = target;
    Recurse(0);
    return best_.has_value();
  }

  const std::optional<std::vector<int>>& best() const { return best_; }
  ObjectiveValue best_value() const { return best_value_; }
  long long explored() const { return explored_; }

 private:
  // Returns true to stop the whole search (phase 2 hit).
  bool Recurse(int depth) {
    if ((++explored_ & 0xff) == 0 && std::chrono::steady_clock::now() > deadline_) throw TimeoutReached{};
    if (depth == cp_.size()) return Leaf();
    const ObjectiveValue ub = Bound(depth);
    if (!ub_viable_) return false;
    if (phase_ == Phase::kOptimize) {
      if (best_ && ub <= best_value_) return false;
    } else if (ub < target_) {
      return false;
    }
    const int i = order_[depth];
    for (int o : Candidates(i)) {
      if (o == kSkipped) {
        if (!CanSkip(i)) continue;
        decision_[i] = kSkipped;
        const bool stop = Recurse(depth + 1);
        decision_[i] = kUndecided;
        if (stop) return true;
        continue;
      }
      if (!CanAssign(i, o)) continue;
      Apply(i, o, +1);
      const bool stop = Recurse(depth + 1);
      Apply(i, o, -1);
      if (stop) return true;
    }
    return false;
  }

  std::vector<int> Candidates(int i) const {
    const auto& cc = cp_.component(i);
    std::vector<int> out;
    if (phase_ == Phase::kTieBreak) {
      out.push_back(kSkipped);
      out.insert(out.end(), lex_options_[i].begin(), lex_options_[i].end());
      return out;
    }
    out.resize(cc.options.size());
    std::iota(out.begin(), out.end(), 0);
    std::vector<double> load(cc.options.size(), 0.0);
    for (std::size_t k = 0; k < cc.options.size(); ++k) load[k] = NodeLoad(cc.options[k].node);
    std::stable_sort(out.begin(), out.end(), [&](int a, int b) {
      const bool ka = a == cc.keep_option, kb = b == cc.keep_option;
      if (ka != kb) return ka;
      if (cc.options[a].importance != cc.options[b].importance) {
        return cc.options[a].importance > cc.options[b].importance;
      }
      return load[a] < load[b];
    });
    out.push_back(kSkipped);
    return out;
  }

  double NodeLoad(int node) const {
    double load = 0.0;
    for (int r = 0; r < cp_.num_resources(); ++r) {
      const double cap = cp_.capacity(node, r);
      if (cap > 0) load += usage_[node][r] / cap;
    }
    return load;
  }

  bool CanSkip(int i) const {
    if (cp_.component(i).spec->mandatory) return false;
    for (int j = 0; j < cp_.size(); ++j) {
      const int oj = decision_[j];
      if (oj < 0) continue;
      const auto& req = cp_.component(j).requires_[oj];
      if (std::find(req.begin(), req.end(), i) != req.end()) return false;
    }
    return true;
  }

  bool Consistent(int i, int o) const {
    const auto& cc = cp_.component(i);
    const auto& opt = cc.options[o];
    for (int r = 0; r < cp_.num_resources(); ++r) {
      if (opt.demand[r] > 0 && !detail::WithinLimit(usage_[opt.node][r] + opt.demand[r], cp_.capacity(opt.node, r))) {
        return false;
      }
    }
    const auto& app = cp_.problem().app;
    if (!detail::WithinLimit(cost_ + opt.cost, app.monetary_budget) ||
        !detail::WithinLimit(energy_ + opt.energy_kwh, app.energy_budget) ||
        !detail::WithinLimit(carbon_ + opt.carbon_g, app.carbon_budget)) {
      return false;
    }
    for (int j = 0; j < cp_.size(); ++j) {
      const int oj = decision_[j];
      if (j == i || oj == kUndecided) continue;
      if (oj == kSkipped) {
        const auto& req = cc.requires_[o];
        if (std::find(req.begin(), req.end(), j) != req.end()) return false;
      } else if (!cp_.Compatible(i, o, j, oj)) {
        return false;
      }
    }
    return true;
  }

  bool CanAssign(int i, int o) const { return Consistent(i, o); }

  void Apply(int i, int o, int sign) {
    const auto& cc = cp_.component(i);
    const auto& opt = cc.options[o];
    for (int r = 0; r < cp_.num_resources(); ++r) usage_[opt.node][r] += sign * opt.demand[r];
    cost_ += sign * opt.cost;
    energy_ += sign * opt.energy_kwh;
    carbon_ += sign * opt.carbon_g;
    value_.importance += sign * opt.importance;
    if (o == cc.keep_option) value_.kept += sign;
    decision_[i] = sign > 0 ? o : kUndecided;
  }

  /// Upper bound over completions, with a forward check that every
  /// undecided component still required has a consistent option left.
  ObjectiveValue Bound(int depth) {
    ub_viable_ = true;
    ObjectiveValue ub = value_;
    for (int d = depth; d < cp_.size(); ++d) {
      const int k = order_[d];
      const auto& cc = cp_.component(k);
      bool required = cc.spec->mandatory;
      if (!required) {
        for (int j = 0; j < cp_.size() && !required; ++j) {
          const int oj = decision_[j];
          if (oj < 0) continue;
          const auto& req = cp_.component(j).requires_[oj];
          required = std::find(req.begin(), req.end(), k) != req.end();
        }
      }
      int best_imp = 0;
      bool keep_viable = false;
      bool any = false;
      for (std::size_t o = 0; o < cc.options.size(); ++o) {
        if (!Consistent(k, int(o))) continue;
        any = true;
        best_imp = std::max(best_imp, cc.options[o].importance);
        if (int(o) == cc.keep_option) keep_viable = true;
      }
      if (required && !any) {
        ub_viable_ = false;
        return ub;
      }
      ub.importance += best_imp;
      if (keep_viable) ++ub.kept;
    }
    return ub;
  }

  bool Leaf() {
    // C4: deployed non-mandatory components must be used by another one.
    for (int i = 0; i < cp_.size(); ++i) {
      if (decision_[i] < 0 || cp_.component(i).spec->mandatory) continue;
      bool used = false;
      for (int j = 0; j < cp_.size() && !used; ++j) {
        if (j == i || decision_[j] < 0) continue;
        const auto& req = cp_.component(j).requires_[decision_[j]];
        used = std::find(req.begin(), req.end(), i) != req.end();
      }
      if (!used) return false;
    }
    if (phase_ == Phase::kOptimize) {
      if (!best_ || value_ > best_value_) {
        best_ = decision_;
        best_value_ = value_;
      }
      return false;
    }
    if (value_ == target_) {
      best_ = decision_;
      best_value_ = value_;
      return true;
    }
    return false;
  }

  const CompiledProblem& cp_;
  Phase phase_;
  std::chrono::steady_clock::time_point deadline_;
  std::vector<int> order_;
  std::vector<std::vector<int>> lex_options_;
  std::vector<int> decision_;
  std::vector<std::vector<double>> usage_;
  double cost_ = 0.0, energy_ = 0.0, carbon_ = 0.0;
  ObjectiveValue value_;
  ObjectiveValue target_;
  bool ub_viable_ = true;
  std::optional<std::vector<int>> best_;
  ObjectiveValue best_value_;
  long long explored_ = 0;
};

Deployment ToDeployment(const CompiledProblem& cp, const std::vector<int>& decision) {
  Deployment d;
  for (int i = 0; i < cp.size(); ++i) {
    if (decision[i] >= 0) d.assignments[cp.component(i).spec->name] = cp.PlacementOf(i, decision[i]);
  }
  return d;
}

}  // namespace

SolveOutcome Solve(const PlacementProblem& problem, Seconds time_limit) {
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::duration_cast<std::chrono::steady_clock::duration>(time_limit);
  CompiledProblem cp(problem);
  SolveOutcome out;
  Search optimize(cp, Search::Phase::kOptimize, deadline);
  try {
    optimize.Optimize();
  } catch (const TimeoutReached&) {
    out.status = SolveStatus::kTimedOut;
    out.explored = optimize.explored();
    if (optimize.best()) {
      out.deployment = ToDeployment(cp, *optimize.best());
      out.value = optimize.best_value();
    }
    return out;
  }
  out.explored = optimize.explored();
  if (!optimize.best()) {
    out.status = SolveStatus::kUnsatisfiable;
    return out;
  }
  Search tie_break(cp, Search::Phase::kTieBreak, deadline);
  try {
    tie_break.FindLexFirst(optimize.best_value());
  } catch (const TimeoutReached&) {
    out.status = SolveStatus::kTimedOut;
    out.deployment = ToDeployment(cp, *optimize.best());
    out.value = optimize.best_value();
    out.explored += tie_break.explored();
    return out;
  }
  out.explored += tie_break.explored();
  out.status = SolveStatus::kOptimal;
  out.deployment = ToDeployment(cp, *tie_break.best());
  out.value = tie_break.best_value();
  return out;
}

}  // namespace edgeplan
