#include "mfpt/oracle.hpp"

#include <cmath>
#include <functional>

namespace mfpt {

namespace {

void check_budget(const Law& law, int depth, const EnumerationBudget& budget) {
  if (depth > budget.max_depth)
    throw DomainError("oracle: requested depth exceeds the enumeration budget");
  double paths = std::pow(static_cast<double>(law.atoms().size()), depth);
  if (budget.prune_tol <= 0.0 &&
      paths > static_cast<double>(budget.max_paths))
    throw DomainError("oracle: path count exceeds the enumeration budget");
}

struct Node {
  Vec v;        // perpetuity value V_n
  Mat pi;       // Pi_n = M_1 ... M_n
  long double p;
};

// Depth-first walk over atom sequences. The visitor sees the state after
// each step and returns true to stop that branch early.
void enumerate(const Law& law, int n_max, const EnumerationBudget& budget,
               long double& pruned,
               const std::function<bool(int, const Node&)>& visit) {
  const int d = law.d();
  struct Frame { Node node; std::size_t next_atom; };
  std::vector<Frame> stack;
  stack.reserve(static_cast<std::size_t>(n_max) + 1);
  Node root{Vec::Zero(d), Mat::Identity(d, d), 1.0L};
  stack.push_back({std::move(root), 0});
  while (!stack.empty()) {
    Frame& top = stack.back();
    int depth = static_cast<int>(stack.size()) - 1;
    if (depth == n_max || top.next_atom >= law.atoms().size()) {
      stack.pop_back();
      continue;
    }
    const Atom& a = law.atoms()[top.next_atom++];
    Node child;
    child.p = top.node.p * static_cast<long double>(a.p);
    if (budget.prune_tol > 0.0 &&
        child.p < static_cast<long double>(budget.prune_tol)) {
      pruned += child.p;
      continue;
    }
    child.v = top.node.v + top.node.pi * a.Q;  // V_{n+1} = V_n + Pi_n Q_{n+1}
    child.pi = top.node.pi * a.M;
    bool stop = visit(depth + 1, child);
    if (!stop) stack.push_back({std::move(child), 0});
  }
}

}  // namespace

PassageLaw exact_passage_law(const Law& law, double u, int n_max, const Vec* y,
                             EnumerationBudget budget) {
  if (u <= 0.0) throw DomainError("exact_passage_law: u must be > 0");
  check_budget(law, n_max, budget);
  PassageLaw out;
  out.p_tau.assign(static_cast<std::size_t>(n_max), 0.0);
  std::vector<long double> mass(static_cast<std::size_t>(n_max), 0.0L);
  long double beyond = 0.0L, pruned = 0.0L;
  enumerate(law, n_max, budget, pruned, [&](int n, const Node& node) {
    double level = y ? y->dot(node.v) : node.v.sum();
    if (level > u) {  // strict: ties at u do not trigger passage
      mass[static_cast<std::size_t>(n - 1)] += node.p;
      return true;
    }
    if (n == n_max) beyond += node.p;
    return false;
  });
  for (int n = 0; n < n_max; ++n)
    out.p_tau[static_cast<std::size_t>(n)] =
        static_cast<double>(mass[static_cast<std::size_t>(n)]);
  out.p_beyond = static_cast<double>(beyond);
  out.pruned_mass = static_cast<double>(pruned);
  return out;
}

double exact_matrix_moment(const Law& law, double s, int n,
                           EnumerationBudget budget) {
  check_budget(law, n, budget);
  long double acc = 0.0L, pruned = 0.0L;
  enumerate(law, n, budget, pruned, [&](int depth, const Node& node) {
    if (depth == n)
      acc += node.p * static_cast<long double>(std::pow(op_norm(node.pi), s));
    return false;
  });
  return static_cast<double>(acc);
}

WValues exact_W(const Law& law, const SpectralSolution& spectral, double s,
                int n, EnumerationBudget budget) {
  check_budget(law, n, budget);
  long double acc_w = 0.0L, acc_p = 0.0L, pruned = 0.0L;
  enumerate(law, n, budget, pruned, [&](int depth, const Node& node) {
    if (depth == n) {
      double nv = node.v.sum();
      if (nv > 0.0) {
        double pw = std::pow(nv, s);
        acc_p += node.p * static_cast<long double>(pw);
        acc_w += node.p *
                 static_cast<long double>(pw * spectral.r_at(node.v / nv));
      }
    }
    return false;
  });
  double scale = std::pow(spectral.kappa, n);
  return {static_cast<double>(acc_w) / scale,
          static_cast<double>(acc_p) / scale};
}

double exact_exceedance(const Law& law, double u, int n, const Vec* y,
                        EnumerationBudget budget) {
  check_budget(law, n, budget);
  long double acc = 0.0L, pruned = 0.0L;
  enumerate(law, n, budget, pruned, [&](int depth, const Node& node) {
    if (depth == n) {
      double level = y ? y->dot(node.v) : node.v.sum();
      if (level > u) acc += node.p;
    }
    return false;
  });
  return static_cast<double>(acc);
}

double exact_matrix_tail(const Law& law, int n, double log_threshold,
                         const Vec& x, const Vec* y, EnumerationBudget budget) {
  check_budget(law, n, budget);
  long double acc = 0.0L, pruned = 0.0L;
  enumerate(law, n, budget, pruned, [&](int depth, const Node& node) {
    if (depth == n) {
      Vec v = node.pi * x;
      double level = y ? y->dot(v) : v.sum();
      if (level > 0.0 && std::log(level) >= log_threshold) acc += node.p;
    }
    return false;
  });
  return static_cast<double>(acc);
}

}  // namespace mfpt
